//! WebAssembly bindings for `www/index.html`.
//!
//! Build with `wasm-pack build crates/demo --target web --out-dir www/pkg`
//! and serve `crates/demo/www`.

use anaconda_core::coordination::{AgentSetup, Anaconda, NeighborPolicy};
use anaconda_core::objective::{Choice, CoverageObjective, CoverageWorld, Objective};
use anaconda_core::scenario::{build_instance, preset_with};
use anaconda_core::timing::{anaconda_round_time, budget_to_rounds, DelayModel};
use wasm_bindgen::prelude::*;

/// The eight urban cameras, a learning team, and the headings on screen.
#[wasm_bindgen]
pub struct UrbanDemo {
    world: CoverageWorld,
    objective: CoverageObjective,
    team: Anaconda,
    actions: Vec<usize>,
    area: f64,
}

impl UrbanDemo {
    pub fn build(alpha: u32, seed: u32) -> anaconda_core::Result<Self> {
        let e = preset_with(
            "urban",
            &[format!("cameras.alpha={alpha}"), format!("seed={seed}")],
        )?;
        let config = &e.variants[0].config;
        let inst = build_instance(config, 0)?;
        let n = inst.objective.agent_count();
        let setups: Vec<AgentSetup> = (0..n)
            .map(|i| AgentSetup {
                action_count: inst.objective.action_count(i),
                coordination: inst.coordination[i].clone(),
                alpha: inst.alphas[i],
                policy: NeighborPolicy::Learned,
            })
            .collect();
        let horizon = config.horizon.rounds.unwrap_or(3000);
        let team = Anaconda::new(&inst.objective, &setups, horizon, DelayModel::ZERO, config.seed, 0)?;
        let area = inst.interest_area();
        Ok(UrbanDemo {
            world: inst.world,
            objective: inst.objective,
            team,
            actions: vec![0; n],
            area,
        })
    }

    fn choices(&self) -> Vec<Choice> {
        self.actions.iter().enumerate().map(|(i, &a)| Choice::new(i, a)).collect()
    }

    pub fn advance(&mut self, rounds: u32) -> anaconda_core::Result<f64> {
        for _ in 0..rounds {
            let r = self.team.step(&self.objective)?;
            self.actions = (0..self.actions.len()).map(|i| r.actions.action_of(i).unwrap_or(0)).collect();
        }
        Ok(self.coverage())
    }
}

#[wasm_bindgen]
impl UrbanDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(alpha: u32, seed: u32) -> Result<UrbanDemo, JsError> {
        Self::build(alpha, seed).map_err(|e| JsError::new(&e.to_string()))
    }

    /// Runs `rounds` learning rounds; returns the coverage percentage.
    pub fn step(&mut self, rounds: u32) -> Result<f64, JsError> {
        self.advance(rounds).map_err(|e| JsError::new(&e.to_string()))
    }

    pub fn rounds(&self) -> f64 {
        self.team.rounds_done() as f64
    }

    /// Percent of the interest area covered by the current headings.
    pub fn coverage(&self) -> f64 {
        100.0 * self.objective.value(&self.choices()) / self.area
    }

    /// Turns one camera to its next heading, counter-clockwise.
    pub fn rotate(&mut self, camera: usize) -> f64 {
        if let Some(a) = self.actions.get_mut(camera) {
            *a = (*a + 1) % self.world.cameras[camera].directions.len();
        }
        self.coverage()
    }

    pub fn cols(&self) -> usize {
        self.world.cols()
    }

    pub fn rows(&self) -> usize {
        self.world.rows()
    }

    pub fn cell_size(&self) -> f64 {
        self.world.cell_size
    }

    /// Per cell, row-major from the bottom: 0 outside the blocks, 1 dark, 2 seen.
    pub fn cell_states(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.world.interest_mask().iter().map(|&m| u8::from(m)).collect();
        for c in self.objective.covered_elements(&self.choices()) {
            if out[c] == 1 {
                out[c] = 2;
            }
        }
        out
    }

    /// `x, y, heading, radius, angle of view` per camera, flattened.
    pub fn cameras(&self) -> Vec<f64> {
        self.world
            .cameras
            .iter()
            .zip(&self.actions)
            .flat_map(|(c, &a)| [c.position[0], c.position[1], c.directions[a], c.fov_radius, c.aov])
            .collect()
    }
}

/// Simulated seconds for one round with bandwidth `alpha`.
#[wasm_bindgen]
pub fn round_time(alpha: u32, tau_f: f64, tau_c: f64) -> Result<f64, JsError> {
    let m = DelayModel::new(tau_f, tau_c).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(anaconda_round_time(alpha as usize, m))
}

/// Rounds completed within `budget` seconds.
#[wasm_bindgen]
pub fn rounds_within(budget: f64, alpha: u32, tau_f: f64, tau_c: f64) -> Result<f64, JsError> {
    let per = round_time(alpha, tau_f, tau_c)?;
    budget_to_rounds(budget, per)
        .map(|r| r as f64)
        .map_err(|e| JsError::new(&e.to_string()))
}
