use crate::{load, Failure, Source};
use anaconda_core::analysis::brute_force_opt;
use anaconda_core::objective::{
    check_monotone, check_second_order_submodular, check_submodular, check_voc_shape, coverage_cells, curvature,
    ground_set, Choice, CoverageObjective, Objective,
};
use anaconda_core::scenario::build_instance;
use clap::{Args, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Clone, Copy, ValueEnum)]
pub enum Check {
    CheckMonotone,
    CheckSubmodular,
    CheckSecondOrder,
    /// Value of coordination of camera 0's first action, over every other element.
    CheckVoc,
    BruteForceOpt,
    Curvature,
}

#[derive(Args)]
pub struct OracleArgs {
    check: Check,
    /// Experiment file; the urban preset when neither this nor --preset is given.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Cameras to keep, by index.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    cameras: Vec<usize>,
    /// Direction indices to keep for every camera.
    #[arg(long, value_delimiter = ',', default_value = "0,2,4")]
    actions: Vec<usize>,
    /// Trial whose placement to use.
    #[arg(long, default_value_t = 0)]
    trial: u32,
}

/// The selected cameras and directions of the first variant, rasterized.
fn micro_instance(args: &OracleArgs) -> Result<CoverageObjective, Failure> {
    let source = Source {
        config: args.config.clone(),
        preset: Some(args.preset.clone().unwrap_or_else(|| "urban".into())),
        overrides: Vec::new(),
    };
    let loaded = load(&source)?;
    let inst = build_instance(&loaded.experiment.variants[0].config, args.trial)?;
    let world = &inst.world;
    let mut sets = Vec::new();
    for &c in &args.cameras {
        let cam = world
            .cameras
            .get(c)
            .ok_or_else(|| Failure::new(2, format!("no camera {c}")))?;
        let mut actions = Vec::new();
        for &a in &args.actions {
            if a >= cam.directions.len() {
                return Err(Failure::new(2, format!("no direction {a}")));
            }
            actions.push(coverage_cells(world, c, a)?);
        }
        sets.push(actions);
    }
    Ok(CoverageObjective::from_sets(sets, world.cell_count(), world.cell_area())?)
}

fn verdict<W: Serialize>(w: Option<W>) -> Result<(), Failure> {
    match w {
        None => {
            println!("ok");
            Ok(())
        }
        Some(w) => {
            println!("violation: {}", serde_json::to_string(&w).expect("witness serializes"));
            Err(Failure::new(1, "property violated"))
        }
    }
}

pub fn run(args: &OracleArgs) -> Result<(), Failure> {
    let f = micro_instance(args)?;
    let ground = ground_set(&f);
    match args.check {
        Check::CheckMonotone => verdict(check_monotone(&f, &ground)?),
        Check::CheckSubmodular => verdict(check_submodular(&f, &ground)?),
        Check::CheckSecondOrder => verdict(check_second_order_submodular(&f, &ground)?),
        Check::CheckVoc => {
            let item = Choice::new(0, 0);
            let others: Vec<Choice> = ground.iter().copied().filter(|c| c.agent != 0).collect();
            verdict(check_voc_shape(&f, item, &others)?)
        }
        Check::BruteForceOpt => {
            let (a, v) = brute_force_opt(&f)?;
            let actions: Vec<usize> = (0..f.agent_count()).filter_map(|i| a.action_of(i)).collect();
            println!("{}", serde_json::json!({ "actions": actions, "value": v }));
            Ok(())
        }
        Check::Curvature => {
            println!("{}", curvature(&f, &ground)?);
            Ok(())
        }
    }
}
