use super::config::{Placement, ScenarioConfig};
use crate::benchmarks::CommGraph;
use crate::error::{Error, Result};
use crate::objective::{CameraSpec, CoverageObjective, CoverageWorld};
use crate::rng::{stream, Role};
use rand::Rng;

/// Give up on connected placements after this many draws.
pub const MAX_PLACEMENT_ATTEMPTS: u32 = 10_000;

/// `M_i = { j != i : |x_j - x_i| <= c_i }`. Not symmetric when ranges differ.
pub fn build_coordination_neighborhoods(positions: &[[f64; 2]], comm_ranges: &[f64]) -> Vec<Vec<usize>> {
    positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (0..positions.len())
                .filter(|&j| j != i)
                .filter(|&j| {
                    let q = positions[j];
                    (q[0] - p[0]).hypot(q[1] - p[1]) <= comm_ranges[i]
                })
                .collect()
        })
        .collect()
}

/// Everything a trial needs besides the algorithm.
#[derive(Debug, Clone)]
pub struct Instance {
    pub world: CoverageWorld,
    pub objective: CoverageObjective,
    pub coordination: Vec<Vec<usize>>,
    pub alphas: Vec<usize>,
    /// Placements discarded for a disconnected communication graph.
    pub rejections: u32,
}

impl Instance {
    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.world.positions()
    }

    pub fn interest_area(&self) -> f64 {
        self.world.interest_area()
    }

    pub fn is_connected(&self) -> bool {
        CommGraph::from_coordination(&self.coordination).is_ok_and(|g| g.is_strongly_connected())
    }
}

fn uniform_positions(config: &ScenarioConfig, trial: u32, attempt: u32) -> Vec<[f64; 2]> {
    let mut rng = stream(config.seed, &[trial as u64, Role::Placement as u64, attempt as u64]);
    let (w, h) = (config.world.width_units, config.world.height_units);
    (0..config.camera_count())
        .map(|_| [rng.random::<f64>() * w, rng.random::<f64>() * h])
        .collect()
}

fn assemble(config: &ScenarioConfig, positions: Vec<[f64; 2]>, rejections: u32) -> Result<Instance> {
    let c = &config.cameras;
    let directions = CameraSpec::even_directions(c.directions);
    let params: Vec<_> = (0..positions.len()).map(|i| c.params(i)).collect();
    let coordination =
        build_coordination_neighborhoods(&positions, &params.iter().map(|p| p.comm_range).collect::<Vec<_>>());
    let cameras = positions
        .into_iter()
        .zip(&params)
        .map(|(position, p)| CameraSpec {
            position,
            fov_radius: p.fov_radius,
            aov: p.aov_degrees.to_radians(),
            directions: directions.clone(),
            comm_range: p.comm_range,
        })
        .collect();
    let w = &config.world;
    let world = CoverageWorld::new(w.width_units, w.height_units, w.cell_size_units, &w.interest(), cameras)?;
    Ok(Instance {
        objective: CoverageObjective::from_world(&world),
        world,
        coordination,
        alphas: params.iter().map(|p| p.alpha).collect(),
        rejections,
    })
}

/// The world of trial `trial`. Uniform placements are redrawn per trial from
/// the placement stream, so every algorithm of a trial sees the same cameras.
pub fn build_instance(config: &ScenarioConfig, trial: u32) -> Result<Instance> {
    match config.cameras.placement {
        Placement::Explicit => {
            let positions = config.cameras.positions_units.clone().unwrap_or_default();
            let inst = assemble(config, positions, 0)?;
            if config.cameras.require_connected && !inst.is_connected() {
                return Err(Error::Connectivity(
                    "the listed cameras do not form a strongly connected communication graph".into(),
                ));
            }
            Ok(inst)
        }
        Placement::Uniform => {
            for attempt in 0..MAX_PLACEMENT_ATTEMPTS {
                let positions = uniform_positions(config, trial, attempt);
                if config.cameras.require_connected {
                    let ranges: Vec<f64> = (0..positions.len()).map(|i| config.cameras.params(i).comm_range).collect();
                    let m = build_coordination_neighborhoods(&positions, &ranges);
                    if !CommGraph::from_coordination(&m)?.is_strongly_connected() {
                        continue;
                    }
                }
                return assemble(config, positions, attempt);
            }
            Err(Error::Connectivity(format!(
                "no strongly connected placement in {MAX_PLACEMENT_ATTEMPTS} draws; raise the communication range"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets::preset;

    #[test]
    fn neighborhoods_from_ranges() {
        let p = [[0.0, 0.0], [3.0, 4.0], [10.0, 0.0]];
        assert_eq!(build_coordination_neighborhoods(&p, &[0.0; 3]), vec![vec![]; 3]);
        assert_eq!(
            build_coordination_neighborhoods(&p, &[100.0; 3]),
            vec![vec![1, 2], vec![0, 2], vec![0, 1]]
        );
        // the range is inclusive and belongs to the listener
        assert_eq!(
            build_coordination_neighborhoods(&p, &[5.0, 0.0, 10.0]),
            vec![vec![1], vec![], vec![0, 1]]
        );
    }

    #[test]
    fn urban_adjacency_at_range_25() {
        let xs = [0.0, 20.0, 30.0, 50.0, 60.0, 80.0, 90.0, 110.0];
        let p: Vec<[f64; 2]> = xs.iter().map(|&x| [x, 20.0]).collect();
        let m = build_coordination_neighborhoods(&p, &[25.0; 8]);
        // all cameras share y, so |x_i - x_j| <= 25 decides
        let expected = vec![
            vec![1],
            vec![0, 2],
            vec![1, 3],
            vec![2, 4],
            vec![3, 5],
            vec![4, 6],
            vec![5, 7],
            vec![6],
        ];
        assert_eq!(m, expected);
    }

    #[test]
    fn urban_world() {
        let e = preset("urban").unwrap();
        let inst = build_instance(&e.variants[0].config, 0).unwrap();
        assert_eq!(inst.world.cameras.len(), 8);
        assert_eq!(inst.world.cameras[0].directions.len(), 16);
        assert!((inst.interest_area() - 3200.0).abs() < 1e-9);
        assert!(inst.coordination.iter().all(|m| m.len() == 7));
    }

    #[test]
    fn uniform_placement_is_per_trial_and_reproducible() {
        let e = preset("no-delay").unwrap();
        let c = &e.variants[0].config;
        let a = build_instance(c, 0).unwrap();
        let b = build_instance(c, 0).unwrap();
        let d = build_instance(c, 1).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert_ne!(a.positions(), d.positions());
        assert!(a.is_connected() && d.is_connected());
        assert!(a.positions().iter().all(|p| (0.0..=50.0).contains(&p[0]) && (0.0..=50.0).contains(&p[1])));
    }

    #[test]
    fn hopeless_connectivity_is_reported() {
        let mut c = preset("no-delay").unwrap().variants[0].config.clone();
        c.cameras.comm_range_units = 0.0;
        assert!(matches!(build_instance(&c, 0), Err(Error::Connectivity(_))));
    }
}
