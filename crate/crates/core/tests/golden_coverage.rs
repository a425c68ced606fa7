//! Rasterized sectors against lists produced by `fixtures/rasterize.py`.

use anaconda_core::objective::{coverage_cells, CameraSpec, CoverageWorld, Interest};
use anaconda_core::scenario::build_urban_preset;

fn fixture(name: &str) -> Vec<usize> {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{path}: {e}"))
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().unwrap())
        .collect()
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

#[test]
fn urban_sectors_match_reference() {
    let world = build_urban_preset().unwrap();
    assert_eq!(world.cols(), 220);
    assert_eq!(world.rows(), 80);
    for (camera, direction, name) in [
        (0, 0, "urban_cam0_dir0.txt"),
        (1, 10, "urban_cam1_dir10.txt"),
        (4, 4, "urban_cam4_dir4.txt"),
    ] {
        let got = sorted(coverage_cells(&world, camera, direction).unwrap());
        assert_eq!(got, fixture(name), "camera {camera} direction {direction}");
    }
}

#[test]
fn open_map_sector_matches_reference() {
    let cam = CameraSpec {
        position: [10.3, 20.7],
        fov_radius: 8.0,
        aov: 60f64.to_radians(),
        directions: CameraSpec::even_directions(16),
        comm_range: 0.0,
    };
    let world = CoverageWorld::new(50.0, 50.0, 1.0, &Interest::Full, vec![cam]).unwrap();
    let got = sorted(coverage_cells(&world, 0, 3).unwrap());
    assert_eq!(got, fixture("open_cam_dir3.txt"));
}
