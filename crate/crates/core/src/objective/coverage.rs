//! Grid-rasterized multi-camera area coverage.
//!
//! The map is split into square cells of side `cell_size`; a cell is covered
//! by a camera heading iff the cell center lies within the FOV radius and
//! within half the angle of view of the heading (both bounds inclusive).
//! The objective value of a set of headings is the area of the union of
//! covered interest cells.

use super::{Choice, Objective};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub position: [f64; 2],
    pub fov_radius: f64,
    /// Angle of view in radians, `0 < aov <= 2π`.
    pub aov: f64,
    /// Candidate headings in radians; this is the camera's action set.
    pub directions: Vec<f64>,
    pub comm_range: f64,
}

impl CameraSpec {
    /// `count` headings evenly spaced from 0 (east), counter-clockwise.
    pub fn even_directions(count: usize) -> Vec<f64> {
        (0..count).map(|k| TAU * k as f64 / count as f64).collect()
    }

    fn validate(&self, index: usize) -> Result<()> {
        let ctx = |m: &str| Error::invalid(format!("camera {index}: {m}"));
        if !(self.fov_radius > 0.0 && self.fov_radius.is_finite()) {
            return Err(ctx("fov radius must be positive"));
        }
        if !(self.aov > 0.0 && self.aov <= TAU + ANGLE_EPS) {
            return Err(ctx("angle of view must lie in (0, 2π]"));
        }
        if self.directions.is_empty() {
            return Err(ctx("at least one direction is required"));
        }
        for (k, &d) in self.directions.iter().enumerate() {
            if !(0.0..TAU).contains(&d) {
                return Err(ctx(&format!("direction {d} outside [0, 2π)")));
            }
            if self.directions[..k].iter().any(|&e| (e - d).abs() < ANGLE_EPS) {
                return Err(ctx("directions must be distinct"));
            }
        }
        if !(self.comm_range >= 0.0) {
            return Err(ctx("communication range must be nonnegative"));
        }
        Ok(())
    }

    /// Whether `point` lies in the sector for heading `heading`.
    pub fn sees(&self, heading: f64, point: [f64; 2]) -> bool {
        let dx = point[0] - self.position[0];
        let dy = point[1] - self.position[1];
        let d2 = dx * dx + dy * dy;
        if d2 > self.fov_radius * self.fov_radius {
            return false;
        }
        if d2 == 0.0 || self.aov >= TAU - ANGLE_EPS {
            return true;
        }
        let bearing = dy.atan2(dx);
        let mut diff = (bearing - heading).rem_euclid(TAU);
        if diff > PI {
            diff = TAU - diff;
        }
        diff <= self.aov / 2.0 + ANGLE_EPS
    }
}

/// Which cells of the map are to be monitored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interest {
    /// Every cell whose center lies on the map.
    Full,
    /// Cells whose centers lie in any of the axis-aligned rectangles `[x0, y0, x1, y1]`.
    Rects(Vec<[f64; 4]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageWorld {
    pub width: f64,
    pub height: f64,
    pub cell_size: f64,
    cols: usize,
    rows: usize,
    interest_mask: Vec<bool>,
    pub cameras: Vec<CameraSpec>,
}

impl CoverageWorld {
    pub fn new(width: f64, height: f64, cell_size: f64, interest: &Interest, cameras: Vec<CameraSpec>) -> Result<Self> {
        for (name, v) in [("width", width), ("height", height), ("cell size", cell_size)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let cols = (width / cell_size).ceil() as usize;
        let rows = (height / cell_size).ceil() as usize;
        let mut mask = vec![false; cols * rows];
        for row in 0..rows {
            for col in 0..cols {
                let [x, y] = cell_center(col, row, cell_size);
                let on_map = x <= width && y <= height;
                mask[row * cols + col] = on_map
                    && match interest {
                        Interest::Full => true,
                        Interest::Rects(rects) => rects
                            .iter()
                            .any(|r| x >= r[0] && x <= r[2] && y >= r[1] && y <= r[3]),
                    };
            }
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::invalid("no cell is marked of interest"));
        }
        for (i, c) in cameras.iter().enumerate() {
            c.validate(i)?;
        }
        Ok(CoverageWorld {
            width,
            height,
            cell_size,
            cols,
            rows,
            interest_mask: mask,
            cameras,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }

    pub fn interest_mask(&self) -> &[bool] {
        &self.interest_mask
    }

    pub fn interest_cells(&self) -> usize {
        self.interest_mask.iter().filter(|&&m| m).count()
    }

    pub fn interest_area(&self) -> f64 {
        self.interest_cells() as f64 * self.cell_area()
    }

    pub fn cell_center(&self, index: usize) -> [f64; 2] {
        cell_center(index % self.cols, index / self.cols, self.cell_size)
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.cameras.iter().map(|c| c.position).collect()
    }
}

fn cell_center(col: usize, row: usize, cell_size: f64) -> [f64; 2] {
    [(col as f64 + 0.5) * cell_size, (row as f64 + 0.5) * cell_size]
}

/// Interest cells (row-major indices, ascending) covered by one camera heading.
pub fn coverage_cells(world: &CoverageWorld, camera: usize, direction: usize) -> Result<Vec<usize>> {
    let cam = world
        .cameras
        .get(camera)
        .ok_or_else(|| Error::invalid(format!("camera {camera} out of range")))?;
    let heading = *cam
        .directions
        .get(direction)
        .ok_or_else(|| Error::invalid(format!("direction {direction} out of range for camera {camera}")))?;

    // Only scan the bounding box of the FOV disc.
    let cs = world.cell_size;
    let r = cam.fov_radius;
    let [px, py] = cam.position;
    let col_lo = (((px - r) / cs).floor().max(0.0)) as usize;
    let row_lo = (((py - r) / cs).floor().max(0.0)) as usize;
    let col_hi = (((px + r) / cs).ceil().max(0.0) as usize).min(world.cols);
    let row_hi = (((py + r) / cs).ceil().max(0.0) as usize).min(world.rows);

    let mut cells = Vec::new();
    for row in row_lo..row_hi {
        for col in col_lo..col_hi {
            let idx = row * world.cols + col;
            if world.interest_mask[idx] && cam.sees(heading, cell_center(col, row, cs)) {
                cells.push(idx);
            }
        }
    }
    Ok(cells)
}

/// A packed cell set restricted to the words it touches.
#[derive(Debug, Clone, PartialEq)]
struct Footprint {
    first_word: usize,
    words: Vec<u64>,
    count: u64,
}

impl Footprint {
    fn from_cells(cells: &[usize]) -> Self {
        let (Some(&lo), Some(&hi)) = (cells.iter().min(), cells.iter().max()) else {
            return Footprint {
                first_word: 0,
                words: Vec::new(),
                count: 0,
            };
        };
        let first_word = lo / 64;
        let mut words = vec![0u64; hi / 64 - first_word + 1];
        for &c in cells {
            words[c / 64 - first_word] |= 1 << (c % 64);
        }
        let count = words.iter().map(|w| w.count_ones() as u64).sum();
        Footprint {
            first_word,
            words,
            count,
        }
    }

    fn end_word(&self) -> usize {
        self.first_word + self.words.len()
    }

    fn word(&self, w: usize) -> u64 {
        if w >= self.first_word && w < self.end_word() {
            self.words[w - self.first_word]
        } else {
            0
        }
    }
}

/// Weighted coverage `f(S) = weight * |union of footprints in S|`.
///
/// Built either from a [`CoverageWorld`] (footprints are rasterized FOV
/// sectors, weight is the cell area) or directly from explicit element sets.
#[derive(Debug, Clone)]
pub struct CoverageObjective {
    footprints: Vec<Vec<Footprint>>,
    weight: f64,
    /// Elements are indices below this.
    universe: usize,
    /// Elements that can be covered at all.
    coverable: usize,
    normalizers: Vec<f64>,
}

impl CoverageObjective {
    pub fn from_world(world: &CoverageWorld) -> Self {
        let sets = (0..world.cameras.len())
            .map(|cam| {
                (0..world.cameras[cam].directions.len())
                    .map(|dir| coverage_cells(world, cam, dir).expect("indices in range"))
                    .collect()
            })
            .collect();
        // cells keep their grid indices; only interest cells ever appear
        let mut f = Self::build(sets, world.cell_count(), world.cell_area());
        f.coverable = world.interest_cells();
        f
    }

    /// `sets[agent][action]` lists the elements (in `0..universe`) that action covers.
    pub fn from_sets(sets: Vec<Vec<Vec<usize>>>, universe: usize, weight: f64) -> Result<Self> {
        if sets.iter().any(|actions| actions.is_empty()) {
            return Err(Error::invalid("every agent needs at least one action"));
        }
        if sets.iter().flatten().flatten().any(|&e| e >= universe) {
            return Err(Error::invalid("element outside universe"));
        }
        if !(weight > 0.0) {
            return Err(Error::invalid("element weight must be positive"));
        }
        Ok(Self::build(sets, universe, weight))
    }

    fn build(sets: Vec<Vec<Vec<usize>>>, universe: usize, weight: f64) -> Self {
        let footprints: Vec<Vec<Footprint>> = sets
            .iter()
            .map(|actions| actions.iter().map(|cells| Footprint::from_cells(cells)).collect())
            .collect();
        let normalizers = footprints
            .iter()
            .map(|actions| actions.iter().map(|f| f.count).max().unwrap_or(0) as f64 * weight)
            .collect();
        CoverageObjective {
            footprints,
            weight,
            universe,
            coverable: universe,
            normalizers,
        }
    }

    /// Number of covered elements (cells) for a set of choices.
    pub fn covered_count(&self, items: &[Choice]) -> u64 {
        match items {
            [] => 0,
            [one] => self.footprint(*one).count,
            _ => {
                let fps: Vec<&Footprint> = items.iter().map(|c| self.footprint(*c)).filter(|f| f.count > 0).collect();
                let Some(lo) = fps.iter().map(|f| f.first_word).min() else {
                    return 0;
                };
                let hi = fps.iter().map(|f| f.end_word()).max().unwrap_or(lo);
                (lo..hi)
                    .map(|w| fps.iter().fold(0u64, |acc, f| acc | f.word(w)).count_ones() as u64)
                    .sum()
            }
        }
    }

    /// Covered element indices for a set of choices (ascending).
    pub fn covered_elements(&self, items: &[Choice]) -> Vec<usize> {
        let mut words: std::collections::BTreeMap<usize, u64> = Default::default();
        for c in items {
            let f = self.footprint(*c);
            for (i, w) in f.words.iter().enumerate() {
                *words.entry(f.first_word + i).or_default() |= w;
            }
        }
        words
            .into_iter()
            .flat_map(|(wi, w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| wi * 64 + b))
            .collect()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    fn footprint(&self, c: Choice) -> &Footprint {
        &self.footprints[c.agent][c.action]
    }
}

impl Objective for CoverageObjective {
    fn agent_count(&self) -> usize {
        self.footprints.len()
    }

    fn action_count(&self, agent: usize) -> usize {
        self.footprints[agent].len()
    }

    fn value(&self, items: &[Choice]) -> f64 {
        self.covered_count(items) as f64 * self.weight
    }

    fn normalizer(&self, agent: usize) -> f64 {
        self.normalizers[agent]
    }

    fn total(&self) -> f64 {
        self.coverable as f64 * self.weight
    }
}
