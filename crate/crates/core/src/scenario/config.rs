//! Experiment files: a base scenario, optional parameter sweeps, and named
//! variants, all in TOML with units spelled out in key names.
//!
//! ```toml
//! name = "example"
//! seed = 7
//! trials = 2
//! algorithms = ["anaconda"]
//!
//! [world]
//! width_units = 50
//! height_units = 50
//!
//! [cameras]
//! placement = "uniform"
//! count = 10
//! fov_radius_units = 8
//! aov_degrees = 60
//! directions = 16
//! comm_range_units = 16
//! alpha = 1
//!
//! [horizon]
//! rounds = 100
//!
//! [sweep.cameras]
//! alpha = [0, 1, 3]
//! ```
//!
//! A sweep table mirrors the scenario layout with arrays at the leaves; the
//! experiment runs the cartesian product. Each `[[variants]]` entry deep-merges
//! its `set` table into the base and may carry its own `sweep`.

use crate::error::{Error, Result};
use crate::objective::Interest;
use crate::timing::DelayModel;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Learned actions and learned neighbors.
    Anaconda,
    /// Learned actions, the nearest agents as neighbors.
    Nearest,
    /// Learned actions, uniformly resampled neighbors.
    Random,
    DfsSg,
    DfsBsg,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Anaconda => "anaconda",
            Algorithm::Nearest => "nearest",
            Algorithm::Random => "random",
            Algorithm::DfsSg => "dfs_sg",
            Algorithm::DfsBsg => "dfs_bsg",
        }
    }

    pub fn is_sequential(self) -> bool {
        matches!(self, Algorithm::DfsSg | Algorithm::DfsBsg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub width_units: f64,
    pub height_units: f64,
    #[serde(default = "one")]
    pub cell_size_units: f64,
    /// `[x0, y0, x1, y1]` rectangles to monitor; the whole map when absent.
    #[serde(default)]
    pub interest_rects_units: Option<Vec<[f64; 4]>>,
}

fn one() -> f64 {
    1.0
}

impl WorldConfig {
    pub fn interest(&self) -> Interest {
        match &self.interest_rects_units {
            Some(r) => Interest::Rects(r.clone()),
            None => Interest::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Explicit,
    /// Fresh uniform positions on the map every trial.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub placement: Placement,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub positions_units: Option<Vec<[f64; 2]>>,
    pub fov_radius_units: f64,
    pub aov_degrees: f64,
    pub directions: usize,
    pub comm_range_units: f64,
    pub alpha: usize,
    /// Resample uniform placements until the communication graph is
    /// strongly connected.
    #[serde(default)]
    pub require_connected: bool,
    /// Per-camera exceptions to the shared parameters.
    #[serde(default)]
    pub overrides: Vec<CameraOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraOverride {
    pub index: usize,
    #[serde(default)]
    pub fov_radius_units: Option<f64>,
    #[serde(default)]
    pub aov_degrees: Option<f64>,
    #[serde(default)]
    pub comm_range_units: Option<f64>,
    #[serde(default)]
    pub alpha: Option<usize>,
}

/// Resolved parameters of one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraParams {
    pub fov_radius: f64,
    pub aov_degrees: f64,
    pub comm_range: f64,
    pub alpha: usize,
}

impl CameraConfig {
    pub fn params(&self, index: usize) -> CameraParams {
        let mut p = CameraParams {
            fov_radius: self.fov_radius_units,
            aov_degrees: self.aov_degrees,
            comm_range: self.comm_range_units,
            alpha: self.alpha,
        };
        for o in self.overrides.iter().filter(|o| o.index == index) {
            p.fov_radius = o.fov_radius_units.unwrap_or(p.fov_radius);
            p.aov_degrees = o.aov_degrees.unwrap_or(p.aov_degrees);
            p.comm_range = o.comm_range_units.unwrap_or(p.comm_range);
            p.alpha = o.alpha.unwrap_or(p.alpha);
        }
        p
    }
}

/// An agent leaves (`active = false`) or rejoins before round `round`
/// (0-based). Only the simultaneous algorithms honor events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub round: u64,
    pub agent: usize,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonConfig {
    #[serde(default)]
    pub rounds: Option<u64>,
    #[serde(default)]
    pub budget_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    #[serde(default)]
    pub tau_f_seconds: f64,
    #[serde(default)]
    pub tau_c_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Charge DFS-SG one evaluation per candidate action.
    #[serde(default = "yes")]
    pub sg_count_computation: bool,
    /// Evaluations charged per DFS-BSG round; defaults to the largest action
    /// count plus two.
    #[serde(default)]
    pub bsg_computation_evaluations: Option<usize>,
}

fn yes() -> bool {
    true
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            sg_count_computation: true,
            bsg_computation_evaluations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    pub trials: u32,
    pub algorithms: Vec<Algorithm>,
    pub world: WorldConfig,
    pub cameras: CameraConfig,
    pub horizon: HorizonConfig,
    #[serde(default)]
    pub delays: DelayConfig,
    #[serde(default)]
    pub benchmarks: BenchmarkConfig,
    #[serde(default)]
    pub events: Vec<EventConfig>,
}

impl ScenarioConfig {
    pub fn delay_model(&self) -> Result<DelayModel> {
        DelayModel::new(self.delays.tau_f_seconds, self.delays.tau_c_seconds)
            .map_err(|e| Error::config("delays", e.to_string()))
    }

    pub fn camera_count(&self) -> usize {
        match self.cameras.placement {
            Placement::Explicit => self.cameras.positions_units.as_ref().map_or(0, Vec::len),
            Placement::Uniform => self.cameras.count.unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |loc: &str, msg: &str| Err(Error::config(loc, msg));
        if self.trials == 0 {
            return bad("trials", "at least one trial is required");
        }
        if self.algorithms.is_empty() {
            return bad("algorithms", "name at least one algorithm");
        }
        let w = &self.world;
        for (k, v) in [
            ("world.width_units", w.width_units),
            ("world.height_units", w.height_units),
            ("world.cell_size_units", w.cell_size_units),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(k, "must be positive");
            }
        }
        let c = &self.cameras;
        match c.placement {
            Placement::Explicit => {
                let Some(p) = &c.positions_units else {
                    return bad("cameras.positions_units", "explicit placement needs positions");
                };
                if p.is_empty() {
                    return bad("cameras.positions_units", "at least one camera is required");
                }
                if c.count.is_some_and(|n| n != p.len()) {
                    return bad("cameras.count", "disagrees with the number of positions");
                }
                for (i, a) in p.iter().enumerate() {
                    if p[..i].contains(a) {
                        return bad("cameras.positions_units", "positions must be distinct");
                    }
                }
            }
            Placement::Uniform => {
                if c.positions_units.is_some() {
                    return bad("cameras.positions_units", "uniform placement takes no positions");
                }
                if c.count.unwrap_or(0) == 0 {
                    return bad("cameras.count", "uniform placement needs a positive count");
                }
            }
        }
        if c.directions == 0 {
            return bad("cameras.directions", "at least one direction is required");
        }
        let n = self.camera_count();
        if let Some(o) = c.overrides.iter().find(|o| o.index >= n) {
            return Err(Error::config("cameras.overrides", format!("no camera {}", o.index)));
        }
        for i in 0..n {
            let p = c.params(i);
            if !(p.fov_radius > 0.0 && p.fov_radius.is_finite()) {
                return bad("cameras.fov_radius_units", "must be positive");
            }
            if !(p.aov_degrees > 0.0 && p.aov_degrees <= 360.0) {
                return bad("cameras.aov_degrees", "must lie in (0, 360]");
            }
            if !(p.comm_range >= 0.0) {
                return bad("cameras.comm_range_units", "must be nonnegative");
            }
        }
        if let Some(e) = self.events.iter().find(|e| e.agent >= n) {
            return Err(Error::config("events", format!("no agent {}", e.agent)));
        }
        match (self.horizon.rounds, self.horizon.budget_seconds) {
            (Some(0), None) => return bad("horizon.rounds", "must be positive"),
            (Some(_), None) => {}
            (None, Some(b)) if b > 0.0 && b.is_finite() => {}
            (None, Some(_)) => return bad("horizon.budget_seconds", "must be positive"),
            _ => return bad("horizon", "set exactly one of rounds and budget_seconds"),
        }
        self.delay_model()?;
        Ok(())
    }
}

/// One fully resolved scenario of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variant {
    pub label: String,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub name: String,
    pub variants: Vec<Variant>,
}

impl Experiment {
    pub fn seed(&self) -> u64 {
        self.variants[0].config.seed
    }

    pub fn trials(&self) -> u32 {
        self.variants[0].config.trials
    }
}

fn parse_toml(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| {
        let location = match e.span() {
            Some(span) => {
                let line = text[..span.start].matches('\n').count() + 1;
                format!("line {line}")
            }
            None => "input".to_string(),
        };
        Error::config(location, e.message().to_string())
    })
}

/// Parses `key=value` where value is a TOML value, or a bare string.
pub fn parse_override(text: &str) -> Result<(String, Value)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "overrides take the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(text, "empty key"));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Sets a dotted path inside a table, creating intermediate tables.
pub fn set_path(table: &mut Table, path: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().unwrap();
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(path, format!("`{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn deep_merge(base: &mut Table, patch: &Table) {
    for (k, v) in patch {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(p)) => deep_merge(b, p),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// Leaves of a sweep table as `(dotted path, values)`.
fn flatten_sweep(table: &Table, prefix: &str, out: &mut Vec<(String, Vec<Value>)>) -> Result<()> {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten_sweep(t, &path, out)?,
            Value::Array(values) if !values.is_empty() => out.push((path, values.clone())),
            _ => return Err(Error::config(format!("sweep.{path}"), "sweep leaves must be nonempty arrays")),
        }
    }
    Ok(())
}

fn short(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn resolve(table: &Table, location: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| Error::config(location, e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

impl Experiment {
    /// Parses an experiment file, applying `overrides` (dotted `key=value`
    /// paths) to the raw table before variants are expanded.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut root = parse_toml(text)?;
        for o in overrides {
            let (k, v) = parse_override(o)?;
            set_path(&mut root, &k, v)?;
        }
        Self::from_table(root)
    }

    pub fn from_table(mut root: Table) -> Result<Self> {
        let top_sweep = match root.remove("sweep") {
            Some(Value::Table(t)) => t,
            None => Table::new(),
            Some(_) => return Err(Error::config("sweep", "must be a table")),
        };
        let variants = match root.remove("variants") {
            Some(Value::Array(v)) => v,
            None => Vec::new(),
            Some(_) => return Err(Error::config("variants", "must be an array of tables")),
        };
        let name = root
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("name", "missing experiment name"))?
            .to_string();

        // (label, table, own sweep)
        let mut bases: Vec<(String, Table, Table)> = Vec::new();
        if variants.is_empty() {
            bases.push((String::new(), root.clone(), Table::new()));
        }
        for (i, v) in variants.into_iter().enumerate() {
            let loc = format!("variants[{i}]");
            let Value::Table(mut v) = v else {
                return Err(Error::config(loc, "must be a table"));
            };
            let label = match v.remove("label") {
                Some(Value::String(s)) => s,
                _ => return Err(Error::config(loc, "needs a string label")),
            };
            let mut table = root.clone();
            match v.remove("set") {
                Some(Value::Table(p)) => deep_merge(&mut table, &p),
                None => {}
                Some(_) => return Err(Error::config(format!("{loc}.set"), "must be a table")),
            }
            let sweep = match v.remove("sweep") {
                Some(Value::Table(t)) => t,
                None => Table::new(),
                Some(_) => return Err(Error::config(format!("{loc}.sweep"), "must be a table")),
            };
            if let Some(k) = v.keys().next() {
                return Err(Error::config(format!("{loc}.{k}"), "unknown variant key"));
            }
            bases.push((label, table, sweep));
        }

        let mut out = Vec::new();
        for (label, table, own) in bases {
            let mut dims = Vec::new();
            flatten_sweep(&top_sweep, "", &mut dims)?;
            flatten_sweep(&own, "", &mut dims)?;
            let total: usize = dims.iter().map(|(_, v)| v.len()).product();
            for code in 0..total {
                let mut t = table.clone();
                let mut parts: Vec<String> = if label.is_empty() { vec![] } else { vec![label.clone()] };
                let mut rest = code;
                // last dimension varies fastest
                let mut picks = vec![0; dims.len()];
                for d in (0..dims.len()).rev() {
                    picks[d] = rest % dims[d].1.len();
                    rest /= dims[d].1.len();
                }
                for (d, (path, values)) in dims.iter().enumerate() {
                    let v = values[picks[d]].clone();
                    let leaf = path.rsplit('.').next().unwrap();
                    parts.push(format!("{leaf}={}", short(&v)));
                    set_path(&mut t, path, v)?;
                }
                let label = if parts.is_empty() { "base".to_string() } else { parts.join(",") };
                let config = resolve(&t, &label)?;
                out.push(Variant { label, config });
            }
        }
        let first = &out[0].config;
        if out.iter().any(|v| v.config.seed != first.seed || v.config.trials != first.trials) {
            return Err(Error::config("variants", "seed and trials must be shared by all variants"));
        }
        Ok(Experiment { name, variants: out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
seed = 3
trials = 2
algorithms = ["anaconda", "random"]

[world]
width_units = 20
height_units = 10

[cameras]
placement = "explicit"
positions_units = [[1, 1], [5, 5]]
fov_radius_units = 4
aov_degrees = 90
directions = 4
comm_range_units = 10
alpha = 1

[horizon]
rounds = 5
"#;

    #[test]
    fn base_parses_into_one_variant() {
        let e = Experiment::parse(BASE, &[]).unwrap();
        assert_eq!(e.variants.len(), 1);
        let c = &e.variants[0].config;
        assert_eq!(e.variants[0].label, "base");
        assert_eq!(c.world.cell_size_units, 1.0);
        assert_eq!(c.camera_count(), 2);
        assert_eq!(c.algorithms, vec![Algorithm::Anaconda, Algorithm::Random]);
        assert_eq!(c.delay_model().unwrap(), DelayModel::ZERO);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let e = Experiment::parse(BASE, &["trials=1".into(), "cameras.alpha=0".into(), "seed = 9".into()]).unwrap();
        let c = &e.variants[0].config;
        assert_eq!((c.trials, c.cameras.alpha, c.seed), (1, 0, 9));
        let e = Experiment::parse(BASE, &["name=other".into()]).unwrap();
        assert_eq!(e.name, "other");
    }

    #[test]
    fn sweeps_and_variants_expand() {
        let text = format!(
            "{BASE}\n[sweep.delays]\ntau_f_seconds = [0.01, 0.09]\n\n[[variants]]\nlabel = \"a\"\n[variants.sweep.cameras]\nalpha = [0, 1, 2]\n\n[[variants]]\nlabel = \"b\"\n[variants.set]\nalgorithms = [\"dfs_bsg\"]\n"
        );
        let e = Experiment::parse(&text, &[]).unwrap();
        let labels: Vec<&str> = e.variants.iter().map(|v| v.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "a,tau_f_seconds=0.01,alpha=0",
                "a,tau_f_seconds=0.01,alpha=1",
                "a,tau_f_seconds=0.01,alpha=2",
                "a,tau_f_seconds=0.09,alpha=0",
                "a,tau_f_seconds=0.09,alpha=1",
                "a,tau_f_seconds=0.09,alpha=2",
                "b,tau_f_seconds=0.01",
                "b,tau_f_seconds=0.09"
            ]
        );
        assert_eq!(e.variants[7].config.algorithms, vec![Algorithm::DfsBsg]);
        assert_eq!(e.variants[4].config.cameras.alpha, 1);
        assert_eq!(e.variants[4].config.delays.tau_f_seconds, 0.09);
    }

    #[test]
    fn errors_name_their_location() {
        let broken = BASE.replace("trials = 2", "trials = ");
        match Experiment::parse(&broken, &[]) {
            Err(Error::Config { location, .. }) => assert_eq!(location, "line 4"),
            other => panic!("{other:?}"),
        }
        let unknown = BASE.replace("alpha = 1", "alpha = 1\nbogus = 2");
        assert!(matches!(Experiment::parse(&unknown, &[]), Err(Error::Config { .. })));
        let both = format!("{BASE}budget_seconds = 3\n");
        match Experiment::parse(&both, &[]) {
            Err(Error::Config { location, .. }) => assert_eq!(location, "horizon"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Experiment::parse(BASE, &["trials=0".into()]),
            Err(Error::Config { location, .. }) if location == "trials"
        ));
        assert!(Experiment::parse(BASE, &["novalue".into()]).is_err());
    }

    #[test]
    fn override_values_are_typed() {
        assert_eq!(parse_override("a.b=3").unwrap(), ("a.b".into(), Value::Integer(3)));
        assert_eq!(parse_override("x=[1, 2]").unwrap().1, Value::Array(vec![Value::Integer(1), Value::Integer(2)]));
        assert_eq!(parse_override("p=uniform").unwrap().1, Value::String("uniform".into()));
        assert_eq!(parse_override("p=\"q\"").unwrap().1, Value::String("q".into()));
    }
}
