use super::config::Experiment;
use crate::error::{Error, Result};

/// Shipped experiments as `(id, TOML source)`.
pub const PRESETS: [(&str, &str); 5] = [
    ("urban", include_str!("../../presets/urban.toml")),
    ("density", include_str!("../../presets/density.toml")),
    ("no-delay", include_str!("../../presets/no-delay.toml")),
    ("delay", include_str!("../../presets/delay.toml")),
    ("scalability", include_str!("../../presets/scalability.toml")),
];

pub fn preset_ids() -> Vec<&'static str> {
    PRESETS.iter().map(|(id, _)| *id).collect()
}

pub fn preset_source(id: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(p, _)| *p == id).map(|(_, s)| *s)
}

pub fn preset(id: &str) -> Result<Experiment> {
    preset_with(id, &[])
}

pub fn preset_with(id: &str, overrides: &[String]) -> Result<Experiment> {
    let src = preset_source(id).ok_or_else(|| Error::config(id, "unknown preset"))?;
    Experiment::parse(src, overrides)
}
