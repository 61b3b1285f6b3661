//! Parameter loading: a flat JSON object, overridden by command-line flags.

use std::path::Path;

use delayopt_core::ProjectParams;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Keys accepted in a config file, with their canonical names.
const KEYS: [(&str, &str); 11] = [
    ("r", "r"),
    ("mu", "mu"),
    ("sigma", "sigma"),
    ("delta", "delta"),
    ("c", "c"),
    ("C", "c"),
    ("k_i", "k_i"),
    ("K_I", "k_i"),
    ("k_o", "k_o"),
    ("K_O", "k_o"),
    ("p0", "p0"),
];

/// Parameter values given as flags.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct ParamFlags {
    #[arg(long, help = "Discount rate")]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true, help = "Price drift")]
    pub mu: Option<f64>,
    #[arg(long, help = "Price volatility")]
    pub sigma: Option<f64>,
    #[arg(long, help = "Implementation delay")]
    pub delta: Option<f64>,
    #[arg(long = "c", allow_hyphen_values = true, help = "Running cost per unit time")]
    pub c: Option<f64>,
    #[arg(long = "k-i", allow_hyphen_values = true, help = "Entry cost")]
    pub k_i: Option<f64>,
    #[arg(long = "k-o", allow_hyphen_values = true, help = "Exit cost")]
    pub k_o: Option<f64>,
    #[arg(long, help = "Initial price")]
    pub p0: Option<f64>,
}

impl ParamFlags {
    fn entries(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("r", self.r),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("delta", self.delta),
            ("c", self.c),
            ("k_i", self.k_i),
            ("k_o", self.k_o),
            ("p0", self.p0),
        ]
    }
}

/// Builds validated parameters from an optional config file and flags.
pub fn load_params(path: Option<&Path>, flags: &ParamFlags) -> Result<ProjectParams, CliError> {
    let mut merged = Map::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let Value::Object(object) = value else {
            return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
        };
        for (key, value) in object {
            let canonical = KEYS
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, c)| *c)
                .ok_or_else(|| CliError::Config(format!("unknown key `{key}` in {}", path.display())))?;
            if merged.insert(canonical.to_string(), value).is_some() {
                return Err(CliError::Config(format!("key `{canonical}` given twice")));
            }
        }
    }
    for (key, value) in flags.entries() {
        if let Some(v) = value {
            merged.insert(key.to_string(), Value::from(v));
        }
    }
    if let Some((key, _)) = flags.entries().iter().find(|(k, _)| !merged.contains_key(*k)) {
        return Err(CliError::Config(format!(
            "missing parameter `{key}` (set it in --config or with a flag)"
        )));
    }
    let params: ProjectParams = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(params.validate()?)
}
