//! Run configuration files.
//!
//! TOML with top-level settings and one optional table per model kind:
//!
//! ```toml
//! model = "four-harmonic"
//! branch = "-a"
//! lambda = 0.5          # applies to every model
//!
//! [four-harmonic]
//! g = 2.0               # overrides the top level for this model only
//! mu = 0.5
//! ```
//!
//! Command-line flags override both.

use std::collections::BTreeMap;

use toml::{Table, Value};

use crate::model::ModelKind;

pub const COUPLING_KEYS: [&str; 8] = ["omega", "eta", "lambda", "lambda1", "lambda2", "kappa", "g", "mu"];
const STRING_KEYS: [&str; 5] = ["model", "branch", "statistics", "format", "criterion"];
const NUMBER_KEYS: [&str; 4] = ["emax", "depth", "configs", "seed"];

/// Values read from a file, before flags are applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub strings: BTreeMap<String, String>,
    pub numbers: BTreeMap<String, f64>,
    /// Top-level couplings.
    pub couplings: BTreeMap<String, f64>,
    /// Per-model couplings, keyed by model name.
    pub sections: BTreeMap<String, BTreeMap<String, f64>>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let mut out = Self::default();
        for (key, value) in &table {
            let k = key.as_str();
            if STRING_KEYS.contains(&k) {
                let s = value.as_str().ok_or_else(|| format!("'{k}' must be a quoted string"))?;
                out.strings.insert(k.to_string(), s.to_string());
            } else if NUMBER_KEYS.contains(&k) {
                out.numbers.insert(k.to_string(), number(k, value)?);
            } else if COUPLING_KEYS.contains(&k) {
                out.couplings.insert(k.to_string(), number(k, value)?);
            } else if let Some(section) = value.as_table() {
                k.parse::<ModelKind>().map_err(|_| format!("unknown section [{k}]"))?;
                let mut map = BTreeMap::new();
                for (ck, cv) in section {
                    if !COUPLING_KEYS.contains(&ck.as_str()) {
                        return Err(format!("unknown key '{ck}' in section [{k}]"));
                    }
                    map.insert(ck.clone(), number(ck, cv)?);
                }
                out.sections.insert(k.to_string(), map);
            } else {
                return Err(format!("unknown key '{k}'"));
            }
        }
        Ok(out)
    }

    /// A coupling for `kind`: its section first, then the top level.
    pub fn coupling(&self, kind: ModelKind, key: &str) -> Option<f64> {
        self.sections.get(kind.name()).and_then(|s| s.get(key)).or_else(|| self.couplings.get(key)).copied()
    }
}

fn number(key: &str, value: &Value) -> Result<f64, String> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(format!("'{key}' must be a number")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_override_top_level() {
        let c = FileConfig::parse(
            "model = \"five-harmonic\"\nlambda = 0.5\ng = 1\n[five-harmonic]\ng = 2.5\nkappa = 0.3\n[four-harmonic]\ng = 7\n",
        )
        .unwrap();
        assert_eq!(c.strings["model"], "five-harmonic");
        assert_eq!(c.coupling(ModelKind::FiveHarmonic, "g"), Some(2.5));
        assert_eq!(c.coupling(ModelKind::FiveHarmonic, "lambda"), Some(0.5));
        assert_eq!(c.coupling(ModelKind::FourHarmonic, "g"), Some(7.0));
        assert_eq!(c.coupling(ModelKind::SixHarmonic, "g"), Some(1.0));
        assert_eq!(c.coupling(ModelKind::SixHarmonic, "mu"), None);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(FileConfig::parse("lamda = 1").unwrap_err().contains("lamda"));
        assert!(FileConfig::parse("[four-harmonic]\nomega2 = 1").unwrap_err().contains("omega2"));
        assert!(FileConfig::parse("[seven-body]\ng = 1").unwrap_err().contains("seven-body"));
        assert!(FileConfig::parse("g = \"x\"").unwrap_err().contains("number"));
        assert!(FileConfig::parse("model = 3").unwrap_err().contains("string"));
    }
}
