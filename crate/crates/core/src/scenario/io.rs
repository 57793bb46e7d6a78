use std::fs;
use std::path::Path;

use super::Scenario;
use crate::error::{Error, Result};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let scenario: Scenario = serde_json::from_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Writes `scenario` as pretty JSON with powers in watts.
pub fn write_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(scenario)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Power fields accept a bare number (watts), `{"w": x}` or `{"dbm": x}`.
pub(crate) mod power {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Watts(f64),
        Tagged {
            #[serde(default)]
            w: Option<f64>,
            #[serde(default)]
            dbm: Option<f64>,
        },
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(*v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Watts(w) => Ok(w),
            Repr::Tagged { w: Some(w), dbm: None } => Ok(w),
            Repr::Tagged { w: None, dbm: Some(dbm) } => Ok(super::dbm_to_watts(dbm)),
            _ => Err(serde::de::Error::custom("power needs exactly one of `w` or `dbm`")),
        }
    }
}
