use std::collections::BTreeMap;
use std::path::Path;

use cn_duality::{CouplingParams, RsvdState, SutherlandState, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Sutherland,
    Rsvd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Spectral,
    Rk4,
    Both,
}

/// A flat JSON run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub n: usize,
    pub g: f64,
    pub g2: f64,
    pub initial_state: Vec<f64>,
    #[serde(default)]
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Extra states for batch dualization, each of length `2n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<Vec<f64>>>,
}

fn default_samples() -> usize {
    2
}

/// Numerical knobs reachable through `tolerances` and `--tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTolerances {
    pub structure: f64,
    pub regularity: f64,
    pub chamber_margin: f64,
    pub rk4_dt: f64,
    pub deviation: f64,
}

impl Default for RunTolerances {
    fn default() -> Self {
        let t = Tolerances::default();
        RunTolerances {
            structure: t.structure,
            regularity: t.regularity,
            chamber_margin: cn_duality::sutherland::DEFAULT_CHAMBER_MARGIN,
            rk4_dt: 1e-3,
            deviation: 1e-5,
        }
    }
}

impl RunTolerances {
    pub const NAMES: [&'static str; 5] =
        ["structure", "regularity", "chamber_margin", "rk4_dt", "deviation"];

    pub fn set(&mut self, name: &str, value: f64) -> CliResult<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(CliError::Config(format!(
                "tolerance {name} must be positive and finite, got {value}"
            )));
        }
        let slot = match name {
            "structure" => &mut self.structure,
            "regularity" => &mut self.regularity,
            "chamber_margin" => &mut self.chamber_margin,
            "rk4_dt" => &mut self.rk4_dt,
            "deviation" => &mut self.deviation,
            other => {
                return Err(CliError::Config(format!(
                    "unknown tolerance '{other}' (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn matrix(&self) -> Tolerances {
        Tolerances {
            structure: self.structure,
            regularity: self.regularity,
        }
    }
}

/// Parses `name=value`.
pub fn parse_override(s: &str) -> CliResult<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected name=value, got '{s}'")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("tolerance '{name}' has a non-numeric value '{value}'")))?;
    Ok((name.trim().to_string(), value))
}

/// Either model's phase-space point.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Sutherland(SutherlandState),
    Rsvd(RsvdState),
}

impl State {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            State::Sutherland(s) => s.to_vec(),
            State::Rsvd(s) => s.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn couplings(&self) -> CliResult<CouplingParams> {
        CouplingParams::new(self.g, self.g2).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Config-file tolerances with command-line overrides applied on top.
    pub fn tolerances(&self, overrides: &[(String, f64)]) -> CliResult<RunTolerances> {
        let mut tol = RunTolerances::default();
        for (name, value) in self.tolerances.iter().chain(overrides.iter().map(|(k, v)| (k, v))) {
            tol.set(name, *value)?;
        }
        Ok(tol)
    }

    /// Interprets `values` as a state of `model`.
    pub fn state_of(&self, model: Model, values: &[f64], margin: f64) -> CliResult<State> {
        let n = self.n;
        if values.len() != 2 * n {
            return Err(CliError::Config(format!(
                "state must have 2n = {} entries, got {}",
                2 * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("state entries must be finite".into()));
        }
        let (a, b) = (values[..n].to_vec(), values[n..].to_vec());
        let st = match model {
            Model::Sutherland => SutherlandState::with_margin(a, b, margin).map(State::Sutherland),
            Model::Rsvd => RsvdState::with_margin(a, b, margin).map(State::Rsvd),
        };
        st.map_err(|e| CliError::Config(format!("chamber violation: {e}")))
    }

    /// Checks shared by every command.
    pub fn validate_common(&self) -> CliResult<()> {
        if self.n == 0 {
            return Err(CliError::Config("n must be at least 1".into()));
        }
        self.couplings()?;
        Ok(())
    }

    /// Additional checks for `simulate`.
    pub fn validate_simulation(&self) -> CliResult<()> {
        self.validate_common()?;
        if self.samples < 2 {
            return Err(CliError::Config(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(CliError::Config(format!(
                "t_end must be positive when samples >= 2 (got {}); a zero-length grid would repeat t = 0",
                self.t_end
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> RunConfig {
        RunConfig::from_json(
            r#"{"model": "rsvd", "n": 1, "g": 1.0, "g2": 1.0, "initial_state": [1.0, 0.0],
                "t_end": 2.0, "samples": 5}"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let cfg = reference();
        assert_eq!(cfg.solver, Solver::Spectral);
        assert_eq!(cfg.seed, 0);
        assert!(cfg.tolerances.is_empty());
        cfg.validate_simulation().unwrap();
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(RunConfig::from_json("{"), Err(CliError::Config(_))));
        let unknown = r#"{"model": "rsvd", "n": 1, "g": 1, "g2": 1, "initial_state": [1, 0], "extra": 1}"#;
        assert!(RunConfig::from_json(unknown).is_err());
        let bad_model = r#"{"model": "toda", "n": 1, "g": 1, "g2": 1, "initial_state": [1, 0]}"#;
        assert!(RunConfig::from_json(bad_model).is_err());
    }

    #[test]
    fn simulation_grid_validation() {
        let mut cfg = reference();
        cfg.t_end = 0.0;
        assert!(cfg.validate_simulation().is_err());
        cfg.t_end = 1.0;
        cfg.samples = 1;
        assert!(cfg.validate_simulation().is_err());
        cfg.samples = 2;
        cfg.g = 0.0;
        assert!(cfg.validate_simulation().is_err());
    }

    #[test]
    fn chamber_and_length_checks() {
        let cfg = RunConfig {
            n: 2,
            model: Model::Sutherland,
            ..reference()
        };
        assert!(cfg.state_of(Model::Sutherland, &[1.0, 2.0, 0.0, 0.0], 1e-10).is_err());
        assert!(cfg.state_of(Model::Sutherland, &[2.0, 1.0, 0.0], 1e-10).is_err());
        assert!(cfg.state_of(Model::Sutherland, &[2.0, 1.0, 0.0, 0.0], 1e-10).is_ok());
    }

    #[test]
    fn tolerance_overrides() {
        let mut cfg = reference();
        cfg.tolerances.insert("rk4_dt".into(), 1e-2);
        let ov = vec![parse_override("rk4_dt=5e-4").unwrap()];
        let tol = cfg.tolerances(&ov).unwrap();
        assert_eq!(tol.rk4_dt, 5e-4);
        assert!(cfg.tolerances(&[("bogus".into(), 1.0)]).is_err());
        assert!(parse_override("structure").is_err());
        assert!(parse_override("structure=abc").is_err());
        assert!(cfg.tolerances(&[("structure".into(), -1.0)]).is_err());
    }
}
