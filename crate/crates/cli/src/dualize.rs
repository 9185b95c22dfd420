use cn_duality::duality::{dualize_r_to_s_diagnosed, dualize_s_to_r_diagnosed};
use cn_duality::CouplingParams;
use serde::Serialize;

use crate::config::{Model, RunConfig, RunTolerances, State};
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Direction {
    S2r,
    R2s,
}

impl Direction {
    pub fn source_model(self) -> Model {
        match self {
            Direction::S2r => Model::Sutherland,
            Direction::R2s => Model::Rsvd,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualRecord {
    pub direction: &'static str,
    pub input: Vec<f64>,
    /// `(λ, θ)` for a Sutherland input, `(q, p)` for an RSvD input.
    pub output: Vec<f64>,
    /// Max-norm distance between the input and its image mapped back.
    pub roundtrip_residual: f64,
    pub spectrum_gap: f64,
    pub modulus_gap: f64,
}

pub fn map_state(st: &State, c: &CouplingParams, tol: &RunTolerances) -> CliResult<DualRecord> {
    let t = tol.matrix();
    let (direction, output, back, diag) = match st {
        State::Sutherland(s) => {
            let (image, diag) = dualize_s_to_r_diagnosed(s, c, &t)?;
            diag.check()?;
            let (back, _) = dualize_r_to_s_diagnosed(&image, c, &t)?;
            ("s2r", image.to_vec(), back.to_vec(), diag)
        }
        State::Rsvd(r) => {
            let (image, diag) = dualize_r_to_s_diagnosed(r, c, &t)?;
            diag.check()?;
            let (back, _) = dualize_s_to_r_diagnosed(&image, c, &t)?;
            ("r2s", image.to_vec(), back.to_vec(), diag)
        }
    };
    let input = st.to_vec();
    let roundtrip_residual = input
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DualRecord {
        direction,
        input,
        output,
        roundtrip_residual,
        spectrum_gap: diag.spectrum_gap,
        modulus_gap: diag.modulus_gap,
    })
}

/// Maps `initial_state` (and every entry of `states`, if present) across the
/// duality. The direction defaults to the configured model.
pub fn cmd_dualize(
    cfg: &RunConfig,
    direction: Option<Direction>,
    overrides: &[(String, f64)],
) -> CliResult<Vec<DualRecord>> {
    cfg.validate_common()?;
    let tol = cfg.tolerances(overrides)?;
    let c = cfg.couplings()?;
    let model = direction.map(Direction::source_model).unwrap_or(cfg.model);
    let inputs: Vec<&Vec<f64>> = match &cfg.states {
        Some(batch) => batch.iter().collect(),
        None => vec![&cfg.initial_state],
    };
    // validate everything before mapping anything
    let states = inputs
        .into_iter()
        .map(|v| cfg.state_of(model, v, tol.chamber_margin))
        .collect::<CliResult<Vec<_>>>()?;
    states.iter().map(|s| map_state(s, &c, &tol)).collect()
}
