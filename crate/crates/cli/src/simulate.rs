use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cn_duality::oracle::{rk4_rsvd, rk4_sutherland};
use cn_duality::rsvd::{hamiltonian_r, lax_a, solve_flow_r_with};
use cn_duality::sutherland::{action_variables_with, hamiltonian_s, solve_flow_s_with};
use cn_duality::{matkit::eig_paired_expp, CouplingParams, Error};
use serde::Serialize;
use serde_json::json;

use crate::config::{Model, RunConfig, RunTolerances, Solver, State};
use crate::error::{CliError, CliResult};

/// Where `simulate` writes.
#[derive(Debug, Clone, Default)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub sidecar: Option<PathBuf>,
    pub plot_data: bool,
}

/// Sampled rows `t, coordinates, momenta, energy, actions`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A possibly truncated run: rows up to the last regular sample, plus the
/// reason the run stopped early.
#[derive(Debug)]
pub struct Run {
    pub table: Table,
    pub abort: Option<Abort>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Abort {
    pub t: f64,
    pub last_safe_t: f64,
    pub reason: String,
}

impl Abort {
    fn into_error(self) -> CliError {
        CliError::Regularity {
            t: self.t,
            last_safe_t: self.last_safe_t,
            reason: self.reason,
        }
    }
}

pub fn header(model: Model, n: usize) -> Vec<String> {
    let (x, y) = match model {
        Model::Sutherland => ("q", "p"),
        Model::Rsvd => ("lambda", "theta"),
    };
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|a| format!("{x}_{a}")));
    h.extend((1..=n).map(|a| format!("{y}_{a}")));
    h.push("energy".into());
    h.extend((1..=n).map(|a| format!("action_{a}")));
    h
}

pub fn time_grid(t_end: f64, samples: usize) -> Vec<f64> {
    let last = (samples - 1) as f64;
    (0..samples).map(|k| t_end * k as f64 / last).collect()
}

/// Energy and action variables: `λ̂` (eigenvalues of `L`) for Sutherland
/// states, `q̌` (half log-spectrum of `𝒜`) for RSvD states.
fn row(t: f64, st: &State, c: &CouplingParams, tol: &RunTolerances) -> cn_duality::Result<Vec<f64>> {
    let (energy, actions) = match st {
        State::Sutherland(s) => (hamiltonian_s(s, c), action_variables_with(s, c, &tol.matrix())?),
        State::Rsvd(s) => {
            let a = lax_a(s, c)?.a;
            (hamiltonian_r(s, c), eig_paired_expp(&a, &tol.matrix())?.positive_part)
        }
    };
    let mut r = vec![t];
    r.extend(st.to_vec());
    r.push(energy);
    r.extend(actions);
    Ok(r)
}

fn abort_from(e: Error, t: f64, previous_t: f64) -> Abort {
    let last_safe_t = match &e {
        Error::FlowCollision { safe_t, .. } => *safe_t,
        Error::IntegrationAborted { last_t, .. } => previous_t + last_t,
        _ => previous_t,
    };
    Abort {
        t,
        last_safe_t,
        reason: e.to_string(),
    }
}

fn fatal(e: &Error) -> bool {
    !matches!(
        e,
        Error::Regularity(_)
            | Error::FlowCollision { .. }
            | Error::IntegrationAborted { .. }
            | Error::Domain(_)
            | Error::NotInExpP(_)
            | Error::Structure(_)
    )
}

/// Exact solution sampled on the grid; every sample is computed from the
/// initial state, so errors do not accumulate.
pub fn spectral_run(cfg: &RunConfig, st0: &State, tol: &RunTolerances) -> CliResult<Run> {
    let c = cfg.couplings()?;
    let grid = time_grid(cfg.t_end, cfg.samples);
    let mut rows = Vec::with_capacity(grid.len());
    let mut abort = None;
    let mut previous_t = 0.0;
    for &t in &grid {
        let point = match st0 {
            State::Sutherland(s) => solve_flow_s_with(s, &c, t, &tol.matrix()).map(State::Sutherland),
            State::Rsvd(s) => solve_flow_r_with(s, &c, t, &tol.matrix()).map(State::Rsvd),
        };
        match point.and_then(|p| row(t, &p, &c, tol)) {
            Ok(r) => rows.push(r),
            Err(e) if fatal(&e) => return Err(e.into()),
            Err(e) => {
                abort = Some(abort_from(e, t, previous_t));
                break;
            }
        }
        previous_t = t;
    }
    Ok(Run {
        table: Table {
            header: header(cfg.model, cfg.n),
            rows,
        },
        abort,
    })
}

/// RK4 between consecutive grid points with a step no larger than `rk4_dt`.
pub fn rk4_run(cfg: &RunConfig, st0: &State, tol: &RunTolerances) -> CliResult<Run> {
    let c = cfg.couplings()?;
    let grid = time_grid(cfg.t_end, cfg.samples);
    let mut rows = vec![row(0.0, st0, &c, tol)?];
    let mut abort = None;
    let mut current = st0.clone();
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / tol.rk4_dt).ceil().max(1.0);
        let dt = span / steps;
        let next = match &current {
            State::Sutherland(s) => {
                rk4_sutherland(s, &c, span, dt).map(|tr| State::Sutherland(tr.last().1.clone()))
            }
            State::Rsvd(s) => rk4_rsvd(s, &c, span, dt).map(|tr| State::Rsvd(tr.last().1.clone())),
        };
        match next.and_then(|p| row(w[1], &p, &c, tol).map(|r| (p, r))) {
            Ok((p, r)) => {
                rows.push(r);
                current = p;
            }
            Err(e) if fatal(&e) => return Err(e.into()),
            Err(e) => {
                abort = Some(abort_from(e, w[1], w[0]));
                break;
            }
        }
    }
    Ok(Run {
        table: Table {
            header: header(cfg.model, cfg.n),
            rows,
        },
        abort,
    })
}

/// 17 significant digits, `.` decimal, comma separated, `\n` line ends.
pub fn render_csv(table: &Table) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for r in &table.rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Plain whitespace-separated `t x_1 … x_n` columns for external plotters.
pub fn render_plot_data(table: &Table, n: usize) -> String {
    let mut out = String::from("#");
    for h in &table.header[..=n] {
        let _ = write!(out, " {h}");
    }
    out.push('\n');
    for r in &table.rows {
        let cells: Vec<String> = r[..=n].iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Largest drift of the energy and of the action columns from their initial values.
pub fn conservation(table: &Table, n: usize) -> (f64, f64) {
    let Some(first) = table.rows.first() else {
        return (0.0, 0.0);
    };
    let e = 2 * n + 1;
    let mut energy: f64 = 0.0;
    let mut actions: f64 = 0.0;
    for r in &table.rows {
        energy = energy.max((r[e] - first[e]).abs());
        for k in e + 1..r.len() {
            actions = actions.max((r[k] - first[k]).abs());
        }
    }
    (energy, actions)
}

/// Sup-deviation of the phase-space columns over common rows.
pub fn deviation(a: &Table, b: &Table, n: usize) -> f64 {
    a.rows
        .iter()
        .zip(&b.rows)
        .flat_map(|(x, y)| (1..=2 * n).map(move |k| (x[k] - y[k]).abs()))
        .fold(0.0, f64::max)
}

pub fn sibling(path: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = if tag.is_empty() {
        format!("{stem}.{ext}")
    } else {
        format!("{stem}.{tag}.{ext}")
    };
    path.with_file_name(name)
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn write_run(run: &Run, path: &Path, n: usize, plot: bool) -> CliResult<()> {
    write(path, &render_csv(&run.table))?;
    if plot {
        write(&sibling(path, "", "dat"), &render_plot_data(&run.table, n))?;
    }
    if let Some(a) = &run.abort {
        let text = serde_json::to_string_pretty(a).expect("abort record serializes");
        write(&sibling(path, "abort", "json"), &(text + "\n"))?;
        log::error!(
            "{}: stopped at t = {} (last safe t = {}): {}",
            path.display(),
            a.t,
            a.last_safe_t,
            a.reason
        );
    }
    Ok(())
}

/// Runs the configured solver(s) and writes the trajectory files.
pub fn cmd_simulate(cfg: &RunConfig, overrides: &[(String, f64)], out: &OutputPaths) -> CliResult<()> {
    cfg.validate_simulation()?;
    let tol = cfg.tolerances(overrides)?;
    let st0 = cfg.state_of(cfg.model, &cfg.initial_state, tol.chamber_margin)?;
    let n = cfg.n;

    let (primary, secondary) = match cfg.solver {
        Solver::Spectral => (spectral_run(cfg, &st0, &tol)?, None),
        Solver::Rk4 => (rk4_run(cfg, &st0, &tol)?, None),
        Solver::Both => (spectral_run(cfg, &st0, &tol)?, Some(rk4_run(cfg, &st0, &tol)?)),
    };
    write_run(&primary, &out.csv, n, out.plot_data)?;

    let mut deviation_summary = None;
    if let Some(rk) = &secondary {
        let rk_path = sibling(&out.csv, "rk4", "csv");
        write_run(rk, &rk_path, n, false)?;
        let dev = deviation(&primary.table, &rk.table, n);
        let ok = dev <= tol.deviation;
        if !ok {
            log::warn!("spectral and RK4 trajectories deviate by {dev:e} > {:e}", tol.deviation);
        }
        let summary = json!({
            "spectral": out.csv.display().to_string(),
            "rk4": rk_path.display().to_string(),
            "rows_compared": primary.table.rows.len().min(rk.table.rows.len()),
            "max_deviation": dev,
            "tolerance": tol.deviation,
            "within_tolerance": ok,
        });
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        write(&sibling(&out.csv, "deviation", "json"), &(text.clone() + "\n"))?;
        println!("{text}");
        deviation_summary = Some(summary);
    }

    if let Some(path) = &out.sidecar {
        let (energy_drift, action_drift) = conservation(&primary.table, n);
        let sidecar = json!({
            "config": cfg,
            "effective_tolerances": {
                "structure": tol.structure,
                "regularity": tol.regularity,
                "chamber_margin": tol.chamber_margin,
                "rk4_dt": tol.rk4_dt,
                "deviation": tol.deviation,
            },
            "rows": primary.table.rows.len(),
            "energy_drift": energy_drift,
            "action_drift": action_drift,
            "abort": primary.abort,
            "deviation": deviation_summary,
        });
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        write(path, &(text + "\n"))?;
    }

    match primary.abort.or_else(|| secondary.and_then(|s| s.abort)) {
        Some(a) => Err(a.into_error()),
        None => Ok(()),
    }
}
