use std::collections::BTreeMap;

use cn_duality::cauchy::{cauchy_det, identity_suite, partial_fraction_check, w_values, CauchyContext};
use cn_duality::duality::{dualize_r_to_s, dualize_s_to_r, pullback_coords, pullback_coords_r};
use cn_duality::matkit::{build_c, eig_paired_expp, group_residual};
use cn_duality::oracle::{fd_bracket_matrix, rk4_rsvd, rk4_sutherland, BracketConvention};
use cn_duality::rsvd::{
    grad_f1, hamiltonian_r, lax_a, momentum_residual_r, reduced_observables,
    solve_flow_r_generator, trace_observables,
};
use cn_duality::sutherland::{
    action_variables, hamiltonian_s, lax_l, momentum_residual_s, solve_flow_s,
};
use cn_duality::{
    CouplingParams, CxMatrix, CxVector, Error, Result, RsvdState, SutherlandState, Tolerances,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::sample;

/// Supplies `∇f₁(y)` to the RSvD flow checks.
pub type GradientHook = fn(&CxMatrix) -> Result<CxMatrix>;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub n_max: usize,
    pub draws: usize,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    /// Worker threads; `None` or 1 runs sequentially.
    pub threads: Option<usize>,
    pub rsvd_gradient: GradientHook,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            n_max: 3,
            draws: 50,
            tolerances: BTreeMap::new(),
            threads: None,
            rsvd_gradient: grad_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity or property being checked.
    pub anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub draws: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n_max: usize,
    pub draws: usize,
    pub status: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn summary_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<34} residual {:.3e}  tol {:.1e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.max_residual,
                c.tolerance
            ));
        }
        out.push_str(&format!(
            "{}: {} passed, {} failed\n",
            self.status, self.passed, self.failed
        ));
        out
    }
}

struct Ctx {
    seed: u64,
    n_max: usize,
    draws: usize,
    grad: GradientHook,
}

impl Ctx {
    /// Dimension of the `k`-th draw, cycling through `1..=min(n_max, cap)`.
    fn dim(&self, k: usize, cap: usize) -> usize {
        1 + k % self.n_max.min(cap)
    }

    /// A smaller draw count for the expensive checks.
    fn heavy(&self) -> usize {
        (self.draws / 10).max(2)
    }
}

struct Check {
    name: &'static str,
    anchor: &'static str,
    tolerance: f64,
    run: fn(&Ctx, &mut ChaCha8Rng) -> Result<(f64, usize)>,
}

fn checks() -> Vec<Check> {
    vec![
        Check { name: "cauchy.c_type_identities", anchor: "w-sums, CWC = W(-x), (CC W)^2 = 1 for C-symmetric x", tolerance: 1e-9, run: cauchy_c_type },
        Check { name: "cauchy.generic_identities", anchor: "sum_j w_j/(1+x_j-x_k) = 1, tr W = N, det and inverse closed forms", tolerance: 1e-9, run: cauchy_generic },
        Check { name: "cauchy.hand_point", anchor: "x = (-i/2, i/2): w = (1+i, 1-i), det = 1/2", tolerance: 1e-14, run: cauchy_hand_point },
        Check { name: "cauchy.partial_fractions", anchor: "prod(z-a)/prod(z-b) partial-fraction expansion", tolerance: 1e-9, run: cauchy_partial_fractions },
        Check { name: "duality.brackets_r", anchor: "{q_a, q_b} = 0, {q_a, p_b} = delta/2, {p_a, p_b} = 0 pulled back", tolerance: 1e-4, run: brackets_r },
        Check { name: "duality.brackets_s", anchor: "{lambda_a, lambda_b} = 0, {theta_a, lambda_b} = delta/2, {theta_a, theta_b} = 0 pulled back", tolerance: 1e-4, run: brackets_s },
        Check { name: "duality.reference_pair", anchor: "(ln(1+sqrt 2)/2, 0) <-> (1, 0)", tolerance: 1e-10, run: duality_reference },
        Check { name: "duality.roundtrip_r", anchor: "S o S^-1 = id", tolerance: 1e-8, run: roundtrip_r },
        Check { name: "duality.roundtrip_s", anchor: "S^-1 o S = id", tolerance: 1e-8, run: roundtrip_s },
        Check { name: "flow.energy_conservation", anchor: "H^S and H^R constant along the spectral flows", tolerance: 1e-8, run: energy_conservation },
        Check { name: "flow.isospectrality", anchor: "spectra of L and A constant along their flows", tolerance: 1e-8, run: isospectrality },
        Check { name: "flow.rsvd_closed_form", anchor: "n = 1: lambda(t) = sqrt(1 + t^2)", tolerance: 1e-8, run: rsvd_closed_form },
        Check { name: "flow.rsvd_vs_rk4", anchor: "Y(t) = L(lambda_0) - t grad f1 agrees with Hamilton's equations", tolerance: 1e-5, run: rsvd_vs_rk4 },
        Check { name: "flow.sutherland_vs_rk4", anchor: "e^Q0 e^(tL0/2) factorization agrees with Hamilton's equations", tolerance: 1e-5, run: sutherland_vs_rk4 },
        Check { name: "linearization.rsvd", anchor: "q constant, p(t) = p(0) - t sinh(2q) along the RSvD flow", tolerance: 1e-6, run: linearization_r },
        Check { name: "linearization.sutherland", anchor: "lambda constant, theta(t) = theta(0) + t lambda/2 along the Sutherland flow", tolerance: 1e-6, run: linearization_s },
        Check { name: "rsvd.group_relation", anchor: "A C A = C (relative to |A|^2)", tolerance: 1e-9, run: rsvd_group },
        Check { name: "rsvd.lax_energy", anchor: "tr(A)/2 = H^R", tolerance: 1e-10, run: rsvd_energy },
        Check { name: "rsvd.momentum_constraint", anchor: "(yYy^-1)_+ = -xi(V), Y_+ = 0 at (A^1/2, L(lambda))", tolerance: 1e-8, run: rsvd_momentum },
        Check { name: "rsvd.observables", anchor: "trace observables equal their reduced closed forms, r <= 6", tolerance: 1e-8, run: rsvd_observables },
        Check { name: "rsvd.orbit_vector", anchor: "V*V = N and CV + V = 0", tolerance: 1e-9, run: rsvd_orbit },
        Check { name: "rsvd.positivity_pairing", anchor: "A > 0 with reciprocal eigenvalue pairs e^(2q) e^(-2q) = 1", tolerance: 1e-9, run: rsvd_positivity },
        Check { name: "rsvd.reference_values", anchor: "n = 1, (1, 0): H^R = sqrt 2", tolerance: 1e-12, run: rsvd_reference },
        Check { name: "sutherland.lax_energy", anchor: "tr(L^2)/4 = H^S", tolerance: 1e-10, run: sutherland_energy },
        Check { name: "sutherland.lax_structure", anchor: "L Hermitian with LC + CL = 0", tolerance: 1e-12, run: sutherland_structure },
        Check { name: "sutherland.momentum_constraint", anchor: "(yYy^-1)_+ = -xi(E), Y_+ = 0 at (e^Q, L(q, p))", tolerance: 1e-8, run: sutherland_momentum },
        Check { name: "sutherland.reference_values", anchor: "n = 1, sinh(2q) = 1, p = 0: H^S = 1/2", tolerance: 1e-12, run: sutherland_reference },
    ]
}

pub fn check_names() -> Vec<&'static str> {
    checks().iter().map(|c| c.name).collect()
}

/// Runs every check; failures become report entries rather than errors.
pub fn run_suite(opts: &VerifyOptions) -> CliResult<VerifyReport> {
    if opts.n_max == 0 || opts.draws == 0 {
        return Err(CliError::Config("n-max and draws must be at least 1".into()));
    }
    let all = checks();
    for name in opts.tolerances.keys() {
        if !all.iter().any(|c| c.name == name) {
            return Err(CliError::Config(format!("unknown check '{name}' in --tol")));
        }
    }
    let ctx = Ctx {
        seed: opts.seed,
        n_max: opts.n_max,
        draws: opts.draws,
        grad: opts.rsvd_gradient,
    };
    let indexed: Vec<(usize, &Check)> = all.iter().enumerate().collect();
    let eval = |&(i, check): &(usize, &Check)| -> CheckRecord {
        let tolerance = opts.tolerances.get(check.name).copied().unwrap_or(check.tolerance);
        let stream = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ stream);
        let (max_residual, draws, note) = match (check.run)(&ctx, &mut rng) {
            Ok((r, d)) => (r, d, None),
            Err(e) => (f64::INFINITY, 0, Some(e.to_string())),
        };
        CheckRecord {
            name: check.name.to_string(),
            anchor: check.anchor.to_string(),
            max_residual,
            tolerance,
            draws,
            pass: max_residual <= tolerance,
            note,
        }
    };
    let mut records: Vec<CheckRecord> = match opts.threads {
        Some(k) if k > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {k} worker threads: {e}")))?
            .install(|| indexed.par_iter().map(eval).collect()),
        _ => indexed.iter().map(eval).collect(),
    };
    records.sort_by(|a, b| a.name.cmp(&b.name));
    let failed = records.iter().filter(|r| !r.pass).count();
    Ok(VerifyReport {
        seed: opts.seed,
        n_max: opts.n_max,
        draws: opts.draws,
        status: if failed == 0 { "pass" } else { "fail" },
        passed: records.len() - failed,
        failed,
        checks: records,
    })
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn points(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect()
}

fn cauchy_generic(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for k in 0..ctx.draws {
        let len = 1 + k % (2 * ctx.n_max).max(2);
        match CauchyContext::new(CxVector::from_vec(points(rng, len))) {
            Ok(c) => {
                worst = worst.max(identity_suite(&c)?.max_residual());
                used += 1;
            }
            Err(Error::Pole(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((worst, used))
}

fn cauchy_c_type(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for k in 0..ctx.draws {
        let half = 1 + k % ctx.n_max;
        match CauchyContext::c_symmetric(&points(rng, half)) {
            Ok(c) => {
                let rep = identity_suite(&c)?;
                if rep.c_type.is_none() {
                    return Err(Error::Structure("C-type identities were skipped".into()));
                }
                worst = worst.max(rep.max_residual());
                used += 1;
            }
            Err(Error::Pole(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((worst, used))
}

fn cauchy_hand_point(_: &Ctx, _: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let c = CauchyContext::new(CxVector::from_vec(vec![cx(0.0, -0.5), cx(0.0, 0.5)]))?;
    let w = w_values(&c);
    let det = cauchy_det(&c)?;
    let r = (w[0] - cx(1.0, 1.0))
        .norm()
        .max((w[1] - cx(1.0, -1.0)).norm())
        .max((det - cx(0.5, 0.0)).norm());
    Ok((r, 1))
}

fn cauchy_partial_fractions(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for k in 0..ctx.draws {
        let big_n = 1 + k % 6;
        let m = rng.gen_range(0..=big_n);
        let (a, b) = (points(rng, m), points(rng, big_n));
        let z = cx(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        match partial_fraction_check(&a, &b, z) {
            Ok((lhs, rhs)) => {
                worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
                used += 1;
            }
            Err(Error::Pole(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((worst, used))
}

fn sutherland_draws(
    ctx: &Ctx,
    rng: &mut ChaCha8Rng,
    count: usize,
    cap: usize,
    mut f: impl FnMut(&SutherlandState, &CouplingParams) -> Result<f64>,
) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = ctx.dim(k, cap);
        let c = sample::couplings(rng, 2.0);
        let s = sample::sutherland_state(rng, n);
        worst = worst.max(f(&s, &c)?);
    }
    Ok((worst, count))
}

fn rsvd_draws(
    ctx: &Ctx,
    rng: &mut ChaCha8Rng,
    count: usize,
    cap: usize,
    mut f: impl FnMut(&RsvdState, &CouplingParams) -> Result<f64>,
) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = ctx.dim(k, cap);
        let c = sample::couplings(rng, 2.0);
        let st = sample::rsvd_state(rng, n);
        worst = worst.max(f(&st, &c)?);
    }
    Ok((worst, count))
}

fn sutherland_energy(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    sutherland_draws(ctx, rng, ctx.draws, 4, |s, c| {
        let l = lax_l(s, c);
        let h = hamiltonian_s(s, c);
        Ok((0.25 * (&l * &l).trace().re - h).abs() / (1.0 + h.abs()))
    })
}

fn sutherland_structure(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    sutherland_draws(ctx, rng, ctx.draws, 4, |s, c| {
        let l = lax_l(s, c);
        let big_c = build_c(s.n())?;
        let herm = (&l - l.adjoint()).norm();
        let anti = (&l * &big_c + &big_c * &l).norm();
        Ok(herm.max(anti) / (1.0 + l.norm()))
    })
}

fn sutherland_momentum(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    sutherland_draws(ctx, rng, ctx.draws, 4, |s, c| {
        Ok(momentum_residual_s(s, c) / (1.0 + lax_l(s, c).norm()))
    })
}

fn reference_q() -> f64 {
    0.5 * (1.0 + 2f64.sqrt()).ln()
}

fn unit_couplings() -> Result<CouplingParams> {
    CouplingParams::new(1.0, 1.0)
}

fn sutherland_reference(_: &Ctx, _: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let s = SutherlandState::new(vec![reference_q()], vec![0.0])?;
    Ok(((hamiltonian_s(&s, &unit_couplings()?) - 0.5).abs(), 1))
}

fn rsvd_group(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.draws, 4, |st, c| {
        let a = lax_a(st, c)?.a;
        Ok(group_residual(&a, &build_c(st.n())?) / a.norm_squared())
    })
}

fn rsvd_orbit(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.draws, 4, |st, c| {
        let b = lax_a(st, c)?;
        let big_c = build_c(st.n())?;
        let norm = (b.v.norm_squared() - 2.0 * st.n() as f64).abs();
        Ok(norm.max((&big_c * &b.v + &b.v).norm()))
    })
}

fn rsvd_positivity(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.draws, 4, |st, c| {
        let a = lax_a(st, c)?.a;
        let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        if ev[0] <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let len = ev.len();
        Ok((0..len / 2)
            .map(|k| (ev[k] * ev[len - 1 - k] - 1.0).abs())
            .fold(0.0, f64::max))
    })
}

fn rsvd_energy(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.draws, 4, |st, c| {
        let h = hamiltonian_r(st, c);
        Ok((0.5 * lax_a(st, c)?.a.trace().re - h).abs() / (1.0 + h))
    })
}

fn rsvd_momentum(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.draws, 4, momentum_residual_r)
}

fn rsvd_observables(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.heavy(), 3, |st, c| {
        let mut worst: f64 = 0.0;
        for r in 1..=6 {
            let red = reduced_observables(st, c, r)?;
            let tr = trace_observables(st, c, r)?;
            let scale = 1.0 + red.phi.abs() + red.psi.abs();
            worst = worst
                .max((red.phi - tr.phi).abs() / scale)
                .max((red.psi - tr.psi).abs() / scale);
        }
        Ok(worst)
    })
}

fn rsvd_reference(_: &Ctx, _: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let st = RsvdState::new(vec![1.0], vec![0.0])?;
    Ok(((hamiltonian_r(&st, &unit_couplings()?) - 2f64.sqrt()).abs(), 1))
}

fn duality_reference(_: &Ctx, _: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let c = unit_couplings()?;
    let st = dualize_s_to_r(&SutherlandState::new(vec![reference_q()], vec![0.0])?, &c)?;
    let s = dualize_r_to_s(&RsvdState::new(vec![1.0], vec![0.0])?, &c)?;
    let r = (st.lambda()[0] - 1.0)
        .abs()
        .max(st.theta()[0].abs())
        .max((s.q()[0] - reference_q()).abs())
        .max(s.p()[0].abs());
    Ok((r, 1))
}

fn roundtrip_s(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    sutherland_draws(ctx, rng, ctx.draws, 4, |s, c| {
        let back = dualize_r_to_s(&dualize_s_to_r(s, c)?, c)?;
        Ok(sample::max_abs_diff(&s.to_vec(), &back.to_vec()))
    })
}

fn roundtrip_r(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.draws, 4, |st, c| {
        let back = dualize_s_to_r(&dualize_r_to_s(st, c)?, c)?;
        Ok(sample::max_abs_diff(&st.to_vec(), &back.to_vec()))
    })
}

/// Deviation of a bracket matrix of `(u, v)` from `{u,u} = 0`, `{v_a,u_b} = δ/2`, `{v,v} = 0`.
fn canonical_defect(b: &[Vec<f64>], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for c in 0..n {
            let target = if a == c { 0.5 } else { 0.0 };
            worst = worst
                .max(b[a][c].abs())
                .max((b[n + a][c] - target).abs())
                .max(b[n + a][n + c].abs());
        }
    }
    worst
}

const BRACKET_STEP: f64 = 1e-5;

fn brackets_s(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    sutherland_draws(ctx, rng, ctx.heavy(), 3, |s, c| {
        let n = s.n();
        let fields = |x: &[f64]| -> Result<Vec<f64>> {
            let (mut lam, th) =
                pullback_coords(&SutherlandState::new(x[..n].to_vec(), x[n..].to_vec())?, c)?;
            lam.extend(th);
            Ok(lam)
        };
        let b = fd_bracket_matrix(fields, &s.to_vec(), BRACKET_STEP, BracketConvention::HALF)?;
        Ok(canonical_defect(&b, n))
    })
}

fn brackets_r(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.heavy(), 3, |st, c| {
        let n = st.n();
        // chart (θ, λ), fields (p̌, q̌)
        let mut point = st.theta().to_vec();
        point.extend_from_slice(st.lambda());
        let fields = |x: &[f64]| -> Result<Vec<f64>> {
            let (q, mut p) =
                pullback_coords_r(&RsvdState::new(x[n..].to_vec(), x[..n].to_vec())?, c)?;
            p.extend(q);
            Ok(p)
        };
        let b = fd_bracket_matrix(fields, &point, BRACKET_STEP, BracketConvention::HALF)?;
        Ok(canonical_defect(&b, n))
    })
}

/// RSvD flow from the configured gradient hook.
fn flow_r(ctx: &Ctx, st0: &RsvdState, c: &CouplingParams, t: f64) -> Result<RsvdState> {
    let bundle = lax_a(st0, c)?;
    let grad = (ctx.grad)(&bundle.r)?;
    solve_flow_r_generator(st0, c, &bundle.a, &grad, t, &Tolerances::default())
}

const FLOW_TIMES: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

fn sutherland_vs_rk4(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let count = ctx.heavy();
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = ctx.dim(k, 3);
        let c = sample::couplings(rng, 1.5);
        let s0 = sample::sutherland_state(rng, n);
        let traj = rk4_sutherland(&s0, &c, 2.0, 1e-3)?;
        for (t, rk) in traj.samples.iter().step_by(250) {
            let sp = solve_flow_s(&s0, &c, *t)?;
            worst = worst.max(sample::max_abs_diff(&sp.to_vec(), &rk.to_vec()));
        }
    }
    Ok((worst, count))
}

fn rsvd_vs_rk4(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let count = ctx.heavy();
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = ctx.dim(k, 3);
        let c = sample::couplings(rng, 1.2);
        let st0 = sample::rsvd_state(rng, n);
        let traj = rk4_rsvd(&st0, &c, 2.0, 2.5e-4)?;
        for (t, rk) in traj.samples.iter().step_by(1000) {
            let sp = flow_r(ctx, &st0, &c, *t)?;
            worst = worst.max(sample::max_abs_diff(&sp.to_vec(), &rk.to_vec()));
        }
    }
    Ok((worst, count))
}

fn rsvd_closed_form(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let c = unit_couplings()?;
    let st0 = RsvdState::new(vec![1.0], vec![0.0])?;
    let mut worst: f64 = 0.0;
    for t in FLOW_TIMES {
        let st = flow_r(ctx, &st0, &c, t)?;
        worst = worst.max((st.lambda()[0] - (1.0 + t * t).sqrt()).abs());
        // the dual momentum runs as p̌(t) = −t
        let (_, p) = pullback_coords_r(&st, &c)?;
        worst = worst.max((p[0] + t).abs());
    }
    Ok((worst, FLOW_TIMES.len()))
}

fn isospectrality(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let count = ctx.heavy();
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = ctx.dim(k, 4);
        let c = sample::couplings(rng, 2.0);
        let s0 = sample::sutherland_state(rng, n);
        let spec0 = action_variables(&s0, &c)?;
        let st0 = sample::rsvd_state(rng, n);
        let q0 = eig_paired_expp(&lax_a(&st0, &c)?.a, &Tolerances::default())?.positive_part;
        for t in FLOW_TIMES {
            let spec = action_variables(&solve_flow_s(&s0, &c, t)?, &c)?;
            worst = worst.max(sample::max_abs_diff(&spec, &spec0) / (1.0 + spec0[0]));
            let a = lax_a(&flow_r(ctx, &st0, &c, t)?, &c)?.a;
            let q = eig_paired_expp(&a, &Tolerances::default())?.positive_part;
            worst = worst.max(sample::max_abs_diff(&q, &q0));
        }
    }
    Ok((worst, count))
}

fn energy_conservation(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    let count = ctx.heavy();
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = ctx.dim(k, 4);
        let c = sample::couplings(rng, 2.0);
        let s0 = sample::sutherland_state(rng, n);
        let st0 = sample::rsvd_state(rng, n);
        let (hs, hr) = (hamiltonian_s(&s0, &c), hamiltonian_r(&st0, &c));
        for t in FLOW_TIMES {
            let s = solve_flow_s(&s0, &c, t)?;
            worst = worst.max((hamiltonian_s(&s, &c) - hs).abs() / (1.0 + hs.abs()));
            let st = flow_r(ctx, &st0, &c, t)?;
            worst = worst.max((hamiltonian_r(&st, &c) - hr).abs() / (1.0 + hr));
        }
    }
    Ok((worst, count))
}

fn linearization_s(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    sutherland_draws(ctx, rng, ctx.heavy(), 3, |s0, c| {
        let (lam0, th0) = pullback_coords(s0, c)?;
        let mut worst: f64 = 0.0;
        for t in FLOW_TIMES {
            let (lam, th) = pullback_coords(&solve_flow_s(s0, c, t)?, c)?;
            let predicted: Vec<f64> = th0.iter().zip(&lam0).map(|(a, l)| a + 0.5 * t * l).collect();
            worst = worst
                .max(sample::max_abs_diff(&lam, &lam0))
                .max(sample::max_abs_diff(&th, &predicted));
        }
        Ok(worst)
    })
}

fn linearization_r(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, usize)> {
    rsvd_draws(ctx, rng, ctx.heavy(), 3, |st0, c| {
        let (q0, p0) = pullback_coords_r(st0, c)?;
        let mut worst: f64 = 0.0;
        for t in [0.1, 0.2, 0.3] {
            let (q, p) = pullback_coords_r(&flow_r(ctx, st0, c, t)?, c)?;
            let predicted: Vec<f64> = p0.iter().zip(&q0).map(|(p, q)| p - t * (2.0 * q).sinh()).collect();
            worst = worst
                .max(sample::max_abs_diff(&q, &q0))
                .max(sample::max_abs_diff(&p, &predicted));
        }
        Ok(worst)
    })
}
