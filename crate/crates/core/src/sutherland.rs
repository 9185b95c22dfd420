//! The hyperbolic `C_n` Sutherland model.
//!
//! Phase space: `q_1 > … > q_n > 0`, `p ∈ R^n`, with Poisson bracket
//! `{q_a, p_b} = ½ δ_ab`. Under this bracket Hamilton's equations read
//! `q̇ = ½ ∂H/∂p = p/2` and `ṗ = −½ ∂H/∂q`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{
    decompose_kp, eig_paired_p, exp_paired_diag, group_kak_right, CxMatrix, Tolerances, I,
};

/// Smallest accepted distance from the chamber walls by default.
pub const DEFAULT_CHAMBER_MARGIN: f64 = 1e-10;

/// Coupling constants `g`, `g₂` (both nonzero) and the derived `ε = 1 − g₂/g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    g: f64,
    g2: f64,
}

impl CouplingParams {
    pub fn new(g: f64, g2: f64) -> Result<Self> {
        if !g.is_finite() || !g2.is_finite() || g == 0.0 || g2 == 0.0 {
            return Err(Error::InvalidCoupling(format!(
                "g and g2 must be finite and nonzero, got g = {g}, g2 = {g2}"
            )));
        }
        if (g2 - 2.0 * g).abs() <= 1e-12 * g.abs() {
            log::warn!("g2 = 2g: some genericity arguments for the RSvD side degenerate here");
        }
        Ok(CouplingParams { g, g2 })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn eps(&self) -> f64 {
        1.0 - self.g2 / self.g
    }
}

/// Checks `v_1 > v_2 > … > v_n > 0` with every gap at least `margin`.
pub(crate) fn check_chamber(v: &[f64], margin: f64, name: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("{name} has non-finite entries")));
    }
    if v[v.len() - 1] <= margin {
        return Err(Error::Domain(format!(
            "chamber violation: {name}_{} = {} is not > 0",
            v.len(),
            v[v.len() - 1]
        )));
    }
    for (a, w) in v.windows(2).enumerate() {
        if w[0] - w[1] <= margin {
            return Err(Error::Domain(format!(
                "chamber violation: {name}_{} = {} is not > {name}_{} = {}",
                a + 1,
                w[0],
                a + 2,
                w[1]
            )));
        }
    }
    Ok(())
}

/// A point `(q, p)` of the Sutherland phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct SutherlandState {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl SutherlandState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        Self::with_margin(q, p, DEFAULT_CHAMBER_MARGIN)
    }

    pub fn with_margin(q: Vec<f64>, p: Vec<f64>, margin: f64) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::InvalidDimension(format!(
                "q has {} entries but p has {}",
                q.len(),
                p.len()
            )));
        }
        check_chamber(&q, margin, "q")?;
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("p has non-finite entries".into()));
        }
        Ok(SutherlandState { q, p })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// `(q_1, …, q_n, p_1, …, p_n)`
    pub fn to_vec(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }
}

pub fn hamiltonian_s(s: &SutherlandState, c: &CouplingParams) -> f64 {
    let (q, p) = (s.q(), s.p());
    let (g, g2) = (c.g(), c.g2());
    let n = s.n();
    let kinetic = 0.5 * p.iter().map(|x| x * x).sum::<f64>();
    let mut pair = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            pair += g * g / (q[a] - q[b]).sinh().powi(2) + g * g / (q[a] + q[b]).sinh().powi(2);
        }
    }
    let single = 0.5 * q.iter().map(|x| g2 * g2 / (2.0 * x).sinh().powi(2)).sum::<f64>();
    kinetic + pair + single
}

/// The Lax matrix `L(q, p) = P − sinh(ad_Q)^{-1} ξ(E)`, entrywise.
pub fn lax_l(s: &SutherlandState, c: &CouplingParams) -> CxMatrix {
    let (q, p) = (s.q(), s.p());
    let (g, g2) = (c.g(), c.g2());
    let n = s.n();
    let mut l = CxMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                l[(a, a)] = Complex64::new(p[a], 0.0);
                l[(n + a, n + a)] = Complex64::new(-p[a], 0.0);
                let v = I * (g2 / (2.0 * q[a]).sinh());
                l[(a, n + a)] = v;
                l[(n + a, a)] = -v;
            } else {
                let diag_block = -I * (g / (q[a] - q[b]).sinh());
                l[(a, b)] = diag_block;
                l[(n + a, n + b)] = -diag_block;
                let off_block = I * (g / (q[a] + q[b]).sinh());
                l[(a, n + b)] = off_block;
                l[(n + a, b)] = -off_block;
            }
        }
    }
    l
}

/// `Q = diag(q, −q)` exponentiated with a prefactor: `e^{s Q}`.
pub fn exp_q(s: &SutherlandState, scale: f64) -> CxMatrix {
    exp_paired_diag(s.q(), scale)
}

/// Positive eigenvalues of `L`, decreasing: the action variables `λ̂`.
pub fn action_variables(s: &SutherlandState, c: &CouplingParams) -> Result<Vec<f64>> {
    action_variables_with(s, c, &Tolerances::default())
}

pub fn action_variables_with(
    s: &SutherlandState,
    c: &CouplingParams,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    Ok(eig_paired_p(&lax_l(s, c), tol)?.positive_part)
}

/// `‖(yYy^{-1})_+ + ρ‖_F + ‖Y_+‖_F` at `(y, Y, ρ) = (e^Q, L(q,p), ξ(E))`.
pub fn momentum_residual_s(s: &SutherlandState, c: &CouplingParams) -> f64 {
    let y = exp_q(s, 1.0);
    let y_inv = exp_q(s, -1.0);
    let big_y = lax_l(s, c);
    let rho = crate::duality::xi_of_e(s.n(), c);
    let (conj_plus, _) = decompose_kp(&(&y * &big_y * &y_inv));
    let (y_plus, _) = decompose_kp(&big_y);
    (conj_plus + rho).norm() + y_plus.norm()
}

/// Exact solution of the flow generated by `F₂ ∘ L = H^S` for time `t`.
pub fn solve_flow_s(s0: &SutherlandState, c: &CouplingParams, t: f64) -> Result<SutherlandState> {
    solve_flow_s_with(s0, c, t, &Tolerances::default())
}

pub fn solve_flow_s_with(
    s0: &SutherlandState,
    c: &CouplingParams,
    t: f64,
    tol: &Tolerances,
) -> Result<SutherlandState> {
    let l0 = lax_l(s0, c);
    let grad = l0.scale(0.5);
    solve_flow_s_generator(s0, &l0, &grad, t, tol)
}

/// Flow of the reduced Hamiltonian `F ∘ L` for an invariant `F`, given the
/// gradient `∇F(L₀)` (an element of `p` commuting with `L₀`).
///
/// `B(t) = e^{Q₀} e^{t ∇F(L₀)} = η_L e^{Q(t)} η_R*`; `Q(t)` and `η_R` come from
/// the singular value decomposition of `B`, and `L(t) = η_R* L₀ η_R` carries
/// `p(t)` on its diagonal.
pub fn solve_flow_s_generator(
    s0: &SutherlandState,
    l0: &CxMatrix,
    grad: &CxMatrix,
    t: f64,
    tol: &Tolerances,
) -> Result<SutherlandState> {
    let n = s0.n();
    let b = exp_q(s0, 1.0) * crate::matkit::expm(&grad.scale(t));
    let sp = group_kak_right(&b, tol).map_err(|e| match e {
        Error::Regularity(msg) => Error::Regularity(format!("at t = {t}: {msg}")),
        other => other,
    })?;
    let eta_r = sp.frame.mat();
    let l_t = eta_r.adjoint() * l0 * eta_r;
    let p_t: Vec<f64> = (0..n).map(|a| l_t[(a, a)].re).collect();
    SutherlandState::new(sp.positive_part, p_t)
}
