//! The rational `C_n` Ruijsenaars–Schneider–van Diejen model.
//!
//! Phase space: `λ_1 > … > λ_n > 0`, `θ ∈ R^n`, with `{θ_a, λ_b} = ½ δ_ab`, so
//! `θ̇ = ½ ∂H/∂λ` and `λ̇ = −½ ∂H/∂θ`.
//!
//! The Lax matrix `𝒜(λ, θ)` is a Hermitian, positive definite element of
//! `U(n,n)` built as a deformed Cauchy matrix
//! `𝒜_{kl} = (ℱ_k ℱ̄_l + ε C_{kl}) / (1 + x_k − x_l)` with `x_a = −x_{n+a} = λ_a/(2ig)`.

use num_complex::Complex64;

use crate::cauchy::{w_values, CauchyContext};
use crate::duality::xi_of;
use crate::error::{Error, Result};
use crate::matkit::{
    build_c, eig_paired_expp, eig_paired_p, exp_paired_diag, group_residual, hermitian_residual,
    inv_sqrt_posdef, paired_diag, sqrt_posdef, CxMatrix, CxVector, Tolerances, I,
};
use crate::sutherland::{check_chamber, CouplingParams, DEFAULT_CHAMBER_MARGIN};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A point `(λ, θ)` of the RSvD phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct RsvdState {
    lambda: Vec<f64>,
    theta: Vec<f64>,
}

impl RsvdState {
    pub fn new(lambda: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        Self::with_margin(lambda, theta, DEFAULT_CHAMBER_MARGIN)
    }

    pub fn with_margin(lambda: Vec<f64>, theta: Vec<f64>, margin: f64) -> Result<Self> {
        if lambda.len() != theta.len() {
            return Err(Error::InvalidDimension(format!(
                "lambda has {} entries but theta has {}",
                lambda.len(),
                theta.len()
            )));
        }
        check_chamber(&lambda, margin, "lambda")?;
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("theta has non-finite entries".into()));
        }
        Ok(RsvdState { lambda, theta })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `(λ_1, …, λ_n, θ_1, …, θ_n)`
    pub fn to_vec(&self) -> Vec<f64> {
        self.lambda.iter().chain(&self.theta).copied().collect()
    }
}

/// `z_a(λ) = −(1 + i g₂/λ_a) ∏_{d≠a} (1 + 2ig/(λ_a − λ_d))(1 + 2ig/(λ_a + λ_d))`.
pub fn z_values(lambda: &[f64], c: &CouplingParams) -> Vec<Complex64> {
    let (g, g2) = (c.g(), c.g2());
    (0..lambda.len())
        .map(|a| {
            let mut z = -(ONE + I * (g2 / lambda[a]));
            for d in (0..lambda.len()).filter(|&d| d != a) {
                z *= (ONE + I * (2.0 * g / (lambda[a] - lambda[d])))
                    * (ONE + I * (2.0 * g / (lambda[a] + lambda[d])));
            }
            z
        })
        .collect()
}

/// The generating vector `x = (λ/(2ig), −λ/(2ig))`.
pub fn x_vector(lambda: &[f64], c: &CouplingParams) -> CxVector {
    let n = lambda.len();
    let half = |a: usize| Complex64::new(0.0, -lambda[a] / (2.0 * c.g()));
    CxVector::from_fn(2 * n, |k, _| if k < n { half(k) } else { -half(k - n) })
}

/// Second route to `z`: `z_a = −w_a(x)(1 − ε/(1 + 2x_a))`.
pub fn z_values_via_w(lambda: &[f64], c: &CouplingParams) -> Result<Vec<Complex64>> {
    let x = x_vector(lambda, c);
    let ctx = CauchyContext::new(x.clone())?;
    let w = w_values(&ctx);
    let eps = c.eps();
    Ok((0..lambda.len())
        .map(|a| -w[a] * (ONE - eps / (ONE + x[a] * 2.0)))
        .collect())
}

/// `ℱ_a = e^{θ_a}|z_a|^{1/2}`, `ℱ_{n+a} = e^{−θ_a} z̄_a |z_a|^{−1/2}`.
pub fn f_vector(st: &RsvdState, z: &[Complex64]) -> CxVector {
    let n = st.n();
    let th = st.theta();
    CxVector::from_fn(2 * n, |k, _| {
        if k < n {
            Complex64::new(th[k].exp() * z[k].norm().sqrt(), 0.0)
        } else {
            let a = k - n;
            z[a].conj() * ((-th[a]).exp() / z[a].norm().sqrt())
        }
    })
}

/// `𝒜` from the compact Cauchy-like formula.
pub fn lax_a_compact(st: &RsvdState, c: &CouplingParams) -> CxMatrix {
    let n = st.n();
    let z = z_values(st.lambda(), c);
    let f = f_vector(st, &z);
    let x = x_vector(st.lambda(), c);
    let eps = c.eps();
    CxMatrix::from_fn(2 * n, 2 * n, |k, l| {
        let cc = if (k + n) % (2 * n) == l { eps } else { 0.0 };
        (f[k] * f[l].conj() + cc) / (ONE + x[k] - x[l])
    })
}

/// `𝒜` from the four block formulas.
pub fn lax_a_blocks(st: &RsvdState, c: &CouplingParams) -> CxMatrix {
    let n = st.n();
    let (lam, th) = (st.lambda(), st.theta());
    let (g, g2) = (c.g(), c.g2());
    let z = z_values(lam, c);
    let tig = I * (2.0 * g);
    let mut m = CxMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let zz = (z[a] * z[b]).norm().sqrt();
            m[(a, b)] = (th[a] + th[b]).exp() * zz * tig / (tig + (lam[a] - lam[b]));
            m[(n + a, n + b)] = (-th[a] - th[b]).exp() * (z[a].conj() * z[b]) / zz * tig
                / (tig - (lam[a] - lam[b]));
            let mut off = (th[a] - th[b]).exp() * z[b] * (z[a].norm() / z[b].norm()).sqrt() * tig
                / (tig + (lam[a] + lam[b]));
            if a == b {
                off += I * (g - g2) / (I * g + lam[a]);
            }
            m[(a, n + b)] = off;
            m[(n + b, a)] = off.conj();
        }
    }
    m
}

/// The Lax matrix together with everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RsvdLaxBundle {
    /// `𝒜`
    pub a: CxMatrix,
    /// `𝒜^{1/2}`
    pub r: CxMatrix,
    /// `𝒜^{-1/2}`
    pub r_inv: CxMatrix,
    /// `ℱ`
    pub f: CxVector,
    /// `𝒱 = 𝒜^{-1/2} ℱ`
    pub v: CxVector,
    pub z: Vec<Complex64>,
    pub x: CxVector,
}

/// Builds `𝒜` both ways, cross-checks, and derives `𝒜^{1/2}` and `𝒱`.
pub fn lax_a(st: &RsvdState, c: &CouplingParams) -> Result<RsvdLaxBundle> {
    let n = st.n();
    let a = lax_a_compact(st, c);
    let blocks = lax_a_blocks(st, c);
    let scale = 1.0 + a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gap = (&a - &blocks).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if gap > 1e-10 * scale {
        return Err(Error::Structure(format!(
            "compact and block forms of the Lax matrix disagree by {gap:e}"
        )));
    }
    let big_c = build_c(n)?;
    let grp = group_residual(&a, &big_c);
    let an = a.norm();
    if grp > 1e-8 * (1.0 + an * an) || hermitian_residual(&a) > 1e-12 * (1.0 + an) {
        return Err(Error::Structure(format!(
            "Lax matrix left U(n,n): ACA - C residual {grp:e}"
        )));
    }
    let (r, r_inv) = square_roots(&a)?;
    let z = z_values(st.lambda(), c);
    let f = f_vector(st, &z);
    let v = &r_inv * &f;
    let x = x_vector(st.lambda(), c);
    Ok(RsvdLaxBundle { a, r, r_inv, f, v, z, x })
}

/// `𝒜^{±1/2}`. When the spectrum is regular these come from the paired frame of
/// the large eigenvalues, `𝒜^{±1/2} = η e^{±Q} η*`, which avoids the relative
/// error of the small eigenvalues; otherwise from a plain eigendecomposition.
fn square_roots(a: &CxMatrix) -> Result<(CxMatrix, CxMatrix)> {
    match eig_paired_expp(a, &Tolerances::default()) {
        Ok(sp) => {
            let eta = sp.frame.mat();
            let q = &sp.positive_part;
            Ok((
                eta * exp_paired_diag(q, 1.0) * eta.adjoint(),
                eta * exp_paired_diag(q, -1.0) * eta.adjoint(),
            ))
        }
        Err(Error::Regularity(_)) => {
            let lift = |e| match e {
                Error::NotPositiveDefinite { min_eigenvalue } => Error::Structure(format!(
                    "Lax matrix not positive definite (min eigenvalue {min_eigenvalue:e})"
                )),
                other => other,
            };
            Ok((sqrt_posdef(a).map_err(lift)?, inv_sqrt_posdef(a).map_err(lift)?))
        }
        Err(Error::NotInExpP(msg)) => Err(Error::Structure(format!("Lax matrix {msg}"))),
        Err(e) => Err(e),
    }
}

pub fn hamiltonian_r(st: &RsvdState, c: &CouplingParams) -> f64 {
    let (lam, th) = (st.lambda(), st.theta());
    let (g, g2) = (c.g(), c.g2());
    (0..st.n())
        .map(|cc| {
            let mut term = (2.0 * th[cc]).cosh() * (1.0 + g2 * g2 / (lam[cc] * lam[cc])).sqrt();
            for a in (0..st.n()).filter(|&a| a != cc) {
                term *= (1.0 + 4.0 * g * g / (lam[cc] - lam[a]).powi(2)).sqrt()
                    * (1.0 + 4.0 * g * g / (lam[cc] + lam[a]).powi(2)).sqrt();
            }
            term
        })
        .sum()
}

/// The two observable families, as reduced closed forms or as traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub phi: f64,
    pub psi: f64,
}

/// Closed forms: `φ_r = (2/r) Σ λ_a^r` (even `r`, else 0) and
/// `Ψ_r = 2 Σ λ_a^r |z_a| sinh(2θ_a)` (odd) / `cosh(2θ_a)` (even).
pub fn reduced_observables(st: &RsvdState, c: &CouplingParams, r: u32) -> Result<Observables> {
    if r == 0 {
        return Err(Error::Domain("observable order r must be positive".into()));
    }
    let z = z_values(st.lambda(), c);
    let even = r % 2 == 0;
    let phi = if even {
        2.0 / r as f64 * st.lambda().iter().map(|l| l.powi(r as i32)).sum::<f64>()
    } else {
        0.0
    };
    let psi = 2.0
        * (0..st.n())
            .map(|a| {
                let h = if even {
                    (2.0 * st.theta()[a]).cosh()
                } else {
                    (2.0 * st.theta()[a]).sinh()
                };
                st.lambda()[a].powi(r as i32) * z[a].norm() * h
            })
            .sum::<f64>();
    Ok(Observables { phi, psi })
}

/// Trace definitions evaluated at `(y, Y, ρ) = (𝒜^{1/2}, 𝓛(λ), ξ(𝒱))`:
/// `φ_r = (tr Y^r + tr (Y*)^r)/(2r)` and
/// `Ψ_r = (tr(Y^r y* Z y) + tr((Y*)^r y* Z y))/2` with `Z = ρ/(ig) + 1 − εC`.
pub fn trace_observables(st: &RsvdState, c: &CouplingParams, r: u32) -> Result<Observables> {
    if r == 0 {
        return Err(Error::Domain("observable order r must be positive".into()));
    }
    let bundle = lax_a(st, c)?;
    let n = st.n();
    let big_c = build_c(n)?;
    let y = &bundle.r;
    let big_y = paired_diag(st.lambda());
    let rho = xi_of(&bundle.v, c)?;
    let id = CxMatrix::identity(2 * n, 2 * n);
    let z = rho / (I * c.g()) + &id - big_c.scale(c.eps());
    let mut yr = id.clone();
    for _ in 0..r {
        yr = &yr * &big_y;
    }
    let yr_adj = yr.adjoint();
    let phi = (yr.trace() + yr_adj.trace()).re / (2.0 * r as f64);
    let m = y.adjoint() * z * y;
    let psi = ((&yr * &m).trace() + (&yr_adj * &m).trace()).re / 2.0;
    Ok(Observables { phi, psi })
}

/// `‖(yYy^{-1})_+ + ρ‖_F + ‖Y_+‖_F` at `(y, Y, ρ) = (𝒜^{1/2}, 𝓛(λ), ξ(𝒱))`.
pub fn momentum_residual_r(st: &RsvdState, c: &CouplingParams) -> Result<f64> {
    let bundle = lax_a(st, c)?;
    let y = &bundle.r;
    let y_inv = &bundle.r_inv;
    let big_y = paired_diag(st.lambda());
    let rho = xi_of(&bundle.v, c)?;
    let (conj_plus, _) = crate::matkit::decompose_kp(&(y * &big_y * y_inv));
    let (y_plus, _) = crate::matkit::decompose_kp(&big_y);
    Ok((conj_plus + rho).norm() + y_plus.norm())
}

/// Gradient of `f₁(y) = ½ tr(y y*)` in the sense `df_y(δy) = tr(∇f₁(y) y^{-1} δy)`:
/// `∇f₁(y) = ½(y*y − C y*y C)`. For Hermitian `y = 𝒜^{1/2}` this is `½(𝒜 − C𝒜C)`.
pub fn grad_f1(y: &CxMatrix) -> Result<CxMatrix> {
    let n = crate::matkit::half_dim(y)?;
    let big_c = build_c(n)?;
    let yy = y.adjoint() * y;
    Ok((&yy - &big_c * &yy * &big_c).scale(0.5))
}

/// Exact solution of the flow generated by `H^R = f₁ ∘ 𝒜^{1/2}` for time `t`.
pub fn solve_flow_r(st0: &RsvdState, c: &CouplingParams, t: f64) -> Result<RsvdState> {
    solve_flow_r_with(st0, c, t, &Tolerances::default())
}

pub fn solve_flow_r_with(
    st0: &RsvdState,
    c: &CouplingParams,
    t: f64,
    tol: &Tolerances,
) -> Result<RsvdState> {
    let bundle = lax_a(st0, c)?;
    let grad = grad_f1(&bundle.r)?;
    solve_flow_r_generator(st0, c, &bundle.a, &grad, t, tol)
}

fn linear_flow_point(
    lambda0: &[f64],
    c: &CouplingParams,
    a0: &CxMatrix,
    grad: &CxMatrix,
    t: f64,
    tol: &Tolerances,
) -> Result<RsvdState> {
    let n = lambda0.len();
    let y_t = paired_diag(lambda0) - grad.scale(t);
    let sp = eig_paired_p(&y_t, tol)?;
    let lambda_t = sp.positive_part;
    let eta_r = sp.frame.mat();
    let a_t = eta_r.adjoint() * a0 * eta_r;
    let z_t = z_values(&lambda_t, c);
    let mut theta_t = Vec::with_capacity(n);
    for a in 0..n {
        let d = a_t[(a, a)].re;
        if d <= 0.0 {
            return Err(Error::Structure(format!(
                "reconstructed Lax matrix has non-positive diagonal entry {d:e} at t = {t}"
            )));
        }
        theta_t.push(0.5 * (d / z_t[a].norm()).ln());
    }
    RsvdState::new(lambda_t, theta_t).map_err(|e| match e {
        Error::Domain(msg) => Error::Regularity(msg),
        other => other,
    })
}

/// Flow of `f ∘ 𝒜^{1/2}` for a `K×K`-invariant `f`, given `𝒜₀` and the gradient
/// `∇f(𝒜₀^{1/2})`. `λ(t)` and `η_R(t)` diagonalize `𝓛₀ − t ∇f`,
/// `𝒜(t) = η_R^* 𝒜₀ η_R`, and `θ(t)` is read off `𝒜(t)_{aa} = e^{2θ_a}|z_a(λ(t))|`.
///
/// If the spectrum collides at `t`, the largest safe time between 0 and `t`
/// is located by bisection and reported in [`Error::FlowCollision`].
pub fn solve_flow_r_generator(
    st0: &RsvdState,
    c: &CouplingParams,
    a0: &CxMatrix,
    grad: &CxMatrix,
    t: f64,
    tol: &Tolerances,
) -> Result<RsvdState> {
    match linear_flow_point(st0.lambda(), c, a0, grad, t, tol) {
        Ok(st) => Ok(st),
        Err(Error::Regularity(_)) => {
            let (mut safe, mut bad) = (0.0, t);
            for _ in 0..60 {
                let mid = 0.5 * (safe + bad);
                if linear_flow_point(st0.lambda(), c, a0, grad, mid, tol).is_ok() {
                    safe = mid;
                } else {
                    bad = mid;
                }
            }
            Err(Error::FlowCollision { t, safe_t: safe })
        }
        Err(e) => Err(e),
    }
}
