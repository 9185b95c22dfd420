//! Cauchy matrices `𝒞_{kl}(x) = 1/(1 + x_k − x_l)`, the companion rational
//! functions `w_j(x)`, and the identities they satisfy. The RSvD Lax matrix is a
//! deformed Cauchy matrix, and its group property and positivity rest on these.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{build_c, diag_from_slice, CxMatrix, CxVector};

/// Absolute threshold below which a denominator counts as a pole.
pub const POLE_GUARD: f64 = 1e-12;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// The generating vector of a Cauchy matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyContext {
    x: CxVector,
    c_symmetric: bool,
}

impl CauchyContext {
    /// Wraps `x`, checking that the Cauchy matrix and the `w`-functions exist.
    /// The `C`-symmetry flag is set when `x` has even length and `x_{n+a} = −x_a`
    /// exactly.
    pub fn new(x: CxVector) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidDimension("empty generating vector".into()));
        }
        let len = x.len();
        for k in 0..len {
            for l in 0..len {
                if k == l {
                    continue;
                }
                let diff = x[k] - x[l];
                if diff.norm() < POLE_GUARD {
                    return Err(Error::Pole(format!("x_{k} and x_{l} coincide")));
                }
                if (ONE + diff).norm() < POLE_GUARD {
                    return Err(Error::Pole(format!("1 + x_{k} - x_{l} vanishes")));
                }
            }
        }
        let c_symmetric = len % 2 == 0 && {
            let n = len / 2;
            (0..n).all(|a| x[n + a] == -x[a])
        };
        Ok(CauchyContext { x, c_symmetric })
    }

    /// Builds the `C`-symmetric vector `(h, −h)`.
    pub fn c_symmetric(half: &[Complex64]) -> Result<Self> {
        let n = half.len();
        let x = CxVector::from_fn(2 * n, |k, _| if k < n { half[k] } else { -half[k - n] });
        Self::new(x)
    }

    pub fn x(&self) -> &CxVector {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn satisfies_c_symmetry(&self) -> bool {
        self.c_symmetric
    }

    /// Context for `−x`; the invariants carry over.
    pub fn negated(&self) -> CauchyContext {
        CauchyContext {
            x: -self.x.clone(),
            c_symmetric: self.c_symmetric,
        }
    }
}

pub fn cauchy_matrix(ctx: &CauchyContext) -> CxMatrix {
    let x = ctx.x();
    CxMatrix::from_fn(x.len(), x.len(), |k, l| ONE / (ONE + x[k] - x[l]))
}

/// `w_j(x) = ∏_{k≠j} (1 + x_j − x_k)/(x_j − x_k)`, multiplied in index order.
pub fn w_values(ctx: &CauchyContext) -> CxVector {
    let x = ctx.x();
    CxVector::from_fn(x.len(), |j, _| {
        (0..x.len())
            .filter(|&k| k != j)
            .fold(ONE, |acc, k| acc * (ONE + x[j] - x[k]) / (x[j] - x[k]))
    })
}

/// The product form valid under `x_{n+a} = −x_a`:
/// `w_a(x) = (1 + 1/(2x_a)) ∏_{d≠a} (1 + 1/(x_a − x_d))(1 + 1/(x_a + x_d))`
/// and `w_{n+a}(x) = w_a(−x)`.
pub fn w_values_c_type(ctx: &CauchyContext) -> Result<CxVector> {
    if !ctx.satisfies_c_symmetry() {
        return Err(Error::Structure("x is not C-symmetric".into()));
    }
    let n = ctx.len() / 2;
    let half: Vec<Complex64> = (0..n).map(|a| ctx.x()[a]).collect();
    let w_half = |h: &[Complex64], a: usize| -> Complex64 {
        let mut acc = ONE + ONE / (h[a] * 2.0);
        for d in (0..n).filter(|&d| d != a) {
            acc *= (ONE + ONE / (h[a] - h[d])) * (ONE + ONE / (h[a] + h[d]));
        }
        acc
    };
    let neg: Vec<Complex64> = half.iter().map(|z| -z).collect();
    Ok(CxVector::from_fn(2 * n, |k, _| {
        if k < n {
            w_half(&half, k)
        } else {
            w_half(&neg, k - n)
        }
    }))
}

/// Closed-form determinant `∏_{k<l} 1/(1 − (x_k − x_l)^{-2})`.
pub fn cauchy_det(ctx: &CauchyContext) -> Result<Complex64> {
    let x = ctx.x();
    let mut det = ONE;
    for k in 0..x.len() {
        for l in k + 1..x.len() {
            let d = x[k] - x[l];
            let denom = ONE - ONE / (d * d);
            if denom.norm() < POLE_GUARD {
                return Err(Error::SingularCauchy(format!(
                    "(x_{k} - x_{l})^2 = 1"
                )));
            }
            det /= denom;
        }
    }
    Ok(det)
}

/// `𝒞(x)^{-1} = W(−x) 𝒞(−x) W(x)`.
pub fn cauchy_inverse(ctx: &CauchyContext) -> Result<CxMatrix> {
    // the closed form is only meaningful when the matrix is invertible
    cauchy_det(ctx)?;
    let neg = ctx.negated();
    let w_pos = diag_from_slice(w_values(ctx).as_slice());
    let w_neg = diag_from_slice(w_values(&neg).as_slice());
    Ok(w_neg * cauchy_matrix(&neg) * w_pos)
}

/// Evaluates both sides of the partial-fraction identity
/// `∏(z − α_k)/∏(z − β_l) = δ_{M,N} + Σ_j 1/(z − β_j) · ∏_k(β_j − α_k)/∏_{l≠j}(β_j − β_l)`.
pub fn partial_fraction_check(
    alphas: &[Complex64],
    betas: &[Complex64],
    z: Complex64,
) -> Result<(Complex64, Complex64)> {
    let (m, big_n) = (alphas.len(), betas.len());
    if m > big_n || big_n == 0 {
        return Err(Error::InvalidDimension(format!(
            "need 0 <= M <= N and N >= 1, got M = {m}, N = {big_n}"
        )));
    }
    for j in 0..big_n {
        if (z - betas[j]).norm() < POLE_GUARD {
            return Err(Error::Pole(format!("z coincides with beta_{j}")));
        }
        for l in j + 1..big_n {
            if (betas[j] - betas[l]).norm() < POLE_GUARD {
                return Err(Error::Pole(format!("beta_{j} and beta_{l} coincide")));
            }
        }
    }
    let num: Complex64 = alphas.iter().map(|a| z - a).product();
    let den: Complex64 = betas.iter().map(|b| z - b).product();
    let lhs = num / den;
    let mut rhs = if m == big_n { ONE } else { Complex64::new(0.0, 0.0) };
    for (j, bj) in betas.iter().enumerate() {
        let top: Complex64 = alphas.iter().map(|a| bj - a).product();
        let bottom: Complex64 = betas
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != j)
            .map(|(_, bl)| bj - bl)
            .product();
        rhs += top / (bottom * (z - bj));
    }
    Ok((lhs, rhs))
}

/// Residuals of the Cauchy/`w` identities at one generating vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// `max_k |Σ_j w_j/(1 + x_j − x_k) − 1|`
    pub w_row_sums: f64,
    /// `|tr W(x) − N|`
    pub trace_w: f64,
    /// `‖𝒞(x)^{-1} 𝒞(x) − 1‖_F` with the closed-form inverse.
    pub inverse: f64,
    /// Relative gap between the closed-form and the LU determinant.
    pub determinant: f64,
    /// Present only for `C`-symmetric `x`.
    pub c_type: Option<CTypeResiduals>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CTypeResiduals {
    /// `max |w_j − product form|`
    pub product_form: f64,
    /// `|Σ_j w_j/(1 + 2x_j)|`
    pub w_u_sum: f64,
    /// `max_k |Σ_j w_j/((1 + x_j − x_k)(1 + 2x_j)) + 1/(1 − 2x_k)|`
    pub w_u_row_sums: f64,
    /// `‖C W(x) C − W(−x)‖_F`
    pub cwc: f64,
    /// `‖C 𝒞(x) C − 𝒞(−x)‖_F`
    pub ccc: f64,
    /// `‖(𝒞(x) C W(x))² − 1‖_F`
    pub involution: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        let mut m = self
            .w_row_sums
            .max(self.trace_w)
            .max(self.inverse)
            .max(self.determinant);
        if let Some(c) = &self.c_type {
            m = m
                .max(c.product_form)
                .max(c.w_u_sum)
                .max(c.w_u_row_sums)
                .max(c.cwc)
                .max(c.ccc)
                .max(c.involution);
        }
        m
    }
}

pub fn identity_suite(ctx: &CauchyContext) -> Result<IdentityReport> {
    let x = ctx.x();
    let len = x.len();
    let w = w_values(ctx);
    let cm = cauchy_matrix(ctx);

    let w_row_sums = (0..len)
        .map(|k| {
            let s: Complex64 = (0..len).map(|j| w[j] / (ONE + x[j] - x[k])).sum();
            (s - ONE).norm()
        })
        .fold(0.0, f64::max);
    let trace_w = (w.sum() - Complex64::new(len as f64, 0.0)).norm();

    let inv = cauchy_inverse(ctx)?;
    let inverse = (&inv * &cm - CxMatrix::identity(len, len)).norm();
    let closed = cauchy_det(ctx)?;
    let lu = cm.clone().determinant();
    let determinant = (closed - lu).norm() / closed.norm().max(f64::MIN_POSITIVE);

    let c_type = if ctx.satisfies_c_symmetry() {
        let n = len / 2;
        let c = build_c(n)?;
        let neg = ctx.negated();
        for j in 0..len {
            if (ONE + x[j] * 2.0).norm() < POLE_GUARD || (ONE - x[j] * 2.0).norm() < POLE_GUARD {
                return Err(Error::Pole(format!("1 ± 2 x_{j} vanishes")));
            }
        }
        let prod = w_values_c_type(ctx)?;
        let product_form = (0..len).map(|j| (w[j] - prod[j]).norm()).fold(0.0, f64::max);
        let w_u_sum = (0..len)
            .map(|j| w[j] / (ONE + x[j] * 2.0))
            .sum::<Complex64>()
            .norm();
        let w_u_row_sums = (0..len)
            .map(|k| {
                let s: Complex64 = (0..len)
                    .map(|j| w[j] / ((ONE + x[j] - x[k]) * (ONE + x[j] * 2.0)))
                    .sum();
                (s + ONE / (ONE - x[k] * 2.0)).norm()
            })
            .fold(0.0, f64::max);
        let wm = diag_from_slice(w.as_slice());
        let wm_neg = diag_from_slice(w_values(&neg).as_slice());
        let cwc = (&c * &wm * &c - wm_neg).norm();
        let ccc = (&c * &cm * &c - cauchy_matrix(&neg)).norm();
        let t = &cm * &c * &wm;
        let involution = (&t * &t - CxMatrix::identity(len, len)).norm();
        Some(CTypeResiduals {
            product_form,
            w_u_sum,
            w_u_row_sums,
            cwc,
            ccc,
            involution,
        })
    } else {
        None
    };

    Ok(IdentityReport {
        w_row_sums,
        trace_w,
        inverse,
        determinant,
        c_type,
    })
}
