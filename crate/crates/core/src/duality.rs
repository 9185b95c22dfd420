//! The action-angle duality `S: (q, p) ↦ (λ, θ)` between the Sutherland and
//! RSvD phase spaces, and its inverse.
//!
//! Both directions read one model's coordinates off the spectral data of the
//! other model's Lax matrix. Diagonalizing frames are only defined up to
//! diagonal phases `diag(e^{iχ}, e^{iχ})`, so every cross-check compares
//! gauge-invariant data: spectra, diagonal entries, and entry moduli.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{
    build_c, eig_paired_expp, eig_paired_p, exp_paired_diag, paired_diag,
    CxMatrix, CxVector, Tolerances, I,
};
use crate::rsvd::{lax_a, z_values, RsvdState};
use crate::sutherland::{exp_q, lax_l, CouplingParams, SutherlandState};

/// Tolerance on `V*V = N` and `CV + V = 0` accepted by [`xi_of`].
pub const ORBIT_TOL: f64 = 1e-8;
/// Bound on spectral disagreement between a reconstructed and a rebuilt Lax matrix.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Bound on entry-modulus disagreement, relative to `1 + max |entry|`.
pub const MODULUS_TOL: f64 = 1e-7;

/// `E = (1, …, 1, −1, …, −1)`.
pub fn e_vector(n: usize) -> CxVector {
    CxVector::from_fn(2 * n, |k, _| Complex64::new(if k < n { 1.0 } else { -1.0 }, 0.0))
}

fn xi_unchecked(v: &CxVector, c: &CouplingParams) -> CxMatrix {
    let big = v.len();
    let big_c = build_c(big / 2).expect("even, nonzero length");
    (v * v.adjoint() - CxMatrix::identity(big, big)) * (I * c.g()) + big_c * (I * (c.g() - c.g2()))
}

/// `ξ(V) = ig(VV* − 1) + i(g − g₂)C` for `V*V = N`, `CV + V = 0`.
pub fn xi_of(v: &CxVector, c: &CouplingParams) -> Result<CxMatrix> {
    let big = v.len();
    if big == 0 || big % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "orbit vector must have even nonzero length, got {big}"
        )));
    }
    let big_c = build_c(big / 2)?;
    let norm_gap = (v.norm_squared() - big as f64).abs();
    let sym_gap = (&big_c * v + v).norm();
    if norm_gap > ORBIT_TOL * big as f64 || sym_gap > ORBIT_TOL * (big as f64).sqrt() {
        return Err(Error::InvalidOrbitVector(format!(
            "|V*V - N| = {norm_gap:e}, |CV + V| = {sym_gap:e}"
        )));
    }
    Ok(xi_unchecked(v, c))
}

/// `ξ(E)`.
pub fn xi_of_e(n: usize, c: &CouplingParams) -> CxMatrix {
    xi_unchecked(&e_vector(n), c)
}

/// A point of the orbit `𝒪`: a valid vector together with its `ξ` image.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPoint {
    pub v: CxVector,
    pub xi: CxMatrix,
}

impl OrbitPoint {
    pub fn new(v: CxVector, c: &CouplingParams) -> Result<Self> {
        let xi = xi_of(&v, c)?;
        Ok(OrbitPoint { v, xi })
    }
}

/// Gauge-invariant disagreement between a spectrally reconstructed Lax matrix
/// and the one rebuilt from the dual coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualityDiagnostics {
    /// Max gap between sorted eigenvalues.
    pub spectrum_gap: f64,
    /// Max gap between entry moduli, relative to `1 + max |entry|`.
    pub modulus_gap: f64,
    /// Largest imaginary part on a diagonal that should be real.
    pub imag_residue: f64,
}

impl DualityDiagnostics {
    pub fn check(&self) -> Result<()> {
        if self.spectrum_gap > SPECTRUM_TOL || self.modulus_gap > MODULUS_TOL {
            return Err(Error::Structure(format!(
                "dual Lax matrices disagree: spectrum gap {:e}, modulus gap {:e}",
                self.spectrum_gap, self.modulus_gap
            )));
        }
        if self.imag_residue > 1e-8 {
            log::warn!(
                "diagonal imaginary residue {:e} exceeds 1e-8",
                self.imag_residue
            );
        }
        Ok(())
    }
}

fn sorted_eigenvalues(m: &CxMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()).scale(0.5);
    let mut v: Vec<f64> = nalgebra::SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Compares two Hermitian matrices that should agree up to conjugation by a
/// diagonal phase matrix.
pub fn gauge_invariant_gap(a: &CxMatrix, b: &CxMatrix) -> (f64, f64) {
    let spec = sorted_eigenvalues(a)
        .iter()
        .zip(sorted_eigenvalues(b))
        .map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max);
    let scale = 1.0 + a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let modulus = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x.norm() - y.norm()).abs())
        .fold(0.0, f64::max)
        / scale;
    (spec, modulus)
}

/// `S(q, p)` with diagnostics.
///
/// `λ` and `η_R` diagonalize `L(q, p) = η_R 𝓛(λ) η_R*`; then
/// `𝒜 = η_R^* e^{2Q} η_R` up to gauge, and `θ_a = ½ ln(𝒜_{aa} / |z_a(λ)|)`.
pub fn dualize_s_to_r_diagnosed(
    s: &SutherlandState,
    c: &CouplingParams,
    tol: &Tolerances,
) -> Result<(RsvdState, DualityDiagnostics)> {
    let n = s.n();
    let sp = eig_paired_p(&lax_l(s, c), tol)?;
    let lambda = sp.positive_part;
    let eta_r = sp.frame.mat();
    let a_rec = eta_r.adjoint() * exp_q(s, 2.0) * eta_r;
    let z = z_values(&lambda, c);
    let mut theta = Vec::with_capacity(n);
    let mut imag: f64 = 0.0;
    for a in 0..n {
        let d = a_rec[(a, a)];
        imag = imag.max(d.im.abs());
        if d.re <= 0.0 {
            return Err(Error::Structure(format!(
                "reconstructed Lax matrix has non-positive diagonal entry {}",
                d.re
            )));
        }
        theta.push(0.5 * (d.re / z[a].norm()).ln());
    }
    let st = RsvdState::new(lambda, theta).map_err(|e| match e {
        Error::Domain(msg) => Error::Regularity(msg),
        other => other,
    })?;
    let rebuilt = lax_a(&st, c)?.a;
    let (spectrum_gap, modulus_gap) = gauge_invariant_gap(&a_rec, &rebuilt);
    Ok((
        st,
        DualityDiagnostics {
            spectrum_gap,
            modulus_gap,
            imag_residue: imag,
        },
    ))
}

pub fn dualize_s_to_r(s: &SutherlandState, c: &CouplingParams) -> Result<RsvdState> {
    let (st, diag) = dualize_s_to_r_diagnosed(s, c, &Tolerances::default())?;
    diag.check()?;
    Ok(st)
}

/// `S^{-1}(λ, θ)` with diagnostics.
///
/// `q` and `η_L` diagonalize `𝒜 = η_L e^{2Q} η_L*`; then
/// `η_R = 𝒜^{-1/2} η_L e^{Q}` and `L(q, p) = η_R^* 𝓛(λ) η_R` up to gauge, so
/// `p_a` is its `a`-th diagonal entry.
pub fn dualize_r_to_s_diagnosed(
    st: &RsvdState,
    c: &CouplingParams,
    tol: &Tolerances,
) -> Result<(SutherlandState, DualityDiagnostics)> {
    let n = st.n();
    let bundle = lax_a(st, c)?;
    let sp = eig_paired_expp(&bundle.a, tol)?;
    let q = sp.positive_part;
    let eta_r = &bundle.r_inv * sp.frame.mat() * exp_paired_diag(&q, 1.0);
    let l_rec = eta_r.adjoint() * paired_diag(st.lambda()) * &eta_r;
    let mut imag: f64 = 0.0;
    let p: Vec<f64> = (0..n)
        .map(|a| {
            imag = imag.max(l_rec[(a, a)].im.abs());
            l_rec[(a, a)].re
        })
        .collect();
    let s = SutherlandState::new(q, p).map_err(|e| match e {
        Error::Domain(msg) => Error::Regularity(msg),
        other => other,
    })?;
    let rebuilt = lax_l(&s, c);
    let (spectrum_gap, modulus_gap) = gauge_invariant_gap(&l_rec, &rebuilt);
    Ok((
        s,
        DualityDiagnostics {
            spectrum_gap,
            modulus_gap,
            imag_residue: imag,
        },
    ))
}

pub fn dualize_r_to_s(st: &RsvdState, c: &CouplingParams) -> Result<SutherlandState> {
    let (s, diag) = dualize_r_to_s_diagnosed(st, c, &Tolerances::default())?;
    diag.check()?;
    Ok(s)
}

/// `(λ̂, θ̂)`: the RSvD coordinates pulled back to the Sutherland phase space.
pub fn pullback_coords(s: &SutherlandState, c: &CouplingParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let (st, _) = dualize_s_to_r_diagnosed(s, c, &Tolerances::default())?;
    Ok((st.lambda().to_vec(), st.theta().to_vec()))
}

/// `(q̌, p̌)`: the Sutherland coordinates pulled back to the RSvD phase space.
pub fn pullback_coords_r(st: &RsvdState, c: &CouplingParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let (s, _) = dualize_r_to_s_diagnosed(st, c, &Tolerances::default())?;
    Ok((s.q().to_vec(), s.p().to_vec()))
}
