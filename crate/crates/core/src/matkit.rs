//! Dense complex linear algebra adapted to the Cartan structure of `U(n,n)`.
//!
//! Everything here works with `N = 2n` square matrices. The group is
//! `G = {y | y* C y = C}`, its Lie algebra `g = {Y | Y* C + C Y = 0}`, the
//! maximal compact subgroup `K` consists of the unitaries commuting with `C`,
//! and `p` (the Hermitian part of `g`) anticommutes with `C`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CxMatrix = DMatrix<Complex64>;
pub type CxVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default absolute/relative tolerance for structure predicates.
pub const DEFAULT_STRUCTURE_TOL: f64 = 1e-8;
/// Default minimal spectral gap accepted as "regular".
pub const DEFAULT_REGULARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Scale-relative bound on residuals of algebraic structure (Hermiticity,
    /// anticommutation with `C`, `ACA = C`, ...).
    pub structure: f64,
    /// Minimal eigenvalue magnitude and gap before a spectrum counts as degenerate.
    pub regularity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structure: DEFAULT_STRUCTURE_TOL,
            regularity: DEFAULT_REGULARITY_TOL,
        }
    }
}

/// A unitary matrix commuting with `C`, i.e. an element of `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct KFrame(CxMatrix);

impl KFrame {
    pub const CHECK_TOL: f64 = 1e-10;

    /// Wraps `mat` after checking unitarity and commutation with `C`.
    pub fn new(mat: CxMatrix) -> Result<Self> {
        let n2 = mat.nrows();
        if n2 == 0 || n2 % 2 != 0 || mat.ncols() != n2 {
            return Err(Error::InvalidDimension(format!(
                "K-frame must be 2n x 2n, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let c = build_c(n2 / 2)?;
        let unit = (mat.adjoint() * &mat - CxMatrix::identity(n2, n2)).norm();
        let comm = (&mat * &c - &c * &mat).norm();
        if unit > Self::CHECK_TOL || comm > Self::CHECK_TOL {
            return Err(Error::Structure(format!(
                "not in K: unitarity residual {unit:e}, [eta, C] residual {comm:e}"
            )));
        }
        Ok(KFrame(mat))
    }

    pub fn identity(n: usize) -> Self {
        KFrame(CxMatrix::identity(2 * n, 2 * n))
    }

    pub fn mat(&self) -> &CxMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CxMatrix {
        self.0
    }
}

/// Positive half of a `±`-paired spectrum together with the diagonalizing frame.
///
/// For [`eig_paired_p`] the values are `d_1 > … > d_n > 0` and
/// `X = η diag(d, -d) η*`. For [`eig_paired_expp`] they are `q_1 > … > q_n > 0`
/// and `A = η diag(e^{2q}, e^{-2q}) η*`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSpectrum {
    pub positive_part: Vec<f64>,
    pub frame: KFrame,
}

/// The `2n x 2n` block anti-diagonal identity `C`.
pub fn build_c(n: usize) -> Result<CxMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let big = 2 * n;
    Ok(CxMatrix::from_fn(big, big, |k, l| {
        if (k + n) % big == l {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Half-size of a `2n x 2n` matrix, or an error if it is not of that shape.
pub fn half_dim(m: &CxMatrix) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c || r == 0 || r % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "expected a 2n x 2n matrix, got {r}x{c}"
        )));
    }
    Ok(r / 2)
}

/// `diag(d, -d)` for real `d`.
pub fn paired_diag(d: &[f64]) -> CxMatrix {
    let n = d.len();
    let mut m = CxMatrix::zeros(2 * n, 2 * n);
    for (a, &v) in d.iter().enumerate() {
        m[(a, a)] = Complex64::new(v, 0.0);
        m[(n + a, n + a)] = Complex64::new(-v, 0.0);
    }
    m
}

/// `diag(e^{s d}, e^{-s d})`.
pub fn exp_paired_diag(d: &[f64], s: f64) -> CxMatrix {
    let n = d.len();
    let mut m = CxMatrix::zeros(2 * n, 2 * n);
    for (a, &v) in d.iter().enumerate() {
        m[(a, a)] = Complex64::new((s * v).exp(), 0.0);
        m[(n + a, n + a)] = Complex64::new((-s * v).exp(), 0.0);
    }
    m
}

pub fn diag_from_slice(d: &[Complex64]) -> CxMatrix {
    CxMatrix::from_diagonal(&CxVector::from_column_slice(d))
}

/// Splits `Y` into its anti-Hermitian (`k`) and Hermitian (`p`) parts.
pub fn decompose_kp(y: &CxMatrix) -> (CxMatrix, CxMatrix) {
    let adj = y.adjoint();
    let plus = (y - &adj).scale(0.5);
    let minus = (y + &adj).scale(0.5);
    (plus, minus)
}

pub fn hermitian_residual(x: &CxMatrix) -> f64 {
    (x - x.adjoint()).norm()
}

/// `‖X C + C X‖_F`.
pub fn anticommutator_c_residual(x: &CxMatrix, c: &CxMatrix) -> f64 {
    (x * c + c * x).norm()
}

/// `‖A C A − C‖_F`.
pub fn group_residual(a: &CxMatrix, c: &CxMatrix) -> f64 {
    (a * c * a - c).norm()
}

/// `‖Y* C + C Y‖_F`, zero exactly when `Y ∈ u(n,n)`.
pub fn algebra_residual(y: &CxMatrix, c: &CxMatrix) -> f64 {
    (y.adjoint() * c + c * y).norm()
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
fn hermitian_eigh(x: &CxMatrix) -> (Vec<f64>, CxMatrix) {
    let sym = (x + x.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CxMatrix::from_fn(x.nrows(), x.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Fixes the phase of `v` so that its first largest-magnitude component is
/// real and positive.
fn fix_phase(mut v: CxVector) -> CxVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-8))
        .expect("maximum is attained");
    let phase = v[pivot].conj() / v[pivot].norm();
    v.iter_mut().for_each(|z| *z *= phase);
    v
}

/// Assembles the frame `[v_1 … v_n | C v_1 … C v_n]` from gauge-fixed
/// eigenvectors belonging to the "positive" half of a paired spectrum.
fn paired_frame(vectors: Vec<CxVector>, c: &CxMatrix) -> Result<KFrame> {
    let n = vectors.len();
    let mut eta = CxMatrix::zeros(2 * n, 2 * n);
    for (a, v) in vectors.into_iter().enumerate() {
        let v = fix_phase(v);
        let cv = c * &v;
        eta.set_column(a, &v);
        eta.set_column(n + a, &cv);
    }
    // Symmetric (Löwdin) re-orthonormalization: eta* eta commutes with the block
    // swap, so the result still commutes with C.
    let gram = eta.adjoint() * &eta;
    if (&gram - CxMatrix::identity(2 * n, 2 * n)).norm() < 1e-6 {
        eta = &eta * hermitian_function(&gram, |v| 1.0 / v.sqrt());
    }
    KFrame::new(eta)
}

fn check_strictly_decreasing(values: &[f64], gap: f64, what: &str) -> Result<()> {
    if let Some(last) = values.last() {
        if *last <= gap {
            return Err(Error::Regularity(format!(
                "{what}: smallest positive value {last:e} within {gap:e} of zero"
            )));
        }
    }
    for w in values.windows(2) {
        if w[0] - w[1] <= gap {
            return Err(Error::Regularity(format!(
                "{what}: values {} and {} closer than {gap:e}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Diagonalizes a regular element of `p`: `X = η diag(d, -d) η*` with `η ∈ K`.
pub fn eig_paired_p(x: &CxMatrix, tol: &Tolerances) -> Result<PairedSpectrum> {
    let n = half_dim(x)?;
    let c = build_c(n)?;
    let scale = 1.0 + x.norm();
    let herm = hermitian_residual(x);
    let anti = anticommutator_c_residual(x, &c);
    if herm > tol.structure * scale || anti > tol.structure * scale {
        return Err(Error::Structure(format!(
            "not in p: Hermitian residual {herm:e}, XC + CX residual {anti:e}"
        )));
    }
    let (values, vectors) = hermitian_eigh(x);
    // ascending order: the top n are the positive half
    let mut positive = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    for k in (n..2 * n).rev() {
        positive.push(values[k]);
        cols.push(vectors.column(k).into_owned());
    }
    check_strictly_decreasing(&positive, tol.regularity, "spectrum of X")?;
    Ok(PairedSpectrum {
        positive_part: positive,
        frame: paired_frame(cols, &c)?,
    })
}

/// Diagonalizes a regular positive element of `U(n,n)`:
/// `A = η diag(e^{2q}, e^{-2q}) η*` with `η ∈ K` and `q` in the open chamber.
pub fn eig_paired_expp(a: &CxMatrix, tol: &Tolerances) -> Result<PairedSpectrum> {
    let n = half_dim(a)?;
    let c = build_c(n)?;
    let norm = a.norm();
    let herm = hermitian_residual(a);
    if herm > tol.structure * (1.0 + norm) {
        return Err(Error::NotInExpP(format!("not Hermitian (residual {herm:e})")));
    }
    let grp = group_residual(a, &c);
    if grp > tol.structure * (1.0 + norm * norm) {
        return Err(Error::Structure(format!("A C A != C (residual {grp:e})")));
    }
    let (values, vectors) = hermitian_eigh(a);
    if values[0] <= 0.0 {
        return Err(Error::NotInExpP(format!(
            "not positive definite (min eigenvalue {:e})",
            values[0]
        )));
    }
    for k in 0..n {
        let prod = values[k] * values[2 * n - 1 - k];
        // the small eigenvalue carries an absolute error of order eps·‖A‖
        if (prod - 1.0).abs() > tol.structure * (1.0 + norm * norm) {
            return Err(Error::Structure(format!(
                "eigenvalues {} and {} are not reciprocal",
                values[k],
                values[2 * n - 1 - k]
            )));
        }
    }
    let mut q = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    for k in (n..2 * n).rev() {
        q.push(0.5 * values[k].ln());
        cols.push(vectors.column(k).into_owned());
    }
    check_strictly_decreasing(&q, tol.regularity, "log-spectrum of A")?;
    Ok(PairedSpectrum {
        positive_part: q,
        frame: paired_frame(cols, &c)?,
    })
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(x: &CxMatrix, f: impl Fn(f64) -> f64) -> CxMatrix {
    let (values, vectors) = hermitian_eigh(x);
    let fd: Vec<Complex64> = values.iter().map(|&v| Complex64::new(f(v), 0.0)).collect();
    let m = &vectors * diag_from_slice(&fd) * vectors.adjoint();
    (&m + m.adjoint()).scale(0.5)
}

fn check_posdef(a: &CxMatrix) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let (values, _) = hermitian_eigh(a);
    if values[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: values[0],
        });
    }
    Ok(())
}

/// The unique Hermitian positive definite square root.
pub fn sqrt_posdef(a: &CxMatrix) -> Result<CxMatrix> {
    check_posdef(a)?;
    Ok(hermitian_function(a, f64::sqrt))
}

/// `A^{-1/2}` for Hermitian positive definite `A`.
pub fn inv_sqrt_posdef(a: &CxMatrix) -> Result<CxMatrix> {
    check_posdef(a)?;
    Ok(hermitian_function(a, |v| 1.0 / v.sqrt()))
}

fn is_hermitian_exactly(x: &CxMatrix) -> bool {
    hermitian_residual(x) <= 1e-14 * (1.0 + x.norm())
}

/// Matrix exponential. Hermitian input goes through the spectral theorem,
/// everything else through Taylor scaling-and-squaring.
pub fn expm(x: &CxMatrix) -> CxMatrix {
    if is_hermitian_exactly(x) {
        return hermitian_function(x, f64::exp);
    }
    expm_taylor(x)
}

fn one_norm(x: &CxMatrix) -> f64 {
    (0..x.ncols())
        .map(|j| x.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn expm_taylor(x: &CxMatrix) -> CxMatrix {
    let dim = x.nrows();
    let norm = one_norm(x);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = x.scale(0.5f64.powi(squarings));
    let mut sum = CxMatrix::identity(dim, dim);
    let mut term = CxMatrix::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
        if one_norm(&term) <= 1e-18 * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Right-handed `KAK` factorization of a regular `B ∈ U(n,n)`:
/// `B = η_L e^{Q} η_R*` with `η_L, η_R ∈ K`. Returns `q` and `η_R`.
///
/// Works from the singular value decomposition of `B` rather than from
/// `B B*`, so the conditioning is `e^{q_1 − q_n}` instead of its square.
pub fn group_kak_right(b: &CxMatrix, tol: &Tolerances) -> Result<PairedSpectrum> {
    let n = half_dim(b)?;
    let c = build_c(n)?;
    let bn = b.norm();
    let grp = (b.adjoint() * &c * b - &c).norm();
    if grp > tol.structure * (1.0 + bn * bn) {
        return Err(Error::Structure(format!(
            "B is not in U(n,n) (residual {grp:e})"
        )));
    }
    let svd = SVD::new(b.clone(), false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors were requested");
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    for k in 0..n {
        let prod = svd.singular_values[order[k]] * svd.singular_values[order[2 * n - 1 - k]];
        if (prod - 1.0).abs() > tol.structure * (1.0 + bn * bn) {
            return Err(Error::Structure(format!(
                "singular values {} and {} are not reciprocal",
                svd.singular_values[order[k]],
                svd.singular_values[order[2 * n - 1 - k]]
            )));
        }
    }
    let q: Vec<f64> = order[..n].iter().map(|&k| svd.singular_values[k].ln()).collect();
    let cols: Vec<CxVector> = order[..n].iter().map(|&k| v_t.row(k).adjoint()).collect();
    check_strictly_decreasing(&q, tol.regularity, "log singular values of B")?;
    Ok(PairedSpectrum {
        positive_part: q,
        frame: paired_frame(cols, &c)?,
    })
}

/// Global Cartan (polar) factorization `B = pos · uni` with `pos = (B B*)^{1/2}`
/// in `exp(p)` and `uni` unitary in `K`.
pub fn cartan_polar(b: &CxMatrix, tol: &Tolerances) -> Result<(CxMatrix, CxMatrix)> {
    let n = half_dim(b)?;
    let c = build_c(n)?;
    let bn = b.norm();
    let grp = (b.adjoint() * &c * b - &c).norm();
    if grp > tol.structure * (1.0 + bn * bn) {
        return Err(Error::Structure(format!(
            "B is not in U(n,n) (residual {grp:e})"
        )));
    }
    let bbt = b * b.adjoint();
    let (values, _) = hermitian_eigh(&bbt);
    let top = values[values.len() - 1];
    if values[0] <= 1e-24 * top.max(1.0) {
        return Err(Error::Singular(format!(
            "B B* has smallest eigenvalue {:e}",
            values[0]
        )));
    }
    let pos = hermitian_function(&bbt, f64::sqrt);
    let uni = hermitian_function(&bbt, |v| 1.0 / v.sqrt()) * b;
    Ok((pos, uni))
}
