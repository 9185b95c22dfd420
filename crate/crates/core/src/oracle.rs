//! Independent reference dynamics: classical RK4 on Hamilton's equations and
//! finite-difference Poisson brackets. Nothing in here touches the Lax matrices
//! or the spectral machinery.

use crate::error::{Error, Result};
use crate::rsvd::{hamiltonian_r, RsvdState};
use crate::sutherland::{CouplingParams, SutherlandState};

/// Poisson bracket normalization: `{x_a, y_b} = scale · δ_ab` for each
/// conjugate pair, where the symplectic form is `(1/scale) Σ dx_a ∧ dy_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketConvention {
    pub scale: f64,
}

impl BracketConvention {
    pub const HALF: BracketConvention = BracketConvention { scale: 0.5 };
}

impl Default for BracketConvention {
    fn default() -> Self {
        Self::HALF
    }
}

/// Step for the central differences of `H^R`.
pub const HR_FD_STEP: f64 = 1e-6;

/// Time-stamped samples of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub samples: Vec<(f64, S)>,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> &(f64, S) {
        self.samples.last().expect("trajectories hold at least the initial state")
    }
}

fn rk4_step(y: &[f64], dt: f64, rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, k)| x + s * k).collect()
    };
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, 0.5 * dt, &k1))?;
    let k3 = rhs(&axpy(y, 0.5 * dt, &k2))?;
    let k4 = rhs(&axpy(y, dt, &k3))?;
    Ok((0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Fixed-step RK4 from 0 to `t_end` (either sign). A step whose result leaves
/// the domain is retried with halved steps; after 20 halvings the run aborts.
fn integrate<S>(
    y0: Vec<f64>,
    t_end: f64,
    dt: f64,
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    make: &dyn Fn(&[f64]) -> Result<S>,
) -> Result<Trajectory<S>> {
    if !(dt > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("need dt > 0 and finite t_end, got {dt}, {t_end}")));
    }
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let span = t_end.abs();
    let mut samples = vec![(0.0, make(&y0)?)];
    let mut y = y0;
    let mut elapsed = 0.0;
    while elapsed < span {
        let mut h = dt.min(span - elapsed);
        // guard against a vanishing final sliver
        if span - elapsed - h < 1e-12 * dt {
            h = span - elapsed;
        }
        let mut tries = 0;
        let next = loop {
            let attempt = rk4_step(&y, dir * h, rhs).and_then(|v| make(&v).map(|s| (v, s)));
            match attempt {
                Ok(ok) => break ok,
                Err(e) if tries >= 20 => {
                    return Err(Error::IntegrationAborted {
                        last_t: dir * elapsed,
                        reason: e.to_string(),
                    })
                }
                Err(_) => {
                    h *= 0.5;
                    tries += 1;
                }
            }
        };
        elapsed += h;
        y = next.0;
        samples.push((dir * elapsed, next.1));
    }
    Ok(Trajectory { samples })
}

/// `(∂H^S/∂q, ∂H^S/∂p)` from the explicit potential.
pub fn sutherland_gradient(q: &[f64], p: &[f64], c: &CouplingParams) -> (Vec<f64>, Vec<f64>) {
    let n = q.len();
    let (g, g2) = (c.g(), c.g2());
    // d/du g^2/sinh^2(u) = -2 g^2 cosh(u)/sinh^3(u)
    let dv = |coef: f64, u: f64| -2.0 * coef * u.cosh() / u.sinh().powi(3);
    let mut dq = vec![0.0; n];
    for a in 0..n {
        for b in a + 1..n {
            let minus = dv(g * g, q[a] - q[b]);
            let plus = dv(g * g, q[a] + q[b]);
            dq[a] += minus + plus;
            dq[b] += -minus + plus;
        }
        dq[a] += dv(g2 * g2, 2.0 * q[a]);
    }
    (dq, p.to_vec())
}

/// RK4 for `H^S` under `{q_a, p_b} = ½δ_ab`: `q̇ = ½ ∂H/∂p`, `ṗ = −½ ∂H/∂q`.
pub fn rk4_sutherland(
    s0: &SutherlandState,
    c: &CouplingParams,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory<SutherlandState>> {
    let n = s0.n();
    let c = *c;
    let rhs = move |y: &[f64]| -> Result<Vec<f64>> {
        let (q, p) = y.split_at(n);
        let (dq, dp) = sutherland_gradient(q, p, &c);
        Ok(dp.iter().map(|v| 0.5 * v).chain(dq.iter().map(|v| -0.5 * v)).collect())
    };
    let make = move |y: &[f64]| SutherlandState::new(y[..n].to_vec(), y[n..].to_vec());
    integrate(s0.to_vec(), t_end, dt, &rhs, &make)
}

/// Central-difference gradient `(∂H^R/∂λ, ∂H^R/∂θ)`.
pub fn rsvd_gradient_fd(lambda: &[f64], theta: &[f64], c: &CouplingParams, step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = lambda.len();
    let eval = |l: Vec<f64>, t: Vec<f64>| -> Result<f64> {
        Ok(hamiltonian_r(&RsvdState::new(l, t)?, c))
    };
    let mut dl = vec![0.0; n];
    let mut dt = vec![0.0; n];
    for a in 0..n {
        let mut up = lambda.to_vec();
        let mut dn = lambda.to_vec();
        up[a] += step;
        dn[a] -= step;
        dl[a] = (eval(up, theta.to_vec())? - eval(dn, theta.to_vec())?) / (2.0 * step);
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[a] += step;
        dn[a] -= step;
        dt[a] = (eval(lambda.to_vec(), up)? - eval(lambda.to_vec(), dn)?) / (2.0 * step);
    }
    Ok((dl, dt))
}

/// RK4 for `H^R` under `{θ_a, λ_b} = ½δ_ab`: `θ̇ = ½ ∂H/∂λ`, `λ̇ = −½ ∂H/∂θ`,
/// with the partials taken by central differences.
pub fn rk4_rsvd(
    st0: &RsvdState,
    c: &CouplingParams,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory<RsvdState>> {
    let n = st0.n();
    let c = *c;
    let rhs = move |y: &[f64]| -> Result<Vec<f64>> {
        let (lam, th) = y.split_at(n);
        let (dl, dth) = rsvd_gradient_fd(lam, th, &c, HR_FD_STEP)?;
        Ok(dth.iter().map(|v| -0.5 * v).chain(dl.iter().map(|v| 0.5 * v)).collect())
    };
    let make = move |y: &[f64]| RsvdState::new(y[..n].to_vec(), y[n..].to_vec());
    integrate(st0.to_vec(), t_end, dt, &rhs, &make)
}

/// Central-difference Poisson bracket
/// `{f, h} = scale · Σ_a (∂_{x_a} f ∂_{y_a} h − ∂_{y_a} f ∂_{x_a} h)`
/// at `point = (x_1, …, x_n, y_1, …, y_n)`.
pub fn fd_poisson<F, H>(f: F, h: H, point: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
    H: Fn(&[f64]) -> Result<f64>,
{
    fd_poisson_with(f, h, point, step, BracketConvention::HALF)
}

pub fn fd_poisson_with<F, H>(
    f: F,
    h: H,
    point: &[f64],
    step: f64,
    conv: BracketConvention,
) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
    H: Fn(&[f64]) -> Result<f64>,
{
    if point.is_empty() || point.len() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "phase-space point must have 2n coordinates, got {}",
            point.len()
        )));
    }
    let n = point.len() / 2;
    let partial = |field: &dyn Fn(&[f64]) -> Result<f64>, i: usize| -> Result<f64> {
        let mut up = point.to_vec();
        let mut dn = point.to_vec();
        up[i] += step;
        dn[i] -= step;
        let lift = |e: Error| Error::Domain(format!("stencil left the domain: {e}"));
        Ok((field(&up).map_err(lift)? - field(&dn).map_err(lift)?) / (2.0 * step))
    };
    let mut acc = 0.0;
    for a in 0..n {
        acc += partial(&f, a)? * partial(&h, n + a)? - partial(&f, n + a)? * partial(&h, a)?;
    }
    Ok(conv.scale * acc)
}

/// All pairwise brackets `B_ij = {f_i, f_j}` of a vector-valued field, from one
/// central-difference Jacobian. Same point layout and convention as [`fd_poisson_with`].
pub fn fd_bracket_matrix<F>(
    fields: F,
    point: &[f64],
    step: f64,
    conv: BracketConvention,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if point.is_empty() || point.len() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "phase-space point must have 2n coordinates, got {}",
            point.len()
        )));
    }
    let n = point.len() / 2;
    let lift = |e: Error| Error::Domain(format!("stencil left the domain: {e}"));
    // jac[i][m] = ∂f_m/∂point_i
    let mut jac = Vec::with_capacity(2 * n);
    for i in 0..2 * n {
        let mut up = point.to_vec();
        let mut dn = point.to_vec();
        up[i] += step;
        dn[i] -= step;
        let (fu, fd) = (fields(&up).map_err(lift)?, fields(&dn).map_err(lift)?);
        jac.push(fu.iter().zip(&fd).map(|(u, d)| (u - d) / (2.0 * step)).collect::<Vec<f64>>());
    }
    let m = jac[0].len();
    let mut out = vec![vec![0.0; m]; m];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let acc: f64 = (0..n)
                .map(|a| jac[a][i] * jac[n + a][j] - jac[n + a][i] * jac[a][j])
                .sum();
            *cell = conv.scale * acc;
        }
    }
    Ok(out)
}
