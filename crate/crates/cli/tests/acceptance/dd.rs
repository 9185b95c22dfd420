//! Double-double arithmetic (about 32 significant digits) and an
//! extended-precision evaluation of the RSvD Lax matrix spectrum.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        // one Newton step on the f64 root doubles the digits
        let r = self.hi.sqrt();
        let (p, e) = two_prod(r, r);
        let resid = ((self.hi - p) - e + self.lo) / (2.0 * r);
        let (hi, lo) = quick_two_sum(r, resid);
        Dd { hi, lo }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub fn new(re: Dd, im: Dd) -> Cdd {
        Cdd { re, im }
    }

    pub fn real(x: Dd) -> Cdd {
        Cdd { re: x, im: Dd::ZERO }
    }

    pub fn conj(self) -> Cdd {
        Cdd { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, s: Dd) -> Cdd {
        Cdd { re: self.re * s, im: self.im * s }
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Cdd {
    type Output = Cdd;
    fn neg(self) -> Cdd {
        Cdd { re: -self.re, im: -self.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Div for Cdd {
    type Output = Cdd;
    fn div(self, o: Cdd) -> Cdd {
        let d = o.norm_sqr();
        let num = self * o.conj();
        Cdd { re: num.re / d, im: num.im / d }
    }
}

/// `𝒜_{kl} = (ℱ_k ℱ̄_l + ε C_{kl}) / (1 + x_k − x_l)` evaluated in double-double.
/// `exp_theta[a]` is taken as the exact value of `e^{θ_a}`.
pub fn lax_matrix(lambda: &[f64], exp_theta: &[f64], g: f64, g2: f64) -> Vec<Vec<Cdd>> {
    let n = lambda.len();
    let one = Cdd::real(Dd::ONE);
    let i_times = |x: Dd| Cdd::new(Dd::ZERO, x);
    let (gd, g2d) = (Dd::from(g), Dd::from(g2));
    let two_g = gd + gd;
    let z: Vec<Cdd> = (0..n)
        .map(|a| {
            let la = Dd::from(lambda[a]);
            let mut z = -(one + i_times(g2d / la));
            for d in (0..n).filter(|&d| d != a) {
                let ld = Dd::from(lambda[d]);
                z = z * (one + i_times(two_g / (la - ld))) * (one + i_times(two_g / (la + ld)));
            }
            z
        })
        .collect();
    let mut f = vec![Cdd::real(Dd::ZERO); 2 * n];
    let mut x = vec![Cdd::real(Dd::ZERO); 2 * n];
    for a in 0..n {
        let root = z[a].norm_sqr().sqrt().sqrt();
        let u = Dd::from(exp_theta[a]);
        f[a] = Cdd::real(u * root);
        f[n + a] = z[a].conj().scale(Dd::ONE / (u * root));
        let xa = i_times(-(Dd::from(lambda[a]) / two_g));
        x[a] = xa;
        x[n + a] = -xa;
    }
    let eps = Dd::ONE - g2d / gd;
    (0..2 * n)
        .map(|k| {
            (0..2 * n)
                .map(|l| {
                    let mut num = f[k] * f[l].conj();
                    if (k + n) % (2 * n) == l {
                        num = num + Cdd::real(eps);
                    }
                    num / (one + x[k] - x[l])
                })
                .collect()
        })
        .collect()
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi on the real
/// symmetric embedding `[[Re H, −Im H], [Im H, Re H]]`.
pub fn hermitian_eigenvalues(h: &[Vec<Cdd>]) -> Vec<Dd> {
    let n = h.len();
    let m = 2 * n;
    let mut a = vec![vec![Dd::ZERO; m]; m];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = h[i][j].re;
            a[n + i][n + j] = h[i][j].re;
            a[i][n + j] = -h[i][j].im;
            a[n + i][j] = h[i][j].im;
        }
    }
    let scale: f64 = a.iter().flatten().map(|x| x.hi * x.hi).sum::<f64>().sqrt();
    for _sweep in 0..60 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].hi * a[i][j].hi)
            .sum::<f64>()
            .sqrt();
        if off <= 1e-31 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p][q];
                if apq.hi.abs() <= 1e-34 * scale {
                    continue;
                }
                let two = Dd::from(2.0);
                let theta = (a[q][q] - a[p][p]) / (two * apq);
                let root = (theta * theta + Dd::ONE).sqrt();
                let t = if theta.hi >= 0.0 {
                    Dd::ONE / (theta + root)
                } else {
                    -(Dd::ONE / (root - theta))
                };
                let c = Dd::ONE / (t * t + Dd::ONE).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..m {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
            }
        }
    }
    let mut diag: Vec<Dd> = (0..m).map(|i| a[i][i]).collect();
    diag.sort_by(|x, y| x.hi.total_cmp(&y.hi).then(x.lo.total_cmp(&y.lo)));
    // every eigenvalue of the embedding appears twice
    diag.into_iter().step_by(2).collect()
}

/// `max_k |μ_k μ_{N−1−k} − 1|` for ascending eigenvalues.
pub fn pairing_defect(ev: &[Dd]) -> f64 {
    let len = ev.len();
    (0..len / 2)
        .map(|k| (ev[k] * ev[len - 1 - k] - Dd::ONE).to_f64().abs())
        .fold(0.0, f64::max)
}

/// Residuals of the arithmetic on inputs whose exact answers are known.
pub fn self_test() -> f64 {
    let third = Dd::ONE / Dd::from(3.0);
    let r2 = Dd::from(2.0).sqrt();
    let q = Dd::from(0.7) / Dd::from(1.3);
    let z = Cdd::new(Dd::from(0.3), Dd::from(-1.1));
    let w = Cdd::new(Dd::from(2.5), Dd::from(0.4));
    let back = (z / w) * w - z;
    [
        (third * Dd::from(3.0) - Dd::ONE).to_f64(),
        (r2 * r2 - Dd::from(2.0)).to_f64(),
        (q * Dd::from(1.3) - Dd::from(0.7)).to_f64(),
        back.re.to_f64(),
        back.im.to_f64(),
    ]
    .iter()
    .map(|x| x.abs())
    .fold(0.0, f64::max)
}
