#![allow(dead_code)]

use cn_duality::{CouplingParams, CxMatrix, RsvdState, SutherlandState};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    loop {
        let v: f64 = rng.gen_range(-bound..bound);
        if v.abs() >= 0.2 {
            return v;
        }
    }
}

pub fn couplings(rng: &mut ChaCha8Rng, bound: f64) -> CouplingParams {
    CouplingParams::new(nonzero(rng, bound), nonzero(rng, bound)).unwrap()
}

/// Strictly decreasing positive values in `(lo, hi)` with gaps of at least `gap`.
pub fn chamber(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        if v.windows(2).all(|w| w[0] - w[1] >= gap) {
            return v;
        }
    }
}

pub fn sutherland_state(rng: &mut ChaCha8Rng, n: usize) -> SutherlandState {
    let q = chamber(rng, n, 0.2, 2.5, 0.15);
    let p = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    SutherlandState::new(q, p).unwrap()
}

pub fn rsvd_state(rng: &mut ChaCha8Rng, n: usize) -> RsvdState {
    let lambda = chamber(rng, n, 0.3, 4.0, 0.2);
    let theta = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RsvdState::new(lambda, theta).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn random_p(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CxMatrix {
    let mut x = CxMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in a..n {
            let (re, im) = if a == b {
                (rng.gen_range(-scale..scale), 0.0)
            } else {
                (rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
            };
            let h = Complex64::new(re, im);
            x[(a, b)] = h;
            x[(b, a)] = h.conj();
            x[(n + a, n + b)] = -h;
            x[(n + b, n + a)] = -h.conj();
        }
        for b in 0..n {
            let k = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            if a == b {
                let k = Complex64::new(0.0, k.im);
                x[(a, n + a)] = k;
                x[(n + a, a)] = -k;
            } else if a < b {
                // anti-Hermitian off-diagonal block
                x[(a, n + b)] = k;
                x[(b, n + a)] = -k.conj();
                x[(n + a, b)] = -k;
                x[(n + b, a)] = k.conj();
            }
        }
    }
    x
}

/// Anti-Hermitian matrix commuting with `C`: `[[A, B], [B, A]]`, `A`, `B` anti-Hermitian.
pub fn random_k(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CxMatrix {
    let anti = |rng: &mut ChaCha8Rng| {
        let mut m = CxMatrix::zeros(n, n);
        for a in 0..n {
            m[(a, a)] = Complex64::new(0.0, rng.gen_range(-scale..scale));
            for b in a + 1..n {
                let v = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                m[(a, b)] = v;
                m[(b, a)] = -v.conj();
            }
        }
        m
    };
    let (a, b) = (anti(rng), anti(rng));
    let mut x = CxMatrix::zeros(2 * n, 2 * n);
    x.view_mut((0, 0), (n, n)).copy_from(&a);
    x.view_mut((n, n), (n, n)).copy_from(&a);
    x.view_mut((0, n), (n, n)).copy_from(&b);
    x.view_mut((n, 0), (n, n)).copy_from(&b);
    x
}
