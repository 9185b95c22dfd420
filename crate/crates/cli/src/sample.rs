//! Random draws of couplings and phase-space points for the verification suite.

use cn_duality::{CouplingParams, RsvdState, SutherlandState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Magnitudes in `[0.2, bound)` with a random sign.
pub fn couplings(rng: &mut ChaCha8Rng, bound: f64) -> CouplingParams {
    let mut draw = || {
        let v: f64 = rng.gen_range(0.2..bound);
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    };
    let (g, g2) = (draw(), draw());
    CouplingParams::new(g, g2).expect("draws are bounded away from zero")
}

/// Strictly decreasing values in `(lo, hi)` with pairwise gaps of at least `gap`.
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
    SutherlandState::new(q, p).expect("sampled inside the chamber")
}

pub fn rsvd_state(rng: &mut ChaCha8Rng, n: usize) -> RsvdState {
    let lambda = chamber(rng, n, 0.3, 4.0, 0.2);
    let theta = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RsvdState::new(lambda, theta).expect("sampled inside the chamber")
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
