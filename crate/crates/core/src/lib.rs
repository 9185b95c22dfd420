//! Hyperbolic `C_n` Sutherland and rational `C_n` Ruijsenaars–Schneider–van Diejen
//! models: Lax matrices, the action-angle duality between them, and exact
//! spectral solvers for both flows.
//!
//! Conventions: `N = 2n`, `C` is the block anti-diagonal identity, and both
//! phase spaces carry the bracket `{x_a, y_b} = ½ δ_ab` for their conjugate pairs
//! `(q, p)` and `(θ, λ)`.

pub mod cauchy;
pub mod duality;
pub mod error;
pub mod matkit;
pub mod oracle;
pub mod rsvd;
pub mod sutherland;

pub use error::{Error, Result};
pub use matkit::{CxMatrix, CxVector, KFrame, PairedSpectrum, Tolerances};
pub use rsvd::{RsvdLaxBundle, RsvdState};
pub use sutherland::{CouplingParams, SutherlandState};
