//! Rearrangement-invariant norms, Hardy-type operators, mixed norms and
//! K-functionals on the unit cube, with verification campaigns for Sobolev
//! embeddings into mixed norm spaces.
//!
//! Every rearrangement is held exactly as a [`PWDecreasing`] step function;
//! operator outputs are closed-form [`PiecewisePower`] evaluators, so
//! quadrature only appears in the outermost norm.

pub mod cli;
pub mod error;
pub mod exec;
pub mod gridio;
pub mod harness;
pub mod kfun;
pub mod mixed;
pub mod numeric;
pub mod operators;
pub mod rearrange;
pub mod spaces;
pub mod stepfn;
pub mod witness;

pub use error::{Error, Result};
pub use exec::Exec;
pub use rearrange::{GridFunction, RadialProfile, SlabProfile};
pub use spaces::SpaceSpec;
pub use stepfn::{PWDecreasing, PiecewisePower, Term, WeightSpec};

/// Conjugate exponent `n/(n-1)` of the dimension.
#[inline]
pub fn conj(n: usize) -> f64 {
    n as f64 / (n as f64 - 1.0)
}

/// Conjugate of a Lebesgue exponent, with `1 ↔ ∞`.
#[inline]
pub fn conj_exp(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Volume of the unit ball in `R^n`.
pub fn omega(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * omega(n - 2),
    }
}
