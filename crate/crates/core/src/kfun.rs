//! K-functionals: exact for `(L^1, L^∞)`, Holmstedt's truncated norms for
//! Lorentz couples, the Sobolev-pair expression, the mixed-norm pair and a
//! level-truncation search used as an independent comparator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mixed::psi_k;
use crate::rearrange::GridFunction;
use crate::spaces::SpaceSpec;
use crate::stepfn::{integrate_weighted, PWDecreasing, WeightSpec};

/// Largest step function accepted by [`k_bruteforce`].
pub const BRUTEFORCE_PIECES: usize = 200;
const REFINE_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KMethod {
    Exact,
    Holmstedt,
    Mixed,
    Bruteforce,
}

/// A sampled K-curve.
#[derive(Clone, Debug, Serialize)]
pub struct KCurve {
    pub pair: [String; 2],
    pub method: KMethod,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
}

impl KCurve {
    pub fn sample<F>(pair: [String; 2], method: KMethod, ts: &[f64], k: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync + Send,
    {
        let values = Exec::default()
            .map(ts, |&t| k(t))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            pair,
            method,
            ts: ts.to_vec(),
            values,
        })
    }

    /// Nondecreasing and concave on the sampled points, up to `rel_tol` of
    /// the largest value.
    pub fn is_concave_nondecreasing(&self, rel_tol: f64) -> bool {
        concave_nondecreasing(&self.ts, &self.values, rel_tol)
    }
}

pub fn concave_nondecreasing(ts: &[f64], ks: &[f64], rel_tol: f64) -> bool {
    let scale = ks.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = rel_tol * scale;
    if ks.windows(2).any(|w| w[1] < w[0] - tol) {
        return false;
    }
    // slopes must not increase
    let slopes: Vec<f64> = (1..ts.len())
        .map(|i| (ks[i] - ks[i - 1]) / (ts[i] - ts[i - 1]))
        .collect();
    (1..slopes.len()).all(|i| {
        let gap = ts[i + 1] - ts[i - 1];
        slopes[i] <= slopes[i - 1] + tol / gap.max(f64::MIN_POSITIVE) * 2.0
    })
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::param("t", format!("{t} must be positive")));
    }
    Ok(())
}

/// `K(f, t; L^1, L^∞) = ∫_0^t f*`.
pub fn k_exact_l1_linf(f: &PWDecreasing, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(f.primitive(t.min(1.0)))
}

fn check_lorentz_index(p: f64, q: f64, pname: &'static str) -> Result<()> {
    let ok = (p == 1.0 && q == 1.0) || (p > 1.0 && p.is_finite() && q >= 1.0 && q.is_finite());
    if !ok {
        return Err(Error::param(pname, format!("({p},{q}) outside the supported range")));
    }
    Ok(())
}

/// `(∫_lo^hi [s^{1/p-1/q} f*(s)]^q ds)^{1/q}`.
fn truncated_lorentz(f: &PWDecreasing, p: f64, q: f64, lo: f64, hi: f64) -> Result<f64> {
    if hi <= lo || f.is_zero() {
        return Ok(0.0);
    }
    if p == 1.0 && q == 1.0 {
        return Ok(f.primitive(hi) - f.primitive(lo));
    }
    let w = WeightSpec::power(1.0 / p - 1.0 / q);
    let v = integrate_weighted(&f.to_piecewise(), &w, q, lo, hi)?;
    Ok(v.powf(1.0 / q))
}

/// Holmstedt: `K(f, t; L^{p0,q0}, L^∞) ≈ (∫_0^{t^{p0}} [s^{1/p0-1/q0} f*]^{q0})^{1/q0}`.
pub fn k_holmstedt(f: &PWDecreasing, p0: f64, q0: f64, t: f64) -> Result<f64> {
    check_lorentz_index(p0, q0, "p0")?;
    check_t(t)?;
    truncated_lorentz(f, p0, q0, 0.0, t.powf(p0).min(1.0))
}

/// The two-term Sobolev-pair expression on `|D u|*`, with
/// `1/α = 1/p0 - 1/p1`: the `(p0,q0)` norm over `(0, t^α)` plus `t` times
/// the `(p1,q1)` norm over `(t^α, 1)`.
pub fn k_sobolev_pair(
    du_star: &PWDecreasing,
    p0: f64,
    q0: f64,
    p1: f64,
    q1: f64,
    t: f64,
) -> Result<f64> {
    check_lorentz_index(p0, q0, "p0")?;
    check_lorentz_index(p1, q1, "p1")?;
    if !(p1 > p0) {
        return Err(Error::param("p1", format!("need p0 < p1, got {p0} and {p1}")));
    }
    check_t(t)?;
    let alpha = 1.0 / (1.0 / p0 - 1.0 / p1);
    let tau = t.powf(alpha).min(1.0);
    let first = truncated_lorentz(du_star, p0, q0, 0.0, tau)?;
    let second = truncated_lorentz(du_star, p1, q1, tau, 1.0)?;
    Ok(first + t * second)
}

/// `Σ_k ‖ψ_k* χ_(0,t)‖_X`, the mixed-pair K-functional at argument
/// `φ_X(t)`.
pub fn k_mixed_linf(f: &GridFunction, x: &SpaceSpec, t: f64) -> Result<f64> {
    let psis = (0..f.dim())
        .map(|k| Ok(psi_k(f, k)?.rearrangement()))
        .collect::<Result<Vec<_>>>()?;
    k_mixed_from_psi(&psis, x, t)
}

pub fn k_mixed_from_psi(psis: &[PWDecreasing], x: &SpaceSpec, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(t));
    }
    psis.iter()
        .map(|p| x.norm(&p.truncate(t)?))
        .sum::<Result<f64>>()
}

/// `min_c ‖(f - c)_+‖_X + t c` over level truncations, for `(X, L^∞)` with
/// `X` a Lorentz space. Exact for `X = L^1`; an upper bound otherwise.
pub fn k_bruteforce(f: &PWDecreasing, x: &SpaceSpec, t: f64) -> Result<f64> {
    k_bruteforce_with(f, x, t, Exec::default())
}

pub fn k_bruteforce_with(f: &PWDecreasing, x: &SpaceSpec, t: f64, exec: Exec) -> Result<f64> {
    if !matches!(x, SpaceSpec::Lorentz { .. }) {
        return Err(Error::Unsupported(format!("brute force for ({x}, Linf)")));
    }
    check_t(t)?;
    if f.len() > BRUTEFORCE_PIECES {
        return Err(Error::Budget {
            pieces: f.len(),
            limit: BRUTEFORCE_PIECES,
        });
    }
    let cost = |c: f64| -> Result<f64> {
        if c == 0.0 {
            return x.norm(f);
        }
        let (upper, _) = f.level_split(c)?;
        Ok(x.norm(&upper)? + t * c)
    };
    let mut levels: Vec<f64> = std::iter::once(0.0)
        .chain(f.values().iter().copied().filter(|v| v.is_finite()))
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let costs = exec
        .map(&levels, |&c| cost(c))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &v) in costs.iter().enumerate() {
        if v < best {
            best = v;
            best_i = i;
        }
    }
    // refine between the neighbouring levels, and above the top one
    let lo = levels[best_i.saturating_sub(1)];
    let hi = match levels.get(best_i + 1) {
        Some(&h) => h,
        None if f.sup().is_infinite() => 2.0 * levels[best_i].max(1.0),
        None => levels[best_i],
    };
    if hi > lo {
        let grid: Vec<f64> = (1..REFINE_POINTS)
            .map(|j| lo + (hi - lo) * j as f64 / REFINE_POINTS as f64)
            .collect();
        for v in exec.map(&grid, |&c| cost(c)) {
            best = best.min(v?);
        }
    }
    Ok(best)
}
