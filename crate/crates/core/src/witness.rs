//! Explicit functions from the embedding arguments: the radial Sobolev
//! witness built from a rearrangement, the truncation split, and the slab
//! counterexample.

use crate::conj;
use crate::error::{Error, Result};
use crate::numeric::ExactSum;
use crate::omega;
use crate::rearrange::{GridFunction, SlabProfile};
use crate::spaces::SpaceSpec;
use crate::stepfn::{exact_complement, PWDecreasing, PiecewisePower};

/// `u(x) = P(ω|x - c|^n)` with `P(m) = ∫_m^{ω r^n} s^{-1/n'} f*(s) ds`.
#[derive(Clone, Debug)]
pub struct SobolevWitness {
    pub source: PWDecreasing,
    pub n: usize,
    pub r: f64,
    pub omega: f64,
    /// `P` as a function of the measure coordinate `m = ω|x|^n`.
    pub profile: PiecewisePower,
    /// `|∇u|` as a function of `m`: `n ω^{1/n} f*(m)`.
    pub grad_profile: PWDecreasing,
}

/// Witness with the ball constant `ω_{n-1}^{n'}`, for which the sections of
/// `u` rearrange exactly to `Hf`.
pub fn make_sobolev_witness(fstar: &PWDecreasing, r: f64, n: usize) -> Result<SobolevWitness> {
    if n < 2 {
        return Err(Error::param("n", "dimension must be at least 2"));
    }
    make_sobolev_witness_with(fstar, r, n, section_omega(n))
}

/// `ω_{n-1}^{n'}`.
pub fn section_omega(n: usize) -> f64 {
    omega(n - 1).powf(conj(n))
}

pub fn make_sobolev_witness_with(
    fstar: &PWDecreasing,
    r: f64,
    n: usize,
    om: f64,
) -> Result<SobolevWitness> {
    if n < 2 {
        return Err(Error::param("n", "dimension must be at least 2"));
    }
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::param("r", format!("radius {r} not in (0, 1/2)")));
    }
    if !(om > 0.0 && om.is_finite()) {
        return Err(Error::param("omega", format!("{om} must be positive")));
    }
    let m = om * r.powi(n as i32);
    if m > 1.0 {
        return Err(Error::Precondition(format!(
            "ball measure coordinate {m} exceeds 1"
        )));
    }
    let support = fstar.support();
    if support > m {
        return Err(Error::Precondition(format!(
            "f* is supported on (0,{support}) but the ball only carries (0,{m}); split first"
        )));
    }
    let profile = fstar.to_piecewise().tail_integral(-1.0 / conj(n));
    let grad_profile = fstar.scale(n as f64 * om.powf(1.0 / n as f64))?;
    Ok(SobolevWitness {
        source: fstar.clone(),
        n,
        r,
        omega: om,
        profile,
        grad_profile,
    })
}

impl SobolevWitness {
    /// `ω r^n`.
    pub fn support_measure(&self) -> f64 {
        self.omega * self.r.powi(self.n as i32)
    }

    /// `u` at a point of the cube.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.profile.eval(self.measure_coordinate(x))
    }

    /// `|∇u|` at a point of the cube.
    pub fn grad_eval(&self, x: &[f64]) -> f64 {
        let m = self.measure_coordinate(x);
        if m >= 1.0 {
            0.0
        } else {
            self.grad_profile.value(m)
        }
    }

    fn measure_coordinate(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|&xi| (xi - 0.5) * (xi - 0.5)).sum();
        self.omega * r2.powf(0.5 * self.n as f64)
    }

    /// `|∇u|` recomputed from the profile by the chain rule,
    /// `-P'(ωρ^n) · nωρ^{n-1}`, at radius `rho`.
    pub fn grad_from_profile(&self, rho: f64) -> f64 {
        let m = self.omega * rho.powi(self.n as i32);
        let dp = self.profile.derivative().eval(m);
        -dp * self.n as f64 * self.omega * rho.powi(self.n as i32 - 1)
    }

    /// `u*(s) = P(ω s / ω_n)`.
    pub fn u_star(&self) -> PiecewisePower {
        self.profile.warp(self.omega / omega(self.n), 1.0)
    }

    /// `|∇u|*`.
    pub fn grad_star(&self) -> Result<PWDecreasing> {
        self.grad_profile.dilate(omega(self.n) / self.omega)
    }

    /// Rearrangement of every section `ψ_k(u, L^∞)`:
    /// `P(ω s^{n'} / ω_{n-1}^{n'})`.
    pub fn psi_star(&self) -> PiecewisePower {
        self.profile
            .warp(self.omega / section_omega(self.n), conj(self.n))
    }

    /// `‖u‖_Z + ‖∇u‖_Z`.
    pub fn sobolev_norm(&self, z: &SpaceSpec) -> Result<f64> {
        Ok(z.norm_piecewise(&self.u_star())? + z.norm(&self.grad_star()?)?)
    }

    /// `‖u‖_{R(X, L^∞)} = n ‖ψ*‖_X`, the sections being identical by
    /// symmetry.
    pub fn mixed_norm(&self, x: &SpaceSpec) -> Result<f64> {
        Ok(self.n as f64 * x.norm_piecewise(&self.psi_star())?)
    }

    /// Cell-centre samples of `u`.
    pub fn sample(&self, cells: usize) -> Result<GridFunction> {
        GridFunction::from_fn(self.n, cells, |x| self.eval(x))
    }
}

/// `c` rounded down to a multiple of the ulp of `top`, so that `v - c` is
/// exact for every `c < v <= top`.
fn snap_level(c: f64, top: f64) -> f64 {
    if c == 0.0 || !top.is_finite() || top == 0.0 {
        return c;
    }
    let u = top.next_up() - top;
    (c / u).floor() * u
}

fn largest_finite(vals: impl Iterator<Item = f64>) -> f64 {
    vals.filter(|v| v.is_finite()).fold(0.0, f64::max)
}

/// `(f - c)_+` and `min(f, c)` at the level `c = f*(m0)`, rounded down by
/// at most one ulp of `sup f` so that both parts add back to `f*` exactly.
pub fn truncation_split(f: &PWDecreasing, m0: f64) -> Result<(PWDecreasing, PWDecreasing)> {
    if !(m0 > 0.0 && m0 < 1.0) {
        return Err(Error::param("m0", format!("{m0} not in (0,1)")));
    }
    let top = largest_finite(f.values().iter().copied());
    f.level_split(snap_level(f.value(m0), top))
}

/// Grid version: `f1 = sgn f (|f| - c)_+`, `f2 = sgn f min(|f|, c)` with
/// `c = f*(m0)` rounded as in [`truncation_split`].
pub fn truncation_split_grid(f: &GridFunction, m0: f64) -> Result<(GridFunction, GridFunction)> {
    if !(m0 > 0.0 && m0 < 1.0) {
        return Err(Error::param("m0", format!("{m0} not in (0,1)")));
    }
    let top = largest_finite(f.values().iter().map(|v| v.abs()));
    let c = snap_level(f.rearrangement().value(m0), top);
    let (mut hi, mut lo) = (Vec::with_capacity(f.len()), Vec::with_capacity(f.len()));
    for &v in f.values() {
        let (a, s) = (v.abs(), v.signum());
        if a > c {
            let (h, l) = exact_complement(a, c);
            hi.push(s * h);
            lo.push(s * l);
        } else {
            hi.push(0.0);
            lo.push(v);
        }
    }
    Ok((
        GridFunction::new(f.dim(), f.cells_per_axis(), hi)?,
        GridFunction::new(f.dim(), f.cells_per_axis(), lo)?,
    ))
}

/// `f(x) = g*(2|x_n - 1/2|)` on a slab of half-width `r` around the last
/// axis; `g*` must be unbounded.
pub fn make_slab_counterexample(gstar: &PWDecreasing, r: f64, n: usize) -> Result<SlabProfile> {
    if !gstar.unbounded_flag() {
        return Err(Error::Precondition(
            "g* is bounded, so the slab is not a counterexample".into(),
        ));
    }
    SlabProfile::new(gstar.clone(), r, n.saturating_sub(1), n)
}

/// `max |f1*(t) + f2*(t) - f*(t)|` over the merged breakpoints, summed
/// without rounding.
pub fn split_residual(f: &PWDecreasing, f1: &PWDecreasing, f2: &PWDecreasing) -> f64 {
    let mut ts: Vec<f64> = f
        .breakpoints()
        .iter()
        .chain(f1.breakpoints())
        .chain(f2.breakpoints())
        .copied()
        .filter(|&t| t < 1.0)
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.iter()
        .map(|&t| {
            let t = t.max(f64::MIN_POSITIVE);
            let mut s = ExactSum::new();
            s.add(f1.value(t));
            s.add(f2.value(t));
            s.add(-f.value(t));
            s.value().abs()
        })
        .fold(0.0, f64::max)
}
