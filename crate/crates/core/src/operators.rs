//! Hardy-type operators on rearrangements and the optimal range and domain
//! functionals built from them. Every kernel integral is closed form per
//! piece; quadrature only happens in the outer norm.

use crate::conj;
use crate::error::{Error, Result};
use crate::spaces::{weighted_norm, SpaceSpec};
use crate::stepfn::{PWDecreasing, PiecewisePower, WeightSpec};

/// `t ↦ base(t^γ)`, kept together with its warped closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedDecreasing {
    base: PiecewisePower,
    gamma: f64,
    warped: PiecewisePower,
}

impl WarpedDecreasing {
    pub fn new(base: PiecewisePower, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("{gamma} must be positive")));
        }
        let warped = base.warp(1.0, gamma);
        Ok(Self {
            base,
            gamma,
            warped,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.warped.eval(t)
    }

    pub fn base(&self) -> &PiecewisePower {
        &self.base
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn piecewise(&self) -> &PiecewisePower {
        &self.warped
    }

    /// Whether the value at `0+` is infinite.
    pub fn unbounded(&self) -> bool {
        self.warped.value_at_zero().is_infinite()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param("n", "dimension must be at least 2"));
    }
    Ok(())
}

/// `Hf(t) = ∫_{t^{n'}}^1 s^{-1/n'} f(s) ds`.
pub fn op_h(f: &PWDecreasing, n: usize) -> Result<WarpedDecreasing> {
    op_h_piecewise(&f.to_piecewise(), n)
}

/// `H` applied to any closed-form function, e.g. `f**`.
pub fn op_h_piecewise(g: &PiecewisePower, n: usize) -> Result<WarpedDecreasing> {
    check_dim(n)?;
    let np = conj(n);
    WarpedDecreasing::new(g.tail_integral(-1.0 / np), np)
}

/// `H'f(t) = f**(t^{1/n'})`.
pub fn op_hprime(f: &PWDecreasing, n: usize) -> Result<WarpedDecreasing> {
    check_dim(n)?;
    WarpedDecreasing::new(f.maximal(), 1.0 / conj(n))
}

/// `t ↦ ∫_t^1 s^β f(s) ds` for `β > -1`.
pub fn op_beta(f: &PWDecreasing, beta: f64) -> Result<PiecewisePower> {
    if !(beta > -1.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("{beta} must exceed -1")));
    }
    Ok(f.to_piecewise().tail_integral(beta))
}

/// `‖f**(t^{1/n'})‖_{Z'}`, the associate norm of the optimal range.
pub fn optimal_range_assoc_norm(f: &PWDecreasing, zdual: &SpaceSpec, n: usize) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    zdual.norm_piecewise(op_hprime(f, n)?.piecewise())
}

/// `‖∫_{t^{n'}}^1 f**(s) s^{-1/n'} ds‖_X`, or with `f*` in place of `f**`
/// when `use_star`; the latter is only equivalent when the upper Boyd index
/// of `X` is below 1.
pub fn optimal_domain_norm(f: &PWDecreasing, x: &SpaceSpec, n: usize, use_star: bool) -> Result<f64> {
    if use_star {
        let b = x.boyd_upper()?;
        if b >= 1.0 {
            return Err(Error::Precondition(format!(
                "upper Boyd index of {x} is {b}; the f* form needs it below 1"
            )));
        }
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let h = if use_star {
        op_h(f, n)?
    } else {
        op_h_piecewise(&f.maximal(), n)?
    };
    x.norm_piecewise(h.piecewise())
}

/// `t ↦ ∫_t^1 s^{1/n - 1} f(s) ds`.
pub fn kerman_pick_transform(f: &PWDecreasing, n: usize) -> Result<PiecewisePower> {
    check_dim(n)?;
    op_beta(f, 1.0 / n as f64 - 1.0)
}

/// `‖t^{1/n} f**(t)‖_{Z'}`. The integrand is not monotone, so only
/// Lebesgue spaces and `L^∞`, whose norms do not need a rearrangement, are
/// accepted.
pub fn kp_optimal_range_assoc_norm(f: &PWDecreasing, zdual: &SpaceSpec, n: usize) -> Result<f64> {
    check_dim(n)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let g = f.maximal().mul_power(1.0 / n as f64);
    match *zdual {
        SpaceSpec::Linf => weighted_norm(&g, &WeightSpec::unit(), f64::INFINITY),
        SpaceSpec::Lorentz { p, q } if p == q => weighted_norm(&g, &WeightSpec::unit(), p),
        _ => Err(Error::Unsupported(format!(
            "{zdual}: the weighted maximal function is not monotone, use a Lebesgue space"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn h_examples() {
        let a: f64 = 0.36;
        let h = op_h(&PWDecreasing::indicator(a, 1.0).unwrap(), 2).unwrap();
        for t in [0.01, 0.2, 0.5, 0.59, 0.61, 0.9] {
            let expect = if t <= a.sqrt() { 2.0 * (a.sqrt() - t) } else { 0.0 };
            assert!(close(h.eval(t), expect, 1e-14), "t={t}");
        }
        for n in [2usize, 3, 4] {
            let h = op_h(&PWDecreasing::constant(1.0).unwrap(), n).unwrap();
            for t in [1e-6f64, 0.1, 0.5, 0.99] {
                let expect = n as f64 * (1.0 - t.powf(1.0 / (n as f64 - 1.0)));
                assert!(close(h.eval(t), expect, 1e-13), "n={n} t={t}");
            }
            assert_eq!(h.eval(1.0), 0.0);
        }
        let z = op_h(&PWDecreasing::zero(), 2).unwrap();
        assert!([1e-9, 0.1, 0.5].iter().all(|&t| z.eval(t) == 0.0));
    }

    #[test]
    fn h_of_singular_head() {
        // s^{-1/2} f(s) with f ~ s^{-1/2} is not integrable at 0
        let f = PWDecreasing::new(vec![0.0, 0.1, 1.0], vec![1.0, 0.5])
            .unwrap()
            .with_power_head(0.5)
            .unwrap();
        let h = op_h(&f, 2).unwrap();
        assert!(h.unbounded());
        assert!(h.eval(0.1).is_finite());
    }

    #[test]
    fn hprime_examples() {
        let a: f64 = 0.3;
        let f = PWDecreasing::indicator(a, 1.0).unwrap();
        let h = op_hprime(&f, 2).unwrap();
        for t in [0.01, 0.08, 0.1, 0.5] {
            let expect = if t <= a * a { 1.0 } else { a / t.sqrt() };
            assert!(close(h.eval(t), expect, 1e-14));
        }
        let c = op_hprime(&PWDecreasing::constant(2.5).unwrap(), 3).unwrap();
        assert!(close(c.eval(0.4), 2.5, 1e-15));
    }

    #[test]
    fn beta_examples() {
        let one = PWDecreasing::constant(1.0).unwrap();
        let b0 = op_beta(&one, 0.0).unwrap();
        assert!(close(b0.eval(0.3), 0.7, 1e-15));
        let bh = op_beta(&one, -0.5).unwrap();
        assert!(close(bh.eval(0.25), 1.0, 1e-15));
        assert!(op_beta(&one, -1.0).is_err());
        let a: f64 = 0.4;
        let kp = kerman_pick_transform(&PWDecreasing::indicator(a, 1.0).unwrap(), 3).unwrap();
        for t in [0.05, 0.2, 0.39, 0.5] {
            let expect = if t < a { 3.0 * (a.cbrt() - t.cbrt()) } else { 0.0 };
            assert!(close(kp.eval(t), expect, 1e-14));
        }
    }

    #[test]
    fn range_and_domain_functionals() {
        let a: f64 = 0.2;
        let f = PWDecreasing::indicator(a, 1.0).unwrap();
        let v = optimal_range_assoc_norm(&f, &SpaceSpec::Linf, 2).unwrap();
        assert!(close(v, 1.0, 1e-12));
        let kp = kp_optimal_range_assoc_norm(&f, &SpaceSpec::Linf, 2).unwrap();
        assert!(close(kp, a.sqrt(), 1e-9), "{kp}");
        let z = PWDecreasing::zero();
        assert_eq!(optimal_domain_norm(&z, &SpaceSpec::Linf, 2, false).unwrap(), 0.0);
        let l1 = SpaceSpec::lebesgue(1.0).unwrap();
        assert!(matches!(
            optimal_domain_norm(&f, &l1, 2, true),
            Err(Error::Precondition(_))
        ));
        let lz: SpaceSpec = "LZ(inf,2,-1)".parse().unwrap();
        let one = PWDecreasing::constant(1.0).unwrap();
        let star = optimal_domain_norm(&one, &lz, 2, true).unwrap();
        let max = optimal_domain_norm(&one, &lz, 2, false).unwrap();
        assert!(star.is_finite() && max.is_finite());
        assert!(max / star <= 4.0 && star / max <= 4.0, "{star} {max}");
    }
}
