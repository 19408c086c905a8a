//! Nonincreasing step functions on `(0, 1)` and the weighted quadrature that
//! all norms are built on.

mod piecewise;
mod weighted;

pub use piecewise::{PiecewisePower, Term};
pub use weighted::{
    integrate_weighted, integrate_weighted_with, weighted_sup, Weight, WeightSpec, DEFAULT_REL_TOL,
};

use crate::error::{Error, Result};
use crate::numeric::{power_integral, ExactSum};

/// Nonnegative nonincreasing step function on `(0, 1)`, right-continuous:
/// the value on `[t_{i-1}, t_i)` is `v_i`.
///
/// The first piece may carry a singular power head, `v_1 (t_1/t)^γ` on
/// `(0, t_1)`, or be `+∞` outright; either makes the function unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct PWDecreasing {
    breaks: Vec<f64>,
    values: Vec<f64>,
    head: Option<f64>,
    prefix: Vec<f64>,
}

impl PWDecreasing {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::InvalidStep(format!(
                "{} breakpoints for {} values",
                breaks.len(),
                values.len()
            )));
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::InvalidStep("breakpoints must run from 0 to 1".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidStep(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidStep(format!("value {v} at piece {i}")));
            }
            if v.is_infinite() && i > 0 {
                return Err(Error::InvalidStep(
                    "only the first piece may be infinite".into(),
                ));
            }
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidStep("values must be nonincreasing".into()));
        }
        Ok(Self::build(breaks, values, None))
    }

    fn build(breaks: Vec<f64>, values: Vec<f64>, head: Option<f64>) -> Self {
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        let mut acc = ExactSum::new();
        for i in 0..values.len() {
            if i == 0 {
                acc.add(head_area(values[0], breaks[1], head, breaks[1]));
            } else {
                acc.add_product(values[i], breaks[i + 1] - breaks[i]);
            }
            prefix.push(acc.value());
        }
        Self {
            breaks,
            values,
            head,
            prefix,
        }
    }

    /// Builds from `(right_end, value)` pairs; the last right end must be 1.
    pub fn from_steps(steps: &[(f64, f64)]) -> Result<Self> {
        let mut breaks = vec![0.0];
        breaks.extend(steps.iter().map(|s| s.0));
        Self::new(breaks, steps.iter().map(|s| s.1).collect())
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![c])
    }

    pub fn zero() -> Self {
        Self::build(vec![0.0, 1.0], vec![0.0], None)
    }

    /// `c · χ_(0,a)`.
    pub fn indicator(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::param("a", format!("{a} not in (0,1]")));
        }
        if a == 1.0 {
            Self::constant(c)
        } else {
            Self::new(vec![0.0, a, 1.0], vec![c, 0.0])
        }
    }

    /// Replaces the first piece by `v_1 (t_1/t)^γ`.
    pub fn with_power_head(self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("{gamma} must be positive")));
        }
        if !(self.values[0] > 0.0 && self.values[0].is_finite()) {
            return Err(Error::InvalidStep(
                "a power head needs a positive finite first value".into(),
            ));
        }
        Ok(Self::build(self.breaks, self.values, Some(gamma)))
    }

    /// Step approximation of a nonincreasing profile, evaluated at geometric
    /// midpoints (arithmetic for the first piece).
    pub fn sample<F: Fn(f64) -> f64>(profile: F, breaks: Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(breaks.len().saturating_sub(1));
        let mut prev = f64::INFINITY;
        for w in breaks.windows(2) {
            let mid = if w[0] == 0.0 { 0.5 * w[1] } else { (w[0] * w[1]).sqrt() };
            let v = profile(mid).max(0.0).min(prev);
            values.push(v);
            prev = v;
        }
        Self::new(breaks, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn head_exponent(&self) -> Option<f64> {
        self.head
    }

    pub fn unbounded_flag(&self) -> bool {
        self.head.is_some() || self.values[0].is_infinite()
    }

    pub fn is_zero(&self) -> bool {
        self.values[0] == 0.0
    }

    /// Essential supremum.
    pub fn sup(&self) -> f64 {
        if self.unbounded_flag() {
            f64::INFINITY
        } else {
            self.values[0]
        }
    }

    /// `λ_f(0)`, the measure of the support.
    pub fn support(&self) -> f64 {
        let k = self.values.iter().take_while(|&&v| v > 0.0).count();
        self.breaks[k]
    }

    /// Measure of `{f > λ}`.
    pub fn lambda(&self, level: f64) -> f64 {
        if self.unbounded_flag() && level >= self.values[0] && self.values[0].is_finite() {
            // head exceeds any level near 0: v1 (t1/t)^γ > λ  iff  t < t1 (v1/λ)^{1/γ}
            let g = self.head.unwrap();
            return self.breaks[1] * (self.values[0] / level).powf(1.0 / g);
        }
        let k = self.values.iter().take_while(|&&v| v > level).count();
        self.breaks[k]
    }

    fn piece(&self, t: f64) -> usize {
        let i = self.breaks.partition_point(|&b| b <= t);
        i.saturating_sub(1).min(self.values.len() - 1)
    }

    /// Value at `t ∈ (0, 1)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(t));
        }
        Ok(self.value(t))
    }

    /// Value without the domain check; `t <= 0` gives the supremum.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.sup();
        }
        let i = self.piece(t);
        match (i, self.head) {
            (0, Some(g)) => self.values[0] * (self.breaks[1] / t).powf(g),
            _ => self.values[i],
        }
    }

    /// `F(t) = ∫_0^t f`, `+∞` when the head is not integrable.
    pub fn primitive(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t == 0.0 {
            return 0.0;
        }
        if t == 1.0 {
            return self.prefix[self.values.len()];
        }
        let i = self.piece(t);
        if i == 0 {
            return head_area(self.values[0], self.breaks[1], self.head, t);
        }
        let v = self.values[i];
        if v == 0.0 {
            return self.prefix[i];
        }
        self.prefix[i] + v * (t - self.breaks[i])
    }

    /// `F` at every breakpoint, computed exactly.
    pub fn prefix_areas(&self) -> &[f64] {
        &self.prefix
    }

    /// The closed-form piecewise representation of `f`.
    pub fn to_piecewise(&self) -> PiecewisePower {
        let pieces = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| match (i, self.head) {
                (0, Some(g)) => vec![Term::power(v * self.breaks[1].powf(g), -g)],
                _ => vec![Term::constant(v)],
            })
            .collect();
        PiecewisePower::from_parts_unchecked(self.breaks.clone(), pieces)
    }

    /// Exact evaluator of `f** = F(t)/t`; each bounded piece reads
    /// `v_i + A_i/t`.
    pub fn maximal(&self) -> PiecewisePower {
        let mut pieces = Vec::with_capacity(self.values.len());
        for (i, &v) in self.values.iter().enumerate() {
            if i == 0 {
                match self.head {
                    _ if v.is_infinite() => pieces.push(vec![Term::constant(f64::INFINITY)]),
                    Some(g) if g >= 1.0 => pieces.push(vec![Term::constant(f64::INFINITY)]),
                    Some(g) => pieces.push(vec![Term::power(
                        v * self.breaks[1].powf(g) / (1.0 - g),
                        -g,
                    )]),
                    None => pieces.push(vec![Term::constant(v)]),
                }
                continue;
            }
            if self.prefix[i].is_infinite() {
                pieces.push(vec![Term::constant(f64::INFINITY)]);
                continue;
            }
            // (F(t_{i-1}) + v (t - t_{i-1})) / t
            let a = self.prefix[i] - v * self.breaks[i];
            pieces.push(vec![Term::constant(v), Term::power(a, -1.0)]);
        }
        PiecewisePower::from_parts_unchecked(self.breaks.clone(), pieces)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param("c", format!("scale {c} must be finite and >= 0")));
        }
        let values = self.values.iter().map(|v| v * c).collect();
        Ok(Self::build(self.breaks.clone(), values, self.head))
    }

    /// Pointwise sum of two bounded step functions (still nonincreasing).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.head.is_some() || other.head.is_some() {
            return Err(Error::Unsupported("sum of power-headed step functions".into()));
        }
        let breaks = merge_breaks(&self.breaks, &other.breaks);
        let values = breaks
            .windows(2)
            .map(|w| self.value(w[0].max(f64::MIN_POSITIVE)) + other.value(w[0].max(f64::MIN_POSITIVE)))
            .collect();
        Self::new(breaks, values)
    }

    /// Dilation `E_s f(t) = f(t/s)` for `t <= min(1, s)`, zero beyond.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param("s", format!("dilation factor {s}")));
        }
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            let b = self.breaks[i + 1] * s;
            if b >= 1.0 || i + 1 == self.values.len() {
                values.push(v);
                breaks.push(b.min(1.0));
                break;
            }
            values.push(v);
            breaks.push(b);
        }
        if *breaks.last().unwrap() < 1.0 {
            if *values.last().unwrap() == 0.0 {
                *breaks.last_mut().unwrap() = 1.0;
            } else {
                values.push(0.0);
                breaks.push(1.0);
            }
        }
        Ok(Self::build(breaks, values, self.head))
    }

    /// `t ↦ f(t^γ)`, again a nonincreasing step function.
    pub fn compose_power(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("{gamma} must be positive")));
        }
        let mut breaks = vec![0.0];
        let mut values = Vec::with_capacity(self.values.len());
        for (i, &v) in self.values.iter().enumerate() {
            let b = if i + 1 == self.values.len() {
                1.0
            } else {
                self.breaks[i + 1].powf(1.0 / gamma)
            };
            if b <= *breaks.last().unwrap() {
                // collapsed by rounding; keep the larger value already there
                continue;
            }
            breaks.push(b.min(1.0));
            values.push(v);
            if b >= 1.0 {
                break;
            }
        }
        *breaks.last_mut().unwrap() = 1.0;
        let head = self.head.map(|g| g * gamma);
        Ok(Self::build(breaks, values, head))
    }

    /// `f · χ_(0,a)`.
    pub fn truncate(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::param("a", format!("{a} not in (0,1]")));
        }
        if a == 1.0 {
            return Ok(self.clone());
        }
        let k = self.breaks.partition_point(|&b| b < a);
        let mut breaks: Vec<f64> = self.breaks[..k].to_vec();
        breaks.push(a);
        let mut values: Vec<f64> = self.values[..k].to_vec();
        breaks.push(1.0);
        values.push(0.0);
        Ok(Self::build(breaks, values, self.head))
    }

    /// `(f - c)_+` and `min(f, c)`, summing back to `f` exactly.
    pub fn level_split(&self, c: f64) -> Result<(Self, Self)> {
        if !(c >= 0.0) {
            return Err(Error::param("c", format!("level {c} must be >= 0")));
        }
        let mut upper = Vec::with_capacity(self.values.len());
        let mut lower = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            if v > c {
                let (hi, lo) = exact_complement(v, c);
                upper.push(hi);
                lower.push(lo);
            } else {
                upper.push(0.0);
                lower.push(v);
            }
        }
        if self.head.is_some() && c > 0.0 {
            // (v (t1/t)^γ - c)_+ is no longer a scaled power head
            return Err(Error::Unsupported("level split of a power head".into()));
        }
        for w in upper.windows(2) {
            if w[1] > w[0] {
                return Err(Error::Precondition("split lost monotonicity".into()));
            }
        }
        let up = Self::build(self.breaks.clone(), upper, self.head);
        let low = Self::new(self.breaks.clone(), lower)?;
        Ok((up, low))
    }

    /// `∫_0^1 |f - g|` for bounded step functions, computed exactly per piece.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.unbounded_flag() || other.unbounded_flag() {
            return Err(Error::Unsupported("distance between unbounded functions".into()));
        }
        let breaks = merge_breaks(&self.breaks, &other.breaks);
        let mut acc = ExactSum::new();
        for w in breaks.windows(2) {
            let d = (self.value(w[0].max(f64::MIN_POSITIVE)) - other.value(w[0].max(f64::MIN_POSITIVE))).abs();
            acc.add_product(d, w[1] - w[0]);
        }
        Ok(acc.value())
    }

    /// Merges adjacent pieces with equal values.
    pub fn simplify(&self) -> Self {
        let mut breaks = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            let after_head = values.len() == 1 && self.head.is_some();
            if values.last() == Some(&v) && !after_head {
                *breaks.last_mut().unwrap() = self.breaks[i + 1];
            } else {
                values.push(v);
                breaks.push(self.breaks[i + 1]);
            }
        }
        Self::build(breaks, values, self.head)
    }
}

/// `∫_0^τ` of the first piece, `τ <= t_1`.
fn head_area(v: f64, t1: f64, head: Option<f64>, tau: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    match head {
        _ if v.is_infinite() => f64::INFINITY,
        None => v * tau,
        Some(g) => v * t1.powf(g) * power_integral(-g, 0.0, tau),
    }
}

/// Splits `v > c` into `(hi, c)` with `hi + c == v` in floating point.
pub(crate) fn exact_complement(v: f64, c: f64) -> (f64, f64) {
    if v.is_infinite() {
        return (v, c);
    }
    let mut hi = v - c;
    if hi + c == v {
        return (hi, c);
    }
    // hi >= v/2 > c here, so its ulp is no coarser than v's and a neighbour
    // rounds back onto v
    let (mut up, mut down) = (hi, hi);
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        if up + c == v {
            hi = up;
            break;
        }
        if down + c == v {
            hi = down;
            break;
        }
    }
    (hi, c)
}

pub(crate) fn merge_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `∫_0^1 f g` for bounded step functions, exact per merged piece.
pub fn pairing(f: &PWDecreasing, g: &PWDecreasing) -> Result<f64> {
    if f.unbounded_flag() || g.unbounded_flag() {
        return Err(Error::Unsupported("pairing of unbounded functions".into()));
    }
    let breaks = merge_breaks(&f.breaks, &g.breaks);
    let mut acc = ExactSum::new();
    for w in breaks.windows(2) {
        let t = w[0].max(f64::MIN_POSITIVE);
        let (a, b) = crate::numeric::two_product(f.value(t), g.value(t));
        acc.add_product(a, w[1] - w[0]);
        acc.add_product(b, w[1] - w[0]);
    }
    Ok(acc.value())
}

/// Random bounded step function with up to `max_pieces` pieces; values are
/// sorted exponential draws, occasionally ending in a zero piece.
pub fn random_decreasing<R: rand::Rng + ?Sized>(rng: &mut R, max_pieces: usize) -> PWDecreasing {
    let m = rng.random_range(1..=max_pieces.max(1));
    let mut cuts: Vec<f64> = (1..m).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.retain(|&c| c > 0.0 && c < 1.0);
    let mut breaks = vec![0.0];
    breaks.extend(cuts);
    breaks.push(1.0);
    let k = breaks.len() - 1;
    let mut values: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if k > 1 && rng.random_bool(0.25) {
        values[k - 1] = 0.0;
    }
    PWDecreasing::new(breaks, values).expect("sorted construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> PWDecreasing {
        PWDecreasing::from_steps(&[(0.2, 3.0), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = PWDecreasing::indicator(0.5, 1.0).unwrap();
        assert_eq!(f.eval(0.25).unwrap(), 1.0);
        assert_eq!(f.eval(0.75).unwrap(), 0.0);
        assert_eq!(two_step().eval(0.2).unwrap(), 1.0);
        assert!(matches!(f.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(f.eval(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn primitive_examples() {
        let f = PWDecreasing::indicator(0.3, 1.0).unwrap();
        assert_eq!(f.primitive(0.7), 0.3);
        let one = PWDecreasing::constant(1.0).unwrap();
        assert_eq!(one.primitive(0.37), 0.37);
        // midpoint Riemann sum with 10^6 cells
        let g = two_step();
        let n = 1_000_000;
        let h = 0.5 / n as f64;
        let riemann: f64 = (0..n).map(|i| g.value((i as f64 + 0.5) * h) * h).sum();
        assert!((g.primitive(0.5) - riemann).abs() < 1e-9);
        assert!((g.primitive(0.5) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn maximal_examples() {
        let a = 0.3;
        let m = PWDecreasing::indicator(a, 1.0).unwrap().maximal();
        assert_eq!(m.eval(0.1), 1.0);
        assert!((m.eval(0.6) - a / 0.6).abs() < 1e-15);
        let c = PWDecreasing::constant(2.5).unwrap().maximal();
        assert_eq!(c.eval(0.9), 2.5);
        let g = two_step();
        let mg = g.maximal();
        assert!((mg.eval(0.5) - g.primitive(0.5) / 0.5).abs() < 1e-15);
        assert!((mg.eval(0.5) - 1.8).abs() < 1e-14);
    }

    #[test]
    fn invalid_steps_rejected() {
        assert!(PWDecreasing::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).is_err());
        assert!(PWDecreasing::new(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(PWDecreasing::new(vec![0.0, 0.5, 0.5, 1.0], vec![2.0, 1.0, 1.0]).is_err());
        assert!(PWDecreasing::new(vec![0.0, 0.5, 1.0], vec![1.0, f64::INFINITY]).is_err());
        assert!(PWDecreasing::new(vec![0.0, 1.0], vec![-1.0]).is_err());
    }

    #[test]
    fn power_head() {
        // t^{-1/2} on (0, 1/4), then 2 / 2^... values
        let f = PWDecreasing::new(vec![0.0, 0.25, 1.0], vec![2.0, 1.0])
            .unwrap()
            .with_power_head(0.5)
            .unwrap();
        assert!(f.unbounded_flag());
        assert!((f.value(0.01) - 10.0).abs() < 1e-12);
        // ∫_0^{1/4} s^{-1/2} = 1
        assert!((f.primitive(0.25) - 1.0).abs() < 1e-15);
        assert!((f.primitive(1.0) - 1.75).abs() < 1e-15);
        assert!((f.maximal().eval(0.04) - 10.0).abs() < 1e-12);
        let g = PWDecreasing::new(vec![0.0, 0.25, 1.0], vec![2.0, 1.0])
            .unwrap()
            .with_power_head(1.0)
            .unwrap();
        assert_eq!(g.primitive(0.1), f64::INFINITY);
        assert_eq!(g.maximal().eval(0.5), f64::INFINITY);
    }

    #[test]
    fn dilation_and_composition() {
        let f = two_step();
        let e = f.dilate(0.5).unwrap();
        assert_eq!(e.value(0.05), 3.0);
        assert_eq!(e.value(0.2), 1.0);
        assert_eq!(e.value(0.7), 0.0);
        let d = f.dilate(2.0).unwrap();
        assert_eq!(d.value(0.39), 3.0);
        assert_eq!(d.value(0.41), 1.0);
        let c = PWDecreasing::indicator(0.25, 1.0).unwrap().compose_power(2.0).unwrap();
        assert_eq!(c.breakpoints(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn level_split_is_exact() {
        let f = PWDecreasing::from_steps(&[(0.2, 3.1), (0.6, 1.3), (1.0, 0.7)]).unwrap();
        let (hi, lo) = f.level_split(1.3).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            assert_eq!(hi.values()[i] + lo.values()[i], *v);
        }
        assert_eq!(lo.values(), &[1.3, 1.3, 0.7]);
    }

    #[test]
    fn simplify_merges() {
        let f = PWDecreasing::from_steps(&[(0.2, 1.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let s = f.simplify();
        assert_eq!(s.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(s.values(), &[1.0, 0.0]);
    }
}
