//! Piecewise sums of power-log monomials `c * t^p * (ln t)^k`.
//!
//! This is the closed-form class every operator output lives in: step
//! functions, `f**`, tail integrals `∫_t s^β f(s) ds`, and their warps
//! `t ↦ g(κ t^γ)` all stay inside it, so operator kernels never need
//! quadrature.

use crate::error::{Error, Result};
use crate::numeric::{power_integral, ExactSum};

/// Exponents closer than this to an integer threshold are snapped to it.
const SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub pow: f64,
    pub log: u32,
}

impl Term {
    pub const fn constant(c: f64) -> Self {
        Term {
            coef: c,
            pow: 0.0,
            log: 0,
        }
    }

    pub const fn power(c: f64, p: f64) -> Self {
        Term {
            coef: c,
            pow: p,
            log: 0,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        let mut v = if self.pow == 0.0 {
            self.coef
        } else {
            self.coef * t.powf(self.pow)
        };
        if self.log > 0 {
            v *= t.ln().powi(self.log as i32);
        }
        v
    }

    /// `(ln |value| + shift·x, sign)` at `t = e^{-x}`.
    fn ln_abs_neglog(&self, x: f64, shift: f64) -> (f64, f64) {
        if self.coef == 0.0 || (self.log > 0 && x == 0.0) {
            return (f64::NEG_INFINITY, 1.0);
        }
        let d = self.pow - shift;
        let mut l = self.coef.abs().ln();
        if d != 0.0 {
            l -= d * x;
        }
        let mut s = self.coef.signum();
        if self.log > 0 {
            l += self.log as f64 * x.ln();
            if self.log % 2 == 1 {
                s = -s;
            }
        }
        (l, s)
    }

    /// Antiderivative of `s^beta * self(s)` as a list of terms.
    pub fn antiderivative(&self, beta: f64) -> Vec<Term> {
        let mut out = Vec::new();
        antideriv_into(self.coef, self.pow + beta, self.log, &mut out);
        out
    }

    fn is_infinite(&self) -> bool {
        self.coef.is_infinite()
    }
}

fn antideriv_into(c: f64, e: f64, k: u32, out: &mut Vec<Term>) {
    if c == 0.0 {
        return;
    }
    let s = e + 1.0;
    if s.abs() < SNAP {
        out.push(Term {
            coef: c / (k as f64 + 1.0),
            pow: 0.0,
            log: k + 1,
        });
        return;
    }
    out.push(Term {
        coef: c / s,
        pow: s,
        log: k,
    });
    if k > 0 {
        antideriv_into(-c * k as f64 / s, e, k - 1, out);
    }
}

fn eval_terms(terms: &[Term], t: f64) -> f64 {
    terms.iter().map(|x| x.eval(t)).sum()
}

/// Definite integral of `s^beta * terms` over `[lo, hi]`, `0 <= lo < hi`.
fn integrate_terms(terms: &[Term], beta: f64, lo: f64, hi: f64) -> f64 {
    let mut acc = ExactSum::new();
    for t in terms {
        if t.coef == 0.0 {
            continue;
        }
        if t.log == 0 {
            acc.add(t.coef * power_integral(t.pow + beta, lo, hi));
        } else {
            let anti = t.antiderivative(beta);
            let upper = eval_terms(&anti, hi);
            let lower = if lo == 0.0 {
                if anti.iter().all(|a| a.pow > 0.0 || a.coef == 0.0) {
                    0.0
                } else {
                    return f64::INFINITY;
                }
            } else {
                eval_terms(&anti, lo)
            };
            acc.add(upper - lower);
        }
    }
    acc.value()
}

/// Merges like terms and drops zeros.
fn normalize(mut terms: Vec<Term>) -> Vec<Term> {
    for t in terms.iter_mut() {
        if t.pow.abs() < SNAP {
            t.pow = 0.0;
        }
    }
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        if t.coef == 0.0 {
            continue;
        }
        if let Some(o) = out
            .iter_mut()
            .find(|o| o.log == t.log && (o.pow - t.pow).abs() < SNAP)
        {
            o.coef += t.coef;
        } else {
            out.push(t);
        }
    }
    out.retain(|t| t.coef != 0.0);
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A function on `(0, 1)` that equals a finite sum of power-log monomials on
/// each piece `[b_i, b_{i+1})` and vanishes on `[b_m, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePower {
    breaks: Vec<f64>,
    pieces: Vec<Vec<Term>>,
}

impl PiecewisePower {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Vec<Term>>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 {
            return Err(Error::InvalidStep(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks.first() != Some(&0.0) {
            return Err(Error::InvalidStep("first breakpoint must be 0".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidStep(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if *breaks.last().unwrap() > 1.0 {
            return Err(Error::InvalidStep("breakpoints must not exceed 1".into()));
        }
        let pieces = pieces.into_iter().map(normalize).collect();
        Ok(Self { breaks, pieces })
    }

    pub(crate) fn from_parts_unchecked(breaks: Vec<f64>, pieces: Vec<Vec<Term>>) -> Self {
        let pieces = pieces.into_iter().map(normalize).collect();
        Self { breaks, pieces }
    }

    pub fn zero() -> Self {
        Self {
            breaks: vec![0.0, 1.0],
            pieces: vec![Vec::new()],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Vec<Term>] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Right end of the support.
    pub fn end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.is_empty())
    }

    /// Interior breakpoints in `(0, 1)`, including the end of support.
    pub fn knots(&self) -> Vec<f64> {
        self.breaks
            .iter()
            .copied()
            .filter(|&b| b > 0.0 && b < 1.0)
            .collect()
    }

    pub fn has_infinite_piece(&self) -> bool {
        self.pieces.iter().flatten().any(Term::is_infinite)
    }

    /// Index of the piece containing `t`, or `None` beyond the support.
    pub fn piece_index(&self, t: f64) -> Option<usize> {
        if t >= self.end() {
            return None;
        }
        let i = self.breaks.partition_point(|&b| b <= t);
        Some(i.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.value_at_zero();
        }
        match self.piece_index(t) {
            None => 0.0,
            Some(i) => eval_terms(&self.pieces[i], t),
        }
    }

    /// Value on piece `i` at `t`, without the lookup.
    #[inline]
    pub fn eval_piece(&self, i: usize, t: f64) -> f64 {
        eval_terms(&self.pieces[i], t)
    }

    /// `ln self(t)` at `t = e^{-x}` on piece `i`. Returns `-inf` where the
    /// value is zero or rounds to non-positive.
    pub fn ln_eval_piece_neglog(&self, i: usize, x: f64) -> f64 {
        self.ln_eval_piece_shifted(i, x, 0.0)
    }

    /// Smallest exponent present on piece `i`, which governs `t -> 0`.
    pub fn piece_rate(&self, i: usize) -> f64 {
        self.pieces[i]
            .iter()
            .filter(|t| t.coef != 0.0)
            .map(|t| t.pow)
            .fold(f64::INFINITY, f64::min)
            .min(f64::MAX)
    }

    /// `ln self(e^{-x}) + piece_rate(i) · x`, free of the linear cancellation
    /// that would swamp it for huge `x`.
    pub fn ln_eval_piece_sublinear(&self, i: usize, x: f64) -> f64 {
        let r = self.piece_rate(i);
        self.ln_eval_piece_shifted(i, x, if r == f64::MAX { 0.0 } else { r })
    }

    fn ln_eval_piece_shifted(&self, i: usize, x: f64, shift: f64) -> f64 {
        let terms = &self.pieces[i];
        match terms.len() {
            0 => f64::NEG_INFINITY,
            1 => {
                let (l, s) = terms[0].ln_abs_neglog(x, shift);
                if s > 0.0 {
                    l
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => {
                let parts: Vec<(f64, f64)> =
                    terms.iter().map(|t| t.ln_abs_neglog(x, shift)).collect();
                let m = parts
                    .iter()
                    .map(|p| p.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                if m == f64::NEG_INFINITY {
                    return m;
                }
                if m == f64::INFINITY {
                    let s: f64 = parts
                        .iter()
                        .filter(|p| p.0 == f64::INFINITY)
                        .map(|p| p.1)
                        .sum();
                    return if s > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
                }
                let s: f64 = parts.iter().map(|p| p.1 * (p.0 - m).exp()).sum();
                if s > 0.0 {
                    m + s.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Limit of the function as `t -> 0+` (may be infinite).
    pub fn value_at_zero(&self) -> f64 {
        let Some(first) = self.pieces.first() else {
            return 0.0;
        };
        // terms blowing up at 0 dominate; otherwise only constants survive
        let mut worst: Option<&Term> = None;
        for t in first {
            if t.coef == 0.0 {
                continue;
            }
            if t.coef.is_infinite() {
                return t.coef;
            }
            let blows = t.pow < 0.0 || (t.pow == 0.0 && t.log > 0);
            if blows {
                worst = match worst {
                    None => Some(t),
                    Some(w) if t.pow < w.pow || (t.pow == w.pow && t.log > w.log) => Some(t),
                    keep => keep,
                };
            }
        }
        if let Some(w) = worst {
            let sign = if w.log % 2 == 1 { -w.coef.signum() } else { w.coef.signum() };
            return sign * f64::INFINITY;
        }
        first
            .iter()
            .filter(|t| t.pow == 0.0 && t.log == 0)
            .map(|t| t.coef)
            .sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                p.iter()
                    .map(|t| Term {
                        coef: t.coef * c,
                        ..*t
                    })
                    .collect()
            })
            .collect();
        Self::from_parts_unchecked(self.breaks.clone(), pieces)
    }

    /// Pointwise product with `t^beta`.
    pub fn mul_power(&self, beta: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                p.iter()
                    .map(|t| Term {
                        pow: t.pow + beta,
                        ..*t
                    })
                    .collect()
            })
            .collect();
        Self::from_parts_unchecked(self.breaks.clone(), pieces)
    }

    /// Pointwise sum; the result lives on the union of both partitions.
    pub fn add(&self, other: &Self) -> Self {
        let mut bs: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        bs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bs.dedup();
        let mut pieces = Vec::with_capacity(bs.len() - 1);
        for w in bs.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut terms = Vec::new();
            if let Some(i) = self.piece_index(mid) {
                terms.extend_from_slice(&self.pieces[i]);
            }
            if let Some(j) = other.piece_index(mid) {
                terms.extend_from_slice(&other.pieces[j]);
            }
            pieces.push(terms);
        }
        Self::from_parts_unchecked(bs, pieces)
    }

    /// `t ↦ self(κ t^γ)`, restricted to `(0, 1)`.
    pub fn warp(&self, kappa: f64, gamma: f64) -> Self {
        assert!(kappa > 0.0 && gamma > 0.0, "warp needs positive scale and exponent");
        let lk = kappa.ln();
        let mut breaks = vec![0.0];
        let mut pieces = Vec::new();
        for (i, terms) in self.pieces.iter().enumerate() {
            let hi = (self.breaks[i + 1] / kappa).powf(1.0 / gamma);
            let hi = if i + 1 == self.pieces.len() || hi >= 1.0 {
                hi.min(1.0)
            } else {
                hi
            };
            if hi <= *breaks.last().unwrap() {
                continue;
            }
            let mut out = Vec::new();
            for t in terms {
                let base = t.coef * kappa.powf(t.pow);
                let pow = gamma * t.pow;
                if t.log == 0 || base.is_infinite() {
                    out.push(Term::power(base, pow));
                    continue;
                }
                // (ln κ + γ ln t)^k expanded
                for j in 0..=t.log {
                    let c = base
                        * binomial(t.log, j)
                        * lk.powi((t.log - j) as i32)
                        * gamma.powi(j as i32);
                    out.push(Term { coef: c, pow, log: j });
                }
            }
            breaks.push(hi);
            pieces.push(out);
            if hi >= 1.0 {
                break;
            }
        }
        if pieces.is_empty() {
            return Self::zero();
        }
        Self::from_parts_unchecked(breaks, pieces)
    }

    /// `t ↦ ∫_t^end s^β self(s) ds`. Finite for `t > 0`; may be infinite as
    /// `t -> 0+`.
    pub fn tail_integral(&self, beta: f64) -> Self {
        let m = self.pieces.len();
        let mut full = vec![0.0; m];
        for i in 1..m {
            full[i] = integrate_terms(&self.pieces[i], beta, self.breaks[i], self.breaks[i + 1]);
        }
        let mut suffix = vec![0.0; m + 1];
        let mut acc = ExactSum::new();
        for i in (1..m).rev() {
            acc.add(full[i]);
            suffix[i] = acc.value();
        }
        let mut pieces = Vec::with_capacity(m);
        for i in 0..m {
            let terms = &self.pieces[i];
            if terms.iter().any(Term::is_infinite) {
                pieces.push(vec![Term::constant(f64::INFINITY)]);
                continue;
            }
            let hi = self.breaks[i + 1];
            let mut out = Vec::new();
            let mut c = ExactSum::new();
            c.add(suffix[i + 1]);
            for t in terms {
                for a in t.antiderivative(beta) {
                    c.add(a.eval(hi));
                    out.push(Term {
                        coef: -a.coef,
                        ..a
                    });
                }
            }
            out.push(Term::constant(c.value()));
            pieces.push(out);
        }
        Self::from_parts_unchecked(self.breaks.clone(), pieces)
    }

    /// `∫_0^1 self`, possibly infinite.
    pub fn integral(&self) -> f64 {
        self.integral_with_power(0.0)
    }

    /// `∫_0^1 s^β self(s) ds`.
    pub fn integral_with_power(&self, beta: f64) -> f64 {
        let mut acc = ExactSum::new();
        for (i, terms) in self.pieces.iter().enumerate() {
            if terms.iter().any(Term::is_infinite) {
                return f64::INFINITY;
            }
            acc.add(integrate_terms(terms, beta, self.breaks[i], self.breaks[i + 1]));
        }
        acc.value()
    }

    /// The averaged function `t ↦ t^{-1} ∫_0^t self`, extended past the
    /// support as `F(end)/t`.
    pub fn average(&self) -> Self {
        let m = self.pieces.len();
        let mut breaks = self.breaks.clone();
        if self.is_zero() {
            return Self::zero();
        }
        let head_integrable = self.pieces[0].iter().all(|t| {
            !t.is_infinite()
                && t.antiderivative(0.0)
                    .iter()
                    .all(|a| a.pow > 0.0 || a.coef == 0.0)
        });
        if !head_integrable {
            if self.end() < 1.0 {
                breaks.push(1.0);
            }
            let pieces = vec![vec![Term::constant(f64::INFINITY)]; breaks.len() - 1];
            return Self::from_parts_unchecked(breaks, pieces);
        }
        let mut prefix = vec![0.0; m + 1];
        let mut acc = ExactSum::new();
        for i in 0..m {
            acc.add(integrate_terms(&self.pieces[i], 0.0, self.breaks[i], self.breaks[i + 1]));
            prefix[i + 1] = acc.value();
        }
        let mut pieces = Vec::with_capacity(m + 1);
        for i in 0..m {
            let lo = self.breaks[i];
            let mut out = Vec::new();
            let mut c = ExactSum::new();
            c.add(prefix[i]);
            for t in &self.pieces[i] {
                for a in t.antiderivative(0.0) {
                    if lo > 0.0 {
                        c.add(-a.eval(lo));
                    }
                    out.push(Term {
                        pow: a.pow - 1.0,
                        ..a
                    });
                }
            }
            out.push(Term::power(c.value(), -1.0));
            pieces.push(out);
        }
        if self.end() < 1.0 {
            breaks.push(1.0);
            pieces.push(vec![Term::power(prefix[m], -1.0)]);
        }
        Self::from_parts_unchecked(breaks, pieces)
    }

    /// Symbolic derivative.
    pub fn derivative(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut out = Vec::new();
                for t in p {
                    // d/dt c t^p (ln t)^k = c p t^{p-1} (ln t)^k + c k t^{p-1} (ln t)^{k-1}
                    if t.pow != 0.0 {
                        out.push(Term {
                            coef: t.coef * t.pow,
                            pow: t.pow - 1.0,
                            log: t.log,
                        });
                    }
                    if t.log > 0 {
                        out.push(Term {
                            coef: t.coef * t.log as f64,
                            pow: t.pow - 1.0,
                            log: t.log - 1,
                        });
                    }
                }
                out
            })
            .collect();
        Self::from_parts_unchecked(self.breaks.clone(), pieces)
    }
}
