//! Rearrangement-invariant space descriptors on a measure-one interval and
//! their norms, fundamental functions, associate weights and Boyd indices.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_gk, QuadOptions};
use crate::stepfn::{
    integrate_weighted, pairing, random_decreasing, weighted_sup, PWDecreasing, PiecewisePower,
    Weight, WeightSpec,
};

/// A rearrangement-invariant space, evaluated on `f*` (or `f**` for
/// weighted spaces flagged `on_maximal`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SpaceSpec {
    Lorentz { p: f64, q: f64 },
    LorentzZygmund { p: f64, q: f64, alpha: f64 },
    WeightedLq { weight: WeightSpec, q: f64, on_maximal: bool },
    Linf,
}

impl SpaceSpec {
    pub fn lebesgue(p: f64) -> Result<Self> {
        if p.is_infinite() {
            Ok(Self::Linf)
        } else {
            Self::lorentz(p, p)
        }
    }

    pub fn lorentz(p: f64, q: f64) -> Result<Self> {
        let ok = (p == 1.0 && q == 1.0)
            || (p.is_infinite() && q.is_infinite())
            || (p > 1.0 && p.is_finite() && q >= 1.0);
        if !ok {
            return Err(Error::param("p", format!("L({p},{q}) is not a Lorentz space")));
        }
        if p.is_infinite() {
            return Ok(Self::Linf);
        }
        Ok(Self::Lorentz { p, q })
    }

    pub fn lorentz_zygmund(p: f64, q: f64, alpha: f64) -> Result<Self> {
        if !(p >= 1.0 && q >= 1.0) || !alpha.is_finite() {
            return Err(Error::param(
                "p",
                format!("LZ({p},{q},{alpha}) needs 1 <= p,q <= inf and finite alpha"),
            ));
        }
        Ok(Self::LorentzZygmund { p, q, alpha })
    }

    /// Weighted `L^q` on `f*`, which needs a nonincreasing weight, or on
    /// `f**`.
    pub fn weighted(weight: WeightSpec, q: f64, on_maximal: bool) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::param("q", format!("{q} < 1")));
        }
        // C t^a (1+log 1/t)^b is nonincreasing iff a <= 0 and b >= a
        if !on_maximal && !(weight.power <= 0.0 && weight.logpow >= weight.power) {
            return Err(Error::param(
                "on_maximal",
                "weight is not nonincreasing; evaluate on f** instead",
            ));
        }
        Ok(Self::WeightedLq {
            weight,
            q,
            on_maximal,
        })
    }

    /// `(weight, q)` such that the norm is `‖w g‖_{L^q}` on `g = f*`.
    fn star_weight(&self) -> Option<(WeightSpec, f64)> {
        match *self {
            Self::Lorentz { p, q } => Some((lorentz_weight(p, q, 0.0), q)),
            Self::LorentzZygmund { p, q, alpha } => Some((lorentz_weight(p, q, alpha), q)),
            Self::WeightedLq {
                weight,
                q,
                on_maximal: false,
            } => Some((weight, q)),
            _ => None,
        }
    }

    /// Norm of a rearrangement given as a step function.
    pub fn norm(&self, f: &PWDecreasing) -> Result<f64> {
        if f.is_zero() {
            return Ok(0.0);
        }
        if let Self::Linf = self {
            return Ok(f.sup());
        }
        self.norm_piecewise(&f.to_piecewise())
    }

    /// Norm of a nonnegative nonincreasing closed-form function.
    pub fn norm_piecewise(&self, g: &PiecewisePower) -> Result<f64> {
        if g.is_zero() {
            return Ok(0.0);
        }
        match *self {
            Self::Linf => weighted_sup(g, &WeightSpec::unit(), 0.0, 1.0),
            Self::WeightedLq {
                weight,
                q,
                on_maximal: true,
            } => weighted_norm(&g.average(), &weight, q),
            _ => {
                let (w, q) = self.star_weight().expect("star-evaluated variant");
                weighted_norm(g, &w, q)
            }
        }
    }

    /// `φ_X(t) = ‖χ_(0,t)‖_X`.
    pub fn fundamental_function(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(t));
        }
        match *self {
            Self::Linf => Ok(1.0),
            Self::Lorentz { p, q } if q.is_infinite() => Ok(t.powf(1.0 / p)),
            Self::Lorentz { p, q } => Ok((p / q).powf(1.0 / q) * t.powf(1.0 / p)),
            _ => self.norm(&PWDecreasing::indicator(t, 1.0)?),
        }
    }

    /// Upper Boyd index, tabulated.
    pub fn boyd_upper(&self) -> Result<f64> {
        match *self {
            Self::Lorentz { p, .. } | Self::LorentzZygmund { p, .. } => Ok(1.0 / p),
            Self::Linf => Ok(0.0),
            Self::WeightedLq { .. } => Err(Error::Unsupported(
                "Boyd index of a general weighted space".into(),
            )),
        }
    }

    /// The associate Lorentz space, up to equivalence of norms.
    pub fn lorentz_dual(&self) -> Result<Self> {
        use crate::conj_exp;
        match *self {
            Self::Linf => Self::lorentz(1.0, 1.0),
            Self::Lorentz { p, q } if p == 1.0 && q == 1.0 => Ok(Self::Linf),
            Self::Lorentz { p, q } => Self::lorentz(conj_exp(p), conj_exp(q)),
            _ => Err(Error::Unsupported(format!("associate of {self}"))),
        }
    }
}

fn lorentz_weight(p: f64, q: f64, alpha: f64) -> WeightSpec {
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    WeightSpec {
        scale: 1.0,
        power: inv(p) - inv(q),
        logpow: alpha,
    }
}

/// `‖w g‖_{L^q(0,1)}`, `q = ∞` as a supremum.
pub fn weighted_norm(g: &PiecewisePower, w: &dyn Weight, q: f64) -> Result<f64> {
    if g.is_zero() {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return weighted_sup(g, w, 0.0, 1.0);
    }
    let v = integrate_weighted(g, w, q, 0.0, 1.0)?;
    Ok(if q == 1.0 { v } else { v.powf(1.0 / q) })
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = |x: f64| {
            if x.is_infinite() {
                "inf".to_string()
            } else {
                format!("{x}")
            }
        };
        match *self {
            Self::Linf => write!(f, "Linf"),
            Self::Lorentz { p, q } if p == q => write!(f, "L({})", n(p)),
            Self::Lorentz { p, q } => write!(f, "L({},{})", n(p), n(q)),
            Self::LorentzZygmund { p, q, alpha } => {
                write!(f, "LZ({},{},{})", n(p), n(q), n(alpha))
            }
            Self::WeightedLq {
                weight,
                q,
                on_maximal,
            } => write!(
                f,
                "{}({},{},{},{})",
                if on_maximal { "Wmax" } else { "W" },
                n(weight.scale),
                n(weight.power),
                n(weight.logpow),
                n(q)
            ),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    /// `L(p)`, `L(p,q)`, `LZ(p,q,a)`, `Linf`, plus `W(C,a,b,q)` and
    /// `Wmax(C,a,b,q)` for weighted spaces on `f*` and `f**`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let unknown = || Error::parse("space", format!("unknown space variant `{s}`"));
        if s == "Linf" || s == "L(inf)" {
            return Ok(Self::Linf);
        }
        let open = s.find('(').ok_or_else(unknown)?;
        if !s.ends_with(')') {
            return Err(unknown());
        }
        let args: Vec<f64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| match a {
                "inf" | "+inf" | "∞" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => a
                    .parse::<f64>()
                    .map_err(|_| Error::parse("space", format!("bad number `{a}` in `{s}`"))),
            })
            .collect::<Result<_>>()?;
        let bad = |e: Error| Error::parse("space", e.to_string());
        match (&s[..open], args.as_slice()) {
            ("L", [p]) => Self::lebesgue(*p).map_err(bad),
            ("L", [p, q]) => Self::lorentz(*p, *q).map_err(bad),
            ("LZ", [p, q, a]) => Self::lorentz_zygmund(*p, *q, *a).map_err(bad),
            ("W", [c, a, b, q]) => {
                Self::weighted(WeightSpec::new(*c, *a, *b).map_err(bad)?, *q, false).map_err(bad)
            }
            ("Wmax", [c, a, b, q]) => {
                Self::weighted(WeightSpec::new(*c, *a, *b).map_err(bad)?, *q, true).map_err(bad)
            }
            _ => Err(unknown()),
        }
    }
}

impl From<SpaceSpec> for String {
    fn from(s: SpaceSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for SpaceSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Outcome of the numerical checks on `v` before building its associate
/// weight.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    /// `∫_0^1 v`, must be finite.
    pub v_integral: f64,
    /// `∫_0^1 t^{-p} v^p`, must be infinite.
    pub inverse_integral: f64,
    /// `sup_r r^{-p} ∫_0^r v^p / V(r)` over a log grid, must stay bounded.
    pub ratio_max: f64,
    /// Largest ratio over the last decade of the grid divided by the
    /// largest before it.
    pub ratio_growth: f64,
}

/// `w` with `w^{p'} = (p'-1) V^{-p'} t^{-p} v^p`,
/// `V(t) = 1 + ∫_t^1 s^{-p} v(s)^p ds`, for power-log `v`.
#[derive(Clone, Debug)]
pub struct AssociateWeight {
    pub v: WeightSpec,
    pub p: f64,
    pub pp: f64,
    // s^{-p} v^p = cp s^e (1+log 1/s)^beta, and c = e + 1
    cp: f64,
    e: f64,
    beta: f64,
    c: f64,
    pub hypotheses: HypothesisReport,
}

/// Builds the associate weight after checking integrability of `v`,
/// divergence of `∫ t^{-p} v^p` and the boundedness condition on a log grid.
pub fn associate_weight(v: &WeightSpec, p: f64) -> Result<AssociateWeight> {
    let w = associate_weight_unchecked(v, p)?;
    let h = &w.hypotheses;
    if !h.v_integral.is_finite() {
        return Err(Error::Precondition("(i): v is not integrable on (0,1)".into()));
    }
    if h.inverse_integral.is_finite() {
        return Err(Error::Precondition(format!(
            "(ii): integral of t^-p v^p is finite ({})",
            h.inverse_integral
        )));
    }
    if !h.ratio_max.is_finite() || h.ratio_growth > 1.5 {
        return Err(Error::Precondition(format!(
            "(iii): ratio not bounded (max {}, growth {})",
            h.ratio_max, h.ratio_growth
        )));
    }
    Ok(w)
}

/// Same evaluator without gating on the hypotheses; they are still
/// measured and attached.
pub fn associate_weight_unchecked(v: &WeightSpec, p: f64) -> Result<AssociateWeight> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param("p", format!("{p} not in (1,inf)")));
    }
    let pp = crate::conj_exp(p);
    let e = p * (v.power - 1.0);
    let mut w = AssociateWeight {
        v: *v,
        p,
        pp,
        cp: v.scale.powf(p),
        e,
        beta: p * v.logpow,
        c: snap(e + 1.0),
        hypotheses: HypothesisReport {
            v_integral: f64::NAN,
            inverse_integral: f64::NAN,
            ratio_max: f64::NAN,
            ratio_growth: f64::NAN,
        },
    };
    w.hypotheses = w.check()?;
    Ok(w)
}

fn snap(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

impl AssociateWeight {
    fn check(&self) -> Result<HypothesisReport> {
        let one = PWDecreasing::constant(1.0)?.to_piecewise();
        let v_integral = integrate_weighted(&one, &self.v, 1.0, 0.0, 1.0)?;
        let inv = WeightSpec {
            scale: self.v.scale,
            power: self.v.power - 1.0,
            logpow: self.v.logpow,
        };
        let inverse_integral = integrate_weighted(&one, &inv, self.p, 0.0, 1.0)?;
        let ratios: Vec<f64> = (1..=48)
            .map(|k| {
                let r = 10f64.powf(-k as f64 / 4.0);
                let num = integrate_weighted(&one, &self.v, self.p, 0.0, r)?;
                let x = -r.ln();
                // r^{-p} ∫_0^r v^p / V(r), with V in log form
                Ok((num.ln() + self.p * x - self.ln_v(x)).exp())
            })
            .collect::<Result<_>>()?;
        let head = ratios[..36].iter().cloned().fold(0.0, f64::max);
        let tail = ratios[36..].iter().cloned().fold(0.0, f64::max);
        Ok(HypothesisReport {
            v_integral,
            inverse_integral,
            ratio_max: head.max(tail),
            ratio_growth: tail / head,
        })
    }

    /// Linear coefficient `L` of `ln V = L x + S(x)`.
    fn v_rate(&self) -> f64 {
        if self.c < 0.0 {
            -self.c
        } else {
            0.0
        }
    }

    /// `ln V(e^{-x}) - L x`.
    fn ln_v_sublinear(&self, x: f64) -> f64 {
        let (c, b) = (self.c, self.beta);
        if c == 0.0 {
            let j = if b == -1.0 {
                x.ln_1p()
            } else {
                ((b + 1.0) * x.ln_1p()).exp_m1() / (b + 1.0)
            };
            return (self.cp * j).ln_1p();
        }
        if c > 0.0 {
            // ∫_0^x e^{-cy} (1+y)^b dy
            let j = if b == 0.0 {
                -(-c * x).exp_m1() / c
            } else {
                chunked(&|y: f64| (-c * y + b * y.ln_1p()).exp(), x)
            };
            return (self.cp * j).ln_1p();
        }
        // V e^{c x} = e^{c x} + cp ∫_0^x e^{c u} (1+x-u)^b du
        let k = -c;
        let j = if b == 0.0 {
            -(-k * x).exp_m1() / k
        } else {
            chunked(&|u: f64| (-k * u + b * (x - u).ln_1p()).exp(), x)
        };
        ((-k * x).exp() + self.cp * j).ln()
    }

    fn ln_v(&self, x: f64) -> f64 {
        self.v_rate() * x + self.ln_v_sublinear(x)
    }

    /// `V(t)`.
    pub fn big_v(&self, t: f64) -> f64 {
        self.ln_v(-t.ln()).exp()
    }
}

/// `∫_0^x h` over dyadic chunks `[0,1], [1,2], [2,4], …`, stopping once a
/// chunk no longer moves the total.
fn chunked<F: Fn(f64) -> f64>(h: &F, x: f64) -> f64 {
    let opts = QuadOptions::default();
    let mut total = 0.0;
    let (mut a, mut b) = (0.0, 1.0f64.min(x));
    loop {
        let part = adaptive_gk(h, a, b, opts);
        total += part;
        if b >= x || (part <= 1e-17 * total && a > 64.0) {
            return total;
        }
        a = b;
        b = (2.0 * b).min(x);
    }
}

impl Weight for AssociateWeight {
    fn ln_neglog(&self, x: f64) -> f64 {
        self.ln_sublinear(x) - self.rate() * x
    }

    fn rate(&self) -> f64 {
        self.v_rate() + self.e / self.pp
    }

    fn ln_sublinear(&self, x: f64) -> f64 {
        let mut l = (self.pp - 1.0).ln() - self.pp * self.ln_v_sublinear(x) + self.cp.ln();
        if self.beta != 0.0 {
            l += self.beta * x.ln_1p();
        }
        l / self.pp
    }
}

/// Result of a randomized Hölder-type pairing check.
#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub trials: usize,
    pub violations: usize,
    pub max_ratio: f64,
}

/// Checks `∫ f* g* <= ‖f*‖_X ‖g*‖_{X'} (1 + 1e-9)` on random step pairs.
pub fn duality_pairing_check(
    x: &SpaceSpec,
    xdual: &dyn Fn(&PWDecreasing) -> Result<f64>,
    trials: usize,
    seed: u64,
) -> Result<DualityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let f = random_decreasing(&mut rng, 16);
        let g = random_decreasing(&mut rng, 16);
        let r = pairing_ratio(x, xdual, &f, &g)?;
        if r > 1.0 + 1e-9 {
            violations += 1;
        }
        max_ratio = max_ratio.max(r);
    }
    Ok(DualityReport {
        trials,
        violations,
        max_ratio,
    })
}

/// `∫ f g / (‖f‖_X ‖g‖_{X'})`, zero when the pairing vanishes.
pub fn pairing_ratio(
    x: &SpaceSpec,
    xdual: &dyn Fn(&PWDecreasing) -> Result<f64>,
    f: &PWDecreasing,
    g: &PWDecreasing,
) -> Result<f64> {
    let num = pairing(f, g)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / (x.norm(f)? * xdual(g)?))
}
