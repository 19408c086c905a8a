//! Test families and the functionals evaluated on them.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixed::mixed_norm_with;
use crate::rearrange::SlabProfile;
use crate::spaces::SpaceSpec;
use crate::stepfn::{random_decreasing, PWDecreasing};
use crate::witness::{make_slab_counterexample, make_sobolev_witness, section_omega, SobolevWitness};
use crate::Exec;

use super::report::Role;

/// Pieces of a sampled power-log profile.
pub const PROFILE_PIECES: usize = 512;
/// Radius of the witness ball.
pub const WITNESS_RADIUS: f64 = 0.45;
/// Half-width of the slab.
pub const SLAB_HALF_WIDTH: f64 = 0.25;

/// A side of an embedding: `W1:Z` (Sobolev space over `Z`), `R:X` (mixed
/// norm space `R(X, L^∞)`) or a plain r.i. space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    Sobolev(SpaceSpec),
    Mixed(SpaceSpec),
    Ri(SpaceSpec),
}

impl Functional {
    pub fn parse(s: &str, field: &str) -> Result<Self> {
        let s = s.trim();
        let space = |t: &str| {
            t.parse::<SpaceSpec>().map_err(|e| match e {
                Error::Parse { reason, .. } => Error::parse(field, reason),
                e => Error::parse(field, e.to_string()),
            })
        };
        if let Some(rest) = s.strip_prefix("W1:") {
            Ok(Self::Sobolev(space(rest)?))
        } else if let Some(rest) = s.strip_prefix("R:") {
            Ok(Self::Mixed(space(rest)?))
        } else {
            Ok(Self::Ri(space(s)?))
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sobolev(z) => write!(f, "W1:{z}"),
            Self::Mixed(x) => write!(f, "R:{x}"),
            Self::Ri(y) => write!(f, "{y}"),
        }
    }
}

/// One generator from a campaign file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

impl FamilySpec {
    pub fn new(kind: &str, params: &[(&str, f64)]) -> Self {
        Self {
            kind: kind.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            role: None,
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = Some(role);
        self
    }
}

/// Source of the rearrangement of a member at a given resolution.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `t^{-γ}(1 + log 1/t)^{-δ}`, made nonincreasing, on `(0, M)`.
    PowerLog { gamma: f64, delta: f64 },
    /// `χ_(0, aM)`.
    Indicator { a: f64 },
    /// Fixed random step function squeezed into `(0, M)`.
    Random(PWDecreasing),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Witness(Profile),
    Slab(PWDecreasing),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub label: String,
    pub role: Role,
    pub params: BTreeMap<String, f64>,
    pub generator: Generator,
}

fn get(spec: &FamilySpec, field: &str, key: &str, default: Option<f64>) -> Result<f64> {
    match (spec.params.get(key), default) {
        (Some(&v), _) if v.is_finite() => Ok(v),
        (Some(v), _) => Err(Error::parse(format!("{field}.params.{key}"), format!("{v} is not finite"))),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(Error::parse(format!("{field}.params.{key}"), "missing")),
    }
}

/// Nonincreasing envelope of `t^{-γ}(1 + log 1/t)^{-δ}` sampled on
/// `pieces` log-spaced breakpoints from `t_min` to 1; constant below `t_min`.
pub fn power_log_profile(gamma: f64, delta: f64, t_min: f64, pieces: usize) -> Result<PWDecreasing> {
    if !(t_min > 0.0 && t_min < 1.0) {
        return Err(Error::param("t_min", format!("{t_min} not in (0,1)")));
    }
    let lo = t_min.ln();
    let mut breaks = Vec::with_capacity(pieces + 1);
    breaks.push(0.0);
    for i in 0..pieces {
        breaks.push((lo * (1.0 - i as f64 / (pieces - 1) as f64)).exp());
    }
    *breaks.last_mut().unwrap() = 1.0;
    let phi = |t: f64| {
        let t = t.max(t_min);
        let x = -t.ln();
        (gamma * x - delta * (1.0 + x).ln()).exp()
    };
    PWDecreasing::sample(phi, breaks)
}

/// `t^{-γ}` on `(0, 1)` as a single power-headed piece.
pub fn power_slab_profile(gamma: f64) -> Result<PWDecreasing> {
    PWDecreasing::constant(1.0)?.with_power_head(gamma)
}

/// Depth and piece count of the log slab profile.
const LOG_SLAB_FLOOR: f64 = 1e-60;
const LOG_SLAB_PIECES: usize = 2048;

/// `(1 + log 1/t)^β` sampled down to `t = 1e-60`. Bounded, but the clip
/// lies far below the finest grid cell.
pub fn log_slab_profile(beta: f64) -> Result<PWDecreasing> {
    if beta <= 0.0 {
        return Err(Error::param("beta", "must be positive"));
    }
    power_log_profile(0.0, -beta, LOG_SLAB_FLOOR, LOG_SLAB_PIECES)
}

impl Member {
    /// Builds the `i`-th entry of a campaign family. The `random` kind
    /// expands to `count` members drawn from `seed`.
    pub fn from_spec(spec: &FamilySpec, i: usize, seed: u64) -> Result<Vec<Member>> {
        let field = format!("family[{i}]");
        let one = |label: String, role: Role, generator: Generator| {
            Ok(vec![Member {
                label,
                role: spec.role.unwrap_or(role),
                params: spec.params.clone(),
                generator,
            }])
        };
        match spec.kind.as_str() {
            "power-log" => {
                let gamma = get(spec, &field, "gamma", None)?;
                let delta = get(spec, &field, "delta", Some(0.0))?;
                if gamma < 0.0 {
                    return Err(Error::parse(format!("{field}.params.gamma"), "must be >= 0"));
                }
                one(
                    format!("power-log(gamma={gamma},delta={delta})"),
                    Role::Family,
                    Generator::Witness(Profile::PowerLog { gamma, delta }),
                )
            }
            "indicator" => {
                let a = get(spec, &field, "a", Some(1.0))?;
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::parse(format!("{field}.params.a"), "must lie in (0,1]"));
                }
                one(format!("indicator(a={a})"), Role::Control, Generator::Witness(Profile::Indicator { a }))
            }
            "random" => {
                let count = get(spec, &field, "count", Some(8.0))?;
                let pieces = get(spec, &field, "pieces", Some(16.0))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                (0..count.max(0.0) as usize)
                    .map(|j| {
                        let f = random_decreasing(&mut rng, pieces.max(1.0) as usize);
                        Ok(Member {
                            label: format!("random[{j}]"),
                            role: spec.role.unwrap_or(Role::Family),
                            params: spec.params.clone(),
                            generator: Generator::Witness(Profile::Random(f)),
                        })
                    })
                    .collect()
            }
            "slab-power" => {
                let gamma = get(spec, &field, "gamma", None)?;
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::parse(format!("{field}.params.gamma"), "must lie in (0,1)"));
                }
                one(
                    format!("slab-power(gamma={gamma})"),
                    Role::Divergent,
                    Generator::Slab(power_slab_profile(gamma)?),
                )
            }
            "slab-log" => {
                let beta = get(spec, &field, "beta", None)?;
                if beta <= 0.0 {
                    return Err(Error::parse(format!("{field}.params.beta"), "must be positive"));
                }
                one(format!("slab-log(beta={beta})"), Role::Divergent, Generator::Slab(log_slab_profile(beta)?))
            }
            "slab-indicator" => {
                let a = get(spec, &field, "a", Some(1.0))?;
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::parse(format!("{field}.params.a"), "must lie in (0,1]"));
                }
                one(
                    format!("slab-indicator(a={a})"),
                    Role::Control,
                    Generator::Slab(PWDecreasing::indicator(a, 1.0)?),
                )
            }
            other => Err(Error::parse(format!("{field}.kind"), format!("unknown family kind `{other}`"))),
        }
    }

    /// `f*` of the witness source at grid level `cells` in dimension `n`.
    /// The resolution floor is the measure of one cell, `cells^{-n}`.
    pub fn witness_source(profile: &Profile, n: usize, t_min: f64) -> Result<PWDecreasing> {
        let m = witness_support(n);
        match profile {
            Profile::PowerLog { gamma, delta } => {
                power_log_profile(*gamma, *delta, t_min, PROFILE_PIECES)?.dilate(m)
            }
            Profile::Indicator { a } => PWDecreasing::indicator(a * m, 1.0),
            Profile::Random(f) => f.dilate(m),
        }
    }
}

/// Measure coordinate of the witness ball, `ω_{n-1}^{n'} r^n`.
pub fn witness_support(n: usize) -> f64 {
    section_omega(n) * WITNESS_RADIUS.powi(n as i32)
}

pub fn witness(profile: &Profile, n: usize, t_min: f64) -> Result<SobolevWitness> {
    make_sobolev_witness(&Member::witness_source(profile, n, t_min)?, WITNESS_RADIUS, n)
}

/// Value of a functional on a witness.
pub fn eval_witness(w: &SobolevWitness, side: &Functional) -> Result<f64> {
    match side {
        Functional::Sobolev(z) => w.sobolev_norm(z),
        Functional::Mixed(x) => w.mixed_norm(x),
        Functional::Ri(y) => y.norm_piecewise(&w.u_star()),
    }
}

pub fn slab(g: &PWDecreasing, n: usize) -> Result<SlabProfile> {
    if g.unbounded_flag() {
        make_slab_counterexample(g, SLAB_HALF_WIDTH, n)
    } else {
        SlabProfile::new(g.clone(), SLAB_HALF_WIDTH, n - 1, n)
    }
}

/// Both functionals of a slab member on the `cells^n` grid.
pub fn eval_slab(
    s: &SlabProfile,
    cells: usize,
    domain: &Functional,
    range: &Functional,
    exec: Exec,
) -> Result<(f64, f64)> {
    let grid = s.sample(cells)?;
    let eval = |side: &Functional| match side {
        Functional::Ri(y) => y.norm(&grid.rearrangement_with(exec)),
        Functional::Mixed(x) => Ok(mixed_norm_with(&grid, x, exec)?.total),
        Functional::Sobolev(_) => Err(Error::Unsupported(
            "slab members have no weak gradient on the grid; use an r.i. or mixed side".into(),
        )),
    };
    Ok((eval(domain)?, eval(range)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_log_is_clipped_and_monotone() {
        let f = power_log_profile(0.5, 0.0, 1e-6, 64).unwrap();
        assert_eq!(f.len(), 64);
        assert!((f.values()[0] - 1e3).abs() < 1e-9);
        let tail = f.values()[63];
        assert!(tail >= 1.0 && tail < 1.2);
        // δ > γ would rise near t = 1; the envelope keeps it flat
        let g = power_log_profile(0.0, 1.0, 1e-6, 64).unwrap();
        assert!(g.values().iter().all(|&v| v == g.values()[0]));
    }

    #[test]
    fn functional_grammar() {
        assert_eq!(
            Functional::parse("W1:L(1)", "domain").unwrap(),
            Functional::Sobolev(SpaceSpec::lebesgue(1.0).unwrap())
        );
        assert!(matches!(Functional::parse("R:LZ(inf,2,-1)", "range").unwrap(), Functional::Mixed(_)));
        let e = Functional::parse("R:Q(2)", "range").unwrap_err();
        assert!(e.to_string().contains("`range`") && e.to_string().contains("unknown space variant"), "{e}");
        assert_eq!(Functional::parse("L(2,1)", "x").unwrap().to_string(), "L(2,1)");
    }

    #[test]
    fn member_kinds() {
        let m = Member::from_spec(&FamilySpec::new("indicator", &[]), 0, 0).unwrap();
        assert_eq!(m[0].role, Role::Control);
        let r = Member::from_spec(&FamilySpec::new("random", &[("count", 3.0)]), 1, 7).unwrap();
        assert_eq!(r.len(), 3);
        let e = Member::from_spec(&FamilySpec::new("sphere", &[]), 4, 0).unwrap_err();
        assert!(e.to_string().contains("family[4].kind"));
        let e = Member::from_spec(&FamilySpec::new("power-log", &[]), 2, 0).unwrap_err();
        assert!(e.to_string().contains("family[2].params.gamma"));
    }

    #[test]
    fn log_slab_is_bounded_but_deep() {
        let g = log_slab_profile(0.25).unwrap();
        assert!(!g.unbounded_flag());
        assert!(g.sup() >= (1.0f64 + 138.0).powf(0.25));
        let s = slab(&g, 2).unwrap();
        assert_eq!(s.axis, 1);
    }
}
