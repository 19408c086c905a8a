//! Optimality probe: a parameter sweep over power-log witnesses looking for
//! ratios `‖u‖_{R(X₂,L^∞)} / ‖u‖_{W^1 Z}` that grow without bound as the
//! profiles resolve deeper singularities.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::spaces::SpaceSpec;
use crate::Exec;

use super::family::{eval_witness, witness, Functional, Profile};
use super::report::{Expectation, MemberRecord, Report, Role, Thresholds};

#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub id: String,
    /// `Z` of the Sobolev domain.
    pub domain: SpaceSpec,
    /// The optimal `X`; swept as the control arm.
    pub target: SpaceSpec,
    /// The smaller candidate `X₂`.
    pub candidate: SpaceSpec,
    pub n: usize,
    /// Log-depths `L`; the profiles are resolved down to `t = e^{-L}`.
    pub depths: Vec<f64>,
    /// Coarse lattice; the second stage refines around the best point.
    pub gammas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub tol: f64,
}

impl Probe {
    /// Default depths and lattice placed around the critical power `1/p`
    /// of a Lebesgue or Lorentz domain.
    pub fn new(domain: SpaceSpec, target: SpaceSpec, candidate: SpaceSpec, n: usize) -> Result<Self> {
        let gc = match domain {
            SpaceSpec::Lorentz { p, .. } => 1.0 / p,
            _ => return Err(Error::param("domain", "the probe needs a Lebesgue or Lorentz domain")),
        };
        Ok(Self {
            id: format!("probe(W1:{domain} -> R:{candidate})"),
            domain,
            target,
            candidate,
            n,
            depths: default_depths(),
            gammas: [0.5, 0.75, 0.9, 1.0].iter().map(|g| g * gc).collect(),
            deltas: [0.0, 0.5, 1.0, 1.5, 2.0].iter().map(|d| d * gc).collect(),
            tol: Thresholds::default().drift,
        })
    }

    /// Probe of `W^1 L^p` against `L^{p(n-1)/(n-p), p-ε}`, with the optimal
    /// `L^{p(n-1)/(n-p), p}` as control.
    pub fn lorentz(p: f64, n: usize, eps: f64) -> Result<Self> {
        let nf = n as f64;
        if !(p > 1.0 && p < nf) {
            return Err(Error::param("p", format!("{p} not in (1, n)")));
        }
        if !(eps > 0.0 && eps <= p - 1.0) {
            return Err(Error::param("eps", format!("{eps} not in (0, p-1]")));
        }
        let r = p * (nf - 1.0) / (nf - p);
        let mut probe = Self::new(
            SpaceSpec::lebesgue(p)?,
            SpaceSpec::lorentz(r, p)?,
            SpaceSpec::lorentz(r, p - eps)?,
            n,
        )?;
        probe.id = format!("probe(p={p},n={n},eps={eps})");
        Ok(probe)
    }
}

pub fn default_depths() -> Vec<f64> {
    vec![16.0, 32.0, 64.0, 128.0, 256.0]
}

fn lattice_step(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min).min(1.0)
}

/// Ratio at one lattice point.
fn ratio(p: &Probe, x: &SpaceSpec, t_min: f64, gamma: f64, delta: f64) -> Result<f64> {
    let w = witness(&Profile::PowerLog { gamma, delta }, p.n, t_min)?;
    let d = eval_witness(&w, &Functional::Sobolev(p.domain))?;
    let r = eval_witness(&w, &Functional::Mixed(*x))?;
    Ok(r / d)
}

/// Best ratio at depth `l` after a coarse sweep and one refinement.
fn sweep(p: &Probe, x: &SpaceSpec, l: f64, exec: Exec) -> Result<(f64, f64, f64)> {
    let t_min = (-l).exp();
    let coarse: Vec<(f64, f64)> = p
        .gammas
        .iter()
        .flat_map(|&g| p.deltas.iter().map(move |&d| (g, d)))
        .collect();
    let best = |pts: &[(f64, f64)]| -> Result<(f64, f64, f64)> {
        let vals = exec.map(pts, |&(g, d)| ratio(p, x, t_min, g, d));
        let mut out = (f64::NEG_INFINITY, 0.0, 0.0);
        for (&(g, d), v) in pts.iter().zip(vals) {
            let v = v?;
            if v > out.0 {
                out = (v, g, d);
            }
        }
        Ok(out)
    };
    let (v0, g0, d0) = best(&coarse)?;
    let (hg, hd) = (0.5 * lattice_step(&p.gammas), 0.5 * lattice_step(&p.deltas));
    let inside = |v: f64, lat: &[f64]| {
        v >= lat.iter().cloned().fold(f64::INFINITY, f64::min)
            && v <= lat.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    let fine: Vec<(f64, f64)> = [-1.0, 0.0, 1.0]
        .iter()
        .flat_map(|&a| [-1.0, 0.0, 1.0].iter().map(move |&b| (g0 + a * hg, d0 + b * hd)))
        .filter(|&(g, d)| inside(g, &p.gammas) && inside(d, &p.deltas))
        .collect();
    let (v1, g1, d1) = best(&fine)?;
    Ok(if v1 > v0 { (v1, g1, d1) } else { (v0, g0, d0) })
}

pub fn run_optimality_probe(p: &Probe) -> Result<Report> {
    run_optimality_probe_with(p, Exec::default())
}

/// Sweeps candidate and target at each depth. Members are normalised to
/// unit Sobolev norm, so the recorded domain norms are 1.
pub fn run_optimality_probe_with(p: &Probe, exec: Exec) -> Result<Report> {
    if p.depths.len() < 2 || p.gammas.is_empty() || p.deltas.is_empty() {
        return Err(Error::param("depths", "need two depths and a non-empty lattice"));
    }
    let mut cand = MemberRecord::new(format!("sweep:{}", p.candidate), Role::Divergent, BTreeMap::new());
    let mut ctl = MemberRecord::new(format!("sweep:{}", p.target), Role::Control, BTreeMap::new());
    let mut notes = BTreeMap::new();
    for (k, &l) in p.depths.iter().enumerate() {
        let (vc, gc, dc) = sweep(p, &p.candidate, l, exec)?;
        let (vt, gt, dt) = sweep(p, &p.target, l, exec)?;
        cand.push(1.0, vc);
        ctl.push(1.0, vt);
        notes.insert(format!("candidate_argmax_gamma[{k}]"), gc);
        notes.insert(format!("candidate_argmax_delta[{k}]"), dc);
        notes.insert(format!("target_argmax_gamma[{k}]"), gt);
        notes.insert(format!("target_argmax_delta[{k}]"), dt);
    }
    Report::new(
        p.id.clone(),
        format!("W1:{}", p.domain),
        format!("R:{}", p.candidate),
        p.n,
        "log-depth",
        p.depths.clone(),
        Expectation::Diverges,
        Thresholds {
            drift: p.tol,
            ..Thresholds::default()
        },
        vec![cand, ctl],
        notes,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Verdict;

    #[test]
    fn lorentz_probe_bounds() {
        assert!(Probe::lorentz(1.0, 2, 0.25).is_err());
        assert!(Probe::lorentz(1.5, 2, 0.75).is_err());
        let p = Probe::lorentz(1.5, 3, 0.25).unwrap();
        assert_eq!(p.candidate, SpaceSpec::lorentz(2.0, 1.25).unwrap());
    }

    #[test]
    fn shallow_probe_records_the_argmax() {
        let mut p = Probe::lorentz(1.5, 2, 0.25).unwrap();
        p.depths = vec![16.0, 32.0];
        let r = run_optimality_probe_with(&p, Exec::Sequential).unwrap();
        assert_eq!(r.members[0].ratios.len(), 2);
        assert!(r.members[0].ratios[1] > r.members[0].ratios[0]);
        assert!(r.notes.contains_key("candidate_argmax_gamma[1]"));
        // two levels cannot show the divergence signature
        assert_eq!(r.verdict, Verdict::Unstable);
    }
}
