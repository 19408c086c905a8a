//! Verification campaigns: norm ratios of embedding sides on test families,
//! tracked under refinement and summarised by a reproducible verdict.

mod chain;
mod family;
mod probe;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::conj;
use crate::error::{Error, Result};
use crate::mixed::rango_norm;
use crate::spaces::SpaceSpec;
use crate::Exec;

pub use chain::{chain_spaces, default_slab_grids, run_chain_campaign, run_chain_campaign_with, ChainReport, ChainSpaces};
pub use family::{
    eval_slab, eval_witness, log_slab_profile, power_log_profile, power_slab_profile, slab, witness,
    witness_support, FamilySpec, Functional, Generator, Member, Profile, PROFILE_PIECES,
    SLAB_HALF_WIDTH, WITNESS_RADIUS,
};
pub use probe::{run_optimality_probe, Probe};
pub use report::{divergence_signature, drift, f17, Expectation, MemberRecord, Report, Role, Thresholds, Verdict};

fn default_tol() -> f64 {
    Thresholds::default().drift
}

/// A campaign as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub id: String,
    pub family: Vec<FamilySpec>,
    pub domain: String,
    pub range: String,
    pub n: usize,
    pub grids: Vec<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Defaults to `diverges` when a member is divergent, else `stable`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    #[serde(default)]
    pub seed: u64,
}

impl Campaign {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| Error::parse("campaign", e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grids.len() < 2 {
            return Err(Error::parse("grids", "at least two grid levels are needed"));
        }
        if self.grids.iter().any(|&g| g < 2) {
            return Err(Error::parse("grids", "grid sizes must be at least 2"));
        }
        if self.family.is_empty() {
            return Err(Error::parse("family", "family must not be empty"));
        }
        if self.n < 2 {
            return Err(Error::parse("n", "dimension must be at least 2"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::parse("tol", "must be positive"));
        }
        Functional::parse(&self.domain, "domain")?;
        Functional::parse(&self.range, "range")?;
        Ok(())
    }

    pub fn members(&self) -> Result<Vec<Member>> {
        let mut out = Vec::new();
        for (i, spec) in self.family.iter().enumerate() {
            out.extend(Member::from_spec(spec, i, self.seed)?);
        }
        Ok(out)
    }
}

pub fn run_embedding_campaign(c: &Campaign) -> Result<Report> {
    run_embedding_campaign_with(c, Exec::default())
}

/// Evaluates every member at every grid level. Witness members use the
/// resolution floor `N^{-n}`; slab members are sampled on the `N^n` grid.
pub fn run_embedding_campaign_with(c: &Campaign, exec: Exec) -> Result<Report> {
    c.validate()?;
    let domain = Functional::parse(&c.domain, "domain")?;
    let range = Functional::parse(&c.range, "range")?;
    let members = c.members()?;
    let levels = c.grids.len();
    let jobs: Vec<(usize, usize)> = (0..members.len())
        .flat_map(|m| (0..levels).map(move |k| (m, k)))
        .collect();
    // slab members sample big grids and parallelise inside; witnesses are
    // cheap and parallelise across jobs
    let eval = |&(m, k): &(usize, usize), inner: Exec| -> Result<(f64, f64)> {
        let cells = c.grids[k];
        match &members[m].generator {
            Generator::Witness(p) => {
                let w = witness(p, c.n, (cells as f64).powi(-(c.n as i32)))?;
                Ok((eval_witness(&w, &domain)?, eval_witness(&w, &range)?))
            }
            Generator::Slab(g) => eval_slab(&slab(g, c.n)?, cells, &domain, &range, inner),
        }
    };
    let (slab_jobs, witness_jobs): (Vec<_>, Vec<_>) = jobs
        .iter()
        .partition(|(m, _)| matches!(members[*m].generator, Generator::Slab(_)));
    let mut values: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for (job, v) in witness_jobs.iter().zip(exec.map(&witness_jobs, |j| eval(j, Exec::Sequential))) {
        values.insert(*job, v?);
    }
    for job in slab_jobs {
        values.insert(job, eval(&job, exec)?);
    }
    let mut records: Vec<MemberRecord> = members
        .iter()
        .map(|m| MemberRecord::new(m.label.clone(), m.role, m.params.clone()))
        .collect();
    for ((m, _), (d, r)) in values {
        records[m].push(d, r);
    }
    let mut notes = BTreeMap::new();
    let l1 = SpaceSpec::lebesgue(1.0)?;
    if matches!((domain, range), (Functional::Mixed(x), Functional::Ri(_)) if x == l1) {
        notes.insert("rango_identity_residual".into(), rango_residual(&members, c.n, c.grids[0])?);
    }
    let expect = c.expect.unwrap_or(if members.iter().any(|m| m.role == Role::Divergent) {
        Expectation::Diverges
    } else {
        Expectation::Stable
    });
    let thresholds = Thresholds {
        drift: c.tol,
        ..Thresholds::default()
    };
    Report::new(
        c.id.clone(),
        domain.to_string(),
        range.to_string(),
        c.n,
        "grid",
        c.grids.iter().map(|&g| g as f64).collect(),
        expect,
        thresholds,
        records,
        notes,
    )
}

/// Largest relative gap in `‖f(t^{n'})‖_{L^1} = ‖f‖_{L^{n',1}} / n'` over
/// the witness sources.
fn rango_residual(members: &[Member], n: usize, cells: usize) -> Result<f64> {
    let l1 = SpaceSpec::lebesgue(1.0)?;
    let lorentz = SpaceSpec::lorentz(conj(n), 1.0)?;
    let mut worst: f64 = 0.0;
    for m in members {
        if let Generator::Witness(p) = &m.generator {
            let f = Member::witness_source(p, n, (cells as f64).powi(-(n as i32)))?;
            let lhs = rango_norm(&f, &l1, n)?;
            let rhs = lorentz.norm(&f)? / conj(n);
            worst = worst.max((lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// Default power-log lattice for a domain whose critical power is `gc`
/// (e.g. `1/p` for `L^p`), plus an indicator control.
pub fn default_witness_family(gc: f64) -> Vec<FamilySpec> {
    let mut fam = Vec::new();
    for g in [0.0, 0.4, 0.8] {
        for d in [-1.0, 0.0, 1.0] {
            fam.push(FamilySpec::new("power-log", &[("gamma", g * gc), ("delta", d)]));
        }
    }
    fam.push(FamilySpec::new("power-log", &[("gamma", gc), ("delta", 2.0 * gc)]));
    fam.push(FamilySpec::new("indicator", &[("a", 1.0)]));
    fam
}
