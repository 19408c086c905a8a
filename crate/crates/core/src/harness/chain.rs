//! The Sobolev chain `W^1 L^p ↪ R(X_p, L^∞) ↪ Y_p` with its strict second
//! link, checked link by link.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::SpaceSpec;
use crate::Exec;

use super::family::FamilySpec;
use super::report::{f17, Report, Verdict};
use super::{default_witness_family, run_embedding_campaign_with, Campaign};

/// `Z = L^p`, the optimal `X` of the mixed range, and the r.i. space `Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpaces {
    pub z: SpaceSpec,
    pub x: SpaceSpec,
    pub y: SpaceSpec,
    /// `1/p`, the critical power of `Z` used to place the witness lattice.
    pub z_critical: f64,
}

/// Subcritical `1 ≤ p < n`: `X = L^{p(n-1)/(n-p), p}`,
/// `Y = L^{pn/(n-p), p}`. Critical `p = n`: both are `L^{∞,n;-1}`.
pub fn chain_spaces(p: f64, n: usize) -> Result<ChainSpaces> {
    let nf = n as f64;
    if n < 2 {
        return Err(Error::param("n", "dimension must be at least 2"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", format!("{p} must be at least 1")));
    }
    if p > nf {
        return Err(Error::param("p", format!("p = {p} exceeds n = {n}")));
    }
    let z = SpaceSpec::lebesgue(p)?;
    let (x, y) = if p == nf {
        let lz = SpaceSpec::lorentz_zygmund(f64::INFINITY, nf, -1.0)?;
        (lz, lz)
    } else if p == 1.0 {
        (SpaceSpec::lebesgue(1.0)?, SpaceSpec::lorentz(crate::conj(n), 1.0)?)
    } else {
        (
            SpaceSpec::lorentz(p * (nf - 1.0) / (nf - p), p)?,
            SpaceSpec::lorentz(p * nf / (nf - p), p)?,
        )
    };
    Ok(ChainSpaces {
        z,
        x,
        y,
        z_critical: 1.0 / p,
    })
}

/// Slab family for the reverse of the second link: power profiles inside
/// `Y` (or a log profile in the critical case) and a bounded control.
fn slab_family(p: f64, n: usize) -> Vec<FamilySpec> {
    let nf = n as f64;
    let mut fam = if p == nf {
        vec![FamilySpec::new("slab-log", &[("beta", 0.25)])]
    } else {
        // t^{-γ} lies in L^{r,p} exactly when γ < 1/r
        let inv_r = (nf - p) / (p * nf);
        vec![
            FamilySpec::new("slab-power", &[("gamma", 0.5 * inv_r)]),
            FamilySpec::new("slab-power", &[("gamma", 0.8 * inv_r)]),
        ]
    };
    fam.push(FamilySpec::new("slab-indicator", &[("a", 1.0)]));
    fam
}

/// Dyadic grids for the slab refinement; the cube holds `N^n` cells.
pub fn default_slab_grids(n: usize) -> Vec<usize> {
    if n == 2 {
        vec![64, 128, 256, 512, 1024]
    } else {
        vec![8, 16, 32, 64, 128]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    #[serde(with = "f17")]
    pub p: f64,
    pub n: usize,
    /// Sobolev space into the mixed norm space.
    pub sobolev_to_mixed: Report,
    /// Mixed norm space into the r.i. space.
    pub mixed_to_ri: Report,
    /// Reverse of the second link on the slab family.
    pub strictness: Report,
    pub verdicts: [Verdict; 3],
    pub passed: bool,
}

impl ChainReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

pub fn run_chain_campaign(p: f64, n: usize, grids: &[usize]) -> Result<ChainReport> {
    run_chain_campaign_with(p, n, grids, &default_slab_grids(n), 0.15, Exec::default())
}

pub fn run_chain_campaign_with(
    p: f64,
    n: usize,
    grids: &[usize],
    slab_grids: &[usize],
    tol: f64,
    exec: Exec,
) -> Result<ChainReport> {
    let s = chain_spaces(p, n)?;
    let tag = format!("chain(p={p},n={n})");
    let witness = |id: &str, domain: String, range: String| Campaign {
        id: format!("{tag}/{id}"),
        family: default_witness_family(s.z_critical),
        domain,
        range,
        n,
        grids: grids.to_vec(),
        tol,
        expect: None,
        seed: 0,
    };
    let first = witness("sobolev-to-mixed", format!("W1:{}", s.z), format!("R:{}", s.x));
    let second = witness("mixed-to-ri", format!("R:{}", s.x), s.y.to_string());
    let reverse = Campaign {
        id: format!("{tag}/strictness"),
        family: slab_family(p, n),
        domain: s.y.to_string(),
        range: format!("R:{}", s.x),
        n,
        grids: slab_grids.to_vec(),
        tol,
        expect: None,
        seed: 0,
    };
    let a = run_embedding_campaign_with(&first, exec)?;
    let b = run_embedding_campaign_with(&second, exec)?;
    let c = run_embedding_campaign_with(&reverse, exec)?;
    let verdicts = [a.verdict, b.verdict, c.verdict];
    let passed = a.passed() && b.passed() && c.passed();
    Ok(ChainReport {
        p,
        n,
        sobolev_to_mixed: a,
        mixed_to_ri: b,
        strictness: c,
        verdicts,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spaces_of_the_chain() {
        let s = chain_spaces(1.0, 2).unwrap();
        assert_eq!(s.x.to_string(), "L(1)");
        assert_eq!(s.y.to_string(), "L(2,1)");
        let s = chain_spaces(1.5, 3).unwrap();
        assert_eq!(s.x, SpaceSpec::lorentz(2.0, 1.5).unwrap());
        assert_eq!(s.y, SpaceSpec::lorentz(3.0, 1.5).unwrap());
        let s = chain_spaces(2.0, 2).unwrap();
        assert_eq!(s.x.to_string(), "LZ(inf,2,-1)");
        assert!(chain_spaces(2.5, 2).is_err());
        assert!(chain_spaces(0.5, 2).is_err());
    }
}
