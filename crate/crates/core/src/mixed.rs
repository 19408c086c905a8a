//! Sections `ψ_k(f, L^∞)`, mixed norms `R(X, L^∞)` and the rango norm
//! `‖f*(t^{n'})‖_X`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rearrange::{GridFunction, SlabProfile};
use crate::spaces::SpaceSpec;
use crate::stepfn::PWDecreasing;

/// `ψ_k(f, L^∞)`: the maximum of `|f|` along axis `k` (0-based), a grid
/// function of one dimension less.
pub fn psi_k(f: &GridFunction, k: usize) -> Result<GridFunction> {
    psi_k_with(f, k, Exec::default())
}

pub fn psi_k_with(f: &GridFunction, k: usize, exec: Exec) -> Result<GridFunction> {
    section(f, k, exec, |line| line.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Section with an `L^q` norm along the axis instead of the maximum.
#[doc(hidden)]
pub fn psi_k_lq(f: &GridFunction, k: usize, q: f64) -> Result<GridFunction> {
    let inv = 1.0 / f.cells_per_axis() as f64;
    section(f, k, Exec::default(), |line| {
        (line.iter().map(|v| v.abs().powf(q)).sum::<f64>() * inv).powf(1.0 / q)
    })
}

fn section<F>(f: &GridFunction, k: usize, exec: Exec, reduce: F) -> Result<GridFunction>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let (n, cells) = (f.dim(), f.cells_per_axis());
    if n < 2 {
        return Err(Error::param("n", "sections need n >= 2"));
    }
    if k >= n {
        return Err(Error::param("axis", format!("axis {k} out of range for n = {n}")));
    }
    let inner = cells.pow((n - 1 - k) as u32);
    let outer = f.len() / (inner * cells);
    let values = f.values();
    let out = exec.map_range(outer * inner, |j| {
        let (o, i) = (j / inner, j % inner);
        let base = o * inner * cells + i;
        let line: Vec<f64> = (0..cells).map(|c| values[base + c * inner]).collect();
        reduce(&line)
    });
    GridFunction::new(n - 1, cells, out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedNormResult {
    pub per_axis: Vec<f64>,
    pub total: f64,
    #[serde(skip)]
    pub psi_rearrangements: Vec<PWDecreasing>,
}

/// `Σ_k ‖ψ_k*‖_X`.
pub fn mixed_norm(f: &GridFunction, x: &SpaceSpec) -> Result<MixedNormResult> {
    mixed_norm_with(f, x, Exec::default())
}

pub fn mixed_norm_with(f: &GridFunction, x: &SpaceSpec, exec: Exec) -> Result<MixedNormResult> {
    let psis = (0..f.dim())
        .map(|k| Ok(psi_k_with(f, k, exec)?.rearrangement_with(exec)))
        .collect::<Result<Vec<_>>>()?;
    mixed_norm_from_psi(psis, x)
}

/// Mixed norm from already rearranged sections.
pub fn mixed_norm_from_psi(psis: Vec<PWDecreasing>, x: &SpaceSpec) -> Result<MixedNormResult> {
    let per_axis = psis.iter().map(|p| x.norm(p)).collect::<Result<Vec<_>>>()?;
    let total = per_axis.iter().sum();
    Ok(MixedNormResult {
        per_axis,
        total,
        psi_rearrangements: psis,
    })
}

/// Mixed norm of a slab profile from its exact sections.
pub fn slab_mixed_norm(s: &SlabProfile, x: &SpaceSpec) -> Result<MixedNormResult> {
    mixed_norm_from_psi(s.psi_rearrangements_exact()?, x)
}

/// `‖f(t^{n'})‖_X`, the norm of the smallest r.i. space containing
/// `R(X, L^∞)`.
pub fn rango_norm(f: &PWDecreasing, x: &SpaceSpec, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("n", "dimension must be at least 2"));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    x.norm(&f.compose_power(crate::conj(n))?)
}
