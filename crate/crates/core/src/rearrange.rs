//! Distribution functions and decreasing rearrangements of cell-constant
//! functions on the unit cube, plus radial and slab profiles whose
//! rearrangements are known in closed form.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numeric::ExactSum;
use crate::omega;
use crate::stepfn::PWDecreasing;

/// Cell-constant function on `(0,1)^n` with `N` cells per axis, stored
/// row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    n: usize,
    cells: usize,
    values: Vec<f64>,
}

impl GridFunction {
    /// `n = 1` is accepted so that sections of planar functions are grids too.
    pub fn new(n: usize, cells: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "dimension must be at least 1"));
        }
        if cells == 0 {
            return Err(Error::param("N", "need at least one cell per axis"));
        }
        let total = checked_total(n, cells)?;
        if values.len() != total {
            return Err(Error::GridMismatch(format!(
                "{} values for {cells}^{n} = {total} cells",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("non-finite value at cell {i}")));
        }
        Ok(Self { n, cells, values })
    }

    /// Samples `f` at cell centres.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(n: usize, cells: usize, f: F) -> Result<Self> {
        let total = checked_total(n, cells)?;
        let h = 1.0 / cells as f64;
        let mut x = vec![0.0; n];
        let mut values = Vec::with_capacity(total);
        for idx in 0..total {
            let mut r = idx;
            for k in (0..n).rev() {
                x[k] = ((r % cells) as f64 + 0.5) * h;
                r /= cells;
            }
            values.push(f(&x));
        }
        Self::new(n, cells, values)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
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

    pub fn cell_measure(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    /// `|{|f| > λ}|`.
    pub fn distribution(&self, level: f64) -> f64 {
        let k = self.values.iter().filter(|v| v.abs() > level).count();
        k as f64 / self.values.len() as f64
    }

    /// `‖f‖_{L¹}` with a correctly rounded cell sum.
    pub fn l1_norm(&self) -> f64 {
        let mut acc = ExactSum::new();
        for v in &self.values {
            acc.add(v.abs());
        }
        acc.value() / self.values.len() as f64
    }

    /// `|f|` sorted in decreasing order.
    pub fn sorted_abs(&self, exec: Exec) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().map(|x| x.abs()).collect();
        exec.sort_abs_desc(&mut v);
        v
    }

    pub fn rearrangement(&self) -> PWDecreasing {
        self.rearrangement_with(Exec::default())
    }

    /// `f*` as a step function: the `i`-th largest `|value|` on
    /// `((i-1)/N^n, i/N^n)`, runs of equal values merged.
    pub fn rearrangement_with(&self, exec: Exec) -> PWDecreasing {
        let sorted = self.sorted_abs(exec);
        step_from_sorted(&sorted)
    }

    /// Flat index of the cell with per-axis coordinates `coords`.
    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.cells + c)
    }
}

fn checked_total(n: usize, cells: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = total
            .checked_mul(cells)
            .ok_or_else(|| Error::param("N", format!("{cells}^{n} cells overflow")))?;
    }
    if total > 1 << 31 {
        return Err(Error::param("N", format!("{cells}^{n} cells is beyond desk scale")));
    }
    Ok(total)
}

/// Builds `f*` from values already sorted in decreasing order, each of
/// measure `1/len`.
pub(crate) fn step_from_sorted(sorted: &[f64]) -> PWDecreasing {
    let total = sorted.len() as f64;
    let mut breaks = vec![0.0];
    let mut values = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        values.push(v);
        breaks.push(if j == sorted.len() { 1.0 } else { j as f64 / total });
        i = j;
    }
    PWDecreasing::new(breaks, values).expect("sorted magnitudes form a valid step function")
}

/// `(N^{-n} Σ |f g|, ∫_0^1 f* g*)`.
pub fn hardy_littlewood_pairing(f: &GridFunction, g: &GridFunction) -> Result<(f64, f64)> {
    hardy_littlewood_pairing_with(f, g, Exec::default())
}

pub fn hardy_littlewood_pairing_with(
    f: &GridFunction,
    g: &GridFunction,
    exec: Exec,
) -> Result<(f64, f64)> {
    if f.n != g.n || f.cells != g.cells {
        return Err(Error::GridMismatch(format!(
            "{}^{} against {}^{}",
            f.cells, f.n, g.cells, g.n
        )));
    }
    let total = f.values.len() as f64;
    let mut lhs = ExactSum::new();
    for (a, b) in f.values.iter().zip(&g.values) {
        lhs.add_product(a.abs(), b.abs());
    }
    let fs = f.sorted_abs(exec);
    let gs = g.sorted_abs(exec);
    let mut rhs = ExactSum::new();
    for (a, b) in fs.iter().zip(&gs) {
        rhs.add_product(*a, *b);
    }
    Ok((lhs.value() / total, rhs.value() / total))
}

/// `f(x) = h(ω |x - c|^n)` with `c` the centre of the cube.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub h: PWDecreasing,
    pub n: usize,
    pub omega: f64,
}

impl RadialProfile {
    pub fn new(h: PWDecreasing, n: usize, omega: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", "radial profiles need n >= 2"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", format!("{omega} must be positive")));
        }
        let p = Self { h, n, omega };
        let rho = p.support_radius();
        if rho > 0.5 {
            return Err(Error::Precondition(format!(
                "support radius {rho} leaves the cube; need <= 1/2"
            )));
        }
        Ok(p)
    }

    /// Radius of the supporting ball.
    pub fn support_radius(&self) -> f64 {
        (self.h.support() / self.omega).powf(1.0 / self.n as f64)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|&xi| (xi - 0.5) * (xi - 0.5)).sum();
        let m = self.omega * r2.powf(0.5 * self.n as f64);
        if m >= 1.0 {
            0.0
        } else {
            self.h.value(m)
        }
    }

    pub fn sample(&self, cells: usize) -> Result<GridFunction> {
        GridFunction::from_fn(self.n, cells, |x| self.eval(x))
    }

    /// `g*(s) = h(ω s / ω_n)`.
    pub fn rearrangement_exact(&self) -> Result<PWDecreasing> {
        self.h.dilate(omega(self.n) / self.omega)
    }
}

/// `f(x) = g*(2 |x_k - 1/2|)` on the slab `|x_k - 1/2| < r`, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct SlabProfile {
    pub g: PWDecreasing,
    pub r: f64,
    pub axis: usize,
    pub n: usize,
}

impl SlabProfile {
    pub fn new(g: PWDecreasing, r: f64, axis: usize, n: usize) -> Result<Self> {
        if !(r > 0.0 && r < 0.5) {
            return Err(Error::param("r", format!("half-width {r} not in (0, 1/2)")));
        }
        if n < 2 || axis >= n {
            return Err(Error::param("axis", format!("axis {axis} out of range for n = {n}")));
        }
        Ok(Self { g, r, axis, n })
    }

    /// `g*` cut at `min(2r, λ_g(0))`.
    pub fn rearrangement_exact(&self) -> Result<PWDecreasing> {
        let cut = (2.0 * self.r).min(self.g.support());
        if cut >= 1.0 {
            return Ok(self.g.clone());
        }
        self.g.truncate(cut)
    }

    /// Rearrangements of the sections `ψ_k(f, L^∞)` for every axis: the
    /// slab axis sees `sup g* = ∞` on the whole footprint, the others see
    /// the cut profile itself.
    pub fn psi_rearrangements_exact(&self) -> Result<Vec<PWDecreasing>> {
        let cut = self.rearrangement_exact()?;
        (0..self.n)
            .map(|k| {
                if k == self.axis {
                    PWDecreasing::constant(self.g.sup())
                } else {
                    Ok(cut.clone())
                }
            })
            .collect()
    }

    /// Cell averages along the slab axis; the function is constant in the
    /// other directions.
    pub fn sample(&self, cells: usize) -> Result<GridFunction> {
        let h = 1.0 / cells as f64;
        let cut = 2.0 * self.r;
        // G(s) = ∫_0^s g*, with the slab cut applied
        let big_g = |s: f64| self.g.primitive(s.min(cut));
        let profile: Vec<f64> = (0..cells)
            .map(|j| {
                let (x0, x1) = (j as f64 * h - 0.5, (j + 1) as f64 * h - 0.5);
                let area = if x0 >= 0.0 {
                    0.5 * (big_g(2.0 * x1) - big_g(2.0 * x0))
                } else if x1 <= 0.0 {
                    0.5 * (big_g(-2.0 * x0) - big_g(-2.0 * x1))
                } else {
                    0.5 * (big_g(2.0 * x1) + big_g(-2.0 * x0))
                };
                area / h
            })
            .collect();
        if let Some(j) = profile.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!(
                "slab profile not integrable near the centre (cell {j})"
            )));
        }
        let total = checked_total(self.n, cells)?;
        let stride = cells.pow((self.n - 1 - self.axis) as u32);
        let values = (0..total).map(|i| profile[(i / stride) % cells]).collect();
        GridFunction::new(self.n, cells, values)
    }
}
