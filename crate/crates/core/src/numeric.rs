//! Floating-point building blocks shared by every module: correctly rounded
//! summation, closed-form power integrals and adaptive Gauss–Kronrod
//! quadrature.

/// Error-free product: returns `(p, e)` with `p + e == a * b` exactly.
#[inline]
pub fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Shewchuk-style accumulator of non-overlapping partials; `value()` is the
/// correctly rounded sum of everything added, independent of order.
#[derive(Clone, Debug, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
    special: f64,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        if !x.is_finite() {
            self.special += x;
            return;
        }
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Adds the exact product `a * b`.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, e) = two_product(a, b);
        if !p.is_finite() {
            self.special += p;
            return;
        }
        self.add(p);
        self.add(e);
    }

    pub fn value(&self) -> f64 {
        if self.special != 0.0 || self.special.is_nan() {
            return self.special;
        }
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // round-half-even correction, as in Python's math.fsum
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

pub fn exact_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = ExactSum::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

/// `(b^(e+1) - a^(e+1)) / (e+1)` evaluated without cancellation for `e`
/// near `-1`, and `ln(b/a)` at `e == -1`. Returns `+inf` when the integral of
/// `t^e` over `(0, b)` diverges.
pub fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    debug_assert!(0.0 <= a && a <= b);
    if a == b {
        return 0.0;
    }
    let s = e + 1.0;
    if a == 0.0 {
        return if s > 0.0 { b.powf(s) / s } else { f64::INFINITY };
    }
    let lr = (a / b).ln();
    if s.abs() < 1e-14 {
        return -lr;
    }
    // b^s (1 - (a/b)^s) / s
    -b.powf(s) * (s * lr).exp_m1() / s
}

/// `b^e - a^e` for `0 < a <= b`, accurate when `a` is close to `b`.
pub fn power_difference(e: f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a == 0.0 {
        return if e > 0.0 {
            b.powf(e)
        } else if e == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
    }
    -b.powf(e) * (e * (a / b).ln()).exp_m1()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 400,
        }
    }
}

/// Globally adaptive G7/K15 quadrature: the interval with the largest error
/// estimate is bisected until the summed estimate meets the tolerance.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: QuadOptions) -> f64 {
    if a == b {
        return 0.0;
    }
    if !(a.is_finite() && b.is_finite()) {
        return f64::NAN;
    }
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() || err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return total;
        }
        if parts.len() >= opts.max_intervals {
            return total;
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts[k];
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            return total;
        }
        let (v1, e1) = gk15(f, lo, m);
        let (v2, e2) = gk15(f, m, hi);
        parts[k] = (lo, m, v1, e1);
        parts.push((m, hi, v2, e2));
    }
}

/// Antiderivative-free golden-section maximiser on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
