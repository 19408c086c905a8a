use mixnorm::kfun::{concave_nondecreasing, k_exact_l1_linf};
use mixnorm::mixed::{mixed_norm, rango_norm};
use mixnorm::operators::op_h;
use mixnorm::rearrange::hardy_littlewood_pairing;
use mixnorm::witness::{split_residual, truncation_split};
use mixnorm::{conj, GridFunction, PWDecreasing, SpaceSpec};
use proptest::prelude::*;

fn decreasing() -> impl Strategy<Value = PWDecreasing> {
    prop::collection::vec((0.001f64..0.999, 0.0f64..10.0), 1..12).prop_map(|pairs| {
        let mut cuts: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut breaks = vec![0.0];
        breaks.extend(cuts);
        breaks.push(1.0);
        let mut values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        values.resize(breaks.len() - 1, 0.0);
        values.sort_by(|a, b| b.total_cmp(a));
        PWDecreasing::new(breaks, values).unwrap()
    })
}

fn grid(n: usize, cells: usize) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-3i32..=3, cells.pow(n as u32))
        .prop_map(move |v| GridFunction::new(n, cells, v.into_iter().map(|x| x as f64 * 0.5).collect()).unwrap())
}

fn spaces() -> Vec<SpaceSpec> {
    ["L(1)", "L(2)", "L(3,1)", "L(2,4)", "L(4,inf)", "LZ(inf,2,-1)", "LZ(2,2,1)", "Linf"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(f in decreasing(), c in 0.01f64..100.0) {
        for x in spaces() {
            let a = x.norm(&f.scale(c).unwrap()).unwrap();
            let b = c * x.norm(&f).unwrap();
            prop_assert!(rel(a, b) <= 1e-12 || (a == 0.0 && b == 0.0), "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn triangle_on_the_cone(f in decreasing(), g in decreasing()) {
        let s = f.add(&g).unwrap();
        for x in spaces() {
            let lhs = x.norm(&s).unwrap();
            let rhs = x.norm(&f).unwrap() + x.norm(&g).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{x}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn lattice(f in decreasing(), g in decreasing()) {
        // f + g dominates f pointwise
        let big = f.add(&g).unwrap();
        for x in spaces() {
            prop_assert!(x.norm(&f).unwrap() <= x.norm(&big).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn diagonal_lorentz_is_lebesgue(f in decreasing(), p in 1.0f64..6.0) {
        let lp = SpaceSpec::lorentz(p, p).unwrap().norm(&f).unwrap();
        let direct: f64 = f
            .breakpoints()
            .windows(2)
            .zip(f.values())
            .map(|(w, v)| (w[1] - w[0]) * v.powf(p))
            .sum::<f64>()
            .powf(1.0 / p);
        prop_assert!(rel(lp, direct) <= 1e-10 || direct == 0.0);
    }

    #[test]
    fn fundamental_function(t in 1e-6f64..1.0) {
        let chi = PWDecreasing::indicator(t, 1.0).unwrap();
        for x in spaces() {
            let a = x.norm(&chi).unwrap();
            let b = x.fundamental_function(t).unwrap();
            prop_assert!(rel(a, b) <= 1e-12, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn rearrangement_preserves_distribution(f in grid(2, 8), level in 0.0f64..2.0) {
        prop_assert_eq!(f.distribution(level), f.rearrangement().lambda(level));
    }

    #[test]
    fn hardy_littlewood(f in grid(2, 6), g in grid(2, 6)) {
        let (lhs, rhs) = hardy_littlewood_pairing(&f, &g).unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn mixed_total_is_axis_sum(f in grid(3, 4)) {
        let r = mixed_norm(&f, &SpaceSpec::lorentz(2.0, 1.0).unwrap()).unwrap();
        prop_assert_eq!(r.per_axis.len(), 3);
        prop_assert!(r.per_axis.iter().all(|&v| v >= 0.0));
        prop_assert!(rel(r.total, r.per_axis.iter().sum()) <= 1e-15 || r.total == 0.0);
    }

    #[test]
    fn rango_is_lorentz(f in decreasing(), n in 2usize..5) {
        let a = rango_norm(&f, &SpaceSpec::lebesgue(1.0).unwrap(), n).unwrap();
        let b = SpaceSpec::lorentz(conj(n), 1.0).unwrap().norm(&f).unwrap() / conj(n);
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1.0));
    }

    #[test]
    fn truncation_split_adds_back(f in decreasing(), m0 in 0.01f64..0.99) {
        let (f1, f2) = truncation_split(&f, m0).unwrap();
        prop_assert_eq!(split_residual(&f, &f1, &f2), 0.0);
    }

    #[test]
    fn hardy_operator_is_nonincreasing(f in decreasing(), n in 2usize..4) {
        let h = op_h(&f, n).unwrap();
        let ts: Vec<f64> = (1..64).map(|i| i as f64 / 64.0).collect();
        for w in ts.windows(2) {
            prop_assert!(h.eval(w[1]) <= h.eval(w[0]) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn k_curve_is_concave(f in decreasing()) {
        let ts: Vec<f64> = (0..32).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 31.0)).collect();
        let ks: Vec<f64> = ts.iter().map(|&t| k_exact_l1_linf(&f, t).unwrap()).collect();
        prop_assert!(concave_nondecreasing(&ts, &ks, 1e-9));
    }
}
