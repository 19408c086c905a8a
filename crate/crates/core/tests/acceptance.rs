//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.

use std::time::Instant;

use mixnorm::harness::{run_chain_campaign, run_optimality_probe, Probe, Verdict};
use mixnorm::kfun::{concave_nondecreasing, k_bruteforce, k_exact_l1_linf, k_holmstedt};
use mixnorm::mixed::rango_norm;
use mixnorm::operators::op_h;
use mixnorm::rearrange::hardy_littlewood_pairing;
use mixnorm::spaces::{associate_weight, duality_pairing_check, weighted_norm};
use mixnorm::stepfn::{random_decreasing, Weight};
use mixnorm::witness::{make_sobolev_witness, section_omega, split_residual, truncation_split};
use mixnorm::{conj, GridFunction, PWDecreasing, SpaceSpec, WeightSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Grid values with ties and zeros mixed in.
fn random_grid(rng: &mut ChaCha8Rng, n: usize, cells: usize) -> GridFunction {
    let len = cells.pow(n as u32);
    let discrete = rng.random_bool(0.5);
    let values = (0..len)
        .map(|_| {
            if discrete {
                rng.random_range(-4i32..=4) as f64 * 0.25
            } else {
                rng.random::<f64>() * 2.0 - 1.0
            }
        })
        .collect();
    GridFunction::new(n, cells, values).unwrap()
}

fn exact_rearrangement() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    for _ in 0..1000 {
        let f = random_grid(&mut rng, 2, 64);
        let fs = f.rearrangement();
        let mut levels: Vec<f64> = (0..32).map(|_| f.values()[rng.random_range(0..f.len())].abs()).collect();
        levels.extend((0..32).map(|_| rng.random::<f64>()));
        levels.push(0.0);
        if levels.iter().any(|&l| f.distribution(l) != fs.lambda(l)) {
            bad += 1;
        }
        if f.l1_norm() != fs.primitive(1.0) {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad == 0 && secs < 10.0, format!("{bad} mismatches in 1000 grids, {secs:.2} s"))
}

fn hardy_littlewood() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut violations, mut unequal) = (0, 0);
    for _ in 0..1000 {
        let f = random_grid(&mut rng, 2, 16);
        let g = random_grid(&mut rng, 2, 16);
        let (lhs, rhs) = hardy_littlewood_pairing(&f, &g).unwrap();
        if lhs > rhs {
            violations += 1;
        }
        let (l, r) = hardy_littlewood_pairing(&f, &f).unwrap();
        if l != r {
            unequal += 1;
        }
    }
    outcome(
        violations == 0 && unequal == 0,
        format!("{violations} violations, {unequal} self-pairings without equality"),
    )
}

fn k_functional() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let l1 = SpaceSpec::lebesgue(1.0).unwrap();
    let ts: Vec<f64> = (0..10).map(|i| 10f64.powf(-2.5 + 2.5 * i as f64 / 9.0)).collect();
    let curve: Vec<f64> = (0..32).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 31.0)).collect();
    let mut worst: f64 = 0.0;
    let mut bad_curves = 0;
    for _ in 0..20 {
        let f = random_decreasing(&mut rng, 12);
        for &t in &ts {
            let a = k_exact_l1_linf(&f, t).unwrap();
            let b = k_bruteforce(&f, &l1, t).unwrap();
            worst = worst.max((a - b).abs());
        }
        let exact: Vec<f64> = curve.iter().map(|&t| k_exact_l1_linf(&f, t).unwrap()).collect();
        let holm: Vec<f64> = curve.iter().map(|&t| k_holmstedt(&f, 2.0, 1.0, t).unwrap()).collect();
        if !concave_nondecreasing(&curve, &exact, 1e-9) || !concave_nondecreasing(&curve, &holm, 1e-9) {
            bad_curves += 1;
        }
    }
    outcome(
        worst <= 1e-6 && bad_curves == 0,
        format!("max |exact - bruteforce| = {worst:.3e}, {bad_curves} non-concave curves"),
    )
}

fn closed_form_norms() -> Outcome {
    let (c, a) = (1.7, 0.3);
    let f = PWDecreasing::indicator(a, c).unwrap();
    let mut worst: f64 = 0.0;
    for (p, q) in [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (3.0, 2.0)] {
        let x = SpaceSpec::lorentz(p, q).unwrap();
        let expect = c * (p / q as f64).powf(1.0 / q) * a.powf(1.0 / p);
        worst = worst.max(rel(x.norm(&f).unwrap(), expect));
    }
    let lz: SpaceSpec = "LZ(inf,2,-1)".parse().unwrap();
    let one = lz.norm(&PWDecreasing::constant(1.0).unwrap()).unwrap();
    worst = worst.max((one - 1.0).abs());
    outcome(worst <= 1e-10, format!("max relative error {worst:.3e}"))
}

fn rango_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let l1 = SpaceSpec::lebesgue(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let lorentz = SpaceSpec::lorentz(conj(n), 1.0).unwrap();
        for _ in 0..100 {
            let f = random_decreasing(&mut rng, 16);
            let lhs = rango_norm(&f, &l1, n).unwrap();
            let rhs = lorentz.norm(&f).unwrap() / conj(n);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max |rango - L(n',1)/n'| = {worst:.3e}"))
}

fn witness_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut grad, mut split, mut additivity): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for n in [2usize, 3] {
        let om = section_omega(n);
        let support = om * 0.45f64.powi(n as i32);
        for _ in 0..50 {
            let f = random_decreasing(&mut rng, 16).dilate(support).unwrap();
            let w = make_sobolev_witness(&f, 0.45, n).unwrap();
            for _ in 0..40 {
                let m = rng.random::<f64>() * support;
                if f.breakpoints().contains(&m) {
                    continue;
                }
                let rho = (m / om).powf(1.0 / n as f64);
                let expect = w.grad_profile.value(om * rho.powi(n as i32));
                let got = w.grad_from_profile(rho);
                grad = grad.max((got - expect).abs() / expect.abs().max(1.0));
            }
            let m0 = rng.random::<f64>();
            let (f1, f2) = truncation_split(&f, m0).unwrap();
            split = split.max(split_residual(&f, &f1, &f2));
            let (h, h1, h2) = (op_h(&f, n).unwrap(), op_h(&f1, n).unwrap(), op_h(&f2, n).unwrap());
            for _ in 0..40 {
                let t = rng.random::<f64>();
                let whole = h.eval(t);
                additivity = additivity.max((h1.eval(t) + h2.eval(t) - whole).abs() / whole.abs().max(1.0));
            }
        }
    }
    outcome(
        grad <= 1e-12 && split == 0.0 && additivity <= 1e-12,
        format!("gradient {grad:.2e}, split residual {split:.2e}, H additivity {additivity:.2e}"),
    )
}

const CHAINS: [(f64, usize); 6] = [(1.0, 2), (1.0, 3), (1.5, 2), (1.5, 3), (2.0, 3), (2.0, 2)];

fn embedding_stability(chains: &[mixnorm::harness::ChainReport], secs: f64) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = secs < 300.0;
    for c in chains {
        let links = [&c.sobolev_to_mixed, &c.mixed_to_ri];
        let ok = links.iter().all(|r| r.verdict == Verdict::Stable);
        pass &= ok;
        let worst = links
            .iter()
            .flat_map(|r| r.drift.iter())
            .fold(0.0f64, |a, &b| a.max(b));
        lines.push(format!("(p={},n={}) max drift {worst:.3}", c.p, c.n));
    }
    outcome(pass, format!("{}; {secs:.1} s", lines.join(", ")))
}

fn strictness(chains: &[mixnorm::harness::ChainReport]) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for c in chains {
        let ok = c.strictness.verdict == Verdict::DivergesAsExpected;
        pass &= ok;
        lines.push(format!("slab (p={},n={}) {}", c.p, c.n, c.strictness.verdict));
    }
    for (p, n) in [(1.5, 2), (1.5, 3), (2.0, 3)] {
        let r = run_optimality_probe(&Probe::lorentz(p, n, 0.25).unwrap()).unwrap();
        pass &= r.verdict == Verdict::DivergesAsExpected;
        lines.push(format!("probe (p={p},n={n}) {}", r.verdict));
    }
    outcome(pass, lines.join(", "))
}

fn associate_weight_check() -> Outcome {
    let v = WeightSpec::new(2f64.sqrt(), 0.5, 0.0).unwrap();
    let w = associate_weight(&v, 2.0).unwrap();
    let c = 2f64.sqrt();
    let mut worst: f64 = 0.0;
    for k in 0..=60 {
        let t = 1e-6 * (0.9e6f64).powf(k as f64 / 60.0);
        let expect = c * t.powf(-0.5) / (1.0 + 2.0 * (1.0 / t).ln());
        worst = worst.max(rel(w.eval(t), expect));
    }
    let x = SpaceSpec::weighted(v, 2.0, true).unwrap();
    let dual = |g: &PWDecreasing| weighted_norm(&g.to_piecewise(), &w, 2.0);
    let d = duality_pairing_check(&x, &dual, 1000, 9).unwrap();
    outcome(
        worst <= 1e-8 && d.violations == 0,
        format!(
            "pointwise max rel error {worst:.2e}; duality: {} violations in {} pairs, max ratio {:.6}",
            d.violations, d.trials, d.max_ratio
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_mixnorm"))
            .args(["chain", "--p", "1", "--dim", "2", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    outcome(a == b && !a.is_empty(), format!("{} bytes, identical = {}", a.len(), a == b))
}

fn main() {
    let start = Instant::now();
    let chains: Vec<_> = CHAINS
        .iter()
        .map(|&(p, n)| run_chain_campaign(p, n, &[64, 128, 256]).unwrap())
        .collect();
    let chain_secs = start.elapsed().as_secs_f64();
    let results = [
        ("exact rearrangement", exact_rearrangement()),
        ("Hardy-Littlewood pairing", hardy_littlewood()),
        ("K-functional oracle", k_functional()),
        ("closed-form norms", closed_form_norms()),
        ("rango identity", rango_identity()),
        ("witness identities", witness_identities()),
        ("embedding stability", embedding_stability(&chains, chain_secs)),
        ("strictness and optimality", strictness(&chains)),
        ("associate weight", associate_weight_check()),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {:<28} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
