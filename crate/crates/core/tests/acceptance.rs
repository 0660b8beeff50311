//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use isocert::checker::{check_condition, check_exp_power_on, ConditionSpec, CostModel, Verdict};
use isocert::convex::{legendre_transform, ConvexSamples, CostFunction, GridSpacing};
use isocert::entropy::{lemma32_bound_check, BoundStatus, EntropyFunction};
use isocert::measure1d::{
    bobkov_bound_check, i_f_profile, kolmogorov_distance, lemma41_ratio, rearrange, Measure1D,
    Potential, Truncation,
};
use isocert::quad::linspace;
use isocert::tester::{
    classical_entropy, grad_energy, step1_check, verify_theorem_4_4, FamilyKind, TestFamily,
};

const A_VALUES: [f64; 3] = [0.5, 1.0, 2.0];
const ALPHA_VALUES: [f64; 3] = [1.2, 1.5, 2.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gauss_fixture() -> Measure1D {
    Measure1D::build(
        Potential::Gauss,
        Truncation::Explicit {
            lo: -12.0,
            hi: 12.0,
            points: 4001,
        },
    )
    .unwrap()
}

fn build(p: Potential) -> Measure1D {
    Measure1D::build(p, Truncation::default()).unwrap()
}

fn conjugate_duality() -> Outcome {
    let start = Instant::now();
    let grid = linspace(0.0, 10.0, 2000);
    let mut worst = 0.0f64;
    for a in A_VALUES {
        for alpha in ALPHA_VALUES {
            let c = CostFunction::closed_form(a, alpha).unwrap();
            let dual = c.closed_dual().unwrap();
            let table = c.conjugate(&grid).unwrap();
            for (x, v) in grid.iter().zip(&table.values) {
                let exact = dual.value(*x).unwrap();
                let rel = (v - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(if exact == 0.0 { v.abs() } else { rel });
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-4 && t < Duration::from_secs(1),
        format!("max relative error {worst:.3e} (tol 1e-4), {:.3} s (limit 1 s)", t.as_secs_f64()),
    )
}

fn involution() -> Outcome {
    let mut worst = 0.0f64;
    for a in A_VALUES {
        for alpha in ALPHA_VALUES {
            let c = CostFunction::closed_form(a, alpha).unwrap();
            let y_max = c.derivative(10.0);
            let dual_grid = linspace(0.0, y_max, 20001);
            let cstar = c.conjugate(&dual_grid).unwrap();
            let samples =
                ConvexSamples::new(dual_grid, cstar.values.clone(), GridSpacing::Linear).unwrap();
            let interior = linspace(0.0, 9.0, 2000);
            let cc = legendre_transform(&samples, &interior).unwrap();
            let norm = interior
                .iter()
                .map(|&x| c.value(x).unwrap().abs())
                .fold(0.0, f64::max);
            let err = interior
                .iter()
                .zip(&cc.values)
                .map(|(&x, v)| (v - c.value(x).unwrap()).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err / (1.0 + norm));
        }
    }
    outcome(worst <= 1e-6, format!("max ||c** - c|| / (1 + ||c||) = {worst:.3e} (tol 1e-6)"))
}

fn phi_oracle() -> Outcome {
    let f = EntropyFunction::log();
    let worst = linspace(0.0, 5.0, 501)
        .into_iter()
        .map(|x| (f.phi(x) / x.exp() - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(worst <= 1e-5, format!("max relative error vs e^x {worst:.3e} (tol 1e-5)"))
}

fn lemma_3_2() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for (name, f) in [
        ("log", EntropyFunction::log()),
        ("F_1/2", EntropyFunction::f_tau(0.5).unwrap()),
    ] {
        for delta in [0.1, 0.25, 0.5] {
            let r = lemma32_bound_check(&f, delta, 1.0, 1e6).unwrap();
            let ok = r.status == BoundStatus::Holds;
            pass &= ok;
            parts.push(format!(
                "{name} d={delta}: T={}",
                r.t.map_or("none".to_string(), |t| format!("{t:.3}"))
            ));
        }
    }
    outcome(pass, format!("margins >= 0 on [T, 1e6]; {}", parts.join(", ")))
}

fn lsi_saturation() -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for lambda in [0.25, 0.5, 1.0] {
        let start = Instant::now();
        let mu = gauss_fixture();
        let f = &TestFamily::exponential(&[lambda]).members(&mu).unwrap()[0].f;
        let ratio = classical_entropy(&mu, f).unwrap() / (2.0 * grad_energy(&mu, f, 2.0));
        slowest = slowest.max(start.elapsed());
        worst = worst.max((ratio - 1.0).abs());
    }
    outcome(
        worst <= 1e-3 && slowest < Duration::from_secs(1),
        format!(
            "max |ratio - 1| = {worst:.3e} (tol 1e-3), slowest case {:.3} s (limit 1 s)",
            slowest.as_secs_f64()
        ),
    )
}

fn verdict_table() -> Outcome {
    let limit = Duration::from_secs(5);
    let log = EntropyFunction::log();
    let mut pass = true;
    let mut parts = vec![];
    let mut record = |name: &str, ok: bool, t: Duration, extra: String| {
        let ok = ok && t < limit;
        pass &= ok;
        parts.push(format!("{name}: {} {extra}({:.2} s)", if ok { "ok" } else { "FAIL" }, t.as_secs_f64()));
    };

    let s = Instant::now();
    let mu = build(Potential::Gauss);
    let r = check_condition(&ConditionSpec::new(&mu, &log, CostModel::Quadratic, 0.5, 2.0)).unwrap();
    record("gauss", r.verdict == Verdict::Finite, s.elapsed(), String::new());

    let s = Instant::now();
    let mu = build(Potential::Laplace);
    let all = [1.0, 0.5, 0.0625].iter().all(|&d| {
        check_condition(&ConditionSpec::new(&mu, &log, CostModel::Quadratic, d, 2.0))
            .unwrap()
            .verdict
            == Verdict::DivergentLikely
    });
    record("exp", all, s.elapsed(), String::new());

    let s = Instant::now();
    let mu = build(Potential::LogLog);
    let f = EntropyFunction::loglog_squared();
    let r = check_condition(&ConditionSpec::new(&mu, &f, CostModel::Quadratic, 0.1, 3.0)).unwrap();
    record(
        "loglog",
        r.verdict == Verdict::Finite && r.tail_p < 1.0,
        s.elapsed(),
        format!("p={:.3} ", r.tail_p),
    );

    let s = Instant::now();
    let mu = build(Potential::ExpPower(1.5));
    // Inequality cost c_{1,3}; the condition runs on its conjugate c_{1,3/2}.
    let r = check_exp_power_on(&mu, 1.5, 1.0, 1.0, 0.25, 2.0).unwrap();
    record(
        "exp_power",
        r.inequality_exponent == 3.0 && r.entropy_cost.verdict == Verdict::Finite,
        s.elapsed(),
        String::new(),
    );
    outcome(pass, parts.join(", "))
}

fn lemma_4_1() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for alpha in [1.0, 1.5, 2.0] {
        let mu = build(Potential::ExpPower(alpha));
        let r = lemma41_ratio(&mu, &[2.0, 4.0, 8.0]).unwrap();
        pass &= r.stabilized;
        let sups: Vec<String> = r.rows.iter().map(|x| format!("{:.4}", x.sup)).collect();
        parts.push(format!("alpha={alpha}: [{}]", sups.join(", ")));
    }
    let g = build(Potential::Gauss);
    let rs = linspace(3.0, 5.0, 21);
    let p = i_f_profile(&g, &EntropyFunction::log(), &rs).unwrap();
    let ratios: Vec<f64> = p.value.iter().zip(&rs).map(|(v, r)| v / r).collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    pass &= lo >= 0.35 && hi <= 0.7;
    parts.push(format!("gauss I_log(r)/r on [3,5] in [{lo:.4}, {hi:.4}] (need [0.35, 0.7])"));
    outcome(pass, parts.join("; "))
}

fn bobkov() -> Outcome {
    let ts = linspace(0.01, 0.5, 50);
    let mut worst = f64::INFINITY;
    for p in [Potential::Gauss, Potential::Laplace] {
        let mu = build(p);
        worst = worst.min(bobkov_bound_check(&mu, &ts).unwrap().min_margin);
    }
    outcome(worst >= -1e-8, format!("min margin {worst:.3e} (need >= -1e-8)"))
}

fn rearrangement() -> Outcome {
    let mu = gauss_fixture();
    let cell = mu.weights().iter().cloned().fold(0.0, f64::max);
    let worst = TestFamily::random_smooth(20, 0)
        .members(&mu)
        .unwrap()
        .iter()
        .map(|m| {
            let g = rearrange(&mu, &m.f).unwrap();
            kolmogorov_distance(mu.weights(), &m.f.values, &g.values)
        })
        .fold(0.0, f64::max);
    outcome(
        worst <= cell,
        format!("max Kolmogorov distance {worst:.3e} (one cell {cell:.3e})"),
    )
}

fn step1() -> Outcome {
    let mu = build(Potential::Gauss);
    let fam = TestFamily::exponential(&[0.25, 0.5, 1.0]);
    let mut worst = f64::INFINITY;
    for k in [2.0, 4.0] {
        let r = step1_check(&mu, &EntropyFunction::log(), k, &fam).unwrap();
        worst = worst.min(r.min_margin.unwrap());
    }
    outcome(worst >= 0.0, format!("min margin {worst:.3e} over K in {{2, 4}}"))
}

fn theorem_4_4() -> Outcome {
    let mu = build(Potential::ExpPower(1.5));
    let fam = TestFamily::new(FamilyKind::RadialPower {
        exponent: 0.7,
        scales: vec![0.25, 0.5, 1.0],
    });
    let r = verify_theorem_4_4(&mu, 1.5, &fam).unwrap();
    let c = r.best_constant.unwrap_or(f64::NAN);
    let e = r.enriched_constant.unwrap_or(f64::NAN);
    outcome(
        c.is_finite() && r.stable == Some(true),
        format!("C = {c:.6}, doubled family C = {e:.6} (tol 10%)"),
    )
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_isocert"))
            .args(["paper-examples", "--seed", "0"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    outcome(ok, format!("{} bytes, identical: {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("conjugate duality", conjugate_duality),
        ("conjugate involution", involution),
        ("Phi oracle for F = log", phi_oracle),
        ("Phi(delta F(y)) <= y^(2 delta)", lemma_3_2),
        ("Gaussian LSI saturation", lsi_saturation),
        ("verdict table", verdict_table),
        ("I_log(r)/r stabilization", lemma_4_1),
        ("convex-measure bound on half-lines", bobkov),
        ("rearrangement preserves the law", rearrangement),
        ("first-step constant", step1),
        ("Ent |f|^beta constant stability", theorem_4_4),
        ("paper-examples determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
