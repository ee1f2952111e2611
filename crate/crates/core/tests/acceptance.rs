//! Acceptance checks, one verdict line per criterion. Exits nonzero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmt_linstats::asympt::{expansion, goe_expansion, gse_expansion, lue_limits, AsymptResolution};
use rmt_linstats::ensembles::{
    build_m, canonical_skew, debruijn_check, finite_moments, mgf_beta2, mgf_direct, mgf_squared, vandermonde4_det_check,
    DeBruijnKind, EnsembleSpec, Resolution, Statistic,
};
use rmt_linstats::mcsample::{linstat_moments, sample, Method};
use rmt_linstats::operator::{fredholm_det, make_grid, Domain, Scheme, StatFamily, TestFunction};
use rmt_linstats::orthopoly::{bessel_kernel, sine_kernel, CdKernel, CdKind, HermiteSystem};
use rmt_linstats::specfun::{hyp2f1_lemma22, inv_odd_factorial, lemma23_lhs};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn detail(s: impl AsRef<str>) {
    println!("    {}", s.as_ref());
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_determinant_vs_direct() -> Outcome {
    let res = Resolution::default();
    let mut specs = vec![
        EnsembleSpec::gse(2).unwrap(),
        EnsembleSpec::lse(2, 2.0).unwrap(),
        EnsembleSpec::goe(2).unwrap(),
        EnsembleSpec::loe(2, 1.5).unwrap(),
    ];
    for n in [2, 3] {
        specs.push(EnsembleSpec::gue(n).unwrap());
        specs.push(EnsembleSpec::lue(n, 1.0).unwrap());
    }
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let stat = Statistic::scaled(spec, TestFunction::gaussian());
        let mut row = Vec::new();
        for lambda in [0.1, 0.3, 0.7] {
            let direct = mgf_direct(spec, &stat, lambda).unwrap().value;
            let sq = if spec.beta == 2 {
                mgf_beta2(spec, &stat, lambda, &res).unwrap().value.powi(2)
            } else {
                mgf_squared(spec, &stat, lambda, &res).unwrap().value
            };
            let e = rel(sq, direct * direct);
            worst = worst.max(e);
            row.push(format!("{e:.1e}"));
        }
        detail(format!("{spec}: rel err at lambda 0.1/0.3/0.7 = {}", row.join(", ")));
    }
    outcome(worst <= 1e-5, format!("max rel err {worst:.2e} (tol 1e-5)"))
}

fn c2_canonical_m() -> Outcome {
    let mut specs = Vec::new();
    for n in 1..=8 {
        specs.push(EnsembleSpec::gse(n).unwrap());
        if n % 2 == 0 {
            specs.push(EnsembleSpec::goe(n).unwrap());
        }
    }
    for alpha in [0.7, 2.5] {
        for n in 1..=6 {
            specs.push(EnsembleSpec::lse(n, alpha).unwrap());
            if n % 2 == 0 {
                specs.push(EnsembleSpec::loe(n, alpha).unwrap());
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut arg = String::new();
    for spec in &specs {
        let m = build_m(spec).unwrap();
        let e = (&m - canonical_skew(m.nrows())).amax();
        if e >= worst {
            worst = e;
            arg = spec.to_string();
        }
    }
    outcome(worst <= 1e-7, format!("{} matrices, max deviation {worst:.2e} at {arg} (tol 1e-7)", specs.len()))
}

fn c3_lemma23() -> Outcome {
    let mut bad = Vec::new();
    for (p, q) in [(1, 2), (1, 1), (2, 1), (7, 3)] {
        let a = BigRational::new(BigInt::from(p), BigInt::from(q));
        for n in 0..=12 {
            if lemma23_lhs(n, &a).ok() != Some(inv_odd_factorial(n)) {
                bad.push(format!("n={n} alpha={p}/{q}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("52 rational identities, {} mismatches {bad:?}", bad.len()))
}

fn c4_lemma22() -> Outcome {
    let dev: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&n| {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            (hyp2f1_lemma22(n) * s * (8.0 * n as f64 / PI).sqrt() - 1.0).abs()
        })
        .collect();
    let pass = dev[2] <= 0.05 && dev[0] > dev[1] && dev[1] > dev[2];
    outcome(pass, format!("deviation at N=1e2/1e3/1e4: {:.2e}, {:.2e}, {:.2e} (tol 0.05, decreasing)", dev[0], dev[1], dev[2]))
}

fn sup_error(k: &CdKernel, grid: &[f64], limit: &dyn Fn(f64, f64) -> f64) -> f64 {
    let mut m: f64 = 0.0;
    for &x in grid {
        for &y in grid {
            m = m.max((k.scaled(x, y) - limit(x, y)).abs());
        }
    }
    m
}

fn c5_kernel_limits() -> Outcome {
    let bulk: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
    let edge: Vec<f64> = (0..=38).map(|i| 0.2 + 0.1 * i as f64).collect();
    let sine = |x: f64, y: f64| sine_kernel(x, y);
    let b15 = |x: f64, y: f64| bessel_kernel(1.5, x, y).unwrap();
    let b25 = |x: f64, y: f64| bessel_kernel(2.5, x, y).unwrap();
    type Case<'a> = (&'a str, fn(usize) -> CdKind, &'a [f64], &'a dyn Fn(f64, f64) -> f64, f64);
    let cases: [Case; 4] = [
        ("GSE vs sine", |n| CdKind::Gse { n }, &bulk, &sine, 0.02),
        ("GOE vs sine", |n| CdKind::Goe { n }, &bulk, &sine, 0.02),
        ("LSE(2.5) vs Bessel(1.5)", |n| CdKind::Lse { n, alpha: 2.5 }, &edge, &b15, 0.03),
        ("LOE(1.5) vs Bessel(2.5)", |n| CdKind::Loe { n, alpha: 1.5 }, &edge, &b25, 0.03),
    ];
    let mut pass = true;
    let mut worst = Vec::new();
    for (label, kind, grid, limit, tol) in cases {
        let e100 = sup_error(&CdKernel::new(kind(100)).unwrap(), grid, limit);
        let e400 = sup_error(&CdKernel::new(kind(400)).unwrap(), grid, limit);
        let ok = e400 <= tol && e400 < e100;
        pass &= ok;
        detail(format!("{label}: sup err N=100 {e100:.3e}, N=400 {e400:.3e} (tol {tol}) {}", if ok { "ok" } else { "FAIL" }));
        worst.push(format!("{e400:.1e}"));
    }
    outcome(pass, format!("sup errors at N=400: {}", worst.join(", ")))
}

/// Least-squares `C` in `e ≈ C/N`.
fn fit_c(ns: &[f64], es: &[f64]) -> f64 {
    let num: f64 = ns.iter().zip(es).map(|(n, e)| e / n).sum();
    let den: f64 = ns.iter().map(|n| 1.0 / (n * n)).sum();
    num / den
}

fn rate_check(label: &str, errs: &[f64; 3]) -> bool {
    let c = fit_c(&[40.0, 80.0], &errs[..2]);
    let pred = c / 160.0;
    let ok = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] <= 2.0 * pred;
    detail(format!(
        "{label}: |asym - finite| at N=40/80/160 = {:.3e}, {:.3e}, {:.3e}; C/N prediction at 160 = {pred:.3e} {}",
        errs[0],
        errs[1],
        errs[2],
        if ok { "ok" } else { "FAIL" }
    ));
    ok
}

fn c6_expansions_vs_finite() -> Outcome {
    let res = Resolution::default();
    let ares = AsymptResolution::default();
    let gauss = TestFunction::gaussian();
    let bump = TestFunction::new(StatFamily::HalfBump, 1.0, 0.0, 1.0).unwrap();
    type Make = fn(usize) -> EnsembleSpec;
    let cases: [(&str, Make, TestFunction); 4] = [
        ("GSE", |n| EnsembleSpec::gse(n).unwrap(), gauss),
        ("GOE", |n| EnsembleSpec::goe(n).unwrap(), gauss),
        ("LSE(2)", |n| EnsembleSpec::lse(n, 2.0).unwrap(), gauss),
        ("LOE(1.5)", |n| EnsembleSpec::loe(n, 1.5).unwrap(), bump),
    ];
    let (mut means_ok, mut vars_ok) = (true, true);
    let mut failed = Vec::new();
    for (label, make, f) in cases {
        let mut em = [0.0; 3];
        let mut ev = [0.0; 3];
        for (i, n) in [40, 80, 160].into_iter().enumerate() {
            let spec = make(n);
            let fin = finite_moments(&spec, &Statistic::scaled(&spec, f), &res).unwrap();
            let asy = expansion(&spec, &f, &ares).unwrap();
            em[i] = (asy.mean - fin.mean).abs();
            ev[i] = (asy.variance - fin.variance).abs();
        }
        if !rate_check(&format!("{label} mean"), &em) {
            means_ok = false;
            failed.push(format!("{label} mean"));
        }
        if !rate_check(&format!("{label} variance"), &ev) {
            vars_ok = false;
            failed.push(format!("{label} variance"));
        }
    }
    let summary = format!(
        "means {}, variances {}{}",
        if means_ok { "ok" } else { "FAIL" },
        if vars_ok { "ok" } else { "FAIL" },
        if failed.is_empty() { String::new() } else { format!(" (failing: {})", failed.join(", ")) }
    );
    outcome(means_ok && vars_ok, summary)
}

fn c7_monte_carlo() -> Outcome {
    let count = 100_000;
    let n = 50;
    let gauss = TestFunction::gaussian();
    let mut pass = true;
    let mut failed = Vec::new();
    let mut report = |label: &str, what: &str, mc: f64, se: f64, target: f64, slack: f64| {
        let z = (mc - target).abs() / se;
        let ok = (mc - target).abs() <= 3.0 * se + slack;
        detail(format!(
            "{label} {what}: MC {mc:.6} +- {se:.1e}, target {target:.6}{}, |z| = {z:.1} {}",
            if slack > 0.0 { format!(" (slack {slack:.1e})") } else { String::new() },
            if ok { "ok" } else { "FAIL" }
        ));
        if !ok {
            failed.push(format!("{label} {what}"));
        }
        ok
    };
    for (label, spec, asy) in [
        ("GOE", EnsembleSpec::goe(n).unwrap(), goe_expansion(&gauss, n).unwrap()),
        ("GSE", EnsembleSpec::gse(n).unwrap(), gse_expansion(&gauss, n).unwrap()),
    ] {
        let batch = sample(&spec, count, 20_240_601, Method::Tridiagonal).unwrap();
        let m = linstat_moments(&batch, &Statistic::scaled(&spec, gauss)).unwrap();
        pass &= report(label, "mean", m.mean, m.mean_stderr, asy.mean, 0.0);
        pass &= report(label, "variance", m.variance, m.variance_stderr, asy.variance, 0.0);
    }
    let (lim, _) = lue_limits(&gauss, 1.0).unwrap();
    let res = Resolution::default();
    let c = [100usize, 200]
        .iter()
        .map(|&k| {
            let spec = EnsembleSpec::lue(k, 1.0).unwrap();
            let fin = finite_moments(&spec, &Statistic::scaled(&spec, gauss), &res).unwrap();
            k as f64 * (fin.mean - lim).abs()
        })
        .fold(0.0, f64::max);
    let spec = EnsembleSpec::lue(n, 1.0).unwrap();
    let batch = sample(&spec, count, 20_240_602, Method::Tridiagonal).unwrap();
    let m = linstat_moments(&batch, &Statistic::scaled(&spec, gauss)).unwrap();
    pass &= report("LUE(1)", "mean", m.mean, m.mean_stderr, lim, c / n as f64);
    let summary = if failed.is_empty() { "all within 3 stderr".to_string() } else { format!("failing: {}", failed.join(", ")) };
    outcome(pass, summary)
}

fn c8_operator_calculus() -> Outcome {
    let g = make_grid(Domain::Real { radius: 10.0 }, 400, Scheme::Legendre).unwrap();
    let mut sup_inv: f64 = 0.0;
    for (c, s) in [(0.0, 1.0), (1.5, 0.7), (-2.0, 1.3)] {
        let f = g.sample(|x| (-((x - c) / s).powi(2) / 2.0).exp());
        let def = g.apply_deriv(&g.apply_eps(&f)).unwrap();
        let edf = g.apply_eps(&g.apply_deriv(&f).unwrap());
        for i in 0..g.len() {
            sup_inv = sup_inv.max((def[i] - f[i]).abs()).max((edf[i] - f[i]).abs());
        }
    }
    let fx = |x: f64| (-0.5 * x * x).exp() * (1.0 + 0.3 * x);
    let fpx = |x: f64| (-0.5 * x * x).exp() * (0.3 - x * (1.0 + 0.3 * x));
    let h = g.sample(|x| (-0.25 * (x - 0.5).powi(2)).exp());
    let fh: Vec<f64> = g.nodes.iter().zip(&h).map(|(x, v)| fx(*x) * v).collect();
    let dfh = g.apply_deriv(&fh).unwrap();
    let dh = g.apply_deriv(&h).unwrap();
    let sup_comm = (0..g.len())
        .map(|i| {
            let x = g.nodes[i];
            (dfh[i] - fx(x) * dh[i] - fpx(x) * h[i]).abs()
        })
        .fold(0.0, f64::max);
    let e = g.eps_matrix();
    let antisym = e.transpose() == -&e;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_det: f64 = 0.0;
    for _ in 0..20 {
        let (p, q) = (rng.random_range(1..=30), rng.random_range(1..=30));
        let a = DMatrix::from_fn(p, q, |_, _| rng.random_range(-0.3..0.3));
        let b = DMatrix::from_fn(q, p, |_, _| rng.random_range(-0.3..0.3));
        let l = fredholm_det(&(&a * &b)).unwrap();
        let r = fredholm_det(&(&b * &a)).unwrap();
        worst_det = worst_det.max(rel(l, r));
    }
    let pass = sup_inv <= 1e-6 && sup_comm <= 1e-6 && antisym && worst_det <= 1e-9;
    outcome(
        pass,
        format!(
            "D eps = eps D = I {sup_inv:.1e}, [D,f] = f' {sup_comm:.1e} (tol 1e-6); eps^T = -eps exact: {antisym}; det(I+AB) vs det(I+BA) {worst_det:.1e} (tol 1e-9)"
        ),
    )
}

fn c9_classical_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_v: f64 = 0.0;
    let (l, r) = vandermonde4_det_check(&[0.0, 1.0]).unwrap();
    worst_v = worst_v.max(rel(l, r));
    for n in 1..=4 {
        for _ in 0..10 {
            let pts: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let (l, r) = vandermonde4_det_check(&pts).unwrap();
            worst_v = worst_v.max(rel(l, r));
        }
    }
    let grid = make_grid(Domain::Interval { a: -9.0, b: 9.0 }, 240, Scheme::Legendre).unwrap();
    let g0 = |x: f64| (-x * x).exp();
    let g1 = |x: f64| x * (-x * x).exp();
    let g2 = |x: f64| (1.0 + x) * (-0.5 * x * x).exp();
    let g3 = |x: f64| (x * x - 0.5) * (-0.5 * x * x).exp();
    let (ql, qr) = debruijn_check(DeBruijnKind::Quaternion, &[&g0, &g2], &[&g1, &g3], &grid).unwrap();
    let h = HermiteSystem::new(4);
    let phi0 = |x: f64| h.phi(0, x).unwrap();
    let phi1 = |x: f64| h.phi(1, x).unwrap();
    let phi2 = |x: f64| h.phi(2, x).unwrap();
    let phi3 = |x: f64| h.phi(3, x).unwrap();
    let (ol, or) = debruijn_check(DeBruijnKind::Orthogonal, &[&phi0, &phi1], &[], &grid).unwrap();
    let (o2l, o2r) = debruijn_check(DeBruijnKind::Orthogonal, &[&phi2, &phi3], &[], &grid).unwrap();
    let zero = |_: f64| 0.0;
    let (zl, zr) = debruijn_check(DeBruijnKind::Orthogonal, &[&zero, &zero], &[], &grid).unwrap();
    let worst_b = rel(ql, qr).max(rel(ol, or)).max(rel(o2l, o2r));
    let zero_ok = zl == 0.0 && zr.abs() < 1e-14;
    detail(format!("quaternion N=1: {ql:.12e} vs {qr:.12e}"));
    detail(format!("orthogonal N=2 (phi0, phi1): {ol:.12e} vs {or:.12e}; (phi2, phi3): {o2l:.12e} vs {o2r:.12e}"));
    let pass = worst_v <= 1e-10 && worst_b <= 1e-5 && zero_ok;
    outcome(pass, format!("Vandermonde rel err {worst_v:.1e} (tol 1e-10); de Bruijn rel err {worst_b:.1e} (tol 1e-5); zero case {zero_ok}"))
}

fn c10_unitary_targets() -> Outcome {
    let gauss = TestFunction::gaussian();
    let (m, _) = rmt_linstats::asympt::gue_limits(&gauss).unwrap();
    let gue_err = (m - (2.0 / PI).sqrt()).abs();
    let spec = EnsembleSpec::lue(50, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for f in [gauss, TestFunction::new(StatFamily::Lorentzian, 1.0, 2.0, 1.5).unwrap()] {
        let base = expansion(&spec, &f, &AsymptResolution::default()).unwrap();
        let fine = expansion(&spec, &f, &AsymptResolution { per_panel: 32, ..AsymptResolution::default() }).unwrap();
        let d = (base.mean - fine.mean).abs().max((base.variance - fine.variance).abs());
        detail(format!("LUE(1) {:?}: mean {:.12}, variance {:.12}, doubling change {d:.1e}", f.family, base.mean, base.variance));
        worst = worst.max(d);
    }
    let pass = gue_err <= 1e-8 && worst <= 1e-6;
    outcome(pass, format!("GUE mean - sqrt(2/pi) = {gue_err:.1e} (tol 1e-8); LUE grid doubling change {worst:.1e} (tol 1e-6)"))
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "determinant vs direct quadrature", Duration::from_secs(60), c1_determinant_vs_direct),
        (2, "canonical skew M", Duration::from_secs(30), c2_canonical_m),
        (3, "binomial identity exactness", Duration::from_secs(1), c3_lemma23),
        (4, "2F1 asymptotic", Duration::from_secs(10), c4_lemma22),
        (5, "kernel scaling limits", Duration::from_secs(60), c5_kernel_limits),
        (6, "expansions vs finite N", Duration::from_secs(600), c6_expansions_vs_finite),
        (7, "Monte Carlo concordance", Duration::from_secs(900), c7_monte_carlo),
        (8, "operator calculus", Duration::from_secs(10), c8_operator_calculus),
        (9, "Vandermonde and de Bruijn identities", Duration::from_secs(30), c9_classical_identities),
        (10, "unitary closed targets", Duration::from_secs(60), c10_unitary_targets),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let t = Instant::now();
        let o = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= budget;
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2?} of {:?}{}]",
            if pass { "PASS" } else { "FAIL" },
            o.summary,
            elapsed,
            budget,
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
