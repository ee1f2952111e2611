//! Self-check suites run by `rmt-linstats verify`: exact identities,
//! kernel limits and determinant formulas, each reported as a measured
//! error against a tolerance.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{build_m, canonical_skew, mgf_direct, mgf_squared, vandermonde4_det_check, EnsembleSpec, Resolution, Statistic};
use crate::error::{Error, Result};
use crate::operator::{fredholm_det, TestFunction};
use crate::orthopoly::{bessel_kernel, sine_kernel, CdKernel, CdKind};
use crate::specfun::{hyp2f1_lemma22, inv_odd_factorial, lemma23_lhs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemmas,
    Kernels,
    Determinants,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "kernels" => Ok(Suite::Kernels),
            "determinants" => Ok(Suite::Determinants),
            "all" => Ok(Suite::All),
            _ => Err(Error::invalid(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(suite: &str, name: impl Into<String>, error: f64, tolerance: f64) -> Check {
    Check { suite: suite.into(), name: name.into(), error, tolerance, pass: error <= tolerance }
}

fn failed(suite: &str, name: impl Into<String>, e: Error) -> Check {
    Check { suite: suite.into(), name: format!("{}: {e}", name.into()), error: f64::INFINITY, tolerance: 0.0, pass: false }
}

pub fn run(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Lemmas => lemmas(),
        Suite::Kernels => kernels(),
        Suite::Determinants => determinants(),
        Suite::All => {
            let mut v = lemmas();
            v.extend(kernels());
            v.extend(determinants());
            v
        }
    }
}

fn lemmas() -> Vec<Check> {
    let mut out = Vec::new();
    let alphas = [(1, 2), (1, 1), (2, 1), (7, 3)];
    for (p, q) in alphas {
        let a = BigRational::new(BigInt::from(p), BigInt::from(q));
        let mut bad = 0.0;
        for n in 0..=12 {
            match lemma23_lhs(n, &a) {
                Ok(v) if v == inv_odd_factorial(n) => {}
                _ => bad += 1.0,
            }
        }
        out.push(check("lemmas", format!("binomial sum = 1/(2n+1)! exactly, n <= 12, alpha = {p}/{q}"), bad, 0.0));
    }
    let dev = |n: u64| {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        (hyp2f1_lemma22(n) * s * (8.0 * n as f64 / PI).sqrt() - 1.0).abs()
    };
    let d: Vec<f64> = [100, 1000, 10_000].iter().map(|&n| dev(n)).collect();
    out.push(check("lemmas", "2F1 asymptotic at N = 10^4", d[2], 0.05));
    let monotone = if d[0] > d[1] && d[1] > d[2] { 0.0 } else { 1.0 };
    out.push(check("lemmas", "2F1 deviation decreasing over N = 10^2, 10^3, 10^4", monotone, 0.0));
    out
}

fn sup_on(grid: &[f64], k: impl Fn(f64, f64) -> f64) -> f64 {
    let mut m: f64 = 0.0;
    for &x in grid {
        for &y in grid {
            m = m.max(k(x, y).abs());
        }
    }
    m
}

fn kernels() -> Vec<Check> {
    let mut out = Vec::new();
    for (label, kind) in [
        ("GSE", CdKind::Gse { n: 6 }),
        ("GOE", CdKind::Goe { n: 6 }),
        ("LSE", CdKind::Lse { n: 6, alpha: 1.5 }),
        ("LOE", CdKind::Loe { n: 6, alpha: 0.5 }),
        ("LUE", CdKind::Lue { n: 6, alpha: 1.0 }),
    ] {
        let k = match CdKernel::new(kind) {
            Ok(k) => k,
            Err(e) => {
                out.push(failed("kernels", label, e));
                continue;
            }
        };
        let pts = [0.3, 0.9, 1.7, 2.6];
        let err = sup_on(&pts, |x, y| k.eval(x, y) - k.eval_sum(x, y));
        out.push(check("kernels", format!("{label} closed form vs spectral sum, N = 6"), err, 1e-9));
    }
    let n = 400;
    for (label, kind) in [("GSE", CdKind::Gse { n }), ("GOE", CdKind::Goe { n })] {
        match CdKernel::new(kind) {
            Ok(k) => {
                let err = (k.scaled(0.0, 0.0) - 1.0 / PI).abs();
                out.push(check("kernels", format!("{label} scaled diagonal -> 1/pi, N = 400"), err, 0.02));
                let grid: Vec<f64> = (0..=24).map(|i| -3.0 + 0.25 * i as f64).collect();
                let err = sup_on(&grid, |x, y| k.scaled(x, y) - sine_kernel(x, y));
                out.push(check("kernels", format!("{label} scaled kernel -> sine kernel on [-3,3]^2, N = 400"), err, 0.02));
            }
            Err(e) => out.push(failed("kernels", label, e)),
        }
    }
    for (label, kind, a) in [("LSE", CdKind::Lse { n, alpha: 2.5 }, 1.5), ("LOE", CdKind::Loe { n, alpha: 1.5 }, 2.5)] {
        match CdKernel::new(kind) {
            Ok(k) => {
                let grid: Vec<f64> = (0..=19).map(|i| 0.2 + 0.2 * i as f64).collect();
                let err = sup_on(&grid, |x, y| k.scaled(x, y) - bessel_kernel(a, x, y).unwrap_or(f64::NAN));
                out.push(check("kernels", format!("{label} scaled kernel -> Bessel kernel on [0.2,4]^2, N = 400"), err, 0.03));
            }
            Err(e) => out.push(failed("kernels", label, e)),
        }
    }
    out
}

fn determinants() -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (p, q) = (rng.random_range(2..8), rng.random_range(2..8));
        let a = DMatrix::from_fn(p, q, |_, _| rng.random_range(-0.5..0.5));
        let b = DMatrix::from_fn(q, p, |_, _| rng.random_range(-0.5..0.5));
        match (fredholm_det(&(&a * &b)), fredholm_det(&(&b * &a))) {
            (Ok(x), Ok(y)) => worst = worst.max((x - y).abs() / x.abs().max(y.abs())),
            _ => worst = f64::INFINITY,
        }
    }
    out.push(check("determinants", "det(I+AB) = det(I+BA), 20 random instances", worst, 1e-9));
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let pts: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        worst = match vandermonde4_det_check(&pts) {
            Ok((l, r)) => worst.max((l - r).abs() / r.abs()),
            Err(_) => f64::INFINITY,
        };
    }
    out.push(check("determinants", "confluent Vandermonde = prod (x_j - x_k)^4, N = 4", worst, 1e-10));
    for spec in [EnsembleSpec::gse(4), EnsembleSpec::goe(4), EnsembleSpec::lse(3, 0.7), EnsembleSpec::loe(4, 2.5)] {
        let spec = spec.expect("valid ensemble");
        match build_m(&spec) {
            Ok(m) => {
                let err = (&m - canonical_skew(m.nrows())).abs().max();
                out.push(check("determinants", format!("{spec}: M in canonical skew form"), err, 1e-7));
            }
            Err(e) => out.push(failed("determinants", spec.to_string(), e)),
        }
    }
    for spec in [EnsembleSpec::gse(2), EnsembleSpec::goe(2), EnsembleSpec::lse(2, 2.0), EnsembleSpec::loe(2, 1.5)] {
        let spec = spec.expect("valid ensemble");
        let stat = Statistic::scaled(&spec, TestFunction::gaussian());
        let r = mgf_squared(&spec, &stat, 0.3, &Resolution::default()).and_then(|d| Ok((d.value, mgf_direct(&spec, &stat, 0.3)?.value)));
        match r {
            Ok((det, direct)) => {
                let err = (det - direct * direct).abs() / (direct * direct);
                out.push(check("determinants", format!("{spec}: determinant vs direct quadrature, lambda = 0.3"), err, 1e-5));
            }
            Err(e) => out.push(failed("determinants", spec.to_string(), e)),
        }
    }
    out
}
