use std::f64::consts::PI;

use rmt_linstats::operator::{make_grid, Domain, Scheme};
use rmt_linstats::orthopoly::*;
use rmt_linstats::specfun::bessel_j_integral;

fn all_kinds(n: usize) -> Vec<CdKind> {
    vec![
        CdKind::Gse { n },
        CdKind::Goe { n },
        CdKind::Lse { n, alpha: 1.5 },
        CdKind::Loe { n, alpha: -0.5 },
        CdKind::Loe { n, alpha: 2.0 },
        CdKind::Lue { n, alpha: 0.5 },
    ]
}

#[test]
fn hermite_examples() {
    let h = HermiteSystem::new(500);
    let p0 = PI.powf(-0.25);
    assert!((h.phi(1, 1.0).unwrap() - 2f64.sqrt() * p0 * (-0.5f64).exp()).abs() < 1e-15);
    let expected = 0.5f64.sqrt() * h.phi(0, 0.0).unwrap() - h.phi(2, 0.0).unwrap();
    assert!((h.phi_deriv(1, 0.0).unwrap() - expected).abs() < 1e-15);
    let n = 200.0f64;
    let v = h.phi(400, 1.0 / (4.0 * n).sqrt()).unwrap();
    let lead = PI.powf(-0.5) * n.powf(-0.25) * 1f64.cos();
    assert!((v - lead).abs() < 5.0 * n.powf(-0.75), "{v} vs {lead}");
}

#[test]
fn hermite_derivative_by_finite_difference() {
    let h = HermiteSystem::new(50);
    let d = 1e-5;
    for j in [3, 10, 41] {
        for x in [-2.0, 0.3, 5.0] {
            let fd = (h.phi(j, x + d).unwrap() - h.phi(j, x - d).unwrap()) / (2.0 * d);
            assert!((h.phi_deriv(j, x).unwrap() - fd).abs() < 1e-6, "j={j} x={x}");
        }
    }
}

#[test]
fn hermite_orthonormal_to_60() {
    let g = make_grid(Domain::Real { radius: 16.0 }, 400, Scheme::Legendre).unwrap();
    let mut vals = vec![vec![0.0; 61]; g.len()];
    for (i, &x) in g.nodes.iter().enumerate() {
        HermiteSystem::phi_all(x, &mut vals[i]);
    }
    for j in 0..=60 {
        for k in j..=60 {
            let s: f64 = (0..g.len()).map(|i| g.weights[i] * vals[i][j] * vals[i][k]).sum();
            assert!((s - if j == k { 1.0 } else { 0.0 }).abs() < 1e-9, "{j},{k}");
        }
    }
}

#[test]
fn hermite_eps_against_quadrature_and_identity() {
    let h = HermiteSystem::new(20);
    let x = 0.4;
    for j in [0, 5, 8] {
        let left = make_grid(Domain::Interval { a: -14.0, b: x }, 200, Scheme::Legendre).unwrap();
        let right = make_grid(Domain::Interval { a: x, b: 14.0 }, 200, Scheme::Legendre).unwrap();
        let f = |t: f64| h.phi(j, t).unwrap();
        let q = 0.5 * (left.integrate(&left.sample(f)) - right.integrate(&right.sample(f)));
        assert!((h.eps_phi(j, x).unwrap() - q).abs() < 1e-9, "j={j}");
    }
    let (j, x) = (5usize, 0.7);
    let jf = j as f64;
    let l = jf.sqrt() * h.eps_phi(2 * j - 1, x).unwrap() - (jf + 0.5).sqrt() * h.eps_phi(2 * j + 1, x).unwrap();
    assert!((l - h.phi(2 * j, x).unwrap()).abs() < 1e-8);
}

#[test]
fn laguerre_derivative_and_eps() {
    let d = 1e-5;
    for a in [-0.5, 1.0, 2.5] {
        let s = LaguerreSystem::new(a, 40).unwrap();
        for j in [0, 4, 17] {
            for x in [0.6, 3.0, 22.0] {
                let fd = (s.value(j, LagVariant::Phi, x + d).unwrap() - s.value(j, LagVariant::Phi, x - d).unwrap()) / (2.0 * d);
                assert!((s.phi_deriv(j, x).unwrap() - fd).abs() < 1e-8, "a={a} j={j} x={x}");
                for v in [LagVariant::Tilde, LagVariant::Phi] {
                    let fe = (s.eps_value(j, v, x + d).unwrap() - s.eps_value(j, v, x - d).unwrap()) / (2.0 * d);
                    assert!((fe - s.value(j, v, x).unwrap()).abs() < 1e-7, "eps a={a} j={j} x={x} {v:?}");
                }
            }
        }
    }
    assert!(LaguerreSystem::new(-1.0, 4).is_err());
}

#[test]
fn laguerre_tilde_eps_scaling_limit() {
    let (n, alpha, x) = (400usize, 2.0, 1.0f64);
    let s = LaguerreSystem::new(alpha - 1.0, 2 * n + 2).unwrap();
    let v = s.eps_value(2 * n, LagVariant::Tilde, x * x / (8.0 * n as f64)).unwrap();
    let nf = n as f64;
    let lim = (2.0 * nf).powf(-0.5) * (bessel_j_integral(alpha - 1.0, x).unwrap() - 1.0);
    assert!((v - lim).abs() < 5.0 * nf.powf(-2.5) * 2.0 * nf, "{v} vs {lim}");
}

#[test]
fn cd_closed_form_matches_spectral_sum() {
    let xs: Vec<f64> = (0..10).map(|i| 0.15 + 0.55 * i as f64).collect();
    for n in [1, 2, 7, 30] {
        for kind in all_kinds(n) {
            let k = CdKernel::new(kind).unwrap();
            let grid: Vec<f64> = match kind {
                CdKind::Gse { .. } | CdKind::Goe { .. } => xs.iter().map(|x| x - 2.5).collect(),
                _ => xs.clone(),
            };
            for &x in &grid {
                for &y in &grid {
                    let (a, b) = (k.eval(x, y), k.eval_sum(x, y));
                    assert!((a - b).abs() < 1e-9, "{kind:?} ({x},{y}): {a} vs {b}");
                }
            }
            for d in [5e-8, 2e-7] {
                let near = k.eval(1.3, 1.3 + d) - k.eval_sum(1.3, 1.3 + d);
                assert!(near.abs() < 1e-7, "{kind:?} near diagonal, offset {d:e}: {near:e}");
            }
        }
    }
}

#[test]
fn cd_examples() {
    let k = CdKernel::new(CdKind::Gse { n: 3 }).unwrap();
    let h = HermiteSystem::new(6);
    let s: f64 = (0..=6).map(|j| h.phi(j, 0.0).unwrap().powi(2)).sum();
    assert!((k.eval(0.0, 0.0) - s).abs() < 1e-14);
    let gse = CdKernel::new(CdKind::Gse { n: 200 }).unwrap();
    assert!((gse.scaled(0.0, 0.0) - 1.0 / PI).abs() < 0.01);
    let goe = CdKernel::new(CdKind::Goe { n: 200 }).unwrap();
    assert!((goe.scaled(1.0, 2.0) - sine_kernel(1.0, 2.0)).abs() < 0.01);
    let lue = CdKernel::new(CdKind::Lue { n: 300, alpha: 1.0 }).unwrap();
    assert!((lue.scaled(1.3, 1.3) - bessel_kernel(1.0, 1.3, 1.3).unwrap()).abs() < 0.02);
    assert!(CdKernel::new(CdKind::Lse { n: 2, alpha: 0.0 }).is_err());
    assert!(CdKernel::new(CdKind::Loe { n: 2, alpha: -2.0 }).is_err());
    assert!(CdKernel::new(CdKind::Goe { n: 0 }).is_err());
}

#[test]
fn bessel_kernel_diagonal_is_the_limit() {
    let (a, x) = (1.5, 2.0);
    let lim = 0.5 * (bessel_kernel(a, x, x * (1.0 + 1e-5)).unwrap() + bessel_kernel(a, x, x * (1.0 - 1e-5)).unwrap());
    assert!((bessel_kernel(a, x, x).unwrap() - lim).abs() < 1e-6);
    assert!((bessel_kernel(a, 1.0, 2.5).unwrap() - bessel_kernel(a, 2.5, 1.0).unwrap()).abs() > 1e-3);
}

#[test]
fn scaling_errors_decrease_with_n() {
    let pts = [(0.0, 0.0), (0.5, -1.0), (2.0, 1.2)];
    let bulk = |kind: fn(usize) -> CdKind, n| {
        let k = CdKernel::new(kind(n)).unwrap();
        pts.iter().map(|&(x, y)| (k.scaled(x, y) - sine_kernel(x, y)).abs()).fold(0.0, f64::max)
    };
    let edge = |kind: fn(usize) -> CdKind, order: f64, n| {
        let k = CdKernel::new(kind(n)).unwrap();
        pts.iter()
            .map(|&(x, y)| (x + 0.5, y.abs() + 0.7))
            .map(|(x, y)| (k.scaled(x, y) - bessel_kernel(order, x, y).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    for (label, e) in [
        ("GSE", [50, 200, 800].map(|n| bulk(|n| CdKind::Gse { n }, n))),
        ("GOE", [50, 200, 800].map(|n| bulk(|n| CdKind::Goe { n }, n))),
        ("LSE", [50, 200, 800].map(|n| edge(|n| CdKind::Lse { n, alpha: 2.0 }, 1.0, n))),
        ("LOE", [50, 200, 800].map(|n| edge(|n| CdKind::Loe { n, alpha: 1.0 }, 2.0, n))),
    ] {
        assert!(e[0] > e[1] && e[1] > e[2], "{label}: {e:?}");
    }
}
