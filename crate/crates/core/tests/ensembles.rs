use nalgebra::DMatrix;
use proptest::prelude::*;
use rmt_linstats::ensembles::*;
use rmt_linstats::operator::{fredholm_det, make_grid, Domain, Scheme, StatFamily, TestFunction};
use rmt_linstats::orthopoly::HermiteSystem;

fn gauss_stat(spec: &EnsembleSpec) -> Statistic {
    Statistic::scaled(spec, TestFunction::gaussian())
}

fn phi(j: usize, x: f64) -> f64 {
    HermiteSystem::new(j).phi(j, x).unwrap()
}

fn skew_specs() -> Vec<EnsembleSpec> {
    vec![
        EnsembleSpec::gse(2).unwrap(),
        EnsembleSpec::goe(2).unwrap(),
        EnsembleSpec::lse(2, 2.0).unwrap(),
        EnsembleSpec::loe(2, 1.5).unwrap(),
    ]
}

#[test]
fn parameter_ranges() {
    assert!(EnsembleSpec::goe(3).is_err());
    assert!(EnsembleSpec::loe(5, 1.0).is_err());
    assert!(EnsembleSpec::lse(2, 0.0).is_err());
    assert!(EnsembleSpec::loe(2, -2.0).is_err());
    assert!(EnsembleSpec::loe(2, -1.5).is_ok());
    assert!(EnsembleSpec::lue(2, -1.0).is_err());
    assert!(EnsembleSpec::gue(0).is_err());
    assert!(EnsembleSpec::new(Family::Gaussian, 3, 2, 0.0).is_err());
    assert!(build_psi(&EnsembleSpec::gue(2).unwrap()).is_err());
}

#[test]
fn weights_follow_ensemble_conventions() {
    let x: f64 = 0.7;
    assert!((EnsembleSpec::gse(2).unwrap().weight(x) - (-x * x).exp()).abs() < 1e-15);
    assert!((EnsembleSpec::goe(2).unwrap().weight(x) - (-x * x / 2.0).exp()).abs() < 1e-15);
    assert!((EnsembleSpec::lse(2, 2.0).unwrap().weight(x) - x * x * (-x).exp()).abs() < 1e-15);
    assert!((EnsembleSpec::loe(2, 1.5).unwrap().weight(x) - x.powf(0.75) * (-x / 2.0).exp()).abs() < 1e-15);
}

#[test]
fn psi_examples() {
    let gse = build_psi(&EnsembleSpec::gse(3).unwrap()).unwrap();
    assert!(gse.eval(0.0).0[1].abs() < 1e-15);
    let goe = build_psi(&EnsembleSpec::goe(4).unwrap()).unwrap();
    for x in [-1.3, 0.2, 2.1] {
        let (p, _) = goe.eval(x);
        for n in 0..2 {
            let phi = phi(2 * n, x);
            assert!((p[2 * n] - phi).abs() < 1e-13, "psi_{} at {x}", 2 * n);
        }
    }
    let spec = EnsembleSpec::lse(2, 2.0).unwrap();
    let lse = build_psi(&spec).unwrap();
    let vals: Vec<f64> = [0.3, 1.0, 2.5, 4.0, 7.5].iter().map(|&x: &f64| lse.eval(x).0[0] * x.powf(-1.0) * (x / 2.0).exp()).collect();
    for v in &vals {
        assert!((v - vals[0]).abs() < 1e-8 * vals[0].abs());
    }
}

/// Lagrange interpolation through `(xs, ys)` evaluated at `t`.
fn lagrange(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..xs.len() {
        let mut l = 1.0;
        for j in 0..xs.len() {
            if i != j {
                l *= (t - xs[j]) / (xs[i] - xs[j]);
            }
        }
        s += ys[i] * l;
    }
    s
}

#[test]
fn psi_over_weight_is_polynomial_of_degree_j() {
    for spec in [
        EnsembleSpec::gse(3).unwrap(),
        EnsembleSpec::goe(6).unwrap(),
        EnsembleSpec::lse(3, 1.5).unwrap(),
        EnsembleSpec::loe(6, 0.5).unwrap(),
    ] {
        let psi = build_psi(&spec).unwrap();
        let ratio = |x: f64, j: usize| {
            let w = spec.weight(x);
            let d = if spec.beta == 4 { w.sqrt() } else { w };
            psi.eval(x).0[j] / d
        };
        let (lo, hi) = if spec.family == Family::Gaussian { (-1.5, 1.5) } else { (0.5, 4.0) };
        for j in 0..psi.len() {
            let xs: Vec<f64> = (0..=j).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / (j + 1) as f64).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| ratio(x, j)).collect();
            let t = lo + 0.37 * (hi - lo) / (j + 1) as f64;
            let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1.0);
            let err = (lagrange(&xs, &ys, t) - ratio(t, j)).abs() / scale;
            assert!(err < 1e-8, "{spec} psi_{j}: {err:e}");
        }
    }
}

#[test]
fn m_examples_and_inverse() {
    for (spec, tol) in [
        (EnsembleSpec::gse(4).unwrap(), 1e-8),
        (EnsembleSpec::goe(8).unwrap(), 1e-8),
        (EnsembleSpec::loe(6, 1.5).unwrap(), 1e-7),
    ] {
        let m = build_m(&spec).unwrap();
        assert_eq!(m.nrows(), if spec.beta == 4 { 2 * spec.n } else { spec.n });
        assert!((&m - canonical_skew(m.nrows())).amax() < tol, "{spec}");
    }
    for n in 1..=8 {
        let m = build_m(&EnsembleSpec::gse(n).unwrap()).unwrap();
        let inv = m.clone().try_inverse().unwrap();
        assert!((inv + &m).amax() < 1e-6);
        assert!((&m + m.transpose()).amax() < 1e-8);
    }
}

#[test]
fn k22_closed_form_matches_mu_sum() {
    let probes = [0.4, 1.1, 2.3];
    for n in [2, 4] {
        for spec in [
            EnsembleSpec::gse(n).unwrap(),
            EnsembleSpec::goe(n).unwrap(),
            EnsembleSpec::lse(n, 2.0).unwrap(),
            EnsembleSpec::loe(n, 1.5).unwrap(),
        ] {
            let k = k22_kernel(&spec).unwrap();
            for &x in &probes {
                for &y in &probes {
                    let (a, b) = (k.eval(x, y), k.mu_sum(x, y).unwrap());
                    assert!((a - b).abs() < 1e-7, "{spec} at ({x},{y}): {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn goe_k22_rank_one_part() {
    let spec = EnsembleSpec::goe(4).unwrap();
    let k = k22_kernel(&spec).unwrap();
    let h = HermiteSystem::new(8);
    for (x, y) in [(0.3, -0.8), (1.2, 0.5), (-2.0, 1.7)] {
        let diff = k.eval(x, y) - k.cd.eval(x, y);
        let expected = 2f64.sqrt() * h.eps_phi(4, x).unwrap() * h.phi(3, y).unwrap();
        assert!((diff - expected).abs() < 1e-8, "({x},{y}): {diff} vs {expected}");
    }
}

#[test]
fn gse_k22_against_spectral_sum() {
    let spec = EnsembleSpec::gse(3).unwrap();
    let k = k22_kernel(&spec).unwrap();
    let h = HermiteSystem::new(10);
    for (x, y) in [(0.1, 0.9), (-1.4, 0.6), (2.2, -0.3)] {
        let s: f64 = (0..2 * spec.n + 1).map(|j| h.phi(j, x).unwrap() * h.phi(j, y).unwrap()).sum();
        let corr = (spec.n as f64 + 0.5).sqrt() * h.eps_phi(2 * spec.n + 1, x).unwrap() * h.phi(2 * spec.n, y).unwrap();
        let expected = 0.5 * (s + corr);
        assert!((k.eval(x, y) - expected).abs() < 1e-10, "({x},{y})");
    }
}

#[test]
fn mgf_at_zero_lambda_is_one() {
    let res = Resolution::default();
    for spec in skew_specs() {
        assert_eq!(mgf_squared(&spec, &gauss_stat(&spec), 0.0, &res).unwrap().value, 1.0);
        assert_eq!(mgf_direct(&spec, &gauss_stat(&spec), 0.0).unwrap().value, 1.0);
    }
    let gue = EnsembleSpec::gue(3).unwrap();
    assert_eq!(mgf_beta2(&gue, &gauss_stat(&gue), 0.0, &res).unwrap().value, 1.0);
    assert!(mgf_beta2(&EnsembleSpec::gse(2).unwrap(), &gauss_stat(&gue), 0.3, &res).is_err());
    assert!(mgf_squared(&gue, &gauss_stat(&gue), 0.3, &res).is_err());
}

#[test]
fn determinant_examples_against_direct() {
    let res = Resolution::default();
    let goe = EnsembleSpec::goe(2).unwrap();
    let d = mgf_direct(&goe, &gauss_stat(&goe), 0.5).unwrap().value;
    let v = mgf_squared(&goe, &gauss_stat(&goe), 0.5, &res).unwrap().value;
    assert!((v - d * d).abs() < 1e-5 * d * d);
    let lue = EnsembleSpec::lue(2, 1.0).unwrap();
    let d = mgf_direct(&lue, &gauss_stat(&lue), 0.4).unwrap().value;
    let v = mgf_beta2(&lue, &gauss_stat(&lue), 0.4, &res).unwrap().value;
    assert!((v - d).abs() < 1e-6 * d);
}

#[test]
fn direct_quadrature_is_self_consistent() {
    let gse = EnsembleSpec::gse(2).unwrap();
    let est = mgf_direct(&gse, &gauss_stat(&gse), 0.3).unwrap();
    assert!(est.error < 1e-8, "{est:?}");
    assert!(mgf_direct(&EnsembleSpec::gue(4).unwrap(), &gauss_stat(&gse), 0.3).is_err());
}

#[test]
fn direct_n1_reduces_to_one_dimensional_integral() {
    // LUE N=1, α=1: weight x e^{−x}, F(√(4x)) = exp(−2x)
    let spec = EnsembleSpec::lue(1, 1.0).unwrap();
    let lambda = 0.6;
    let g = make_grid(Domain::HalfLine { radius: 60.0 }, 300, Scheme::Legendre).unwrap();
    let num = g.integrate(&g.sample(|x| x * (-x).exp() * (-lambda * (-2.0 * x).exp()).exp()));
    let den = g.integrate(&g.sample(|x| x * (-x).exp()));
    let d = mgf_direct(&spec, &gauss_stat(&spec), lambda).unwrap().value;
    assert!((d - num / den).abs() < 1e-10);
}

#[test]
fn gue_determinant_equals_hermite_sum_kernel() {
    let n = 5;
    let spec = EnsembleSpec::gue(n).unwrap();
    let stat = gauss_stat(&spec);
    let lambda = 0.7;
    let g = make_grid(Domain::Real { radius: 9.0 }, 240, Scheme::Legendre).unwrap();
    let m = g.len();
    let phis: Vec<Vec<f64>> = g.nodes.iter().map(|&x| (0..n).map(|j| phi(j, x)).collect()).collect();
    let t = DMatrix::from_fn(m, m, |i, j| {
        let k: f64 = (0..n).map(|l| phis[i][l] * phis[j][l]).sum();
        let f = (-lambda * stat.value(g.nodes[j])).exp() - 1.0;
        g.weights[i].sqrt() * k * f * g.weights[j].sqrt()
    });
    let oracle = fredholm_det(&t).unwrap();
    let v = mgf_beta2(&spec, &stat, lambda, &Resolution::default()).unwrap().value;
    assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
}

#[test]
fn finite_moments_match_direct_log_derivatives() {
    let h = 1e-3;
    for spec in skew_specs() {
        let stat = gauss_stat(&spec);
        let lp = mgf_direct(&spec, &stat, h).unwrap().value.ln();
        let lm = mgf_direct(&spec, &stat, -h).unwrap().value.ln();
        let mean = -(lp - lm) / (2.0 * h);
        let var = (lp + lm) / (h * h);
        let fm = finite_moments(&spec, &stat, &Resolution::default()).unwrap();
        assert!((fm.mean - mean).abs() < 1e-6, "{spec}: mean {} vs {mean}", fm.mean);
        assert!((fm.variance - var).abs() < 1e-5, "{spec}: variance {} vs {var}", fm.variance);
    }
}

#[test]
fn loe_boundary_factor_restores_direct_agreement() {
    let spec = EnsembleSpec::loe(2, 1.5).unwrap();
    let stat = Statistic::scaled(&spec, TestFunction::new(StatFamily::Lorentzian, 1.0, 0.5, 1.0).unwrap());
    assert!(stat.value(0.0) > 0.1);
    let v = mgf_squared(&spec, &stat, 0.4, &Resolution::default()).unwrap();
    let d = mgf_direct(&spec, &stat, 0.4).unwrap().value;
    assert!((v.boundary_factor - 1.0).abs() > 1e-4);
    assert!((v.value - d * d).abs() < 1e-8 * d * d, "{v:?} vs {}", d * d);
    let bump = Statistic::scaled(&spec, TestFunction::new(StatFamily::HalfBump, 1.0, 0.0, 1.0).unwrap());
    assert_eq!(mgf_squared(&spec, &bump, 0.4, &Resolution::default()).unwrap().boundary_factor, 1.0);
}

#[test]
fn identity_examples() {
    assert_eq!(vandermonde4_det_check(&[]).unwrap(), (1.0, 1.0));
    let (l, r) = vandermonde4_det_check(&[0.4]).unwrap();
    assert_eq!((l, r), (1.0, 1.0));
    let (l, r) = vandermonde4_det_check(&[0.0, 1.0]).unwrap();
    assert!((l - 1.0).abs() < 1e-14 && r == 1.0);
    assert!(vandermonde4_det_check(&[0.0; 7]).is_err());
    let g = make_grid(Domain::Interval { a: -8.0, b: 8.0 }, 120, Scheme::Legendre).unwrap();
    let z = |_: f64| 0.0;
    assert_eq!(debruijn_check(DeBruijnKind::Quaternion, &[&z, &z], &[&z, &z], &g).unwrap(), (0.0, 0.0));
    let inf = make_grid(Domain::Real { radius: 8.0 }, 40, Scheme::Legendre).unwrap();
    assert!(debruijn_check(DeBruijnKind::Orthogonal, &[&z], &[], &inf).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn mgf_square_root_decreases_in_lambda(l1 in 0.0f64..2.0, dl in 0.05f64..1.0, which in 0usize..4) {
        let spec = [
            EnsembleSpec::gse(3).unwrap(),
            EnsembleSpec::goe(4).unwrap(),
            EnsembleSpec::lse(3, 1.0).unwrap(),
            EnsembleSpec::loe(2, 0.5).unwrap(),
        ][which];
        let stat = gauss_stat(&spec);
        let res = Resolution::default();
        let a = mgf_squared(&spec, &stat, l1, &res).unwrap().value;
        let b = mgf_squared(&spec, &stat, l1 + dl, &res).unwrap().value;
        prop_assert!(a >= 0.0 && b >= 0.0);
        prop_assert!(b.sqrt() < a.sqrt());
    }

    #[test]
    fn vandermonde_identity_random_points(pts in proptest::collection::vec(-2.0f64..2.0, 1..=4)) {
        let (l, r) = vandermonde4_det_check(&pts).unwrap();
        prop_assume!(r > 1e-12);
        prop_assert!((l - r).abs() <= 1e-8 * r);
    }
}
