use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{build_m, build_psi, KernelFactors};
use super::nested::Panels;
use super::{EnsembleSpec, Family, ScalingRule, Statistic};
use crate::error::{Error, Result};
use crate::operator::{composite, cumulants_from_t, fredholm_det, NodeMap, QuadratureGrid};

/// Discretization controls for the determinant formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Gauss-Legendre nodes per panel.
    pub per_panel: usize,
    /// Multiplier of the automatic panel length.
    pub panel_scale: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { per_panel: 16, panel_scale: 1.0 }
    }
}

impl Resolution {
    pub fn refined(&self) -> Self {
        Resolution { per_panel: self.per_panel + 8, ..*self }
    }
}

/// Quadrature grid on the support of the statistic, with `F` and `dF/dx`
/// sampled at the nodes.
#[derive(Debug, Clone)]
pub struct StatGrid {
    pub grid: QuadratureGrid,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
}

/// Value of `[G]²` (or `G` for β = 2) with the discrepancy against a
/// refined grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfValue {
    pub value: f64,
    pub discrepancy: f64,
    /// Hard-edge factor included in `value` (1 unless β = 1 Laguerre with
    /// `f(0) ≠ 0`).
    pub boundary_factor: f64,
}

/// Finite-N mean and variance of the statistic from the λ and λ²
/// coefficients of the trace-log expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteMoments {
    pub mean: f64,
    pub variance: f64,
    /// Parts of `mean` and `variance` contributed by the hard-edge factor.
    pub boundary_mean: f64,
    pub boundary_variance: f64,
}

/// Highest degree entering the kernel.
fn top_degree(spec: &EnsembleSpec) -> f64 {
    if spec.beta == 4 {
        2.0 * spec.n as f64 + 2.0
    } else {
        spec.n as f64 + 1.0
    }
}

/// Build the grid on which every column of the determinant is supported.
/// Returns `None` when the statistic vanishes on the spectrum.
pub fn stat_grid(spec: &EnsembleSpec, stat: &Statistic, res: &Resolution) -> Result<Option<StatGrid>> {
    if stat.f.is_zero() {
        return Ok(None);
    }
    if res.per_panel < 2 || !(res.panel_scale > 0.0) {
        return Err(Error::invalid("resolution needs >= 2 nodes per panel and a positive panel scale"));
    }
    let (sa, sb) = stat.f.support(1e-17 * stat.f.amplitude.abs());
    let m = top_degree(spec);
    let width = stat.f.width;
    let panels = match spec.family {
        Family::Gaussian => {
            let cm = match stat.rule {
                ScalingRule::Identity => 1.0,
                ScalingRule::Linear(c) => c.sqrt(),
                ScalingRule::Sqrt(_) => {
                    return Err(Error::Unsupported("square-root scaling on the real line".into()));
                }
            };
            let rx = (2.0 * m + 2.0).sqrt() + 9.0;
            let xa = stat.rule.inverse(sa).max(-rx);
            let xb = stat.rule.inverse(sb).min(rx);
            if xb <= xa {
                return Ok(None);
            }
            let kernel_h = 0.5 * std::f64::consts::TAU / (2.0 * m + 1.0).sqrt() * cm;
            let h = res.panel_scale * kernel_h.min(width);
            Panels::new(cm * xa, cm * xb, h, res.per_panel, NodeMap::Linear(cm), false)
        }
        Family::Laguerre => {
            let cm = match stat.rule {
                ScalingRule::Sqrt(c) => c,
                _ => 1.0,
            };
            let xmax = 4.0 * m + 2.0 * spec.alpha.abs() + 80.0;
            let (xa, xb) = match stat.rule {
                ScalingRule::Sqrt(_) => (stat.rule.inverse(sa.max(0.0)), stat.rule.inverse(sb)),
                _ => (stat.rule.inverse(sa).max(0.0), stat.rule.inverse(sb)),
            };
            let xb = xb.min(xmax);
            if sb <= 0.0 || xb <= xa {
                return Ok(None);
            }
            let (va, vb) = ((cm * xa).sqrt(), (cm * xb).sqrt());
            let stat_h = match stat.rule {
                ScalingRule::Sqrt(_) => width,
                ScalingRule::Identity => width / (2.0 * vb),
                ScalingRule::Linear(c) => width / (2.0 * c.sqrt() * vb),
            };
            let kernel_h = 0.5 * std::f64::consts::PI * (cm / m).sqrt();
            let h = res.panel_scale * kernel_h.min(stat_h);
            Panels::new(va, vb, h, res.per_panel, NodeMap::Square(cm), va == 0.0)
        }
    };
    let grid = composite(&panels.edges, panels.q, panels.map);
    let f = grid.nodes.iter().map(|&x| stat.value(x)).collect();
    let df = grid.nodes.iter().map(|&x| stat.deriv(x)).collect();
    Ok(Some(StatGrid { grid, f, df }))
}

/// `K diag(d)` for a kernel matrix `K`.
fn scale_cols(k: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut m = k.clone();
    for (j, s) in d.iter().enumerate() {
        m.column_mut(j).scale_mut(*s);
    }
    m
}

/// Nyström matrices for the three structural pieces of the determinant:
/// `K`, `Kε`, and (β = 1) the grid ε kernel.
struct Pieces {
    k: DMatrix<f64>,
    ke: DMatrix<f64>,
    e: Option<DMatrix<f64>>,
    w: Vec<f64>,
}

fn pieces(spec: &EnsembleSpec, sg: &StatGrid) -> Result<Pieces> {
    let fac = KernelFactors::new(spec, &sg.grid.nodes)?;
    let k = fac.kernel();
    let ke = if spec.beta == 2 { DMatrix::zeros(0, 0) } else { fac.kernel_eps() };
    let e = if spec.beta == 1 { Some(sg.grid.eps_matrix()) } else { None };
    Ok(Pieces { k, ke, e, w: sg.grid.weights.clone() })
}

/// `T = A(g) − Kε diag(h w) − [K diag(p w) E diag(r w)]` where `A(g) = K diag(g w)`.
fn assemble(pc: &Pieces, g: &[f64], h: &[f64], pr: Option<(&[f64], &[f64])>) -> DMatrix<f64> {
    let w = &pc.w;
    let gw: Vec<f64> = g.iter().zip(w).map(|(a, b)| a * b).collect();
    let mut t = scale_cols(&pc.k, &gw);
    if !h.is_empty() {
        let hw: Vec<f64> = h.iter().zip(w).map(|(a, b)| a * b).collect();
        t -= scale_cols(&pc.ke, &hw);
    }
    if let (Some((p, r)), Some(e)) = (pr, &pc.e) {
        let pw: Vec<f64> = p.iter().zip(w).map(|(a, b)| a * b).collect();
        let rw: Vec<f64> = r.iter().zip(w).map(|(a, b)| a * b).collect();
        let left = scale_cols(&pc.k, &pw);
        t -= scale_cols(&(left * e), &rw);
    }
    t
}

/// `[G_N^{(β)}(f_λ)]²` on a given grid, for β ∈ {1, 4}: the Fredholm
/// determinant times the hard-edge factor.
pub fn mgf_squared_on(spec: &EnsembleSpec, stat: &Statistic, lambda: f64, sg: &StatGrid) -> Result<(f64, f64)> {
    let d = fredholm_part(spec, lambda, sg)?;
    let b = match EdgeData::new(spec, stat, sg)? {
        Some(e) => e.factor(lambda)?,
        None => 1.0,
    };
    Ok((d * b, b))
}

fn fredholm_part(spec: &EnsembleSpec, lambda: f64, sg: &StatGrid) -> Result<f64> {
    if spec.beta == 2 {
        return Err(Error::Unsupported("use mgf_beta2 for beta = 2".into()));
    }
    let pc = pieces(spec, sg)?;
    let (f, fp) = f_lambda(lambda, sg);
    let t = if spec.beta == 4 {
        let g: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        assemble(&pc, &g, &fp, None)
    } else {
        let g: Vec<f64> = f.iter().map(|v| v * v + 2.0 * v).collect();
        assemble(&pc, &g, &fp, Some((&f, &fp)))
    };
    fredholm_det(&t)
}

fn f_lambda(lambda: f64, sg: &StatGrid) -> (Vec<f64>, Vec<f64>) {
    let f = sg.f.iter().map(|v| (-lambda * v).exp_m1()).collect();
    let fp = sg.f.iter().zip(&sg.df).map(|(v, d)| -lambda * d * (-lambda * v).exp()).collect();
    (f, fp)
}

fn with_refinement(res: &Resolution, mut eval: impl FnMut(&Resolution) -> Result<(f64, f64)>) -> Result<MgfValue> {
    let (a, _) = eval(res)?;
    let (b, boundary_factor) = eval(&res.refined())?;
    let discrepancy = (a - b).abs();
    if discrepancy > 1e-5 * b.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "grid under-resolved: refinement changed the determinant by {discrepancy:.3e}"
        )));
    }
    Ok(MgfValue { value: b, discrepancy, boundary_factor })
}

/// `[G_N^{(β)}(f_λ)]²` for β ∈ {1, 4} from the scalar determinant formulas
/// `det(I + 2Kf − Kεf')` (β = 4) and
/// `det(I + K(f² + 2f) − Kεf' − Kfεf')` (β = 1).
pub fn mgf_squared(spec: &EnsembleSpec, stat: &Statistic, lambda: f64, res: &Resolution) -> Result<MgfValue> {
    if spec.beta == 2 {
        return Err(Error::Unsupported("use mgf_beta2 for beta = 2".into()));
    }
    if lambda == 0.0 {
        return Ok(MgfValue { value: 1.0, discrepancy: 0.0, boundary_factor: 1.0 });
    }
    with_refinement(res, |r| match stat_grid(spec, stat, r)? {
        None => Ok((1.0, 1.0)),
        Some(sg) => mgf_squared_on(spec, stat, lambda, &sg),
    })
}

/// `G_N^{(2)}(f_λ) = det(I + K_N f_λ)`.
pub fn mgf_beta2(spec: &EnsembleSpec, stat: &Statistic, lambda: f64, res: &Resolution) -> Result<MgfValue> {
    if spec.beta != 2 {
        return Err(Error::Unsupported("mgf_beta2 needs beta = 2".into()));
    }
    if lambda == 0.0 {
        return Ok(MgfValue { value: 1.0, discrepancy: 0.0, boundary_factor: 1.0 });
    }
    with_refinement(res, |r| match stat_grid(spec, stat, r)? {
        None => Ok((1.0, 1.0)),
        Some(sg) => {
            let pc = pieces(spec, &sg)?;
            let (f, _) = f_lambda(lambda, &sg);
            Ok((fredholm_det(&assemble(&pc, &f, &[], None))?, 1.0))
        }
    })
}

/// Exact finite-N mean and variance of `Σ F(rule(x_j))` from the first two
/// Taylor coefficients of `T(λ)`.
pub fn finite_moments(spec: &EnsembleSpec, stat: &Statistic, res: &Resolution) -> Result<FiniteMoments> {
    let sg = match stat_grid(spec, stat, res)? {
        None => return Ok(FiniteMoments { mean: 0.0, variance: 0.0, boundary_mean: 0.0, boundary_variance: 0.0 }),
        Some(sg) => sg,
    };
    let pc = pieces(spec, &sg)?;
    let f = &sg.f;
    let df = &sg.df;
    let neg: Vec<f64> = f.iter().map(|v| -v).collect();
    let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
    let ffp: Vec<f64> = f.iter().zip(df).map(|(a, b)| a * b).collect();
    let coeffs = match spec.beta {
        2 => {
            let half: Vec<f64> = sq.iter().map(|v| 0.5 * v).collect();
            let t1 = assemble(&pc, &neg, &[], None);
            let t2 = assemble(&pc, &half, &[], None);
            cumulants_from_t(&t1, &t2)
        }
        4 => {
            let g1: Vec<f64> = f.iter().map(|v| -2.0 * v).collect();
            let h1: Vec<f64> = df.iter().map(|v| -v).collect();
            let t1 = assemble(&pc, &g1, &h1, None);
            let t2 = assemble(&pc, &sq, &ffp, None);
            cumulants_from_t(&t1, &t2)
        }
        _ => {
            let g1: Vec<f64> = f.iter().map(|v| -2.0 * v).collect();
            let h1: Vec<f64> = df.iter().map(|v| -v).collect();
            let g2: Vec<f64> = sq.iter().map(|v| 2.0 * v).collect();
            let t1 = assemble(&pc, &g1, &h1, None);
            let t2 = assemble(&pc, &g2, &ffp, Some((f, df)));
            cumulants_from_t(&t1, &t2)
        }
    };
    let (mean, variance) = if spec.beta == 2 {
        (-coeffs.linear, 2.0 * coeffs.quadratic)
    } else {
        (-0.5 * coeffs.linear, coeffs.quadratic)
    };
    let (bm, bv) = match EdgeData::new(spec, stat, &sg)? {
        None => (0.0, 0.0),
        Some(e) => {
            // log of the factor is smooth in λ and vanishes at 0
            let h = 1e-3;
            let l = |x: f64| -> Result<f64> { Ok(e.factor(x)?.ln()) };
            let (p, m, p2, m2) = (l(h)?, l(-h)?, l(2.0 * h)?, l(-2.0 * h)?);
            let d1 = (8.0 * (p - m) - (p2 - m2)) / (12.0 * h);
            let d2 = (-p2 + 16.0 * p + 16.0 * m - m2) / (12.0 * h * h);
            (-0.5 * d1, 0.5 * d2)
        }
    };
    Ok(FiniteMoments { mean: mean + bm, variance: variance + bv, boundary_mean: bm, boundary_variance: bv })
}

/// Data for the hard-edge factor of the β = 1 Laguerre determinant.
///
/// With `g = 1 + f`, the Gram matrix of the de Bruijn Pfaffian is
/// `A_jk = ∫ g ψ_j ε(g ψ_k)`. On `[0, ∞)` the identity
/// `ε(g ψ) = g εψ − ε(f' εψ) − ½ f(0) εψ(0)` carries a constant that is
/// absent from the Fredholm form, so
/// `[G]² = det(I + T) · det A / det(A − r sᵀ)` with `r_j = ∫ g ψ_j` and
/// `s_k = −½ f(0) εψ_k(0)`.
struct EdgeData {
    m: DMatrix<f64>,
    psi: DMatrix<f64>,
    epsi: DMatrix<f64>,
    eps0: Vec<f64>,
    e: DMatrix<f64>,
    w: Vec<f64>,
    stat_f: Vec<f64>,
    f0: f64,
}

impl EdgeData {
    fn new(spec: &EnsembleSpec, stat: &Statistic, sg: &StatGrid) -> Result<Option<Self>> {
        if spec.family != Family::Laguerre || spec.beta != 1 {
            return Ok(None);
        }
        let f0 = stat.value(0.0);
        if f0 == 0.0 {
            return Ok(None);
        }
        let basis = build_psi(spec)?;
        let len = basis.len();
        let n = sg.grid.len();
        let mut psi = DMatrix::zeros(n, len);
        let mut epsi = DMatrix::zeros(n, len);
        for (i, &x) in sg.grid.nodes.iter().enumerate() {
            let (p, _) = basis.eval(x);
            let e = basis.eval_eps(x);
            for j in 0..len {
                psi[(i, j)] = p[j];
                epsi[(i, j)] = e[j];
            }
        }
        Ok(Some(EdgeData {
            m: build_m(spec)?,
            psi,
            epsi,
            eps0: basis.eval_eps(0.0),
            e: sg.grid.eps_matrix(),
            w: sg.grid.weights.clone(),
            stat_f: sg.f.clone(),
            f0,
        }))
    }

    fn factor(&self, lambda: f64) -> Result<f64> {
        let len = self.m.nrows();
        let fw: Vec<f64> = self.stat_f.iter().zip(&self.w).map(|(v, w)| (-lambda * v).exp_m1() * w).collect();
        let fpsi = scale_rows(&self.psi, &fw);
        // a_jk = ∫ f ψ_j εψ_k, b_jk = ∫ f ψ_j ε(f ψ_k)
        let a = fpsi.transpose() * &self.epsi;
        let b = fpsi.transpose() * (&self.e * &fpsi);
        let full = &self.m + &a - a.transpose() + b;
        let f0 = (-lambda * self.f0).exp_m1();
        let mut paper = full.clone();
        for j in 0..len {
            let r = -2.0 * self.eps0[j] + fpsi.column(j).sum();
            for k in 0..len {
                paper[(j, k)] -= r * (-0.5 * f0 * self.eps0[k]);
            }
        }
        let den = paper.determinant();
        if den == 0.0 || !den.is_finite() {
            return Err(Error::Numerical("degenerate hard-edge Gram matrix".into()));
        }
        Ok(full.determinant() / den)
    }
}

fn scale_rows(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, s) in d.iter().enumerate() {
        out.row_mut(i).scale_mut(*s);
    }
    out
}
