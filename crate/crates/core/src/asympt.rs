//! Large-N means and variances of scaled linear statistics: the unitary
//! limits (sine and Bessel kernels) and the expansions with their 1/√N and
//! 1/N corrections for the symplectic and orthogonal ensembles.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, Family};
use crate::error::{Error, Result};
use crate::gauss::legendre_cached;
use crate::operator::TestFunction;
use crate::orthopoly::{bessel_kernel_from, sinc, BesselTriple};
use crate::specfun::{bessel_j_integral, sine_integral};

/// Order of magnitude of one term of an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "N^-1/2")]
    InvSqrtN,
    #[serde(rename = "N^-1")]
    InvN,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub order: Order,
    pub value: f64,
}

fn term(label: &str, order: Order, value: f64) -> Term {
    Term { label: label.to_string(), order, value }
}

/// Mean and variance of `Σ F(rule(x_j))` from an asymptotic formula, with
/// every displayed term listed separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub ensemble: String,
    /// `None` for the N → ∞ limit.
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub mean: f64,
    pub variance: f64,
    pub mean_terms: Vec<Term>,
    pub variance_terms: Vec<Term>,
    /// Largest change of any term between two quadrature resolutions.
    pub discrepancy: f64,
    /// `|F|` at the truncation point of the outer integrals.
    pub truncation: f64,
}

impl AsymptoticReport {
    pub fn leading_mean(&self) -> f64 {
        sum_order(&self.mean_terms, Order::One)
    }

    pub fn leading_variance(&self) -> f64 {
        sum_order(&self.variance_terms, Order::One)
    }

    /// The expansion may turn negative when corrections dominate at small N.
    pub fn variance_is_negative(&self) -> bool {
        self.variance < 0.0
    }

    pub fn mean_term(&self, label: &str) -> Option<f64> {
        self.mean_terms.iter().find(|t| t.label == label).map(|t| t.value)
    }

    pub fn variance_term(&self, label: &str) -> Option<f64> {
        self.variance_terms.iter().find(|t| t.label == label).map(|t| t.value)
    }
}

fn sum_order(terms: &[Term], o: Order) -> f64 {
    terms.iter().filter(|t| t.order == o).map(|t| t.value).sum()
}

/// Nodes per panel of the outer rule; the reported discrepancy compares
/// against `per_panel + 8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptResolution {
    pub per_panel: usize,
    /// Upper limit of the inner `∫_x^∞ B(y, z) dz` integrals.
    pub inner_cutoff: f64,
}

impl Default for AsymptResolution {
    fn default() -> Self {
        AsymptResolution { per_panel: 16, inner_cutoff: 400.0 }
    }
}

const MAX_HALF_WIDTH: f64 = 200.0;

/// Composite Gauss-Legendre rule with per-panel prefix sums.
struct PanelGrid {
    edges: Vec<f64>,
    q: usize,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl PanelGrid {
    fn new(edges: Vec<f64>, q: usize) -> Self {
        let rule = legendre_cached(q);
        let mut x = Vec::new();
        let mut w = Vec::new();
        for e in edges.windows(2) {
            let h = 0.5 * (e[1] - e[0]);
            for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
                x.push(e[0] + h * (t + 1.0));
                w.push(h * wt);
            }
        }
        PanelGrid { edges, q, x, w }
    }

    fn len(&self) -> usize {
        self.x.len()
    }

    /// Rule on `[left edge of the panel of node i, x_i]`.
    fn partial(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let a = self.edges[i / self.q];
        let b = self.x[i];
        let r = legendre_cached(self.q);
        let h = 0.5 * (b - a);
        (r.nodes.iter().map(|t| a + h * (t + 1.0)).collect(), r.weights.iter().map(|wt| h * wt).collect())
    }

    /// `out[p] = Σ_{nodes in panels < p} w g`, for the first `n` nodes.
    fn prefix(&self, g: impl Fn(usize) -> f64, n: usize) -> Vec<f64> {
        let panels = n / self.q;
        let mut out = vec![0.0; panels + 1];
        for p in 0..panels {
            let s: f64 = (p * self.q..(p + 1) * self.q).map(|i| self.w[i] * g(i)).sum();
            out[p + 1] = out[p] + s;
        }
        out
    }
}

fn uniform(a: f64, b: f64, h: f64) -> Vec<f64> {
    let m = ((b - a) / h).ceil().max(1.0) as usize;
    (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect()
}

fn graded(b: f64, h: f64) -> Vec<f64> {
    let first = h.min(b);
    let mut edges = vec![0.0];
    let mut lv: Vec<f64> = (1..=10).map(|k| first * 0.25f64.powi(k)).collect();
    lv.reverse();
    edges.extend(lv);
    edges.extend(uniform(first, b, h));
    edges
}

fn check_stat(f: &TestFunction) -> Result<()> {
    if !f.amplitude.is_finite() || !(f.width > 0.0) {
        return Err(Error::invalid("statistic needs finite amplitude and positive width"));
    }
    Ok(())
}

fn with_refinement(res: &AsymptResolution, eval: impl Fn(usize) -> Result<AsymptoticReport>) -> Result<AsymptoticReport> {
    let a = eval(res.per_panel)?;
    let mut b = eval(res.per_panel + 8)?;
    let diff = |x: &[Term], y: &[Term]| x.iter().zip(y).map(|(s, t)| (s.value - t.value).abs()).fold(0.0, f64::max);
    b.discrepancy = diff(&a.mean_terms, &b.mean_terms).max(diff(&a.variance_terms, &b.variance_terms));
    Ok(b)
}

fn report(ensemble: &str, n: Option<usize>, alpha: Option<f64>, mean_terms: Vec<Term>, variance_terms: Vec<Term>, truncation: f64) -> AsymptoticReport {
    AsymptoticReport {
        ensemble: ensemble.to_string(),
        n,
        alpha,
        mean: mean_terms.iter().map(|t| t.value).sum(),
        variance: variance_terms.iter().map(|t| t.value).sum(),
        mean_terms,
        variance_terms,
        discrepancy: 0.0,
        truncation,
    }
}

/// Quadrature data for the sine-kernel formulas on `[−L, L]`.
struct SineCtx {
    stat: TestFunction,
    g: PanelGrid,
    f: Vec<f64>,
    df: Vec<f64>,
    s: DMatrix<f64>,
    truncation: f64,
}

impl SineCtx {
    fn new(stat: &TestFunction, q: usize) -> Self {
        let (a, b) = stat.support(1e-12 * stat.amplitude.abs().max(1e-300));
        let l = a.abs().max(b.abs()).clamp(1.0, MAX_HALF_WIDTH);
        let g = PanelGrid::new(uniform(-l, l, stat.width.min(1.0)), q);
        let f: Vec<f64> = g.x.iter().map(|&x| stat.value(x)).collect();
        let df = g.x.iter().map(|&x| stat.deriv(x)).collect();
        let n = g.len();
        let s = DMatrix::from_fn(n, n, |i, j| sinc(g.x[i] - g.x[j]));
        let truncation = stat.value(-l).abs().max(stat.value(l).abs());
        SineCtx { stat: *stat, g, f, df, s, truncation }
    }

    fn int1(&self, h: impl Fn(usize) -> f64) -> f64 {
        (0..self.g.len()).map(|i| self.g.w[i] * h(i)).sum()
    }

    fn int2(&self, h: impl Fn(usize, usize) -> f64) -> f64 {
        let n = self.g.len();
        let mut t = 0.0;
        for i in 0..n {
            let mut r = 0.0;
            for j in 0..n {
                r += self.g.w[j] * h(i, j);
            }
            t += self.g.w[i] * r;
        }
        t
    }

    /// `∫F/π` and `∫F²/π − ∬ [sin(x−y)/(π(x−y))]² F(x)F(y)`.
    fn gue(&self) -> (f64, f64) {
        let mean = self.int1(|i| self.f[i]) / PI;
        let var = self.int1(|i| self.f[i] * self.f[i]) / PI
            - self.int2(|i, j| self.s[(i, j)].powi(2) * self.f[i] * self.f[j]) / (PI * PI);
        (mean, var)
    }

    /// `∬ sin(x−y)/(x−y) · Si(x−y) F'(x) F(y)`.
    fn si_term(&self) -> f64 {
        self.int2(|i, j| {
            let d = self.g.x[i] - self.g.x[j];
            self.s[(i, j)] * sine_integral(d) * self.df[i] * self.f[j]
        })
    }

    /// `∫ [∫_x^∞ − ∫_{−∞}^x] sin(x−y)/(x−y) F(y) dy · F'(x) dx`.
    fn one_sided_term(&self) -> f64 {
        let n = self.g.len();
        let mut t = 0.0;
        for i in 0..n {
            let total: f64 = (0..n).map(|j| self.g.w[j] * self.s[(i, j)] * self.f[j]).sum();
            let p = i / self.g.q;
            let below: f64 = (0..p * self.g.q).map(|j| self.g.w[j] * self.s[(i, j)] * self.f[j]).sum();
            let (z, wz) = self.g.partial(i);
            let xi = self.g.x[i];
            let part: f64 = z.iter().zip(&wz).map(|(&zz, &ww)| ww * sinc(xi - zz) * self.stat.value(zz)).sum();
            t += self.g.w[i] * (total - 2.0 * (below + part)) * self.df[i];
        }
        t
    }
}

/// `(mean, variance)` of the GUE limit (guem/guev).
pub fn gue_limits(stat: &TestFunction) -> Result<(f64, f64)> {
    let r = gue_report(stat, &AsymptResolution::default())?;
    Ok((r.mean, r.variance))
}

fn gue_report(stat: &TestFunction, res: &AsymptResolution) -> Result<AsymptoticReport> {
    check_stat(stat)?;
    with_refinement(res, |q| {
        let c = SineCtx::new(stat, q);
        let (m, v) = c.gue();
        Ok(report("GUE", None, None, vec![term("GUE mean", Order::One, m)], vec![term("GUE variance", Order::One, v)], c.truncation))
    })
}

/// GSE mean and variance of `Σ F(√(4N) x_j)` through O(N^{−1/2}).
pub fn gse_expansion(stat: &TestFunction, n: usize) -> Result<AsymptoticReport> {
    gse_expansion_with(stat, n, &AsymptResolution::default())
}

pub fn gse_expansion_with(stat: &TestFunction, n: usize, res: &AsymptResolution) -> Result<AsymptoticReport> {
    check_stat(stat)?;
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let nf = n as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let osc = sign / (4.0 * (2.0 * PI * nf).sqrt());
    with_refinement(res, |q| {
        let c = SineCtx::new(stat, q);
        let (m, v) = c.gue();
        let cos_f = c.int1(|i| c.g.x[i].cos() * c.f[i]);
        let cos_f2 = c.int1(|i| c.g.x[i].cos() * c.f[i] * c.f[i]);
        let cos_kernel = c.int2(|i, j| c.s[(i, j)] * c.g.x[i].cos() * c.f[i] * c.f[j]);
        let mean = vec![
            term("half GUE mean", Order::One, 0.5 * m),
            term("cos correction", Order::InvSqrtN, -osc * cos_f),
        ];
        let var = vec![
            term("half GUE variance", Order::One, 0.5 * v),
            term("Si correction", Order::InvSqrtN, -c.si_term() / (4.0 * PI * PI * nf.sqrt())),
            term("cos correction", Order::InvSqrtN, -osc * (cos_f2 - 2.0 / PI * cos_kernel)),
        ];
        Ok(report("GSE", Some(n), None, mean, var, c.truncation))
    })
}

/// GOE mean (through O(N^{−1})) and variance (through O(N^{−1/2})) of
/// `Σ F(√(2N) x_j)`; `N` must be even.
pub fn goe_expansion(stat: &TestFunction, n: usize) -> Result<AsymptoticReport> {
    goe_expansion_with(stat, n, &AsymptResolution::default())
}

pub fn goe_expansion_with(stat: &TestFunction, n: usize, res: &AsymptResolution) -> Result<AsymptoticReport> {
    check_stat(stat)?;
    if n == 0 || n % 2 == 1 {
        return Err(Error::invalid(format!("orthogonal ensembles need even N, got {n}")));
    }
    let nf = n as f64;
    let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let r2n = (2.0 * nf).sqrt();
    with_refinement(res, |q| {
        let c = SineCtx::new(stat, q);
        let (m, v) = c.gue();
        let sin2_f = c.int1(|i| c.g.x[i].sin().powi(2) * c.f[i]);
        let sin_df = c.int1(|i| c.g.x[i].sin() * c.df[i]);
        let mean = vec![
            term("GUE mean", Order::One, m),
            term("sin^2 correction", Order::InvN, -sin2_f / (2.0 * PI * nf)),
            term("sin F' correction", Order::InvN, -sign * sin_df / (4.0 * (2.0 * PI).sqrt() * nf)),
        ];
        let var = vec![
            term("twice GUE variance", Order::One, 2.0 * v),
            term("one-sided sine correction", Order::InvSqrtN, -c.one_sided_term() / (2.0 * PI * r2n)),
            term("Si correction", Order::InvSqrtN, -2.0 * c.si_term() / (PI * PI * r2n)),
        ];
        Ok(report("GOE", Some(n), None, mean, var, c.truncation))
    })
}

/// Quadrature data for the Bessel-kernel formulas of order `a` on `[0, L]`.
///
/// The outer nodes are the first `n` nodes of a grid that continues with
/// unit panels up to the inner cutoff, where the one-sided integrals of
/// `B(y, ·)` are truncated (with the leading tail `y J(y) J(Λ)/Λ` added).
struct BesselCtx {
    stat: TestFunction,
    a: f64,
    g: PanelGrid,
    n: usize,
    f: Vec<f64>,
    df: Vec<f64>,
    j: Vec<f64>,
    jint: Vec<f64>,
    bxx: Vec<f64>,
    /// `B(x_i, x_k)`
    b: DMatrix<f64>,
    /// `∫_0^∞ B(x_i, z) dz`
    tot: Vec<f64>,
    /// `cum[(i, k)] = ∫_0^{x_k} B(x_i, z) dz`
    cum: DMatrix<f64>,
    truncation: f64,
}

impl BesselCtx {
    fn new(stat: &TestFunction, a: f64, q: usize, cutoff: f64) -> Self {
        let (_, sb) = stat.support(1e-12 * stat.amplitude.abs().max(1e-300));
        let l = sb.clamp(1.0, MAX_HALF_WIDTH);
        let h = stat.width.min(1.0);
        let mut edges = graded(l, h);
        let n = (edges.len() - 1) * q;
        let cutoff = cutoff.max(2.0 * l);
        edges.extend(uniform(l, cutoff, 1.0).into_iter().skip(1));
        let g = PanelGrid::new(edges, q);
        let tri: Vec<BesselTriple> = g.x.iter().map(|&x| BesselTriple::at(a, x)).collect();
        let xo = &g.x[..n];
        let f: Vec<f64> = xo.iter().map(|&x| stat.value(x)).collect();
        let df = xo.iter().map(|&x| stat.deriv(x)).collect();
        let j = tri[..n].iter().map(|t| t.j).collect();
        let jint = xo.iter().map(|&x| bessel_j_integral(a, x).unwrap_or(f64::NAN)).collect();
        let bxx = (0..n).map(|i| bessel_kernel_from(xo[i], xo[i], &tri[i], &tri[i])).collect();
        let b = DMatrix::from_fn(n, n, |i, k| bessel_kernel_from(xo[i], xo[k], &tri[i], &tri[k]));
        let lam = *g.x.last().unwrap();
        let j_lam = BesselTriple::at(a, lam).j;
        let tot = (0..n)
            .map(|i| {
                let s: f64 = (0..g.len()).map(|k| g.w[k] * bessel_kernel_from(xo[i], g.x[k], &tri[i], &tri[k])).sum();
                s + xo[i] * tri[i].j * j_lam / lam
            })
            .collect();
        let partial: Vec<(Vec<f64>, Vec<f64>, Vec<BesselTriple>)> = (0..n)
            .map(|k| {
                let (z, w) = g.partial(k);
                let t = z.iter().map(|&zz| BesselTriple::at(a, zz)).collect();
                (z, w, t)
            })
            .collect();
        let mut cum = DMatrix::zeros(n, n);
        for i in 0..n {
            let pre = g.prefix(|k| b[(i, k)], n);
            for k in 0..n {
                let (z, w, t) = &partial[k];
                let part: f64 = (0..q).map(|p| w[p] * bessel_kernel_from(xo[i], z[p], &tri[i], &t[p])).sum();
                cum[(i, k)] = pre[k / q] + part;
            }
        }
        let truncation = stat.value(l).abs();
        BesselCtx { stat: *stat, a, g, n, f, df, j, jint, bxx, b, tot, cum, truncation }
    }

    fn x(&self, i: usize) -> f64 {
        self.g.x[i]
    }

    fn int1(&self, h: impl Fn(usize) -> f64) -> f64 {
        (0..self.n).map(|i| self.g.w[i] * h(i)).sum()
    }

    fn int2(&self, h: impl Fn(usize, usize) -> f64) -> f64 {
        let mut t = 0.0;
        for i in 0..self.n {
            let mut r = 0.0;
            for k in 0..self.n {
                r += self.g.w[k] * h(i, k);
            }
            t += self.g.w[i] * r;
        }
        t
    }

    /// `∫ B(x,x) F` and `∫ B(x,x) F² − ∬ B(x,y) B(y,x) F(x) F(y)`.
    fn lue(&self) -> (f64, f64) {
        let mean = self.int1(|i| self.bxx[i] * self.f[i]);
        let var = self.int1(|i| self.bxx[i] * self.f[i] * self.f[i])
            - self.int2(|i, k| self.b[(i, k)] * self.b[(k, i)] * self.f[i] * self.f[k]);
        (mean, var)
    }

    /// `∫_x^∞ B(y,z) dz − ∫_0^x B(y,z) dz` at `y = x_k`, `x = x_i`.
    fn ib(&self, k: usize, i: usize) -> f64 {
        self.tot[k] - 2.0 * self.cum[(k, i)]
    }

    /// `∫_x^∞ B(x,y) F(y) dy − ∫_0^x B(x,y) F(y) dy` at `x = x_i`.
    fn ib_f(&self, i: usize) -> f64 {
        let q = self.g.q;
        let total: f64 = (0..self.n).map(|k| self.g.w[k] * self.b[(i, k)] * self.f[k]).sum();
        let below: f64 = (0..(i / q) * q).map(|k| self.g.w[k] * self.b[(i, k)] * self.f[k]).sum();
        let (z, w) = self.g.partial(i);
        let ti = BesselTriple::at(self.a, self.x(i));
        let part: f64 = z
            .iter()
            .zip(&w)
            .map(|(&zz, &ww)| ww * bessel_kernel_from(self.x(i), zz, &ti, &BesselTriple::at(self.a, zz)) * self.stat.value(zz))
            .sum();
        total - 2.0 * (below + part)
    }

    /// `∫_0^x J F − ∫_x^∞ J F` at `x = x_i`.
    fn jf(&self, i: usize) -> f64 {
        let q = self.g.q;
        let total: f64 = (0..self.n).map(|k| self.g.w[k] * self.j[k] * self.f[k]).sum();
        let below: f64 = (0..(i / q) * q).map(|k| self.g.w[k] * self.j[k] * self.f[k]).sum();
        let (z, w) = self.g.partial(i);
        let part: f64 = z
            .iter()
            .zip(&w)
            .map(|(&zz, &ww)| ww * BesselTriple::at(self.a, zz).j * self.stat.value(zz))
            .sum();
        2.0 * (below + part) - total
    }
}

fn lue_report(stat: &TestFunction, alpha: f64, res: &AsymptResolution) -> Result<AsymptoticReport> {
    check_stat(stat)?;
    if !(alpha > -1.0) {
        return Err(Error::invalid(format!("LUE needs alpha > -1, got {alpha}")));
    }
    with_refinement(res, |q| {
        let c = BesselCtx::new(stat, alpha, q, res.inner_cutoff);
        let (m, v) = c.lue();
        Ok(report("LUE", None, Some(alpha), vec![term("LUE mean", Order::One, m)], vec![term("LUE variance", Order::One, v)], c.truncation))
    })
}

/// `(mean, variance)` of the LUE limit (luem/luev) for `Σ F(√(4N x_j))`.
pub fn lue_limits(stat: &TestFunction, alpha: f64) -> Result<(f64, f64)> {
    let r = lue_report(stat, alpha, &AsymptResolution::default())?;
    Ok((r.mean, r.variance))
}

/// LSE mean and variance of `Σ F(√(8N x_j))` through O(N^{−1}).
pub fn lse_expansion(stat: &TestFunction, alpha: f64, n: usize) -> Result<AsymptoticReport> {
    lse_expansion_with(stat, alpha, n, &AsymptResolution::default())
}

pub fn lse_expansion_with(stat: &TestFunction, alpha: f64, n: usize, res: &AsymptResolution) -> Result<AsymptoticReport> {
    check_stat(stat)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("LSE needs alpha > 0, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let inv = 1.0 / n as f64;
    with_refinement(res, |q| {
        let c = BesselCtx::new(stat, alpha - 1.0, q, res.inner_cutoff);
        let (m, v) = c.lue();
        let xdf = |i: usize| c.x(i) * c.df[i];
        let jj = |i: usize| c.jint[i] * c.j[i];
        let mean = vec![
            term("half LUE(alpha-1) mean", Order::One, 0.5 * m),
            term("int J . J F", Order::One, -0.25 * c.int1(|i| jj(i) * c.f[i])),
            term("one-sided B . xF'", Order::InvN, -inv / 32.0 * c.int1(|i| c.ib(i, i) * xdf(i))),
            term("int J (int J - 1) xF'", Order::InvN, -inv / 32.0 * c.int1(|i| c.jint[i] * (c.jint[i] - 1.0) * xdf(i))),
        ];
        let jjf = c.int1(|i| jj(i) * c.f[i]);
        let var = vec![
            term("half LUE(alpha-1) variance", Order::One, 0.5 * v),
            term("int J . J F^2", Order::One, -0.25 * c.int1(|i| jj(i) * c.f[i] * c.f[i])),
            term("B J int J FF", Order::One, 0.5 * c.int2(|i, k| c.b[(i, k)] * c.j[i] * c.jint[k] * c.f[i] * c.f[k])),
            term("(int J . J F)^2", Order::One, -0.125 * jjf * jjf),
            term("one-sided B . xFF'", Order::InvN, -inv / 16.0 * c.int1(|i| c.ib(i, i) * xdf(i) * c.f[i])),
            term("int J (int J - 1) xFF'", Order::InvN, -inv / 16.0 * c.int1(|i| c.jint[i] * (c.jint[i] - 1.0) * xdf(i) * c.f[i])),
            term("B . one-sided B . xF'F", Order::InvN, inv / 16.0 * c.int2(|i, k| c.b[(i, k)] * c.ib(k, i) * xdf(i) * c.f[k])),
            term(
                "B (int J - 1) int J . xF'F",
                Order::InvN,
                inv / 16.0 * c.int2(|i, k| c.b[(i, k)] * (c.jint[i] - 1.0) * c.jint[k] * xdf(i) * c.f[k]),
            ),
            term(
                "one-sided B . int J . J xF'F",
                Order::InvN,
                -inv / 32.0 * c.int2(|i, k| c.ib(k, i) * c.jint[i] * c.j[k] * xdf(i) * c.f[k]),
            ),
            term(
                "int J int J (int J - 1) J xF'F",
                Order::InvN,
                -inv / 32.0 * c.int1(|i| c.jint[i] * (c.jint[i] - 1.0) * xdf(i)) * c.int1(|k| jj(k) * c.f[k]),
            ),
        ];
        Ok(report("LSE", Some(n), Some(alpha), mean, var, c.truncation))
    })
}

/// LOE mean and variance of `Σ F(√(4N x_j))` through O(N^{−1}); `N` must
/// be even.
///
/// These displays follow from the Fredholm determinant without the
/// hard-edge factor, so they describe the exact moments only for statistics
/// with `F(0) = 0`; see `ensembles::FiniteMoments::boundary_variance`.
pub fn loe_expansion(stat: &TestFunction, alpha: f64, n: usize) -> Result<AsymptoticReport> {
    loe_expansion_with(stat, alpha, n, &AsymptResolution::default())
}

pub fn loe_expansion_with(stat: &TestFunction, alpha: f64, n: usize, res: &AsymptResolution) -> Result<AsymptoticReport> {
    check_stat(stat)?;
    if !(alpha > -2.0) {
        return Err(Error::invalid(format!("LOE needs alpha > -2, got {alpha}")));
    }
    if n == 0 || n % 2 == 1 {
        return Err(Error::invalid(format!("orthogonal ensembles need even N, got {n}")));
    }
    let inv = 1.0 / n as f64;
    with_refinement(res, |q| {
        let c = BesselCtx::new(stat, alpha + 1.0, q, res.inner_cutoff);
        let (m, v) = c.lue();
        let xdf = |i: usize| c.x(i) * c.df[i];
        let jm = |i: usize| c.jint[i] - 1.0;
        let mean = vec![
            term("LUE(alpha+1) mean", Order::One, m),
            term("(int J - 1) J F", Order::One, -0.5 * c.int1(|i| jm(i) * c.j[i] * c.f[i])),
            term("one-sided B . xF'", Order::InvN, -inv / 8.0 * c.int1(|i| c.ib(i, i) * xdf(i))),
            term("(int J - 1) int J xF'", Order::InvN, -inv / 8.0 * c.int1(|i| jm(i) * c.jint[i] * xdf(i))),
        ];
        let jmf = c.int1(|i| jm(i) * c.j[i] * c.f[i]);
        let var = vec![
            term("twice LUE(alpha+1) variance", Order::One, 2.0 * v),
            term("(int J - 1) J F^2", Order::One, -c.int1(|i| jm(i) * c.j[i] * c.f[i] * c.f[i])),
            term("B J (int J - 1) FF", Order::One, 2.0 * c.int2(|i, k| c.b[(i, k)] * c.j[i] * jm(k) * c.f[i] * c.f[k])),
            term("((int J - 1) J F)^2", Order::One, -0.5 * jmf * jmf),
            term("one-sided B . xFF'", Order::InvN, -inv / 4.0 * c.int1(|i| c.ib(i, i) * xdf(i) * c.f[i])),
            term("one-sided BF . xF'", Order::InvN, -inv / 4.0 * c.int1(|i| c.ib_f(i) * xdf(i))),
            term("(int J - 1) int J xFF'", Order::InvN, -inv / 4.0 * c.int1(|i| jm(i) * c.jint[i] * xdf(i) * c.f[i])),
            term("(int J - 1) one-sided JF . xF'", Order::InvN, -inv / 8.0 * c.int1(|i| jm(i) * c.jf(i) * xdf(i))),
            term("B . one-sided B . xF'F", Order::InvN, inv / 2.0 * c.int2(|i, k| c.b[(i, k)] * c.ib(k, i) * xdf(i) * c.f[k])),
            term(
                "B int J (int J - 1) xF'F",
                Order::InvN,
                inv / 2.0 * c.int2(|i, k| c.b[(i, k)] * c.jint[i] * jm(k) * xdf(i) * c.f[k]),
            ),
            term(
                "one-sided B (int J - 1) J xF'F",
                Order::InvN,
                -inv / 4.0 * c.int2(|i, k| c.ib(k, i) * jm(i) * c.j[k] * xdf(i) * c.f[k]),
            ),
            term(
                "(int J - 1)(int J - 1) int J J xF'F",
                Order::InvN,
                -inv / 4.0 * c.int1(|i| jm(i) * c.jint[i] * xdf(i)) * c.int1(|k| jm(k) * c.j[k] * c.f[k]),
            ),
        ];
        Ok(report("LOE", Some(n), Some(alpha), mean, var, c.truncation))
    })
}

/// The asymptotic report matching an ensemble: the unitary limits for
/// β = 2 and the expansions for β = 1, 4.
pub fn expansion(spec: &EnsembleSpec, stat: &TestFunction, res: &AsymptResolution) -> Result<AsymptoticReport> {
    match (spec.family, spec.beta) {
        (Family::Gaussian, 2) => gue_report(stat, res),
        (Family::Gaussian, 4) => gse_expansion_with(stat, spec.n, res),
        (Family::Gaussian, _) => goe_expansion_with(stat, spec.n, res),
        (Family::Laguerre, 2) => lue_report(stat, spec.alpha, res),
        (Family::Laguerre, 4) => lse_expansion_with(stat, spec.alpha, spec.n, res),
        (Family::Laguerre, _) => loe_expansion_with(stat, spec.alpha, spec.n, res),
    }
}
