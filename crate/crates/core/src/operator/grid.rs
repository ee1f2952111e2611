use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gauss;

/// Integration domain before discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// The real line truncated to `[-radius, radius]`.
    Real { radius: f64 },
    /// The half line truncated to `[0, radius]`.
    HalfLine { radius: f64 },
    /// A finite interval.
    Interval { a: f64, b: f64 },
}

impl Domain {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Real { radius } => (-radius, radius),
            Domain::HalfLine { radius } => (0.0, radius),
            Domain::Interval { a, b } => (a, b),
        }
    }

    /// Default truncation for Gaussian-weight systems up to `max_degree`.
    pub fn gaussian_default(max_degree: usize) -> Self {
        Domain::Real { radius: (2.0 * max_degree as f64).sqrt().max(4.0) + 6.0 }.at_least(10.0)
    }

    /// Default truncation for Laguerre-weight systems up to `max_degree`.
    pub fn laguerre_default(max_degree: usize) -> Self {
        Domain::HalfLine { radius: 4.0 * max_degree as f64 + 40.0 }
    }

    fn at_least(self, r: f64) -> Self {
        match self {
            Domain::Real { radius } => Domain::Real { radius: radius.max(r) },
            Domain::HalfLine { radius } => Domain::HalfLine { radius: radius.max(r) },
            d => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Gauss-Legendre on the truncated domain.
    Legendre,
    /// Gauss-Hermite nodes, weights rescaled to integrate plain functions.
    Hermite,
    /// Gauss-Laguerre nodes, weights rescaled to integrate plain functions.
    Laguerre,
}

/// A panel of consecutive nodes sharing one Gauss-Legendre rule in the
/// parameter variable `u`.
#[derive(Debug, Clone)]
pub struct Panel {
    pub start: usize,
    pub len: usize,
    /// Reference nodes on [-1, 1].
    pub t: Vec<f64>,
    /// Half width of the panel in `u`.
    pub half: f64,
}

/// Quadrature nodes/weights. Nodes are `x = map(u)` for Gauss-Legendre
/// panels in `u`; `jac` holds `dx/du` at the nodes.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub jac: Vec<f64>,
    pub panels: Vec<Panel>,
    pub domain: (f64, f64),
    pub scheme: Scheme,
}

/// Change of variables from the panel variable to the integration variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeMap {
    /// `x = u / c`
    Linear(f64),
    /// `x = u² / c`
    Square(f64),
}

impl NodeMap {
    /// `(x, dx/du)`.
    pub fn apply(&self, u: f64) -> (f64, f64) {
        match *self {
            NodeMap::Linear(c) => (u / c, 1.0 / c),
            NodeMap::Square(c) => (u * u / c, 2.0 * u / c),
        }
    }
}

pub fn make_grid(domain: Domain, n_nodes: usize, scheme: Scheme) -> Result<QuadratureGrid> {
    if n_nodes < 2 {
        return Err(Error::invalid("a grid needs at least 2 nodes"));
    }
    let (a, b) = domain.bounds();
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("invalid domain [{a}, {b}]")));
    }
    match scheme {
        Scheme::Legendre => Ok(composite(&[a, b], n_nodes, NodeMap::Linear(1.0))),
        Scheme::Hermite => {
            let r = gauss::hermite(n_nodes)?;
            let weights = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (x * x).exp()).collect();
            Ok(QuadratureGrid {
                jac: vec![1.0; n_nodes],
                nodes: r.nodes,
                weights,
                panels: vec![],
                domain: (f64::NEG_INFINITY, f64::INFINITY),
                scheme,
            })
        }
        Scheme::Laguerre => {
            let r = gauss::laguerre(n_nodes, 0.0)?;
            let weights = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.exp()).collect();
            Ok(QuadratureGrid {
                jac: vec![1.0; n_nodes],
                nodes: r.nodes,
                weights,
                panels: vec![],
                domain: (0.0, f64::INFINITY),
                scheme,
            })
        }
    }
}

/// Composite Gauss-Legendre grid with `per_panel` nodes on each interval
/// between consecutive `edges` (in `u`), mapped through `map`.
pub fn composite(edges: &[f64], per_panel: usize, map: NodeMap) -> QuadratureGrid {
    let rule = gauss::legendre_cached(per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut jac = Vec::new();
    let mut panels = Vec::new();
    for e in edges.windows(2) {
        let (l, r) = (e[0], e[1]);
        let half = 0.5 * (r - l);
        panels.push(Panel { start: nodes.len(), len: per_panel, t: rule.nodes.clone(), half });
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = l + half * (t + 1.0);
            let (x, dx) = map.apply(u);
            nodes.push(x);
            weights.push(half * w * dx);
            jac.push(dx);
        }
    }
    let (x0, _) = map.apply(edges[0]);
    let (x1, _) = map.apply(edges[edges.len() - 1]);
    QuadratureGrid { nodes, weights, jac, panels, domain: (x0, x1), scheme: Scheme::Legendre }
}

/// Evenly spaced panel edges on `[a, b]` with about `len` per panel.
pub fn uniform_edges(a: f64, b: f64, len: f64) -> Vec<f64> {
    let m = ((b - a) / len).ceil().max(1.0) as usize;
    (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect()
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Kernel matrix of ε: `(εg)(x_i) = Σ_j E_ij w_j g_j`.
    ///
    /// Across panels the entries are `±½`. Inside a panel they come from
    /// exact cumulative integration of the interpolating polynomial; the
    /// result is antisymmetrized so that `Eᵀ = −E` holds exactly.
    pub fn eps_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut e = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = self.nodes[i] - self.nodes[j];
                e[(i, j)] = if d > 0.0 {
                    0.5
                } else if d < 0.0 {
                    -0.5
                } else {
                    0.0
                };
            }
        }
        for p in &self.panels {
            let local = local_eps(&p.t);
            for a in 0..p.len {
                for b in 0..p.len {
                    e[(p.start + a, p.start + b)] = local[(a, b)];
                }
            }
        }
        let et = e.transpose();
        (e - et) * 0.5
    }

    /// Differentiation matrix in the integration variable.
    pub fn deriv_matrix(&self) -> Result<DMatrix<f64>> {
        if self.panels.is_empty() {
            return Err(Error::Unsupported("differentiation needs a Legendre-panel grid".into()));
        }
        let n = self.len();
        let mut d = DMatrix::<f64>::zeros(n, n);
        for p in &self.panels {
            let local = local_diff(&p.t);
            for a in 0..p.len {
                let s = 1.0 / (p.half * self.jac[p.start + a]);
                for b in 0..p.len {
                    d[(p.start + a, p.start + b)] = local[(a, b)] * s;
                }
            }
        }
        Ok(d)
    }

    pub fn apply_eps(&self, g: &[f64]) -> Vec<f64> {
        let e = self.eps_matrix();
        self.apply_kernel(&e, g)
    }

    pub fn apply_deriv(&self, g: &[f64]) -> Result<Vec<f64>> {
        let d = self.deriv_matrix()?;
        Ok((0..self.len()).map(|i| (0..self.len()).map(|j| d[(i, j)] * g[j]).sum()).collect())
    }

    /// `Σ_j K_ij w_j g_j`.
    pub fn apply_kernel(&self, k: &DMatrix<f64>, g: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| k[(i, j)] * self.weights[j] * g[j]).sum()).collect()
    }
}

fn legendre_table(t: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    // p[k][i] = P_k(t_i)
    let mut p = vec![vec![1.0; t.len()]; kmax + 1];
    if kmax >= 1 {
        p[1] = t.to_vec();
    }
    for k in 1..kmax {
        let kf = k as f64;
        for i in 0..t.len() {
            p[k + 1][i] = ((2.0 * kf + 1.0) * t[i] * p[k][i] - kf * p[k - 1][i]) / (kf + 1.0);
        }
    }
    p
}

/// Panel-local ε kernel on Gauss-Legendre nodes `t`.
fn local_eps(t: &[f64]) -> DMatrix<f64> {
    let q = t.len();
    let p = legendre_table(t, q);
    let mut m = DMatrix::<f64>::zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            let mut s = 0.5 * (t[i] + 1.0);
            for k in 1..q {
                s += 0.5 * (p[k + 1][i] - p[k - 1][i]) * p[k][j];
            }
            m[(i, j)] = s - 0.5;
        }
    }
    m
}

/// Spectral differentiation on Gauss-Legendre nodes (barycentric form).
fn local_diff(t: &[f64]) -> DMatrix<f64> {
    let q = t.len();
    let rule = gauss::legendre_cached(q);
    let lam: Vec<f64> = (0..q)
        .map(|j| {
            let s = ((1.0 - t[j] * t[j]) * rule.weights[j]).sqrt();
            if j % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect();
    let mut d = DMatrix::<f64>::zeros(q, q);
    for i in 0..q {
        let mut diag = 0.0;
        for j in 0..q {
            if i != j {
                let v = lam[j] / lam[i] / (t[i] - t[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}
