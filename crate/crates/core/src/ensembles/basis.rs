use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use super::{EnsembleSpec, Family};
use crate::error::{Error, Result};
use crate::gauss;
use crate::operator::{composite, NodeMap};
use crate::orthopoly::{hermite_deriv_from, CdKernel, CdKind, HermiteSystem, LagVariant, LaguerreSystem};

/// Low-rank factors of the ensemble kernel evaluated at a set of points:
///
/// `K(x,y) = c Σ_j A_j(x) B_j(y) + d u(x) v(y)`
/// `(Kε)(x,z) = −c Σ_j A_j(x) (εB_j)(z) − d u(x) (εv)(z)`.
///
/// For β = 2 the rank-one part is absent (`d = 0`).
#[derive(Debug, Clone)]
pub struct KernelFactors {
    pub c: f64,
    pub d: f64,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub eb: DMatrix<f64>,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub ev: DVector<f64>,
}

/// Laguerre parameter of the underlying system.
fn lag_param(spec: &EnsembleSpec) -> f64 {
    match spec.beta {
        4 => spec.alpha - 1.0,
        1 => spec.alpha + 1.0,
        _ => spec.alpha,
    }
}

/// Number of terms `m` in `Σ_{j<m}` of the Christoffel-Darboux part.
fn cd_terms(spec: &EnsembleSpec) -> usize {
    if spec.beta == 4 {
        2 * spec.n + 1
    } else {
        spec.n
    }
}

fn rank_one_coef(spec: &EnsembleSpec) -> f64 {
    let n = spec.n as f64;
    let al = spec.alpha;
    match (spec.family, spec.beta) {
        (_, 2) => 0.0,
        (Family::Gaussian, 4) => 0.5 * (n + 0.5).sqrt(),
        (Family::Gaussian, _) => (0.5 * n).sqrt(),
        (Family::Laguerre, 4) => -0.5 * ((n + 0.5) * (n + 0.5 * al)).sqrt(),
        (Family::Laguerre, _) => -0.5 * (n * (n + al + 1.0)).sqrt(),
    }
}

impl KernelFactors {
    pub fn new(spec: &EnsembleSpec, xs: &[f64]) -> Result<Self> {
        let m = cd_terms(spec);
        let n = xs.len();
        let c = if spec.beta == 4 { 0.5 } else { 1.0 };
        let d = rank_one_coef(spec);
        let mut a = DMatrix::zeros(n, m);
        let mut b = DMatrix::zeros(n, m);
        let mut eb = DMatrix::zeros(n, m);
        let mut u = DVector::zeros(n);
        let mut v = DVector::zeros(n);
        let mut ev = DVector::zeros(n);
        match spec.family {
            Family::Gaussian => {
                let mut p = vec![0.0; m + 1];
                let mut e = vec![0.0; m + 1];
                for (i, &x) in xs.iter().enumerate() {
                    HermiteSystem::phi_all(x, &mut p);
                    HermiteSystem::eps_all(x, &p, &mut e);
                    for j in 0..m {
                        a[(i, j)] = p[j];
                        b[(i, j)] = p[j];
                        eb[(i, j)] = e[j];
                    }
                    u[i] = e[m];
                    v[i] = p[m - 1];
                    ev[i] = e[m - 1];
                }
            }
            Family::Laguerre => {
                let lag = LaguerreSystem::new(lag_param(spec), m + 1)?;
                let mut p = vec![0.0; m + 1];
                let mut t = vec![0.0; m + 1];
                let mut e = vec![0.0; m + 1];
                for (i, &x) in xs.iter().enumerate() {
                    if x < 0.0 {
                        return Err(Error::domain("Laguerre kernel evaluated at negative x"));
                    }
                    if spec.beta == 2 {
                        lag.values_all(x, LagVariant::Half, &mut p);
                        for j in 0..m {
                            a[(i, j)] = p[j];
                            b[(i, j)] = p[j];
                        }
                        continue;
                    }
                    lag.values_all(x, LagVariant::Phi, &mut p);
                    lag.values_all(x, LagVariant::Tilde, &mut t);
                    lag.eps_tilde_all(x, &p, &mut e);
                    for j in 0..m {
                        a[(i, j)] = p[j];
                        b[(i, j)] = t[j];
                        eb[(i, j)] = e[j];
                    }
                    u[i] = e[m];
                    v[i] = t[m - 1];
                    ev[i] = e[m - 1];
                }
            }
        }
        Ok(KernelFactors { c, d, a, b, eb, u, v, ev })
    }

    /// Matrix of `K(x_i, x_j)`.
    pub fn kernel(&self) -> DMatrix<f64> {
        let mut k = &self.a * self.b.transpose() * self.c;
        if self.d != 0.0 {
            k += &self.u * self.v.transpose() * self.d;
        }
        k
    }

    /// Matrix of `(Kε)(x_i, x_j)`.
    pub fn kernel_eps(&self) -> DMatrix<f64> {
        let mut k = &self.a * self.eb.transpose() * (-self.c);
        if self.d != 0.0 {
            k -= &self.u * self.ev.transpose() * self.d;
        }
        k
    }
}

/// `K^{(2,2)}` of a β = 1 or β = 4 ensemble (or `K_N^{(2)}` for β = 2):
/// a scaled Christoffel-Darboux kernel plus a rank-one correction.
#[derive(Debug, Clone)]
pub struct K22 {
    pub spec: EnsembleSpec,
    pub cd: CdKernel,
    /// Multiplier of the Christoffel-Darboux part.
    pub scale: f64,
    /// Coefficient of `u ⊗ v`.
    pub coef: f64,
}

pub fn k22_kernel(spec: &EnsembleSpec) -> Result<K22> {
    let n = spec.n;
    let kind = match (spec.family, spec.beta) {
        (Family::Gaussian, 4) => CdKind::Gse { n },
        (Family::Gaussian, _) => CdKind::Goe { n },
        (Family::Laguerre, 4) => CdKind::Lse { n, alpha: spec.alpha },
        (Family::Laguerre, 1) => CdKind::Loe { n, alpha: spec.alpha },
        (Family::Laguerre, _) => CdKind::Lue { n, alpha: spec.alpha },
    };
    Ok(K22 {
        spec: *spec,
        cd: CdKernel::new(kind)?,
        scale: if spec.beta == 4 { 0.5 } else { 1.0 },
        coef: rank_one_coef(spec),
    })
}

impl K22 {
    /// `u(x)`: the ε-transformed top function.
    pub fn u(&self, x: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        let f = KernelFactors::new(&self.spec, &[x]).expect("valid spec");
        f.u[0]
    }

    /// `v(y)`: the second-highest function of the sum.
    pub fn v(&self, y: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        let f = KernelFactors::new(&self.spec, &[y]).expect("valid spec");
        f.v[0]
    }

    /// Closed-form value.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let s = self.scale * self.cd.eval(x, y);
        if self.coef == 0.0 {
            s
        } else {
            s + self.coef * self.u(x) * self.v(y)
        }
    }

    /// Value from the defining double sum over the ψ basis and `M⁻¹`.
    pub fn mu_sum(&self, x: f64, y: f64) -> Result<f64> {
        if self.spec.beta == 2 {
            return Ok(self.cd.eval_sum(x, y));
        }
        let psi = build_psi(&self.spec)?;
        let mu = build_m(&self.spec)?
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular M".into()))?;
        let len = psi.len();
        let mut s = 0.0;
        if self.spec.beta == 4 {
            let (px, _) = psi.eval(x);
            let (_, dy) = psi.eval(y);
            for j in 0..len {
                for k in 0..len {
                    s -= px[j] * mu[(j, k)] * dy[k];
                }
            }
        } else {
            let ex = psi.eval_eps(x);
            let (py, _) = psi.eval(y);
            for j in 0..len {
                for k in 0..len {
                    s += mu[(j, k)] * ex[j] * py[k];
                }
            }
        }
        Ok(s)
    }
}

/// The skew-orthogonal ψ basis of a β = 1 or β = 4 ensemble.
#[derive(Debug, Clone)]
pub struct PsiBasis {
    spec: EnsembleSpec,
    lag: Option<LaguerreSystem>,
}

pub fn build_psi(spec: &EnsembleSpec) -> Result<PsiBasis> {
    if spec.beta == 2 {
        return Err(Error::Unsupported("the psi basis exists only for beta = 1 and 4".into()));
    }
    let lag = match spec.family {
        Family::Gaussian => None,
        Family::Laguerre => Some(LaguerreSystem::new(lag_param(spec), 2 * spec.n + 2)?),
    };
    Ok(PsiBasis { spec: *spec, lag })
}

impl PsiBasis {
    /// `2N` for β = 4, `N` for β = 1.
    pub fn len(&self) -> usize {
        if self.spec.beta == 4 {
            2 * self.spec.n
        } else {
            self.spec.n
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// `(ψ_j(x), ψ_j'(x))` for all `j`.
    pub fn eval(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let len = self.len();
        let top = len + 2;
        let mut psi = vec![0.0; len];
        let mut dpsi = vec![0.0; len];
        let r = SQRT_2.recip();
        match (&self.lag, self.spec.beta) {
            (None, 4) => {
                let mut p = vec![0.0; top];
                let mut e = vec![0.0; top];
                HermiteSystem::phi_all(x, &mut p);
                HermiteSystem::eps_all(x, &p, &mut e);
                for j in 0..len / 2 {
                    let k = 2 * j + 1;
                    psi[2 * j + 1] = r * p[k];
                    dpsi[2 * j + 1] = r * hermite_deriv_from(&p, k);
                    psi[2 * j] = -r * e[k];
                    dpsi[2 * j] = -r * p[k];
                }
            }
            (Some(lag), 4) => {
                let mut p = vec![0.0; top];
                let mut t = vec![0.0; top];
                let mut e = vec![0.0; top];
                lag.values_all(x, LagVariant::Phi, &mut p);
                lag.values_all(x, LagVariant::Tilde, &mut t);
                lag.eps_tilde_all(x, &p, &mut e);
                for j in 0..len / 2 {
                    let k = 2 * j + 1;
                    psi[k] = r * p[k];
                    dpsi[k] = r * lag.phi_deriv_from(&t, k);
                    psi[2 * j] = -r * e[k];
                    dpsi[2 * j] = -r * t[k];
                }
            }
            (None, _) => {
                let mut p = vec![0.0; top];
                HermiteSystem::phi_all(x, &mut p);
                for j in 0..len {
                    if j % 2 == 0 {
                        psi[j] = p[j];
                        dpsi[j] = hermite_deriv_from(&p, j);
                    } else {
                        psi[j] = hermite_deriv_from(&p, j - 1);
                        // φ'' = (x² − 2k − 1) φ for the Hermite function φ_k
                        dpsi[j] = (x * x - 2.0 * (j - 1) as f64 - 1.0) * p[j - 1];
                    }
                }
            }
            (Some(lag), _) => {
                let mut p = vec![0.0; top];
                let mut t = vec![0.0; top];
                lag.values_all(x, LagVariant::Phi, &mut p);
                lag.values_all(x, LagVariant::Tilde, &mut t);
                let k = 0.5 * (lag.param() + 1.0);
                for j in 0..len {
                    if j % 2 == 0 {
                        psi[j] = t[j];
                        // φ̃ = φ/x
                        dpsi[j] = (lag.phi_deriv_from(&t, j) - t[j]) / x;
                    } else {
                        let i = j - 1;
                        psi[j] = lag.phi_deriv_from(&t, i);
                        let g = k / x - 0.5;
                        dpsi[j] = p[i] * (g * g - k / (x * x) - i as f64 / x);
                    }
                }
            }
        }
        (psi, dpsi)
    }

    /// `εψ_j(x)` for all `j` (β = 1 only).
    pub fn eval_eps(&self, x: f64) -> Vec<f64> {
        let len = self.len();
        let top = len + 2;
        let mut out = vec![0.0; len];
        match &self.lag {
            None => {
                let mut p = vec![0.0; top];
                let mut e = vec![0.0; top];
                HermiteSystem::phi_all(x, &mut p);
                HermiteSystem::eps_all(x, &p, &mut e);
                for j in 0..len {
                    out[j] = if j % 2 == 0 { e[j] } else { p[j - 1] };
                }
            }
            Some(lag) => {
                let mut p = vec![0.0; top];
                let mut e = vec![0.0; top];
                lag.values_all(x, LagVariant::Phi, &mut p);
                lag.eps_tilde_all(x, &p, &mut e);
                for j in 0..len {
                    out[j] = if j % 2 == 0 { e[j] } else { p[j - 1] };
                }
            }
        }
        out
    }
}

/// The canonical `2×2`-block skew matrix `diag([[0,1],[−1,0]], ...)`.
pub fn canonical_skew(size: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(size, size);
    for j in 0..size / 2 {
        m[(2 * j, 2 * j + 1)] = 1.0;
        m[(2 * j + 1, 2 * j)] = -1.0;
    }
    m
}

/// `M⁽⁴⁾ = (∫ ψ_jψ_k' − ψ_j'ψ_k)` or `M⁽¹⁾ = (∫ ψ_j εψ_k)` by quadrature.
pub fn build_m(spec: &EnsembleSpec) -> Result<DMatrix<f64>> {
    let psi = build_psi(spec)?;
    let len = psi.len();
    let (nodes, weights) = m_quadrature(spec)?;
    let mut m = DMatrix::<f64>::zeros(len, len);
    for (&x, &w) in nodes.iter().zip(&weights) {
        if spec.beta == 4 {
            let (p, d) = psi.eval(x);
            for j in 0..len {
                for k in 0..len {
                    m[(j, k)] += w * (p[j] * d[k] - d[j] * p[k]);
                }
            }
        } else {
            let (p, _) = psi.eval(x);
            let e = psi.eval_eps(x);
            for j in 0..len {
                for k in 0..len {
                    m[(j, k)] += w * p[j] * e[k];
                }
            }
        }
    }
    let asym = (&m + m.transpose()).amax();
    if !(asym <= 1e-6) {
        return Err(Error::Numerical(format!("M is not skew to 1e-6 (deviation {asym:.3e})")));
    }
    Ok(m)
}

fn m_quadrature(spec: &EnsembleSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = spec.n;
    match (spec.family, spec.beta) {
        (Family::Gaussian, 4) => {
            let r = gauss::hermite(2 * n + 12)?;
            let w = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (x * x).exp()).collect();
            Ok((r.nodes, w))
        }
        (Family::Laguerre, 4) => {
            let a = spec.alpha - 1.0;
            let r = gauss::laguerre(2 * n + 12, a)?;
            let w = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (x - a * x.ln()).exp()).collect();
            Ok((r.nodes, w))
        }
        (Family::Gaussian, _) => {
            let r = (2.0 * n as f64 + 2.0).sqrt() + 12.0;
            let g = composite(&crate::operator::uniform_edges(-r, r, 0.5), 16, NodeMap::Linear(1.0));
            Ok((g.nodes, g.weights))
        }
        (Family::Laguerre, _) => {
            let top = (4.0 * n as f64 + 2.0 * spec.alpha.abs() + 120.0).sqrt();
            let mut edges = vec![0.0];
            let mut h = 0.5;
            let mut stack = vec![];
            for _ in 0..12 {
                stack.push(h);
                h *= 0.3;
            }
            edges.extend(stack.into_iter().rev());
            let tail = crate::operator::uniform_edges(0.5, top, 0.25);
            edges.extend(tail.into_iter().skip(1));
            let g = composite(&edges, 16, NodeMap::Square(1.0));
            Ok((g.nodes, g.weights))
        }
    }
}
