use nalgebra::DMatrix;

use super::nested::{ordered_integral, Panels};
use crate::error::{Error, Result};
use crate::operator::{NodeMap, QuadratureGrid};

/// `(det[x_k^j, j x_k^{j−1}]_{2N×2N}, Π_{j<k} (x_j − x_k)⁴)`.
pub fn vandermonde4_det_check(points: &[f64]) -> Result<(f64, f64)> {
    let n = points.len();
    if n > 6 {
        return Err(Error::invalid("confluent Vandermonde check supports at most 6 points"));
    }
    let size = 2 * n;
    let mut m = DMatrix::<f64>::zeros(size, size);
    for (k, &x) in points.iter().enumerate() {
        for j in 0..size {
            m[(j, 2 * k)] = x.powi(j as i32);
            m[(j, 2 * k + 1)] = if j == 0 { 0.0 } else { j as f64 * x.powi(j as i32 - 1) };
        }
    }
    let lhs = if size == 0 { 1.0 } else { m.determinant() };
    let mut rhs = 1.0;
    for k in 0..n {
        for j in 0..k {
            rhs *= (points[j] - points[k]).powi(4);
        }
    }
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeBruijnKind {
    /// `∫ det[p_j(x_k), q_j(x_k)] dx` against `N! Pf(∫ p_j q_k − p_k q_j)`.
    Quaternion,
    /// `∫_{x_1<…<x_N} det[p_j(x_k)] dx` against `Pf(∫∫ sgn(y−x) p_j(x) p_k(y))`.
    Orthogonal,
}

pub type RealFn<'a> = &'a dyn Fn(f64) -> f64;

/// Both sides of a de Bruijn integration identity, squared so that the
/// Pfaffian becomes a determinant: the left side is the squared multiple
/// integral, the right side is `(N!)² det A` for the
/// quaternion kind and `det A` for the orthogonal kind.
///
/// The quaternion kind takes `2N` pairs `(p_j, q_j)`; the orthogonal kind
/// takes `N` functions `p_j` (N even) and ignores `q`. The left side is
/// integrated by nested rules on the grid's interval, the right side on the
/// grid itself.
pub fn debruijn_check(kind: DeBruijnKind, p: &[RealFn], q: &[RealFn], grid: &QuadratureGrid) -> Result<(f64, f64)> {
    let (a, b) = grid.domain;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("de Bruijn check needs a grid on a finite interval"));
    }
    let panels = Panels::new(a, b, 0.25, 16, NodeMap::Linear(1.0), false);
    let nodes = panels.nodes();
    match kind {
        DeBruijnKind::Quaternion => {
            if q.len() != p.len() || p.len() % 2 == 1 || p.len() > 4 {
                return Err(Error::invalid("quaternion kind needs 2N pairs with N <= 2"));
            }
            let n = p.len() / 2;
            let size = p.len();
            let det_at = |xs: &[f64]| -> f64 {
                let mut m = DMatrix::<f64>::zeros(size, size);
                for j in 0..size {
                    for (k, &x) in xs.iter().enumerate() {
                        m[(j, 2 * k)] = p[j](x);
                        m[(j, 2 * k + 1)] = q[j](x);
                    }
                }
                m.determinant()
            };
            let lhs = match n {
                1 => nodes.iter().map(|a| a.w * det_at(&[a.x])).sum::<f64>(),
                _ => {
                    let mut s = 0.0;
                    for a in &nodes {
                        for b in &nodes {
                            s += a.w * b.w * det_at(&[a.x, b.x]);
                        }
                    }
                    s
                }
            };
            let mut am = DMatrix::<f64>::zeros(size, size);
            let pv: Vec<Vec<f64>> = p.iter().map(|f| grid.sample(f)).collect();
            let qv: Vec<Vec<f64>> = q.iter().map(|f| grid.sample(f)).collect();
            for j in 0..size {
                for k in 0..size {
                    let g: Vec<f64> = (0..grid.len()).map(|i| pv[j][i] * qv[k][i] - pv[k][i] * qv[j][i]).collect();
                    am[(j, k)] = grid.integrate(&g);
                }
            }
            let fact = (1..=n).product::<usize>() as f64;
            Ok((lhs * lhs, fact * fact * det_or_one(&am)))
        }
        DeBruijnKind::Orthogonal => {
            let n = p.len();
            if n % 2 == 1 || n > 2 {
                return Err(Error::invalid("orthogonal kind needs N even and <= 2"));
            }
            let lhs = ordered_integral(&panels, n, &mut |xs| {
                let m = DMatrix::from_fn(n, n, |j, k| p[j](xs[k]));
                m.determinant()
            });
            let e = grid.eps_matrix();
            let pv: Vec<Vec<f64>> = p.iter().map(|f| grid.sample(f)).collect();
            let mut am = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let ej = grid.apply_kernel(&e, &pv[j]);
                for k in 0..n {
                    let g: Vec<f64> = (0..grid.len()).map(|i| pv[k][i] * ej[i]).collect();
                    am[(j, k)] = 2.0 * grid.integrate(&g);
                }
            }
            Ok((lhs * lhs, det_or_one(&am)))
        }
    }
}

fn det_or_one(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        1.0
    } else {
        m.determinant()
    }
}
