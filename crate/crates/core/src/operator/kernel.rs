use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::grid::QuadratureGrid;

/// Kernel values `K(x_i, x_j)` on a grid. The Nyström operator matrix is
/// `K W` with `W = diag(weights)`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub values: DMatrix<f64>,
    pub weights: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(values: DMatrix<f64>, grid: &QuadratureGrid) -> Result<Self> {
        if values.nrows() != grid.len() || values.ncols() != grid.len() {
            return Err(Error::invalid("kernel matrix does not match grid size"));
        }
        Ok(KernelMatrix { values, weights: grid.weights.clone() })
    }

    pub fn from_fn(grid: &QuadratureGrid, k: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.len();
        let values = DMatrix::from_fn(n, n, |i, j| k(grid.nodes[i], grid.nodes[j]));
        KernelMatrix { values, weights: grid.weights.clone() }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Nyström matrix `K_ij w_j`.
    pub fn operator(&self) -> DMatrix<f64> {
        let mut m = self.values.clone();
        for (j, w) in self.weights.iter().enumerate() {
            m.column_mut(j).scale_mut(*w);
        }
        m
    }

    /// Kernel of the composition `A ∘ B`: `Σ_l A(x_i, x_l) w_l B(x_l, x_j)`.
    pub fn compose(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::invalid("grid mismatch in composition"));
        }
        let values = self.operator() * &other.values;
        Ok(KernelMatrix { values, weights: self.weights.clone() })
    }

    pub fn transpose(&self) -> KernelMatrix {
        KernelMatrix { values: self.values.transpose(), weights: self.weights.clone() }
    }

    /// `Σ_i K(x_i, x_i) w_i`.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.values[(i, i)] * self.weights[i]).sum()
    }

    /// Apply to a grid function: `Σ_j K_ij w_j g_j`.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.values[(i, j)] * self.weights[j] * g[j]).sum()).collect()
    }
}

/// `(u ⊗ v)(x, y) = u(x) v(y)`.
pub fn rank_one(u: &[f64], v: &[f64], grid: &QuadratureGrid) -> Result<KernelMatrix> {
    if u.len() != grid.len() || v.len() != grid.len() {
        return Err(Error::invalid("grid mismatch in rank-one product"));
    }
    let n = grid.len();
    let values = DMatrix::from_fn(n, n, |i, j| u[i] * v[j]);
    Ok(KernelMatrix { values, weights: grid.weights.clone() })
}

/// `det(I + T)` for a Nyström operator matrix `T`, by pivoted LU.
pub fn fredholm_det(t: &DMatrix<f64>) -> Result<f64> {
    if t.nrows() != t.ncols() {
        return Err(Error::invalid("operator matrix must be square"));
    }
    let n = t.nrows();
    let m = DMatrix::<f64>::identity(n, n) + t;
    let d = m.lu().determinant();
    if !d.is_finite() {
        return Err(Error::Numerical("non-finite Fredholm determinant".into()));
    }
    if d.abs() < 1e-300 {
        return Err(Error::Numerical("Fredholm determinant is singular to working precision".into()));
    }
    Ok(d)
}

/// `Tr T` of a Nyström operator matrix.
pub fn op_trace(t: &DMatrix<f64>) -> f64 {
    t.trace()
}

/// `Tr (A B)` without forming the product.
pub fn op_trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}
