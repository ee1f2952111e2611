//! Grid-based operator calculus: quadrature grids, kernel matrices, the ε
//! and D operators, rank-one products, Fredholm determinants, and trace-log
//! cumulant extraction.

mod grid;
mod kernel;
mod testfn;

pub use grid::{composite, make_grid, uniform_edges, Domain, NodeMap, Panel, QuadratureGrid, Scheme};
pub use kernel::{fredholm_det, op_trace, op_trace_product, rank_one, KernelMatrix};
pub use testfn::{StatFamily, TestFunction};

use nalgebra::DMatrix;

/// λ and λ² coefficients of `Tr T − ½ Tr T²` for `T(λ) = λ T₁ + λ² T₂ + O(λ³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCoefficients {
    /// `Tr T₁`
    pub linear: f64,
    /// `Tr T₂ − ½ Tr T₁²`
    pub quadratic: f64,
}

/// Trace-log coefficients from the first two Taylor matrices of `T(λ)`.
pub fn cumulants_from_t(t1: &DMatrix<f64>, t2: &DMatrix<f64>) -> TraceCoefficients {
    TraceCoefficients {
        linear: op_trace(t1),
        quadratic: op_trace(t2) - 0.5 * op_trace_product(t1, t1),
    }
}

/// Same coefficients from a builder `λ ↦ T(λ)` by central differences of
/// `log det(I + T(λ))`; used as a cross-check of the symbolic expansion.
pub fn cumulants_by_difference(
    build: impl Fn(f64) -> crate::Result<DMatrix<f64>>,
    h: f64,
) -> crate::Result<TraceCoefficients> {
    let l = |lam: f64| -> crate::Result<f64> { Ok(fredholm_det(&build(lam)?)?.ln()) };
    let (p, m, p2, m2) = (l(h)?, l(-h)?, l(2.0 * h)?, l(-2.0 * h)?);
    let linear = (8.0 * (p - m) - (p2 - m2)) / (12.0 * h);
    // log det(I + T(0)) = 0
    let second = (-p2 + 16.0 * p + 16.0 * m - m2) / (12.0 * h * h);
    Ok(TraceCoefficients { linear, quadratic: 0.5 * second })
}
