//! Finite-N constructions for the six ensembles: ψ bases, skew M matrices,
//! the `K^{(2,2)}` kernels, determinant formulas for the moment generating
//! function, brute-force oracles, and the classical determinant identities.

mod basis;
mod det;
mod direct;
mod identities;
mod nested;

pub use basis::{build_m, build_psi, canonical_skew, k22_kernel, KernelFactors, PsiBasis, K22};
pub use det::{
    finite_moments, mgf_beta2, mgf_squared, mgf_squared_on, stat_grid, FiniteMoments, MgfValue,
    Resolution, StatGrid,
};
pub use direct::{mgf_direct, DirectEstimate};
pub use identities::{debruijn_check, vandermonde4_det_check, DeBruijnKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Laguerre,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "hermite" => Ok(Family::Gaussian),
            "laguerre" | "wishart" => Ok(Family::Laguerre),
            _ => Err(Error::invalid(format!("unknown family '{s}'"))),
        }
    }
}

/// One of GOE, GUE, GSE, LOE, LUE, LSE at a given size.
///
/// Weights: `e^{-x²}` (GUE, GSE), `e^{-x²/2}` (GOE), `x^α e^{-x}` (LUE, LSE)
/// and `x^{α/2} e^{-x/2}` (LOE).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: Family,
    pub beta: u8,
    pub n: usize,
    pub alpha: f64,
}

impl EnsembleSpec {
    pub fn new(family: Family, beta: u8, n: usize, alpha: f64) -> Result<Self> {
        if ![1, 2, 4].contains(&beta) {
            return Err(Error::invalid(format!("beta must be 1, 2 or 4, got {beta}")));
        }
        if n == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if beta == 1 && n % 2 == 1 {
            return Err(Error::invalid(format!("beta = 1 needs even N, got {n}")));
        }
        let alpha = match family {
            Family::Gaussian => 0.0,
            Family::Laguerre => {
                let (ok, bound) = match beta {
                    4 => (alpha > 0.0, "alpha > 0"),
                    1 => (alpha > -2.0, "alpha > -2"),
                    _ => (alpha > -1.0, "alpha > -1"),
                };
                if !ok || !alpha.is_finite() {
                    return Err(Error::invalid(format!("beta = {beta} Laguerre needs {bound}, got {alpha}")));
                }
                alpha
            }
        };
        Ok(EnsembleSpec { family, beta, n, alpha })
    }

    pub fn goe(n: usize) -> Result<Self> {
        Self::new(Family::Gaussian, 1, n, 0.0)
    }
    pub fn gue(n: usize) -> Result<Self> {
        Self::new(Family::Gaussian, 2, n, 0.0)
    }
    pub fn gse(n: usize) -> Result<Self> {
        Self::new(Family::Gaussian, 4, n, 0.0)
    }
    pub fn loe(n: usize, alpha: f64) -> Result<Self> {
        Self::new(Family::Laguerre, 1, n, alpha)
    }
    pub fn lue(n: usize, alpha: f64) -> Result<Self> {
        Self::new(Family::Laguerre, 2, n, alpha)
    }
    pub fn lse(n: usize, alpha: f64) -> Result<Self> {
        Self::new(Family::Laguerre, 4, n, alpha)
    }

    pub fn name(&self) -> &'static str {
        match (self.family, self.beta) {
            (Family::Gaussian, 1) => "GOE",
            (Family::Gaussian, 2) => "GUE",
            (Family::Gaussian, _) => "GSE",
            (Family::Laguerre, 1) => "LOE",
            (Family::Laguerre, 2) => "LUE",
            (Family::Laguerre, _) => "LSE",
        }
    }

    /// `(p, s)` with weight `x^p e^{-s x}` (Laguerre) or `e^{-s x²}` (Gaussian).
    pub fn weight_params(&self) -> (f64, f64) {
        match (self.family, self.beta) {
            (Family::Gaussian, 1) => (0.0, 0.5),
            (Family::Gaussian, _) => (0.0, 1.0),
            (Family::Laguerre, 1) => (0.5 * self.alpha, 0.5),
            (Family::Laguerre, _) => (self.alpha, 1.0),
        }
    }

    pub fn log_weight(&self, x: f64) -> f64 {
        let (p, s) = self.weight_params();
        match self.family {
            Family::Gaussian => -s * x * x,
            Family::Laguerre => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else if x == 0.0 {
                    if p == 0.0 {
                        0.0
                    } else if p > 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    }
                } else {
                    p * x.ln() - s * x
                }
            }
        }
    }

    pub fn weight(&self, x: f64) -> f64 {
        self.log_weight(x).exp()
    }

    /// `[a, b]` of the weight.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family::Gaussian => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Laguerre => (0.0, f64::INFINITY),
        }
    }

    /// Moment `s_j = ∫ x^j w(x) dx`.
    pub fn moment(&self, j: u32) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let (p, s) = self.weight_params();
        let jf = j as f64;
        match self.family {
            Family::Gaussian => {
                if j % 2 == 1 {
                    0.0
                } else {
                    (ln_gamma(0.5 * (jf + 1.0)) - 0.5 * (jf + 1.0) * s.ln()).exp()
                }
            }
            Family::Laguerre => (ln_gamma(p + jf + 1.0) - (p + jf + 1.0) * s.ln()).exp(),
        }
    }

    /// The scaling rule that centers the statistic on the bulk (Gaussian)
    /// or the hard edge (Laguerre).
    pub fn scaling(&self) -> ScalingRule {
        let n = self.n as f64;
        match (self.family, self.beta) {
            (Family::Gaussian, 4) => ScalingRule::Linear(4.0 * n),
            (Family::Gaussian, _) => ScalingRule::Linear(2.0 * n),
            (Family::Laguerre, 4) => ScalingRule::Sqrt(8.0 * n),
            (Family::Laguerre, _) => ScalingRule::Sqrt(4.0 * n),
        }
    }

    /// Typical largest eigenvalue magnitude, used to size truncations.
    pub fn edge(&self) -> f64 {
        let n = self.n as f64;
        let b = self.beta as f64;
        match (self.family, self.beta) {
            (Family::Gaussian, 1) => (2.0 * n).sqrt(),
            (Family::Gaussian, _) => (b * n).sqrt(),
            (Family::Laguerre, 1) => 4.0 * n + 2.0 * self.alpha.abs(),
            (Family::Laguerre, _) => 2.0 * b * n + 2.0 * self.alpha.abs(),
        }
    }
}

impl std::fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.family {
            Family::Gaussian => write!(f, "{}(N={})", self.name(), self.n),
            Family::Laguerre => write!(f, "{}(N={}, alpha={})", self.name(), self.n, self.alpha),
        }
    }
}

/// Map from a raw eigenvalue to the argument of the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "c")]
pub enum ScalingRule {
    /// `x ↦ x`
    Identity,
    /// `x ↦ √c · x`
    Linear(f64),
    /// `x ↦ √(c x)`
    Sqrt(f64),
}

impl ScalingRule {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ScalingRule::Identity => x,
            ScalingRule::Linear(c) => c.sqrt() * x,
            ScalingRule::Sqrt(c) => (c * x.max(0.0)).sqrt(),
        }
    }

    /// `d(rule)/dx`.
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            ScalingRule::Identity => 1.0,
            ScalingRule::Linear(c) => c.sqrt(),
            ScalingRule::Sqrt(c) => 0.5 * c.sqrt() / x.sqrt(),
        }
    }

    /// Raw eigenvalue for a statistic argument (the branch with `x ≥ 0`
    /// for square-root rules).
    pub fn inverse(&self, s: f64) -> f64 {
        match *self {
            ScalingRule::Identity => s,
            ScalingRule::Linear(c) => s / c.sqrt(),
            ScalingRule::Sqrt(c) => s.max(0.0).powi(2) / c,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ScalingRule::Identity => "x".into(),
            ScalingRule::Linear(c) => format!("sqrt({c})*x"),
            ScalingRule::Sqrt(c) => format!("sqrt({c}*x)"),
        }
    }
}

/// A linear statistic `Σ_j F(rule(x_j))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Statistic {
    pub f: TestFunction,
    pub rule: ScalingRule,
}

impl Statistic {
    pub fn new(f: TestFunction, rule: ScalingRule) -> Self {
        Statistic { f, rule }
    }

    /// The statistic under the ensemble's own scaling rule.
    pub fn scaled(spec: &EnsembleSpec, f: TestFunction) -> Self {
        Statistic { f, rule: spec.scaling() }
    }

    pub fn raw(f: TestFunction) -> Self {
        Statistic { f, rule: ScalingRule::Identity }
    }

    /// `F(rule(x))`.
    pub fn value(&self, x: f64) -> f64 {
        self.f.value(self.rule.apply(x))
    }

    /// `d/dx F(rule(x))`.
    pub fn deriv(&self, x: f64) -> f64 {
        self.f.deriv(self.rule.apply(x)) * self.rule.deriv(x)
    }

    /// Sum over one eigenvalue sample.
    pub fn sum(&self, xs: &[f64]) -> f64 {
        xs.iter().map(|&x| self.value(x)).sum()
    }
}
