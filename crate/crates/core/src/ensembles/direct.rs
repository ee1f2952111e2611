use super::nested::{ordered_integral, Node, Panels};
use super::{EnsembleSpec, Family, ScalingRule, Statistic};
use crate::error::{Error, Result};
use crate::operator::NodeMap;

/// Brute-force value with a resolution-doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectEstimate {
    pub value: f64,
    pub error: f64,
}

const BASE_Q: usize = 10;

/// `E[exp(−λ Σ F(rule(x_j)))]` as a ratio of `N`-dimensional quadratures of
/// the joint density, for `N ≤ 3`.
pub fn mgf_direct(spec: &EnsembleSpec, stat: &Statistic, lambda: f64) -> Result<DirectEstimate> {
    if spec.n > 3 {
        return Err(Error::invalid(format!("direct quadrature supports N <= 3, got {}", spec.n)));
    }
    if lambda == 0.0 || stat.f.is_zero() {
        return Ok(DirectEstimate { value: 1.0, error: 0.0 });
    }
    let coarse = direct_at(spec, stat, lambda, BASE_Q)?;
    let fine = direct_at(spec, stat, lambda, 2 * BASE_Q)?;
    Ok(DirectEstimate { value: fine, error: (fine - coarse).abs() })
}

/// Panels in the variable `v` with `x = map(v)` covering the weight.
pub(crate) fn direct_panels(spec: &EnsembleSpec, stat: &Statistic, q: usize) -> Result<Panels> {
    let (_, s) = spec.weight_params();
    let width = stat.f.width;
    match spec.family {
        Family::Gaussian => {
            let cm = match stat.rule {
                ScalingRule::Identity => 1.0,
                ScalingRule::Linear(c) => c.sqrt(),
                ScalingRule::Sqrt(_) => {
                    return Err(Error::Unsupported("square-root scaling on the real line".into()));
                }
            };
            let r = 1.1 * spec.edge() + (40.0 / s).sqrt();
            let h = width.min(0.5 * cm / s.sqrt());
            Ok(Panels::new(-cm * r, cm * r, h, q, NodeMap::Linear(cm), false))
        }
        Family::Laguerre => {
            let cm = match stat.rule {
                ScalingRule::Sqrt(c) => c,
                _ => 1.0,
            };
            let xmax = 1.3 * spec.edge() + 60.0 / s;
            let vmax = (cm * xmax).sqrt();
            // |ds/dv| bounds the rate at which F varies along v
            let stat_h = match stat.rule {
                ScalingRule::Sqrt(_) => width,
                ScalingRule::Identity => width / (2.0 * vmax),
                ScalingRule::Linear(c) => width / (2.0 * c.sqrt() * vmax),
            };
            let h = stat_h.min(0.5 * (cm / s).sqrt());
            Ok(Panels::new(0.0, vmax, h, q, NodeMap::Square(cm), true))
        }
    }
}

fn direct_at(spec: &EnsembleSpec, stat: &Statistic, lambda: f64, q: usize) -> Result<f64> {
    let panels = direct_panels(spec, stat, q)?;
    let beta = spec.beta as i32;
    let g0 = |x: f64| spec.weight(x);
    let g1 = |x: f64| spec.weight(x) * (-lambda * stat.value(x)).exp();
    let ratio = if beta == 1 {
        let vander = |xs: &[f64], g: &dyn Fn(f64) -> f64| -> f64 {
            let mut p: f64 = xs.iter().map(|&x| g(x)).product();
            for k in 0..xs.len() {
                for j in 0..k {
                    p *= xs[k] - xs[j];
                }
            }
            p
        };
        let z1 = ordered_integral(&panels, spec.n, &mut |xs| vander(xs, &g1));
        let z0 = ordered_integral(&panels, spec.n, &mut |xs| vander(xs, &g0));
        z1 / z0
    } else {
        let nodes = panels.nodes();
        simplex_sum(&nodes, spec.n, beta, &g1) / simplex_sum(&nodes, spec.n, beta, &g0)
    };
    if !ratio.is_finite() {
        return Err(Error::Numerical("direct quadrature produced a non-finite ratio".into()));
    }
    Ok(ratio)
}

/// `Σ_{i<j<...} Π w g(x) Π |Δx|^β` over a fixed rule (even β, smooth
/// integrand, so the full tensor sum is `N!` times this).
fn simplex_sum(nodes: &[Node], n: usize, beta: i32, g: &dyn Fn(f64) -> f64) -> f64 {
    let x: Vec<f64> = nodes.iter().map(|n| n.x).collect();
    let wg: Vec<f64> = nodes.iter().map(|n| n.w * g(n.x)).collect();
    let m = x.len();
    match n {
        1 => wg.iter().sum(),
        2 => {
            let mut s = 0.0;
            for i in 0..m {
                let mut t = 0.0;
                for j in 0..i {
                    t += wg[j] * (x[i] - x[j]).powi(beta);
                }
                s += wg[i] * t;
            }
            s
        }
        _ => {
            let mut s = 0.0;
            for k in 0..m {
                let mut sk = 0.0;
                for j in 0..k {
                    let dkj = (x[k] - x[j]).powi(beta);
                    let mut sj = 0.0;
                    for i in 0..j {
                        sj += wg[i] * ((x[k] - x[i]) * (x[j] - x[i])).powi(beta);
                    }
                    sk += wg[j] * dkj * sj;
                }
                s += wg[k] * sk;
            }
            s
        }
    }
}
