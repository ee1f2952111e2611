//! Gauss quadrature rules: Legendre by Newton iteration on the three-term
//! recurrence, the other classical families by Golub-Welsch followed by a
//! Newton polish on the orthonormal recurrence.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::tridiag::symtri_eigenvalues;

/// Nodes (ascending) and positive weights of an n-point rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of `w_i g(x_i)`.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }

    /// Affine image of a rule on [-1, 1] onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        Rule {
            nodes: self.nodes.iter().map(|x| c + h * x).collect(),
            weights: self.weights.iter().map(|w| h * w).collect(),
        }
    }
}

/// Gauss-Legendre rule on [-1, 1].
pub fn legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_pd(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared Gauss-Legendre rules on [-1, 1], computed once per size.
pub fn legendre_cached(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(legendre(n))).clone()
}

/// Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
pub fn hermite(n: usize) -> Result<Rule> {
    let a = vec![0.0; n];
    let b: Vec<f64> = (0..=n).map(|k| k as f64 / 2.0).collect();
    from_recurrence(&a, &b, std::f64::consts::PI.sqrt())
}

/// Generalized Gauss-Laguerre rule for `x^alpha exp(-x)` on (0, inf).
pub fn laguerre(n: usize, alpha: f64) -> Result<Rule> {
    if alpha <= -1.0 {
        return Err(Error::domain("Laguerre parameter must exceed -1"));
    }
    let a: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let b: Vec<f64> = (0..=n).map(|k| k as f64 * (k as f64 + alpha)).collect();
    from_recurrence(&a, &b, statrs::function::gamma::gamma(alpha + 1.0))
}

/// Gauss-Jacobi rule for `(1-x)^a (1+x)^b` on [-1, 1].
pub fn jacobi(n: usize, a: f64, b: f64) -> Result<Rule> {
    if a <= -1.0 || b <= -1.0 {
        return Err(Error::domain("Jacobi parameters must exceed -1"));
    }
    let ab = a + b;
    let mut al = Vec::with_capacity(n);
    let mut be = Vec::with_capacity(n + 1);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        al.push(if k == 0 { (b - a) / (ab + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) });
    }
    be.push(0.0);
    for k in 1..=n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let v = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        be.push(v);
    }
    use statrs::function::gamma::ln_gamma;
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    from_recurrence(&al, &be, mu0)
}

/// Rule for the monic recurrence `x p_k = p_{k+1} + a_k p_k + b_k p_{k-1}`
/// with total mass `mu0`. `b` must hold `b_0..=b_n` (`b_0` unused).
fn from_recurrence(a: &[f64], b: &[f64], mu0: f64) -> Result<Rule> {
    let n = a.len();
    if n == 0 {
        return Ok(Rule { nodes: vec![], weights: vec![] });
    }
    let off: Vec<f64> = (1..n).map(|k| b[k].sqrt()).collect();
    let mut nodes = symtri_eigenvalues(a, &off)?;
    let sb: Vec<f64> = b.iter().map(|v| v.sqrt()).collect();
    let q0 = 1.0 / mu0.sqrt();
    let eval = |x: f64| -> (f64, f64, f64) {
        // orthonormal q_n, q_n', and sum_{k<n} q_k^2
        let (mut qm, mut q) = (0.0, q0);
        let (mut dm, mut d) = (0.0, 0.0);
        let mut s = 0.0;
        for k in 0..n {
            s += q * q;
            let qn = ((x - a[k]) * q - sb[k] * qm) / sb[k + 1];
            let dn = (q + (x - a[k]) * d - sb[k] * dm) / sb[k + 1];
            qm = q;
            q = qn;
            dm = d;
            d = dn;
        }
        (q, d, s)
    };
    let mut weights = vec![0.0; n];
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..3 {
            let (q, d, _) = eval(*x);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let dx = q / d;
            if !dx.is_finite() {
                break;
            }
            *x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, _, s) = eval(*x);
        *w = 1.0 / s;
    }
    Ok(Rule { nodes, weights })
}
