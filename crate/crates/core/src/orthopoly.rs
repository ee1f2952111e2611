//! Weighted orthonormal function systems (Hermite and Laguerre), their
//! derivatives and ε-transforms, Christoffel-Darboux kernels, and the sine
//! and Bessel limiting kernels.
//!
//! All evaluations fold the weight into the recurrence start value and carry
//! a running scale exponent, so high degrees neither overflow nor lose the
//! Gaussian/exponential factor to underflow prematurely.

use std::f64::consts::PI;

use statrs::function::erf::erf;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::gauss::legendre_cached;
use crate::specfun::bessel_j_unchecked;

const RESCALE: f64 = 1e200;
const LN_RESCALE: f64 = 460.517_018_598_809_1; // ln(1e200)

/// Diagonal switch for Christoffel-Darboux quotients.
pub const DIAG_EPS: f64 = 1e-7;

/// Orthonormal Hermite functions `φ_j(x) = H_j(x) e^{-x²/2} / c_j`.
#[derive(Debug, Clone)]
pub struct HermiteSystem {
    max_degree: usize,
}

impl HermiteSystem {
    pub fn new(max_degree: usize) -> Self {
        HermiteSystem { max_degree }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check(&self, j: usize) -> Result<()> {
        if j > self.max_degree {
            return Err(Error::domain(format!("degree {j} exceeds max degree {}", self.max_degree)));
        }
        Ok(())
    }

    /// `φ_0(x) .. φ_{out.len()-1}(x)`.
    pub fn phi_all(x: f64, out: &mut [f64]) {
        hermite_recurrence(x, -0.5 * x * x, out);
    }

    /// Polynomial parts `φ_j(x) e^{x²/2}`.
    pub fn poly_all(x: f64, out: &mut [f64]) {
        hermite_recurrence(x, 0.0, out);
    }

    /// `εφ_0(x) .. εφ_{out.len()-1}(x)` given `phis` holding at least
    /// `out.len() - 1` values of `φ_j(x)`.
    pub fn eps_all(x: f64, phis: &[f64], out: &mut [f64]) {
        let m = out.len();
        if m == 0 {
            return;
        }
        let c0 = PI.powf(-0.25);
        out[0] = c0 * (0.5 * PI).sqrt() * erf(x / 2f64.sqrt());
        for j in 0..m - 1 {
            let jf = j as f64;
            let prev = if j == 0 { 0.0 } else { out[j - 1] };
            out[j + 1] = ((0.5 * jf).sqrt() * prev - phis[j]) / (0.5 * (jf + 1.0)).sqrt();
        }
    }

    pub fn phi(&self, j: usize, x: f64) -> Result<f64> {
        self.check(j)?;
        let mut v = vec![0.0; j + 1];
        Self::phi_all(x, &mut v);
        Ok(v[j])
    }

    /// `φ_j'(x) = √(j/2) φ_{j-1}(x) − √((j+1)/2) φ_{j+1}(x)`.
    pub fn phi_deriv(&self, j: usize, x: f64) -> Result<f64> {
        if j + 1 > self.max_degree {
            return Err(Error::domain(format!("derivative of degree {j} needs degree {}", j + 1)));
        }
        let mut v = vec![0.0; j + 2];
        Self::phi_all(x, &mut v);
        Ok(hermite_deriv_from(&v, j))
    }

    /// `εφ_j(x) = ½(∫_{-∞}^x − ∫_x^∞) φ_j`.
    pub fn eps_phi(&self, j: usize, x: f64) -> Result<f64> {
        self.check(j)?;
        let mut p = vec![0.0; j + 1];
        Self::phi_all(x, &mut p);
        let mut e = vec![0.0; j + 1];
        Self::eps_all(x, &p, &mut e);
        Ok(e[j])
    }

    /// `∫_ℝ φ_j`, zero for odd `j`.
    pub fn total_integral(j: usize) -> f64 {
        if j % 2 == 1 {
            return 0.0;
        }
        // I_0 = π^{1/4} √2, I_{j+2} = √((j+1)/(j+2)) I_j
        let mut v = PI.powf(0.25) * 2f64.sqrt();
        let mut k = 0;
        while k < j {
            v *= ((k as f64 + 1.0) / (k as f64 + 2.0)).sqrt();
            k += 2;
        }
        v
    }
}

pub(crate) fn hermite_deriv_from(v: &[f64], j: usize) -> f64 {
    let jf = j as f64;
    let lower = if j == 0 { 0.0 } else { (0.5 * jf).sqrt() * v[j - 1] };
    lower - (0.5 * (jf + 1.0)).sqrt() * v[j + 1]
}

fn hermite_recurrence(x: f64, log_weight: f64, out: &mut [f64]) {
    let m = out.len();
    if m == 0 {
        return;
    }
    let mut scale_log = log_weight - 0.25 * PI.ln();
    let mut factor = scale_log.exp();
    let (mut qm, mut q) = (0.0, 1.0);
    out[0] = factor;
    for j in 0..m - 1 {
        let jf = j as f64;
        let qn = (2.0 / (jf + 1.0)).sqrt() * x * q - (jf / (jf + 1.0)).sqrt() * qm;
        qm = q;
        q = qn;
        if q.abs() > RESCALE {
            q /= RESCALE;
            qm /= RESCALE;
            scale_log += LN_RESCALE;
            factor = scale_log.exp();
        }
        out[j + 1] = q * factor;
    }
}

/// Which power of `x` multiplies the Laguerre polynomial part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagVariant {
    /// `x^{(a+1)/2} e^{-x/2}`
    Phi,
    /// `x^{(a-1)/2} e^{-x/2}`
    Tilde,
    /// `x^{a/2} e^{-x/2}` (the orthonormal system of the unitary ensemble)
    Half,
}

impl LagVariant {
    fn shift(self) -> f64 {
        match self {
            LagVariant::Phi => 1.0,
            LagVariant::Tilde => -1.0,
            LagVariant::Half => 0.0,
        }
    }
}

/// Laguerre functions `L_j^{(a)}(x)/c_j · x^{(a+s)/2} e^{-x/2}` with
/// `c_j = √(Γ(j+a+1)/Γ(j+1))`.
#[derive(Debug, Clone)]
pub struct LaguerreSystem {
    a: f64,
    max_degree: usize,
    lg: f64,
}

impl LaguerreSystem {
    pub fn new(a: f64, max_degree: usize) -> Result<Self> {
        if !(a > -1.0) {
            return Err(Error::domain(format!("Laguerre parameter must exceed -1, got {a}")));
        }
        Ok(LaguerreSystem { a, max_degree, lg: ln_gamma(a + 1.0) })
    }

    pub fn param(&self) -> f64 {
        self.a
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check(&self, j: usize, x: f64) -> Result<()> {
        if j > self.max_degree {
            return Err(Error::domain(format!("degree {j} exceeds max degree {}", self.max_degree)));
        }
        if !(x >= 0.0) {
            return Err(Error::domain(format!("Laguerre functions live on x >= 0, got {x}")));
        }
        Ok(())
    }

    /// Values of the chosen variant for degrees `0..out.len()`.
    pub fn values_all(&self, x: f64, variant: LagVariant, out: &mut [f64]) {
        let e = 0.5 * (self.a + variant.shift());
        let log_w = if x == 0.0 {
            if e > 0.0 {
                f64::NEG_INFINITY
            } else if e == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            e * x.ln() - 0.5 * x
        };
        self.recurrence(x, log_w, out);
    }

    /// Normalized polynomial parts `L_j^{(a)}(x)/c_j`.
    pub fn poly_all(&self, x: f64, out: &mut [f64]) {
        self.recurrence(x, 0.0, out);
    }

    fn recurrence(&self, x: f64, log_weight: f64, out: &mut [f64]) {
        let m = out.len();
        if m == 0 {
            return;
        }
        let a = self.a;
        let mut scale_log = log_weight - 0.5 * self.lg;
        let mut factor = scale_log.exp();
        let (mut qm, mut q) = (0.0, 1.0);
        out[0] = factor;
        for j in 0..m - 1 {
            let jf = j as f64;
            let qn = ((2.0 * jf + 1.0 + a - x) * q - (jf * (jf + a)).sqrt() * qm)
                / ((jf + 1.0) * (jf + a + 1.0)).sqrt();
            qm = q;
            q = qn;
            if q.abs() > RESCALE {
                q /= RESCALE;
                qm /= RESCALE;
                scale_log += LN_RESCALE;
                factor = scale_log.exp();
            }
            out[j + 1] = if factor.is_finite() { q * factor } else { q.signum() * factor };
        }
    }

    pub fn value(&self, j: usize, variant: LagVariant, x: f64) -> Result<f64> {
        self.check(j, x)?;
        let mut v = vec![0.0; j + 1];
        self.values_all(x, variant, &mut v);
        Ok(v[j])
    }

    /// `[φ_j]'(x) = ½√((j+1)(j+a+1)) φ̃_{j+1} − ½√(j(j+a)) φ̃_{j-1}`.
    pub fn phi_deriv(&self, j: usize, x: f64) -> Result<f64> {
        self.check(j, x)?;
        let mut t = vec![0.0; j + 2];
        self.values_all(x, LagVariant::Tilde, &mut t);
        Ok(self.phi_deriv_from(&t, j))
    }

    /// Derivative of `φ_j` from tilde values `t` (length ≥ j+2).
    pub fn phi_deriv_from(&self, t: &[f64], j: usize) -> f64 {
        let jf = j as f64;
        let a = self.a;
        let up = 0.5 * ((jf + 1.0) * (jf + a + 1.0)).sqrt() * t[j + 1];
        let down = if j == 0 { 0.0 } else { 0.5 * (jf * (jf + a)).sqrt() * t[j - 1] };
        up - down
    }

    /// `εφ̃_0(x) .. εφ̃_{out.len()-1}(x)` given plain values `phis`
    /// (length ≥ out.len() - 1).
    pub fn eps_tilde_all(&self, x: f64, phis: &[f64], out: &mut [f64]) {
        let m = out.len();
        if m == 0 {
            return;
        }
        let a = self.a;
        let s = 0.5 * (a + 1.0);
        // εφ̃_0 = 2^s Γ(s)/c_0 · (P(s, x/2) − ½)
        let pref = (s * std::f64::consts::LN_2 + ln_gamma(s) - 0.5 * self.lg).exp();
        let p = if x <= 0.0 { 0.0 } else { gamma_lr(s, 0.5 * x) };
        out[0] = pref * (p - 0.5);
        for j in 0..m - 1 {
            let jf = j as f64;
            let prev = if j == 0 { 0.0 } else { out[j - 1] };
            out[j + 1] = (phis[j] + 0.5 * (jf * (jf + a)).sqrt() * prev)
                / (0.5 * ((jf + 1.0) * (jf + a + 1.0)).sqrt());
        }
    }

    /// `εg(x)` for `g = φ_j` (plain) or `φ̃_j` (tilde) on `[0, ∞)`.
    pub fn eps_value(&self, j: usize, variant: LagVariant, x: f64) -> Result<f64> {
        self.check(j, x)?;
        match variant {
            LagVariant::Tilde => {
                let mut p = vec![0.0; j + 1];
                self.values_all(x, LagVariant::Phi, &mut p);
                let mut e = vec![0.0; j + 1];
                self.eps_tilde_all(x, &p, &mut e);
                Ok(e[j])
            }
            _ => {
                let f = |t: f64| {
                    let mut v = vec![0.0; j + 1];
                    self.values_all(t, variant, &mut v);
                    v[j]
                };
                let upper = 4.0 * j as f64 + 2.0 * self.a.abs() + 120.0;
                let left = graded_integral(&f, 0.0, x.min(upper));
                let total = left + graded_integral(&f, x.min(upper), upper);
                Ok(left - 0.5 * total)
            }
        }
    }

    /// `∫_0^∞ φ̃_j`, from the closed Γ-ratio formulas for even degree
    /// (odd degrees integrate to zero when a = α−1 with the tilde weight of
    /// the symplectic case; in general evaluated through the ε recurrence).
    pub fn tilde_total(&self, j: usize) -> f64 {
        let mut p = vec![0.0; j + 1];
        let big = 1e6;
        self.values_all(big, LagVariant::Phi, &mut p);
        let mut e = vec![0.0; j + 1];
        self.eps_tilde_all(big, &p, &mut e);
        2.0 * e[j]
    }
}

/// ∫_a^b g with Gauss-Legendre panels of unit-ish length, refined
/// geometrically towards `a` when `a == 0` to absorb power singularities.
pub(crate) fn graded_integral(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = legendre_cached(20);
    let mut edges = Vec::new();
    if a == 0.0 {
        let mut h = b.min(1.0);
        let mut stack = vec![h];
        for _ in 0..40 {
            h *= 0.25;
            stack.push(h);
        }
        edges.push(0.0);
        edges.extend(stack.into_iter().rev());
    } else {
        edges.push(a);
    }
    let mut last = *edges.last().unwrap();
    while last < b {
        last = (last + 1.0).min(b);
        edges.push(last);
    }
    let mut s = 0.0;
    for e in edges.windows(2) {
        let (l, r) = (e[0], e[1]);
        if r <= l {
            continue;
        }
        let h = 0.5 * (r - l);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            s += h * w * g(l + h * (t + 1.0));
        }
    }
    s
}

/// Sine kernel `sin(x−y)/(π(x−y))`, equal to `1/π` on the diagonal.
pub fn sine_kernel(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() < 1e-8 {
        1.0 / PI - d * d / (6.0 * PI)
    } else {
        d.sin() / (PI * d)
    }
}

/// `sin(t)/t` with value 1 at the origin.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Bessel kernel
/// `B^{(a)}(x,y) = x (J_a(x) y J_a'(y) − J_a(y) x J_a'(x)) / (x² − y²)`
/// with diagonal `x (J_a(x)² − J_{a-1}(x) J_{a+1}(x)) / 2`.
pub fn bessel_kernel(a: f64, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::domain("Bessel kernel needs x, y >= 0"));
    }
    if !(a >= 0.0) && !(a > -1.0) {
        return Err(Error::domain("Bessel kernel order must exceed -1"));
    }
    Ok(bessel_kernel_from(x, y, &BesselTriple::at(a, x), &BesselTriple::at(a, y)))
}

/// `J_{a-1}, J_a, J_{a+1}` at one point.
#[derive(Debug, Clone, Copy)]
pub struct BesselTriple {
    pub jm: f64,
    pub j: f64,
    pub jp: f64,
}

impl BesselTriple {
    pub fn at(a: f64, x: f64) -> Self {
        if x == 0.0 {
            return BesselTriple { jm: 0.0, j: 0.0, jp: 0.0 };
        }
        let j = bessel_j_unchecked(a, x);
        let jp = bessel_j_unchecked(a + 1.0, x);
        // J_{a-1} from the three-term recurrence keeps orders in range
        let jm = 2.0 * a / x * j - jp;
        BesselTriple { jm, j, jp }
    }

    /// `J_a'` from `(J_{a-1} − J_{a+1})/2`.
    pub fn deriv(&self) -> f64 {
        0.5 * (self.jm - self.jp)
    }
}

pub fn bessel_kernel_from(x: f64, y: f64, bx: &BesselTriple, by: &BesselTriple) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if (x - y).abs() < 1e-8 * (1.0 + x) {
        return 0.5 * x * (bx.j * bx.j - bx.jm * bx.jp);
    }
    x * (bx.j * y * by.deriv() - by.j * x * bx.deriv()) / (x * x - y * y)
}

/// Christoffel-Darboux kernels of the five ensemble families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CdKind {
    /// `Σ_{j=0}^{2N} φ_jφ_j` (Hermite).
    Gse { n: usize },
    /// `Σ_{j=0}^{N-1} φ_jφ_j` (Hermite); also the unitary Gaussian kernel.
    Goe { n: usize },
    /// `Σ_{j=0}^{2N} φ_j(x) φ̃_j(y)` with Laguerre parameter α−1.
    Lse { n: usize, alpha: f64 },
    /// `Σ_{j=0}^{N-1} φ_j(x) φ̃_j(y)` with Laguerre parameter α+1.
    Loe { n: usize, alpha: f64 },
    /// `Σ_{j=0}^{N-1} φ_j φ_j` for the weight `x^α e^{-x}`.
    Lue { n: usize, alpha: f64 },
}

/// A Christoffel-Darboux kernel evaluated through its two-term closed form.
#[derive(Debug, Clone)]
pub struct CdKernel {
    kind: CdKind,
    lag: Option<LaguerreSystem>,
}

impl CdKernel {
    pub fn new(kind: CdKind) -> Result<Self> {
        let lag = match kind {
            CdKind::Gse { n } | CdKind::Goe { n } if n == 0 => {
                return Err(Error::invalid("N must be positive"));
            }
            CdKind::Gse { .. } | CdKind::Goe { .. } => None,
            CdKind::Lse { n, alpha } => {
                if !(alpha > 0.0) {
                    return Err(Error::invalid("symplectic Laguerre needs alpha > 0"));
                }
                Some(LaguerreSystem::new(alpha - 1.0, 2 * n + 2)?)
            }
            CdKind::Loe { n, alpha } => {
                if !(alpha > -2.0) {
                    return Err(Error::invalid("orthogonal Laguerre needs alpha > -2"));
                }
                Some(LaguerreSystem::new(alpha + 1.0, n + 1)?)
            }
            CdKind::Lue { n, alpha } => {
                if !(alpha > -1.0) {
                    return Err(Error::invalid("unitary Laguerre needs alpha > -1"));
                }
                Some(LaguerreSystem::new(alpha, n + 1)?)
            }
        };
        if let CdKind::Lse { n, .. } | CdKind::Loe { n, .. } | CdKind::Lue { n, .. } = kind {
            if n == 0 {
                return Err(Error::invalid("N must be positive"));
            }
        }
        Ok(CdKernel { kind, lag })
    }

    pub fn kind(&self) -> CdKind {
        self.kind
    }

    /// Top degree `m` so that the kernel is `Σ_{j=0}^{m-1}`.
    pub fn terms(&self) -> usize {
        match self.kind {
            CdKind::Gse { n } | CdKind::Lse { n, .. } => 2 * n + 1,
            CdKind::Goe { n } | CdKind::Loe { n, .. } | CdKind::Lue { n, .. } => n,
        }
    }

    /// Closed-form value; the diagonal uses the derivative rule.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let m = self.terms();
        let n = m - 1; // highest degree in the sum
        match &self.lag {
            None => {
                let mut px = vec![0.0; m + 2];
                let mut py = vec![0.0; m + 2];
                HermiteSystem::phi_all(x, &mut px);
                HermiteSystem::phi_all(y, &mut py);
                let c = (0.5 * m as f64).sqrt();
                if (x - y).abs() < DIAG_EPS {
                    let d_hi = hermite_deriv_from(&px, m);
                    let d_lo = hermite_deriv_from(&px, n);
                    c * (d_hi * px[n] - px[m] * d_lo)
                } else {
                    c * (px[m] * py[n] - py[m] * px[n]) / (x - y)
                }
            }
            Some(lag) => {
                let a = lag.param();
                let c = -((m as f64) * (m as f64 + a)).sqrt();
                let (lx, ly) = match self.kind {
                    CdKind::Lue { .. } => (LagVariant::Half, LagVariant::Half),
                    _ => (LagVariant::Phi, LagVariant::Tilde),
                };
                let mut fx = vec![0.0; m + 2];
                let mut gy = vec![0.0; m + 2];
                lag.values_all(x, lx, &mut fx);
                lag.values_all(y, ly, &mut gy);
                if (x - y).abs() < DIAG_EPS {
                    // d/dx of [f_m(x) g_n(y) − f_n(x) g_m(y)] at y = x
                    let (dm, dn) = match self.kind {
                        CdKind::Lue { .. } => {
                            let mut p = vec![0.0; m + 1];
                            lag.poly_all(x, &mut p);
                            let dp = laguerre_poly_derivs(lag, x, m + 1);
                            let w = (0.5 * a * x.ln() - 0.5 * x).exp();
                            let dw = w * (0.5 * a / x - 0.5);
                            (dp[m] * w + p[m] * dw, dp[n] * w + p[n] * dw)
                        }
                        _ => {
                            let mut t = vec![0.0; m + 2];
                            lag.values_all(x, LagVariant::Tilde, &mut t);
                            (lag.phi_deriv_from(&t, m), lag.phi_deriv_from(&t, n))
                        }
                    };
                    c * (dm * gy[n] - dn * gy[m])
                } else {
                    c * (fx[m] * gy[n] - fx[n] * gy[m]) / (x - y)
                }
            }
        }
    }

    /// The kernel in the variables of the scaled statistic, Jacobian
    /// included: `s = √(4N)x` (GSE), `√(2N)x` (GOE), `√(8Nx)` (LSE) and
    /// `√(4Nx)` (LOE, LUE). It tends to the sine kernel or to the Bessel
    /// kernel `B(s, t)` of order α−1, α+1 and α respectively.
    pub fn scaled(&self, s: f64, t: f64) -> f64 {
        match self.kind {
            CdKind::Gse { n } => {
                let c = (4.0 * n as f64).sqrt();
                self.eval(s / c, t / c) / c
            }
            CdKind::Goe { n } => {
                let c = (2.0 * n as f64).sqrt();
                self.eval(s / c, t / c) / c
            }
            CdKind::Lse { n, .. } => {
                let c = 8.0 * n as f64;
                2.0 * t / c * self.eval(s * s / c, t * t / c)
            }
            CdKind::Loe { n, .. } => {
                let c = 4.0 * n as f64;
                2.0 * t / c * self.eval(s * s / c, t * t / c)
            }
            CdKind::Lue { n, .. } => {
                let c = 4.0 * n as f64;
                2.0 * s / c * self.eval(s * s / c, t * t / c)
            }
        }
    }

    /// Direct spectral sum, used as a reference for the closed form.
    pub fn eval_sum(&self, x: f64, y: f64) -> f64 {
        let m = self.terms();
        match &self.lag {
            None => {
                let mut px = vec![0.0; m];
                let mut py = vec![0.0; m];
                HermiteSystem::phi_all(x, &mut px);
                HermiteSystem::phi_all(y, &mut py);
                px.iter().zip(&py).map(|(a, b)| a * b).sum()
            }
            Some(lag) => {
                let (lx, ly) = match self.kind {
                    CdKind::Lue { .. } => (LagVariant::Half, LagVariant::Half),
                    _ => (LagVariant::Phi, LagVariant::Tilde),
                };
                let mut fx = vec![0.0; m];
                let mut gy = vec![0.0; m];
                lag.values_all(x, lx, &mut fx);
                lag.values_all(y, ly, &mut gy);
                fx.iter().zip(&gy).map(|(a, b)| a * b).sum()
            }
        }
    }
}

/// Derivatives of the normalized Laguerre polynomials for degrees `0..m`.
fn laguerre_poly_derivs(lag: &LaguerreSystem, x: f64, m: usize) -> Vec<f64> {
    let a = lag.param();
    let mut p = vec![0.0; m];
    lag.poly_all(x, &mut p);
    let mut d = vec![0.0; m];
    // differentiate the normalized recurrence
    for j in 0..m.saturating_sub(1) {
        let jf = j as f64;
        let prev = if j == 0 { 0.0 } else { d[j - 1] };
        d[j + 1] = ((2.0 * jf + 1.0 + a - x) * d[j] - p[j] - (jf * (jf + a)).sqrt() * prev)
            / ((jf + 1.0) * (jf + a + 1.0)).sqrt();
    }
    d
}
