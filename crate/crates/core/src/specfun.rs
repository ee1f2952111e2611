//! Scalar special functions: log-gamma, Bessel functions of real order, the
//! sine integral, and two exact/closed-form sums used as checks.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gauss::legendre_cached;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Leading Stirling approximation `sqrt(2π) n^{n-1/2} e^{-n}`, in log form.
pub fn log_stirling(n: f64) -> f64 {
    0.5 * (2.0 * PI).ln() + (n - 0.5) * n.ln() - n
}

/// Bessel function of the first kind `J_ν(x)` for real `ν >= -1`, `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= -1.0) || !nu.is_finite() {
        return Err(Error::domain(format!("bessel_j order must be >= -1, got {nu}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_j argument must be >= 0, got {x}")));
    }
    Ok(bessel_j_unchecked(nu, x))
}

pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if nu < 0.0 && nu == nu.round() {
        let n = -nu;
        let v = bessel_j_unchecked(n, x);
        return if (n as i64) % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x <= 12.0 {
        return bessel_series(nu, x);
    }
    if let Some(v) = bessel_hankel(nu, x) {
        return v;
    }
    bessel_integral(nu, x)
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let lg = statrs::function::gamma::ln_gamma(nu + 1.0);
    let mut term = (nu * h.ln() - lg).exp();
    let mut sum = term;
    let q = h * h;
    for k in 1..500 {
        let kf = k as f64;
        term *= -q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion; `None` when it cannot reach full accuracy.
fn bessel_hankel(nu: f64, x: f64) -> Option<f64> {
    if x < 25.0 {
        return None;
    }
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        let a = term.abs();
        if a > last {
            break;
        }
        last = a;
        // P gets even k with sign (-1)^{k/2}, Q gets odd k with sign (-1)^{(k-1)/2}
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if a < 1e-17 {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
}

/// Schläfli integral representation, valid for `x > 0` and real order.
fn bessel_integral(nu: f64, x: f64) -> f64 {
    let rule = legendre_cached(24);
    let panels = ((x + nu.abs()) / 6.0).ceil().max(2.0) as usize;
    let h = PI / panels as f64;
    let mut first = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let th = a + 0.5 * h * (t + 1.0);
            first += 0.5 * h * w * (nu * th - x * th.sin()).cos();
        }
    }
    first /= PI;
    let s = (nu * PI).sin();
    if s == 0.0 {
        return first;
    }
    // integrand exp(-x sinh t - nu t); truncate where the exponent passes 45
    let mut tmax: f64 = 1.0;
    while x * tmax.sinh() + nu * tmax < 45.0 {
        tmax *= 1.5;
    }
    let panels = 8;
    let h = tmax / panels as f64;
    let mut second = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = a + 0.5 * h * (t + 1.0);
            second += 0.5 * h * w * (-x * u.sinh() - nu * u).exp();
        }
    }
    first - s / PI * second
}

/// `J_{ν+k}(x)` for `k = 0..=kmax`, by backward recurrence normalized
/// against a direct evaluation.
pub fn bessel_j_ladder(nu: f64, x: f64, kmax: usize) -> Result<Vec<f64>> {
    let j0 = bessel_j(nu, x)?;
    if x == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = j0;
        return Ok(v);
    }
    let start = kmax.max(x.ceil() as usize) + 40 + (x.sqrt() * 4.0) as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-280;
    for k in (1..=start).rev() {
        let mu = nu + k as f64;
        vals[k - 1] = 2.0 * mu / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let j1 = bessel_j_unchecked(nu + 1.0, x);
    let scale = if j0.abs() >= j1.abs() { j0 / vals[0] } else { j1 / vals[1] };
    vals.truncate(kmax + 1);
    for v in vals.iter_mut() {
        *v *= scale;
    }
    Ok(vals)
}

/// `∫_0^x J_ν(t) dt` for `ν > -1`, via the Neumann series `2 Σ J_{ν+2k+1}(x)`.
pub fn bessel_j_integral(nu: f64, x: f64) -> Result<f64> {
    if !(nu > -1.0) {
        return Err(Error::domain("bessel_j_integral needs order > -1"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("bessel_j_integral needs x >= 0"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let kmax = 2 * ((x as usize) / 2 + 30) + 1;
    let ladder = bessel_j_ladder(nu, x, kmax)?;
    let s: f64 = ladder.iter().skip(1).step_by(2).sum();
    Ok(2.0 * s)
}

/// Sine integral `Si(x) = ∫_0^x sin t / t dt`.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 2.0 {
        let mut sum = 0.0;
        let mut term = ax; // x^{2k+1}/(2k+1)!
        for k in 0..40 {
            let kf = k as f64;
            sum += term / (2.0 * kf + 1.0);
            term *= -ax * ax / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        // continued fraction for E1(ix), modified Lentz
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, ax);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..200 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(ax.cos(), -ax.sin());
        0.5 * PI + h.im
    };
    v.copysign(x)
}

/// `₂F₁(-N, 1; 3/2; 2) = ∫_0^1 (2x²-1)^N dx`.
///
/// The piece on `[0, 1/√2]` is a Wallis integral; the piece on `[1/√2, 1]`
/// is integrated on a mesh graded towards `x = 1`.
pub fn hyp2f1_lemma22(n: u64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let nf = n as f64;
    let wallis = 0.5 * PI.sqrt() * (ln_gamma(nf + 1.0) - ln_gamma(nf + 1.5)).exp();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let left = sign * wallis / 2f64.sqrt();
    if n == 0 {
        return left + (1.0 - std::f64::consts::FRAC_1_SQRT_2);
    }
    // right piece in s = 1 - x on [0, 1 - 1/√2]; integrand ~ exp(-4 N s)
    let rule = legendre_cached(30);
    let smax = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let mut edges = vec![0.0];
    let mut h = 0.25 / (4.0 * nf);
    while edges[edges.len() - 1] + h < smax {
        let last = edges[edges.len() - 1];
        edges.push(last + h);
        h *= 2.0;
    }
    edges.push(smax);
    let mut right = 0.0;
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = a + 0.5 * (b - a) * (t + 1.0);
            let x = 1.0 - s;
            let base = 2.0 * x * x - 1.0;
            right += 0.5 * (b - a) * w * (nf * base.ln()).exp();
        }
    }
    left + right
}

/// Left-hand side of the binomial identity
/// `Σ_{m=0}^{2n} (-1)^m / (m! Π_{l=m}^{2n}(α+2l)) · C(2n+α, 2n-m+1)` as an
/// exact rational for rational `α > 0`.
pub fn lemma23_lhs(n: u32, alpha: &BigRational) -> Result<BigRational> {
    if *alpha <= BigRational::zero() {
        return Err(Error::domain("lemma23_lhs needs alpha > 0"));
    }
    let two_n = 2 * n as i64;
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let mut total = BigRational::zero();
    let mut m_fact = BigRational::one();
    for m in 0..=two_n {
        if m > 0 {
            m_fact *= int(m);
        }
        let mut prod = BigRational::one();
        for l in m..=two_n {
            prod *= alpha + int(2 * l);
        }
        let k = two_n - m + 1;
        let top = alpha + int(two_n);
        let mut binom = BigRational::one();
        for i in 0..k {
            binom *= &top - int(i);
            binom /= int(i + 1);
        }
        let term = binom / (&m_fact * prod);
        if m % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Floating-point version of [`lemma23_lhs`] for arbitrary real `α > 0`.
pub fn lemma23_lhs_f64(n: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain("lemma23_lhs needs alpha > 0"));
    }
    let two_n = 2 * n as i64;
    let mut total = 0.0;
    let mut m_fact = 1.0;
    for m in 0..=two_n {
        if m > 0 {
            m_fact *= m as f64;
        }
        let prod: f64 = (m..=two_n).map(|l| alpha + 2.0 * l as f64).product();
        let k = two_n - m + 1;
        let top = alpha + two_n as f64;
        let binom: f64 = (0..k).map(|i| (top - i as f64) / (i + 1) as f64).product();
        let term = binom / (m_fact * prod);
        total += if m % 2 == 0 { term } else { -term };
    }
    Ok(total)
}

/// `1/(2n+1)!` as an exact rational.
pub fn inv_odd_factorial(n: u32) -> BigRational {
    let mut f = BigInt::one();
    for k in 2..=(2 * n as u64 + 1) {
        f *= k;
    }
    BigRational::new(BigInt::one(), f)
}
