use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a smooth linear statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatFamily {
    /// `a · exp(−(x−c)²/(2s²))`
    Gaussian,
    /// `a / (1 + ((x−c)/s)²)²`
    Lorentzian,
    /// `a · (x/s)² · exp(−x/s)` for `x ≥ 0`, zero otherwise
    HalfBump,
}

impl std::str::FromStr for StatFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(StatFamily::Gaussian),
            "lorentzian" | "cauchy" => Ok(StatFamily::Lorentzian),
            "half-bump" | "halfbump" => Ok(StatFamily::HalfBump),
            _ => Err(Error::invalid(format!("unknown statistic family '{s}'"))),
        }
    }
}

/// A smooth statistic `F` with its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub family: StatFamily,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl TestFunction {
    pub fn new(family: StatFamily, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() || !center.is_finite() {
            return Err(Error::invalid("statistic needs finite amplitude/center and width > 0"));
        }
        Ok(TestFunction { family, amplitude, center, width })
    }

    /// `exp(−x²/2)`.
    pub fn gaussian() -> Self {
        TestFunction { family: StatFamily::Gaussian, amplitude: 1.0, center: 0.0, width: 1.0 }
    }

    pub fn zero() -> Self {
        TestFunction { amplitude: 0.0, ..Self::gaussian() }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        match self.family {
            StatFamily::Gaussian => self.amplitude * (-0.5 * t * t).exp(),
            StatFamily::Lorentzian => self.amplitude / (1.0 + t * t).powi(2),
            StatFamily::HalfBump => {
                if x < 0.0 {
                    0.0
                } else {
                    let s = x / self.width;
                    self.amplitude * s * s * (-s).exp()
                }
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        match self.family {
            StatFamily::Gaussian => -self.amplitude * t / self.width * (-0.5 * t * t).exp(),
            StatFamily::Lorentzian => -4.0 * self.amplitude * t / (self.width * (1.0 + t * t).powi(3)),
            StatFamily::HalfBump => {
                if x < 0.0 {
                    0.0
                } else {
                    let s = x / self.width;
                    self.amplitude * (2.0 * s - s * s) * (-s).exp() / self.width
                }
            }
        }
    }

    /// `f_λ = e^{−λF} − 1`.
    pub fn f_lambda(&self, lambda: f64, x: f64) -> f64 {
        (-lambda * self.value(x)).exp_m1()
    }

    /// `f_λ' = −λ F' e^{−λF}`.
    pub fn f_lambda_deriv(&self, lambda: f64, x: f64) -> f64 {
        -lambda * self.deriv(x) * (-lambda * self.value(x)).exp()
    }

    /// Interval outside which `|F| < tol`.
    pub fn support(&self, tol: f64) -> (f64, f64) {
        let a = self.amplitude.abs().max(tol);
        let r = match self.family {
            StatFamily::Gaussian => (2.0 * (a / tol).ln()).max(0.0).sqrt(),
            StatFamily::Lorentzian => ((a / tol).sqrt() - 1.0).max(0.0).sqrt(),
            StatFamily::HalfBump => {
                // s² e^{-s} < tol/a for s beyond this bound
                let mut s: f64 = 2.0;
                while s * s * (-s).exp() > tol / a {
                    s += 0.5;
                }
                return (0.0, s * self.width);
            }
        };
        (self.center - r * self.width, self.center + r * self.width)
    }
}
