//! Monte Carlo samples of the eigenvalue jpdf `∏|x_j − x_k|^β ∏ w(x_j)` and
//! empirical moments of linear statistics.
//!
//! Samples are drawn in independent streams of [`STREAM_LEN`] samples, each
//! with its own ChaCha stream derived from the seed, so a batch does not
//! depend on how many threads produced it.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, Family, Statistic};
use crate::error::{Error, Result};
use crate::tridiag::symtri_eigenvalues;

pub const STREAM_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dumitriu–Edelman tridiagonal models, mapped to the ensemble weight.
    Tridiagonal,
    /// Random-walk Metropolis on the log-jpdf.
    Mcmc,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tridiagonal" | "tridiag" => Ok(Method::Tridiagonal),
            "mcmc" | "metropolis" => Ok(Method::Mcmc),
            _ => Err(Error::invalid(format!("unknown sampling method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcOptions {
    /// Sweeps (one proposal per coordinate) discarded per stream.
    pub burn_in: usize,
    /// Sweeps between kept samples; `None` picks it from the integrated
    /// autocorrelation time of `Σ x_j` on a pilot run.
    pub thin: Option<usize>,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions { burn_in: 10_000, thin: None }
    }
}

/// Per-stream chain summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub acceptance: f64,
    pub step: f64,
    pub thin: usize,
    pub autocorr_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub spec: EnsembleSpec,
    pub method: Method,
    pub seed: u64,
    /// One ascending eigenvalue vector per sample.
    pub samples: Vec<Vec<f64>>,
    /// Empty for the tridiagonal method.
    pub chains: Vec<ChainDiagnostics>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean acceptance rate over chains (`None` for tridiagonal batches).
    pub fn acceptance(&self) -> Option<f64> {
        if self.chains.is_empty() {
            None
        } else {
            Some(self.chains.iter().map(|c| c.acceptance).sum::<f64>() / self.chains.len() as f64)
        }
    }

    /// One row per sample, one column per sorted eigenvalue, 17 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header: Vec<String> = (1..=self.spec.n).map(|j| format!("x{j}")).collect();
        out.write_record(&header).map_err(io_err)?;
        for s in &self.samples {
            out.write_record(s.iter().map(|&x| crate::fmt_f64(x))).map_err(io_err)?;
        }
        out.flush().map_err(|e| Error::Numerical(format!("csv output: {e}")))?;
        Ok(())
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Numerical(format!("csv output: {e}"))
}

pub fn sample(spec: &EnsembleSpec, count: usize, seed: u64, method: Method) -> Result<SampleBatch> {
    sample_with(spec, count, seed, method, &McmcOptions::default())
}

pub fn sample_with(spec: &EnsembleSpec, count: usize, seed: u64, method: Method, opts: &McmcOptions) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if opts.thin == Some(0) {
        return Err(Error::invalid("thinning interval must be at least 1"));
    }
    let streams = count.div_ceil(STREAM_LEN);
    let parts: Vec<Result<(Vec<Vec<f64>>, Option<ChainDiagnostics>)>> = (0..streams)
        .into_par_iter()
        .map(|k| {
            let len = STREAM_LEN.min(count - k * STREAM_LEN);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            match method {
                Method::Tridiagonal => (0..len).map(|_| tridiagonal_draw(spec, &mut rng)).collect::<Result<Vec<_>>>().map(|s| (s, None)),
                Method::Mcmc => mcmc_stream(spec, len, opts, &mut rng).map(|(s, d)| (s, Some(d))),
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(count);
    let mut chains = Vec::new();
    for p in parts {
        let (s, d) = p?;
        samples.extend(s);
        chains.extend(d);
    }
    Ok(SampleBatch { spec: *spec, method, seed, samples, chains })
}

fn chi<R: Rng>(dof: f64, rng: &mut R) -> Result<f64> {
    let d = ChiSquared::new(dof).map_err(|e| Error::Numerical(format!("chi-squared({dof}): {e}")))?;
    Ok(d.sample(rng).sqrt())
}

/// Hermite model: jpdf `∝ |Δ|^β e^{−Σy²/2}`, mapped by `x = y/√(2s)` to the
/// weight `e^{−s x²}`. Laguerre model: `B Bᵀ` with bidiagonal `B` gives
/// `∝ |Δ|^β ∏ λ^{a−1−β(N−1)/2} e^{−λ/2}`, mapped by `x = λ/(2s)` to
/// `x^p e^{−s x}`.
fn tridiagonal_draw<R: Rng>(spec: &EnsembleSpec, rng: &mut R) -> Result<Vec<f64>> {
    let n = spec.n;
    let beta = spec.beta as f64;
    let (p, s) = spec.weight_params();
    match spec.family {
        Family::Gaussian => {
            let diag: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let off = (1..n)
                .map(|k| chi(beta * (n - k) as f64, rng).map(|c| c / 2f64.sqrt()))
                .collect::<Result<Vec<f64>>>()?;
            let scale = 1.0 / (2.0 * s).sqrt();
            Ok(symtri_eigenvalues(&diag, &off)?.into_iter().map(|y| y * scale).collect())
        }
        Family::Laguerre => {
            let a = p + 1.0 + 0.5 * beta * (n as f64 - 1.0);
            let d = (0..n).map(|i| chi(2.0 * a - beta * i as f64, rng)).collect::<Result<Vec<f64>>>()?;
            let e = (1..n).map(|k| chi(beta * (n - k) as f64, rng)).collect::<Result<Vec<f64>>>()?;
            let diag: Vec<f64> = (0..n).map(|i| d[i] * d[i] + if i > 0 { e[i - 1] * e[i - 1] } else { 0.0 }).collect();
            let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| d[i] * e[i]).collect();
            let scale = 1.0 / (2.0 * s);
            Ok(symtri_eigenvalues(&diag, &off)?.into_iter().map(|l| (l * scale).max(0.0)).collect())
        }
    }
}

struct Chain<'a> {
    spec: &'a EnsembleSpec,
    x: Vec<f64>,
    step: f64,
    accepted: usize,
    proposed: usize,
}

impl<'a> Chain<'a> {
    fn new(spec: &'a EnsembleSpec) -> Self {
        let n = spec.n;
        let (_, s) = spec.weight_params();
        let x = match spec.family {
            Family::Gaussian => {
                let r = 0.8 * spec.edge();
                (0..n).map(|j| -r + 2.0 * r * (j as f64 + 0.5) / n as f64).collect()
            }
            Family::Laguerre => (0..n).map(|j| 0.8 * spec.edge() * (j as f64 + 0.5) / n as f64 + 0.5 / s).collect(),
        };
        let spacing = spec.edge() / n as f64;
        Chain { spec, x, step: spacing.max(0.1), accepted: 0, proposed: 0 }
    }

    /// Change of the log-jpdf when coordinate `j` moves to `y`.
    fn delta(&self, j: usize, y: f64) -> f64 {
        let lw = self.spec.log_weight(y);
        if !lw.is_finite() {
            return f64::NEG_INFINITY;
        }
        let xj = self.x[j];
        let mut d = lw - self.spec.log_weight(xj);
        let mut vand = 0.0;
        for (k, &xk) in self.x.iter().enumerate() {
            if k != j {
                vand += ((y - xk).abs() / (xj - xk).abs()).ln();
            }
        }
        d += self.spec.beta as f64 * vand;
        d
    }

    fn sweep<R: Rng>(&mut self, rng: &mut R) {
        for j in 0..self.x.len() {
            let y = self.x[j] + self.step * rng.sample::<f64, _>(StandardNormal);
            let d = self.delta(j, y);
            self.proposed += 1;
            if d >= 0.0 || rng.random::<f64>() < d.exp() {
                self.x[j] = y;
                self.accepted += 1;
            }
        }
    }

    fn take_rate(&mut self) -> f64 {
        let r = self.accepted as f64 / self.proposed.max(1) as f64;
        self.accepted = 0;
        self.proposed = 0;
        r
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }
}

/// Integrated autocorrelation time `1 + 2 Σ ρ_k`, summed until the first
/// non-positive pair sum.
fn autocorr_time(series: &[f64]) -> f64 {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0 = c.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let rho = |k: usize| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * c0);
    let mut tau = 1.0;
    let mut k = 1;
    while k + 1 < n / 2 {
        let pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    tau
}

fn mcmc_stream<R: Rng>(spec: &EnsembleSpec, len: usize, opts: &McmcOptions, rng: &mut R) -> Result<(Vec<Vec<f64>>, ChainDiagnostics)> {
    let mut chain = Chain::new(spec);
    const TUNE: usize = 100;
    for b in 0..opts.burn_in {
        chain.sweep(rng);
        if (b + 1) % TUNE == 0 {
            let r = chain.take_rate();
            if r > 0.45 {
                chain.step *= 1.15;
            } else if r < 0.3 {
                chain.step *= 0.85;
            }
        }
    }
    chain.take_rate();
    let pilot: Vec<f64> = (0..2000)
        .map(|_| {
            chain.sweep(rng);
            chain.x.iter().sum()
        })
        .collect();
    let tau = autocorr_time(&pilot);
    let thin = opts.thin.unwrap_or(tau.ceil() as usize).max(1);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        for _ in 0..thin {
            chain.sweep(rng);
        }
        out.push(chain.sorted());
    }
    let acceptance = chain.take_rate();
    if !chain.x.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("Metropolis chain left the support".into()));
    }
    Ok((out, ChainDiagnostics { acceptance, step: chain.step, thin, autocorr_time: tau }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub samples: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    /// Jackknife standard error of the sample variance.
    pub variance_stderr: f64,
}

/// Empirical mean and variance of `Σ_j F(rule(x_j))`.
pub fn linstat_moments(batch: &SampleBatch, stat: &Statistic) -> Result<MomentReport> {
    let vals: Vec<f64> = batch.samples.iter().map(|s| stat.sum(s)).collect();
    moments_of(&vals)
}

pub fn moments_of(vals: &[f64]) -> Result<MomentReport> {
    let n = vals.len();
    if n < 2 {
        return Err(Error::invalid("need at least two samples for a variance"));
    }
    let nf = n as f64;
    let mean = vals.iter().sum::<f64>() / nf;
    let c: Vec<f64> = vals.iter().map(|v| v - mean).collect();
    let s1: f64 = c.iter().sum();
    let s2: f64 = c.iter().map(|v| v * v).sum();
    let variance = (s2 - s1 * s1 / nf) / (nf - 1.0);
    let variance_stderr = if n < 3 {
        f64::NAN
    } else {
        let m = nf - 1.0;
        let loo: Vec<f64> = c
            .iter()
            .map(|v| {
                let a = s1 - v;
                (s2 - v * v - a * a / m) / (m - 1.0)
            })
            .collect();
        let lm = loo.iter().sum::<f64>() / nf;
        (m / nf * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(MomentReport { samples: n, mean, mean_stderr: (variance / nf).sqrt(), variance, variance_stderr })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Sample mean of `e^{−λ Σ F(rule(x_j))}`.
pub fn mgf_estimate(batch: &SampleBatch, stat: &Statistic, lambda: f64) -> Result<MgfEstimate> {
    if !lambda.is_finite() {
        return Err(Error::invalid("lambda must be finite"));
    }
    let vals: Vec<f64> = batch.samples.iter().map(|s| (-lambda * stat.sum(s)).exp()).collect();
    let n = vals.len() as f64;
    let value = vals.iter().sum::<f64>() / n;
    let var = if vals.len() > 1 { vals.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(MgfEstimate { value, stderr: (var / n).sqrt() })
}
