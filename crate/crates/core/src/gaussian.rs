//! Diagonal and spherical Gaussian models with biased moment estimates and
//! the kurtosis-based TIC penalty.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SentenceSample;

/// Smallest variance a fit may report.
pub const VARIANCE_FLOOR: f64 = 1e-8;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianKind {
    Diagonal,
    Spherical,
}

impl GaussianKind {
    /// Free parameters at dimension `d`.
    pub fn param_count(self, d: usize) -> usize {
        match self {
            GaussianKind::Diagonal => 2 * d,
            GaussianKind::Spherical => d + 1,
        }
    }
}

/// Maximum-likelihood Gaussian fit of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub kind: GaussianKind,
    pub mu_hat: Vec<f64>,
    /// Per-dimension variance; a spherical fit repeats its single value.
    pub var_hat: Vec<f64>,
    /// Biased kurtosis `m4 / m2^2`; pooled across dimensions when spherical.
    /// Floored dimensions report 1.
    pub kurt_hat: Vec<f64>,
    pub n: usize,
    /// `-(n/2) sum log var - (n d / 2)(log 2pi + 1)`.
    pub max_loglik: f64,
    /// Dimensions whose variance hit [`VARIANCE_FLOOR`] (all of them for a
    /// floored spherical fit).
    pub floored: Vec<bool>,
    /// Mean and mean square of `||x_i - mu||^2`, used by the spherical penalty.
    sq_dist_moments: (f64, f64),
}

impl GaussianFit {
    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }

    pub fn degenerate(&self) -> bool {
        self.floored.iter().any(|&f| f)
    }

    /// Log-density of one point.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.mu_hat)
            .zip(&self.var_hat)
            .map(|((x, m), v)| -0.5 * ((2.0 * PI * v).ln() + (x - m) * (x - m) / v))
            .sum()
    }
}

/// Fits a Gaussian by maximum likelihood with biased (`1/n`) moments.
pub fn fit_gaussian(sample: &SentenceSample, kind: GaussianKind) -> GaussianFit {
    let n = sample.n();
    let d = sample.dim();
    let nf = n as f64;
    let mut mu = vec![0.0; d];
    for row in sample.rows() {
        mu.iter_mut().zip(row).for_each(|(m, x)| *m += x);
    }
    mu.iter_mut().for_each(|m| *m /= nf);

    let mut m2 = vec![0.0; d];
    let mut m4 = vec![0.0; d];
    let mut r_sum = 0.0;
    let mut r_sq_sum = 0.0;
    for row in sample.rows() {
        let mut r = 0.0;
        for j in 0..d {
            let c = row[j] - mu[j];
            let c2 = c * c;
            m2[j] += c2;
            m4[j] += c2 * c2;
            r += c2;
        }
        r_sum += r;
        r_sq_sum += r * r;
    }
    m2.iter_mut().for_each(|v| *v /= nf);
    m4.iter_mut().for_each(|v| *v /= nf);

    let (var_hat, kurt_hat, floored) = match kind {
        GaussianKind::Diagonal => {
            let mut var = Vec::with_capacity(d);
            let mut kurt = Vec::with_capacity(d);
            let mut floored = Vec::with_capacity(d);
            for j in 0..d {
                if m2[j] < VARIANCE_FLOOR {
                    var.push(VARIANCE_FLOOR);
                    kurt.push(1.0);
                    floored.push(true);
                } else {
                    var.push(m2[j]);
                    kurt.push(m4[j] / (m2[j] * m2[j]));
                    floored.push(false);
                }
            }
            (var, kurt, floored)
        }
        GaussianKind::Spherical => {
            let df = d as f64;
            let pooled2 = m2.iter().sum::<f64>() / df;
            let pooled4 = m4.iter().sum::<f64>() / df;
            let (v, k, f) = if pooled2 < VARIANCE_FLOOR {
                (VARIANCE_FLOOR, 1.0, true)
            } else {
                (pooled2, pooled4 / (pooled2 * pooled2), false)
            };
            (vec![v; d], vec![k; d], vec![f; d])
        }
    };
    let max_loglik = -0.5 * nf * var_hat.iter().map(|v| v.ln()).sum::<f64>()
        - 0.5 * nf * d as f64 * (LN_2PI + 1.0);
    GaussianFit {
        kind,
        mu_hat: mu,
        var_hat,
        kurt_hat,
        n,
        max_loglik,
        floored,
        sq_dist_moments: (r_sum / nf, r_sq_sum / nf),
    }
}

/// TIC penalty `tr(I J^{-1})`.
///
/// Diagonal: `d/2 + sum_i kurt_i / 2`. Spherical (experimental): the exact
/// trace for a shared precision, `r/s^2 + E[(r_i - d s^2)^2] / (2 d s^4)`
/// with `r_i = ||x_i - mu||^2` and `r` its mean, which is
/// `d + Var(r_i) / (2 d s^4)` when the variance is not floored.
pub fn gaussian_tic_penalty(fit: &GaussianFit) -> f64 {
    let d = fit.dim() as f64;
    match fit.kind {
        GaussianKind::Diagonal => 0.5 * d + 0.5 * fit.kurt_hat.iter().sum::<f64>(),
        GaussianKind::Spherical => {
            let s2 = fit.var_hat[0];
            let (r_mean, r_sq_mean) = fit.sq_dist_moments;
            let ds2 = d * s2;
            let spread = r_sq_mean - 2.0 * r_mean * ds2 + ds2 * ds2;
            r_mean / s2 + spread / (2.0 * d * s2 * s2)
        }
    }
}

/// Summed log-density of `sample` under the fit.
pub fn gaussian_loglik(fit: &GaussianFit, sample: &SentenceSample) -> Result<f64> {
    if sample.dim() != fit.dim() {
        return Err(Error::DimensionMismatch {
            expected: fit.dim(),
            found: sample.dim(),
        });
    }
    Ok(sample.rows().map(|x| fit.log_density(x)).sum())
}
