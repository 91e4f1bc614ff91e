//! Von Mises-Fisher model: maximum-likelihood fit, log-likelihood and the
//! diagonal TIC penalty.
//!
//! Log-likelihoods are in the Cartesian parametrisation. The Jacobian of the
//! hyperspherical reparametrisation depends only on the data, so it cancels
//! in every similarity and is never included.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::hypersphere::{to_spherical, SphericalAngles};
use crate::sample::SentenceSample;
use crate::special::{
    bessel_ratio, bessel_second_derivative_term, inv_bessel_ratio, log_vmf_normalizer,
};

/// Bounds applied to the mean resultant length before inverting `A_d`.
pub const R_BAR_MIN: f64 = 1e-7;
pub const R_BAR_MAX: f64 = 1.0 - 1e-7;

/// Curvature entries below this make the TIC penalty undefined.
pub const MIN_CURVATURE: f64 = 1e-12;

const UNIT_TOL: f64 = 1e-6;
const ANGLE_GUARD: f64 = 1e-6;

/// Maximum-likelihood vMF fit of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfFit {
    /// Mean direction.
    pub mu_hat: Vec<f64>,
    pub theta_hat: SphericalAngles,
    pub kappa_hat: f64,
    /// Mean resultant length after clamping.
    pub r_bar: f64,
    pub n: usize,
    /// `n kappa r_bar - n log Z(kappa)`.
    pub max_loglik: f64,
    pub log_normalizer: f64,
    /// Set when `r_bar` had to be clamped.
    pub degenerate: bool,
}

impl VmfFit {
    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }
}

fn check_unit(sample: &SentenceSample) -> Result<()> {
    if sample.is_unit_norm(UNIT_TOL) {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "vMF requires unit-norm vectors (load embeddings with normalization)".into(),
        ))
    }
}

/// Fits a vMF distribution to unit vectors.
///
/// `refine` switches on Newton refinement of the concentration; off, the
/// closed-form approximation `R(d - R^2)/(1 - R^2)` is used.
pub fn fit_vmf(sample: &SentenceSample, refine: bool) -> Result<VmfFit> {
    check_unit(sample)?;
    let d = sample.dim();
    let n = sample.n();
    let mut resultant = vec![0.0; d];
    for row in sample.rows() {
        resultant.iter_mut().zip(row).for_each(|(s, w)| *s += w);
    }
    let norm = resultant.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mu_hat: Vec<f64> = if norm > 0.0 {
        resultant.iter().map(|s| s / norm).collect()
    } else {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        e
    };
    let raw = norm / n as f64;
    let r_bar = raw.clamp(R_BAR_MIN, R_BAR_MAX);
    let degenerate = r_bar != raw;
    let kappa_hat = inv_bessel_ratio(d, r_bar, refine)?;
    let log_normalizer = log_vmf_normalizer(d, kappa_hat)?;
    let nf = n as f64;
    Ok(VmfFit {
        theta_hat: to_spherical(&mu_hat)?,
        mu_hat,
        kappa_hat,
        r_bar,
        n,
        max_loglik: nf * kappa_hat * r_bar - nf * log_normalizer,
        log_normalizer,
        degenerate,
    })
}

/// `sum_i [kappa mu^T w_i - log Z(kappa)]` at the fitted parameters.
pub fn vmf_loglik(fit: &VmfFit, sample: &SentenceSample) -> Result<f64> {
    if sample.dim() != fit.dim() {
        return Err(Error::DimensionMismatch {
            expected: fit.dim(),
            found: sample.dim(),
        });
    }
    check_unit(sample)?;
    let dot: f64 = sample
        .rows()
        .map(|w| w.iter().zip(&fit.mu_hat).map(|(a, b)| a * b).sum::<f64>())
        .sum();
    Ok(fit.kappa_hat * dot - sample.n() as f64 * fit.log_normalizer)
}

/// Moves `theta` at least `ANGLE_GUARD` away from the nearest multiple of
/// `pi/2`, staying inside `[0, pi]` for polar angles.
fn guard_angle(theta: f64) -> f64 {
    let m = (theta / FRAC_PI_2).round();
    let anchor = m * FRAC_PI_2;
    let diff = theta - anchor;
    if diff.abs() >= ANGLE_GUARD {
        return theta;
    }
    let step = if diff > 0.0 || (diff == 0.0 && m == 0.0) {
        ANGLE_GUARD
    } else {
        -ANGLE_GUARD
    };
    anchor + step
}

/// Diagonal pieces of the TIC penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfTicTerms {
    /// `(I_kk, J_kk)` for kappa.
    pub kappa: (f64, f64),
    /// `(I_kk, J_kk)` per angle.
    pub angles: Vec<(f64, f64)>,
}

impl VmfTicTerms {
    pub fn trace(&self) -> f64 {
        self.kappa.0 / self.kappa.1 + self.angles.iter().map(|(i, j)| i / j).sum::<f64>()
    }
}

/// Per-parameter gradient-variance and curvature entries, one `O(nd)` pass.
pub fn vmf_tic_terms(fit: &VmfFit, sample: &SentenceSample) -> Result<VmfTicTerms> {
    let d = fit.dim();
    if sample.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sample.dim(),
        });
    }
    let n = sample.n() as f64;
    let kappa = fit.kappa_hat;
    let mu = &fit.mu_hat;
    let a = bessel_ratio(d, kappa)?;
    let (cot, tan): (Vec<f64>, Vec<f64>) = fit
        .theta_hat
        .as_slice()
        .iter()
        .map(|&t| {
            let t = guard_angle(t);
            (t.tan().recip(), t.tan())
        })
        .unzip();

    let mut i_kappa = 0.0;
    let mut i_theta = vec![0.0; d - 1];
    let mut s_mean = vec![0.0; d - 1];
    let mut suffix = vec![0.0; d + 1];
    for w in sample.rows() {
        for j in (0..d).rev() {
            suffix[j] = suffix[j + 1] + w[j] * mu[j];
        }
        let g = suffix[0] - a;
        i_kappa += g * g;
        for k in 0..d - 1 {
            let g = kappa * (cot[k] * suffix[k + 1] - tan[k] * w[k] * mu[k]);
            i_theta[k] += g * g;
            s_mean[k] += suffix[k];
        }
    }

    let j_kappa = -bessel_second_derivative_term(d, kappa)?;
    check_curvature("kappa", j_kappa)?;
    let mut angles = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        let j = kappa * s_mean[k] / n;
        check_curvature(&format!("theta_{k}"), j)?;
        angles.push((i_theta[k] / n, j));
    }
    Ok(VmfTicTerms {
        kappa: (i_kappa / n, j_kappa),
        angles,
    })
}

fn check_curvature(param: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= MIN_CURVATURE {
        Ok(())
    } else {
        Err(Error::DegenerateCurvature {
            param: param.to_owned(),
            value,
        })
    }
}

/// `tr(I J^{-1})` with the curvature matrix taken as diagonal, which is
/// exact at the maximum-likelihood direction.
pub fn vmf_tic_penalty(fit: &VmfFit, sample: &SentenceSample) -> Result<f64> {
    Ok(vmf_tic_terms(fit, sample)?.trace())
}
