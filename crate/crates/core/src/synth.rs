//! Synthetic samples for experiments and tests.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sample::SentenceSample;

/// `n` draws from `N(0, I_d)`.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<SentenceSample> {
    let data = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    SentenceSample::new(d, data)
}

/// `n` draws from `N(0, diag(variances))`.
pub fn diagonal_normal<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    variances: &[f64],
) -> Result<SentenceSample> {
    let sd: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let mut data = Vec::with_capacity(n * sd.len());
    for _ in 0..n {
        data.extend(sd.iter().map(|s| s * rng.sample::<f64, _>(StandardNormal)));
    }
    SentenceSample::new(sd.len(), data)
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `n` points uniform on the unit sphere in `R^d`.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<SentenceSample> {
    let data = (0..n).flat_map(|_| unit_vector(rng, d)).collect();
    SentenceSample::new(d, data)
}

/// `n` draws from a vMF with mean direction `mu` and concentration `kappa`,
/// by Wood's rejection sampler.
pub fn von_mises_fisher<R: Rng + ?Sized>(
    rng: &mut R,
    mu: &[f64],
    kappa: f64,
    n: usize,
) -> Result<SentenceSample> {
    let d = mu.len();
    if d < 2 || kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::InvalidInput("vMF sampler needs d >= 2 and kappa > 0".into()));
    }
    let norm = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mu: Vec<f64> = mu.iter().map(|x| x / norm).collect();
    let dm1 = (d - 1) as f64;
    let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + dm1 * (1.0 - x0 * x0).ln();
    let beta = Beta::new(dm1 / 2.0, dm1 / 2.0)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;

    // Householder reflection taking e_1 to mu.
    let mut h = mu.clone();
    h[0] -= 1.0;
    let h_sq: f64 = h.iter().map(|x| x * x).sum();

    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let w = loop {
            let z: f64 = beta.sample(rng);
            let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            let u: f64 = rng.random();
            if kappa * w + dm1 * (1.0 - x0 * w).ln() - c >= u.ln() {
                break w;
            }
        };
        let v = unit_vector(rng, d - 1);
        let s = (1.0 - w * w).max(0.0).sqrt();
        let mut x = Vec::with_capacity(d);
        x.push(w);
        x.extend(v.iter().map(|vi| s * vi));
        if h_sq > 1e-30 {
            let proj = 2.0 * x.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() / h_sq;
            x.iter_mut().zip(&h).for_each(|(xi, hi)| *xi -= proj * hi);
        }
        data.extend(x);
    }
    SentenceSample::new(d, data)
}
