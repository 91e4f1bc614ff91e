//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: spherical coordinates,
//! normalisers, moments and penalties are all recomputed from scratch.
#![allow(dead_code)]

use std::f64::consts::PI;

use groupsim::SentenceSample;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit vectors scattered around a random direction: `normalize(mu + spread * z)`.
pub fn clustered_unit_sample(rng: &mut ChaCha8Rng, n: usize, d: usize, spread: f64) -> SentenceSample {
    let mu = unit(&(0..d).map(|_| normal(rng)).collect::<Vec<_>>());
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| unit(&mu.iter().map(|m| m + spread * normal(rng)).collect::<Vec<_>>()))
        .collect();
    SentenceSample::from_rows(&rows).unwrap()
}

/// Gaussian rows with per-dimension offsets and scales.
pub fn scaled_sample(rng: &mut ChaCha8Rng, n: usize, d: usize) -> SentenceSample {
    let loc: Vec<f64> = (0..d).map(|_| 3.0 * normal(rng)).collect();
    let scale: Vec<f64> = (0..d).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|k| loc[k] + scale[k] * normal(rng)).collect())
        .collect();
    SentenceSample::from_rows(&rows).unwrap()
}

pub fn rows(s: &SentenceSample) -> Vec<Vec<f64>> {
    s.rows().map(<[f64]>::to_vec).collect()
}

// ---------------------------------------------------------------- vMF

/// `log Z` for `d = 3` and `d = 5` from the half-order Bessel closed forms.
pub fn log_z_closed(d: usize, k: f64) -> f64 {
    let log_sinh = k + (-(-2.0 * k).exp()).ln_1p() - std::f64::consts::LN_2;
    match d {
        // Z = 4 pi sinh(k) / k
        3 => (4.0 * PI).ln() + log_sinh - k.ln(),
        // Z = (2 pi)^{5/2} I_{3/2}(k) / k^{3/2},
        // I_{3/2}(k) = sqrt(2 / (pi k)) (cosh k - sinh k / k)
        5 => {
            let bracket = (1.0 / k.tanh() - 1.0 / k).ln() + log_sinh;
            2.5 * (2.0 * PI).ln() + 0.5 * (2.0 / (PI * k)).ln() + bracket - 1.5 * k.ln()
        }
        _ => panic!("closed form only for d = 3, 5"),
    }
}

pub fn sph_to_cart(phi: &[f64]) -> Vec<f64> {
    let d = phi.len() + 1;
    let mut w = vec![0.0; d];
    for i in 0..d {
        let mut v = if i < d - 1 { phi[i].cos() } else { 1.0 };
        for p in &phi[..i.min(d - 1)] {
            v *= p.sin();
        }
        w[i] = v;
    }
    w
}

pub fn cart_to_sph(w: &[f64]) -> Vec<f64> {
    let d = w.len();
    let mut phi = Vec::with_capacity(d - 1);
    for k in 0..d - 2 {
        let tail = w[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        phi.push((w[k] / tail).clamp(-1.0, 1.0).acos());
    }
    let mut last = w[d - 1].atan2(w[d - 2]);
    if last < 0.0 {
        last += 2.0 * PI;
    }
    phi.push(last);
    phi
}

/// `(mu, R, kappa)` with the closed-form concentration approximation.
pub fn vmf_mle(s: &SentenceSample) -> (Vec<f64>, f64, f64) {
    let d = s.dim();
    let mut sum = vec![0.0; d];
    for r in s.rows() {
        for k in 0..d {
            sum[k] += r[k];
        }
    }
    let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = norm / s.n() as f64;
    let kappa = r * (d as f64 - r * r) / (1.0 - r * r);
    (unit(&sum), r, kappa)
}

/// Per-sample vMF log-likelihood at `p = (angles..., kappa)`.
pub fn vmf_point_loglik(p: &[f64], w: &[f64]) -> f64 {
    let d = w.len();
    let mu = sph_to_cart(&p[..d - 1]);
    let kappa = p[d - 1];
    kappa * dot(&mu, w) - log_z_closed(d, kappa)
}

pub fn vmf_params(s: &SentenceSample) -> Vec<f64> {
    let (mu, _, kappa) = vmf_mle(s);
    let mut p = cart_to_sph(&mu);
    p.push(kappa);
    p
}

fn bump(p: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += h;
    q
}

/// Central-difference gradient.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> DVector<f64> {
    DVector::from_iterator(
        p.len(),
        (0..p.len()).map(|i| (f(&bump(p, i, h)) - f(&bump(p, i, -h))) / (2.0 * h)),
    )
}

/// Central-difference Hessian.
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> DMatrix<f64> {
    let m = p.len();
    let f0 = f(p);
    let mut out = DMatrix::zeros(m, m);
    for a in 0..m {
        out[(a, a)] = (f(&bump(p, a, h)) - 2.0 * f0 + f(&bump(p, a, -h))) / (h * h);
        for b in 0..a {
            let pp = bump(&bump(p, a, h), b, h);
            let pm = bump(&bump(p, a, h), b, -h);
            let mp = bump(&bump(p, a, -h), b, h);
            let mm = bump(&bump(p, a, -h), b, -h);
            let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    out
}

/// `tr(I J^{-1})` from per-sample gradients and Hessians.
pub fn dense_trace(grads: &[DVector<f64>], hessians: &[DMatrix<f64>]) -> f64 {
    let m = grads[0].len();
    let n = grads.len() as f64;
    let mut i_mat = DMatrix::zeros(m, m);
    for g in grads {
        i_mat += g * g.transpose();
    }
    i_mat /= n;
    let mut j_mat = DMatrix::zeros(m, m);
    for h in hessians {
        j_mat -= h;
    }
    j_mat /= n;
    (i_mat * j_mat.try_inverse().expect("invertible J")).trace()
}

/// Dense finite-difference vMF TIC penalty with full `d x d` matrices.
pub fn fd_vmf_tic(s: &SentenceSample) -> f64 {
    let p = vmf_params(s);
    let mut grads = Vec::new();
    let mut hess = Vec::new();
    for w in s.rows() {
        let f = |q: &[f64]| vmf_point_loglik(q, w);
        grads.push(fd_gradient(&f, &p, 1e-5));
        hess.push(fd_hessian(&f, &p, 1e-4));
    }
    dense_trace(&grads, &hess)
}

/// Finite-difference Hessian of the full-sample log-likelihood at the fit.
pub fn fd_vmf_full_hessian(s: &SentenceSample) -> DMatrix<f64> {
    let p = vmf_params(s);
    let data = rows(s);
    let f = |q: &[f64]| data.iter().map(|w| vmf_point_loglik(q, w)).sum::<f64>();
    fd_hessian(&f, &p, 1e-4)
}

// ---------------------------------------------------------- Gaussian

/// Biased mean, variance and fourth central moment per dimension.
pub fn moments(s: &SentenceSample) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = s.dim();
    let n = s.n() as f64;
    let data = rows(s);
    let mean: Vec<f64> = (0..d).map(|k| data.iter().map(|r| r[k]).sum::<f64>() / n).collect();
    let m2: Vec<f64> = (0..d)
        .map(|k| data.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n)
        .collect();
    let m4: Vec<f64> = (0..d)
        .map(|k| data.iter().map(|r| (r[k] - mean[k]).powi(4)).sum::<f64>() / n)
        .collect();
    (mean, m2, m4)
}

fn log_normal_pdf(x: f64, m: f64, v: f64) -> f64 {
    -(x - m).powi(2) / (2.0 * v) - 0.5 * (2.0 * PI * v).ln()
}

/// Naive per-point diagonal log-likelihood at the biased MLE.
pub fn diag_loglik(s: &SentenceSample) -> f64 {
    let (mean, var, _) = moments(s);
    s.rows()
        .map(|r| (0..r.len()).map(|k| log_normal_pdf(r[k], mean[k], var[k])).sum::<f64>())
        .sum()
}

/// Naive per-point spherical log-likelihood at the MLE.
pub fn spherical_loglik(s: &SentenceSample) -> f64 {
    let (mean, var, _) = moments(s);
    let v = var.iter().sum::<f64>() / var.len() as f64;
    s.rows()
        .map(|r| (0..r.len()).map(|k| log_normal_pdf(r[k], mean[k], v)).sum::<f64>())
        .sum()
}

/// Exact dense TIC for the diagonal Gaussian in `(mu_k, lambda_k^2)`
/// coordinates, `lambda_k^2 = 1 / sigma_k^2`, parameters interleaved per
/// dimension.
pub fn dense_diag_tic(s: &SentenceSample) -> f64 {
    let d = s.dim();
    let (mean, var, _) = moments(s);
    let prec: Vec<f64> = var.iter().map(|v| 1.0 / v).collect();
    let mut grads = Vec::new();
    let mut hess = Vec::new();
    for x in s.rows() {
        let mut g = DVector::zeros(2 * d);
        let mut h = DMatrix::zeros(2 * d, 2 * d);
        for k in 0..d {
            let c = x[k] - mean[k];
            // log p = (1/2) log l - (l/2) c^2 - (1/2) log 2 pi
            g[2 * k] = prec[k] * c;
            g[2 * k + 1] = 0.5 / prec[k] - 0.5 * c * c;
            h[(2 * k, 2 * k)] = -prec[k];
            h[(2 * k + 1, 2 * k + 1)] = -0.5 / (prec[k] * prec[k]);
            h[(2 * k, 2 * k + 1)] = c;
            h[(2 * k + 1, 2 * k)] = c;
        }
        grads.push(g);
        hess.push(h);
    }
    dense_trace(&grads, &hess)
}

/// Exact dense TIC for the spherical Gaussian, parameters `(mu, l)` with a
/// shared precision `l`.
pub fn dense_spherical_tic(s: &SentenceSample) -> f64 {
    let d = s.dim();
    let (mean, var, _) = moments(s);
    let l = var.len() as f64 / var.iter().sum::<f64>();
    let mut grads = Vec::new();
    let mut hess = Vec::new();
    for x in s.rows() {
        let mut g = DVector::zeros(d + 1);
        let mut h = DMatrix::zeros(d + 1, d + 1);
        let mut r = 0.0;
        for k in 0..d {
            let c = x[k] - mean[k];
            r += c * c;
            g[k] = l * c;
            h[(k, k)] = -l;
            h[(k, d)] = c;
            h[(d, k)] = c;
        }
        g[d] = 0.5 * d as f64 / l - 0.5 * r;
        h[(d, d)] = -0.5 * d as f64 / (l * l);
        grads.push(g);
        hess.push(h);
    }
    dense_trace(&grads, &hess)
}

/// `-2 (L - Omega)` assembled from the naive pieces above.
pub fn ic_direct(s: &SentenceSample, model: &str, criterion: &str) -> f64 {
    let d = s.dim();
    let n = s.n() as f64;
    let (loglik, k) = match model {
        "diag" => (diag_loglik(s), 2 * d),
        "spherical" => (spherical_loglik(s), d + 1),
        "vmf" => {
            let (_, r, kappa) = vmf_mle(s);
            (n * kappa * r - n * log_z_closed(d, kappa), d)
        }
        _ => unreachable!(),
    };
    let k = k as f64;
    let omega = match (criterion, model) {
        ("aic", _) => k,
        ("bic", _) => 0.5 * k * n.ln(),
        ("tic", "diag") => dense_diag_tic(s),
        ("tic", "spherical") => dense_spherical_tic(s),
        ("tic", "vmf") => fd_vmf_tic(s),
        _ => unreachable!(),
    };
    -2.0 * (loglik - omega)
}

/// Similarity as `IC_1 + IC_2 - IC_12`.
pub fn similarity_direct(a: &SentenceSample, b: &SentenceSample, model: &str, criterion: &str) -> f64 {
    let joint = a.concat(b).unwrap();
    ic_direct(a, model, criterion) + ic_direct(b, model, criterion)
        - ic_direct(&joint, model, criterion)
}

// ------------------------------------------------------- Bayes factor

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn simpson_weights(m: usize) -> Vec<f64> {
    assert!(m % 2 == 1);
    (0..m)
        .map(|i| {
            if i == 0 || i == m - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .collect()
}

/// `log p(x)` for one-dimensional data under a Normal-Gamma prior
/// (`l ~ Gamma(nu0/2, rate t0/2)`, `mu | l ~ N(mu0, 1/(kappa0 l))`) by 2-D
/// Simpson quadrature over `log l` and `mu`.
pub fn quadrature_log_evidence_1d(xs: &[f64], mu0: f64, kappa0: f64, nu0: f64, t0: f64) -> f64 {
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let (nt, nm) = (2001, 401);
    let (t_lo, t_hi) = (-20.0, 12.0);
    let ht = (t_hi - t_lo) / (nt - 1) as f64;
    let wt = simpson_weights(nt);
    let wm = simpson_weights(nm);
    let shape = 0.5 * nu0;
    let rate = 0.5 * t0;
    let log_gamma_norm = shape * rate.ln() - ln_gamma(shape);
    let mut logs = Vec::with_capacity(nt * nm);
    for (i, wti) in wt.iter().enumerate() {
        let t = t_lo + i as f64 * ht;
        let l = t.exp();
        let centre = (kappa0 * mu0 + n * xbar) / (kappa0 + n);
        let sd = 1.0 / ((kappa0 + n) * l).sqrt();
        let (m_lo, m_hi) = (centre - 12.0 * sd, centre + 12.0 * sd);
        let hm = (m_hi - m_lo) / (nm - 1) as f64;
        // dl = l dt
        let log_prior_l = log_gamma_norm + (shape - 1.0) * l.ln() - rate * l + t;
        for (j, wmj) in wm.iter().enumerate() {
            let mu = m_lo + j as f64 * hm;
            let log_prior_mu =
                0.5 * (kappa0 * l / (2.0 * PI)).ln() - 0.5 * kappa0 * l * (mu - mu0).powi(2);
            let log_lik: f64 = xs
                .iter()
                .map(|x| 0.5 * (l / (2.0 * PI)).ln() - 0.5 * l * (x - mu).powi(2))
                .sum();
            let w = (wti * ht / 3.0) * (wmj * hm / 3.0);
            logs.push(w.ln() + log_prior_l + log_prior_mu + log_lik);
        }
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
