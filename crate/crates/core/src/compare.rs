//! Similarity scores from model comparison.
//!
//! A pair of groups is scored by contrasting one distribution fitted to
//! their union (`M1`) with one distribution per group (`M2`):
//!
//! `sim = alpha * (L_12 - L_1 - L_2 - Omega_12 + Omega_1 + Omega_2)`
//!
//! where `L` are maximised log-likelihoods and `Omega` the criterion penalty
//! (TIC trace, AIC parameter count, or `(k/2) log n` for BIC). The generic
//! path uses `alpha = 2`; the closed-form vMF and Gaussian scores use
//! `alpha = 1`. [`Breakdown::scale`] records which one produced a value.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{fit_gaussian, gaussian_tic_penalty, GaussianKind};
use crate::sample::SentenceSample;
use crate::special::log_multivariate_gamma;
use crate::synth;
use crate::vmf::{fit_vmf, vmf_tic_penalty};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Vmf,
    Diagonal,
    Spherical,
}

impl ModelKind {
    /// AIC parameter count at dimension `d`.
    pub fn param_count(self, d: usize) -> usize {
        match self {
            ModelKind::Vmf => d,
            ModelKind::Diagonal => GaussianKind::Diagonal.param_count(d),
            ModelKind::Spherical => GaussianKind::Spherical.param_count(d),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Vmf => "vmf",
            ModelKind::Diagonal => "diag",
            ModelKind::Spherical => "spherical",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vmf" => Ok(ModelKind::Vmf),
            "diag" | "diagonal" => Ok(ModelKind::Diagonal),
            "spherical" => Ok(ModelKind::Spherical),
            _ => Err(Error::InvalidInput(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Tic,
    Aic,
    Bic,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Tic => "tic",
            Criterion::Aic => "aic",
            Criterion::Bic => "bic",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tic" => Ok(Criterion::Tic),
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            _ => Err(Error::InvalidInput(format!("unknown criterion {s:?}"))),
        }
    }
}

/// Every scoring method, including the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    VmfTic,
    VmfAic,
    /// Experimental.
    VmfBic,
    DiagTic,
    DiagAic,
    DiagBic,
    /// Experimental.
    SphericalTic,
    SphericalAic,
    SphericalBic,
    BayesFactor,
    Mwv,
    Sif,
    SifPca,
}

impl Method {
    pub const ALL: [Method; 13] = [
        Method::VmfTic,
        Method::VmfAic,
        Method::VmfBic,
        Method::DiagTic,
        Method::DiagAic,
        Method::DiagBic,
        Method::SphericalTic,
        Method::SphericalAic,
        Method::SphericalBic,
        Method::BayesFactor,
        Method::Mwv,
        Method::Sif,
        Method::SifPca,
    ];

    pub fn from_parts(model: ModelKind, criterion: Criterion) -> Method {
        use {Criterion::*, ModelKind::*};
        match (model, criterion) {
            (Vmf, Tic) => Method::VmfTic,
            (Vmf, Aic) => Method::VmfAic,
            (Vmf, Bic) => Method::VmfBic,
            (Diagonal, Tic) => Method::DiagTic,
            (Diagonal, Aic) => Method::DiagAic,
            (Diagonal, Bic) => Method::DiagBic,
            (Spherical, Tic) => Method::SphericalTic,
            (Spherical, Aic) => Method::SphericalAic,
            (Spherical, Bic) => Method::SphericalBic,
        }
    }

    /// Model and criterion of an information-criterion method.
    pub fn parts(self) -> Option<(ModelKind, Criterion)> {
        use {Criterion::*, ModelKind::*};
        Some(match self {
            Method::VmfTic => (Vmf, Tic),
            Method::VmfAic => (Vmf, Aic),
            Method::VmfBic => (Vmf, Bic),
            Method::DiagTic => (Diagonal, Tic),
            Method::DiagAic => (Diagonal, Aic),
            Method::DiagBic => (Diagonal, Bic),
            Method::SphericalTic => (Spherical, Tic),
            Method::SphericalAic => (Spherical, Aic),
            Method::SphericalBic => (Spherical, Bic),
            _ => return None,
        })
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Method::Mwv | Method::Sif | Method::SifPca)
    }

    /// Whether the method expects unit-norm word vectors.
    pub fn needs_unit_norm(self) -> bool {
        matches!(self.parts(), Some((ModelKind::Vmf, _)))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::VmfTic => "vmf_tic",
            Method::VmfAic => "vmf_aic",
            Method::VmfBic => "vmf_bic",
            Method::DiagTic => "diag_tic",
            Method::DiagAic => "diag_aic",
            Method::DiagBic => "diag_bic",
            Method::SphericalTic => "spherical_tic",
            Method::SphericalAic => "spherical_aic",
            Method::SphericalBic => "spherical_bic",
            Method::BayesFactor => "bayes_factor",
            Method::Mwv => "mwv",
            Method::Sif => "sif",
            Method::SifPca => "sif_pca",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method {s:?}")))
    }
}

/// What to do when a TIC curvature entry vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TicFallback {
    #[default]
    Error,
    /// Use the AIC parameter count for the affected group and flag the score.
    Aic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoringOptions {
    /// Newton-refine the vMF concentration.
    pub refine_kappa: bool,
    pub tic_fallback: TicFallback,
}

/// Terms that make up an IC similarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakdown {
    pub loglik_joint: f64,
    pub loglik_1: f64,
    pub loglik_2: f64,
    pub penalty_joint: f64,
    pub penalty_1: f64,
    pub penalty_2: f64,
    /// Global factor: 2 for the generic composition, 1 for closed forms
    /// and log Bayes factors.
    pub scale: f64,
}

impl Breakdown {
    /// `scale * (L_12 - L_1 - L_2 - P_12 + P_1 + P_2)`.
    pub fn value(&self) -> f64 {
        self.scale
            * (self.loglik_joint - self.loglik_1 - self.loglik_2 - self.penalty_joint
                + self.penalty_1
                + self.penalty_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ScoreFlags {
    /// Some fit hit a variance floor or resultant clamp.
    pub degenerate: bool,
    /// Some TIC penalty was replaced by its AIC count.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityScore {
    pub value: f64,
    pub method: Method,
    /// Absent for baselines.
    pub breakdown: Option<Breakdown>,
    pub flags: ScoreFlags,
}

/// Log-likelihood and penalty of one group under one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupTerms {
    pub loglik: f64,
    pub penalty: f64,
    pub degenerate: bool,
    pub fallback: bool,
}

impl GroupTerms {
    /// `-2 (L - Omega)`; lower is better.
    pub fn ic(&self) -> f64 {
        -2.0 * (self.loglik - self.penalty)
    }
}

/// Fits `model` to one group and evaluates the criterion penalty.
pub fn group_terms(
    sample: &SentenceSample,
    model: ModelKind,
    criterion: Criterion,
    opts: &ScoringOptions,
) -> Result<GroupTerms> {
    let d = sample.dim();
    let k = model.param_count(d) as f64;
    let (loglik, tic, degenerate) = match model {
        ModelKind::Vmf => {
            let fit = fit_vmf(sample, opts.refine_kappa)?;
            let tic = match criterion {
                Criterion::Tic => Some(vmf_tic_penalty(&fit, sample)),
                _ => None,
            };
            (fit.max_loglik, tic, fit.degenerate)
        }
        ModelKind::Diagonal | ModelKind::Spherical => {
            let kind = if model == ModelKind::Diagonal {
                GaussianKind::Diagonal
            } else {
                GaussianKind::Spherical
            };
            let fit = fit_gaussian(sample, kind);
            let tic = (criterion == Criterion::Tic).then(|| Ok(gaussian_tic_penalty(&fit)));
            (fit.max_loglik, tic, fit.degenerate())
        }
    };
    let mut fallback = false;
    let penalty = match criterion {
        Criterion::Aic => k,
        Criterion::Bic => 0.5 * k * (sample.n() as f64).ln(),
        Criterion::Tic => match tic.expect("tic computed") {
            Ok(p) => p,
            Err(Error::DegenerateCurvature { .. }) if opts.tic_fallback == TicFallback::Aic => {
                fallback = true;
                k
            }
            Err(e) => return Err(e),
        },
    };
    Ok(GroupTerms {
        loglik,
        penalty,
        degenerate,
        fallback,
    })
}

fn check_same_dim(a: &SentenceSample, b: &SentenceSample) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        })
    }
}

fn compose(
    method: Method,
    joint: GroupTerms,
    g1: GroupTerms,
    g2: GroupTerms,
    scale: f64,
) -> SimilarityScore {
    let breakdown = Breakdown {
        loglik_joint: joint.loglik,
        loglik_1: g1.loglik,
        loglik_2: g2.loglik,
        penalty_joint: joint.penalty,
        penalty_1: g1.penalty,
        penalty_2: g2.penalty,
        scale,
    };
    SimilarityScore {
        value: breakdown.value(),
        method,
        breakdown: Some(breakdown),
        flags: ScoreFlags {
            degenerate: joint.degenerate || g1.degenerate || g2.degenerate,
            fallback: joint.fallback || g1.fallback || g2.fallback,
        },
    }
}

/// Generic information-criterion similarity with `alpha = 2`.
///
/// For BIC the penalty `(k/2) log n` makes this
/// `2 (L_12 - L_1 - L_2) - k log((n + m) / (n m))`.
pub fn similarity_ic(
    d1: &SentenceSample,
    d2: &SentenceSample,
    model: ModelKind,
    criterion: Criterion,
    opts: &ScoringOptions,
) -> Result<SimilarityScore> {
    check_same_dim(d1, d2)?;
    let joint = d1.concat(d2)?;
    let tj = group_terms(&joint, model, criterion, opts)?;
    let t1 = group_terms(d1, model, criterion, opts)?;
    let t2 = group_terms(d2, model, criterion, opts)?;
    Ok(compose(Method::from_parts(model, criterion), tj, t1, t2, 2.0))
}

/// BIC similarity for `model`.
pub fn similarity_bic(
    d1: &SentenceSample,
    d2: &SentenceSample,
    model: ModelKind,
    opts: &ScoringOptions,
) -> Result<SimilarityScore> {
    similarity_ic(d1, d2, model, Criterion::Bic, opts)
}

/// Closed-form vMF TIC similarity (`alpha = 1`):
///
/// `N k12 R12 - m k1 R1 - l k2 R2 - N log Z(k12) + m log Z(k1) + l log Z(k2)
///  - tr12 + tr1 + tr2`.
pub fn similarity_closed_vmf(
    d1: &SentenceSample,
    d2: &SentenceSample,
    opts: &ScoringOptions,
) -> Result<SimilarityScore> {
    check_same_dim(d1, d2)?;
    let joint = d1.concat(d2)?;
    let f12 = fit_vmf(&joint, opts.refine_kappa)?;
    let f1 = fit_vmf(d1, opts.refine_kappa)?;
    let f2 = fit_vmf(d2, opts.refine_kappa)?;
    let k = joint.dim() as f64;
    let trace = |fit, s| -> Result<(f64, bool)> {
        match vmf_tic_penalty(fit, s) {
            Ok(p) => Ok((p, false)),
            Err(Error::DegenerateCurvature { .. }) if opts.tic_fallback == TicFallback::Aic => {
                Ok((k, true))
            }
            Err(e) => Err(e),
        }
    };
    let (tr12, fb12) = trace(&f12, &joint)?;
    let (tr1, fb1) = trace(&f1, d1)?;
    let (tr2, fb2) = trace(&f2, d2)?;
    let (nn, m, l) = (joint.n() as f64, d1.n() as f64, d2.n() as f64);
    let value = nn * f12.kappa_hat * f12.r_bar - m * f1.kappa_hat * f1.r_bar
        - l * f2.kappa_hat * f2.r_bar
        - nn * f12.log_normalizer
        + m * f1.log_normalizer
        + l * f2.log_normalizer
        - tr12
        + tr1
        + tr2;
    Ok(SimilarityScore {
        value,
        method: Method::VmfTic,
        breakdown: Some(Breakdown {
            loglik_joint: f12.max_loglik,
            loglik_1: f1.max_loglik,
            loglik_2: f2.max_loglik,
            penalty_joint: tr12,
            penalty_1: tr1,
            penalty_2: tr2,
            scale: 1.0,
        }),
        flags: ScoreFlags {
            degenerate: f12.degenerate || f1.degenerate || f2.degenerate,
            fallback: fb12 || fb1 || fb2,
        },
    })
}

/// Closed-form diagonal-Gaussian TIC similarity (`alpha = 1`):
///
/// `sum_i [-N log s12_i + m log s1_i + l log s2_i]
///  + d/2 + (1/2) sum_i [-k12_i + k1_i + k2_i]`
///
/// with `s` standard deviations and `k` kurtoses.
pub fn similarity_closed_gaussian(d1: &SentenceSample, d2: &SentenceSample) -> Result<SimilarityScore> {
    check_same_dim(d1, d2)?;
    let joint = d1.concat(d2)?;
    let f12 = fit_gaussian(&joint, GaussianKind::Diagonal);
    let f1 = fit_gaussian(d1, GaussianKind::Diagonal);
    let f2 = fit_gaussian(d2, GaussianKind::Diagonal);
    let (nn, m, l) = (joint.n() as f64, d1.n() as f64, d2.n() as f64);
    let d = joint.dim();
    let mut value = 0.5 * d as f64;
    for i in 0..d {
        value += 0.5
            * (-nn * f12.var_hat[i].ln() + m * f1.var_hat[i].ln() + l * f2.var_hat[i].ln());
        value += 0.5 * (-f12.kurt_hat[i] + f1.kurt_hat[i] + f2.kurt_hat[i]);
    }
    Ok(SimilarityScore {
        value,
        method: Method::DiagTic,
        breakdown: Some(Breakdown {
            loglik_joint: f12.max_loglik,
            loglik_1: f1.max_loglik,
            loglik_2: f2.max_loglik,
            penalty_joint: gaussian_tic_penalty(&f12),
            penalty_1: gaussian_tic_penalty(&f1),
            penalty_2: gaussian_tic_penalty(&f2),
            scale: 1.0,
        }),
        flags: ScoreFlags {
            degenerate: f12.degenerate() || f1.degenerate() || f2.degenerate(),
            fallback: false,
        },
    })
}

/// Normal-Wishart prior over the mean and precision of a full-covariance
/// Gaussian.
///
/// The precision has a Wishart prior with `nu0` degrees of freedom and scale
/// `T0^{-1}`; given the precision `L`, the mean is `N(mu0, (kappa0 L)^{-1})`.
#[derive(Debug, Clone)]
pub struct NormalWishartPrior {
    mu0: DVector<f64>,
    kappa0: f64,
    nu0: f64,
    t0: DMatrix<f64>,
    log_det_t0: f64,
}

fn log_det_spd(m: DMatrix<f64>, what: &str) -> Result<f64> {
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Cholesky(format!("{what} is not positive definite")))?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}

impl NormalWishartPrior {
    pub fn new(mu0: Vec<f64>, kappa0: f64, nu0: f64, t0: DMatrix<f64>) -> Result<Self> {
        let d = mu0.len();
        if d == 0 || t0.nrows() != d || t0.ncols() != d {
            return Err(Error::InvalidInput(format!(
                "prior mean has length {d} but T0 is {}x{}",
                t0.nrows(),
                t0.ncols()
            )));
        }
        if !(kappa0 > 0.0 && kappa0.is_finite()) {
            return Err(Error::InvalidInput(format!("kappa0 = {kappa0} must be positive")));
        }
        if !(nu0 > d as f64 - 1.0 && nu0.is_finite()) {
            return Err(Error::InvalidInput(format!("nu0 = {nu0} must exceed d - 1 = {}", d - 1)));
        }
        if (&t0 - t0.transpose()).amax() > 1e-12 * (1.0 + t0.amax()) {
            return Err(Error::InvalidInput("T0 must be symmetric".into()));
        }
        let log_det_t0 = log_det_spd(t0.clone(), "T0")?;
        Ok(Self {
            mu0: DVector::from_vec(mu0),
            kappa0,
            nu0,
            t0,
            log_det_t0,
        })
    }

    /// `mu0 = 0`, `T0 = I`, with the given `kappa0` and `nu0`.
    pub fn isotropic(d: usize, kappa0: f64, nu0: f64) -> Result<Self> {
        Self::new(vec![0.0; d], kappa0, nu0, DMatrix::identity(d, d))
    }

    /// `mu0 = 0`, `kappa0 = 1`, `nu0 = d + 2`, `T0 = I`.
    pub fn default_for(d: usize) -> Result<Self> {
        Self::isotropic(d, 1.0, d as f64 + 2.0)
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    /// Log marginal likelihood `log p(D)`.
    pub fn log_evidence(&self, sample: &SentenceSample) -> Result<f64> {
        let d = self.dim();
        if sample.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: sample.dim(),
            });
        }
        let n = sample.n() as f64;
        let x = DMatrix::from_row_slice(sample.n(), d, sample.as_slice());
        let mean = x.row_mean().transpose();
        let mut centered = x;
        for mut row in centered.row_iter_mut() {
            row -= mean.transpose();
        }
        let scatter = centered.transpose() * &centered;
        let kappa_n = self.kappa0 + n;
        let nu_n = self.nu0 + n;
        let diff = &mean - &self.mu0;
        let t_n = &self.t0 + scatter + (n * self.kappa0 / kappa_n) * &diff * diff.transpose();
        let log_det_tn = log_det_spd(t_n, "posterior scale Tn")?;
        let df = d as f64;
        Ok(-0.5 * n * df * std::f64::consts::PI.ln()
            + 0.5 * df * (self.kappa0 / kappa_n).ln()
            + 0.5 * self.nu0 * self.log_det_t0
            - 0.5 * nu_n * log_det_tn
            + log_multivariate_gamma(d, 0.5 * nu_n)?
            - log_multivariate_gamma(d, 0.5 * self.nu0)?)
    }
}

/// `log p(D1 ++ D2) - log p(D1) - log p(D2)`.
pub fn bayes_factor_similarity(
    d1: &SentenceSample,
    d2: &SentenceSample,
    prior: &NormalWishartPrior,
) -> Result<SimilarityScore> {
    check_same_dim(d1, d2)?;
    let joint = d1.concat(d2)?;
    let lj = prior.log_evidence(&joint)?;
    let l1 = prior.log_evidence(d1)?;
    let l2 = prior.log_evidence(d2)?;
    let value = lj - l1 - l2;
    if !value.is_finite() {
        return Err(Error::Domain("non-finite Bayes factor".into()));
    }
    Ok(SimilarityScore {
        value,
        method: Method::BayesFactor,
        breakdown: Some(Breakdown {
            loglik_joint: lj,
            loglik_1: l1,
            loglik_2: l2,
            penalty_joint: 0.0,
            penalty_1: 0.0,
            penalty_2: 0.0,
            scale: 1.0,
        }),
        flags: ScoreFlags::default(),
    })
}

/// Mean information criterion of one candidate over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSelectionRow {
    pub model: ModelKind,
    pub criterion: Criterion,
    pub mean_ic: f64,
    pub sentences: usize,
    pub degenerate: usize,
    pub fallback: usize,
}

/// Mean `IC(D, M) = -2 (L(D) - Omega(D))` per candidate, lowest first.
pub fn corpus_model_selection(
    corpus: &[SentenceSample],
    candidates: &[(ModelKind, Criterion)],
    opts: &ScoringOptions,
) -> Result<Vec<ModelSelectionRow>> {
    if corpus.is_empty() {
        return Err(Error::Empty("model selection needs a non-empty corpus".into()));
    }
    let mut rows = Vec::with_capacity(candidates.len());
    for &(model, criterion) in candidates {
        let terms = corpus
            .par_iter()
            .map(|s| group_terms(s, model, criterion, opts))
            .collect::<Result<Vec<_>>>()?;
        let mean_ic = terms.iter().map(GroupTerms::ic).sum::<f64>() / terms.len() as f64;
        rows.push(ModelSelectionRow {
            model,
            criterion,
            mean_ic,
            sentences: terms.len(),
            degenerate: terms.iter().filter(|t| t.degenerate).count(),
            fallback: terms.iter().filter(|t| t.fallback).count(),
        });
    }
    rows.sort_by(|a, b| a.mean_ic.total_cmp(&b.mean_ic));
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyCurveRow {
    pub n: usize,
    pub mean_penalty: f64,
    pub std_penalty: f64,
}

/// TIC penalty statistics over `trials` synthetic samples per size.
///
/// Gaussian models draw from `N(0, I_d)`, the vMF from the uniform
/// distribution on the sphere. Each `(size, trial)` cell gets its own
/// ChaCha stream of `seed`, so results do not depend on thread scheduling.
/// The spread is the sample standard deviation (0 for a single trial).
pub fn penalty_curve(
    model: ModelKind,
    d: usize,
    sample_sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<PenaltyCurveRow>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    if let Some(&bad) = sample_sizes.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidInput(format!("sample size {bad} is below 2")));
    }
    let opts = ScoringOptions::default();
    sample_sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let penalties = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream((si * trials + t) as u64);
                    let sample = match model {
                        ModelKind::Vmf => synth::uniform_sphere(&mut rng, n, d)?,
                        _ => synth::standard_normal(&mut rng, n, d)?,
                    };
                    Ok(group_terms(&sample, model, Criterion::Tic, &opts)?.penalty)
                })
                .collect::<Result<Vec<f64>>>()?;
            let mean = penalties.iter().sum::<f64>() / trials as f64;
            let std = if trials > 1 {
                (penalties.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (trials - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            Ok(PenaltyCurveRow {
                n,
                mean_penalty: mean,
                std_penalty: std,
            })
        })
        .collect()
}

/// Writes rows as CSV with header `n,mean_penalty,std_penalty`.
pub fn write_penalty_csv<W: Write>(rows: &[PenaltyCurveRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,mean_penalty,std_penalty")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.n, r.mean_penalty, r.std_penalty)?;
    }
    Ok(())
}
