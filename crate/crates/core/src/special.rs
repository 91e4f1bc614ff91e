//! Modified Bessel function ratios and log-normalisers.
//!
//! Everything here works in ratio or log space. At `d = 300` the order
//! `d/2 - 1 = 149` makes raw `I_nu(kappa)` under- or overflow for most
//! practical concentrations, so no routine ever materialises an unscaled
//! Bessel value.
//!
//! * ratios `I_{nu+1}/I_nu` come from Perron's continued fraction (evaluated
//!   with the modified Lentz method), switching to the large-argument
//!   expansion when `kappa` is so large that the fraction loses precision;
//! * `log I_nu` uses the power series for small arguments, Hankel's
//!   large-argument expansion for small orders and Debye's uniform expansion
//!   for large orders.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Smallest supported embedding dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported embedding dimension.
pub const MAX_DIM: usize = 2048;
/// Largest supported concentration.
pub const MAX_KAPPA: f64 = 1e12;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const CF_MAX_ITER: usize = 20_000;
const SERIES_MAX_ARG: f64 = 25.0;
const DEBYE_MIN_ORDER: f64 = 50.0;
const HANKEL_MIN_ARG: f64 = 1e6;

fn check_dim(d: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "dimension {d} outside [{MIN_DIM}, {MAX_DIM}]"
        )))
    }
}

fn check_kappa(kappa: f64, allow_zero: bool) -> Result<()> {
    let lower_ok = if allow_zero { kappa >= 0.0 } else { kappa > 0.0 };
    if kappa.is_finite() && lower_ok && kappa <= MAX_KAPPA {
        Ok(())
    } else {
        Err(Error::Domain(format!("kappa = {kappa} outside supported range")))
    }
}

/// `I_{nu+1}(x) / I_nu(x)` for `nu >= 0`, `x > 0`.
pub(crate) fn bessel_i_ratio(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= 0.0 && x > 0.0);
    if x >= HANKEL_MIN_ARG && x >= 50.0 * (nu + 2.0) * (nu + 2.0) {
        hankel_sum(nu + 1.0, x) / hankel_sum(nu, x)
    } else {
        perron_ratio(nu, x)
    }
}

// I_{m}/I_{m-1} = x / (2m + x - (2m+1)x / (2m+1+2x - (2m+3)x / (2m+2+2x - ...)))
fn perron_ratio(nu: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let m = nu + 1.0;
    let mut f = 2.0 * m + x;
    let mut c = f;
    let mut dd = 0.0;
    for k in 1..CF_MAX_ITER {
        let k = k as f64;
        let a = -(2.0 * m + 2.0 * k - 1.0) * x;
        let b = 2.0 * m + k + 2.0 * x;
        dd = b + a * dd;
        if dd == 0.0 {
            dd = TINY;
        }
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        dd = dd.recip();
        let delta = c * dd;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    x / f
}

// sum_k (-1)^k a_k(nu) / x^k from I_nu(x) ~ e^x / sqrt(2 pi x) * sum
fn hankel_sum(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            // asymptotic series started diverging
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn log_i_series(nu: f64, x: f64) -> f64 {
    const RESCALE: f64 = 1e280;
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut offset = 0.0;
    let mut k = 0.0;
    loop {
        term *= q / ((k + 1.0) * (nu + k + 1.0));
        k += 1.0;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            offset += RESCALE.ln();
        }
    }
    nu * (0.5 * x).ln() - ln_gamma(nu + 1.0) + sum.ln() + offset
}

fn log_i_hankel(nu: f64, x: f64) -> f64 {
    x - 0.5 * (LN_2PI + x.ln()) + hankel_sum(nu, x).ln()
}

fn log_i_debye(nu: f64, x: f64) -> f64 {
    let z = x / nu;
    let root = z.hypot(1.0);
    let t = root.recip();
    let eta = root + (z / (1.0 + root)).ln();
    let t2 = t * t;
    let u1 = t * (3.0 - 5.0 * t2) / 24.0;
    let u2 = t2 * (81.0 - 462.0 * t2 + 385.0 * t2 * t2) / 1152.0;
    let u3 = t * t2
        * (30375.0 - 369_603.0 * t2 + 765_765.0 * t2 * t2 - 425_425.0 * t2 * t2 * t2)
        / 414_720.0;
    let t4 = t2 * t2;
    let u4 = t4
        * (4_465_125.0 - 94_121_676.0 * t2 + 349_922_430.0 * t4
            - 446_185_740.0 * t4 * t2
            + 185_910_725.0 * t4 * t4)
        / 39_813_120.0;
    let inv = nu.recip();
    let corr = 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * u4)));
    nu * eta - 0.5 * (LN_2PI + nu.ln()) - 0.25 * (z * z).ln_1p() + corr.ln()
}

/// Natural log of `I_nu(x)` for `nu >= 0`, `x > 0`.
pub fn log_bessel_i(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= 0.0 && x > 0.0);
    if x <= SERIES_MAX_ARG {
        log_i_series(nu, x)
    } else if nu >= DEBYE_MIN_ORDER {
        log_i_debye(nu, x)
    } else if x >= 4.0 * nu * nu + SERIES_MAX_ARG {
        log_i_hankel(nu, x)
    } else {
        log_i_series(nu, x)
    }
}

/// Mean resultant length of a vMF as a function of its concentration,
/// `A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa)`.
pub fn bessel_ratio(d: usize, kappa: f64) -> Result<f64> {
    check_dim(d)?;
    check_kappa(kappa, true)?;
    if kappa == 0.0 {
        return Ok(0.0);
    }
    Ok(bessel_i_ratio(d as f64 / 2.0 - 1.0, kappa))
}

/// `dA_d/dkappa = 1 - A^2 - (d-1) A / kappa`.
fn bessel_ratio_slope(d: usize, kappa: f64, a: f64) -> f64 {
    1.0 - a * a - (d as f64 - 1.0) * a / kappa
}

/// Concentration estimate from the mean resultant length.
///
/// Returns the closed-form approximation `R(d - R^2) / (1 - R^2)`; with
/// `refine` set, Newton steps on `A_d(kappa) = R` follow until the residual
/// drops below `1e-8` (at most 20 iterations).
pub fn inv_bessel_ratio(d: usize, r_bar: f64, refine: bool) -> Result<f64> {
    check_dim(d)?;
    if !(r_bar > 0.0 && r_bar < 1.0) {
        return Err(Error::Domain(format!("mean resultant {r_bar} outside (0, 1)")));
    }
    let df = d as f64;
    let r2 = r_bar * r_bar;
    let mut kappa = r_bar * (df - r2) / (1.0 - r2);
    if !refine {
        return Ok(kappa);
    }
    for _ in 0..20 {
        let a = bessel_i_ratio(df / 2.0 - 1.0, kappa);
        let resid = a - r_bar;
        if resid.abs() < 1e-8 {
            break;
        }
        let slope = bessel_ratio_slope(d, kappa, a);
        if slope.is_nan() || slope <= 0.0 {
            break;
        }
        let next = kappa - resid / slope;
        kappa = if next > 0.0 { next } else { 0.5 * kappa };
    }
    Ok(kappa)
}

/// `log Z(kappa) = (d/2) log 2pi + log I_{d/2-1}(kappa) - (d/2 - 1) log kappa`.
pub fn log_vmf_normalizer(d: usize, kappa: f64) -> Result<f64> {
    check_dim(d)?;
    check_kappa(kappa, false)?;
    let nu = d as f64 / 2.0 - 1.0;
    Ok(0.5 * d as f64 * LN_2PI + log_bessel_i(nu, kappa) - nu * kappa.ln())
}

/// `log Gamma_d(a)`, defined for `a > (d - 1)/2`.
pub fn log_multivariate_gamma(d: usize, a: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("multivariate gamma needs d >= 1".into()));
    }
    let df = d as f64;
    if !(a.is_finite() && a > 0.5 * (df - 1.0)) {
        return Err(Error::Domain(format!(
            "log_multivariate_gamma({d}, {a}): a must exceed {}",
            0.5 * (df - 1.0)
        )));
    }
    let head = 0.25 * df * (df - 1.0) * std::f64::consts::PI.ln();
    Ok(head + (1..=d).map(|j| ln_gamma(a + 0.5 * (1.0 - j as f64))).sum::<f64>())
}

/// Consecutive Bessel ratios around `nu = d/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselRatioTable {
    pub order: f64,
    pub kappa: f64,
    /// `[I_nu/I_{nu-1}, I_{nu+1}/I_nu, I_{nu+2}/I_{nu+1}]`
    pub ratios: [f64; 3],
    pub log_i: f64,
}

impl BesselRatioTable {
    pub fn new(d: usize, kappa: f64) -> Result<Self> {
        check_dim(d)?;
        check_kappa(kappa, false)?;
        let nu = d as f64 / 2.0 - 1.0;
        let r1 = bessel_i_ratio(nu, kappa);
        // I_{nu-1} = I_{nu+1} + (2 nu / kappa) I_nu
        let r0 = (r1 + 2.0 * nu / kappa).recip();
        let r2 = bessel_i_ratio(nu + 1.0, kappa);
        Ok(Self {
            order: nu,
            kappa,
            ratios: [r0, r1, r2],
            log_i: log_bessel_i(nu, kappa),
        })
    }
}

/// Second derivative of the per-sample vMF log-likelihood in `kappa`,
///
/// `[I_{v+1}(I_{v-1} + I_{v+1}) - I_v(I_v + I_{v+2})] / (2 I_v^2)`,
///
/// with every Bessel value divided through by `I_v` so only ratios appear.
/// Equals `-A_d'(kappa)` and is negative.
pub fn bessel_second_derivative_term(d: usize, kappa: f64) -> Result<f64> {
    let table = BesselRatioTable::new(d, kappa)?;
    let [r0, r1, r2] = table.ratios;
    let value = 0.5 * (r1 * (r0.recip() + r1) - (1.0 + r1 * r2));
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!(
            "non-finite Bessel curvature at d = {d}, kappa = {kappa}"
        )))
    }
}
