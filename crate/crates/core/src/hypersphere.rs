//! Polar hyperspherical coordinates on the unit sphere in `R^d`.
//!
//! `w_i = cos(phi_i) * prod_{k<i} sin(phi_k)` for `i < d` and
//! `w_d = prod_{k<d} sin(phi_k)`. The first `d - 2` angles live in `[0, pi]`,
//! the last one in `[0, 2 pi)`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Angles of a point on the unit sphere in `R^d` (`d - 1` of them).
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalAngles {
    angles: Vec<f64>,
}

impl SphericalAngles {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        let Some((last, polar)) = angles.split_last() else {
            return Err(Error::InvalidInput("need at least one angle".into()));
        };
        if let Some(bad) = polar.iter().position(|a| !(0.0..=PI).contains(a)) {
            return Err(Error::InvalidInput(format!(
                "polar angle {} = {} outside [0, pi]",
                bad, polar[bad]
            )));
        }
        if !(0.0..TAU).contains(last) {
            return Err(Error::InvalidInput(format!(
                "azimuth {last} outside [0, 2pi)"
            )));
        }
        Ok(Self { angles })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.angles.len() + 1
    }
}

/// Maps angles to the Cartesian unit vector.
pub fn from_spherical(angles: &SphericalAngles) -> Vec<f64> {
    let phi = angles.as_slice();
    let d = phi.len() + 1;
    let mut w = Vec::with_capacity(d);
    let mut sin_prod = 1.0;
    for &p in phi {
        let (s, c) = p.sin_cos();
        w.push(c * sin_prod);
        sin_prod *= s;
    }
    w.push(sin_prod);
    w
}

/// Inverse of [`from_spherical`].
///
/// When a trailing block of components is exactly zero the remaining angles
/// are set to 0.
pub fn to_spherical(w: &[f64]) -> Result<SphericalAngles> {
    let d = w.len();
    if d < 2 {
        return Err(Error::InvalidInput("need dimension >= 2".into()));
    }
    let norm_sq: f64 = w.iter().map(|x| x * x).sum();
    if (norm_sq.sqrt() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "vector norm {} is not 1",
            norm_sq.sqrt()
        )));
    }
    // tail[k] = sum_{j >= k} w_j^2
    let mut tail = vec![0.0; d + 1];
    for k in (0..d).rev() {
        tail[k] = tail[k + 1] + w[k] * w[k];
    }
    let mut angles = Vec::with_capacity(d - 1);
    for k in 0..d - 2 {
        if tail[k] == 0.0 {
            angles.push(0.0);
        } else {
            angles.push(tail[k + 1].sqrt().atan2(w[k]));
        }
    }
    let mut az = if tail[d - 2] == 0.0 {
        0.0
    } else {
        w[d - 1].atan2(w[d - 2])
    };
    if az < 0.0 {
        az += TAU;
    }
    if az >= TAU {
        az = 0.0;
    }
    angles.push(az);
    SphericalAngles::new(angles)
}

/// `log |dw/dphi| = sum_{k=1}^{d-2} (d - k - 1) log sin(phi_k)`.
///
/// Returns `-inf` when a polar angle sits on a pole.
pub fn log_jacobian(angles: &SphericalAngles) -> f64 {
    let d = angles.dim();
    angles.as_slice()[..d - 2]
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let s = p.sin();
            if s <= 0.0 {
                f64::NEG_INFINITY
            } else {
                (d - i - 2) as f64 * s.ln()
            }
        })
        .sum()
}
