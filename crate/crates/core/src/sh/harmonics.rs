use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{channel_count, Direction, ModeIndex};
use crate::error::{AmbiError, Result};

/// Per-channel normalization convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Schmidt semi-normalized; `Y_00 = 1`.
    Sn3d,
    /// Full 3D normalization, `integral of Y^2 over the sphere = 4 pi`.
    N3d,
    /// Furse-Malham (maxN with an extra `1/sqrt(2)` on W). Order 3 at most.
    Fuma,
}

impl Normalization {
    pub fn name(&self) -> &'static str {
        match self {
            Normalization::Sn3d => "sn3d",
            Normalization::N3d => "n3d",
            Normalization::Fuma => "fuma",
        }
    }

    /// Gain that takes an SN3D channel of `mode` into this normalization.
    fn gain_from_sn3d(self, mode: ModeIndex) -> Result<f64> {
        match self {
            Normalization::Sn3d => Ok(1.0),
            Normalization::N3d => Ok(((2 * mode.n() + 1) as f64).sqrt()),
            Normalization::Fuma => fuma_from_sn3d(mode),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Normalization {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sn3d" => Ok(Normalization::Sn3d),
            "n3d" => Ok(Normalization::N3d),
            "fuma" | "maxn" => Ok(Normalization::Fuma),
            other => Err(AmbiError::UnsupportedConvention(format!(
                "unknown normalization '{other}'"
            ))),
        }
    }
}

// Reciprocal of the per-channel maximum of |Y_sn3d|, with W at 1/sqrt(2).
fn fuma_from_sn3d(mode: ModeIndex) -> Result<f64> {
    let g = match (mode.n(), mode.m().unsigned_abs()) {
        (0, 0) => std::f64::consts::FRAC_1_SQRT_2,
        (1, _) => 1.0,
        (2, 0) => 1.0,
        (2, _) => 2.0 / 3f64.sqrt(),
        (3, 0) => 1.0,
        (3, 1) => (45.0f64 / 32.0).sqrt(),
        (3, 2) => 3.0 / 5f64.sqrt(),
        (3, 3) => (8.0f64 / 5.0).sqrt(),
        _ => {
            return Err(AmbiError::UnsupportedConvention(format!(
                "FuMa normalization is limited to order 3, got mode {mode}"
            )))
        }
    };
    Ok(g)
}

/// Scalar `g` with `g * Y_from(dir) = Y_to(dir)` for every direction.
pub fn normalization_gain(mode: ModeIndex, from: Normalization, to: Normalization) -> Result<f64> {
    Ok(to.gain_from_sn3d(mode)? / from.gain_from_sn3d(mode)?)
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn zonal_legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// SN3D real spherical harmonics up to `order` at `dir`, ACN order.
pub fn sh_sn3d(dir: Direction, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; channel_count(order)];
    sh_sn3d_into(dir, order, &mut out);
    out
}

/// Writes SN3D harmonics into `out`, which must hold `(order+1)^2` values.
pub fn sh_sn3d_into(dir: Direction, order: usize, out: &mut [f64]) {
    assert_eq!(out.len(), channel_count(order));
    let legendre = schmidt_legendre(order, dir.elevation().sin(), dir.elevation().cos());
    let az = dir.azimuth();
    for n in 0..=order {
        let row = n * n + n;
        out[row] = legendre[tri(n, 0)];
        for m in 1..=n {
            let p = legendre[tri(n, m)];
            let (s, c) = (m as f64 * az).sin_cos();
            out[row + m] = p * c;
            out[row - m] = p * s;
        }
    }
}

/// Real harmonics at `dir` in the requested normalization.
pub fn sh_vector(dir: Direction, order: usize, norm: Normalization) -> Result<Vec<f64>> {
    if norm == Normalization::Fuma && order > 3 {
        return Err(AmbiError::UnsupportedConvention(format!(
            "FuMa normalization is limited to order 3, requested {order}"
        )));
    }
    let mut y = sh_sn3d(dir, order);
    if norm != Normalization::Sn3d {
        for (k, v) in y.iter_mut().enumerate() {
            *v *= norm.gain_from_sn3d(super::mode_from_acn(k))?;
        }
    }
    Ok(y)
}

#[inline]
fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Schmidt semi-normalized associated Legendre functions (no Condon–Shortley
/// phase) for `0 <= m <= n <= order`, packed by [`tri`]. `x = sin(el)`,
/// `s = cos(el) >= 0`.
fn schmidt_legendre(order: usize, x: f64, s: f64) -> Vec<f64> {
    let mut p = vec![0.0; tri(order, order) + 1];
    p[0] = 1.0;
    for m in 0..=order {
        if m >= 1 {
            let prev = p[tri(m - 1, m - 1)];
            p[tri(m, m)] = if m == 1 {
                s
            } else {
                let mf = m as f64;
                ((2.0 * mf - 1.0) / (2.0 * mf)).sqrt() * s * prev
            };
        }
        if m < order {
            p[tri(m + 1, m)] = ((2 * m + 1) as f64).sqrt() * x * p[tri(m, m)];
        }
        for n in (m + 2)..=order {
            let (nf, mf) = (n as f64, m as f64);
            let a = (2.0 * nf - 1.0) * x * p[tri(n - 1, m)];
            let b = ((nf - 1.0) * (nf - 1.0) - mf * mf).sqrt() * p[tri(n - 2, m)];
            p[tri(n, m)] = (a - b) / (nf * nf - mf * mf).sqrt();
        }
    }
    p
}
