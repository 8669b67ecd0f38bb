//! Direction-dependent processing: gain, warping and segment extraction.
//!
//! The scene is turned into an amplitude density on a quadrature grid,
//! modified there, and analysed back at the input order. The density of a
//! coefficient vector `c` (SN3D) is `sum_n (2n+1) sum_m c_nm Y_nm`, i.e. the
//! N3D-weighted expansion, which concentrates a plane wave around its
//! direction. With unit weights the round trip is the identity on any grid
//! that is exact to degree `2N`; weights beyond the input order alias and
//! are truncated.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{AmbiError, Result};
use crate::io::AmbisonicBuffer;
use crate::sh::{channel_count, quadrature_grid, sh_sn3d, Direction, QuadratureGrid};

/// Band-limit budget reserved for weight functions on top of `2N`.
pub const WEIGHT_BANDWIDTH: usize = 8;

/// Default processing grid for an order-`order` signal.
pub fn directional_grid(order: usize) -> QuadratureGrid {
    quadrature_grid(2 * order + WEIGHT_BANDWIDTH)
}

/// Circular cap around `center`: unity inside `inner`, raised-cosine taper
/// to zero at `outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialWindow {
    center: Direction,
    inner: f64,
    outer: f64,
}

impl SpatialWindow {
    pub fn new(center: Direction, inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 <= inner && inner <= outer && outer <= PI) {
            return Err(AmbiError::invalid(format!(
                "window radii must satisfy 0 <= inner ({inner}) <= outer ({outer}) <= pi"
            )));
        }
        Ok(SpatialWindow {
            center,
            inner,
            outer,
        })
    }

    pub fn center(&self) -> Direction {
        self.center
    }

    pub fn gain(&self, dir: Direction) -> f64 {
        let angle = self.center.angle_to(&dir);
        if angle <= self.inner {
            1.0
        } else if angle >= self.outer {
            0.0
        } else {
            let t = (angle - self.inner) / (self.outer - self.inner);
            0.5 * (1.0 + (PI * t).cos())
        }
    }
}

/// Per-order scale `(2n+1)` from SN3D coefficients to density weights.
fn density_scale(order: usize) -> Vec<f64> {
    (0..channel_count(order))
        .map(|k| {
            let n = (k as f64).sqrt().floor();
            2.0 * n + 1.0
        })
        .collect()
}

/// SH values (SN3D) at every grid direction, row per direction.
fn grid_basis(dirs: &[Direction], order: usize) -> Vec<Vec<f64>> {
    dirs.iter().map(|d| sh_sn3d(*d, order)).collect()
}

/// Applies `density -> density * weight -> coefficients` frame by frame.
/// `density_basis` holds the SH values where the density is sampled,
/// `target_basis` those where each sample is re-encoded.
fn reweight(
    buffer: &AmbisonicBuffer,
    density_basis: &[Vec<f64>],
    target_basis: &[Vec<f64>],
    grid: &QuadratureGrid,
    weights: &[f64],
) -> Result<AmbisonicBuffer> {
    let count = buffer.channel_count();
    let scale = density_scale(buffer.order());
    // Operator T (count x count): c' = T c.
    let mut op = vec![vec![0.0; count]; count];
    for ((synth, analysis), (qw, ww)) in density_basis
        .iter()
        .zip(target_basis)
        .zip(grid.weights().iter().zip(weights))
    {
        let f = qw * ww / (4.0 * PI);
        if f == 0.0 {
            continue;
        }
        for (i, row) in op.iter_mut().enumerate() {
            let a = f * analysis[i];
            for (j, o) in row.iter_mut().enumerate() {
                *o += a * synth[j] * scale[j];
            }
        }
    }
    apply_operator(buffer, &op)
}

fn apply_operator(buffer: &AmbisonicBuffer, op: &[Vec<f64>]) -> Result<AmbisonicBuffer> {
    let frames = buffer.frames();
    let out = op
        .iter()
        .map(|row| {
            let mut ch = vec![0.0; frames];
            for (g, src) in row.iter().zip(buffer.channels()) {
                if *g == 0.0 {
                    continue;
                }
                for (o, x) in ch.iter_mut().zip(src) {
                    *o += g * x;
                }
            }
            ch
        })
        .collect();
    buffer.with_channels(out)
}

fn check_grid(grid: &QuadratureGrid, order: usize) -> Result<()> {
    let needed = 2 * order + WEIGHT_BANDWIDTH;
    if grid.exactness_degree() < needed {
        return Err(AmbiError::invalid(format!(
            "grid exactness {} too coarse for order {order} (needs {needed})",
            grid.exactness_degree()
        )));
    }
    Ok(())
}

/// Multiplies the scene's directional density by `weights` (one per grid
/// direction of `grid`).
pub fn directional_gain(
    buffer: &AmbisonicBuffer,
    grid: &QuadratureGrid,
    weights: &[f64],
) -> Result<AmbisonicBuffer> {
    buffer.require_canonical()?;
    check_grid(grid, buffer.order())?;
    if weights.len() != grid.len() {
        return Err(AmbiError::invalid(format!(
            "{} weights for {} grid directions",
            weights.len(),
            grid.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
        return Err(AmbiError::invalid(format!("non-finite directional weight {w}")));
    }
    let basis = grid_basis(grid.directions(), buffer.order());
    reweight(buffer, &basis, &basis, grid, weights)
}

/// [`directional_gain`] with a weight function sampled on the default grid.
pub fn directional_gain_fn(
    buffer: &AmbisonicBuffer,
    weight: impl Fn(Direction) -> f64,
) -> Result<AmbisonicBuffer> {
    let grid = directional_grid(buffer.order());
    let weights: Vec<f64> = grid.directions().iter().map(|d| weight(*d)).collect();
    directional_gain(buffer, &grid, &weights)
}

const MONOTONE_PROBES: usize = 2048;

/// Moves content at elevation `el` to `warp(el)`; azimuths are kept.
/// Each grid sample of the scene density is re-encoded at its warped
/// direction. No amplitude or area compensation is applied.
pub fn directional_warp(
    buffer: &AmbisonicBuffer,
    warp: impl Fn(f64) -> f64,
) -> Result<AmbisonicBuffer> {
    buffer.require_canonical()?;
    let probes: Vec<f64> = (0..=MONOTONE_PROBES)
        .map(|i| warp(-FRAC_PI_2 + PI * i as f64 / MONOTONE_PROBES as f64))
        .collect();
    if probes.iter().any(|v| !v.is_finite()) {
        return Err(AmbiError::invalid("warp map is not finite on [-pi/2, pi/2]"));
    }
    let increasing = probes.windows(2).all(|w| w[1] > w[0]);
    let decreasing = probes.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Err(AmbiError::invalid("warp map is not strictly monotone"));
    }
    if probes.iter().any(|v| v.abs() > FRAC_PI_2 + 1e-9) {
        return Err(AmbiError::invalid("warp map leaves [-pi/2, pi/2]"));
    }

    let order = buffer.order();
    let grid = directional_grid(order);
    let targets: Vec<Direction> = grid
        .directions()
        .iter()
        .map(|d| Direction::new(d.azimuth(), warp(d.elevation())))
        .collect();
    let density = grid_basis(grid.directions(), order);
    let target = grid_basis(&targets, order);
    reweight(buffer, &density, &target, &grid, &vec![1.0; grid.len()])
}

/// Splits the scene into the part inside `window` and the rest.
/// `mix(segment, residual)` reproduces the input.
pub fn extract_segment(
    buffer: &AmbisonicBuffer,
    window: &SpatialWindow,
) -> Result<(AmbisonicBuffer, AmbisonicBuffer)> {
    let segment = directional_gain_fn(buffer, |d| window.gain(d))?;
    let residual: Vec<Vec<f64>> = buffer
        .channels()
        .iter()
        .zip(segment.channels())
        .map(|(a, s)| a.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect();
    let residual = buffer.with_channels(residual)?;
    Ok((segment, residual))
}
