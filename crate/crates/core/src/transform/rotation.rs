//! Rotation of the whole sound scene.
//!
//! Per-order rotation blocks are built recursively from the first-order block
//! (Ivanic & Ruedenberg), so any order is supported without closed forms.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::Result;
use crate::io::AmbisonicBuffer;

/// Intrinsic yaw (about z) then pitch (about y) then roll (about x), radians.
///
/// Positive yaw turns +x towards +y (to the left); all three follow the
/// right-hand rule about their axes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationSpec {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl RotationSpec {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        RotationSpec { yaw, pitch, roll }
    }

    pub fn from_degrees(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self::new(yaw.to_radians(), pitch.to_radians(), roll.to_radians())
    }

    pub fn is_identity(&self) -> bool {
        self.yaw == 0.0 && self.pitch == 0.0 && self.roll == 0.0
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)`, acting on column vectors.
    pub fn matrix(&self) -> Matrix3<f64> {
        let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), self.yaw);
        let ry = Rotation3::from_axis_angle(&Vector3::y_axis(), self.pitch);
        let rx = Rotation3::from_axis_angle(&Vector3::x_axis(), self.roll);
        (rz * ry * rx).into_inner()
    }

    /// Inverse rotation as an (arbitrary) yaw/pitch/roll triple.
    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        self.matrix().transpose()
    }
}

/// Block-diagonal rotation of real SH coefficients, one square block per order.
#[derive(Debug, Clone, PartialEq)]
pub struct ShRotation {
    blocks: Vec<Vec<f64>>,
}

impl ShRotation {
    /// Blocks `M_n` with `Y_n(R d) = M_n Y_n(d)` for `n = 0..=order`.
    pub fn new(rotation: &Matrix3<f64>, order: usize) -> Self {
        let mut blocks = vec![vec![1.0]];
        if order == 0 {
            return ShRotation { blocks };
        }
        // ACN first order is (y, z, x).
        let axis = [1usize, 2, 0];
        let mut first = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                first[i * 3 + j] = rotation[(axis[i], axis[j])];
            }
        }
        blocks.push(first);
        for l in 2..=order {
            let next = next_block(&blocks[1], &blocks[l - 1], l);
            blocks.push(next);
        }
        ShRotation { blocks }
    }

    pub fn order(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Row-major `(2n+1) x (2n+1)` block of order `n`.
    pub fn block(&self, n: usize) -> &[f64] {
        &self.blocks[n]
    }

    /// Rotates one coefficient vector in place-free fashion.
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; coeffs.len()];
        for (n, block) in self.blocks.iter().enumerate() {
            let size = 2 * n + 1;
            let base = n * n;
            if base >= coeffs.len() {
                break;
            }
            for i in 0..size {
                out[base + i] = (0..size).map(|j| block[i * size + j] * coeffs[base + j]).sum();
            }
        }
        out
    }
}

// Centered access: rows/cols indexed by m in -l..=l; zero outside.
#[inline]
fn centered(block: &[f64], l: usize, a: isize, b: isize) -> f64 {
    let li = l as isize;
    if a.abs() > li || b.abs() > li {
        return 0.0;
    }
    let size = 2 * l + 1;
    block[(a + li) as usize * size + (b + li) as usize]
}

fn next_block(first: &[f64], prev: &[f64], l: usize) -> Vec<f64> {
    let li = l as isize;
    let size = 2 * l + 1;
    let p = |i: isize, a: isize, b: isize| -> f64 {
        if b == li {
            centered(first, 1, i, 1) * centered(prev, l - 1, a, li - 1)
                - centered(first, 1, i, -1) * centered(prev, l - 1, a, -li + 1)
        } else if b == -li {
            centered(first, 1, i, 1) * centered(prev, l - 1, a, -li + 1)
                + centered(first, 1, i, -1) * centered(prev, l - 1, a, li - 1)
        } else {
            centered(first, 1, i, 0) * centered(prev, l - 1, a, b)
        }
    };
    let mut out = vec![0.0; size * size];
    let lf = l as f64;
    for m in -li..=li {
        for n in -li..=li {
            let d = if m == 0 { 1.0 } else { 0.0 };
            let am = m.abs() as f64;
            let nf = n as f64;
            let mf = m as f64;
            let denom = if n.abs() == li {
                2.0 * lf * (2.0 * lf - 1.0)
            } else {
                (lf + nf) * (lf - nf)
            };
            let u = ((lf + mf) * (lf - mf) / denom).sqrt();
            let v = 0.5 * ((1.0 + d) * (lf + am - 1.0) * (lf + am) / denom).sqrt() * (1.0 - 2.0 * d);
            let w = -0.5 * ((lf - am - 1.0) * (lf - am) / denom).max(0.0).sqrt() * (1.0 - d);

            let mut value = 0.0;
            if u != 0.0 {
                value += u * p(0, m, n);
            }
            if v != 0.0 {
                let vv = if m == 0 {
                    p(1, 1, n) + p(-1, -1, n)
                } else if m > 0 {
                    let d1: f64 = if m == 1 { 1.0 } else { 0.0 };
                    p(1, m - 1, n) * (1.0 + d1).sqrt() - p(-1, -m + 1, n) * (1.0 - d1)
                } else {
                    let d1: f64 = if m == -1 { 1.0 } else { 0.0 };
                    p(1, m + 1, n) * (1.0 - d1) + p(-1, -m - 1, n) * (1.0 + d1).sqrt()
                };
                value += v * vv;
            }
            if w != 0.0 {
                let ww = if m > 0 {
                    p(1, m + 1, n) + p(-1, -m - 1, n)
                } else {
                    p(1, m - 1, n) - p(-1, -m + 1, n)
                };
                value += w * ww;
            }
            out[(m + li) as usize * size + (n + li) as usize] = value;
        }
    }
    out
}

/// Rotates the scene so a source at `d` moves to `R d`. Lossless.
pub fn rotate(buffer: &AmbisonicBuffer, rot: &RotationSpec) -> Result<AmbisonicBuffer> {
    buffer.require_canonical()?;
    if rot.is_identity() {
        return Ok(buffer.clone());
    }
    rotate_matrix(buffer, &rot.matrix())
}

/// As [`rotate`] for an arbitrary proper rotation matrix.
pub fn rotate_matrix(buffer: &AmbisonicBuffer, rotation: &Matrix3<f64>) -> Result<AmbisonicBuffer> {
    buffer.require_canonical()?;
    let sh = ShRotation::new(rotation, buffer.order());
    let mut out = vec![vec![0.0; buffer.frames()]; buffer.channel_count()];
    for n in 0..=buffer.order() {
        let size = 2 * n + 1;
        let base = n * n;
        let block = sh.block(n);
        for i in 0..size {
            let row = &mut out[base + i];
            for j in 0..size {
                let g = block[i * size + j];
                if g == 0.0 {
                    continue;
                }
                for (o, x) in row.iter_mut().zip(buffer.channel(base + j)) {
                    *o += g * x;
                }
            }
        }
    }
    buffer.with_channels(out)
}
