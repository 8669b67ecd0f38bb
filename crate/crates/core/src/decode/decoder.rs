//! Decoder matrix design and application.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{AmbiError, Result};
use crate::io::{AmbisonicBuffer, AudioData};
use crate::sh::{
    channel_count, mode_from_acn, quadrature_grid, sh_sn3d, zonal_legendre, Direction, ModeIndex,
};
use crate::transform::horizontal_indices;

use super::layout::{Geometry, SpeakerLayout};
use super::vbap::Vbap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderMethod {
    Projection,
    ModeMatching,
    AllRad,
}

impl fmt::Display for DecoderMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderMethod::Projection => "projection",
            DecoderMethod::ModeMatching => "mode-matching",
            DecoderMethod::AllRad => "allrad",
        })
    }
}

impl FromStr for DecoderMethod {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "projection" | "sampling" => Ok(DecoderMethod::Projection),
            "modematch" | "mode-matching" | "modematching" | "mm" => Ok(DecoderMethod::ModeMatching),
            "allrad" => Ok(DecoderMethod::AllRad),
            other => Err(AmbiError::invalid(format!("unknown decoder method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    None,
    MaxRe,
}

impl FromStr for Weighting {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "basic" => Ok(Weighting::None),
            "maxre" | "max-re" => Ok(Weighting::MaxRe),
            other => Err(AmbiError::invalid(format!("unknown weighting '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderOptions {
    /// Relative singular-value cutoff for mode-matching.
    pub svd_cutoff: f64,
    /// Accept a truncated pseudo-inverse instead of failing.
    pub allow_truncation: bool,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        DecoderOptions {
            svd_cutoff: 1e-4,
            allow_truncation: false,
        }
    }
}

/// Speakers x channels gain matrix for SN3D input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoderMatrix {
    matrix: Vec<Vec<f64>>,
    order: usize,
    method: DecoderMethod,
    weights: Vec<f64>,
    horizontal: bool,
}

/// Per-order gains maximizing the energy vector.
pub fn max_re_weights(order: usize) -> Vec<f64> {
    let x = (137.9f64.to_radians() / (order as f64 + 1.51)).cos();
    (0..=order).map(|n| zonal_legendre(n, x)).collect()
}

impl DecoderMatrix {
    /// Wraps a precomputed matrix.
    pub fn from_matrix(
        matrix: Vec<Vec<f64>>,
        order: usize,
        method: DecoderMethod,
        horizontal: bool,
    ) -> Result<Self> {
        let columns = if horizontal { 2 * order + 1 } else { channel_count(order) };
        if matrix.is_empty() || matrix.iter().any(|r| r.len() != columns) {
            return Err(AmbiError::invalid(format!(
                "decoder matrix must have {columns} columns per speaker"
            )));
        }
        Ok(DecoderMatrix {
            matrix,
            order,
            method,
            weights: vec![1.0; order + 1],
            horizontal,
        })
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn method(&self) -> DecoderMethod {
        self.method
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_horizontal(&self) -> bool {
        self.horizontal
    }

    pub fn speaker_count(&self) -> usize {
        self.matrix.len()
    }

    pub fn column_count(&self) -> usize {
        self.matrix[0].len()
    }

    /// ACN index of every matrix column.
    pub fn column_channels(&self) -> Vec<usize> {
        if self.horizontal {
            horizontal_indices(self.order)
        } else {
            (0..channel_count(self.order)).collect()
        }
    }

    /// Speaker gains for a single SN3D coefficient frame of at least the
    /// decoder order.
    pub fn decode_frame(&self, coeffs: &[f64]) -> Vec<f64> {
        let cols = self.column_channels();
        self.matrix
            .iter()
            .map(|row| row.iter().zip(&cols).map(|(d, k)| d * coeffs[*k]).sum())
            .collect()
    }

    /// Speaker gains for a unit plane wave from `dir`.
    pub fn gains(&self, dir: Direction) -> Vec<f64> {
        self.decode_frame(&sh_sn3d(dir, self.order))
    }
}

fn degree(k: usize) -> usize {
    mode_from_acn(k).n()
}

/// Horizontal SN3D value of mode `(n, n)` at the front.
fn sectoral_scale(n: usize) -> f64 {
    sh_sn3d(Direction::new(0.0, 0.0), n)[ModeIndex::new(n, n as isize).expect("valid").acn()]
}

/// Matrix of basis values, rows = columns of the decoder, cols = directions.
fn basis(dirs: &[Direction], order: usize, channels: &[usize]) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(channels.len(), dirs.len());
    for (l, d) in dirs.iter().enumerate() {
        let v = sh_sn3d(*d, order);
        for (r, k) in channels.iter().enumerate() {
            y[(r, l)] = v[*k];
        }
    }
    y
}

/// Scale turning SN3D rows into orthonormal-on-average rows.
fn row_scale(k: usize, horizontal: bool) -> f64 {
    let n = degree(k);
    if horizontal {
        let two: f64 = if n == 0 { 1.0 } else { 2.0 };
        two.sqrt() / sectoral_scale(n)
    } else {
        (2.0 * n as f64 + 1.0).sqrt()
    }
}

fn projection(dirs: &[Direction], order: usize, channels: &[usize], horizontal: bool) -> DMatrix<f64> {
    let y = basis(dirs, order, channels);
    let count = dirs.len() as f64;
    let mut d = y.transpose();
    for (c, k) in channels.iter().enumerate() {
        let s = row_scale(*k, horizontal);
        d.column_mut(c).scale_mut(s * s / count);
    }
    d
}

fn mode_matching(
    dirs: &[Direction],
    order: usize,
    channels: &[usize],
    horizontal: bool,
    options: &DecoderOptions,
) -> Result<DMatrix<f64>> {
    let mut y = basis(dirs, order, channels);
    let scales: Vec<f64> = channels.iter().map(|k| row_scale(*k, horizontal)).collect();
    for (r, s) in scales.iter().enumerate() {
        y.row_mut(r).scale_mut(*s);
    }
    let rows = y.nrows();
    let svd = y.svd(true, true);
    let sigma = &svd.singular_values;
    let smax = sigma.max();
    let smin = sigma.min();
    let condition = if dirs.len() < rows || smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    };
    let keep = sigma.iter().filter(|s| **s >= options.svd_cutoff * smax).count();
    if keep < rows {
        if !options.allow_truncation {
            return Err(AmbiError::IllConditioned {
                condition,
                message: format!(
                    "layout of {} speakers cannot carry {rows} channels",
                    dirs.len()
                ),
            });
        }
        log::warn!(
            "mode-matching pseudo-inverse truncated to rank {keep} of {rows} (condition {condition:.3e})"
        );
    }
    let u = svd.u.as_ref().expect("u computed");
    let v_t = svd.v_t.as_ref().expect("v_t computed");
    let mut pinv = DMatrix::zeros(dirs.len(), rows);
    for (i, s) in sigma.iter().enumerate() {
        if *s < options.svd_cutoff * smax || *s == 0.0 {
            continue;
        }
        pinv += v_t.row(i).transpose() * u.column(i).transpose() / *s;
    }
    for (c, s) in scales.iter().enumerate() {
        pinv.column_mut(c).scale_mut(*s);
    }
    Ok(pinv)
}

fn allrad(layout: &SpeakerLayout, order: usize, channels: &[usize], horizontal: bool) -> Result<DMatrix<f64>> {
    let vbap = Vbap::new(layout)?;
    let (virt, qw): (Vec<Direction>, Vec<f64>) = if horizontal {
        let m = (4 * order + 4).max(36);
        (
            (0..m).map(|k| Direction::new(2.0 * PI * k as f64 / m as f64, 0.0)).collect(),
            vec![1.0 / m as f64; m],
        )
    } else {
        let grid = quadrature_grid((2 * order + 2).max(20));
        (
            grid.directions().to_vec(),
            grid.weights().iter().map(|w| w / (4.0 * PI)).collect(),
        )
    };
    let mut d_virt = basis(&virt, order, channels).transpose();
    for (c, k) in channels.iter().enumerate() {
        let s = row_scale(*k, horizontal);
        d_virt.column_mut(c).scale_mut(s * s);
    }
    for (r, w) in qw.iter().enumerate() {
        d_virt.row_mut(r).scale_mut(*w);
    }
    let mut g = DMatrix::zeros(layout.len(), virt.len());
    for (k, d) in virt.iter().enumerate() {
        for (l, gl) in vbap.gains(*d).into_iter().enumerate() {
            g[(l, k)] = gl;
        }
    }
    Ok(g * d_virt)
}

/// Mean decoded energy of a unit plane wave over `dirs` (weighted).
fn mean_energy(d: &DMatrix<f64>, dirs: &[Direction], weights: &[f64], order: usize, channels: &[usize]) -> f64 {
    let y = basis(dirs, order, channels);
    let feeds = d * y;
    let total: f64 = weights.iter().sum();
    feeds
        .column_iter()
        .zip(weights)
        .map(|(c, w)| w * c.norm_squared())
        .sum::<f64>()
        / total
}

pub fn build_decoder(
    layout: &SpeakerLayout,
    order: usize,
    method: DecoderMethod,
    weighting: Weighting,
) -> Result<DecoderMatrix> {
    build_decoder_with(layout, order, method, weighting, &DecoderOptions::default())
}

pub fn build_decoder_with(
    layout: &SpeakerLayout,
    order: usize,
    method: DecoderMethod,
    weighting: Weighting,
    options: &DecoderOptions,
) -> Result<DecoderMatrix> {
    let horizontal = layout.geometry() == Geometry::Circular2d;
    let channels: Vec<usize> = if horizontal {
        horizontal_indices(order)
    } else {
        (0..channel_count(order)).collect()
    };
    let dirs = layout.directions();
    let mut d = match method {
        DecoderMethod::Projection => projection(&dirs, order, &channels, horizontal),
        DecoderMethod::ModeMatching => mode_matching(&dirs, order, &channels, horizontal, options)?,
        DecoderMethod::AllRad => allrad(layout, order, &channels, horizontal)?,
    };
    let weights = match weighting {
        Weighting::None => vec![1.0; order + 1],
        Weighting::MaxRe => max_re_weights(order),
    };
    for (c, k) in channels.iter().enumerate() {
        d.column_mut(c).scale_mut(weights[degree(*k)]);
    }
    if method == DecoderMethod::AllRad {
        let grid = quadrature_grid((2 * order + 2).max(20));
        let (probe, w): (Vec<Direction>, Vec<f64>) = if horizontal {
            let m = (4 * order + 4).max(36);
            (
                (0..m).map(|k| Direction::new(2.0 * PI * k as f64 / m as f64, 0.0)).collect(),
                vec![1.0; m],
            )
        } else {
            (grid.directions().to_vec(), grid.weights().to_vec())
        };
        let e = mean_energy(&d, &probe, &w, order, &channels);
        if e > 0.0 {
            d /= e.sqrt();
        }
    }
    let matrix = d.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(DecoderMatrix {
        matrix,
        order,
        method,
        weights,
        horizontal,
    })
}

/// Loudspeaker feeds (speakers x frames). Orders above the decoder order
/// are ignored.
pub fn apply_decoder(buffer: &AmbisonicBuffer, dec: &DecoderMatrix) -> Result<AudioData> {
    if !buffer.convention().is_canonical() {
        return Err(AmbiError::invalid(format!(
            "decoder expects acn/sn3d input, got {}",
            buffer.convention()
        )));
    }
    if buffer.order() < dec.order {
        return Err(AmbiError::invalid(format!(
            "buffer order {} is below decoder order {}",
            buffer.order(),
            dec.order
        )));
    }
    let cols = dec.column_channels();
    if dec.horizontal {
        let dropped = (0..channel_count(dec.order))
            .filter(|k| !cols.contains(k))
            .any(|k| buffer.channel(k).iter().any(|v| *v != 0.0));
        if dropped {
            log::warn!("circular decoder: using the horizontal subset of a 3D signal");
        }
    }
    let frames = buffer.frames();
    let feeds = dec
        .matrix
        .iter()
        .map(|row| {
            let mut out = vec![0.0; frames];
            for (g, k) in row.iter().zip(&cols) {
                for (o, x) in out.iter_mut().zip(buffer.channel(*k)) {
                    *o += g * x;
                }
            }
            out
        })
        .collect();
    AudioData::new(buffer.sample_rate(), feeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode_source;

    fn t_design_like(order: usize) -> Vec<Direction> {
        quadrature_grid(2 * order).directions().to_vec()
    }

    #[test]
    fn max_re_values() {
        assert_eq!(max_re_weights(0), vec![1.0]);
        let w1 = max_re_weights(1);
        assert!((w1[1] - (137.9f64.to_radians() / 2.51).cos()).abs() < 1e-12);
        assert!((max_re_weights(3)[1] - 0.861).abs() < 1e-3);
    }

    #[test]
    fn mode_matching_equals_projection_on_exact_ring() {
        for order in 1..=4 {
            let l = SpeakerLayout::uniform_circle(2 * order + 1, 0.2).unwrap();
            let mm = build_decoder(&l, order, DecoderMethod::ModeMatching, Weighting::None).unwrap();
            let pr = build_decoder(&l, order, DecoderMethod::Projection, Weighting::None).unwrap();
            for (a, b) in mm.matrix().iter().flatten().zip(pr.matrix().iter().flatten()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mode_matching_reencodes_exactly_in_3d() {
        let order = 2;
        let dirs = t_design_like(order + 2);
        let l = SpeakerLayout::from_directions(&dirs, Geometry::Spherical3d).unwrap();
        let dec = build_decoder(&l, order, DecoderMethod::ModeMatching, Weighting::None).unwrap();
        let src = Direction::new(0.4, -0.3);
        let g = dec.gains(src);
        let mut re = vec![0.0; channel_count(order)];
        for (gl, d) in g.iter().zip(&dirs) {
            for (r, y) in re.iter_mut().zip(sh_sn3d(*d, order)) {
                *r += gl * y;
            }
        }
        for (a, b) in re.iter().zip(sh_sn3d(src, order)) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_speakers_is_ill_conditioned() {
        let l = SpeakerLayout::uniform_circle(4, 0.0).unwrap();
        let e = build_decoder(&l, 3, DecoderMethod::ModeMatching, Weighting::None).unwrap_err();
        assert!(matches!(e, AmbiError::IllConditioned { .. }));
        assert!(e.to_string().contains("condition"));
        let opts = DecoderOptions {
            allow_truncation: true,
            ..DecoderOptions::default()
        };
        assert!(build_decoder_with(&l, 3, DecoderMethod::ModeMatching, Weighting::None, &opts).is_ok());
    }

    #[test]
    fn projection_peaks_at_source_speaker() {
        let l = SpeakerLayout::uniform_circle(8, 0.0).unwrap();
        for order in 1..=3 {
            let dec = build_decoder(&l, order, DecoderMethod::Projection, Weighting::None).unwrap();
            for (s, d) in l.directions().iter().enumerate() {
                let g = dec.gains(*d);
                let best = (0..8).max_by(|a, b| g[*a].total_cmp(&g[*b])).unwrap();
                assert_eq!(best, s);
            }
        }
    }

    #[test]
    fn weights_are_column_scalings() {
        let dirs = t_design_like(4);
        let l = SpeakerLayout::from_directions(&dirs, Geometry::Spherical3d).unwrap();
        for method in [DecoderMethod::Projection, DecoderMethod::ModeMatching] {
            let a = build_decoder(&l, 3, method, Weighting::None).unwrap();
            let b = build_decoder(&l, 3, method, Weighting::MaxRe).unwrap();
            let w = max_re_weights(3);
            for (ra, rb) in a.matrix().iter().zip(b.matrix()) {
                for (k, (x, y)) in ra.iter().zip(rb).enumerate() {
                    assert!((x * w[degree(k)] - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn omni_gives_equal_feeds() {
        let l = SpeakerLayout::uniform_circle(6, 0.0).unwrap();
        let dec = build_decoder(&l, 2, DecoderMethod::Projection, Weighting::None).unwrap();
        let mut ch = vec![vec![0.0; 3]; 9];
        ch[0] = vec![1.0, -0.5, 0.25];
        let b = AmbisonicBuffer::canonical(48000, ch).unwrap();
        let feeds = apply_decoder(&b, &dec).unwrap();
        for f in &feeds.channels {
            assert_eq!(f, &feeds.channels[0]);
        }
    }

    #[test]
    fn truncation_matches_lower_order_decode() {
        let dirs = t_design_like(3);
        let l = SpeakerLayout::from_directions(&dirs, Geometry::Spherical3d).unwrap();
        let dec = build_decoder(&l, 3, DecoderMethod::Projection, Weighting::MaxRe).unwrap();
        let b = encode_source(&[1.0, -0.2, 0.7], 48000, Direction::new(2.0, 0.5), 7);
        let full = apply_decoder(&b, &dec).unwrap();
        let trunc = apply_decoder(&b.truncated(3).unwrap(), &dec).unwrap();
        assert_eq!(full, trunc);
        assert!(apply_decoder(&b.truncated(2).unwrap(), &dec).is_err());
    }

    #[test]
    fn allrad_on_dome() {
        let mut dirs: Vec<Direction> = (0..8).map(|k| Direction::from_degrees(45.0 * k as f64, 0.0)).collect();
        dirs.extend((0..4).map(|k| Direction::from_degrees(90.0 * k as f64 + 45.0, 45.0)));
        dirs.push(Direction::from_degrees(0.0, 90.0));
        let l = SpeakerLayout::from_directions(&dirs, Geometry::Spherical3d).unwrap();
        let dec = build_decoder(&l, 2, DecoderMethod::AllRad, Weighting::MaxRe).unwrap();
        assert_eq!(dec.speaker_count(), 13);
        let g = dec.gains(Direction::from_degrees(0.0, 0.0));
        let best = (0..13).max_by(|a, b| g[*a].total_cmp(&g[*b])).unwrap();
        assert_eq!(best, 0);
    }
}
