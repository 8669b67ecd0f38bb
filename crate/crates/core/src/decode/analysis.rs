//! Energy and velocity vector analysis of decoders, including maps of the
//! localization error over listening positions.

use nalgebra::{Vector2, Vector3};
use serde::Serialize;

use crate::error::{AmbiError, Result};
use crate::sh::{angle_between, channel_count, mode_from_acn, quadrature_grid, sh_sn3d, Direction};

use super::decoder::{max_re_weights, DecoderMatrix};
use super::layout::{Geometry, SpeakerLayout};
use super::vbap::{hull_facets, strictly_inside};

pub const SWEET_AREA_THRESHOLD_DEG: f64 = 30.0;

/// Below this magnitude a vector has no direction; the error is then 180°.
const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyVectors {
    pub r_v: Vector3<f64>,
    pub r_e: Vector3<f64>,
}

/// Velocity and energy vectors at `listener` for speakers at `positions`
/// driven with `gains`, with 1/r amplitude decay.
pub fn energy_vectors(gains: &[f64], positions: &[Vector3<f64>], listener: &Vector3<f64>) -> EnergyVectors {
    let mut sum_a = 0.0;
    let mut sum_e = 0.0;
    let mut r_v = Vector3::zeros();
    let mut r_e = Vector3::zeros();
    for (g, pos) in gains.iter().zip(positions) {
        let v = pos - listener;
        let dist = v.norm();
        let u = v / dist;
        let a = g / dist;
        sum_a += a;
        sum_e += a * a;
        r_v += u * a;
        r_e += u * (a * a);
    }
    EnergyVectors {
        r_v: if sum_a != 0.0 { r_v / sum_a } else { Vector3::zeros() },
        r_e: if sum_e > 0.0 { r_e / sum_e } else { Vector3::zeros() },
    }
}

fn error_deg(v: &Vector3<f64>, truth: &Vector3<f64>) -> f64 {
    if v.norm() < DEGENERATE {
        180.0
    } else {
        angle_between(v, truth).to_degrees()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VectorEntry {
    pub source_azimuth_deg: f64,
    pub source_elevation_deg: f64,
    pub position: [f64; 3],
    pub r_e: [f64; 3],
    pub r_v: [f64; 3],
    pub error_e_deg: f64,
    pub error_v_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositionSummary {
    pub position: [f64; 3],
    /// rE direction error averaged over the source directions.
    pub mean_error_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub array_radius: f64,
    pub entries: Vec<VectorEntry>,
    pub positions: Vec<PositionSummary>,
    /// Sweet-area radius at the default threshold, as a fraction of the
    /// array radius.
    pub sweet_area_radius: f64,
}

/// Checks whether `p` lies strictly inside the layout's hull.
pub fn inside_layout(layout: &SpeakerLayout, p: &Vector3<f64>) -> bool {
    let pts = layout.positions();
    match layout.geometry() {
        Geometry::Spherical3d => strictly_inside(&pts, &hull_facets(&pts), p),
        Geometry::Circular2d => {
            let flat: Vec<Vector2<f64>> = pts.iter().map(|v| Vector2::new(v.x, v.y)).collect();
            inside_polygon(&convex_hull_2d(&flat), &Vector2::new(p.x, p.y))
        }
    }
}

/// Counterclockwise convex hull (monotone chain).
fn convex_hull_2d(points: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut hull: Vec<Vector2<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vector2<f64>>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

fn inside_polygon(hull: &[Vector2<f64>], p: &Vector2<f64>) -> bool {
    hull.len() >= 3
        && (0..hull.len()).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) > 1e-12
        })
}

/// Square grid of `count` x `count` points over `[-half, half]^2` at z = 0.
pub fn square_grid(count: usize, half: f64) -> Vec<Vector3<f64>> {
    let step = |i: usize| {
        if count == 1 {
            0.0
        } else {
            -half + 2.0 * half * i as f64 / (count - 1) as f64
        }
    };
    (0..count)
        .flat_map(|i| (0..count).map(move |j| Vector3::new(step(i), step(j), 0.0)))
        .collect()
}

pub fn analyze_decoder(
    dec: &DecoderMatrix,
    layout: &SpeakerLayout,
    sources: &[Direction],
    positions: &[Vector3<f64>],
) -> Result<AnalysisReport> {
    if dec.speaker_count() != layout.len() {
        return Err(AmbiError::invalid(format!(
            "decoder drives {} speakers, layout has {}",
            dec.speaker_count(),
            layout.len()
        )));
    }
    if sources.is_empty() {
        return Err(AmbiError::invalid("no source directions to analyse"));
    }
    for p in positions {
        if !inside_layout(layout, p) {
            return Err(AmbiError::invalid(format!(
                "listening position ({:.3}, {:.3}, {:.3}) is not inside the array",
                p.x, p.y, p.z
            )));
        }
    }
    let speaker_pos = layout.positions();
    let radius = layout.array_radius();
    let gains: Vec<Vec<f64>> = sources.iter().map(|d| dec.gains(*d)).collect();
    let mut entries = Vec::with_capacity(sources.len() * positions.len());
    let mut summaries = Vec::with_capacity(positions.len());
    for p in positions {
        let mut total = 0.0;
        for (src, g) in sources.iter().zip(&gains) {
            let truth = src.unit_vector() * radius - p;
            let ev = energy_vectors(g, &speaker_pos, p);
            let error_e = error_deg(&ev.r_e, &truth);
            total += error_e;
            entries.push(VectorEntry {
                source_azimuth_deg: src.azimuth().to_degrees(),
                source_elevation_deg: src.elevation().to_degrees(),
                position: [p.x, p.y, p.z],
                r_e: [ev.r_e.x, ev.r_e.y, ev.r_e.z],
                r_v: [ev.r_v.x, ev.r_v.y, ev.r_v.z],
                error_e_deg: error_e,
                error_v_deg: error_deg(&ev.r_v, &truth),
            });
        }
        summaries.push(PositionSummary {
            position: [p.x, p.y, p.z],
            mean_error_deg: total / sources.len() as f64,
        });
    }
    let mut report = AnalysisReport {
        array_radius: radius,
        entries,
        positions: summaries,
        sweet_area_radius: 0.0,
    };
    report.sweet_area_radius = sweet_area_radius(&report, SWEET_AREA_THRESHOLD_DEG);
    Ok(report)
}

/// Largest radius (fraction of the array radius) such that every analysed
/// position at or inside it has a mean error below `threshold_deg`.
pub fn sweet_area_radius(report: &AnalysisReport, threshold_deg: f64) -> f64 {
    let mut by_radius: Vec<(f64, f64)> = report
        .positions
        .iter()
        .map(|s| (Vector3::from(s.position).norm(), s.mean_error_deg))
        .collect();
    by_radius.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first_fail = by_radius
        .iter()
        .find(|(_, e)| *e >= threshold_deg)
        .map(|(r, _)| *r);
    let r = by_radius
        .iter()
        .take_while(|(r, _)| first_fail.is_none_or(|f| *r < f))
        .map(|(r, _)| *r)
        .fold(0.0, f64::max);
    r / report.array_radius
}

/// Direction of the energy vector of an SN3D scene frame at the center of
/// a dense virtual array with max-rE projection decoding.
pub fn energy_direction(coeffs: &[f64]) -> Result<Direction> {
    let order = crate::sh::order_from_channels(coeffs.len())
        .ok_or_else(|| AmbiError::MalformedSignal(format!("channel count {} is not (N+1)^2", coeffs.len())))?;
    let weights = max_re_weights(order);
    let scale: Vec<f64> = (0..channel_count(order))
        .map(|k| {
            let n = mode_from_acn(k).n();
            (2 * n + 1) as f64 * weights[n] * coeffs[k]
        })
        .collect();
    let grid = quadrature_grid((2 * order + 2).max(30));
    let mut r_e = Vector3::zeros();
    for (d, w) in grid.directions().iter().zip(grid.weights()) {
        let g: f64 = sh_sn3d(*d, order).iter().zip(&scale).map(|(y, s)| y * s).sum();
        r_e += d.unit_vector() * (w * g * g);
    }
    if r_e.norm() < DEGENERATE {
        return Err(AmbiError::invalid("scene has no dominant direction"));
    }
    Ok(Direction::from_vector(&r_e))
}
