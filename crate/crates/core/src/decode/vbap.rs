//! Vector base amplitude panning over the speaker hull (3D) or between
//! neighbouring speakers on a circle (2D).

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{AmbiError, Result};
use crate::sh::Direction;

use super::layout::{Geometry, SpeakerLayout};

const HULL_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
enum Panner {
    Sphere {
        /// Inverse bases, one per hull facet.
        inverses: Vec<Matrix3<f64>>,
        facets: Vec<[usize; 3]>,
    },
    Circle {
        /// Speaker indices sorted by azimuth and those azimuths.
        order: Vec<usize>,
        azimuths: Vec<f64>,
    },
}

/// Precomputed panner for one layout.
#[derive(Debug, Clone)]
pub struct Vbap {
    speakers: usize,
    panner: Panner,
}

/// Facets of the convex hull of unit vectors, each oriented outwards.
pub(crate) fn hull_facets(points: &[Vector3<f64>]) -> Vec<[usize; 3]> {
    let n = points.len();
    let mut facets = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let normal = (points[j] - points[i]).cross(&(points[k] - points[i]));
                if normal.norm() < HULL_EPS {
                    continue;
                }
                let normal = normal.normalize();
                let offset = normal.dot(&points[i]);
                let mut above = false;
                let mut below = false;
                for (q, p) in points.iter().enumerate() {
                    if q == i || q == j || q == k {
                        continue;
                    }
                    let s = normal.dot(p) - offset;
                    above |= s > HULL_EPS;
                    below |= s < -HULL_EPS;
                }
                match (above, below) {
                    (false, _) => facets.push([i, j, k]),
                    (true, false) => facets.push([i, k, j]),
                    _ => {}
                }
            }
        }
    }
    facets
}

/// True if `p` is strictly inside the hull described by `facets`.
pub(crate) fn strictly_inside(points: &[Vector3<f64>], facets: &[[usize; 3]], p: &Vector3<f64>) -> bool {
    !facets.is_empty()
        && facets.iter().all(|f| {
            let [a, b, c] = f.map(|i| points[i]);
            let normal = (b - a).cross(&(c - a)).normalize();
            normal.dot(&(p - a)) < -HULL_EPS
        })
}

impl Vbap {
    pub fn new(layout: &SpeakerLayout) -> Result<Self> {
        match layout.geometry() {
            Geometry::Spherical3d => Self::sphere(layout),
            Geometry::Circular2d => Self::circle(layout),
        }
    }

    fn sphere(layout: &SpeakerLayout) -> Result<Self> {
        let mut points: Vec<Vector3<f64>> =
            layout.directions().iter().map(Direction::unit_vector).collect();
        let origin = Vector3::zeros();
        let mut facets = hull_facets(&points);
        if !strictly_inside(&points, &facets, &origin) {
            let min_el = layout.directions().iter().map(|d| d.elevation()).fold(f64::INFINITY, f64::min);
            let max_el = layout.directions().iter().map(|d| d.elevation()).fold(f64::NEG_INFINITY, f64::max);
            // Imaginary speakers close the hull; their gains are discarded.
            if min_el > -PI / 18.0 {
                points.push(Vector3::new(0.0, 0.0, -1.0));
            }
            if max_el < PI / 18.0 {
                points.push(Vector3::new(0.0, 0.0, 1.0));
            }
            facets = hull_facets(&points);
            if !strictly_inside(&points, &facets, &origin) {
                return Err(AmbiError::invalid(
                    "speaker layout does not enclose the listening position",
                ));
            }
        }
        let mut inverses = Vec::with_capacity(facets.len());
        let mut kept = Vec::with_capacity(facets.len());
        for f in facets {
            let base = Matrix3::from_columns(&[points[f[0]], points[f[1]], points[f[2]]]);
            if let Some(inv) = base.try_inverse() {
                inverses.push(inv);
                kept.push(f);
            }
        }
        Ok(Vbap {
            speakers: layout.len(),
            panner: Panner::Sphere {
                inverses,
                facets: kept,
            },
        })
    }

    fn circle(layout: &SpeakerLayout) -> Result<Self> {
        if layout.len() < 2 {
            return Err(AmbiError::invalid("pairwise panning needs at least 2 speakers"));
        }
        let mut order: Vec<usize> = (0..layout.len()).collect();
        let az = |i: usize| layout.speakers()[i].direction.azimuth().rem_euclid(2.0 * PI);
        order.sort_by(|a, b| az(*a).total_cmp(&az(*b)));
        let azimuths: Vec<f64> = order.iter().map(|i| az(*i)).collect();
        for k in 0..azimuths.len() {
            let next = if k + 1 < azimuths.len() {
                azimuths[k + 1]
            } else {
                azimuths[0] + 2.0 * PI
            };
            if next - azimuths[k] >= PI - HULL_EPS {
                return Err(AmbiError::invalid(format!(
                    "gap of {:.1} degrees between adjacent speakers",
                    (next - azimuths[k]).to_degrees()
                )));
            }
        }
        Ok(Vbap {
            speakers: layout.len(),
            panner: Panner::Circle { order, azimuths },
        })
    }

    /// Power-normalized, nonnegative gains for a source at `dir`.
    pub fn gains(&self, dir: Direction) -> Vec<f64> {
        let mut g = vec![0.0; self.speakers];
        match &self.panner {
            Panner::Sphere { inverses, facets } => {
                let v = dir.unit_vector();
                let mut best: Option<(f64, usize, Vector3<f64>)> = None;
                for (idx, inv) in inverses.iter().enumerate() {
                    let w = inv * v;
                    let worst = w.min();
                    if best.as_ref().is_none_or(|(b, _, _)| worst > *b) {
                        best = Some((worst, idx, w));
                    }
                    if worst >= -HULL_EPS {
                        break;
                    }
                }
                if let Some((_, idx, w)) = best {
                    for (s, wk) in facets[idx].iter().zip(w.iter()) {
                        if *s < self.speakers {
                            g[*s] = wk.max(0.0);
                        }
                    }
                }
            }
            Panner::Circle { order, azimuths } => {
                let a = dir.azimuth().rem_euclid(2.0 * PI);
                let n = azimuths.len();
                let mut k = n - 1;
                for (i, az) in azimuths.iter().enumerate() {
                    if *az <= a {
                        k = i;
                    }
                }
                let (lo, hi) = (azimuths[k], if k + 1 < n { azimuths[k + 1] } else { azimuths[0] + 2.0 * PI });
                let a = if a < lo { a + 2.0 * PI } else { a };
                let (sl, cl) = lo.sin_cos();
                let (sh, ch) = hi.sin_cos();
                let det = cl * sh - sl * ch;
                let (x, y) = (a.cos(), a.sin());
                let w0 = ((x * sh - y * ch) / det).max(0.0);
                let w1 = ((cl * y - sl * x) / det).max(0.0);
                g[order[k]] += w0;
                g[order[(k + 1) % n]] += w1;
            }
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            g.iter_mut().for_each(|v| *v /= norm);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octahedron() -> SpeakerLayout {
        let dirs = [
            Direction::from_degrees(0.0, 0.0),
            Direction::from_degrees(90.0, 0.0),
            Direction::from_degrees(180.0, 0.0),
            Direction::from_degrees(-90.0, 0.0),
            Direction::from_degrees(0.0, 90.0),
            Direction::from_degrees(0.0, -90.0),
        ];
        SpeakerLayout::from_directions(&dirs, Geometry::Spherical3d).unwrap()
    }

    #[test]
    fn speaker_direction_gets_all_gain() {
        let l = octahedron();
        let v = Vbap::new(&l).unwrap();
        for (i, d) in l.directions().iter().enumerate() {
            let g = v.gains(*d);
            for (j, gj) in g.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gj - expected).abs() < 1e-9, "{i} {j} {gj}");
            }
        }
    }

    #[test]
    fn gains_nonnegative_and_power_normalized() {
        let v = Vbap::new(&octahedron()).unwrap();
        for k in 0..50 {
            let d = Direction::new(k as f64 * 0.7, (k as f64 * 0.31).sin() * 1.4);
            let g = v.gains(d);
            assert!(g.iter().all(|x| *x >= 0.0));
            let p: f64 = g.iter().map(|x| x * x).sum();
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hemisphere_gets_imaginary_nadir() {
        let dirs: Vec<Direction> = (0..6)
            .map(|k| Direction::from_degrees(60.0 * k as f64, 0.0))
            .chain([Direction::from_degrees(0.0, 90.0)])
            .collect();
        let l = SpeakerLayout::from_directions(&dirs, Geometry::Spherical3d).unwrap();
        let v = Vbap::new(&l).unwrap();
        let g = v.gains(Direction::from_degrees(0.0, -90.0));
        assert_eq!(g.len(), 7);
        assert!(g.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn circle_panning() {
        let l = SpeakerLayout::uniform_circle(4, 0.0).unwrap();
        let v = Vbap::new(&l).unwrap();
        let g = v.gains(Direction::from_degrees(45.0, 0.0));
        assert!((g[0] - g[1]).abs() < 1e-12 && g[2] == 0.0 && g[3] == 0.0);
        let g = v.gains(Direction::from_degrees(-10.0, 0.0));
        assert!(g[3] > 0.0 && g[0] > g[3]);
    }

    #[test]
    fn circle_gap_rejected() {
        let dirs = [Direction::from_degrees(0.0, 0.0), Direction::from_degrees(30.0, 0.0)];
        let l = SpeakerLayout::from_directions(&dirs, Geometry::Circular2d).unwrap();
        assert!(Vbap::new(&l).is_err());
    }
}
