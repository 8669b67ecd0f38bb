use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// A direction on the unit sphere.
///
/// Azimuth is measured counterclockwise from +x (straight ahead) towards
/// +y (left); elevation from the horizontal plane towards +z (up). Both in
/// radians. Azimuth is kept in `(-pi, pi]`, elevation in `[-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

impl Direction {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        let mut az = azimuth.rem_euclid(TAU);
        if az > PI {
            az -= TAU;
        }
        Direction {
            azimuth: az,
            elevation: elevation.clamp(-FRAC_PI_2, FRAC_PI_2),
        }
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Vector3::new(ce * ca, ce * sa, se)
    }

    /// Direction of a nonzero vector. The zero vector maps to straight ahead.
    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let horiz = v.x.hypot(v.y);
        if horiz == 0.0 && v.z == 0.0 {
            return Direction::new(0.0, 0.0);
        }
        Direction::new(v.y.atan2(v.x), v.z.atan2(horiz))
    }

    /// Great-circle angle to `other`, in radians.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        angle_between(&self.unit_vector(), &other.unit_vector())
    }
}

/// Angle between two nonzero vectors, robust near 0 and pi.
pub(crate) fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azimuth_wraps_into_half_open_interval() {
        assert_eq!(Direction::new(PI, 0.0).azimuth(), PI);
        assert_eq!(Direction::new(-PI, 0.0).azimuth(), PI);
        assert!((Direction::new(3.0 * PI / 2.0, 0.0).azimuth() + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn elevation_is_clamped() {
        assert_eq!(Direction::new(0.0, 2.0).elevation(), FRAC_PI_2);
        assert_eq!(Direction::new(0.0, -2.0).elevation(), -FRAC_PI_2);
    }

    #[test]
    fn unit_vector_axes() {
        let left = Direction::from_degrees(90.0, 0.0).unit_vector();
        assert!((left - Vector3::y()).norm() < 1e-15);
        let up = Direction::from_degrees(10.0, 90.0).unit_vector();
        assert!((up - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn vector_round_trip() {
        let d = Direction::from_degrees(-130.0, 25.0);
        let back = Direction::from_vector(&(3.0 * d.unit_vector()));
        assert!(d.angle_to(&back) < 1e-12);
    }
}
