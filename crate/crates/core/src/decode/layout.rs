//! Loudspeaker layouts and their JSON description.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{AmbiError, Result};
use crate::sh::Direction;

/// Minimum great-circle separation between two speakers.
pub const MIN_SEPARATION: f64 = 0.5 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    #[serde(rename = "3d")]
    Spherical3d,
    #[serde(rename = "2d")]
    Circular2d,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Spherical3d => "3d",
            Geometry::Circular2d => "2d",
        })
    }
}

impl FromStr for Geometry {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "3d" | "spherical" => Ok(Geometry::Spherical3d),
            "2d" | "circular" => Ok(Geometry::Circular2d),
            other => Err(AmbiError::invalid(format!("unknown layout geometry '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speaker {
    pub direction: Direction,
    pub radius: f64,
}

impl Speaker {
    pub fn new(direction: Direction) -> Self {
        Speaker {
            direction,
            radius: 1.0,
        }
    }

    pub fn position(&self) -> Vector3<f64> {
        self.direction.unit_vector() * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerLayout {
    speakers: Vec<Speaker>,
    geometry: Geometry,
}

#[derive(Serialize, Deserialize)]
struct SpeakerJson {
    azimuth_deg: f64,
    #[serde(default)]
    elevation_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius_m: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct LayoutJson {
    geometry: Geometry,
    speakers: Vec<SpeakerJson>,
}

impl SpeakerLayout {
    pub fn new(speakers: Vec<Speaker>, geometry: Geometry) -> Result<Self> {
        if speakers.is_empty() {
            return Err(AmbiError::invalid("layout has no speakers"));
        }
        for (i, s) in speakers.iter().enumerate() {
            if !(s.radius.is_finite() && s.radius > 0.0) {
                return Err(AmbiError::invalid(format!(
                    "speaker {i} has invalid radius {}",
                    s.radius
                )));
            }
            if geometry == Geometry::Circular2d && s.direction.elevation().abs() > 1e-9 {
                return Err(AmbiError::invalid(format!(
                    "speaker {i} of a circular layout is not in the horizontal plane"
                )));
            }
            for (j, t) in speakers.iter().enumerate().take(i) {
                if s.direction.angle_to(&t.direction) <= MIN_SEPARATION {
                    return Err(AmbiError::invalid(format!(
                        "speakers {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(SpeakerLayout { speakers, geometry })
    }

    pub fn from_directions(dirs: &[Direction], geometry: Geometry) -> Result<Self> {
        Self::new(dirs.iter().map(|d| Speaker::new(*d)).collect(), geometry)
    }

    /// `count` equiangular speakers on the horizon, the first at `offset`.
    pub fn uniform_circle(count: usize, offset: f64) -> Result<Self> {
        let dirs: Vec<Direction> = (0..count)
            .map(|k| Direction::new(offset + 2.0 * PI * k as f64 / count as f64, 0.0))
            .collect();
        Self::from_directions(&dirs, Geometry::Circular2d)
    }

    pub fn speakers(&self) -> &[Speaker] {
        &self.speakers
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.speakers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speakers.is_empty()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.speakers.iter().map(|s| s.direction).collect()
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        self.speakers.iter().map(Speaker::position).collect()
    }

    /// Mean speaker distance from the origin.
    pub fn array_radius(&self) -> f64 {
        self.speakers.iter().map(|s| s.radius).sum::<f64>() / self.len() as f64
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: LayoutJson = serde_json::from_str(text)?;
        let speakers = raw
            .speakers
            .iter()
            .map(|s| Speaker {
                direction: Direction::from_degrees(s.azimuth_deg, s.elevation_deg),
                radius: s.radius_m.unwrap_or(1.0),
            })
            .collect();
        Self::new(speakers, raw.geometry)
    }

    pub fn to_json(&self) -> String {
        let raw = LayoutJson {
            geometry: self.geometry,
            speakers: self
                .speakers
                .iter()
                .map(|s| SpeakerJson {
                    azimuth_deg: s.direction.azimuth().to_degrees(),
                    elevation_deg: s.direction.elevation().to_degrees(),
                    radius_m: (s.radius != 1.0).then_some(s.radius),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("layout serializes")
    }
}

pub fn load_layout(path: &Path) -> Result<SpeakerLayout> {
    SpeakerLayout::from_json(&std::fs::read_to_string(path)?)
}
