//! Encoding: virtual sources and tetrahedral A-format recordings to
//! ambisonic signals, plus mixing.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{AmbiError, Result};
use crate::io::{read_pcm, AmbisonicBuffer, AudioData};
use crate::sh::{channel_count, sh_sn3d, Direction};

/// A mono signal placed at a direction with a linear gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub audio: Vec<f64>,
    pub sample_rate: u32,
    pub direction: Direction,
    pub gain: f64,
}

impl Source {
    pub fn new(audio: Vec<f64>, sample_rate: u32, direction: Direction, gain: f64) -> Result<Self> {
        if !gain.is_finite() || gain < 0.0 {
            return Err(AmbiError::invalid(format!("source gain {gain} must be finite and >= 0")));
        }
        Ok(Source {
            audio,
            sample_rate,
            direction,
            gain,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub order: usize,
    pub sample_rate: u32,
    pub sources: Vec<Source>,
}

/// Plane-wave encoding: channel `k` is `signal * Y_k(dir)` (SN3D).
pub fn encode_source(signal: &[f64], sample_rate: u32, dir: Direction, order: usize) -> AmbisonicBuffer {
    let y = sh_sn3d(dir, order);
    let channels = y
        .iter()
        .map(|g| signal.iter().map(|s| s * g).collect())
        .collect();
    AmbisonicBuffer::canonical(sample_rate, channels).expect("(N+1)^2 equal channels")
}

/// Adds two canonical signals. Missing orders and frames count as zeros.
pub fn mix(a: &AmbisonicBuffer, b: &AmbisonicBuffer) -> Result<AmbisonicBuffer> {
    if a.sample_rate() != b.sample_rate() {
        return Err(AmbiError::invalid(format!(
            "cannot mix {} Hz with {} Hz",
            a.sample_rate(),
            b.sample_rate()
        )));
    }
    a.require_canonical()?;
    b.require_canonical()?;
    let order = a.order().max(b.order());
    let frames = a.frames().max(b.frames());
    let get = |buf: &AmbisonicBuffer, k: usize, i: usize| {
        if k < buf.channel_count() {
            buf.channel(k).get(i).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    };
    let channels = (0..channel_count(order))
        .map(|k| (0..frames).map(|i| get(a, k, i) + get(b, k, i)).collect())
        .collect();
    AmbisonicBuffer::canonical(a.sample_rate(), channels)
}

/// Sum of all encoded, gain-scaled sources. No room model.
pub fn render_scene(scene: &SceneDescription) -> Result<AmbisonicBuffer> {
    let mut acc = AmbisonicBuffer::silent(scene.order, scene.sample_rate, 0);
    for (i, src) in scene.sources.iter().enumerate() {
        if src.sample_rate != scene.sample_rate {
            return Err(AmbiError::invalid(format!(
                "source {i} is {} Hz, scene is {} Hz",
                src.sample_rate, scene.sample_rate
            )));
        }
        let scaled: Vec<f64> = src.audio.iter().map(|s| s * src.gain).collect();
        acc = mix(&acc, &encode_source(&scaled, scene.sample_rate, src.direction, scene.order))?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneFile {
    order: usize,
    sample_rate: u32,
    sources: Vec<SceneFileSource>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneFileSource {
    audio: String,
    azimuth_deg: f64,
    #[serde(default)]
    elevation_deg: f64,
    #[serde(default)]
    gain_db: f64,
}

/// Loads a JSON scene; audio paths resolve relative to the scene file.
pub fn load_scene(path: &Path) -> Result<SceneDescription> {
    let file: SceneFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut sources = Vec::with_capacity(file.sources.len());
    for s in &file.sources {
        let audio_path = base.join(&s.audio);
        let audio = read_pcm(&audio_path)?;
        if audio.channel_count() != 1 {
            return Err(AmbiError::invalid(format!(
                "source '{}' has {} channels, expected mono",
                audio_path.display(),
                audio.channel_count()
            )));
        }
        let gain = 10f64.powf(s.gain_db / 20.0);
        let sample_rate = audio.sample_rate;
        let samples = audio.channels.into_iter().next().unwrap_or_default();
        sources.push(Source::new(
            samples,
            sample_rate,
            Direction::from_degrees(s.azimuth_deg, s.elevation_deg),
            gain,
        )?);
    }
    Ok(SceneDescription {
        order: file.order,
        sample_rate: file.sample_rate,
        sources,
    })
}

/// Coincident tetrahedral array: capsules at the FLU, FRD, BLD, BRU corners,
/// each with gain `alpha + (1 - alpha) cos(angle)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetraGeometry {
    alpha: f64,
}

impl Default for TetraGeometry {
    fn default() -> Self {
        TetraGeometry { alpha: 0.5 }
    }
}

impl TetraGeometry {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(AmbiError::invalid(format!("capsule pattern {alpha} outside [0, 1]")));
        }
        Ok(TetraGeometry { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Capsule axes in FLU, FRD, BLD, BRU order.
    pub fn axes() -> [Vector3<f64>; 4] {
        let s = 1.0 / 3f64.sqrt();
        [
            Vector3::new(s, s, s),
            Vector3::new(s, -s, -s),
            Vector3::new(-s, s, -s),
            Vector3::new(-s, -s, s),
        ]
    }
}

/// A-format (FLU, FRD, BLD, BRU) to first-order ACN/SN3D.
///
/// The sum and difference signals are scaled so that a plane wave reproduces
/// [`encode_source`] exactly under the coincident capsule model.
pub fn tetra_a_to_b(a_format: &AudioData, geom: TetraGeometry) -> Result<AmbisonicBuffer> {
    if a_format.channel_count() != 4 {
        return Err(AmbiError::invalid(format!(
            "A-format needs 4 capsule channels, got {}",
            a_format.channel_count()
        )));
    }
    let alpha = geom.alpha;
    if alpha == 0.0 || alpha == 1.0 {
        return Err(AmbiError::invalid(format!(
            "capsule pattern {alpha} cannot separate omni and figure-of-eight parts"
        )));
    }
    // Sum of capsule gains is 4*alpha; each difference pattern is
    // (1-alpha) * 4/sqrt(3) * (axis component).
    let w_scale = 1.0 / (4.0 * alpha);
    let v_scale = 3f64.sqrt() / (4.0 * (1.0 - alpha));
    let [flu, frd, bld, bru] = [0, 1, 2, 3].map(|k| &a_format.channels[k]);
    let frames = a_format.frames();
    let mut w = Vec::with_capacity(frames);
    let mut x = Vec::with_capacity(frames);
    let mut y = Vec::with_capacity(frames);
    let mut z = Vec::with_capacity(frames);
    for i in 0..frames {
        let (a, b, c, d) = (flu[i], frd[i], bld[i], bru[i]);
        w.push((a + b + c + d) * w_scale);
        x.push((a + b - c - d) * v_scale);
        y.push((a - b + c - d) * v_scale);
        z.push((a - b - c + d) * v_scale);
    }
    AmbisonicBuffer::canonical(a_format.sample_rate, vec![w, y, z, x])
}
