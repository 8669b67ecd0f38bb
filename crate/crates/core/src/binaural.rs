//! Binaural rendering on a virtual loudspeaker array formed by the
//! measurement directions of an HRIR set.
//!
//! Output corresponds to unequalized rendering; no magnitude-least-squares
//! or similar HRTF preprocessing is applied.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::decode::{
    build_decoder, DecoderMatrix, DecoderMethod, Geometry, SpeakerLayout, Weighting,
};
use crate::error::{AmbiError, Result};
use crate::io::{read_pcm, write_pcm, AmbisonicBuffer, AudioData, SampleFormat};
use crate::sh::{channel_count, quadrature_grid, Direction};
use crate::transform::{rotate_matrix, RotationSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct HrirEntry {
    pub direction: Direction,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// HRIR pairs of uniform length and sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct HrirSet {
    sample_rate: u32,
    length: usize,
    entries: Vec<HrirEntry>,
}

impl HrirSet {
    /// Validates `entries` and zero-pads all responses to the longest one.
    pub fn new(sample_rate: u32, mut entries: Vec<HrirEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(AmbiError::invalid("HRIR set is empty"));
        }
        if entries.len() < 4 {
            return Err(AmbiError::invalid(format!(
                "HRIR set needs at least 4 entries, got {}",
                entries.len()
            )));
        }
        if sample_rate == 0 {
            return Err(AmbiError::invalid("HRIR sample rate is zero"));
        }
        let length = entries
            .iter()
            .map(|e| e.left.len().max(e.right.len()))
            .max()
            .unwrap_or(0);
        if length == 0 {
            return Err(AmbiError::invalid("HRIRs are empty"));
        }
        for e in &mut entries {
            if e.left.iter().chain(&e.right).any(|v| !v.is_finite()) {
                return Err(AmbiError::invalid("HRIR contains non-finite samples"));
            }
            e.left.resize(length, 0.0);
            e.right.resize(length, 0.0);
        }
        // Distinctness is checked with the layout rules.
        SpeakerLayout::from_directions(
            &entries.iter().map(|e| e.direction).collect::<Vec<_>>(),
            Geometry::Spherical3d,
        )
        .map_err(|e| AmbiError::invalid(format!("HRIR directions: {e}")))?;
        Ok(HrirSet {
            sample_rate,
            length,
            entries,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn entries(&self) -> &[HrirEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.entries.iter().map(|e| e.direction).collect()
    }

    /// Highest order whose channel count fits the entry count.
    pub fn max_mode_matching_order(&self) -> usize {
        let mut n = 0;
        while channel_count(n + 1) <= self.len() {
            n += 1;
        }
        n
    }

    fn layout(&self) -> Result<SpeakerLayout> {
        SpeakerLayout::from_directions(&self.directions(), Geometry::Spherical3d)
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    azimuth_deg: f64,
    #[serde(default)]
    elevation_deg: f64,
    file: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    sample_rate: u32,
    entries: Vec<ManifestEntry>,
}

/// Reads a JSON manifest of stereo WAV files. Relative paths are resolved
/// against the manifest's directory.
pub fn load_hrir_set(manifest: &Path) -> Result<HrirSet> {
    let raw: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest)?)?;
    if raw.entries.is_empty() {
        return Err(AmbiError::invalid("HRIR manifest has no entries"));
    }
    let base = manifest.parent().unwrap_or(Path::new(""));
    let mut entries = Vec::with_capacity(raw.entries.len());
    for e in &raw.entries {
        let path = base.join(&e.file);
        let audio = read_pcm(&path)?;
        if audio.sample_rate != raw.sample_rate {
            return Err(AmbiError::invalid(format!(
                "{} has sample rate {} Hz, expected {} Hz",
                path.display(),
                audio.sample_rate,
                raw.sample_rate
            )));
        }
        if audio.channel_count() != 2 {
            return Err(AmbiError::invalid(format!(
                "{} has {} channels, expected 2",
                path.display(),
                audio.channel_count()
            )));
        }
        let mut ch = audio.channels.into_iter();
        entries.push(HrirEntry {
            direction: Direction::from_degrees(e.azimuth_deg, e.elevation_deg),
            left: ch.next().unwrap_or_default(),
            right: ch.next().unwrap_or_default(),
        });
    }
    HrirSet::new(raw.sample_rate, entries)
}

/// Writes `set` as a manifest plus one stereo WAV per entry into `dir`.
pub fn save_hrir_set(set: &HrirSet, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(set.len());
    for (i, e) in set.entries.iter().enumerate() {
        let file = PathBuf::from(format!("hrir_{i:03}.wav"));
        let audio = AudioData::new(set.sample_rate, vec![e.left.clone(), e.right.clone()])?;
        write_pcm(&audio, &dir.join(&file), SampleFormat::Float64)?;
        entries.push(ManifestEntry {
            azimuth_deg: e.direction.azimuth().to_degrees(),
            elevation_deg: e.direction.elevation().to_degrees(),
            file,
        });
    }
    let manifest = Manifest {
        sample_rate: set.sample_rate,
        entries,
    };
    let path = dir.join("hrirs.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Deterministic left-right symmetric HRIR set: interaural delay grows with
/// the lateral component of the direction, level follows a cosine shading.
pub fn synthetic_hrir_set(sample_rate: u32) -> HrirSet {
    const LENGTH: usize = 48;
    let max_itd = (sample_rate as f64 * 0.0007).round();
    let ear = |lateral: f64| {
        let delay = 2 + (max_itd * (1.0 - lateral) / 2.0).round() as usize;
        let gain = 0.6 + 0.4 * lateral;
        let mut h = vec![0.0; LENGTH];
        for k in 0..6 {
            if delay + k < LENGTH {
                h[delay + k] = gain * 0.4f64.powi(k as i32);
            }
        }
        h
    };
    let entries = quadrature_grid(8)
        .directions()
        .iter()
        .map(|d| {
            let lateral = d.unit_vector().y;
            HrirEntry {
                direction: *d,
                left: ear(lateral),
                right: ear(-lateral),
            }
        })
        .collect();
    HrirSet::new(sample_rate, entries).expect("fixture is valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinauralConfig {
    pub method: DecoderMethod,
    pub weighting: Weighting,
    pub head: RotationSpec,
}

impl Default for BinauralConfig {
    fn default() -> Self {
        BinauralConfig {
            method: DecoderMethod::ModeMatching,
            weighting: Weighting::None,
            head: RotationSpec::new(0.0, 0.0, 0.0),
        }
    }
}

/// Decoder from the buffer order to the virtual speakers of `hrirs`.
pub fn binaural_decoder(order: usize, hrirs: &HrirSet, config: &BinauralConfig) -> Result<DecoderMatrix> {
    if config.method == DecoderMethod::AllRad {
        return Err(AmbiError::invalid(
            "binaural rendering supports projection and mode-matching decoders",
        ));
    }
    build_decoder(&hrirs.layout()?, order, config.method, config.weighting)
}

struct Convolver {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Convolver {
    fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Convolver {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    fn spectrum(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.size];
        for (b, v) in buf.iter_mut().zip(x) {
            b.re = *v;
        }
        self.forward.process(&mut buf);
        buf
    }

    fn real_output(&self, mut spec: Vec<Complex<f64>>, len: usize) -> Vec<f64> {
        self.inverse.process(&mut spec);
        let scale = 1.0 / self.size as f64;
        spec.iter().take(len).map(|c| c.re * scale).collect()
    }
}

/// Renders `buffer` to two ear signals of length `frames + hrir_length - 1`.
pub fn binaural_render(buffer: &AmbisonicBuffer, hrirs: &HrirSet, config: &BinauralConfig) -> Result<AudioData> {
    buffer.require_canonical()?;
    if buffer.sample_rate() != hrirs.sample_rate {
        return Err(AmbiError::invalid(format!(
            "signal sample rate {} Hz differs from HRIR sample rate {} Hz",
            buffer.sample_rate(),
            hrirs.sample_rate
        )));
    }
    let dec = binaural_decoder(buffer.order(), hrirs, config)?;
    let rotated = if config.head.is_identity() {
        buffer.clone()
    } else {
        rotate_matrix(buffer, &config.head.inverse_matrix())?
    };
    let feeds = crate::decode::apply_decoder(&rotated, &dec)?;
    let frames = buffer.frames();
    let out_len = frames + hrirs.length - 1;
    let conv = Convolver::new(out_len.next_power_of_two());
    let zero = Complex::new(0.0, 0.0);
    let mut left = vec![zero; conv.size];
    let mut right = vec![zero; conv.size];
    for (feed, entry) in feeds.channels.iter().zip(&hrirs.entries) {
        if feed.iter().all(|v| *v == 0.0) {
            continue;
        }
        let f = conv.spectrum(feed);
        let hl = conv.spectrum(&entry.left);
        let hr = conv.spectrum(&entry.right);
        for k in 0..conv.size {
            left[k] += f[k] * hl[k];
            right[k] += f[k] * hr[k];
        }
    }
    AudioData::new(
        buffer.sample_rate(),
        vec![conv.real_output(left, out_len), conv.real_output(right, out_len)],
    )
}
