//! Processing applied identically to every channel: gains, fades,
//! equalization filters and W-keyed compression.

use std::str::FromStr;

use crate::error::{AmbiError, Result};
use crate::io::AmbisonicBuffer;

/// Per-sample linear processing shared by all channels.
#[derive(Debug, Clone, PartialEq)]
pub enum UniformKernel {
    /// Constant gain factor.
    Gain(f64),
    /// One gain factor per frame (e.g. a fade).
    Envelope(Vec<f64>),
    /// FIR filter taps; output is truncated to the input length.
    Fir(Vec<f64>),
}

impl UniformKernel {
    fn validate(&self, frames: usize) -> Result<()> {
        let values: &[f64] = match self {
            UniformKernel::Gain(g) => std::slice::from_ref(g),
            UniformKernel::Envelope(e) => {
                if e.len() != frames {
                    return Err(AmbiError::invalid(format!(
                        "envelope has {} samples, signal has {frames} frames",
                        e.len()
                    )));
                }
                e
            }
            UniformKernel::Fir(taps) => {
                if taps.is_empty() {
                    return Err(AmbiError::invalid("FIR kernel has no taps"));
                }
                taps
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AmbiError::invalid("kernel contains non-finite values"));
        }
        Ok(())
    }

    /// Processes one channel.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            UniformKernel::Gain(g) => x.iter().map(|v| v * g).collect(),
            UniformKernel::Envelope(e) => x.iter().zip(e).map(|(v, g)| v * g).collect(),
            UniformKernel::Fir(taps) => {
                let mut y = vec![0.0; x.len()];
                for (i, out) in y.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (k, h) in taps.iter().enumerate().take(i + 1) {
                        acc += h * x[i - k];
                    }
                    *out = acc;
                }
                y
            }
        }
    }
}

/// Applies `kernel` to every channel of `buffer`.
pub fn uniform_process(buffer: &AmbisonicBuffer, kernel: &UniformKernel) -> Result<AmbisonicBuffer> {
    kernel.validate(buffer.frames())?;
    let channels = buffer.channels().iter().map(|c| kernel.apply(c)).collect();
    buffer.with_channels(channels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Detector {
    #[default]
    Peak,
    Rms,
}

impl FromStr for Detector {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "peak" => Ok(Detector::Peak),
            "rms" => Ok(Detector::Rms),
            other => Err(AmbiError::invalid(format!("unknown detector '{other}'"))),
        }
    }
}

/// RMS detector window length in seconds.
pub const RMS_WINDOW: f64 = 0.003;

/// Level floor for the detector, keeps silence finite in dB.
const LEVEL_FLOOR_DB: f64 = -200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressorParams {
    threshold_db: f64,
    ratio: f64,
    attack_ms: f64,
    release_ms: f64,
    makeup_db: f64,
    detector: Detector,
}

impl CompressorParams {
    pub fn new(
        threshold_db: f64,
        ratio: f64,
        attack_ms: f64,
        release_ms: f64,
        makeup_db: f64,
        detector: Detector,
    ) -> Result<Self> {
        if !threshold_db.is_finite() || !makeup_db.is_finite() {
            return Err(AmbiError::invalid("threshold and makeup must be finite"));
        }
        if ratio.is_nan() || ratio < 1.0 {
            return Err(AmbiError::invalid(format!("ratio {ratio} must be >= 1")));
        }
        if !(attack_ms > 0.0 && attack_ms.is_finite()) || !(release_ms > 0.0 && release_ms.is_finite()) {
            return Err(AmbiError::invalid("attack and release must be positive"));
        }
        Ok(CompressorParams {
            threshold_db,
            ratio,
            attack_ms,
            release_ms,
            makeup_db,
            detector,
        })
    }

    pub fn threshold_db(&self) -> f64 {
        self.threshold_db
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn attack_ms(&self) -> f64 {
        self.attack_ms
    }

    pub fn release_ms(&self) -> f64 {
        self.release_ms
    }

    pub fn makeup_db(&self) -> f64 {
        self.makeup_db
    }

    pub fn detector(&self) -> Detector {
        self.detector
    }

    /// Static gain curve in dB for a detector level in dBFS.
    pub fn static_gain_db(&self, level_db: f64) -> f64 {
        ((self.threshold_db - level_db) * (1.0 - 1.0 / self.ratio)).min(0.0)
    }
}

fn one_pole(time_ms: f64, sample_rate: u32) -> f64 {
    (-1.0 / (time_ms * 1e-3 * sample_rate as f64)).exp()
}

fn detect(control: &[f64], params: &CompressorParams, sample_rate: u32) -> Vec<f64> {
    match params.detector {
        Detector::Peak => {
            let rel = one_pole(params.release_ms, sample_rate);
            let mut env = 0.0f64;
            control
                .iter()
                .map(|x| {
                    env = x.abs().max(rel * env);
                    env
                })
                .collect()
        }
        Detector::Rms => {
            let len = ((RMS_WINDOW * sample_rate as f64).round() as usize).max(1);
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(control.len());
            for (i, x) in control.iter().enumerate() {
                acc += x * x;
                if i >= len {
                    acc -= control[i - len] * control[i - len];
                }
                out.push((acc.max(0.0) / len as f64).sqrt());
            }
            out
        }
    }
}

/// Linear gain sequence derived from the omnidirectional channel.
pub fn compressor_gain(buffer: &AmbisonicBuffer, params: &CompressorParams) -> Result<Vec<f64>> {
    buffer.require_canonical()?;
    let sr = buffer.sample_rate();
    let env = detect(buffer.channel(0), params, sr);
    let att = one_pole(params.attack_ms, sr);
    let rel = one_pole(params.release_ms, sr);
    let mut g_db = 0.0f64;
    Ok(env
        .iter()
        .map(|e| {
            let level = if *e > 0.0 {
                (20.0 * e.log10()).max(LEVEL_FLOOR_DB)
            } else {
                LEVEL_FLOOR_DB
            };
            let target = params.static_gain_db(level);
            let a = if target < g_db { att } else { rel };
            g_db = a * g_db + (1.0 - a) * target;
            10f64.powf((g_db + params.makeup_db) / 20.0)
        })
        .collect())
}

/// Compresses the whole scene with one gain sequence keyed on ACN 0.
pub fn compress(buffer: &AmbisonicBuffer, params: &CompressorParams) -> Result<AmbisonicBuffer> {
    let gain = compressor_gain(buffer, params)?;
    uniform_process(buffer, &UniformKernel::Envelope(gain))
}
