//! Sample encodings shared by the WAV and CAF containers.

use std::fmt;
use std::str::FromStr;

use crate::error::{AmbiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SampleFormat {
    Pcm16,
    Pcm24,
    Pcm32,
    #[default]
    Float32,
    Float64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Endian {
    Little,
    Big,
}

impl SampleFormat {
    pub fn bits(&self) -> u16 {
        match self {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Pcm24 => 24,
            SampleFormat::Pcm32 | SampleFormat::Float32 => 32,
            SampleFormat::Float64 => 64,
        }
    }

    pub fn bytes(&self) -> usize {
        self.bits() as usize / 8
    }

    pub fn is_float(&self) -> bool {
        matches!(self, SampleFormat::Float32 | SampleFormat::Float64)
    }

    pub(crate) fn from_parts(float: bool, bits: u32) -> Option<Self> {
        match (float, bits) {
            (false, 16) => Some(SampleFormat::Pcm16),
            (false, 24) => Some(SampleFormat::Pcm24),
            (false, 32) => Some(SampleFormat::Pcm32),
            (true, 32) => Some(SampleFormat::Float32),
            (true, 64) => Some(SampleFormat::Float64),
            _ => None,
        }
    }

    pub(crate) fn decode(&self, b: &[u8], endian: Endian) -> f64 {
        let mut buf = [0u8; 8];
        let n = self.bytes();
        buf[..n].copy_from_slice(&b[..n]);
        if endian == Endian::Big {
            buf[..n].reverse();
        }
        match self {
            SampleFormat::Pcm16 => i16::from_le_bytes([buf[0], buf[1]]) as f64 / 32768.0,
            SampleFormat::Pcm24 => {
                let v = i32::from_le_bytes([0, buf[0], buf[1], buf[2]]) >> 8;
                v as f64 / 8_388_608.0
            }
            SampleFormat::Pcm32 => {
                i32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64 / 2_147_483_648.0
            }
            SampleFormat::Float32 => f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            SampleFormat::Float64 => f64::from_le_bytes(buf),
        }
    }

    pub(crate) fn encode(&self, v: f64, endian: Endian, out: &mut Vec<u8>) {
        let start = out.len();
        match self {
            SampleFormat::Pcm16 => {
                let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&q.to_le_bytes());
            }
            SampleFormat::Pcm24 => {
                let q = (v * 8_388_608.0).round().clamp(-8_388_608.0, 8_388_607.0) as i32;
                out.extend_from_slice(&q.to_le_bytes()[..3]);
            }
            SampleFormat::Pcm32 => {
                let q = (v * 2_147_483_648.0)
                    .round()
                    .clamp(-2_147_483_648.0, 2_147_483_647.0) as i32;
                out.extend_from_slice(&q.to_le_bytes());
            }
            SampleFormat::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            SampleFormat::Float64 => out.extend_from_slice(&v.to_le_bytes()),
        }
        if endian == Endian::Big {
            out[start..].reverse();
        }
    }
}

impl fmt::Display for SampleFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleFormat::Pcm16 => "pcm16",
            SampleFormat::Pcm24 => "pcm24",
            SampleFormat::Pcm32 => "pcm32",
            SampleFormat::Float32 => "f32",
            SampleFormat::Float64 => "f64",
        })
    }
}

impl FromStr for SampleFormat {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pcm16" | "s16" => Ok(SampleFormat::Pcm16),
            "pcm24" | "s24" => Ok(SampleFormat::Pcm24),
            "pcm32" | "s32" => Ok(SampleFormat::Pcm32),
            "f32" | "float32" => Ok(SampleFormat::Float32),
            "f64" | "float64" => Ok(SampleFormat::Float64),
            other => Err(AmbiError::UnsupportedFormat(format!(
                "unknown sample format '{other}'"
            ))),
        }
    }
}

/// Interleaved bytes to per-channel samples.
pub(crate) fn deinterleave(
    data: &[u8],
    channels: usize,
    format: SampleFormat,
    endian: Endian,
) -> Vec<Vec<f64>> {
    let width = format.bytes();
    let frames = data.len() / (width * channels.max(1));
    let mut out = vec![Vec::with_capacity(frames); channels];
    for frame in data.chunks_exact(width * channels) {
        for (c, sample) in frame.chunks_exact(width).enumerate() {
            out[c].push(format.decode(sample, endian));
        }
    }
    out
}

pub(crate) fn interleave(channels: &[Vec<f64>], format: SampleFormat, endian: Endian) -> Vec<u8> {
    let frames = channels.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(frames * channels.len() * format.bytes());
    for i in 0..frames {
        for c in channels {
            format.encode(c[i], endian, &mut out);
        }
    }
    out
}
