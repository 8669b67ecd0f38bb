use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AmbiError, Result};
use crate::sh::{channel_count, order_from_channels, Normalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelOrdering {
    Acn,
    Fuma,
}

impl ChannelOrdering {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelOrdering::Acn => "acn",
            ChannelOrdering::Fuma => "fuma",
        }
    }
}

impl FromStr for ChannelOrdering {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "acn" => Ok(ChannelOrdering::Acn),
            "fuma" => Ok(ChannelOrdering::Fuma),
            "sid" => Err(AmbiError::UnsupportedConvention(
                "SID channel ordering is not supported".into(),
            )),
            other => Err(AmbiError::UnsupportedConvention(format!(
                "unknown channel ordering '{other}'"
            ))),
        }
    }
}

/// Channel ordering plus normalization. FuMa ordering only pairs with FuMa
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Convention {
    ordering: ChannelOrdering,
    normalization: Normalization,
}

impl Convention {
    /// AmbiX: ACN ordering with SN3D normalization. The in-memory canonical form.
    pub const ACN_SN3D: Convention = Convention {
        ordering: ChannelOrdering::Acn,
        normalization: Normalization::Sn3d,
    };
    pub const ACN_N3D: Convention = Convention {
        ordering: ChannelOrdering::Acn,
        normalization: Normalization::N3d,
    };
    pub const FUMA: Convention = Convention {
        ordering: ChannelOrdering::Fuma,
        normalization: Normalization::Fuma,
    };

    pub fn new(ordering: ChannelOrdering, normalization: Normalization) -> Result<Self> {
        if ordering == ChannelOrdering::Fuma && normalization != Normalization::Fuma {
            return Err(AmbiError::UnsupportedConvention(format!(
                "FuMa ordering requires FuMa normalization, got {normalization}"
            )));
        }
        Ok(Convention {
            ordering,
            normalization,
        })
    }

    pub fn ordering(&self) -> ChannelOrdering {
        self.ordering
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn is_canonical(&self) -> bool {
        *self == Self::ACN_SN3D
    }

    pub fn check_order(&self, order: usize) -> Result<()> {
        let fuma = self.ordering == ChannelOrdering::Fuma || self.normalization == Normalization::Fuma;
        if fuma && order > 3 {
            return Err(AmbiError::UnsupportedConvention(format!(
                "{self} is limited to order 3, signal has order {order}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Convention::FUMA {
            return f.write_str("fuma");
        }
        write!(f, "{}/{}", self.ordering.name(), self.normalization.name())
    }
}

impl FromStr for Convention {
    type Err = AmbiError;

    /// Accepts `acn-sn3d`, `acn/n3d`, `ambix`, `fuma`, ...
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "ambix" => return Ok(Self::ACN_SN3D),
            "fuma" | "fuma-fuma" | "fuma/fuma" => return Ok(Self::FUMA),
            _ => {}
        }
        let (ord, norm) = lower.split_once(['-', '/']).ok_or_else(|| {
            AmbiError::UnsupportedConvention(format!("cannot parse convention '{s}'"))
        })?;
        Convention::new(ord.parse()?, norm.parse()?)
    }
}

/// Plain multichannel audio without ambisonic semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioData {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

impl AudioData {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        check_equal_lengths(&channels)?;
        Ok(AudioData {
            sample_rate,
            channels,
        })
    }

    pub fn frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }
}

/// An ambisonic signal: `(order+1)^2` equally long channels plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbisonicBuffer {
    sample_rate: u32,
    order: usize,
    convention: Convention,
    channels: Vec<Vec<f64>>,
}

impl AmbisonicBuffer {
    pub fn new(sample_rate: u32, convention: Convention, channels: Vec<Vec<f64>>) -> Result<Self> {
        let order = order_from_channels(channels.len()).ok_or_else(|| {
            AmbiError::MalformedSignal(format!(
                "channel count {} is not (N+1)^2",
                channels.len()
            ))
        })?;
        check_equal_lengths(&channels)?;
        convention.check_order(order)?;
        Ok(AmbisonicBuffer {
            sample_rate,
            order,
            convention,
            channels,
        })
    }

    /// Canonical (ACN/SN3D) buffer from channel data.
    pub fn canonical(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(sample_rate, Convention::ACN_SN3D, channels)
    }

    pub fn silent(order: usize, sample_rate: u32, frames: usize) -> Self {
        AmbisonicBuffer {
            sample_rate,
            order,
            convention: Convention::ACN_SN3D,
            channels: vec![vec![0.0; frames]; channel_count(order)],
        }
    }

    pub fn from_audio(audio: AudioData, convention: Convention) -> Result<Self> {
        Self::new(audio.sample_rate, convention, audio.channels)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, k: usize) -> &[f64] {
        &self.channels[k]
    }

    pub fn channel_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.channels[k]
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Same metadata, new channel data of identical shape.
    pub fn with_channels(&self, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channels.len() != self.channels.len() {
            return Err(AmbiError::MalformedSignal(format!(
                "expected {} channels, got {}",
                self.channels.len(),
                channels.len()
            )));
        }
        Self::new(self.sample_rate, self.convention, channels)
    }

    pub fn into_audio(self) -> AudioData {
        AudioData {
            sample_rate: self.sample_rate,
            channels: self.channels,
        }
    }

    pub fn require_canonical(&self) -> Result<()> {
        if !self.convention.is_canonical() {
            return Err(AmbiError::invalid(format!(
                "operation requires acn/sn3d input, buffer is {}",
                self.convention
            )));
        }
        Ok(())
    }

    /// Keeps the lowest `order` orders.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(AmbiError::invalid(format!(
                "cannot truncate order {} to higher order {order}",
                self.order
            )));
        }
        Ok(AmbisonicBuffer {
            sample_rate: self.sample_rate,
            order,
            convention: self.convention,
            channels: self.channels[..channel_count(order)].to_vec(),
        })
    }
}

fn check_equal_lengths(channels: &[Vec<f64>]) -> Result<()> {
    if let Some(first) = channels.first() {
        if let Some((k, c)) = channels.iter().enumerate().find(|(_, c)| c.len() != first.len()) {
            return Err(AmbiError::MalformedSignal(format!(
                "channel {k} has {} frames, channel 0 has {}",
                c.len(),
                first.len()
            )));
        }
    }
    Ok(())
}
