//! Horizontal-only (circular) subset of a 3D signal.

use crate::error::{AmbiError, Result};
use crate::io::AmbisonicBuffer;
use crate::sh::{channel_count, mode_from_acn};

/// Signal restricted to the modes with `|m| = n`, in ACN order.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalBuffer {
    sample_rate: u32,
    order: usize,
    channels: Vec<Vec<f64>>,
}

/// ACN indices with `|m| = n` up to `order`.
pub fn horizontal_indices(order: usize) -> Vec<usize> {
    (0..channel_count(order))
        .filter(|&k| {
            let mode = mode_from_acn(k);
            mode.m().unsigned_abs() == mode.n()
        })
        .collect()
}

impl HorizontalBuffer {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        let count = channels.len();
        if count.is_multiple_of(2) {
            return Err(AmbiError::MalformedSignal(format!(
                "channel count {count} is not 2N+1"
            )));
        }
        if let Some(first) = channels.first() {
            if channels.iter().any(|c| c.len() != first.len()) {
                return Err(AmbiError::MalformedSignal("channels differ in length".into()));
            }
        }
        Ok(HorizontalBuffer {
            sample_rate,
            order: (count - 1) / 2,
            channels,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn order(&self) -> usize {
        self.order
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

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Full-sphere buffer with the non-horizontal modes set to zero.
    pub fn to_full(&self) -> AmbisonicBuffer {
        let frames = self.frames();
        let mut out = vec![vec![0.0; frames]; channel_count(self.order)];
        for (k, ch) in horizontal_indices(self.order).into_iter().zip(&self.channels) {
            out[k] = ch.clone();
        }
        AmbisonicBuffer::canonical(self.sample_rate, out).expect("square channel count")
    }
}

pub fn horizontal_subset(buffer: &AmbisonicBuffer) -> Result<HorizontalBuffer> {
    buffer.require_canonical()?;
    let channels = horizontal_indices(buffer.order())
        .into_iter()
        .map(|k| buffer.channel(k).to_vec())
        .collect();
    HorizontalBuffer::new(buffer.sample_rate(), channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode_source;
    use crate::sh::Direction;

    #[test]
    fn kept_indices() {
        assert_eq!(horizontal_indices(0), vec![0]);
        assert_eq!(horizontal_indices(2), vec![0, 1, 3, 4, 8]);
        assert_eq!(horizontal_indices(7).len(), 15);
    }

    #[test]
    fn subset_and_back() {
        let b = encode_source(&[1.0, 2.0], 44100, Direction::new(0.5, 0.0), 3);
        let h = horizontal_subset(&b).unwrap();
        assert_eq!(h.channel_count(), 7);
        assert_eq!(h.order(), 3);
        let full = h.to_full();
        let kept = horizontal_indices(3);
        for k in 0..16 {
            let expected = if kept.contains(&k) { b.channel(k) } else { &[0.0, 0.0][..] };
            assert_eq!(full.channel(k), expected);
        }
    }

    #[test]
    fn even_channel_count_rejected() {
        assert!(HorizontalBuffer::new(48000, vec![vec![0.0]; 4]).is_err());
    }
}
