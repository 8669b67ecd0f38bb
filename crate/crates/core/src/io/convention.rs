use super::{AmbisonicBuffer, ChannelOrdering, Convention};
use crate::error::Result;
use crate::sh::{mode_from_acn, normalization_gain};

/// ACN index of each FuMa channel (W X Y Z R S T U V K L M N O P Q).
const FUMA_TO_ACN: [usize; 16] = [0, 3, 1, 2, 6, 7, 5, 8, 4, 12, 13, 11, 14, 10, 15, 9];

/// Position within a buffer of the given ordering that holds ACN channel `acn`.
fn position_of(ordering: ChannelOrdering, acn: usize) -> usize {
    match ordering {
        ChannelOrdering::Acn => acn,
        ChannelOrdering::Fuma => FUMA_TO_ACN
            .iter()
            .position(|&a| a == acn)
            .expect("FuMa order checked against order 3"),
    }
}

/// Re-expresses `buffer` in `target` by channel permutation and per-channel gain.
pub fn convert_convention(buffer: &AmbisonicBuffer, target: Convention) -> Result<AmbisonicBuffer> {
    let order = buffer.order();
    target.check_order(order)?;
    let source = buffer.convention();
    if source == target {
        return Ok(buffer.clone());
    }
    let mut out = vec![Vec::new(); buffer.channel_count()];
    for acn in 0..buffer.channel_count() {
        let gain = normalization_gain(
            mode_from_acn(acn),
            source.normalization(),
            target.normalization(),
        )?;
        let src = buffer.channel(position_of(source.ordering(), acn));
        out[position_of(target.ordering(), acn)] = src.iter().map(|v| v * gain).collect();
    }
    AmbisonicBuffer::new(buffer.sample_rate(), target, out)
}

impl AmbisonicBuffer {
    /// Converts to ACN/SN3D, the convention every processing module expects.
    pub fn to_canonical(&self) -> Result<AmbisonicBuffer> {
        convert_convention(self, Convention::ACN_SN3D)
    }
}
