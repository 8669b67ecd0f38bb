//! Core Audio Format: linear PCM only. Header fields are big-endian.

use super::pcm::{deinterleave, interleave, Endian, SampleFormat};
use super::AudioData;
use crate::error::{AmbiError, Result};

const FLAG_FLOAT: u32 = 1;
const FLAG_LITTLE_ENDIAN: u32 = 2;

pub fn parse_caf(bytes: &[u8]) -> Result<AudioData> {
    let get = |offset: usize, len: usize| {
        bytes
            .get(offset..offset + len)
            .ok_or_else(|| AmbiError::parse(offset as u64, "truncated CAF header"))
    };
    let be_u32 = |offset: usize| -> Result<u32> {
        let b = get(offset, 4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    };
    if get(0, 4)? != b"caff" {
        return Err(AmbiError::parse(0, "missing 'caff' magic"));
    }
    let version = u16::from_be_bytes(get(4, 2)?.try_into().unwrap());
    if version != 1 {
        return Err(AmbiError::parse(4, format!("unsupported CAF version {version}")));
    }

    let mut desc: Option<(u32, usize, SampleFormat, Endian)> = None;
    let mut pos = 8usize;
    while pos + 12 <= bytes.len() {
        let kind = get(pos, 4)?;
        let size = i64::from_be_bytes(get(pos + 4, 8)?.try_into().unwrap());
        let body = pos + 12;
        let remaining = bytes.len() - body;
        let len = if size == -1 && kind == b"data" {
            remaining
        } else if size < 0 || size as u64 > remaining as u64 {
            return Err(AmbiError::parse(
                pos as u64,
                format!(
                    "chunk '{}' claims {size} bytes, only {remaining} remain",
                    String::from_utf8_lossy(kind)
                ),
            ));
        } else {
            size as usize
        };
        if desc.is_none() && kind != b"desc" {
            return Err(AmbiError::parse(pos as u64, "first chunk must be 'desc'"));
        }
        match kind {
            b"desc" => {
                if len < 32 {
                    return Err(AmbiError::parse(pos as u64, "'desc' chunk too short"));
                }
                let rate = f64::from_be_bytes(get(body, 8)?.try_into().unwrap());
                if get(body + 8, 4)? != b"lpcm" {
                    return Err(AmbiError::UnsupportedFormat(format!(
                        "CAF codec '{}' is not linear PCM",
                        String::from_utf8_lossy(get(body + 8, 4)?)
                    )));
                }
                let flags = be_u32(body + 12)?;
                let bytes_per_packet = be_u32(body + 16)?;
                let frames_per_packet = be_u32(body + 20)?;
                let channels = be_u32(body + 24)? as usize;
                let bits = be_u32(body + 28)?;
                let format = SampleFormat::from_parts(flags & FLAG_FLOAT != 0, bits)
                    .ok_or_else(|| {
                        AmbiError::UnsupportedFormat(format!("CAF linear PCM with {bits} bits"))
                    })?;
                if channels == 0 {
                    return Err(AmbiError::parse(body as u64 + 24, "zero channels"));
                }
                if frames_per_packet != 1 || bytes_per_packet as usize != channels * format.bytes() {
                    return Err(AmbiError::parse(
                        body as u64 + 16,
                        format!(
                            "packet layout {bytes_per_packet} bytes / {frames_per_packet} frames \
                             does not match {channels} x {bits}-bit samples"
                        ),
                    ));
                }
                if !(rate > 0.0 && rate.fract() == 0.0 && rate <= u32::MAX as f64) {
                    return Err(AmbiError::UnsupportedFormat(format!(
                        "non-integral sample rate {rate}"
                    )));
                }
                let endian = if flags & FLAG_LITTLE_ENDIAN != 0 {
                    Endian::Little
                } else {
                    Endian::Big
                };
                desc = Some((rate as u32, channels, format, endian));
            }
            b"data" => {
                let (rate, channels, format, endian) = desc.expect("desc checked above");
                if len < 4 {
                    return Err(AmbiError::parse(pos as u64, "'data' chunk lacks edit count"));
                }
                let audio = &bytes[body + 4..body + len];
                let block = channels * format.bytes();
                if !audio.len().is_multiple_of(block) {
                    return Err(AmbiError::parse(
                        pos as u64,
                        format!(
                            "data size {} is not a multiple of the {block}-byte frame",
                            audio.len()
                        ),
                    ));
                }
                return AudioData::new(rate, deinterleave(audio, channels, format, endian));
            }
            _ => {}
        }
        pos = body + len;
    }
    Err(AmbiError::parse(bytes.len() as u64, "no 'data' chunk"))
}

/// Writes big-endian samples with explicit chunk sizes.
pub fn encode_caf(audio: &AudioData, format: SampleFormat) -> Vec<u8> {
    let channels = audio.channel_count() as u32;
    let data = interleave(&audio.channels, format, Endian::Big);
    let mut out = Vec::with_capacity(data.len() + 68);
    out.extend_from_slice(b"caff");
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());

    out.extend_from_slice(b"desc");
    out.extend_from_slice(&32i64.to_be_bytes());
    out.extend_from_slice(&(audio.sample_rate as f64).to_be_bytes());
    out.extend_from_slice(b"lpcm");
    let flags = if format.is_float() { FLAG_FLOAT } else { 0 };
    out.extend_from_slice(&flags.to_be_bytes());
    out.extend_from_slice(&(channels * format.bytes() as u32).to_be_bytes());
    out.extend_from_slice(&1u32.to_be_bytes());
    out.extend_from_slice(&channels.to_be_bytes());
    out.extend_from_slice(&(format.bits() as u32).to_be_bytes());

    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data.len() as i64 + 4).to_be_bytes());
    out.extend_from_slice(&0u32.to_be_bytes());
    out.extend_from_slice(&data);
    out
}
