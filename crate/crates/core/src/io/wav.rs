//! RIFF/WAVE reader and writer (PCM, IEEE float, WAVE_FORMAT_EXTENSIBLE).

use super::pcm::{deinterleave, interleave, Endian, SampleFormat};
use super::AudioData;
use crate::error::{AmbiError, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

// Tail shared by the KSDATAFORMAT_SUBTYPE_{PCM,IEEE_FLOAT} GUIDs.
const KS_GUID_TAIL: [u8; 14] = [
    0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80, 0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71,
];
// Tail of the ambisonic B-format subtype GUIDs used by .amb files.
const AMB_GUID_TAIL: [u8; 14] = [
    0x00, 0x00, 0x21, 0x07, 0xD3, 0x11, 0x86, 0x44, 0xC8, 0xC1, 0xCA, 0x00, 0x00, 0x00,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavInfo {
    pub format: SampleFormat,
    pub extensible: bool,
    /// Subformat GUID carries the ambisonic B-format signature.
    pub ambisonic_guid: bool,
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&self, offset: usize, len: usize, what: &str) -> Result<&'a [u8]> {
        self.bytes
            .get(offset..offset.saturating_add(len))
            .ok_or_else(|| AmbiError::parse(offset as u64, format!("truncated {what}")))
    }

    fn u16(&self, offset: usize) -> Result<u16> {
        let b = self.take(offset, 2, "field")?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&self, offset: usize) -> Result<u32> {
        let b = self.take(offset, 4, "field")?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn parse_wav(bytes: &[u8]) -> Result<(AudioData, WavInfo)> {
    let r = Reader { bytes };
    if r.take(0, 4, "RIFF header")? != b"RIFF" {
        return Err(AmbiError::parse(0, "missing 'RIFF' magic"));
    }
    if r.take(8, 4, "RIFF header")? != b"WAVE" {
        return Err(AmbiError::parse(8, "missing 'WAVE' form type"));
    }

    let mut fmt: Option<(u16, u32, WavInfo)> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = r.take(pos, 4, "chunk id")?;
        let size = r.u32(pos + 4)? as usize;
        let body = pos + 8;
        if body.checked_add(size).is_none_or(|end| end > bytes.len()) {
            return Err(AmbiError::parse(
                pos as u64,
                format!(
                    "chunk '{}' claims {size} bytes, only {} remain",
                    String::from_utf8_lossy(id),
                    bytes.len() - body
                ),
            ));
        }
        match id {
            b"fmt " => fmt = Some(parse_fmt(&r, body, size)?),
            b"data" => {
                let (channels, sample_rate, info) = fmt.ok_or_else(|| {
                    AmbiError::parse(pos as u64, "'data' chunk before 'fmt ' chunk")
                })?;
                let block = info.format.bytes() * channels as usize;
                if !size.is_multiple_of(block) {
                    return Err(AmbiError::parse(
                        pos as u64,
                        format!("data size {size} is not a multiple of the {block}-byte frame"),
                    ));
                }
                let data = &bytes[body..body + size];
                let channels = deinterleave(data, channels as usize, info.format, Endian::Little);
                return Ok((AudioData::new(sample_rate, channels)?, info));
            }
            _ => {}
        }
        pos = body + size + (size & 1);
    }
    Err(AmbiError::parse(
        bytes.len() as u64,
        if fmt.is_some() {
            "no 'data' chunk"
        } else {
            "no 'fmt ' chunk"
        },
    ))
}

fn parse_fmt(r: &Reader<'_>, body: usize, size: usize) -> Result<(u16, u32, WavInfo)> {
    if size < 16 {
        return Err(AmbiError::parse(body as u64, format!("'fmt ' chunk too short ({size} bytes)")));
    }
    let tag = r.u16(body)?;
    let channels = r.u16(body + 2)?;
    let sample_rate = r.u32(body + 4)?;
    let block_align = r.u16(body + 12)?;
    let bits = r.u16(body + 14)?;
    if channels == 0 {
        return Err(AmbiError::parse(body as u64 + 2, "zero channels"));
    }
    let (code, extensible, ambisonic_guid) = match tag {
        FORMAT_PCM | FORMAT_FLOAT => (tag, false, false),
        FORMAT_EXTENSIBLE => {
            if size < 40 {
                return Err(AmbiError::parse(
                    body as u64,
                    format!("extensible 'fmt ' chunk too short ({size} bytes)"),
                ));
            }
            let guid = r.take(body + 24, 16, "subformat GUID")?;
            let code = u16::from_le_bytes([guid[0], guid[1]]);
            (code, true, guid[2..] == AMB_GUID_TAIL)
        }
        other => {
            return Err(AmbiError::UnsupportedFormat(format!(
                "WAV format tag 0x{other:04X} is not PCM or IEEE float"
            )))
        }
    };
    let format = match code {
        FORMAT_PCM => SampleFormat::from_parts(false, bits as u32),
        FORMAT_FLOAT => SampleFormat::from_parts(true, bits as u32),
        _ => None,
    }
    .ok_or_else(|| {
        AmbiError::UnsupportedFormat(format!("WAV codec 0x{code:04X} with {bits} bits per sample"))
    })?;
    if block_align as usize != format.bytes() * channels as usize {
        return Err(AmbiError::parse(
            body as u64 + 12,
            format!("block align {block_align} disagrees with {channels} x {bits}-bit samples"),
        ));
    }
    Ok((
        channels,
        sample_rate,
        WavInfo {
            format,
            extensible,
            ambisonic_guid,
        },
    ))
}

/// Serializes `audio`. Multichannel, wide or ambisonic-tagged output uses
/// WAVE_FORMAT_EXTENSIBLE.
pub fn encode_wav(audio: &AudioData, format: SampleFormat, ambisonic_guid: bool) -> Result<Vec<u8>> {
    let channels = u16::try_from(audio.channel_count())
        .map_err(|_| AmbiError::UnsupportedFormat("too many channels for WAV".into()))?;
    let data = interleave(&audio.channels, format, Endian::Little);
    let data_len = u32::try_from(data.len())
        .map_err(|_| AmbiError::UnsupportedFormat("data exceeds 4 GiB WAV limit".into()))?;
    let extensible = channels > 2 || format.bits() > 16 || ambisonic_guid;
    let code = if format.is_float() { FORMAT_FLOAT } else { FORMAT_PCM };
    let block_align = channels * format.bytes() as u16;

    let mut fmt = Vec::with_capacity(40);
    fmt.extend_from_slice(&(if extensible { FORMAT_EXTENSIBLE } else { code }).to_le_bytes());
    fmt.extend_from_slice(&channels.to_le_bytes());
    fmt.extend_from_slice(&audio.sample_rate.to_le_bytes());
    fmt.extend_from_slice(&(audio.sample_rate * block_align as u32).to_le_bytes());
    fmt.extend_from_slice(&block_align.to_le_bytes());
    fmt.extend_from_slice(&format.bits().to_le_bytes());
    if extensible {
        fmt.extend_from_slice(&22u16.to_le_bytes());
        fmt.extend_from_slice(&format.bits().to_le_bytes());
        fmt.extend_from_slice(&0u32.to_le_bytes());
        fmt.extend_from_slice(&code.to_le_bytes());
        fmt.extend_from_slice(if ambisonic_guid { &AMB_GUID_TAIL } else { &KS_GUID_TAIL });
    }

    let pad = (data.len() & 1) as u32;
    let riff_len = 4 + 8 + fmt.len() as u32 + 8 + data_len + pad;
    let mut out = Vec::with_capacity(riff_len as usize + 8);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&riff_len.to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&(fmt.len() as u32).to_le_bytes());
    out.extend_from_slice(&fmt);
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    out.extend_from_slice(&data);
    if pad == 1 {
        out.push(0);
    }
    Ok(out)
}
