//! Ambisonic buffers, audio containers (WAV, CAF, AMB) and channel conventions.

mod buffer;
mod caf;
mod convention;
mod pcm;
mod wav;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use buffer::{AmbisonicBuffer, AudioData, ChannelOrdering, Convention};
pub use caf::{encode_caf, parse_caf};
pub use convention::convert_convention;
pub use pcm::SampleFormat;
pub use wav::{encode_wav, parse_wav, WavInfo};

use crate::error::{AmbiError, Result};
use crate::sh::{order_from_channels, Normalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Container {
    Wav,
    Caf,
    Amb,
}

impl Container {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("wav") => Ok(Container::Wav),
            Some("caf") => Ok(Container::Caf),
            Some("amb") => Ok(Container::Amb),
            _ => Err(AmbiError::UnsupportedFormat(format!(
                "cannot infer container from '{}' (expected .wav, .caf or .amb)",
                path.display()
            ))),
        }
    }

    /// Convention implied by the container alone, if any.
    pub fn default_convention(&self) -> Option<Convention> {
        match self {
            Container::Wav => None,
            Container::Caf => Some(Convention::ACN_SN3D),
            Container::Amb => Some(Convention::FUMA),
        }
    }
}

/// Target description for [`write_audio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormatMeta {
    pub container: Container,
    pub convention: Convention,
    pub order: usize,
    pub sample_format: SampleFormat,
}

impl FormatMeta {
    /// Container from the extension, its default convention (ACN/SN3D for WAV).
    pub fn for_path(path: &Path, order: usize) -> Result<Self> {
        let container = Container::from_path(path)?;
        Ok(FormatMeta {
            container,
            convention: container.default_convention().unwrap_or(Convention::ACN_SN3D),
            order,
            sample_format: SampleFormat::Float32,
        })
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_sample_format(mut self, format: SampleFormat) -> Self {
        self.sample_format = format;
        self
    }
}

/// Contents of the `<stem>.meta.json` file stored next to plain WAV files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub order: usize,
    pub ordering: ChannelOrdering,
    pub normalization: Normalization,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub horizontal: bool,
}

impl Sidecar {
    pub fn convention(&self) -> Result<Convention> {
        Convention::new(self.ordering, self.normalization)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

pub fn read_sidecar(path: &Path) -> Result<Option<Sidecar>> {
    let side = sidecar_path(path);
    if !side.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&side)?;
    Ok(Some(serde_json::from_str(&text)?))
}

pub fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    fs::write(sidecar_path(path), serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok(())
}

/// Reads any supported container as plain audio.
pub fn read_pcm(path: &Path) -> Result<AudioData> {
    let bytes = fs::read(path)?;
    match Container::from_path(path)? {
        Container::Caf => parse_caf(&bytes),
        Container::Wav | Container::Amb => Ok(parse_wav(&bytes)?.0),
    }
}

/// Writes plain audio; the container follows the extension.
pub fn write_pcm(audio: &AudioData, path: &Path, format: SampleFormat) -> Result<()> {
    let bytes = match Container::from_path(path)? {
        Container::Caf => encode_caf(audio, format),
        Container::Wav | Container::Amb => encode_wav(audio, format, false)?,
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads an ambisonic file. The convention comes from `hint`, else the
/// sidecar, else the container default; a plain WAV with neither is an error.
pub fn read_audio(path: &Path, hint: Option<Convention>) -> Result<AmbisonicBuffer> {
    let container = Container::from_path(path)?;
    let audio = read_pcm(path)?;
    let order = order_from_channels(audio.channel_count()).ok_or_else(|| {
        AmbiError::MalformedSignal(format!(
            "channel count {} is not (N+1)^2",
            audio.channel_count()
        ))
    })?;
    let sidecar = if container == Container::Amb {
        None
    } else {
        read_sidecar(path)?
    };
    let convention = match (hint, sidecar, container.default_convention()) {
        (Some(c), _, _) => c,
        (None, Some(s), _) => s.convention()?,
        (None, None, Some(c)) => c,
        (None, None, None) => {
            return Err(AmbiError::invalid(format!(
                "'{}' carries no ambisonic metadata; pass a convention or add {}",
                path.display(),
                sidecar_path(path).display()
            )))
        }
    };
    if container == Container::Amb && convention != Convention::FUMA {
        return Err(AmbiError::UnsupportedFormat(format!(
            ".amb files are FuMa, requested {convention}"
        )));
    }
    if let Some(s) = sidecar {
        if hint.is_none() && s.order != order {
            return Err(AmbiError::MalformedSignal(format!(
                "sidecar declares order {} but file has {} channels",
                s.order,
                audio.channel_count()
            )));
        }
    }
    AmbisonicBuffer::from_audio(audio, convention)
}

/// Writes `buffer` converted to `target.convention`.
pub fn write_audio(buffer: &AmbisonicBuffer, path: &Path, target: &FormatMeta) -> Result<()> {
    if target.order != buffer.order() {
        return Err(AmbiError::invalid(format!(
            "target order {} differs from buffer order {}",
            target.order,
            buffer.order()
        )));
    }
    if target.container == Container::Amb {
        if buffer.order() > 3 {
            return Err(AmbiError::UnsupportedFormat(format!(
                "AMB is limited to order 3, buffer has order {}",
                buffer.order()
            )));
        }
        if target.convention != Convention::FUMA {
            return Err(AmbiError::UnsupportedFormat(format!(
                "AMB requires FuMa convention, requested {}",
                target.convention
            )));
        }
    }
    let converted = convert_convention(buffer, target.convention)?;
    let sidecar = Sidecar {
        order: converted.order(),
        ordering: target.convention.ordering(),
        normalization: target.convention.normalization(),
        horizontal: false,
    };
    let audio = converted.into_audio();
    let bytes = match target.container {
        Container::Wav => encode_wav(&audio, target.sample_format, false)?,
        Container::Amb => encode_wav(&audio, target.sample_format, true)?,
        Container::Caf => encode_caf(&audio, target.sample_format),
    };
    fs::write(path, bytes)?;
    match target.container {
        Container::Wav => write_sidecar(path, &sidecar)?,
        Container::Caf if target.convention != Convention::ACN_SN3D => {
            write_sidecar(path, &sidecar)?
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buffer(order: usize) -> AmbisonicBuffer {
        let n = (order + 1) * (order + 1);
        let chans = (0..n)
            .map(|c| (0..17).map(|i| ((c * 13 + i * 5) % 23) as f64 / 23.0 - 0.5).collect())
            .collect();
        AmbisonicBuffer::canonical(48000, chans).unwrap()
    }

    #[test]
    fn wav_without_metadata_needs_hint() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.wav");
        write_pcm(&buffer(1).into_audio(), &p, SampleFormat::Float32).unwrap();
        assert!(matches!(read_audio(&p, None), Err(AmbiError::InvalidArgument(_))));
        let b = read_audio(&p, Some(Convention::ACN_SN3D)).unwrap();
        assert_eq!(b.order(), 1);
    }

    #[test]
    fn five_channel_wav_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("five.wav");
        let audio = AudioData::new(48000, vec![vec![0.0; 8]; 5]).unwrap();
        write_pcm(&audio, &p, SampleFormat::Float32).unwrap();
        assert!(matches!(
            read_audio(&p, Some(Convention::ACN_SN3D)),
            Err(AmbiError::MalformedSignal(_))
        ));
    }

    #[test]
    fn sidecar_supplies_convention() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let b = buffer(2);
        let meta = FormatMeta::for_path(&p, 2).unwrap().with_convention(Convention::ACN_N3D);
        write_audio(&b, &p, &meta).unwrap();
        assert!(dir.path().join("s.meta.json").exists());
        let back = read_audio(&p, None).unwrap();
        assert_eq!(back.convention(), Convention::ACN_N3D);
        let canon = back.to_canonical().unwrap();
        for (x, y) in b.channels().iter().flatten().zip(canon.channels().iter().flatten()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn caf_defaults_to_ambix_and_amb_to_fuma() {
        let dir = tempfile::tempdir().unwrap();
        let caf = dir.path().join("a.caf");
        write_audio(&buffer(1), &caf, &FormatMeta::for_path(&caf, 1).unwrap()).unwrap();
        assert_eq!(&fs::read(&caf).unwrap()[..4], b"caff");
        assert!(!dir.path().join("a.meta.json").exists());
        assert_eq!(read_audio(&caf, None).unwrap().convention(), Convention::ACN_SN3D);

        let amb = dir.path().join("b.amb");
        write_audio(&buffer(3), &amb, &FormatMeta::for_path(&amb, 3).unwrap()).unwrap();
        let back = read_audio(&amb, None).unwrap();
        assert_eq!(back.convention(), Convention::FUMA);
        let (_, info) = parse_wav(&fs::read(&amb).unwrap()).unwrap();
        assert!(info.ambisonic_guid);
    }

    #[test]
    fn amb_refuses_fourth_order() {
        let dir = tempfile::tempdir().unwrap();
        let amb = dir.path().join("c.amb");
        let meta = FormatMeta::for_path(&amb, 4).unwrap();
        assert!(matches!(
            write_audio(&buffer(4), &amb, &meta),
            Err(AmbiError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn seventh_order_wav_has_64_channels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("o7.wav");
        write_audio(&buffer(7), &p, &FormatMeta::for_path(&p, 7).unwrap()).unwrap();
        let audio = read_pcm(&p).unwrap();
        assert_eq!(audio.channel_count(), 64);
    }

    #[test]
    fn unknown_extension() {
        assert!(matches!(
            Container::from_path(Path::new("x.mp3")),
            Err(AmbiError::UnsupportedFormat(_))
        ));
    }
}
