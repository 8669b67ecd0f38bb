use std::fmt;
use std::str::FromStr;

use crate::error::{AmbiError, Result};
use crate::io::AmbisonicBuffer;
use crate::sh::{mode_from_acn, ModeIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MirrorPlane {
    /// `y -> -y`
    LeftRight,
    /// `x -> -x`
    FrontBack,
    /// `z -> -z`
    TopBottom,
}

impl MirrorPlane {
    /// Whether mirroring negates the channel of `mode`.
    pub fn flips(&self, mode: ModeIndex) -> bool {
        let (n, m) = (mode.n() as isize, mode.m());
        match self {
            MirrorPlane::LeftRight => m < 0,
            MirrorPlane::TopBottom => (n + m).rem_euclid(2) == 1,
            MirrorPlane::FrontBack => {
                if m >= 0 {
                    m % 2 == 1
                } else {
                    m % 2 == 0
                }
            }
        }
    }
}

impl fmt::Display for MirrorPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MirrorPlane::LeftRight => "left-right",
            MirrorPlane::FrontBack => "front-back",
            MirrorPlane::TopBottom => "top-bottom",
        })
    }
}

impl FromStr for MirrorPlane {
    type Err = AmbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "left-right" | "leftright" | "y" => Ok(MirrorPlane::LeftRight),
            "fb" | "front-back" | "frontback" | "x" => Ok(MirrorPlane::FrontBack),
            "tb" | "top-bottom" | "topbottom" | "z" => Ok(MirrorPlane::TopBottom),
            other => Err(AmbiError::invalid(format!("unknown mirror plane '{other}'"))),
        }
    }
}

/// Reflects the scene through `plane` by per-channel sign flips.
pub fn mirror(buffer: &AmbisonicBuffer, plane: MirrorPlane) -> Result<AmbisonicBuffer> {
    buffer.require_canonical()?;
    let channels = buffer
        .channels()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if plane.flips(mode_from_acn(k)) {
                c.iter().map(|v| -v).collect()
            } else {
                c.clone()
            }
        })
        .collect();
    buffer.with_channels(channels)
}
