use std::fmt;

use crate::error::{AmbiError, Result};

/// Identity `(n, m)` of a single spherical-harmonic mode, `|m| <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    n: usize,
    m: isize,
}

impl ModeIndex {
    pub fn new(n: usize, m: isize) -> Result<Self> {
        if m.unsigned_abs() > n {
            return Err(AmbiError::invalid(format!(
                "mode (n={n}, m={m}) violates |m| <= n"
            )));
        }
        Ok(ModeIndex { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> isize {
        self.m
    }

    pub fn acn(&self) -> usize {
        acn_index(*self)
    }

    /// Iterates all modes up to and including `order`, in ACN order.
    pub fn all(order: usize) -> impl Iterator<Item = ModeIndex> {
        (0..channel_count(order)).map(mode_from_acn)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.m)
    }
}

/// Number of channels of an order-`order` signal: `(order + 1)^2`.
pub fn channel_count(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// Inverse of [`channel_count`]; `None` when `channels` is not a perfect square.
pub fn order_from_channels(channels: usize) -> Option<usize> {
    if channels == 0 {
        return None;
    }
    let root = isqrt(channels);
    (root * root == channels).then(|| root - 1)
}

pub fn acn_index(mode: ModeIndex) -> usize {
    let n = mode.n as isize;
    (n * n + n + mode.m) as usize
}

pub fn mode_from_acn(k: usize) -> ModeIndex {
    let n = isqrt(k);
    let m = k as isize - (n * n + n) as isize;
    ModeIndex { n, m }
}

fn isqrt(v: usize) -> usize {
    let mut r = (v as f64).sqrt() as usize;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}
