//! Scalar and indexing utilities shared by every other module.
//!
//! Spin words are ranked in binary-sort order: the first spin is the least
//! significant bit and `+1` maps to bit `0`, so the all-up word has rank 0
//! and flipping only the first spin gives rank 1.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    #[inline]
    pub fn sign(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    /// Binary-sort bit: 0 for `+1`, 1 for `-1`.
    #[inline]
    pub fn bit(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    #[inline]
    pub fn from_bit(bit: usize) -> Spin {
        if bit & 1 == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    pub fn from_sign(sign: i32) -> Result<Spin> {
        match sign {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            other => Err(Error::domain(format!("spin must be +1 or -1, got {other}"))),
        }
    }

    #[inline]
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl std::ops::Neg for Spin {
    type Output = Spin;
    fn neg(self) -> Spin {
        self.flipped()
    }
}

/// Standard normal CDF, Φ(x) = erfc(−x/√2)/2.
///
/// Going through the complementary error function keeps both tails accurate
/// and makes Φ(x) + Φ(−x) = 1 hold to rounding.
pub fn gauss_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "gauss_cdf needs a finite argument, got {x}"
        )));
    }
    Ok(phi(x))
}

/// Infallible Φ for arguments already known to be finite.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Binary-sort rank of a spin word (first spin least significant).
pub fn spin_rank(word: &[Spin]) -> Result<usize> {
    if word.is_empty() {
        return Err(Error::domain("cannot rank an empty spin word"));
    }
    if word.len() >= usize::BITS as usize {
        return Err(Error::domain(format!(
            "spin word of length {} does not fit a rank",
            word.len()
        )));
    }
    Ok(word
        .iter()
        .enumerate()
        .fold(0usize, |acc, (k, s)| acc | (s.bit() << k)))
}

/// Inverse of [`spin_rank`].
pub fn rank_to_spins(rank: usize, length: usize) -> Result<Vec<Spin>> {
    if length == 0 || length >= usize::BITS as usize {
        return Err(Error::domain(format!("word length {length} out of range")));
    }
    if rank >> length != 0 {
        return Err(Error::domain(format!(
            "rank {rank} out of range for length {length}"
        )));
    }
    Ok((0..length).map(|k| Spin::from_bit(rank >> k)).collect())
}

/// Spin value (±1) of position `k` inside a ranked word.
#[inline]
pub(crate) fn spin_at(rank: usize, k: usize) -> f64 {
    1.0 - 2.0 * ((rank >> k) & 1) as f64
}

/// `x·ln x` with the continuous extension `0·ln 0 = 0`.
#[inline]
pub fn x_log_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
