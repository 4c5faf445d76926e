//! Uniform scalar quantizer.
//!
//! `2^bits` cells of width `step` starting at `offset`; values outside the
//! covered range fall into the end cells, which are half-infinite when used
//! as consistency constraints.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Quantizer design spans this many standard deviations each side of the
/// mean.
pub const RANGE_SIGMAS: f64 = 3.0;

pub const MAX_BITS: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub bits: u8,
    pub step: f64,
    pub offset: f64,
}

impl QuantizerSpec {
    /// Mid-rise quantizer over `mean +- 3 std` of `y`.
    pub fn design<T: Scalar>(y: &[T], bits: u8) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::invalid(
                "quantizer",
                format!("bits {bits} not in 1..={MAX_BITS}"),
            ));
        }
        if y.is_empty() {
            return Err(Error::invalid("quantizer", "no measurements"));
        }
        let n = y.len() as f64;
        let mean = y.iter().map(|v| v.as_f64()).sum::<f64>() / n;
        let var = y.iter().map(|v| (v.as_f64() - mean).powi(2)).sum::<f64>() / n;
        let levels = (1u64 << bits) as f64;
        let sigma = var.sqrt();
        let step = if sigma > 0.0 {
            2.0 * RANGE_SIGMAS * sigma / levels
        } else {
            1.0
        };
        let q = QuantizerSpec {
            bits,
            step,
            offset: mean - 0.5 * levels * step,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits == 0 || self.bits > MAX_BITS {
            return Err(Error::invalid(
                "quantizer",
                format!("bits {} not in 1..={MAX_BITS}", self.bits),
            ));
        }
        if !(self.step > 0.0 && self.step.is_finite() && self.offset.is_finite()) {
            return Err(Error::invalid(
                "quantizer",
                format!("step {} / offset {}", self.step, self.offset),
            ));
        }
        Ok(())
    }

    pub fn levels(&self) -> u32 {
        1u32 << self.bits
    }

    pub fn index(&self, v: f64) -> u32 {
        let top = (self.levels() - 1) as f64;
        let i = ((v - self.offset) / self.step).floor();
        if i.is_nan() {
            return 0;
        }
        i.clamp(0.0, top) as u32
    }

    /// Cell midpoint.
    pub fn dequantize(&self, i: u32) -> f64 {
        self.offset + (i as f64 + 0.5) * self.step
    }

    /// Cell bounds; the end cells extend to infinity.
    pub fn cell(&self, i: u32) -> (f64, f64) {
        let lo = if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.offset + i as f64 * self.step
        };
        let hi = if i + 1 >= self.levels() {
            f64::INFINITY
        } else {
            self.offset + (i as f64 + 1.0) * self.step
        };
        (lo, hi)
    }

    pub fn quantize<T: Scalar>(&self, y: &[T]) -> Vec<u32> {
        y.iter().map(|v| self.index(v.as_f64())).collect()
    }

    pub fn dequantize_all<T: Scalar>(&self, idx: &[u32]) -> Vec<T> {
        idx.iter().map(|&i| T::of(self.dequantize(i))).collect()
    }

    /// `Q` followed by dequantization.
    pub fn requantize<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        y.iter()
            .map(|v| T::of(self.dequantize(self.index(v.as_f64()))))
            .collect()
    }
}
