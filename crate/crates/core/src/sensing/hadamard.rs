//! Scrambled block Walsh-Hadamard sensing operator.
//!
//! `Phi = S H P`: `P` permutes the pixels (row-major vectorisation), `H`
//! applies orthonormal Walsh-Hadamard transforms to consecutive blocks of
//! the permuted sequence and `S` keeps `M` of the resulting coefficients.
//! Blocks have `block_size^2` entries; a trailing remainder is split into
//! descending power-of-two blocks, so `H` is orthonormal for any pixel count
//! and the rows of `Phi` are orthonormal.

use super::prng::PermutationRng;
use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::kv::KvConfig;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensingSpec {
    pub dims: Dims,
    pub block_size: usize,
    pub measurements: usize,
    pub seed: u64,
}

impl SensingSpec {
    pub const DEFAULT_BLOCK_SIZE: usize = 8;

    pub fn new(dims: Dims, measurements: usize, seed: u64) -> Self {
        SensingSpec {
            dims,
            block_size: Self::DEFAULT_BLOCK_SIZE,
            measurements,
            seed,
        }
    }

    /// `M = floor(rate * N)`.
    pub fn from_rate(dims: Dims, rate: f64, seed: u64) -> Result<Self> {
        let s = SensingSpec::new(dims, measurement_count(rate, dims.len())?, seed);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::invalid("sensing", "empty image"));
        }
        if !self.block_size.is_power_of_two() {
            return Err(Error::invalid(
                "sensing",
                format!("block size {} is not a power of two", self.block_size),
            ));
        }
        if self.measurements == 0 || self.measurements > self.dims.len() {
            return Err(Error::invalid(
                "sensing",
                format!("measurement count {} not in 1..={}", self.measurements, self.dims.len()),
            ));
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        self.measurements as f64 / self.dims.len() as f64
    }

    pub fn write_kv(&self, kv: &mut KvConfig) {
        kv.set("sensing.block_size", self.block_size);
        kv.set("sensing.measurements", self.measurements);
        kv.set("sensing.seed", self.seed);
    }
}

/// `floor(rate * n)`; the rate must lie in `(0, 1]` and give at least one
/// measurement.
pub fn measurement_count(rate: f64, n: usize) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::invalid("measurement rate", format!("{rate} not in (0, 1]")));
    }
    let m = (rate * n as f64 + 1e-9).floor() as usize;
    if m == 0 {
        return Err(Error::invalid(
            "measurement rate",
            format!("{rate} gives no measurements for {n} pixels"),
        ));
    }
    Ok(m.min(n))
}

#[derive(Debug, Clone)]
pub struct SensingOperator {
    spec: SensingSpec,
    /// Position `i` of the scrambled sequence holds pixel `perm[i]`.
    perm: Vec<usize>,
    blocks: Vec<(usize, usize)>,
    /// Kept transform coefficients, ascending.
    rows: Vec<usize>,
}

impl SensingOperator {
    pub fn new(spec: SensingSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.dims.len();
        let mut rng = PermutationRng::new(spec.seed);
        let perm = rng.permutation(n);
        let mut rows = rng.permutation(n);
        rows.truncate(spec.measurements);
        rows.sort_unstable();
        Ok(SensingOperator {
            spec,
            perm,
            blocks: blocks(n, spec.block_size * spec.block_size),
            rows,
        })
    }

    pub fn spec(&self) -> &SensingSpec {
        &self.spec
    }

    pub fn dims(&self) -> Dims {
        self.spec.dims
    }

    pub fn measurements(&self) -> usize {
        self.rows.len()
    }

    /// `y = Phi x`.
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.perm.len(), "sensing input length");
        let mut seq: Vec<T> = self.perm.iter().map(|&p| x[p]).collect();
        for &(start, len) in &self.blocks {
            fwht(&mut seq[start..start + len]);
        }
        self.rows.iter().map(|&r| seq[r]).collect()
    }

    pub fn sense<T: Scalar>(&self, image: &Image<T>) -> Result<Vec<T>> {
        self.spec.dims.check(image.dims())?;
        Ok(self.apply(image.as_slice()))
    }

    /// `Phi^T y`.
    pub fn adjoint<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.rows.len(), "measurement length");
        let mut seq = vec![T::zero(); self.perm.len()];
        for (&r, &v) in self.rows.iter().zip(y) {
            seq[r] = v;
        }
        for &(start, len) in &self.blocks {
            fwht(&mut seq[start..start + len]);
        }
        let mut x = vec![T::zero(); seq.len()];
        for (&p, v) in self.perm.iter().zip(seq) {
            x[p] = v;
        }
        x
    }
}

fn blocks(n: usize, block: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while n - start >= block {
        out.push((start, block));
        start += block;
    }
    let mut len = block;
    while start < n {
        len /= 2;
        if n - start >= len {
            out.push((start, len));
            start += len;
        }
    }
    out
}

/// In-place orthonormal Walsh-Hadamard transform (natural order).
fn fwht<T: Scalar>(v: &mut [T]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = T::of((n as f64).sqrt().recip());
    v.iter_mut().for_each(|x| *x = *x * s);
}
