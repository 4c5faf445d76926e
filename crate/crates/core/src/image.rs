//! Row-major single channel pixel grids.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Image dimensions: `rows` is N1 (height), `cols` is N2 (width).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
}

impl Dims {
    pub const fn new(rows: usize, cols: usize) -> Self {
        Dims { rows, cols }
    }

    #[inline]
    pub const fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, x: usize, y: usize) -> usize {
        y * self.cols + x
    }

    /// `(x, y)` = (column, row) of a linear index.
    #[inline]
    pub const fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cols, idx / self.cols)
    }

    /// Unordered 4-neighbour pairs, each listed once (right and down links).
    pub fn neighbor_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| {
            let (x, y) = self.coords(i);
            let right = (x + 1 < self.cols).then(|| (i, i + 1));
            let down = (y + 1 < self.rows).then(|| (i, i + self.cols));
            right.into_iter().chain(down)
        })
    }

    pub fn neighbor_pair_count(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        self.rows * (self.cols - 1) + (self.rows - 1) * self.cols
    }

    pub(crate) fn check(&self, other: Dims) -> Result<()> {
        if *self != other {
            return Err(Error::DimMismatch {
                expected: *self,
                got: other,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    dims: Dims,
    data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn zeros(dims: Dims) -> Self {
        Image {
            dims,
            data: vec![T::zero(); dims.len()],
        }
    }

    pub fn filled(dims: Dims, v: T) -> Self {
        Image {
            dims,
            data: vec![v; dims.len()],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<T>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::invalid(
                "image",
                format!("{} samples for {} grid", data.len(), dims),
            ));
        }
        Ok(Image { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for y in 0..dims.rows {
            for x in 0..dims.cols {
                data.push(f(x, y));
            }
        }
        Image { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.dims.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.dims.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[self.dims.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        let i = self.dims.index(x, y);
        self.data[i] = v;
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Image<U> {
        Image {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn energy(&self) -> T {
        crate::scalar::norm_sq(&self.data)
    }

    pub fn max_value(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    /// `self + a * other`
    pub fn scaled_add(&mut self, a: T, other: &Image<T>) {
        debug_assert_eq!(self.dims, other.dims);
        crate::scalar::axpy(a, &other.data, &mut self.data);
    }

    /// Clamps to `[0, 255]` and rounds to 8-bit levels.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| v.as_f64().round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn cast<U: Scalar>(&self) -> Image<U> {
        self.map(|v| U::of(v.as_f64()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_pairs_cover_grid_once() {
        let d = Dims::new(3, 4);
        let pairs: Vec<_> = d.neighbor_pairs().collect();
        assert_eq!(pairs.len(), d.neighbor_pair_count());
        assert_eq!(pairs.len(), 3 * 3 + 2 * 4);
        assert!(pairs.iter().all(|&(a, b)| a < b));
    }

    #[test]
    fn coords_round_trip() {
        let d = Dims::new(5, 7);
        for i in 0..d.len() {
            let (x, y) = d.coords(i);
            assert_eq!(d.index(x, y), i);
        }
    }
}
