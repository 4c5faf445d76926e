//! Image prediction by warping, and prediction quality metrics.
//!
//! Fields produced by the correlation estimate are forward fields on the
//! reference grid: a reference pixel `z` moves to `z + m(z)`. `warp` samples
//! backwards: `out(z) = ref(z + b(z))` with bilinear interpolation and border
//! clamping. `backward_field` turns a forward field into a backward one on
//! the target grid by splatting every reference pixel to its rounded target
//! position; where several pixels land on one target the larger motion wins.
//! Targets nobody lands on are disoccluded: prediction copies the value of
//! the nearest filled pixel in the same row, taking the side that moves
//! less.

use crate::error::Result;
use crate::image::{Dims, Image};
use crate::scalar::Scalar;

/// Horizontal and vertical per-pixel displacement, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    pub mh: Image<f64>,
    pub mv: Image<f64>,
}

impl MotionField {
    pub fn zeros(dims: Dims) -> Self {
        MotionField {
            mh: Image::zeros(dims),
            mv: Image::zeros(dims),
        }
    }

    pub fn constant(dims: Dims, h: f64, v: f64) -> Self {
        MotionField {
            mh: Image::filled(dims, h),
            mv: Image::filled(dims, v),
        }
    }

    pub fn horizontal(mh: Image<f64>) -> Self {
        let dims = mh.dims();
        MotionField {
            mh,
            mv: Image::zeros(dims),
        }
    }

    pub fn dims(&self) -> Dims {
        self.mh.dims()
    }

    #[inline]
    pub fn at(&self, i: usize) -> (f64, f64) {
        (self.mh.as_slice()[i], self.mv.as_slice()[i])
    }

    #[inline]
    pub fn set(&mut self, i: usize, (h, v): (f64, f64)) {
        self.mh.as_mut_slice()[i] = h;
        self.mv.as_mut_slice()[i] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.mh.as_slice().iter().chain(self.mv.as_slice()).all(|&v| v == 0.0)
    }
}

/// `out(z) = reference(z + b(z))`, bilinear, clamped to the border.
pub fn warp<T: Scalar>(reference: &Image<T>, field: &MotionField) -> Result<Image<T>> {
    let dims = reference.dims();
    dims.check(field.dims())?;
    let (w, h) = (dims.cols as f64 - 1.0, dims.rows as f64 - 1.0);
    let mut out = Image::zeros(dims);
    for y in 0..dims.rows {
        for x in 0..dims.cols {
            let (dh, dv) = field.at(dims.index(x, y));
            if dh == 0.0 && dv == 0.0 {
                out.set(x, y, reference.get(x, y));
                continue;
            }
            let sx = (x as f64 + dh).clamp(0.0, w);
            let sy = (y as f64 + dv).clamp(0.0, h);
            out.set(x, y, bilinear(reference, sx, sy));
        }
    }
    Ok(out)
}

fn bilinear<T: Scalar>(img: &Image<T>, x: f64, y: f64) -> T {
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(img.cols() - 1);
    let y1 = (y0 + 1).min(img.rows() - 1);
    let fx = T::of(x - x0 as f64);
    let fy = T::of(y - y0 as f64);
    let one = T::one();
    let top = img.get(x0, y0) * (one - fx) + img.get(x1, y0) * fx;
    let bottom = img.get(x0, y1) * (one - fx) + img.get(x1, y1) * fx;
    top * (one - fy) + bottom * fy
}

/// Backward field on the target grid equivalent to the forward `field`;
/// disoccluded targets take the field of their fill source.
pub fn backward_field(field: &MotionField) -> MotionField {
    splat(field).0
}

/// Backward field plus, for every disoccluded target, the pixel it copies.
fn splat(field: &MotionField) -> (MotionField, Vec<(usize, usize)>) {
    let dims = field.dims();
    let mut out = MotionField::zeros(dims);
    let mut strength = vec![f64::NEG_INFINITY; dims.len()];
    for i in 0..dims.len() {
        let (h, v) = field.at(i);
        let (x, y) = dims.coords(i);
        let tx = (x as f64 + h).round();
        let ty = (y as f64 + v).round();
        if tx < 0.0 || ty < 0.0 || tx >= dims.cols as f64 || ty >= dims.rows as f64 {
            continue;
        }
        let t = dims.index(tx as usize, ty as usize);
        let s = h.abs() + v.abs();
        if s > strength[t] {
            strength[t] = s;
            out.set(t, (-h, -v));
        }
    }
    let mut holes = Vec::new();
    for y in 0..dims.rows {
        let row = y * dims.cols;
        let filled: Vec<usize> = (0..dims.cols)
            .filter(|&x| strength[row + x] > f64::NEG_INFINITY)
            .collect();
        if filled.is_empty() {
            continue;
        }
        let mut next = 0;
        for x in 0..dims.cols {
            if strength[row + x] > f64::NEG_INFINITY {
                continue;
            }
            while next < filled.len() && filled[next] < x {
                next += 1;
            }
            let left = next.checked_sub(1).map(|j| filled[j]);
            let right = filled.get(next).copied();
            let src = match (left, right) {
                (Some(l), Some(r)) => {
                    if strength[row + r] < strength[row + l] {
                        r
                    } else {
                        l
                    }
                }
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => unreachable!(),
            };
            let v = out.at(row + src);
            out.set(row + x, v);
            holes.push((row + x, row + src));
        }
    }
    (out, holes)
}

/// Target image predicted from `reference` moved by a forward field.
pub fn predict_forward<T: Scalar>(reference: &Image<T>, field: &MotionField) -> Result<Image<T>> {
    reference.dims().check(field.dims())?;
    if field.is_zero() {
        return Ok(reference.clone());
    }
    let (back, holes) = splat(field);
    let mut out = warp(reference, &back)?;
    let data = out.as_mut_slice();
    for (hole, src) in holes {
        data[hole] = data[src];
    }
    Ok(out)
}

/// Peak signal-to-noise ratio for 8-bit intensities; `+inf` for identical
/// images.
pub fn psnr<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    a.dims().check(b.dims())?;
    let mse = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2))
        .sum::<f64>()
        / a.dims().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Fraction of pixels whose horizontal displacement is off by at least one
/// pixel.
pub fn disparity_error(est: &Image<f64>, gt: &Image<f64>) -> Result<f64> {
    est.dims().check(gt.dims())?;
    let bad = est
        .as_slice()
        .iter()
        .zip(gt.as_slice())
        .filter(|(e, g)| (*e - *g).abs() >= 1.0)
        .count();
    Ok(bad as f64 / est.dims().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(dims: Dims) -> Image<f64> {
        Image::from_fn(dims, |x, y| {
            (x * 10 + y * 3) as f64 + if (x + y) % 3 == 0 { 7.0 } else { 0.0 }
        })
    }

    #[test]
    fn zero_field_is_identity() {
        let r = ramp(Dims::new(6, 7));
        assert_eq!(warp(&r, &MotionField::zeros(r.dims())).unwrap(), r);
    }

    #[test]
    fn integer_shift_with_clamped_band() {
        let dims = Dims::new(5, 9);
        let r = ramp(dims);
        let out = warp(&r, &MotionField::constant(dims, 2.0, 0.0)).unwrap();
        for y in 0..5 {
            for x in 0..9 {
                let src = (x + 2).min(8);
                assert_eq!(out.get(x, y), r.get(src, y));
            }
        }
    }

    #[test]
    fn round_trip_away_from_border() {
        let dims = Dims::new(6, 12);
        let r = ramp(dims);
        let d = 3.0;
        let there = warp(&r, &MotionField::constant(dims, d, 0.0)).unwrap();
        let back = warp(&there, &MotionField::constant(dims, -d, 0.0)).unwrap();
        for y in 0..6 {
            for x in 3..12 - 3 {
                assert_eq!(back.get(x, y), r.get(x, y));
            }
        }
    }

    #[test]
    fn forward_translation_of_object() {
        let dims = Dims::new(4, 12);
        let r = Image::from_fn(dims, |x, _| if (3..6).contains(&x) { 100.0 } else { 0.0 });
        let mut f = MotionField::zeros(dims);
        for y in 0..4 {
            for x in 3..6 {
                f.set(dims.index(x, y), (2.0, 0.0));
            }
        }
        let p = predict_forward(&r, &f).unwrap();
        let expect = Image::from_fn(dims, |x, _| if (5..8).contains(&x) { 100.0 } else { 0.0 });
        assert_eq!(p, expect);
    }

    #[test]
    fn psnr_and_disparity_error() {
        let dims = Dims::new(4, 4);
        let a = Image::filled(dims, 10.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = Image::filled(dims, 138.0);
        assert!((psnr(&a, &b).unwrap() - 20.0 * (255.0f64 / 128.0).log10()).abs() < 1e-12);
        assert!((psnr(&a, &b).unwrap() - 5.99).abs() < 0.01);
        let z = Image::zeros(dims);
        assert_eq!(disparity_error(&z, &z).unwrap(), 0.0);
        let mut one = z.clone();
        one.set(2, 1, 1.0);
        assert_eq!(disparity_error(&one, &z).unwrap(), 1.0 / 16.0);
        one.set(2, 1, 0.99);
        assert_eq!(disparity_error(&one, &z).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn warp_is_linear_and_range_preserving(
            seed in 0u64..1000, a in -3.0f64..3.0,
            h in proptest::collection::vec(-4.0f64..4.0, 30),
            v in proptest::collection::vec(-4.0f64..4.0, 30),
        ) {
            let dims = Dims::new(5, 6);
            let x = Image::from_fn(dims, |i, j| ((i * 7 + j * 11 + seed as usize) % 17) as f64);
            let z = Image::from_fn(dims, |i, j| ((i * 3 + j * 5 + 2 * seed as usize) % 13) as f64);
            let f = MotionField {
                mh: Image::from_vec(dims, h).unwrap(),
                mv: Image::from_vec(dims, v).unwrap(),
            };
            let mut comb = x.clone();
            comb.scaled_add(a, &z);
            let lhs = warp(&comb, &f).unwrap();
            let mut rhs = warp(&x, &f).unwrap();
            rhs.scaled_add(a, &warp(&z, &f).unwrap());
            for (l, r) in lhs.as_slice().iter().zip(rhs.as_slice()) {
                prop_assert!((l - r).abs() < 1e-9);
            }
            let out = warp(&x, &f).unwrap();
            prop_assert!(out.min_value() >= x.min_value() - 1e-12);
            prop_assert!(out.max_value() <= x.max_value() + 1e-12);
        }
    }
}
