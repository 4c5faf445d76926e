//! Parametric dictionary of geometric atoms.
//!
//! An atom is a mother function (a 2-D Gaussian blob, or an edge profile that
//! is Gaussian along one axis and a second derivative of a Gaussian along the
//! other) moved by translation `(tx, ty)`, rotated by `theta` and
//! anisotropically scaled by `(sx, sy)`. Atoms are rendered on the integer
//! pixel grid and normalised to unit L2 norm there, so atoms clipped by the
//! image border are renormalised over the pixels that remain.
//!
//! The discrete dictionary uses integer translations over the whole image,
//! rotations in steps of `pi/18` and log-spaced scale grids.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::kv::KvConfig;
use crate::scalar::Scalar;

/// Angular step of the rotation grid.
pub const ROTATION_STEP: f64 = PI / 18.0;

/// Number of distinct rotation steps in `[0, pi)`.
pub const ROTATION_PERIOD: usize = 18;

/// Generator values are flushed to zero where `g1^2 + g2^2` exceeds this.
const CUTOFF_SQ: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    GaussianBlob,
    EdgeAtom,
}

impl Generator {
    pub const ALL: [Generator; 2] = [Generator::GaussianBlob, Generator::EdgeAtom];

    /// Mother function in the atom's own (rotated, scaled) frame.
    #[inline]
    pub fn eval(self, g1: f64, g2: f64) -> f64 {
        let r2 = g1 * g1 + g2 * g2;
        if r2 > CUTOFF_SQ {
            return 0.0;
        }
        match self {
            Generator::GaussianBlob => (-r2).exp(),
            Generator::EdgeAtom => (4.0 * g2 * g2 - 2.0) * (-r2).exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::GaussianBlob => "gaussian",
            Generator::EdgeAtom => "edge",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Generator::GaussianBlob),
            "edge" => Ok(Generator::EdgeAtom),
            other => Err(Error::invalid("generator", other.to_string())),
        }
    }
}

/// One geometric atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub generator: Generator,
    pub tx: f64,
    pub ty: f64,
    pub theta: f64,
    pub sx: f64,
    pub sy: f64,
}

impl AtomParams {
    pub fn new(generator: Generator, tx: f64, ty: f64, theta: f64, sx: f64, sy: f64) -> Self {
        AtomParams {
            generator,
            tx,
            ty,
            theta: normalize_angle(theta),
            sx,
            sy,
        }
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        if !(self.sx > 0.0 && self.sy > 0.0 && self.sx.is_finite() && self.sy.is_finite()) {
            return Err(Error::invalid(
                "atom",
                format!("scales must be positive, got ({}, {})", self.sx, self.sy),
            ));
        }
        if !(self.tx >= 0.0 && self.tx < dims.cols as f64 && self.ty >= 0.0 && self.ty < dims.rows as f64) {
            return Err(Error::invalid(
                "atom",
                format!("center ({}, {}) outside {} image", self.tx, self.ty, dims),
            ));
        }
        if !(0.0..PI).contains(&self.theta) {
            return Err(Error::invalid("atom", format!("theta {} not in [0, pi)", self.theta)));
        }
        Ok(())
    }

    /// Frame coordinates `(g1, g2)` of pixel `(x, y)`.
    #[inline]
    pub fn frame(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.tx;
        let dy = y - self.ty;
        ((c * dx + s * dy) / self.sx, (c * dy - s * dx) / self.sy)
    }

    /// Unnormalised generator value at `(x, y)`.
    #[inline]
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let (g1, g2) = self.frame(x, y);
        self.generator.eval(g1, g2)
    }

    /// Half-width of the box outside which the generator is flushed to zero.
    pub fn reach(&self) -> f64 {
        CUTOFF_SQ.sqrt() * self.sx.max(self.sy)
    }
}

pub(crate) fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// Renders `p` on a `dims` grid, normalised to unit L2 norm.
pub fn render_atom<T: Scalar>(p: &AtomParams, dims: Dims) -> Result<Image<T>> {
    p.validate(dims)?;
    let mut out = Image::<T>::zeros(dims);
    let (x0, x1, y0, y1) = bounding_box(p, dims);
    let mut vals = Vec::with_capacity((x1 - x0) * (y1 - y0));
    let mut energy = 0.0;
    for y in y0..y1 {
        for x in x0..x1 {
            let v = p.value_at(x as f64, y as f64);
            energy += v * v;
            vals.push(v);
        }
    }
    if !(energy > f64::MIN_POSITIVE) || !energy.is_finite() {
        return Err(Error::AtomVanishes);
    }
    let inv = energy.sqrt().recip();
    let mut it = vals.into_iter();
    for y in y0..y1 {
        for x in x0..x1 {
            out.set(x, y, T::of(it.next().unwrap_or(0.0) * inv));
        }
    }
    Ok(out)
}

fn bounding_box(p: &AtomParams, dims: Dims) -> (usize, usize, usize, usize) {
    let r = p.reach();
    let clamp = |v: f64, hi: usize| v.max(0.0).min(hi as f64) as usize;
    (
        clamp((p.tx - r).floor(), dims.cols),
        clamp((p.tx + r).ceil() + 1.0, dims.cols),
        clamp((p.ty - r).floor(), dims.rows),
        clamp((p.ty + r).ceil() + 1.0, dims.rows),
    )
}

/// Pixels where the rendered atom exceeds `eps`, as sorted linear indices.
pub fn atom_support(p: &AtomParams, dims: Dims, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(Error::invalid("support threshold", format!("{eps} must be > 0")));
    }
    let img = render_atom::<f64>(p, dims)?;
    let support = support_of(&img, eps);
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(support)
}

pub(crate) fn support_of(img: &Image<f64>, eps: f64) -> Vec<usize> {
    img.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > eps)
        .map(|(i, _)| i)
        .collect()
}

/// Default support threshold: one percent of the rendered peak.
pub fn default_support_eps(img: &Image<f64>) -> f64 {
    0.01 * img.max_value()
}

/// Discrete parameter grid of the dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionarySpec {
    pub dims: Dims,
    pub rotation_count: usize,
    pub scale_count: usize,
    /// Vertical (`sy`) scale range.
    pub scale_range_v: (f64, f64),
    /// Horizontal (`sx`) scale range.
    pub scale_range_h: (f64, f64),
}

impl DictionarySpec {
    /// Ten rotations, five scales from 1 to `N1/8` vertically and 1 to
    /// `N2/9.77` horizontally.
    pub fn for_dims(dims: Dims) -> Self {
        DictionarySpec {
            dims,
            rotation_count: 10,
            scale_count: 5,
            scale_range_v: (1.0, (dims.rows as f64 / 8.0).max(1.0)),
            scale_range_h: (1.0, (dims.cols as f64 / 9.77).max(1.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::invalid("dictionary", "empty image dims"));
        }
        if self.rotation_count == 0 || self.rotation_count > ROTATION_PERIOD {
            return Err(Error::invalid(
                "dictionary",
                format!("rotation_count must be in 1..={ROTATION_PERIOD}"),
            ));
        }
        if self.scale_count == 0 {
            return Err(Error::invalid("dictionary", "scale_count must be >= 1"));
        }
        for (name, (lo, hi)) in [("vertical", self.scale_range_v), ("horizontal", self.scale_range_h)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::invalid("dictionary", format!("{name} scale range ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    pub fn rotation(&self, idx: usize) -> f64 {
        idx as f64 * ROTATION_STEP
    }

    pub fn scales_h(&self) -> Vec<f64> {
        log_grid(self.scale_range_h, self.scale_count)
    }

    pub fn scales_v(&self) -> Vec<f64> {
        log_grid(self.scale_range_v, self.scale_count)
    }

    pub fn shape_count(&self) -> usize {
        self.shapes().len()
    }

    /// Number of distinct atoms (shapes times integer translations).
    pub fn grid_size(&self) -> usize {
        self.shape_count() * self.dims.len()
    }

    /// Atom shapes in grid order: generator, rotation, `sx`, `sy`.
    ///
    /// Isotropic Gaussians are rotation invariant and only appear at
    /// rotation index 0.
    pub fn shapes(&self) -> Vec<AtomShape> {
        let sh = self.scales_h();
        let sv = self.scales_v();
        let mut out = Vec::new();
        for generator in Generator::ALL {
            for theta_idx in 0..self.rotation_count {
                for (sx_idx, &sx) in sh.iter().enumerate() {
                    for (sy_idx, &sy) in sv.iter().enumerate() {
                        if generator == Generator::GaussianBlob && theta_idx > 0 && sx == sy {
                            continue;
                        }
                        out.push(AtomShape {
                            generator,
                            theta_idx,
                            sx_idx,
                            sy_idx,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn shape_params(&self, shape: &AtomShape, tx: f64, ty: f64) -> AtomParams {
        AtomParams::new(
            shape.generator,
            tx,
            ty,
            self.rotation(shape.theta_idx),
            self.scales_h()[shape.sx_idx],
            self.scales_v()[shape.sy_idx],
        )
    }

    pub fn scale_h_index(&self, s: f64) -> usize {
        nearest_log_index(&self.scales_h(), s)
    }

    pub fn scale_v_index(&self, s: f64) -> usize {
        nearest_log_index(&self.scales_v(), s)
    }

    /// Index on the rotation lattice (`pi/18` steps, modulo `pi`).
    pub fn rotation_index(&self, theta: f64) -> usize {
        ((normalize_angle(theta) / ROTATION_STEP).round() as usize) % ROTATION_PERIOD
    }

    pub fn from_kv(kv: &KvConfig, dims: Dims) -> Result<Self> {
        let d = Self::for_dims(dims);
        let spec = DictionarySpec {
            dims,
            rotation_count: kv.get_or("dictionary.rotation_count", d.rotation_count)?,
            scale_count: kv.get_or("dictionary.scale_count", d.scale_count)?,
            scale_range_v: (
                kv.get_or("dictionary.scale_v_min", d.scale_range_v.0)?,
                kv.get_or("dictionary.scale_v_max", d.scale_range_v.1)?,
            ),
            scale_range_h: (
                kv.get_or("dictionary.scale_h_min", d.scale_range_h.0)?,
                kv.get_or("dictionary.scale_h_max", d.scale_range_h.1)?,
            ),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn write_kv(&self, kv: &mut KvConfig) {
        kv.set("dictionary.rotation_count", self.rotation_count);
        kv.set("dictionary.scale_count", self.scale_count);
        kv.set("dictionary.scale_v_min", self.scale_range_v.0);
        kv.set("dictionary.scale_v_max", self.scale_range_v.1);
        kv.set("dictionary.scale_h_min", self.scale_range_h.0);
        kv.set("dictionary.scale_h_max", self.scale_range_h.1);
    }
}

fn log_grid((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn nearest_log_index(grid: &[f64], s: f64) -> usize {
    let ls = s.ln();
    grid.iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (a.ln() - ls).abs().total_cmp(&(b.ln() - ls).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Translation-free part of a dictionary atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomShape {
    pub generator: Generator,
    pub theta_idx: usize,
    pub sx_idx: usize,
    pub sy_idx: usize,
}

/// Candidate local transformation of an atom, in grid steps.
///
/// The derived ordering is lexicographic over
/// `(d_tx, d_ty, d_theta, d_sx, d_sy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TransformLabel {
    pub d_tx: i32,
    pub d_ty: i32,
    pub d_theta: i32,
    pub d_sx: i32,
    pub d_sy: i32,
}

impl TransformLabel {
    pub const IDENTITY: TransformLabel = TransformLabel {
        d_tx: 0,
        d_ty: 0,
        d_theta: 0,
        d_sx: 0,
        d_sy: 0,
    };

    pub fn translation(d_tx: i32, d_ty: i32) -> Self {
        TransformLabel {
            d_tx,
            d_ty,
            ..Self::IDENTITY
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn within(&self, w: &SearchWindow) -> bool {
        self.d_tx.unsigned_abs() <= w.tx
            && self.d_ty.unsigned_abs() <= w.ty
            && self.d_theta.unsigned_abs() <= w.theta
            && self.d_sx.unsigned_abs() <= w.sx
            && self.d_sy.unsigned_abs() <= w.sy
    }
}

impl fmt::Display for TransformLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.d_tx, self.d_ty, self.d_theta, self.d_sx, self.d_sy
        )
    }
}

/// Half-widths of the multidimensional search window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchWindow {
    pub tx: u32,
    pub ty: u32,
    pub theta: u32,
    pub sx: u32,
    pub sy: u32,
}

impl SearchWindow {
    pub fn translation(tx: u32, ty: u32) -> Self {
        SearchWindow {
            tx,
            ty,
            ..Default::default()
        }
    }

    pub fn label_count(&self) -> usize {
        [self.tx, self.ty, self.theta, self.sx, self.sy]
            .iter()
            .map(|&w| 2 * w as usize + 1)
            .product()
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        Ok(SearchWindow {
            tx: kv.get_or("window.tx", 0)?,
            ty: kv.get_or("window.ty", 0)?,
            theta: kv.get_or("window.theta", 0)?,
            sx: kv.get_or("window.sx", 0)?,
            sy: kv.get_or("window.sy", 0)?,
        })
    }

    pub fn write_kv(&self, kv: &mut KvConfig) {
        kv.set("window.tx", self.tx);
        kv.set("window.ty", self.ty);
        kv.set("window.theta", self.theta);
        kv.set("window.sx", self.sx);
        kv.set("window.sy", self.sy);
    }
}

/// All labels of the window in lexicographic order.
pub fn enumerate_labels(window: &SearchWindow) -> Vec<TransformLabel> {
    let range = |w: u32| -(w as i32)..=(w as i32);
    let mut out = Vec::with_capacity(window.label_count());
    for d_tx in range(window.tx) {
        for d_ty in range(window.ty) {
            for d_theta in range(window.theta) {
                for d_sx in range(window.sx) {
                    for d_sy in range(window.sy) {
                        out.push(TransformLabel {
                            d_tx,
                            d_ty,
                            d_theta,
                            d_sx,
                            d_sy,
                        });
                    }
                }
            }
        }
    }
    out
}

/// `delta-gamma o gamma`: translations add, rotation moves on the `pi/18`
/// lattice modulo `pi`, scales move along the log grids without wrapping.
pub fn apply_label(p: &AtomParams, l: &TransformLabel, spec: &DictionarySpec) -> Result<AtomParams> {
    let dims = spec.dims;
    let tx = p.tx + l.d_tx as f64;
    let ty = p.ty + l.d_ty as f64;
    if !(tx >= 0.0 && tx < dims.cols as f64 && ty >= 0.0 && ty < dims.rows as f64) {
        return Err(Error::LabelOutOfRange);
    }
    let theta = if l.d_theta == 0 {
        p.theta
    } else {
        normalize_angle(p.theta + l.d_theta as f64 * ROTATION_STEP)
    };
    let shift = |grid: Vec<f64>, s: f64, d: i32| -> Result<f64> {
        if d == 0 {
            return Ok(s);
        }
        let idx = nearest_log_index(&grid, s) as i64 + d as i64;
        if idx < 0 || idx >= grid.len() as i64 {
            return Err(Error::LabelOutOfRange);
        }
        Ok(grid[idx as usize])
    };
    let sx = shift(spec.scales_h(), p.sx, l.d_sx)?;
    let sy = shift(spec.scales_v(), p.sy, l.d_sy)?;
    Ok(AtomParams {
        generator: p.generator,
        tx,
        ty,
        theta,
        sx,
        sy,
    })
}
