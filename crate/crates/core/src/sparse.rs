//! K-term matching pursuit over the full dictionary grid.
//!
//! Every iteration correlates the residual with every atom shape at every
//! integer translation. The scan runs in the frequency domain on a zero
//! padded grid; atoms cut by the image border are renormalised with a
//! precomputed per-position norm map. Atoms whose screened score lies within
//! a small relative margin of the best are then re-scored exactly against
//! the rendered atom, so the selection and the coefficient never depend on
//! FFT rounding.

use std::fmt::Write as _;

use rustfft::num_complex::Complex64;

use crate::dictionary::{render_atom, AtomParams, AtomShape, DictionarySpec, Generator};
use crate::error::{Error, Result};
use crate::fft2::Fft2;
use crate::image::{Dims, Image};
use crate::scalar::{dot, Scalar};

/// Cached kernel spectra are dropped above this many bytes and rebuilt on
/// every iteration instead.
const SPECTRA_CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseApprox<T> {
    pub dims: Dims,
    pub atoms: Vec<AtomParams>,
    pub coeffs: Vec<T>,
    /// Residual energy after each selection; the last entry is the final one.
    pub residual_energies: Vec<T>,
    /// Set when the residual vanished before the requested number of atoms.
    pub exhausted: bool,
}

impl<T: Scalar> SparseApprox<T> {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn residual_energy(&self) -> T {
        self.residual_energies.last().copied().unwrap_or_else(T::zero)
    }

    /// Keeps the first `k` atoms.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        SparseApprox {
            dims: self.dims,
            atoms: self.atoms[..k].to_vec(),
            coeffs: self.coeffs[..k].to_vec(),
            residual_energies: self.residual_energies[..k].to_vec(),
            exhausted: self.exhausted && k == self.len(),
        }
    }

    /// Text sidecar: header lines, then one atom per line as
    /// `generator tx ty theta_idx sx_idx sy_idx coeff`.
    pub fn to_sidecar(&self, spec: &DictionarySpec) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dims {} {}", self.dims.rows, self.dims.cols);
        let _ = writeln!(out, "exhausted {}", self.exhausted);
        let energies: Vec<String> = self.residual_energies.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "residual_energies {}", energies.join(" "));
        for (p, c) in self.atoms.iter().zip(&self.coeffs) {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                p.generator,
                p.tx,
                p.ty,
                spec.rotation_index(p.theta),
                spec.scale_h_index(p.sx),
                spec.scale_v_index(p.sy),
                c
            );
        }
        out
    }

    pub fn from_sidecar(text: &str, spec: &DictionarySpec, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<Vec<String>> {
            let (i, l) = lines.next().ok_or_else(|| err(0, format!("missing `{key}`")))?;
            let mut f = l.split_whitespace();
            if f.next() != Some(key) {
                return Err(err(i + 1, format!("expected `{key}`")));
            }
            Ok(f.map(str::to_string).collect())
        };
        let d = header("dims")?;
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>().map_err(|_| err(line, format!("bad number `{s}`")))
        };
        if d.len() != 2 {
            return Err(err(1, "dims needs two values".into()));
        }
        let dims = Dims::new(num(&d[0], 1)? as usize, num(&d[1], 1)? as usize);
        spec.dims.check(dims)?;
        let exhausted = header("exhausted")?.first().map(|s| s == "true").unwrap_or(false);
        let residual_energies = header("residual_energies")?
            .iter()
            .map(|s| num(s, 3).map(T::of))
            .collect::<Result<Vec<T>>>()?;
        let (sh, sv) = (spec.scales_h(), spec.scales_v());
        let mut atoms = Vec::new();
        let mut coeffs = Vec::new();
        for (i, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            if f.len() != 7 {
                return Err(err(i + 1, "expected 7 fields".into()));
            }
            let generator: Generator = f[0].parse()?;
            let idx = |s: &str, n: usize| -> Result<usize> {
                let v = num(s, i + 1)?;
                if v < 0.0 || v as usize >= n || v.fract() != 0.0 {
                    return Err(err(i + 1, format!("index `{s}` out of range")));
                }
                Ok(v as usize)
            };
            let p = AtomParams::new(
                generator,
                num(f[1], i + 1)?,
                num(f[2], i + 1)?,
                spec.rotation(idx(f[3], crate::dictionary::ROTATION_PERIOD)?),
                sh[idx(f[4], sh.len())?],
                sv[idx(f[5], sv.len())?],
            );
            p.validate(dims)?;
            atoms.push(p);
            coeffs.push(T::of(num(f[6], i + 1)?));
        }
        if atoms.len() != residual_energies.len() {
            return Err(err(0, "atom count does not match residual history".into()));
        }
        Ok(SparseApprox {
            dims,
            atoms,
            coeffs,
            residual_energies,
            exhausted,
        })
    }
}

/// `sum_k c_k g_k`.
pub fn reconstruct<T: Scalar>(a: &SparseApprox<T>) -> Result<Image<T>> {
    let mut out = Image::zeros(a.dims);
    for (p, &c) in a.atoms.iter().zip(&a.coeffs) {
        out.scaled_add(c, &render_atom::<T>(p, a.dims)?);
    }
    Ok(out)
}

/// Greedy K-term approximation of `image`.
pub fn matching_pursuit<T: Scalar>(image: &Image<T>, spec: &DictionarySpec, k: usize) -> Result<SparseApprox<T>> {
    spec.validate()?;
    spec.dims.check(image.dims())?;
    if k == 0 {
        return Err(Error::invalid("atom count", "K must be >= 1"));
    }
    if k > spec.grid_size() {
        return Err(Error::invalid(
            "atom count",
            format!("K = {k} exceeds the {} dictionary atoms", spec.grid_size()),
        ));
    }
    let initial = image.energy();
    if !(initial > T::zero()) {
        return Err(Error::invalid("image", "zero energy, nothing to approximate"));
    }
    let mut scan = Scanner::new(spec);
    let mut residual = image.clone();
    let mut out = SparseApprox {
        dims: spec.dims,
        atoms: Vec::with_capacity(k),
        coeffs: Vec::with_capacity(k),
        residual_energies: Vec::with_capacity(k),
        exhausted: false,
    };
    let tiny = T::epsilon() * T::of(1e3);
    let floor = initial * tiny * tiny;
    for _ in 0..k {
        if residual.energy() <= floor {
            out.exhausted = true;
            break;
        }
        let (p, atom, c) = scan.best(&residual, spec)?;
        residual.scaled_add(-c, &atom);
        out.atoms.push(p);
        out.coeffs.push(c);
        out.residual_energies.push(residual.energy());
    }
    Ok(out)
}

struct Scanner {
    dims: Dims,
    fft: Fft2,
    shapes: Vec<AtomShape>,
    kernels: Vec<AtomParams>,
    spectra: Option<Vec<Vec<Complex64>>>,
    inv_norm: Vec<Vec<f64>>,
    buf: Vec<Complex64>,
    rspec: Vec<Complex64>,
}

impl Scanner {
    fn new(spec: &DictionarySpec) -> Self {
        let dims = spec.dims;
        let mut fft = Fft2::new(2 * dims.rows, 2 * dims.cols);
        let shapes = spec.shapes();
        let kernels: Vec<AtomParams> = shapes.iter().map(|s| spec.shape_params(s, 0.0, 0.0)).collect();
        let plen = fft.len();

        let mut mask = vec![Complex64::default(); plen];
        for y in 0..dims.rows {
            for x in 0..dims.cols {
                mask[y * fft.p2 + x] = Complex64::new(1.0, 0.0);
            }
        }
        fft.forward(&mut mask);

        let cache = shapes.len() * plen * std::mem::size_of::<Complex64>() <= SPECTRA_CACHE_BYTES;
        let mut spectra = Vec::new();
        let mut inv_norm = Vec::with_capacity(shapes.len());
        let mut buf = vec![Complex64::default(); plen];
        for kp in &kernels {
            fill_kernel(&mut buf, kp, dims, fft.p2, false);
            fft.forward(&mut buf);
            if cache {
                spectra.push(buf.clone());
            }
            fill_kernel(&mut buf, kp, dims, fft.p2, true);
            fft.forward(&mut buf);
            for (b, m) in buf.iter_mut().zip(&mask) {
                *b *= m;
            }
            fft.inverse(&mut buf);
            let scale = 1.0 / plen as f64;
            let mut norms = Vec::with_capacity(dims.len());
            for y in 0..dims.rows {
                for x in 0..dims.cols {
                    let n = buf[y * fft.p2 + x].re * scale;
                    norms.push(if n > 0.0 { n.sqrt().recip() } else { 0.0 });
                }
            }
            inv_norm.push(norms);
        }
        Scanner {
            dims,
            fft,
            shapes,
            kernels,
            spectra: cache.then_some(spectra),
            inv_norm,
            buf,
            rspec: vec![Complex64::default(); plen],
        }
    }

    fn spectrum(&mut self, idx: usize, out: &mut Vec<Complex64>) {
        match &self.spectra {
            Some(s) => out.clone_from(&s[idx]),
            None => {
                out.resize(self.fft.len(), Complex64::default());
                fill_kernel(out, &self.kernels[idx], self.dims, self.fft.p2, false);
                self.fft.forward(out);
            }
        }
    }

    /// Best atom for `residual`: parameters, rendered atom, inner product.
    fn best<T: Scalar>(&mut self, residual: &Image<T>, spec: &DictionarySpec) -> Result<(AtomParams, Image<T>, T)> {
        let dims = self.dims;
        let p2 = self.fft.p2;
        let plen = self.fft.len();
        self.rspec.iter_mut().for_each(|v| *v = Complex64::default());
        for y in 0..dims.rows {
            for x in 0..dims.cols {
                self.rspec[y * p2 + x] = Complex64::new(residual.get(x, y).as_f64(), 0.0);
            }
        }
        self.fft.forward(&mut self.rspec);

        let tol = 1e-9_f64.max(T::epsilon().as_f64().sqrt() * 1e-2);
        let scale = 1.0 / plen as f64;
        let mut best = 0.0_f64;
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        let mut ka = Vec::new();
        let mut kb = Vec::new();
        let n = self.shapes.len();
        let mut s = 0;
        while s < n {
            let pair = s + 1 < n;
            self.spectrum(s, &mut ka);
            if pair {
                self.spectrum(s + 1, &mut kb);
            }
            let i = Complex64::new(0.0, 1.0);
            for j in 0..plen {
                let r = self.rspec[j];
                self.buf[j] = if pair { r * ka[j] + i * (r * kb[j]) } else { r * ka[j] };
            }
            self.fft.inverse(&mut self.buf);
            for (off, part) in [(0usize, false), (1, true)] {
                if off == 1 && !pair {
                    break;
                }
                let norms = &self.inv_norm[s + off];
                for y in 0..dims.rows {
                    for x in 0..dims.cols {
                        let c = self.buf[y * p2 + x];
                        let v = if part { c.im } else { c.re };
                        let score = (v * scale).abs() * norms[y * dims.cols + x];
                        if score >= best * (1.0 - tol) {
                            if score > best {
                                best = score;
                            }
                            cands.push((score, s + off, y * dims.cols + x));
                        }
                    }
                }
            }
            s += 2;
        }

        let cut = best * (1.0 - tol);
        cands.retain(|c| c.0 >= cut);
        // Screening order is not grid order once pairs are interleaved.
        cands.sort_by_key(|&(_, shape, pos)| (shape, pos));
        let mut chosen: Option<(AtomParams, Image<T>, T)> = None;
        for (_, shape, pos) in cands {
            let (x, y) = dims.coords(pos);
            let p = spec.shape_params(&self.shapes[shape], x as f64, y as f64);
            let atom = render_atom::<T>(&p, dims)?;
            let ip = dot(atom.as_slice(), residual.as_slice());
            let better = match &chosen {
                None => true,
                Some((_, _, c)) => ip.abs() > c.abs(),
            };
            if better {
                chosen = Some((p, atom, ip));
            }
        }
        chosen.ok_or_else(|| Error::invalid("image", "no finite correlation"))
    }
}

/// Writes `h(-e)` (or its square) at index `e mod P` for every offset the
/// correlation can reach.
fn fill_kernel(buf: &mut [Complex64], kp: &AtomParams, dims: Dims, p2: usize, squared: bool) {
    buf.iter_mut().for_each(|v| *v = Complex64::default());
    let p1 = buf.len() / p2;
    let reach = kp.reach().ceil() as i64;
    let ry = reach.min(dims.rows as i64 - 1);
    let rx = reach.min(dims.cols as i64 - 1);
    for ey in -ry..=ry {
        for ex in -rx..=rx {
            let v = kp.value_at(-ex as f64, -ey as f64);
            if v == 0.0 {
                continue;
            }
            let iy = ey.rem_euclid(p1 as i64) as usize;
            let ix = ex.rem_euclid(p2 as i64) as usize;
            buf[iy * p2 + ix] = Complex64::new(if squared { v * v } else { v }, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(dims: Dims) -> DictionarySpec {
        DictionarySpec {
            rotation_count: 4,
            scale_count: 3,
            ..DictionarySpec::for_dims(dims)
        }
    }

    /// Exhaustive scan with rendered atoms: the reference for selection.
    fn brute_best(img: &Image<f64>, spec: &DictionarySpec) -> (AtomParams, f64) {
        let mut best: Option<(AtomParams, f64)> = None;
        for shape in spec.shapes() {
            for y in 0..spec.dims.rows {
                for x in 0..spec.dims.cols {
                    let p = spec.shape_params(&shape, x as f64, y as f64);
                    let g = render_atom::<f64>(&p, spec.dims).unwrap();
                    let ip = dot(g.as_slice(), img.as_slice());
                    if best.map_or(true, |(_, b)| ip.abs() > b.abs()) {
                        best = Some((p, ip));
                    }
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn single_atom_image_is_recovered() {
        let dims = Dims::new(20, 24);
        let spec = small_spec(dims);
        let shape = spec.shapes()[17];
        let p = spec.shape_params(&shape, 9.0, 4.0);
        let mut img = render_atom::<f64>(&p, dims).unwrap();
        img.as_mut_slice().iter_mut().for_each(|v| *v *= -37.5);
        let a = matching_pursuit(&img, &spec, 1).unwrap();
        assert_eq!(a.atoms, vec![p]);
        assert!((a.coeffs[0] + 37.5).abs() < 1e-9);
        assert!(a.residual_energy() < 1e-9);
    }

    #[test]
    fn screening_agrees_with_brute_force() {
        let dims = Dims::new(12, 14);
        let spec = small_spec(dims);
        let img = Image::from_fn(dims, |x, y| {
            ((x * 7 + y * 13) % 11) as f64 + (x as f64 * 0.3).sin() * 4.0
        });
        let (p, ip) = brute_best(&img, &spec);
        let a = matching_pursuit(&img, &spec, 1).unwrap();
        assert_eq!(a.atoms[0], p);
        assert!((a.coeffs[0] - ip).abs() < 1e-9 * ip.abs());
    }

    #[test]
    fn residual_is_orthogonal_and_energy_is_conserved() {
        let dims = Dims::new(16, 16);
        let spec = small_spec(dims);
        let img = Image::from_fn(dims, |x, y| (x * y % 7) as f64 * 10.0 + 3.0);
        let a = matching_pursuit(&img, &spec, 12).unwrap();
        let mut residual = img.clone();
        let mut prev = img.energy();
        for (k, (p, &c)) in a.atoms.iter().zip(&a.coeffs).enumerate() {
            let g = render_atom::<f64>(p, dims).unwrap();
            residual.scaled_add(-c, &g);
            assert!(dot(residual.as_slice(), g.as_slice()).abs() < 1e-9 * prev.sqrt());
            let e = residual.energy();
            assert!((prev - e - c * c).abs() <= 1e-9 * prev);
            assert!(e <= prev);
            assert!((a.residual_energies[k] - e).abs() <= 1e-9 * prev);
            prev = e;
        }
    }

    #[test]
    fn reconstruction_matches_reported_residual() {
        let dims = Dims::new(16, 20);
        let spec = small_spec(dims);
        let img = Image::from_fn(dims, |x, y| if x > 8 && y < 10 { 200.0f64 } else { 30.0 });
        let a = matching_pursuit(&img, &spec, 8).unwrap();
        let mut diff = img.clone();
        diff.scaled_add(-1.0, &reconstruct(&a).unwrap());
        assert!((diff.energy() - a.residual_energy()).abs() < 1e-6);
    }

    #[test]
    fn zero_coefficient_reconstructs_to_zero() {
        let dims = Dims::new(8, 8);
        let a = SparseApprox {
            dims,
            atoms: vec![AtomParams::new(Generator::GaussianBlob, 3.0, 3.0, 0.0, 1.0, 1.0)],
            coeffs: vec![0.0f64],
            residual_energies: vec![1.0],
            exhausted: false,
        };
        assert!(reconstruct(&a).unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exhausted_residual_stops_early() {
        let dims = Dims::new(10, 10);
        let spec = small_spec(dims);
        let p = spec.shape_params(&spec.shapes()[0], 5.0, 5.0);
        let img = render_atom::<f64>(&p, dims).unwrap();
        let a = matching_pursuit(&img, &spec, 5).unwrap();
        assert_eq!(a.len(), 1);
        assert!(a.exhausted);
    }

    #[test]
    fn invalid_inputs() {
        let dims = Dims::new(8, 8);
        let spec = small_spec(dims);
        assert!(matching_pursuit(&Image::<f64>::zeros(dims), &spec, 1).is_err());
        assert!(matching_pursuit(&Image::<f64>::filled(dims, 1.0), &spec, 0).is_err());
        assert!(matching_pursuit(&Image::<f64>::filled(Dims::new(8, 9), 1.0), &spec, 1).is_err());
    }

    #[test]
    fn single_precision_runs() {
        let dims = Dims::new(12, 12);
        let spec = small_spec(dims);
        let img = Image::<f32>::from_fn(dims, |x, y| ((x + 2 * y) % 5) as f32 * 20.0);
        let a = matching_pursuit(&img, &spec, 4).unwrap();
        assert!(a.residual_energies.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn sidecar_round_trip() {
        let dims = Dims::new(12, 16);
        let spec = small_spec(dims);
        let img = Image::from_fn(dims, |x, y| ((x * 3 + y) % 9) as f64 * 7.0 + 1.0);
        let a = matching_pursuit(&img, &spec, 6).unwrap();
        let text = a.to_sidecar(&spec);
        let back = SparseApprox::<f64>::from_sidecar(&text, &spec, "t").unwrap();
        assert_eq!(back, a);
    }
}
