//! Which atom speaks for which pixel.

use crate::dictionary::{render_atom, support_of, AtomParams};
use crate::error::{Error, Result};
use crate::image::Dims;

#[derive(Debug, Clone)]
pub struct AtomLayout {
    pub dims: Dims,
    /// Sorted pixel indices of each atom's support.
    pub supports: Vec<Vec<usize>>,
    /// Atom with the largest response among those whose support holds the
    /// pixel (lower index on ties); `None` outside every support.
    pub owner: Vec<Option<usize>>,
    /// Pixel of maximum response of each atom.
    pub peaks: Vec<usize>,
    /// Pixel of maximum response among those each atom owns; the peak if
    /// it owns none.
    pub anchors: Vec<usize>,
}

impl AtomLayout {
    /// Supports are `{ g > eps_frac * peak }` on the rendered atoms.
    pub fn new(atoms: &[AtomParams], dims: Dims, eps_frac: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("atom layout", "no atoms"));
        }
        if !(eps_frac > 0.0 && eps_frac < 1.0) {
            return Err(Error::invalid("support threshold", format!("{eps_frac} not in (0, 1)")));
        }
        let n = dims.len();
        let mut best = vec![f64::NEG_INFINITY; n];
        let mut owner = vec![None; n];
        let mut supports = Vec::with_capacity(atoms.len());
        let mut peaks = Vec::with_capacity(atoms.len());
        let mut responses = Vec::with_capacity(atoms.len());
        for (k, p) in atoms.iter().enumerate() {
            let g = render_atom::<f64>(p, dims)?;
            let data = g.as_slice();
            let peak = g.max_value();
            let peak_at = data.iter().position(|&v| v == peak).unwrap_or(0);
            let support = support_of(&g, eps_frac * peak);
            if support.is_empty() {
                return Err(Error::EmptySupport);
            }
            for &i in &support {
                if data[i] > best[i] {
                    best[i] = data[i];
                    owner[i] = Some(k);
                }
            }
            responses.push(support.iter().map(|&i| data[i]).collect::<Vec<f64>>());
            supports.push(support);
            peaks.push(peak_at);
        }
        let anchors = (0..atoms.len())
            .map(|k| {
                let mut best: Option<(usize, f64)> = None;
                for (&i, &v) in supports[k].iter().zip(&responses[k]) {
                    if owner[i] == Some(k) && best.map_or(true, |(_, bv)| v > bv) {
                        best = Some((i, v));
                    }
                }
                best.map_or(peaks[k], |(i, _)| i)
            })
            .collect();
        Ok(AtomLayout {
            dims,
            supports,
            owner,
            peaks,
            anchors,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.supports.len()
    }

    /// Pixels whose owner is atom `k`.
    pub fn owned(&self, k: usize) -> Vec<usize> {
        (0..self.owner.len()).filter(|&i| self.owner[i] == Some(k)).collect()
    }

    pub fn covered(&self) -> usize {
        self.owner.iter().filter(|o| o.is_some()).count()
    }
}
