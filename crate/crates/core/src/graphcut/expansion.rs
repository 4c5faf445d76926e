//! Multi-label energies on a 4-connected pixel grid and their minimisation
//! by alpha-expansion moves, each move one binary graph cut.

use crate::error::{Error, Result};
use crate::image::Dims;
use crate::scalar::Scalar;

use super::maxflow::Graph;

/// `E(l) = sum_z unary(z, l_z) + sum_{z ~ z'} pairwise(z, z', l_z, l_z')`
/// over 4-neighbour pairs `(z, z')` with `z < z'`.
pub trait Mrf<T> {
    fn dims(&self) -> Dims;
    fn label_count(&self) -> usize;
    fn unary(&self, i: usize, l: usize) -> T;
    fn pairwise(&self, i: usize, j: usize, li: usize, lj: usize) -> T;
}

/// Energy of a labelling, summed in a fixed order.
pub fn energy<T: Scalar, M: Mrf<T> + ?Sized>(m: &M, labels: &[usize]) -> T {
    let dims = m.dims();
    let mut e = T::zero();
    for (i, &l) in labels.iter().enumerate() {
        e = e + m.unary(i, l);
    }
    for (i, j) in dims.neighbor_pairs() {
        e = e + m.pairwise(i, j, labels[i], labels[j]);
    }
    e
}

/// Unary table plus `weight(z, z') * distance(l, l')`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMrf<T> {
    dims: Dims,
    labels: usize,
    unary: Vec<T>,
    right: Vec<T>,
    down: Vec<T>,
    distance: Vec<T>,
}

impl<T: Scalar> TableMrf<T> {
    /// `unary` is pixel-major (`i * labels + l`), `weights` follows
    /// `Dims::neighbor_pairs`, `distance` is `labels x labels`.
    pub fn new(dims: Dims, labels: usize, unary: Vec<T>, weights: Vec<T>, distance: Vec<T>) -> Result<Self> {
        if labels == 0 || dims.is_empty() {
            return Err(Error::invalid("mrf", "need at least one pixel and one label"));
        }
        if unary.len() != dims.len() * labels
            || weights.len() != dims.neighbor_pair_count()
            || distance.len() != labels * labels
        {
            return Err(Error::invalid("mrf", "table sizes do not match the grid"));
        }
        let ok = |v: &T| v.is_finite() && *v >= T::zero();
        if !(unary.iter().all(ok) && weights.iter().all(ok) && distance.iter().all(ok)) {
            return Err(Error::invalid("mrf", "costs must be finite and >= 0"));
        }
        if (0..labels).any(|l| distance[l * labels + l] != T::zero()) {
            return Err(Error::invalid("mrf", "distance(l, l) must be 0"));
        }
        let mut right = vec![T::zero(); dims.len()];
        let mut down = vec![T::zero(); dims.len()];
        for ((i, j), w) in dims.neighbor_pairs().zip(weights) {
            if j == i + 1 {
                right[i] = w;
            } else {
                down[i] = w;
            }
        }
        Ok(TableMrf {
            dims,
            labels,
            unary,
            right,
            down,
            distance,
        })
    }
}

impl<T: Scalar> Mrf<T> for TableMrf<T> {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn label_count(&self) -> usize {
        self.labels
    }

    fn unary(&self, i: usize, l: usize) -> T {
        self.unary[i * self.labels + l]
    }

    fn pairwise(&self, i: usize, j: usize, li: usize, lj: usize) -> T {
        let w = if j == i + 1 { self.right[i] } else { self.down[i] };
        w * self.distance[li * self.labels + lj]
    }
}

/// Whether a `labels x labels` distance is a metric on the label set.
pub fn is_metric<T: Scalar>(distance: &[T], labels: usize) -> bool {
    let d = |a: usize, b: usize| distance[a * labels + b];
    for a in 0..labels {
        if d(a, a) != T::zero() {
            return false;
        }
        for b in 0..labels {
            if d(a, b) != d(b, a) || (a != b && d(a, b) <= T::zero()) {
                return false;
            }
            for c in 0..labels {
                if d(a, c) > d(a, b) + d(b, c) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion<T> {
    pub labels: Vec<usize>,
    pub energy: T,
    /// Energy of the initial labelling, then after every sweep.
    pub trace: Vec<T>,
    pub sweeps: usize,
    pub accepted_moves: usize,
    /// Pairwise terms of expansion moves raised to restore submodularity.
    pub truncated_terms: usize,
}

/// Repeated expansion moves over the labels in index order until a sweep
/// changes nothing or `max_sweeps` is reached. A move is kept only if it
/// lowers the true energy, so the energy never increases.
pub fn alpha_expansion<T: Scalar, M: Mrf<T> + ?Sized>(
    m: &M,
    init: Vec<usize>,
    max_sweeps: usize,
) -> Result<Expansion<T>> {
    let n = m.dims().len();
    let labels = m.label_count();
    if init.len() != n {
        return Err(Error::invalid(
            "initial labelling",
            format!("{} labels for {n} pixels", init.len()),
        ));
    }
    if let Some(&bad) = init.iter().find(|&&l| l >= labels) {
        return Err(Error::invalid("initial labelling", format!("label {bad} >= {labels}")));
    }
    let mut current = init;
    let mut e = energy(m, &current);
    let mut trace = vec![e];
    let mut graph = Graph::<T>::new(n);
    let mut out = Expansion {
        labels: Vec::new(),
        energy: e,
        trace: Vec::new(),
        sweeps: 0,
        accepted_moves: 0,
        truncated_terms: 0,
    };
    let mut candidate = current.clone();
    for _ in 0..max_sweeps {
        out.sweeps += 1;
        let mut changed = false;
        for alpha in 0..labels {
            out.truncated_terms += expansion_move(m, &current, alpha, &mut graph, &mut candidate);
            if candidate == current {
                continue;
            }
            let ce = energy(m, &candidate);
            if ce < e {
                e = ce;
                current.copy_from_slice(&candidate);
                out.accepted_moves += 1;
                changed = true;
            }
        }
        trace.push(e);
        if !changed {
            break;
        }
    }
    out.labels = current;
    out.energy = e;
    out.trace = trace;
    Ok(out)
}

/// Best expansion of `alpha` from `current` into `out`; returns the number
/// of truncated pairwise terms.
fn expansion_move<T: Scalar, M: Mrf<T> + ?Sized>(
    m: &M,
    current: &[usize],
    alpha: usize,
    g: &mut Graph<T>,
    out: &mut [usize],
) -> usize {
    let dims = m.dims();
    g.reset(dims.len());
    let zero = T::zero();
    // Node on the sink side = pixel switches to `alpha`.
    let term1 = |g: &mut Graph<T>, i: usize, e0: T, e1: T| {
        if e0 != e1 {
            g.add_tweights(i, e1, e0);
        }
    };
    for (i, &l) in current.iter().enumerate() {
        if l != alpha {
            term1(g, i, m.unary(i, l), m.unary(i, alpha));
        }
    }
    let mut truncated = 0;
    for (i, j) in dims.neighbor_pairs() {
        let (li, lj) = (current[i], current[j]);
        match (li == alpha, lj == alpha) {
            (true, true) => {}
            (true, false) => term1(g, j, m.pairwise(i, j, alpha, lj), m.pairwise(i, j, alpha, alpha)),
            (false, true) => term1(g, i, m.pairwise(i, j, li, alpha), m.pairwise(i, j, alpha, alpha)),
            (false, false) => {
                let a = m.pairwise(i, j, li, lj);
                let mut b = m.pairwise(i, j, li, alpha);
                let mut c = m.pairwise(i, j, alpha, lj);
                let d = m.pairwise(i, j, alpha, alpha);
                let deficit = a + d - b - c;
                if deficit > zero {
                    let half = deficit * T::of(0.5);
                    b = b + half;
                    c = c + (deficit - half);
                    if a + d > b + c {
                        c = a + d - b;
                    }
                    truncated += 1;
                }
                // a b      a a     0    b-a
                // c d  =   d d  +  c-d  0
                g.add_tweights(i, d, a);
                let b = b - a;
                let c = c - d;
                if b < zero {
                    g.add_tweights(i, zero, b);
                    g.add_tweights(j, zero, -b);
                    g.add_edge(i, j, zero, b + c);
                } else if c < zero {
                    g.add_tweights(i, zero, -c);
                    g.add_tweights(j, zero, c);
                    g.add_edge(i, j, b + c, zero);
                } else if b > zero || c > zero {
                    g.add_edge(i, j, b, c);
                }
            }
        }
    }
    g.maxflow();
    for (i, o) in out.iter_mut().enumerate() {
        *o = if current[i] != alpha && !g.is_source_side(i) {
            alpha
        } else {
            current[i]
        };
    }
    truncated
}

/// Global minimum by enumerating every labelling; for checks on tiny
/// problems only. Ties go to the lexicographically first labelling.
pub fn brute_force_minimum<T: Scalar, M: Mrf<T> + ?Sized>(m: &M) -> (Vec<usize>, T) {
    let n = m.dims().len();
    let l = m.label_count();
    let total = (l as f64).powi(n as i32);
    assert!(total <= 1e8, "{total} labellings is too many to enumerate");
    let mut labels = vec![0usize; n];
    let mut best = (labels.clone(), energy(m, &labels));
    loop {
        // Odometer with the last pixel fastest.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            labels[i] += 1;
            if labels[i] < l {
                break;
            }
            labels[i] = 0;
        }
        let e = energy(m, &labels);
        if e < best.1 {
            best = (labels.clone(), e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_distance(labels: usize, trunc: f64) -> Vec<f64> {
        (0..labels * labels)
            .map(|k| ((k / labels) as f64 - (k % labels) as f64).abs().min(trunc))
            .collect()
    }

    fn random_mrf(rng: &mut ChaCha8Rng, dims: Dims, labels: usize, distance: Vec<f64>) -> TableMrf<f64> {
        let unary = (0..dims.len() * labels).map(|_| rng.gen_range(0..20) as f64).collect();
        let weights = (0..dims.neighbor_pair_count())
            .map(|_| rng.gen_range(0..6) as f64)
            .collect();
        TableMrf::new(dims, labels, unary, weights, distance).unwrap()
    }

    #[test]
    fn unary_only_is_pointwise_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = Dims::new(3, 4);
        let mut m = random_mrf(&mut rng, dims, 5, linear_distance(5, 9.0));
        m.right.iter_mut().chain(m.down.iter_mut()).for_each(|w| *w = 0.0);
        let r = alpha_expansion(&m, vec![0; 12], 5).unwrap();
        for i in 0..12 {
            let best = (0..5).map(|l| m.unary(i, l)).fold(f64::INFINITY, f64::min);
            assert_eq!(m.unary(i, r.labels[i]), best);
        }
    }

    #[test]
    fn two_labels_reach_global_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let dims = Dims::new(rng.gen_range(1..=3), rng.gen_range(1..=4));
            let m = random_mrf(&mut rng, dims, 2, vec![0.0, 1.0, 1.0, 0.0]);
            let r = alpha_expansion(&m, vec![0; dims.len()], 5).unwrap();
            assert_eq!(r.energy, brute_force_minimum(&m).1);
            assert_eq!(r.truncated_terms, 0);
        }
    }

    #[test]
    fn energy_never_increases_and_is_recomputable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let dims = Dims::new(4, 5);
            let m = random_mrf(&mut rng, dims, 4, linear_distance(4, 2.0));
            let init: Vec<usize> = (0..20).map(|_| rng.gen_range(0..4)).collect();
            let r = alpha_expansion(&m, init, 5).unwrap();
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(r.energy, energy(&m, &r.labels));
        }
    }

    #[test]
    fn non_metric_terms_are_truncated() {
        // Squared distance breaks the triangle inequality.
        let d: Vec<f64> = (0..9).map(|k| ((k / 3) as f64 - (k % 3) as f64).powi(2)).collect();
        assert!(!is_metric(&d, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_mrf(&mut rng, Dims::new(3, 3), 3, d);
        let r = alpha_expansion(&m, vec![0; 9], 5).unwrap();
        assert_eq!(r.energy, energy(&m, &r.labels));
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn metric_check() {
        assert!(is_metric(&linear_distance(4, 2.0), 4));
        assert!(is_metric(&[0.0, 1.0, 1.0, 0.0], 2));
        assert!(!is_metric(&[0.0, 1.0, 2.0, 0.0], 2));
    }

    #[test]
    fn rejects_bad_problems() {
        let dims = Dims::new(1, 2);
        assert!(TableMrf::new(dims, 2, vec![0.0; 4], vec![1.0], vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(TableMrf::new(dims, 2, vec![-1.0, 0.0, 0.0, 0.0], vec![1.0], vec![0.0, 1.0, 1.0, 0.0]).is_err());
        assert!(TableMrf::new(dims, 2, vec![0.0; 4], vec![1.0], vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(TableMrf::new(dims, 2, vec![0.0; 3], vec![1.0], vec![0.0, 1.0, 1.0, 0.0]).is_err());
        let m = TableMrf::new(dims, 2, vec![0.0; 4], vec![1.0], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(alpha_expansion(&m, vec![0, 2], 5).is_err());
    }
}
