//! Correlation estimate between a sparse reference and compressed views:
//! one unary row per atom and label, spread over the atom's owned pixels,
//! truncated smoothness between 4-neighbours, solved by alpha-expansion.
//! Per-atom labels are read back at each atom's anchor pixel.

use std::fmt::Write as _;

use crate::dictionary::{apply_label, enumerate_labels, AtomParams, DictionarySpec, TransformLabel};
use crate::energy::{
    consistency_cost, depth_distance, motion_field, motion_field_from_geometry, multiview_consistency, project_atom,
    robust_fit, sensed_atom, AtomLayout, DepthLabelSpec, EnergyConfig, LabelGeometry, PreparedMotion,
};
use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::linalg::Subspace;
use crate::predict::MotionField;
use crate::scalar::Scalar;
use crate::sensing::Observation;

use super::expansion::{alpha_expansion, energy, is_metric, Expansion, Mrf};

/// Which energy the estimate minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Data and smoothness.
    Opt1,
    /// Data, smoothness and consistency of the warped reference.
    Opt2,
    /// Multi-view depth: data, smoothness and consistency over all views.
    Opt3,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "opt1" => Ok(Mode::Opt1),
            "opt2" => Ok(Mode::Opt2),
            "opt3" => Ok(Mode::Opt3),
            other => Err(Error::invalid(
                "mode",
                format!("`{other}`, expected opt1, opt2 or opt3"),
            )),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Opt1 => "opt1",
            Mode::Opt2 => "opt2",
            Mode::Opt3 => "opt3",
        })
    }
}

/// Cost of giving atom `k` label `l` with every other atom untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct UnaryTable<T> {
    pub atoms: usize,
    pub labels: usize,
    pub data: Vec<T>,
    /// Consistency term before weighting; empty when not used.
    pub consistency: Vec<T>,
    /// Labels that move the atom off the dictionary or out of the image.
    pub feasible: Vec<bool>,
    /// `data + alpha2 * consistency`, infeasible entries priced at twice the
    /// largest feasible cost plus one.
    pub cost: Vec<T>,
}

impl<T: Scalar> UnaryTable<T> {
    fn finish(
        atoms: usize,
        labels: usize,
        data: Vec<T>,
        consistency: Vec<T>,
        feasible: Vec<bool>,
        alpha2: f64,
    ) -> Self {
        let a2 = T::of(alpha2);
        let mut cost: Vec<T> = (0..data.len())
            .map(|i| {
                let t = consistency.get(i).map_or(T::zero(), |&c| a2 * c);
                data[i] + t
            })
            .collect();
        let max = cost
            .iter()
            .zip(&feasible)
            .filter(|(_, &f)| f)
            .map(|(&c, _)| c)
            .fold(T::zero(), T::max);
        let penalty = T::of(2.0) * max + T::one();
        for (c, &f) in cost.iter_mut().zip(&feasible) {
            if !f {
                *c = penalty;
            }
        }
        UnaryTable {
            atoms,
            labels,
            data,
            consistency,
            feasible,
            cost,
        }
    }

    #[inline]
    pub fn at(&self, k: usize, l: usize) -> T {
        self.cost[k * self.labels + l]
    }

    /// Cheapest label of atom `k`, lowest index on ties.
    pub fn argmin(&self, k: usize) -> usize {
        let row = &self.cost[k * self.labels..(k + 1) * self.labels];
        let mut best = 0;
        for (l, &c) in row.iter().enumerate() {
            if c < row[best] {
                best = l;
            }
        }
        best
    }

    /// One row per entry: `atom,label,feasible,data,consistency,cost`.
    pub fn to_csv(&self, label_names: &[String]) -> String {
        let mut out = String::from("atom,label,feasible,data,consistency,cost\n");
        for k in 0..self.atoms {
            for l in 0..self.labels {
                let i = k * self.labels + l;
                let t = self
                    .consistency
                    .get(i)
                    .map_or(String::new(), |c| format!("{:e}", c.as_f64()));
                let _ = writeln!(
                    out,
                    "{k},{},{},{:e},{t},{:e}",
                    label_names[l],
                    self.feasible[i] as u8,
                    self.data[i].as_f64(),
                    self.cost[i].as_f64()
                );
            }
        }
        out
    }
}

/// Solver output shared by the motion and depth estimates.
#[derive(Debug, Clone)]
pub struct Estimate<T> {
    /// Label index per atom.
    pub atom_labels: Vec<usize>,
    /// Label index per pixel.
    pub pixel_labels: Vec<usize>,
    pub table: UnaryTable<T>,
    /// `None` when smoothness is off and every atom takes its cheapest label.
    pub expansion: Option<Expansion<T>>,
    /// Grid energy of `pixel_labels`.
    pub mrf_energy: T,
}

#[derive(Debug, Clone)]
pub struct MotionEstimate<T> {
    pub label_set: Vec<TransformLabel>,
    pub labels: Vec<TransformLabel>,
    pub field: MotionField,
    pub layout: AtomLayout,
    pub estimate: Estimate<T>,
}

#[derive(Debug, Clone)]
pub struct DepthEstimate<T> {
    /// Depth label per atom.
    pub labels: Vec<usize>,
    pub inv_depth: Image<f64>,
    pub layout: AtomLayout,
    pub estimate: Estimate<T>,
}

/// Grid energy of the motion estimate: owned pixels pay their owner's unary
/// row, neighbours pay `alpha1 * min(|m - m'|_1, tau)` on their motions.
pub struct MotionMrf<'a, T> {
    dims: Dims,
    table: &'a UnaryTable<T>,
    owner: &'a [Option<usize>],
    motions: Vec<PreparedMotion>,
    alpha1: T,
    tau: f64,
}

impl<'a, T: Scalar> MotionMrf<'a, T> {
    pub fn new(
        atoms: &[AtomParams],
        label_set: &[TransformLabel],
        spec: &DictionarySpec,
        layout: &'a AtomLayout,
        table: &'a UnaryTable<T>,
        cfg: &EnergyConfig,
    ) -> Self {
        let motions = atoms
            .iter()
            .flat_map(|p| {
                label_set
                    .iter()
                    .map(move |l| LabelGeometry::of(p, l, spec).prepare(p, cfg.translation))
            })
            .collect();
        MotionMrf {
            dims: layout.dims,
            table,
            owner: &layout.owner,
            motions,
            alpha1: T::of(cfg.alpha1),
            tau: cfg.tau,
        }
    }

    #[inline]
    fn motion(&self, i: usize, l: usize) -> (f64, f64) {
        match self.owner[i] {
            None => (0.0, 0.0),
            Some(k) => {
                let (x, y) = self.dims.coords(i);
                self.motions[k * self.table.labels + l].at(x as f64, y as f64)
            }
        }
    }
}

impl<T: Scalar> Mrf<T> for MotionMrf<'_, T> {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn label_count(&self) -> usize {
        self.table.labels
    }

    fn unary(&self, i: usize, l: usize) -> T {
        self.owner[i].map_or(T::zero(), |k| self.table.at(k, l))
    }

    fn pairwise(&self, i: usize, j: usize, li: usize, lj: usize) -> T {
        let (hi, vi) = self.motion(i, li);
        let (hj, vj) = self.motion(j, lj);
        self.alpha1 * T::of(((hi - hj).abs() + (vi - vj).abs()).min(self.tau))
    }
}

/// Grid energy of the depth estimate: neighbours pay
/// `alpha1 * min(|Z - Z'|, tau)` on depth, pixels outside every support sit
/// at infinity.
pub struct DepthMrf<'a, T> {
    dims: Dims,
    table: &'a UnaryTable<T>,
    owner: &'a [Option<usize>],
    inv_depth: Vec<f64>,
    alpha1: T,
    tau: f64,
}

impl<'a, T: Scalar> DepthMrf<'a, T> {
    pub fn new(ds: &DepthLabelSpec, layout: &'a AtomLayout, table: &'a UnaryTable<T>, cfg: &EnergyConfig) -> Self {
        DepthMrf {
            dims: layout.dims,
            table,
            owner: &layout.owner,
            inv_depth: (0..ds.levels).map(|l| ds.inv_depth(l)).collect(),
            alpha1: T::of(cfg.alpha1),
            tau: cfg.tau,
        }
    }

    #[inline]
    fn rho(&self, i: usize, l: usize) -> f64 {
        self.owner[i].map_or(0.0, |_| self.inv_depth[l])
    }
}

impl<T: Scalar> Mrf<T> for DepthMrf<'_, T> {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn label_count(&self) -> usize {
        self.table.labels
    }

    fn unary(&self, i: usize, l: usize) -> T {
        self.owner[i].map_or(T::zero(), |k| self.table.at(k, l))
    }

    fn pairwise(&self, i: usize, j: usize, li: usize, lj: usize) -> T {
        self.alpha1 * T::of(depth_distance(self.rho(i, li), self.rho(j, lj), self.tau))
    }
}

fn is_infeasible(e: &Error) -> bool {
    matches!(e, Error::LabelOutOfRange | Error::AtomVanishes)
}

fn data_entry<T: Scalar>(others: &Subspace<T>, col: &[T], obs: &Observation<T>, robust: bool) -> T {
    let sub = others.with_column(col);
    if robust {
        robust_fit(&sub, &obs.lo, &obs.hi, &obs.y_hat).cost
    } else {
        sub.residual_sq(&obs.y_hat)
    }
}

/// Span of the sensed atoms other than `k`.
fn others_span<T: Scalar>(sensed: &[Vec<T>], k: usize, len: usize) -> Subspace<T> {
    let mut s = Subspace::empty(len);
    for (j, c) in sensed.iter().enumerate() {
        if j != k {
            s.push(c);
        }
    }
    s
}

/// Unary rows for the motion estimate. The consistency column is filled
/// only when `reference` is given.
pub fn motion_unary_table<T: Scalar>(
    atoms: &[AtomParams],
    label_set: &[TransformLabel],
    spec: &DictionarySpec,
    obs: &Observation<T>,
    reference: Option<&Image<T>>,
    layout: &AtomLayout,
    cfg: &EnergyConfig,
) -> Result<UnaryTable<T>> {
    let (k_count, l_count) = (atoms.len(), label_set.len());
    let sensed = atoms
        .iter()
        .map(|p| sensed_atom::<T>(p, &obs.op))
        .collect::<Result<Vec<_>>>()?;
    let mut data = vec![T::zero(); k_count * l_count];
    let mut feasible = vec![true; k_count * l_count];
    let mut consistency = if reference.is_some() {
        vec![T::zero(); k_count * l_count]
    } else {
        Vec::new()
    };
    let mut geometry = vec![LabelGeometry::IDENTITY; k_count];
    for k in 0..k_count {
        let others = others_span(&sensed, k, obs.len());
        for (l, label) in label_set.iter().enumerate() {
            let i = k * l_count + l;
            let moved = apply_label(&atoms[k], label, spec).and_then(|p| sensed_atom::<T>(&p, &obs.op));
            match moved {
                Ok(col) => data[i] = data_entry(&others, &col, obs, cfg.robust),
                Err(e) if is_infeasible(&e) => {
                    feasible[i] = false;
                    continue;
                }
                Err(e) => return Err(e),
            }
            if let Some(r) = reference {
                geometry[k] = LabelGeometry::of(&atoms[k], label, spec);
                let field = motion_field_from_geometry(atoms, &geometry, layout, cfg.translation);
                consistency[i] = consistency_cost(&field, r, obs, cfg.quantized_consistency)?;
                geometry[k] = LabelGeometry::IDENTITY;
            }
        }
    }
    Ok(UnaryTable::finish(
        k_count,
        l_count,
        data,
        consistency,
        feasible,
        cfg.alpha2,
    ))
}

/// Unary rows for the depth estimate: atom `k` projected into every view at
/// depth `l`, the others left where they are in the reference.
pub fn depth_unary_table<T: Scalar>(
    atoms: &[AtomParams],
    views: &[Observation<T>],
    ds: &DepthLabelSpec,
    reference: Option<&Image<T>>,
    layout: &AtomLayout,
    cfg: &EnergyConfig,
) -> Result<UnaryTable<T>> {
    let (k_count, l_count) = (atoms.len(), ds.levels);
    let dims = layout.dims;
    let mut data = vec![T::zero(); k_count * l_count];
    let mut feasible = vec![true; k_count * l_count];
    for (j, obs) in views.iter().enumerate() {
        let sensed = atoms
            .iter()
            .map(|p| sensed_atom::<T>(p, &obs.op))
            .collect::<Result<Vec<_>>>()?;
        for k in 0..k_count {
            let others = others_span(&sensed, k, obs.len());
            for l in 0..l_count {
                let i = k * l_count + l;
                if !feasible[i] {
                    continue;
                }
                let (p, _) = project_atom(&atoms[k], l, j, ds, dims);
                match sensed_atom::<T>(&p, &obs.op) {
                    Ok(col) => data[i] = data[i] + data_entry(&others, &col, obs, cfg.robust),
                    Err(e) if is_infeasible(&e) => feasible[i] = false,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let mut consistency = Vec::new();
    if let Some(r) = reference {
        consistency = vec![T::zero(); k_count * l_count];
        for k in 0..k_count {
            let owned = layout.owned(k);
            for l in 0..l_count {
                let mut rho = Image::zeros(dims);
                for &i in &owned {
                    rho.as_mut_slice()[i] = ds.inv_depth(l);
                }
                consistency[k * l_count + l] = multiview_consistency(&rho, r, views, ds, cfg.quantized_consistency)?;
            }
        }
    }
    Ok(UnaryTable::finish(
        k_count,
        l_count,
        data,
        consistency,
        feasible,
        cfg.alpha2,
    ))
}

fn solve_grid<T: Scalar, M: Mrf<T>>(
    mrf: &M,
    table: &UnaryTable<T>,
    layout: &AtomLayout,
    init: usize,
    cfg: &EnergyConfig,
) -> Result<Estimate<T>> {
    if cfg.alpha1 == 0.0 {
        let atom_labels: Vec<usize> = (0..table.atoms).map(|k| table.argmin(k)).collect();
        let pixel_labels: Vec<usize> = layout
            .owner
            .iter()
            .map(|o| o.map_or(init, |k| atom_labels[k]))
            .collect();
        let mrf_energy = energy(mrf, &pixel_labels);
        return Ok(Estimate {
            atom_labels,
            pixel_labels,
            table: table.clone(),
            expansion: None,
            mrf_energy,
        });
    }
    let exp = alpha_expansion(mrf, vec![init; layout.dims.len()], cfg.max_sweeps)?;
    let atom_labels = layout.anchors.iter().map(|&i| exp.labels[i]).collect();
    Ok(Estimate {
        atom_labels,
        pixel_labels: exp.labels.clone(),
        table: table.clone(),
        mrf_energy: exp.energy,
        expansion: Some(exp),
    })
}

fn check_common<T: Scalar>(
    atoms: &[AtomParams],
    dims: Dims,
    reference: Option<&Image<T>>,
    cfg: &EnergyConfig,
) -> Result<()> {
    cfg.validate()?;
    if atoms.is_empty() {
        return Err(Error::invalid("correlation", "no atoms"));
    }
    if let Some(r) = reference {
        dims.check(r.dims())?;
    }
    for p in atoms {
        p.validate(dims)?;
    }
    Ok(())
}

/// Motion or disparity between the reference atoms and one compressed view.
pub fn solve_correlation<T: Scalar>(
    mode: Mode,
    atoms: &[AtomParams],
    spec: &DictionarySpec,
    obs: &Observation<T>,
    reference: Option<&Image<T>>,
    cfg: &EnergyConfig,
) -> Result<MotionEstimate<T>> {
    let dims = obs.dims();
    spec.dims.check(dims)?;
    check_common(atoms, dims, reference, cfg)?;
    let reference = match mode {
        Mode::Opt1 => None,
        Mode::Opt2 => Some(reference.ok_or_else(|| Error::invalid("opt2", "needs the reference image"))?),
        Mode::Opt3 => return Err(Error::invalid("mode", "opt3 estimates depth; use solve_multiview")),
    };
    let label_set = enumerate_labels(&cfg.window);
    check_translation_metric(&label_set, cfg)?;
    let layout = AtomLayout::new(atoms, dims, cfg.support_eps)?;
    let table = motion_unary_table(atoms, &label_set, spec, obs, reference, &layout, cfg)?;
    let mrf = MotionMrf::new(atoms, &label_set, spec, &layout, &table, cfg);
    let identity = label_set
        .iter()
        .position(TransformLabel::is_identity)
        .expect("windows are symmetric around the identity");
    let estimate = solve_grid(&mrf, &table, &layout, identity, cfg)?;
    let labels: Vec<TransformLabel> = estimate.atom_labels.iter().map(|&l| label_set[l]).collect();
    let field = motion_field(atoms, &labels, &layout, spec, cfg.translation);
    Ok(MotionEstimate {
        label_set,
        labels,
        field,
        layout,
        estimate,
    })
}

/// Translation-only labels under the truncated L1 distance must form a
/// metric, so that every expansion move is submodular.
fn check_translation_metric(label_set: &[TransformLabel], cfg: &EnergyConfig) -> Result<()> {
    if cfg.window.theta != 0 || cfg.window.sx != 0 || cfg.window.sy != 0 {
        return Ok(());
    }
    let n = label_set.len();
    let d: Vec<f64> = (0..n * n)
        .map(|i| {
            let (a, b) = (label_set[i / n], label_set[i % n]);
            (((a.d_tx - b.d_tx).abs() + (a.d_ty - b.d_ty).abs()) as f64).min(cfg.tau)
        })
        .collect();
    if !is_metric(&d, n) {
        return Err(Error::invalid("labels", "translation distance is not a metric"));
    }
    Ok(())
}

/// Depth of the reference atoms from one or more compressed views.
pub fn solve_multiview<T: Scalar>(
    atoms: &[AtomParams],
    views: &[Observation<T>],
    ds: &DepthLabelSpec,
    reference: Option<&Image<T>>,
    cfg: &EnergyConfig,
) -> Result<DepthEstimate<T>> {
    ds.validate()?;
    if views.len() != ds.view_count() {
        return Err(Error::invalid(
            "views",
            format!("{} packets for {} baselines", views.len(), ds.view_count()),
        ));
    }
    let dims = views[0].dims();
    for v in views {
        dims.check(v.dims())?;
    }
    check_common(atoms, dims, reference, cfg)?;
    let layout = AtomLayout::new(atoms, dims, cfg.support_eps)?;
    let table = depth_unary_table(atoms, views, ds, reference, &layout, cfg)?;
    let mrf = DepthMrf::new(ds, &layout, &table, cfg);
    let estimate = solve_grid(&mrf, &table, &layout, 0, cfg)?;
    let labels = estimate.atom_labels.clone();
    let inv_depth = crate::energy::inverse_depth_field(&labels, &layout, ds);
    Ok(DepthEstimate {
        labels,
        inv_depth,
        layout,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{Generator, SearchWindow};
    use crate::energy::{data_cost, robust_data_cost};
    use crate::sensing::{MeasurementPacket, SensingSpec};

    fn blobs(dims: Dims) -> Vec<AtomParams> {
        vec![
            AtomParams::new(Generator::GaussianBlob, 8.0, 8.0, 0.0, 2.5, 2.5),
            AtomParams::new(Generator::GaussianBlob, 20.0, 9.0, 0.0, 2.0, 3.0),
            AtomParams::new(Generator::EdgeAtom, 14.0, 18.0, 0.5, 2.0, 2.0),
        ]
        .into_iter()
        .map(|p| {
            p.validate(dims).unwrap();
            p
        })
        .collect()
    }

    fn scene(dims: Dims, atoms: &[AtomParams], shift: &[(i32, i32)]) -> Image<f64> {
        let mut img = Image::filled(dims, 40.0);
        for (p, &(dx, dy)) in atoms.iter().zip(shift) {
            let q = AtomParams {
                tx: p.tx + dx as f64,
                ty: p.ty + dy as f64,
                ..*p
            };
            img.scaled_add(600.0, &crate::dictionary::render_atom::<f64>(&q, dims).unwrap());
        }
        img
    }

    fn setup(shift: &[(i32, i32)], bits: u8) -> (DictionarySpec, Vec<AtomParams>, Image<f64>, Observation<f64>) {
        let dims = Dims::new(26, 30);
        let spec = DictionarySpec::for_dims(dims);
        let atoms = blobs(dims);
        let reference = scene(dims, &atoms, &[(0, 0); 3]);
        let target = scene(dims, &atoms, shift);
        let packet = MeasurementPacket::encode(&target, SensingSpec::new(dims, 400, 9), bits).unwrap();
        (spec, atoms, reference, Observation::new(&packet).unwrap())
    }

    fn cfg(alpha1: f64, alpha2: f64) -> EnergyConfig {
        EnergyConfig {
            alpha1,
            alpha2,
            window: SearchWindow::translation(2, 1),
            ..EnergyConfig::default()
        }
    }

    #[test]
    fn table_matches_direct_data_cost() {
        let (spec, atoms, _, obs) = setup(&[(1, 0), (0, 0), (-1, 1)], 6);
        let c = cfg(1.0, 0.0);
        let labels = enumerate_labels(&c.window);
        let layout = AtomLayout::new(&atoms, obs.dims(), c.support_eps).unwrap();
        let t = motion_unary_table(&atoms, &labels, &spec, &obs, None, &layout, &c).unwrap();
        for k in 0..3 {
            for (l, lab) in labels.iter().enumerate() {
                let mut assign = vec![TransformLabel::IDENTITY; 3];
                assign[k] = *lab;
                let direct = data_cost(&atoms, &assign, &spec, &obs).unwrap();
                assert!((t.at(k, l) - direct).abs() <= 1e-9 * direct.max(1.0));
            }
        }
        let robust = EnergyConfig { robust: true, ..c };
        let t = motion_unary_table(&atoms, &labels, &spec, &obs, None, &layout, &robust).unwrap();
        let mut assign = vec![TransformLabel::IDENTITY; 3];
        assign[1] = labels[3];
        let direct = robust_data_cost(&atoms, &assign, &spec, &obs).unwrap().cost;
        assert!((t.at(1, 3) - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn without_smoothness_each_atom_takes_its_argmin() {
        let (spec, atoms, reference, obs) = setup(&[(2, 0), (0, 1), (-1, 0)], 4);
        for mode in [Mode::Opt1, Mode::Opt2] {
            let r = solve_correlation(mode, &atoms, &spec, &obs, Some(&reference), &cfg(0.0, 0.3)).unwrap();
            assert!(r.estimate.expansion.is_none());
            for k in 0..3 {
                let row: Vec<f64> = (0..r.label_set.len()).map(|l| r.estimate.table.at(k, l)).collect();
                let best = row.iter().cloned().fold(f64::INFINITY, f64::min);
                assert_eq!(row[r.estimate.atom_labels[k]], best);
                assert_eq!(r.labels[k], r.label_set[r.estimate.atom_labels[k]]);
            }
        }
    }

    #[test]
    fn recovers_planted_shifts() {
        let shift = [(2, 0), (-1, 1), (1, -1)];
        let (spec, atoms, reference, obs) = setup(&shift, 8);
        for mode in [Mode::Opt1, Mode::Opt2] {
            let r = solve_correlation(mode, &atoms, &spec, &obs, Some(&reference), &cfg(0.05, 0.01)).unwrap();
            let got: Vec<(i32, i32)> = r.labels.iter().map(|l| (l.d_tx, l.d_ty)).collect();
            assert_eq!(got, shift, "{mode}");
            let exp = r.estimate.expansion.as_ref().unwrap();
            let mrf = MotionMrf::new(
                &atoms,
                &r.label_set,
                &spec,
                &r.layout,
                &r.estimate.table,
                &cfg(0.05, 0.01),
            );
            assert_eq!(energy(&mrf, &r.estimate.pixel_labels), exp.energy);
            assert!(exp.trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn identical_views_give_identity() {
        let (spec, atoms, reference, obs) = setup(&[(0, 0); 3], 6);
        for mode in [Mode::Opt1, Mode::Opt2] {
            let r = solve_correlation(mode, &atoms, &spec, &obs, Some(&reference), &cfg(0.5, 0.1)).unwrap();
            assert!(r.labels.iter().all(TransformLabel::is_identity), "{mode}");
            assert!(r.field.is_zero());
        }
    }

    #[test]
    fn infeasible_labels_are_priced_out() {
        let dims = Dims::new(12, 12);
        let spec = DictionarySpec::for_dims(dims);
        let atoms = vec![AtomParams::new(Generator::GaussianBlob, 0.0, 6.0, 0.0, 1.5, 1.5)];
        let packet =
            MeasurementPacket::encode(&scene(dims, &atoms, &[(0, 0)]), SensingSpec::new(dims, 60, 1), 4).unwrap();
        let obs = Observation::<f64>::new(&packet).unwrap();
        let c = EnergyConfig {
            window: SearchWindow::translation(1, 0),
            ..EnergyConfig::default()
        };
        let labels = enumerate_labels(&c.window);
        let layout = AtomLayout::new(&atoms, dims, c.support_eps).unwrap();
        let t = motion_unary_table(&atoms, &labels, &spec, &obs, None, &layout, &c).unwrap();
        assert_eq!(t.feasible, vec![false, true, true]);
        assert_eq!(t.at(0, 0), 2.0 * t.at(0, 1).max(t.at(0, 2)) + 1.0);
        assert!(t.to_csv(&["a".into(), "b".into(), "c".into()]).lines().count() == 4);
    }

    #[test]
    fn opt2_needs_a_reference_and_opt3_its_own_entry() {
        let (spec, atoms, _, obs) = setup(&[(0, 0); 3], 4);
        let c = cfg(1.0, 1.0);
        assert!(solve_correlation(Mode::Opt2, &atoms, &spec, &obs, None, &c).is_err());
        assert!(solve_correlation(Mode::Opt3, &atoms, &spec, &obs, None, &c).is_err());
        assert_eq!("OPT2".parse::<Mode>().unwrap(), Mode::Opt2);
    }

    #[test]
    fn multiview_recovers_planted_depths() {
        let dims = Dims::new(26, 30);
        let atoms = blobs(dims);
        let ds = DepthLabelSpec {
            z_min: 1.0,
            z_max: 4.0,
            levels: 4,
            focal: 4.0,
            baselines: vec![1.0, -1.0],
        };
        let truth = [3usize, 0, 2];
        let reference = scene(dims, &atoms, &[(0, 0); 3]);
        let views: Vec<Observation<f64>> = (0..2)
            .map(|j| {
                let shift: Vec<(i32, i32)> = truth.iter().map(|&l| (ds.disparity(l, j).round() as i32, 0)).collect();
                let img = scene(dims, &atoms, &shift);
                let p = MeasurementPacket::encode(&img, SensingSpec::new(dims, 400, 20 + j as u64), 8).unwrap();
                Observation::new(&p).unwrap()
            })
            .collect();
        for alpha1 in [0.0, 0.05] {
            let c = EnergyConfig {
                alpha1,
                alpha2: 0.01,
                tau: 1.0,
                ..EnergyConfig::default()
            };
            let r = solve_multiview(&atoms, &views, &ds, Some(&reference), &c).unwrap();
            assert_eq!(r.labels, truth);
            let d = DepthMrf::new(&ds, &r.layout, &r.estimate.table, &c);
            assert_eq!(energy(&d, &r.estimate.pixel_labels), r.estimate.mrf_energy);
        }
    }
}
