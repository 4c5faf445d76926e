//! Multi-view depth labels on a horizontally rectified camera line.
//!
//! Depth label `l` selects inverse depth `1/z_max + l * (1/z_min - 1/z_max) /
//! (levels - 1)`. In view `j` with signed baseline `B_j` a point at inverse
//! depth `rho` appears shifted right by `focal * B_j * rho` pixels.
//!
//! Depth fields are stored as inverse depth; pixels outside every atom
//! support hold 0 (a point at infinity, which does not move).

use crate::dictionary::AtomParams;
use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::kv::KvConfig;
use crate::linalg::Subspace;
use crate::predict::{predict_forward, MotionField};
use crate::scalar::Scalar;
use crate::sensing::Observation;

use super::data::{consistency_of_prediction, projection_cost, sensed_atom};
use super::layout::AtomLayout;

#[derive(Debug, Clone, PartialEq)]
pub struct DepthLabelSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub levels: usize,
    pub focal: f64,
    /// Baseline of every non-reference view, in view order.
    pub baselines: Vec<f64>,
}

impl DepthLabelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_min > 0.0 && self.z_min < self.z_max && self.z_max.is_finite()) {
            return Err(Error::invalid(
                "depth labels",
                format!("need 0 < z_min < z_max, got {} / {}", self.z_min, self.z_max),
            ));
        }
        if self.levels < 2 {
            return Err(Error::invalid("depth labels", "need at least two levels"));
        }
        if !(self.focal > 0.0 && self.focal.is_finite()) {
            return Err(Error::invalid("depth labels", format!("focal length {}", self.focal)));
        }
        if self.baselines.is_empty() || self.baselines.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("depth labels", "need finite baselines for >= 1 view"));
        }
        Ok(())
    }

    pub fn view_count(&self) -> usize {
        self.baselines.len()
    }

    pub fn inv_depth(&self, l: usize) -> f64 {
        let (a, b) = (1.0 / self.z_max, 1.0 / self.z_min);
        a + (b - a) * l as f64 / (self.levels - 1) as f64
    }

    pub fn depth(&self, l: usize) -> f64 {
        1.0 / self.inv_depth(l)
    }

    /// Horizontal shift of label `l` in view `view`.
    pub fn disparity(&self, l: usize, view: usize) -> f64 {
        self.focal * self.baselines[view] * self.inv_depth(l)
    }

    /// Label whose inverse depth is nearest to `rho`.
    pub fn nearest_label(&self, rho: f64) -> usize {
        let (a, b) = (1.0 / self.z_max, 1.0 / self.z_min);
        let t = ((rho - a) / (b - a) * (self.levels - 1) as f64).round();
        t.clamp(0.0, (self.levels - 1) as f64) as usize
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let s = DepthLabelSpec {
            z_min: kv.require("depth.z_min")?,
            z_max: kv.require("depth.z_max")?,
            levels: kv.require("depth.levels")?,
            focal: kv.require("depth.focal")?,
            baselines: kv.get_list("depth.baselines")?,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn write_kv(&self, kv: &mut KvConfig) {
        kv.set("depth.z_min", self.z_min);
        kv.set("depth.z_max", self.z_max);
        kv.set("depth.levels", self.levels);
        kv.set("depth.focal", self.focal);
        let b: Vec<String> = self.baselines.iter().map(f64::to_string).collect();
        kv.set("depth.baselines", b.join(", "));
    }
}

/// Atom as seen from view `view` at depth label `l`. Returns the projected
/// atom and whether its center had to be clamped into the image.
pub fn project_atom(p: &AtomParams, l: usize, view: usize, ds: &DepthLabelSpec, dims: Dims) -> (AtomParams, bool) {
    let tx = p.tx + ds.disparity(l, view);
    let hi = dims.cols as f64 - 1.0;
    let clamped = !(0.0..=hi).contains(&tx);
    (
        AtomParams {
            tx: tx.clamp(0.0, hi),
            ..*p
        },
        clamped,
    )
}

/// `sum_j ||y_j - P_j y_j||^2` with the atoms projected into each view.
pub fn multiview_data_cost<T: Scalar>(
    atoms: &[AtomParams],
    labels: &[usize],
    views: &[Observation<T>],
    ds: &DepthLabelSpec,
) -> Result<T> {
    check_views(views, ds)?;
    let mut total = T::zero();
    for (j, obs) in views.iter().enumerate() {
        let cols = atoms
            .iter()
            .zip(labels)
            .map(|(p, &l)| sensed_atom::<T>(&project_atom(p, l, j, ds, obs.dims()).0, &obs.op))
            .collect::<Result<Vec<_>>>()?;
        total = total + projection_cost(&Subspace::from_columns(obs.len(), &cols), obs);
    }
    Ok(total)
}

pub(crate) fn check_views<T: Scalar>(views: &[Observation<T>], ds: &DepthLabelSpec) -> Result<()> {
    ds.validate()?;
    if views.len() != ds.view_count() {
        return Err(Error::invalid(
            "views",
            format!("{} packets for {} baselines", views.len(), ds.view_count()),
        ));
    }
    Ok(())
}

/// Inverse depth of every owned pixel from its owner's label; 0 elsewhere.
pub fn inverse_depth_field(labels: &[usize], layout: &AtomLayout, ds: &DepthLabelSpec) -> Image<f64> {
    let mut out = Image::zeros(layout.dims);
    for (i, o) in layout.owner.iter().enumerate() {
        if let Some(k) = o {
            out.as_mut_slice()[i] = ds.inv_depth(labels[*k]);
        }
    }
    out
}

/// Forward disparity field of view `view`.
pub fn disparity_field(inv_depth: &Image<f64>, view: usize, ds: &DepthLabelSpec) -> MotionField {
    let s = ds.focal * ds.baselines[view];
    MotionField::horizontal(inv_depth.map(|r| s * r))
}

/// Reference warped into view `view` through an inverse depth field.
pub fn warp_view<T: Scalar>(
    reference: &Image<T>,
    inv_depth: &Image<f64>,
    view: usize,
    ds: &DepthLabelSpec,
) -> Result<Image<T>> {
    predict_forward(reference, &disparity_field(inv_depth, view, ds))
}

/// `sum over 4-neighbours of min(|Z(z) - Z(z')|, tau)` on depth `Z = 1 /
/// rho`; a pair with exactly one pixel at infinity costs `tau`.
pub fn multiview_smoothness(inv_depth: &Image<f64>, tau: f64) -> f64 {
    let d = inv_depth.as_slice();
    inv_depth
        .dims()
        .neighbor_pairs()
        .map(|(a, b)| depth_distance(d[a], d[b], tau))
        .sum()
}

pub(crate) fn depth_distance(ra: f64, rb: f64, tau: f64) -> f64 {
    match (ra == 0.0, rb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => tau,
        _ => (1.0 / ra - 1.0 / rb).abs().min(tau),
    }
}

/// `sum_j ||y_j - Q[Phi W_j(ref)]||`.
pub fn multiview_consistency<T: Scalar>(
    inv_depth: &Image<f64>,
    reference: &Image<T>,
    views: &[Observation<T>],
    ds: &DepthLabelSpec,
    quantized: bool,
) -> Result<T> {
    check_views(views, ds)?;
    let mut total = T::zero();
    for (j, obs) in views.iter().enumerate() {
        let pred = warp_view(reference, inv_depth, j, ds)?;
        total = total + consistency_of_prediction(&pred, obs, quantized);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{DictionarySpec, Generator, TransformLabel};
    use crate::energy::data::{consistency_cost, data_cost};
    use crate::energy::motion::{motion_field, TranslationVariant};
    use crate::sensing::{MeasurementPacket, SensingSpec};

    fn ds(baselines: Vec<f64>) -> DepthLabelSpec {
        DepthLabelSpec {
            z_min: 2.0,
            z_max: 8.0,
            levels: 4,
            focal: 8.0,
            baselines,
        }
    }

    #[test]
    fn inverse_depth_is_uniform() {
        let d = ds(vec![1.0]);
        assert!((d.inv_depth(0) - 0.125).abs() < 1e-15);
        assert!((d.inv_depth(3) - 0.5).abs() < 1e-15);
        assert!((d.inv_depth(1) - d.inv_depth(0) - (d.inv_depth(3) - d.inv_depth(2))).abs() < 1e-15);
        assert_eq!(d.disparity(3, 0), 4.0);
        assert_eq!(d.nearest_label(0.26), 1);
    }

    #[test]
    fn projection_examples() {
        let dims = Dims::new(10, 40);
        let p = AtomParams::new(Generator::GaussianBlob, 20.0, 5.0, 0.3, 2.0, 1.0);
        let still = ds(vec![0.0]);
        assert_eq!(project_atom(&p, 2, 0, &still, dims).0, p);
        let two = ds(vec![1.0, 2.0]);
        for l in 0..4 {
            let a = project_atom(&p, l, 0, &two, dims).0.tx - p.tx;
            let b = project_atom(&p, l, 1, &two, dims).0.tx - p.tx;
            assert!((b - 2.0 * a).abs() < 1e-12);
        }
        let far = DepthLabelSpec {
            z_max: 1e300,
            ..ds(vec![5.0])
        };
        assert_eq!(project_atom(&p, 0, 0, &far, dims).0.tx, p.tx);
        let (q, clamped) = project_atom(&p, 3, 0, &ds(vec![10.0]), dims);
        assert!(clamped);
        assert_eq!(q.tx, 39.0);
    }

    fn stereo_fixture() -> (
        DictionarySpec,
        Vec<AtomParams>,
        AtomLayout,
        Image<f64>,
        MeasurementPacket,
    ) {
        let dims = Dims::new(16, 24);
        let spec = DictionarySpec::for_dims(dims);
        let atoms = vec![
            AtomParams::new(Generator::GaussianBlob, 6.0, 8.0, 0.0, 2.0, 2.0),
            AtomParams::new(Generator::GaussianBlob, 15.0, 7.0, 0.0, 1.5, 2.5),
        ];
        let layout = AtomLayout::new(&atoms, dims, 0.01).unwrap();
        let reference = Image::from_fn(dims, |x, y| ((x * 3 + y * 7) % 11) as f64 * 20.0);
        let target = Image::from_fn(dims, |x, y| ((x * 5 + y) % 13) as f64 * 18.0);
        let packet = MeasurementPacket::encode(&target, SensingSpec::new(dims, 150, 4), 3).unwrap();
        (spec, atoms, layout, reference, packet)
    }

    #[test]
    fn two_views_equal_stereo_terms() {
        // focal * baseline * inverse depth is an integer shift for every label.
        let (spec, atoms, layout, reference, packet) = stereo_fixture();
        let d = DepthLabelSpec {
            z_min: 0.25,
            z_max: 1.0,
            levels: 4,
            focal: 1.0,
            baselines: vec![1.0],
        };
        let obs = Observation::<f64>::new(&packet).unwrap();
        let views = vec![obs.clone()];
        for depth_labels in [[0usize, 0], [1, 3], [2, 1]] {
            let shifts: Vec<TransformLabel> = depth_labels
                .iter()
                .map(|&l| TransformLabel::translation(d.disparity(l, 0).round() as i32, 0))
                .collect();
            let hd = multiview_data_cost(&atoms, &depth_labels, &views, &d).unwrap();
            let ed = data_cost(&atoms, &shifts, &spec, &obs).unwrap();
            assert!((hd - ed).abs() <= 1e-12 * ed);
            let rho = inverse_depth_field(&depth_labels, &layout, &d);
            let ht = multiview_consistency(&rho, &reference, &views, &d, true).unwrap();
            let field = motion_field(&atoms, &shifts, &layout, &spec, TranslationVariant::Vertical);
            let et = consistency_cost(&field, &reference, &obs, true).unwrap();
            assert_eq!(ht, et);
            assert_eq!(disparity_field(&rho, 0, &d), field);
        }
    }

    #[test]
    fn zero_measurements_cost_nothing() {
        let (_, atoms, _, _, packet) = stereo_fixture();
        let mut obs = Observation::<f64>::new(&packet).unwrap();
        obs.y_hat.iter_mut().for_each(|v| *v = 0.0);
        let d = ds(vec![1.0, -1.0]);
        let views = vec![obs.clone(), obs];
        for labels in [[0usize, 0], [3, 1]] {
            assert_eq!(multiview_data_cost(&atoms, &labels, &views, &d).unwrap(), 0.0);
        }
    }

    #[test]
    fn smoothness_of_depth() {
        let dims = Dims::new(3, 4);
        let d = ds(vec![1.0]);
        assert_eq!(multiview_smoothness(&Image::filled(dims, d.inv_depth(2)), 1.0), 0.0);
        let mut rho = Image::filled(dims, 0.5);
        rho.set(0, 0, 0.25);
        // |2 - 4| = 2, truncated at 1.5, two neighbours.
        assert_eq!(multiview_smoothness(&rho, 1.5), 3.0);
        rho.set(3, 2, 0.0);
        assert_eq!(multiview_smoothness(&rho, 1.5), 3.0 + 2.0 * 1.5);
    }

    #[test]
    fn still_view_is_identity_warp() {
        let (_, _, layout, reference, _) = stereo_fixture();
        let d = ds(vec![0.0]);
        let rho = inverse_depth_field(&[1, 2], &layout, &d);
        assert_eq!(warp_view(&reference, &rho, 0, &d).unwrap(), reference);
        let shifted = ds(vec![0.25]);
        let plane = Image::filled(reference.dims(), shifted.inv_depth(3));
        let out = warp_view(&reference, &plane, 0, &shifted).unwrap();
        let expect = predict_forward(&reference, &MotionField::constant(reference.dims(), 1.0, 0.0)).unwrap();
        assert_eq!(out, expect);
    }
}
