//! Data, robust data and consistency terms.

use crate::dictionary::{apply_label, render_atom, AtomParams, DictionarySpec, TransformLabel};
use crate::error::Result;
use crate::image::Image;
use crate::linalg::Subspace;
use crate::predict::{predict_forward, MotionField};
use crate::scalar::{norm_sq, Scalar};
use crate::sensing::{Observation, SensingOperator};

/// Alternating minimisation stops once an iteration lowers the objective by
/// less than this fraction of its starting value.
pub const ROBUST_REL_TOL: f64 = 1e-8;
pub const ROBUST_MAX_ITERS: usize = 200;

/// `Phi g` for the rendered atom `p`.
pub fn sensed_atom<T: Scalar>(p: &AtomParams, op: &SensingOperator) -> Result<Vec<T>> {
    Ok(op.apply(render_atom::<T>(p, op.dims())?.as_slice()))
}

/// Sensed columns of the transformed atoms `l_k o gamma_k`.
pub fn assignment_columns<T: Scalar>(
    atoms: &[AtomParams],
    labels: &[TransformLabel],
    spec: &DictionarySpec,
    op: &SensingOperator,
) -> Result<Vec<Vec<T>>> {
    atoms
        .iter()
        .zip(labels)
        .map(|(p, l)| sensed_atom(&apply_label(p, l, spec)?, op))
        .collect()
}

/// `||y_hat - P y_hat||^2` for the projector `P` onto `span(columns)`.
pub fn projection_cost<T: Scalar>(sub: &Subspace<T>, obs: &Observation<T>) -> T {
    sub.residual_sq(&obs.y_hat)
}

/// Squared distance of the measurements from the span of the sensed,
/// transformed atoms.
pub fn data_cost<T: Scalar>(
    atoms: &[AtomParams],
    labels: &[TransformLabel],
    spec: &DictionarySpec,
    obs: &Observation<T>,
) -> Result<T> {
    let cols = assignment_columns::<T>(atoms, labels, spec, &obs.op)?;
    Ok(projection_cost(&Subspace::from_columns(obs.len(), &cols), obs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustFit<T> {
    pub cost: T,
    pub coeffs: Vec<T>,
    /// Consistent measurements, inside every quantization cell.
    pub y_tilde: Vec<T>,
    /// Objective after each coefficient update, starting from `y_hat`.
    pub trace: Vec<T>,
    pub converged: bool,
}

/// `min ||y - Psi c||^2` over `c` and `y` inside the quantization cells,
/// by alternating exact minimisation: `c = Psi^+ y`, then `y = clip(Psi c)`.
pub fn robust_fit<T: Scalar>(sub: &Subspace<T>, lo: &[T], hi: &[T], y_hat: &[T]) -> RobustFit<T> {
    let mut y = y_hat.to_vec();
    let h0 = sub.residual_sq(&y);
    let mut trace = vec![h0];
    let mut converged = h0 == T::zero();
    let tol = T::of(ROBUST_REL_TOL) * h0;
    let mut h_prev = h0;
    for _ in 0..ROBUST_MAX_ITERS {
        if converged {
            break;
        }
        let p = sub.project(&y);
        let next: Vec<T> = p
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&v, (&a, &b))| v.max(a).min(b))
            .collect();
        let h = sub.residual_sq(&next);
        if h > h_prev {
            // Rounding at convergence; keep the better iterate.
            converged = true;
            break;
        }
        y = next;
        trace.push(h);
        converged = h_prev - h <= tol;
        h_prev = h;
    }
    RobustFit {
        cost: h_prev,
        coeffs: sub.coefficients(&y),
        y_tilde: y,
        trace,
        converged,
    }
}

pub fn robust_data_cost<T: Scalar>(
    atoms: &[AtomParams],
    labels: &[TransformLabel],
    spec: &DictionarySpec,
    obs: &Observation<T>,
) -> Result<RobustFit<T>> {
    let cols = assignment_columns::<T>(atoms, labels, spec, &obs.op)?;
    let sub = Subspace::from_columns(obs.len(), &cols);
    Ok(robust_fit(&sub, &obs.lo, &obs.hi, &obs.y_hat))
}

/// `||y_hat - Q[Phi W(ref)]||` (or without `Q`), with `W` the prediction
/// of the target from the reference moved by `field`.
pub fn consistency_cost<T: Scalar>(
    field: &MotionField,
    reference: &Image<T>,
    obs: &Observation<T>,
    quantized: bool,
) -> Result<T> {
    let pred = predict_forward(reference, field)?;
    Ok(consistency_of_prediction(&pred, obs, quantized))
}

pub fn consistency_of_prediction<T: Scalar>(pred: &Image<T>, obs: &Observation<T>, quantized: bool) -> T {
    let mut y = obs.op.apply(pred.as_slice());
    if quantized {
        y = obs.quant.requantize(&y);
    }
    let diff: Vec<T> = obs.y_hat.iter().zip(&y).map(|(&a, &b)| a - b).collect();
    norm_sq(&diff).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Dims;
    use crate::sensing::{MeasurementPacket, SensingSpec};

    fn setup() -> (DictionarySpec, Vec<AtomParams>, Observation<f64>) {
        let dims = Dims::new(16, 16);
        let spec = DictionarySpec::for_dims(dims);
        let shapes = spec.shapes();
        let atoms = vec![
            spec.shape_params(&shapes[3], 4.0, 5.0),
            spec.shape_params(&shapes[30], 11.0, 9.0),
        ];
        let img = Image::from_fn(dims, |x, y| ((x * 5 + y * 3) % 7) as f64 * 30.0);
        let packet = MeasurementPacket::encode(&img, SensingSpec::new(dims, 100, 9), 3).unwrap();
        (spec, atoms, Observation::new(&packet).unwrap())
    }

    #[test]
    fn in_span_measurements_cost_nothing() {
        let (spec, atoms, mut obs) = setup();
        let labels = [TransformLabel::IDENTITY; 2];
        let cols = assignment_columns::<f64>(&atoms, &labels, &spec, &obs.op).unwrap();
        obs.y_hat = cols[0].iter().zip(&cols[1]).map(|(a, b)| 3.0 * a - 7.5 * b).collect();
        assert!(data_cost(&atoms, &labels, &spec, &obs).unwrap() < 1e-8);
    }

    #[test]
    fn single_column_closed_form() {
        let (spec, atoms, obs) = setup();
        let l = [TransformLabel::translation(1, 0)];
        let psi = sensed_atom::<f64>(&apply_label(&atoms[0], &l[0], &spec).unwrap(), &obs.op).unwrap();
        let ip: f64 = psi.iter().zip(&obs.y_hat).map(|(a, b)| a * b).sum();
        let expect = norm_sq(&obs.y_hat) - ip * ip / norm_sq(&psi);
        let got = data_cost(&atoms[..1], &l, &spec, &obs).unwrap();
        assert!((got - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn cost_ignores_atom_order() {
        let (spec, atoms, obs) = setup();
        let labels = [TransformLabel::translation(1, 0), TransformLabel::translation(0, -2)];
        let a = data_cost(&atoms, &labels, &spec, &obs).unwrap();
        let rev_atoms = [atoms[1], atoms[0]];
        let rev_labels = [labels[1], labels[0]];
        let b = data_cost(&rev_atoms, &rev_labels, &spec, &obs).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn robust_not_above_plain_and_monotone() {
        let (spec, atoms, obs) = setup();
        let labels = [TransformLabel::IDENTITY; 2];
        let plain = data_cost(&atoms, &labels, &spec, &obs).unwrap();
        let r = robust_data_cost(&atoms, &labels, &spec, &obs).unwrap();
        assert!(r.cost <= plain + 1e-9 * plain);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        for i in 0..obs.len() {
            assert!(obs.lo[i] <= r.y_tilde[i] && r.y_tilde[i] <= obs.hi[i]);
        }
    }

    #[test]
    fn one_by_one_hand_case() {
        let sub = Subspace::from_columns(1, &[vec![1.0f64]]);
        let r = robust_fit(&sub, &[0.0], &[1.0], &[0.5]);
        assert!(r.cost.abs() < 1e-9);
        assert!((0.0..=1.0).contains(&r.y_tilde[0]));
        assert!((r.coeffs[0] - r.y_tilde[0]).abs() < 1e-9);
    }

    #[test]
    fn point_cells_reduce_to_plain_cost() {
        let (spec, atoms, mut obs) = setup();
        obs.lo = obs.y_hat.clone();
        obs.hi = obs.y_hat.clone();
        let labels = [TransformLabel::IDENTITY; 2];
        let plain = data_cost(&atoms, &labels, &spec, &obs).unwrap();
        let r = robust_data_cost(&atoms, &labels, &spec, &obs).unwrap();
        assert!((r.cost - plain).abs() < 1e-6);
    }

    #[test]
    fn self_generated_packet_is_consistent() {
        let dims = Dims::new(12, 12);
        let reference = Image::from_fn(dims, |x, y| ((x * 7 + y * 2) % 9) as f64 * 25.0);
        let mut field = MotionField::zeros(dims);
        for i in 0..40 {
            field.set(i, (2.0, 0.0));
        }
        let target = predict_forward(&reference, &field).unwrap();
        let packet = MeasurementPacket::encode(&target, SensingSpec::new(dims, 60, 3), 2).unwrap();
        let obs = Observation::new(&packet).unwrap();
        assert_eq!(consistency_cost(&field, &reference, &obs, true).unwrap(), 0.0);
        // A prediction perturbation that keeps every measurement inside its
        // cell leaves the quantized cost unchanged. Rows of Phi are
        // orthonormal, so each measurement moves by at most ||delta||.
        let y = obs.op.apply(target.as_slice());
        let margin = y
            .iter()
            .zip(&packet.indices)
            .map(|(&v, &i)| {
                let (a, b) = obs.quant.cell(i);
                (v - a).min(b - v)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(margin > 0.0);
        let mut delta = Image::from_fn(dims, |x, y| ((x + 3 * y) % 5) as f64 - 2.0);
        let scale = 0.5 * margin / delta.energy().sqrt();
        delta.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
        let mut nudged = target.clone();
        nudged.scaled_add(1.0, &delta);
        assert_eq!(consistency_of_prediction(&nudged, &obs, true), 0.0);
        assert!(consistency_of_prediction(&nudged, &obs, false) > 0.0);
    }
}
