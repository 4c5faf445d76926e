//! Dense motion fields induced by per-atom transformation labels, and the
//! truncated smoothness penalty on them.
//!
//! A label moving atom `(tx, ty, theta, sx, sy)` to `(tx', ty', theta', sx',
//! sy')` moves pixel `z = (x, y)` by
//!
//! ```text
//! m(z) = (u, v) - S R T,   u = x - tx,  v = y - ty
//! S = diag(sx / sx', sy / sy')
//! R = [[cos d, sin d], [-sin d, cos d]],  d = theta' - theta
//! T = (u - (tx' - tx), v - (ty' - ty))
//! ```
//!
//! [`TranslationVariant::Literal`] uses `tx' - tx` in both entries of `T`.

use std::f64::consts::PI;

use crate::dictionary::{AtomParams, DictionarySpec, TransformLabel, ROTATION_STEP};
use crate::image::Dims;
use crate::predict::MotionField;

use super::layout::AtomLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TranslationVariant {
    #[default]
    Vertical,
    Literal,
}

impl std::str::FromStr for TranslationVariant {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "vertical" => Ok(TranslationVariant::Vertical),
            "literal" => Ok(TranslationVariant::Literal),
            other => Err(crate::Error::invalid("translation variant", other.to_string())),
        }
    }
}

impl std::fmt::Display for TranslationVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TranslationVariant::Vertical => "vertical",
            TranslationVariant::Literal => "literal",
        })
    }
}

/// Parameter change of one label applied to one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelGeometry {
    pub dtx: f64,
    pub dty: f64,
    pub dtheta: f64,
    /// `sx / sx'`
    pub sx_ratio: f64,
    /// `sy / sy'`
    pub sy_ratio: f64,
}

impl LabelGeometry {
    pub const IDENTITY: LabelGeometry = LabelGeometry {
        dtx: 0.0,
        dty: 0.0,
        dtheta: 0.0,
        sx_ratio: 1.0,
        sy_ratio: 1.0,
    };

    pub fn translation(dtx: f64, dty: f64) -> Self {
        LabelGeometry {
            dtx,
            dty,
            ..Self::IDENTITY
        }
    }

    /// Geometry of `l` on `p`. Scale steps past the grid ends are clamped
    /// here, so labels that `apply_label` rejects still get a motion.
    pub fn of(p: &AtomParams, l: &TransformLabel, spec: &DictionarySpec) -> Self {
        let shift = |grid: Vec<f64>, s: f64, d: i32, idx: usize| -> f64 {
            if d == 0 {
                return 1.0;
            }
            let j = (idx as i64 + d as i64).clamp(0, grid.len() as i64 - 1) as usize;
            s / grid[j]
        };
        let dtheta = if l.d_theta == 0 {
            0.0
        } else {
            let t = p.theta + l.d_theta as f64 * ROTATION_STEP;
            crate::dictionary::normalize_angle(t) - p.theta
        };
        LabelGeometry {
            dtx: l.d_tx as f64,
            dty: l.d_ty as f64,
            dtheta: wrap_half_turn(dtheta),
            sx_ratio: shift(spec.scales_h(), p.sx, l.d_sx, spec.scale_h_index(p.sx)),
            sy_ratio: shift(spec.scales_v(), p.sy, l.d_sy, spec.scale_v_index(p.sy)),
        }
    }

    /// Motion of pixel `(x, y)` under this change of atom `p`.
    #[inline]
    pub fn motion(&self, p: &AtomParams, x: f64, y: f64, variant: TranslationVariant) -> (f64, f64) {
        self.prepare(p, variant).at(x, y)
    }

    /// Trigonometry done once, for evaluating many pixels.
    pub fn prepare(&self, p: &AtomParams, variant: TranslationVariant) -> PreparedMotion {
        let (sin, cos) = self.dtheta.sin_cos();
        PreparedMotion {
            cx: p.tx,
            cy: p.ty,
            dx: self.dtx,
            dy: match variant {
                TranslationVariant::Vertical => self.dty,
                TranslationVariant::Literal => self.dtx,
            },
            cos,
            sin,
            sx: self.sx_ratio,
            sy: self.sy_ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedMotion {
    cx: f64,
    cy: f64,
    dx: f64,
    dy: f64,
    cos: f64,
    sin: f64,
    sx: f64,
    sy: f64,
}

impl PreparedMotion {
    #[inline]
    pub fn at(&self, x: f64, y: f64) -> (f64, f64) {
        let u = x - self.cx;
        let v = y - self.cy;
        let t0 = u - self.dx;
        let t1 = v - self.dy;
        let r0 = self.cos * t0 + self.sin * t1;
        let r1 = -self.sin * t0 + self.cos * t1;
        (u - self.sx * r0, v - self.sy * r1)
    }
}

/// Maps an angle difference on the `[0, pi)` circle to `[-pi/2, pi/2)`.
fn wrap_half_turn(d: f64) -> f64 {
    let mut d = d;
    if d >= PI / 2.0 {
        d -= PI;
    } else if d < -PI / 2.0 {
        d += PI;
    }
    d
}

/// Field induced by per-atom label geometries: every owned pixel moves with
/// its owner, all other pixels stay.
pub fn motion_field_from_geometry(
    atoms: &[AtomParams],
    geometry: &[LabelGeometry],
    layout: &AtomLayout,
    variant: TranslationVariant,
) -> MotionField {
    let dims = layout.dims;
    let prepared: Vec<PreparedMotion> = atoms.iter().zip(geometry).map(|(p, g)| g.prepare(p, variant)).collect();
    let mut f = MotionField::zeros(dims);
    for i in 0..dims.len() {
        if let Some(k) = layout.owner[i] {
            if geometry[k] == LabelGeometry::IDENTITY {
                continue;
            }
            let (x, y) = dims.coords(i);
            f.set(i, prepared[k].at(x as f64, y as f64));
        }
    }
    f
}

/// Field induced by a per-atom label assignment.
pub fn motion_field(
    atoms: &[AtomParams],
    labels: &[TransformLabel],
    layout: &AtomLayout,
    spec: &DictionarySpec,
    variant: TranslationVariant,
) -> MotionField {
    let geometry: Vec<LabelGeometry> = atoms
        .iter()
        .zip(labels)
        .map(|(p, l)| LabelGeometry::of(p, l, spec))
        .collect();
    motion_field_from_geometry(atoms, &geometry, layout, variant)
}

/// `sum over 4-neighbour pairs of min(|dmh| + |dmv|, tau)`.
pub fn smoothness_cost(field: &MotionField, tau: f64) -> f64 {
    let dims: Dims = field.dims();
    dims.neighbor_pairs()
        .map(|(a, b)| {
            let (ha, va) = field.at(a);
            let (hb, vb) = field.at(b);
            ((ha - hb).abs() + (va - vb).abs()).min(tau)
        })
        .sum()
}
