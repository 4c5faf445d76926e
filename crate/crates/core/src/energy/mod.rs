//! Energy terms of the correlation estimate: data and robust data costs on
//! the measurements, smoothness of the induced dense field, consistency of
//! the warped prediction, and their multi-view counterparts.

mod data;
mod layout;
mod motion;
mod multiview;

pub use data::{
    assignment_columns, consistency_cost, consistency_of_prediction, data_cost, projection_cost, robust_data_cost,
    robust_fit, sensed_atom, RobustFit, ROBUST_MAX_ITERS, ROBUST_REL_TOL,
};
pub use layout::AtomLayout;
pub use motion::{
    motion_field, motion_field_from_geometry, smoothness_cost, LabelGeometry, PreparedMotion, TranslationVariant,
};
pub(crate) use multiview::depth_distance;
pub use multiview::{
    disparity_field, inverse_depth_field, multiview_consistency, multiview_data_cost, multiview_smoothness,
    project_atom, warp_view, DepthLabelSpec,
};

use crate::dictionary::SearchWindow;
use crate::error::{Error, Result};
use crate::kv::KvConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau: f64,
    /// Use the quantization-cell robust data cost instead of the plain one.
    pub robust: bool,
    pub window: SearchWindow,
    pub translation: TranslationVariant,
    /// Support threshold as a fraction of each atom's peak.
    pub support_eps: f64,
    /// Re-quantize the predicted measurements in the consistency term.
    pub quantized_consistency: bool,
    /// Cap on alpha-expansion sweeps over the label set.
    pub max_sweeps: usize,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            alpha1: 1.0,
            alpha2: 1.0,
            tau: 2.0,
            robust: false,
            window: SearchWindow::translation(3, 3),
            translation: TranslationVariant::Vertical,
            support_eps: 0.01,
            quantized_consistency: true,
            max_sweeps: 5,
        }
    }
}

impl EnergyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 >= 0.0 && self.alpha2 >= 0.0 && self.alpha1.is_finite() && self.alpha2.is_finite()) {
            return Err(Error::invalid("energy", "alpha1 and alpha2 must be finite and >= 0"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("energy", format!("tau {} must be > 0", self.tau)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::invalid("energy", "max_sweeps must be >= 1"));
        }
        if !(self.support_eps > 0.0 && self.support_eps < 1.0) {
            return Err(Error::invalid("energy", "support_eps must be in (0, 1)"));
        }
        Ok(())
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = EnergyConfig::default();
        let window = if ["window.tx", "window.ty", "window.theta", "window.sx", "window.sy"]
            .iter()
            .any(|k| kv.contains(k))
        {
            SearchWindow::from_kv(kv)?
        } else {
            d.window
        };
        let c = EnergyConfig {
            alpha1: kv.get_or("energy.alpha1", d.alpha1)?,
            alpha2: kv.get_or("energy.alpha2", d.alpha2)?,
            tau: kv.get_or("energy.tau", d.tau)?,
            robust: kv.get_or("energy.robust", d.robust)?,
            window,
            translation: kv.get_or("energy.translation", d.translation)?,
            support_eps: kv.get_or("energy.support_eps", d.support_eps)?,
            quantized_consistency: kv.get_or("energy.quantized_consistency", d.quantized_consistency)?,
            max_sweeps: kv.get_or("energy.max_sweeps", d.max_sweeps)?,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn write_kv(&self, kv: &mut KvConfig) {
        kv.set("energy.alpha1", self.alpha1);
        kv.set("energy.alpha2", self.alpha2);
        kv.set("energy.tau", self.tau);
        kv.set("energy.robust", self.robust);
        kv.set("energy.translation", self.translation);
        kv.set("energy.support_eps", self.support_eps);
        kv.set("energy.quantized_consistency", self.quantized_consistency);
        kv.set("energy.max_sweeps", self.max_sweeps);
        self.window.write_kv(kv);
    }
}
