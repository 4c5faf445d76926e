//! Experiment configuration: one `key = value` file, overridable per key.

use std::path::{Path, PathBuf};

use crate::energy::{DepthLabelSpec, EnergyConfig};
use crate::error::{Error, Result};
use crate::graphcut::Mode;
use crate::kv::KvConfig;
use crate::sensing::{SensingSpec, MAX_BITS};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub reference: PathBuf,
    /// Target images (PGM) or measurement packets (GCMP); one per view.
    pub targets: Vec<PathBuf>,
    /// Horizontal motion of view 1 (opt1, opt2) or inverse depth (opt3) on
    /// the reference grid.
    pub ground_truth: Option<PathBuf>,
    /// Stored value per unit of field, for 8/16-bit PGM ground truths.
    pub ground_truth_scale: f64,
    pub mode: Mode,
    /// Atoms in the sparse reference.
    pub atoms: usize,
    /// Cached sparse reference; written on first use.
    pub sidecar: Option<PathBuf>,
    pub rate: f64,
    pub bits: u8,
    /// Seed of view `j` is `seed + j`.
    pub seed: u64,
    pub block_size: usize,
    pub energy: EnergyConfig,
    pub depth: Option<DepthLabelSpec>,
    pub output: PathBuf,
    /// Rate of the reference codec, only carried into the summary.
    pub reference_bits: Option<f64>,
    pub sweep: Sweep,
    /// Everything read, for the dictionary (which needs the image size).
    pub kv: KvConfig,
}

/// Benchmark axes; an empty list means the single configured value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sweep {
    pub rates: Vec<f64>,
    pub bits: Vec<u8>,
    /// Standard deviations of Gaussian noise added to the reference, as a
    /// stand-in for reference codec quality.
    pub reference_noise: Vec<f64>,
    pub reference_seed: u64,
    pub robust: Vec<bool>,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    /// Sensing seeds, for averaging over measurement draws.
    pub seeds: Vec<u64>,
}

/// One benchmark point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub rate: f64,
    pub bits: u8,
    pub reference_noise: f64,
    pub robust: bool,
    pub alpha1: f64,
    pub alpha2: f64,
    pub seed: u64,
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    /// Reads `path`, applies `overrides` on top, and resolves relative paths
    /// against the directory of `path`.
    pub fn load(path: &Path, overrides: &KvConfig) -> Result<Self> {
        let mut kv = KvConfig::load(path)?;
        kv.merge(overrides);
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(kv, base)
    }

    pub fn from_kv(kv: KvConfig, base: &Path) -> Result<Self> {
        let reference = resolve(base, &kv.require::<String>("reference")?);
        let targets: Vec<PathBuf> = kv
            .get_list::<String>("target")?
            .iter()
            .map(|t| resolve(base, t))
            .collect();
        let ground_truth = kv.get::<String>("ground_truth")?.map(|g| resolve(base, &g));
        let sidecar = kv.get::<String>("mp.sidecar")?.map(|g| resolve(base, &g));
        let mode: Mode = kv.get_or("mode", Mode::Opt2)?;
        let depth = if mode == Mode::Opt3 || kv.contains("depth.levels") {
            Some(DepthLabelSpec::from_kv(&kv)?)
        } else {
            None
        };
        let sweep = Sweep {
            rates: kv.get_list("benchmark.rates")?,
            bits: kv.get_list("benchmark.bits")?,
            reference_noise: kv.get_list("benchmark.reference_noise")?,
            reference_seed: kv.get_or("benchmark.reference_seed", 1)?,
            robust: kv.get_list("benchmark.robust")?,
            alpha1: kv.get_list("benchmark.alpha1")?,
            alpha2: kv.get_list("benchmark.alpha2")?,
            seeds: kv.get_list("benchmark.seeds")?,
        };
        let cfg = ExperimentConfig {
            reference,
            targets,
            ground_truth,
            ground_truth_scale: kv.get_or("ground_truth.scale", 1.0)?,
            mode,
            atoms: kv.get_or("mp.atoms", 15)?,
            sidecar,
            rate: kv.get_or("sensing.rate", 0.05)?,
            bits: kv.get_or("quant.bits", 2)?,
            seed: kv.get_or("sensing.seed", 1)?,
            block_size: kv.get_or("sensing.block_size", SensingSpec::DEFAULT_BLOCK_SIZE)?,
            energy: EnergyConfig::from_kv(&kv)?,
            depth,
            output: resolve(base, &kv.get_or("output", String::from("out"))?),
            reference_bits: kv.get("reference.bits")?,
            sweep,
            kv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms == 0 {
            return Err(Error::invalid("mp.atoms", "need at least one atom"));
        }
        if self.targets.is_empty() {
            return Err(Error::invalid("target", "no target given"));
        }
        match self.mode {
            Mode::Opt1 | Mode::Opt2 if self.targets.len() != 1 => {
                return Err(Error::invalid("target", format!("{} expects one target", self.mode)));
            }
            Mode::Opt3 => {
                let d = self.depth.as_ref().expect("parsed for opt3");
                if d.view_count() != self.targets.len() {
                    return Err(Error::invalid(
                        "target",
                        format!("{} targets for {} baselines", self.targets.len(), d.view_count()),
                    ));
                }
            }
            _ => {}
        }
        if !(self.ground_truth_scale > 0.0) {
            return Err(Error::invalid("ground_truth.scale", "must be > 0"));
        }
        for &b in self.sweep.bits.iter().chain([&self.bits]) {
            if b == 0 || b > MAX_BITS {
                return Err(Error::invalid("quant.bits", format!("{b} not in 1..={MAX_BITS}")));
            }
        }
        for &r in self.sweep.rates.iter().chain([&self.rate]) {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::invalid("sensing.rate", format!("{r} not in (0, 1]")));
            }
        }
        for key in [
            "benchmark.rates",
            "benchmark.bits",
            "benchmark.reference_noise",
            "benchmark.seeds",
        ] {
            if self.kv.contains(key) && self.kv.get_list::<String>(key)?.is_empty() {
                return Err(Error::invalid("benchmark", format!("`{key}` is empty")));
            }
        }
        if self.sweep.reference_noise.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::invalid("benchmark.reference_noise", "must be finite and >= 0"));
        }
        for p in std::iter::once(&self.reference)
            .chain(&self.targets)
            .chain(&self.ground_truth)
        {
            if !p.is_file() {
                return Err(Error::invalid("config", format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }

    /// The configured values as a single point.
    pub fn point(&self) -> PointSpec {
        PointSpec {
            rate: self.rate,
            bits: self.bits,
            reference_noise: 0.0,
            robust: self.energy.robust,
            alpha1: self.energy.alpha1,
            alpha2: self.energy.alpha2,
            seed: self.seed,
        }
    }

    /// Every combination of the sweep axes, reference noise outermost and
    /// the sensing seed innermost.
    pub fn points(&self) -> Vec<PointSpec> {
        fn or<V: Copy>(list: &[V], v: V) -> Vec<V> {
            if list.is_empty() {
                vec![v]
            } else {
                list.to_vec()
            }
        }
        let p = self.point();
        let mut out = Vec::new();
        for &reference_noise in &or(&self.sweep.reference_noise, 0.0) {
            for &rate in &or(&self.sweep.rates, p.rate) {
                for &bits in &or(&self.sweep.bits, p.bits) {
                    for &robust in &or(&self.sweep.robust, p.robust) {
                        for &alpha1 in &or(&self.sweep.alpha1, p.alpha1) {
                            for &alpha2 in &or(&self.sweep.alpha2, p.alpha2) {
                                for &seed in &or(&self.sweep.seeds, p.seed) {
                                    out.push(PointSpec {
                                        rate,
                                        bits,
                                        reference_noise,
                                        robust,
                                        alpha1,
                                        alpha2,
                                        seed,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
