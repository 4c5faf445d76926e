//! Encode, estimate, benchmark and metrics commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dictionary::{DictionarySpec, TransformLabel};
use crate::energy::{
    consistency_cost, data_cost, multiview_consistency, multiview_data_cost, multiview_smoothness, robust_data_cost,
    smoothness_cost, warp_view, DepthLabelSpec, EnergyConfig,
};
use crate::error::{Error, Result};
use crate::graphcut::{solve_correlation, solve_multiview, DepthEstimate, Mode, MotionEstimate};
use crate::image::Image;
use crate::io::{decode_pgm, read_bytes, read_field, read_pgm, write_atomic, write_pfm, write_pgm};
use crate::predict::{disparity_error, predict_forward, psnr};
use crate::sensing::{MeasurementPacket, Observation, SensingOperator, SensingSpec};
use crate::sparse::{matching_pursuit, SparseApprox};

use super::config::{ExperimentConfig, PointSpec};
use super::scene::SceneSpec;

/// Column order of the rate-distortion CSV.
pub const RD_COLUMNS: [&str; 22] = [
    "point",
    "mode",
    "rate",
    "bits",
    "seed",
    "reference_noise",
    "robust",
    "alpha1",
    "alpha2",
    "measurements",
    "bits_total",
    "bits_per_pixel",
    "psnr_db",
    "psnr_reference_db",
    "reference_quality_db",
    "disparity_error",
    "e_d",
    "e_s",
    "e_t",
    "mrf_energy",
    "truncated_terms",
    "status",
];

/// One rate-distortion point. `bits_per_pixel = bits_total / (N1 * N2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RdRecord {
    pub point: usize,
    pub mode: Mode,
    pub spec: PointSpec,
    /// Measurements per view.
    pub measurements: usize,
    /// Serialized packet sizes, headers included, summed over views.
    pub bits_total: u64,
    pub bits_per_pixel: f64,
    /// Prediction against the target, averaged over views.
    pub psnr_db: f64,
    /// Reference against the target: what no estimate at all would give.
    pub psnr_reference_db: f64,
    /// Degraded reference against the clean one.
    pub reference_quality_db: f64,
    /// Disparity error (opt1, opt2) or inverse-depth label error (opt3).
    pub disparity_error: Option<f64>,
    pub e_d: f64,
    pub e_s: f64,
    pub e_t: f64,
    pub mrf_energy: f64,
    pub truncated_terms: usize,
    /// Seconds; kept out of the CSV so reruns compare byte for byte.
    pub wall_time: f64,
    pub status: String,
}

impl RdRecord {
    fn failed(point: usize, mode: Mode, spec: PointSpec, err: &Error) -> Self {
        RdRecord {
            point,
            mode,
            spec,
            measurements: 0,
            bits_total: 0,
            bits_per_pixel: f64::NAN,
            psnr_db: f64::NAN,
            psnr_reference_db: f64::NAN,
            reference_quality_db: f64::NAN,
            disparity_error: None,
            e_d: f64::NAN,
            e_s: f64::NAN,
            e_t: f64::NAN,
            mrf_energy: f64::NAN,
            truncated_terms: 0,
            wall_time: 0.0,
            status: format!("error: {}", err.to_string().replace([',', '\n'], ";")),
        }
    }

    pub fn csv_row(&self) -> String {
        let s = &self.spec;
        let de = self.disparity_error.map_or(String::new(), |v| v.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.point,
            self.mode,
            s.rate,
            s.bits,
            s.seed,
            s.reference_noise,
            s.robust,
            s.alpha1,
            s.alpha2,
            self.measurements,
            self.bits_total,
            self.bits_per_pixel,
            self.psnr_db,
            self.psnr_reference_db,
            self.reference_quality_db,
            de,
            self.e_d,
            self.e_s,
            self.e_t,
            self.mrf_energy,
            self.truncated_terms,
            self.status
        )
    }
}

pub fn rd_csv(records: &[RdRecord]) -> String {
    let mut out = RD_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// A view to estimate: either the image itself (encoded here with the
/// configured sensing) or a packet from an external encoder.
#[derive(Debug, Clone)]
pub enum Target {
    Image(Image<f64>),
    Packet(MeasurementPacket),
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub reference: Image<f64>,
    pub targets: Vec<Target>,
    pub ground_truth: Option<Image<f64>>,
}

impl Inputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let reference = read_pgm::<f64>(&cfg.reference)?;
        let dims = reference.dims();
        let targets = cfg
            .targets
            .iter()
            .map(|p| {
                let bytes = read_bytes(p)?;
                let t = if bytes.starts_with(crate::sensing::MAGIC) {
                    Target::Packet(MeasurementPacket::from_bytes(&bytes)?)
                } else {
                    Target::Image(decode_pgm::<f64>(&bytes, &p.display().to_string())?.0)
                };
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        for t in &targets {
            let d = match t {
                Target::Image(i) => i.dims(),
                Target::Packet(p) => p.sensing.dims,
            };
            if d != dims {
                return Err(Error::DimMismatch { expected: dims, got: d });
            }
        }
        let ground_truth = match &cfg.ground_truth {
            Some(p) => {
                let g = read_field(p, cfg.ground_truth_scale)?;
                if g.dims() != dims {
                    return Err(Error::DimMismatch {
                        expected: dims,
                        got: g.dims(),
                    });
                }
                Some(g)
            }
            None => None,
        };
        Ok(Inputs {
            reference,
            targets,
            ground_truth,
        })
    }
}

/// Reference after a lossy codec of the given quality, simulated by seeded
/// Gaussian noise and 8-bit rounding.
pub fn degrade_reference(reference: &Image<f64>, sigma: f64, seed: u64) -> Result<Image<f64>> {
    if sigma == 0.0 {
        return Ok(reference.clone());
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::invalid("reference noise", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = reference
        .as_slice()
        .iter()
        .map(|&v| (v + noise.sample(&mut rng)).round().clamp(0.0, 255.0))
        .collect();
    Image::from_vec(reference.dims(), data)
}

#[derive(Debug, Clone)]
pub enum Solution {
    Motion(MotionEstimate<f64>),
    Depth(DepthEstimate<f64>),
}

#[derive(Debug, Clone)]
pub struct PointOutput {
    pub record: RdRecord,
    pub packets: Vec<MeasurementPacket>,
    pub predictions: Vec<Image<f64>>,
    pub solution: Solution,
}

/// Fraction of pixels whose inverse depth maps to a depth label at least
/// one step away from the true one.
pub fn depth_label_error(est: &Image<f64>, truth: &Image<f64>, ds: &DepthLabelSpec) -> Result<f64> {
    est.dims().check(truth.dims())?;
    let bad = est
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .filter(|(&e, &t)| ds.nearest_label(e).abs_diff(ds.nearest_label(t)) >= 1)
        .count();
    Ok(bad as f64 / est.dims().len() as f64)
}

/// Runs one point: encodes the targets (unless already packets), estimates
/// the correlation from `approx` of `reference`, predicts and scores.
pub fn run_point(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    reference: &Image<f64>,
    approx: &SparseApprox<f64>,
    spec: &DictionarySpec,
    point: &PointSpec,
    index: usize,
) -> Result<PointOutput> {
    let start = Instant::now();
    let dims = reference.dims();
    let packets = inputs
        .targets
        .iter()
        .enumerate()
        .map(|(j, t)| match t {
            Target::Packet(p) => Ok(p.clone()),
            Target::Image(img) => {
                let mut s = SensingSpec::from_rate(dims, point.rate, point.seed + j as u64)?;
                s.block_size = cfg.block_size;
                s.validate()?;
                MeasurementPacket::encode(img, s, point.bits)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut bits_total = 0;
    for p in &packets {
        bits_total += p.bits_total()?;
    }
    let views = packets
        .iter()
        .map(Observation::<f64>::new)
        .collect::<Result<Vec<_>>>()?;
    let energy = EnergyConfig {
        alpha1: point.alpha1,
        alpha2: point.alpha2,
        robust: point.robust,
        ..cfg.energy.clone()
    };
    let atoms = &approx.atoms;
    let (solution, predictions, terms, de) = match cfg.mode {
        Mode::Opt1 | Mode::Opt2 => {
            let obs = &views[0];
            let est = solve_correlation(cfg.mode, atoms, spec, obs, Some(reference), &energy)?;
            let pred = predict_forward(reference, &est.field)?;
            let e_d = if energy.robust {
                robust_data_cost(atoms, &est.labels, spec, obs)?.cost
            } else {
                data_cost(atoms, &est.labels, spec, obs)?
            };
            let e_s = smoothness_cost(&est.field, energy.tau);
            let e_t = consistency_cost(&est.field, reference, obs, energy.quantized_consistency)?;
            let de = match &inputs.ground_truth {
                Some(gt) => Some(disparity_error(&est.field.mh, gt)?),
                None => None,
            };
            (Solution::Motion(est), vec![pred], (e_d, e_s, e_t), de)
        }
        Mode::Opt3 => {
            let ds = cfg.depth.as_ref().expect("validated");
            let est = solve_multiview(atoms, &views, ds, Some(reference), &energy)?;
            let preds = (0..views.len())
                .map(|j| warp_view(reference, &est.inv_depth, j, ds))
                .collect::<Result<Vec<_>>>()?;
            let e_d = multiview_data_cost(atoms, &est.labels, &views, ds)?;
            let e_s = multiview_smoothness(&est.inv_depth, energy.tau);
            let e_t = multiview_consistency(&est.inv_depth, reference, &views, ds, energy.quantized_consistency)?;
            let de = match &inputs.ground_truth {
                Some(gt) => Some(depth_label_error(&est.inv_depth, gt, ds)?),
                None => None,
            };
            (Solution::Depth(est), preds, (e_d, e_s, e_t), de)
        }
    };
    let mut psnrs = Vec::new();
    let mut baseline = Vec::new();
    for (t, pred) in inputs.targets.iter().zip(&predictions) {
        if let Target::Image(img) = t {
            psnrs.push(psnr(pred, img)?);
            baseline.push(psnr(reference, img)?);
        }
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let (mrf_energy, truncated) = match &solution {
        Solution::Motion(m) => (
            m.estimate.mrf_energy,
            m.estimate.expansion.as_ref().map_or(0, |e| e.truncated_terms),
        ),
        Solution::Depth(d) => (
            d.estimate.mrf_energy,
            d.estimate.expansion.as_ref().map_or(0, |e| e.truncated_terms),
        ),
    };
    let record = RdRecord {
        point: index,
        mode: cfg.mode,
        spec: *point,
        measurements: packets[0].sensing.measurements,
        bits_total,
        bits_per_pixel: bits_total as f64 / dims.len() as f64,
        psnr_db: mean(&psnrs),
        psnr_reference_db: mean(&baseline),
        reference_quality_db: psnr(reference, &inputs.reference)?,
        disparity_error: de,
        e_d: terms.0,
        e_s: terms.1,
        e_t: terms.2,
        mrf_energy,
        truncated_terms: truncated,
        wall_time: start.elapsed().as_secs_f64(),
        status: "ok".into(),
    };
    Ok(PointOutput {
        record,
        packets,
        predictions,
        solution,
    })
}

/// Sparse approximation of `reference`, read from `sidecar` if it exists
/// and written there otherwise.
pub fn sparse_reference(
    reference: &Image<f64>,
    spec: &DictionarySpec,
    k: usize,
    sidecar: Option<&Path>,
) -> Result<SparseApprox<f64>> {
    if let Some(p) = sidecar {
        if p.is_file() {
            let text = String::from_utf8_lossy(&read_bytes(p)?).into_owned();
            let a = SparseApprox::<f64>::from_sidecar(&text, spec, &p.display().to_string())?;
            if a.dims == reference.dims() && a.len() >= k.min(a.len()) && (a.len() == k || a.exhausted) {
                return Ok(a);
            }
        }
    }
    let a = matching_pursuit(reference, spec, k)?;
    if let Some(p) = sidecar {
        if let Some(dir) = p.parent() {
            ensure_dir(dir)?;
        }
        write_atomic(p, a.to_sidecar(spec).as_bytes())?;
    }
    Ok(a)
}

fn ensure_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(format!("creating {}", p.display()), e))
}

pub fn label_lines(labels: &[TransformLabel]) -> String {
    let mut out = String::from("# atom d_tx d_ty d_theta d_sx d_sy\n");
    for (k, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{k} {} {} {} {} {}", l.d_tx, l.d_ty, l.d_theta, l.d_sx, l.d_sy);
    }
    out
}

pub fn parse_label_lines(text: &str, origin: &str) -> Result<Vec<TransformLabel>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<i32> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                path: origin.into(),
                line: n + 1,
                msg: "expected integers".into(),
            })?;
        if v.len() != 6 || v[0] as usize != out.len() {
            return Err(Error::Parse {
                path: origin.into(),
                line: n + 1,
                msg: "expected `atom d_tx d_ty d_theta d_sx d_sy` in atom order".into(),
            });
        }
        out.push(TransformLabel {
            d_tx: v[1],
            d_ty: v[2],
            d_theta: v[3],
            d_sx: v[4],
            d_sy: v[5],
        });
    }
    Ok(out)
}

/// What `estimate` wrote.
#[derive(Debug, Clone)]
pub struct EstimateOutput {
    pub point: PointOutput,
    pub files: Vec<PathBuf>,
}

/// Single estimate at the configured point; writes the predicted view(s),
/// the field, the labels, the unary table, the energy trace and the record.
pub fn estimate(cfg: &ExperimentConfig) -> Result<EstimateOutput> {
    let inputs = Inputs::load(cfg)?;
    let dims = inputs.reference.dims();
    let spec = DictionarySpec::from_kv(&cfg.kv, dims)?;
    let approx = sparse_reference(&inputs.reference, &spec, cfg.atoms, cfg.sidecar.as_deref())?;
    let point = run_point(cfg, &inputs, &inputs.reference, &approx, &spec, &cfg.point(), 0)?;
    ensure_dir(&cfg.output)?;
    let out = &cfg.output;
    let mut files = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let p = out.join(name);
        write_atomic(&p, bytes)?;
        files.push(p);
        Ok(())
    };
    put("atoms.txt", approx.to_sidecar(&spec).as_bytes())?;
    let (estimate, label_names) = match &point.solution {
        Solution::Motion(m) => {
            put("labels.txt", label_lines(&m.labels).as_bytes())?;
            let names: Vec<String> = m
                .label_set
                .iter()
                .map(|l| format!("{}:{}:{}:{}:{}", l.d_tx, l.d_ty, l.d_theta, l.d_sx, l.d_sy))
                .collect();
            (&m.estimate, names)
        }
        Solution::Depth(d) => {
            let mut text = String::from("# atom depth_label\n");
            for (k, l) in d.labels.iter().enumerate() {
                let _ = writeln!(text, "{k} {l}");
            }
            put("labels.txt", text.as_bytes())?;
            (&d.estimate, (0..estimate_levels(cfg)).map(|l| l.to_string()).collect())
        }
    };
    put("unary.csv", estimate.table.to_csv(&label_names).as_bytes())?;
    let mut trace = String::from("sweep,energy\n");
    if let Some(e) = &estimate.expansion {
        for (i, v) in e.trace.iter().enumerate() {
            let _ = writeln!(trace, "{i},{v}");
        }
    } else {
        let _ = writeln!(trace, "0,{}", estimate.mrf_energy);
    }
    put("energy_trace.csv", trace.as_bytes())?;
    put("record.csv", rd_csv(std::slice::from_ref(&point.record)).as_bytes())?;
    let mut ppaths = Vec::new();
    for (j, p) in point.predictions.iter().enumerate() {
        let path = out.join(format!("predicted_{j}.pgm"));
        write_pgm(&path, p)?;
        ppaths.push(path);
    }
    match &point.solution {
        Solution::Motion(m) => {
            write_pfm(&out.join("field_h.pfm"), &m.field.mh)?;
            write_pfm(&out.join("field_v.pfm"), &m.field.mv)?;
            ppaths.push(out.join("field_h.pfm"));
            ppaths.push(out.join("field_v.pfm"));
        }
        Solution::Depth(d) => {
            write_pfm(&out.join("inv_depth.pfm"), &d.inv_depth)?;
            ppaths.push(out.join("inv_depth.pfm"));
        }
    }
    files.extend(ppaths);
    Ok(EstimateOutput { point, files })
}

fn estimate_levels(cfg: &ExperimentConfig) -> usize {
    cfg.depth.as_ref().map_or(0, |d| d.levels)
}

/// Upper convex hull of `(bits_per_pixel, psnr_db)` over the successful
/// points, by increasing rate.
pub fn rd_hull(records: &[RdRecord]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.status == "ok" && r.bits_per_pixel.is_finite() && r.psnr_db.is_finite())
        .map(|r| (r.bits_per_pixel, r.psnr_db))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutput {
    pub records: Vec<RdRecord>,
    pub csv: PathBuf,
    pub timings: PathBuf,
    pub summary: PathBuf,
}

/// Runs every sweep point. Failed points are recorded and the sweep goes on.
pub fn benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkOutput> {
    let inputs = Inputs::load(cfg)?;
    let dims = inputs.reference.dims();
    let spec = DictionarySpec::from_kv(&cfg.kv, dims)?;
    let mut cache: Vec<(f64, Image<f64>, SparseApprox<f64>)> = Vec::new();
    let mut records = Vec::new();
    for (i, point) in cfg.points().into_iter().enumerate() {
        let noise = point.reference_noise;
        let prepared = match cache.iter().position(|(n, _, _)| *n == noise) {
            Some(c) => Ok(c),
            None => {
                let seed = cfg.sweep.reference_seed;
                degrade_reference(&inputs.reference, noise, seed).and_then(|r| {
                    let sidecar = if noise == 0.0 { cfg.sidecar.as_deref() } else { None };
                    let a = sparse_reference(&r, &spec, cfg.atoms, sidecar)?;
                    cache.push((noise, r, a));
                    Ok(cache.len() - 1)
                })
            }
        };
        let result = prepared.and_then(|c| {
            let (_, r, a) = &cache[c];
            run_point(cfg, &inputs, r, a, &spec, &point, i)
        });
        records.push(match result {
            Ok(p) => p.record,
            Err(e) => RdRecord::failed(i, cfg.mode, point, &e),
        });
    }
    ensure_dir(&cfg.output)?;
    let csv = cfg.output.join("rd.csv");
    write_atomic(&csv, rd_csv(&records).as_bytes())?;
    let mut t = String::from("point,wall_time_s\n");
    for r in &records {
        let _ = writeln!(t, "{},{:.3}", r.point, r.wall_time);
    }
    let timings = cfg.output.join("timings.csv");
    write_atomic(&timings, t.as_bytes())?;
    let mut s = String::new();
    let ok = records.iter().filter(|r| r.status == "ok").count();
    let _ = writeln!(s, "points {} ok {} failed {}", records.len(), ok, records.len() - ok);
    if let Some(b) = cfg.reference_bits {
        let _ = writeln!(s, "reference_bits {b}");
    }
    let _ = writeln!(s, "rd_hull bits_per_pixel psnr_db");
    for (x, y) in rd_hull(&records) {
        let _ = writeln!(s, "{x} {y}");
    }
    let summary = cfg.output.join("summary.txt");
    write_atomic(&summary, s.as_bytes())?;
    Ok(BenchmarkOutput {
        records,
        csv,
        timings,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeReport {
    pub measurements: usize,
    pub bits: u64,
    pub bytes: u64,
}

pub fn encode(image: &Path, output: &Path, sensing: SensingSpec, bits: u8) -> Result<EncodeReport> {
    let img = read_pgm::<f64>(image)?;
    img.dims().check(sensing.dims)?;
    let packet = MeasurementPacket::encode(&img, sensing, bits)?;
    let written = packet.write(output)?;
    Ok(EncodeReport {
        measurements: sensing.measurements,
        bits: written,
        bytes: written / 8,
    })
}

/// Least-squares image from the dequantized measurements alone (`Phi^T
/// y_hat`); exact at full rate up to quantization.
pub fn decode_measurements(packet: &MeasurementPacket) -> Result<Image<f64>> {
    let op = SensingOperator::new(packet.sensing)?;
    let y: Vec<f64> = packet.dequantized();
    Image::from_vec(packet.sensing.dims, op.adjoint(&y))
}

/// Writes `view_J.pgm`, ground-truth `motion_h_J.pfm` / `motion_v_J.pfm`
/// for every non-reference view and `inv_depth.pfm` for depth scenes.
pub fn synthesize(spec: &SceneSpec, out: &Path) -> Result<Vec<PathBuf>> {
    let scene = spec.render()?;
    ensure_dir(out)?;
    let mut files = Vec::new();
    for (j, v) in scene.views.iter().enumerate() {
        let p = out.join(format!("view_{j}.pgm"));
        write_pgm(&p, v)?;
        files.push(p);
    }
    for (j, (h, v)) in scene.motion_h.iter().zip(&scene.motion_v).enumerate() {
        let p = out.join(format!("motion_h_{}.pfm", j + 1));
        write_pfm(&p, h)?;
        files.push(p);
        let p = out.join(format!("motion_v_{}.pfm", j + 1));
        write_pfm(&p, v)?;
        files.push(p);
    }
    if let Some(d) = &scene.inv_depth {
        let p = out.join("inv_depth.pfm");
        write_pfm(&p, d)?;
        files.push(p);
    }
    Ok(files)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub psnr_db: Option<f64>,
    pub disparity_error: Option<f64>,
}

/// PSNR between two 8-bit images and/or disparity error between an
/// estimated field and a ground truth (PFM, or PGM with `gt_scale`).
pub fn metrics(images: Option<(&Path, &Path)>, fields: Option<(&Path, &Path)>, gt_scale: f64) -> Result<Metrics> {
    if images.is_none() && fields.is_none() {
        return Err(Error::invalid("metrics", "nothing to compare"));
    }
    let psnr_db = match images {
        Some((a, b)) => Some(psnr(&read_pgm::<f64>(a)?, &read_pgm::<f64>(b)?)?),
        None => None,
    };
    let disparity_error = match fields {
        Some((e, g)) => Some(disparity_error(&read_field(e, 1.0)?, &read_field(g, gt_scale)?)?),
        None => None,
    };
    Ok(Metrics {
        psnr_db,
        disparity_error,
    })
}
