use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gcmp::kv::KvConfig;
use gcmp::pipeline::{self, ExperimentConfig, SceneSpec};
use gcmp::sensing::SensingSpec;
use gcmp::Error;

#[derive(Parser)]
#[command(name = "gcmp", version, about = "Correlation estimation from compressed images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress an image to quantized, entropy-coded measurements.
    Encode {
        image: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Fraction of pixels to measure, in (0, 1].
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
        #[arg(long, default_value_t = 2)]
        bits: u8,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = SensingSpec::DEFAULT_BLOCK_SIZE)]
        block_size: usize,
    },
    /// Estimate the correlation for one configuration and predict the target.
    Estimate(ExperimentArgs),
    /// Sweep rates, bits, reference quality and weights; write rd.csv.
    Benchmark(ExperimentArgs),
    /// Render a synthetic scene and its ground truth.
    Synthesize {
        /// Scene description (`scene.*` keys).
        scene: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// PSNR between two images and/or disparity error between two fields.
    Metrics {
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        psnr: Option<Vec<PathBuf>>,
        #[arg(long, num_args = 2, value_names = ["ESTIMATE", "TRUTH"])]
        disparity: Option<Vec<PathBuf>>,
        /// Stored value per pixel of disparity in PGM ground truths.
        #[arg(long, default_value_t = 1.0)]
        gt_scale: f64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration (`key = value` lines).
    config: PathBuf,
    #[arg(long)]
    reference: Option<String>,
    /// Target image or packet; repeat for multi-view.
    #[arg(long)]
    target: Vec<String>,
    #[arg(long)]
    ground_truth: Option<String>,
    /// opt1, opt2 or opt3.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    bits: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<String>,
    /// Any other configuration key; wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn overrides(pairs: &[String]) -> Result<KvConfig, Error> {
    let mut kv = KvConfig::new();
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::invalid("--set", format!("`{p}` is not KEY=VALUE")))?;
        kv.set(k.trim(), v.trim());
    }
    Ok(kv)
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut kv = overrides(&self.set)?;
        // Explicit flags resolve against the working directory, not the config.
        let abs = |p: &str| std::path::absolute(p).map_or(p.to_string(), |a| a.display().to_string());
        if let Some(v) = &self.reference {
            kv.set("reference", abs(v));
        }
        if !self.target.is_empty() {
            kv.set(
                "target",
                self.target.iter().map(|t| abs(t)).collect::<Vec<_>>().join(", "),
            );
        }
        if let Some(v) = &self.ground_truth {
            kv.set("ground_truth", abs(v));
        }
        if let Some(v) = &self.output {
            kv.set("output", abs(v));
        }
        if let Some(v) = &self.mode {
            kv.set("mode", v);
        }
        if let Some(v) = self.atoms {
            kv.set("mp.atoms", v);
        }
        if let Some(v) = self.rate {
            kv.set("sensing.rate", v);
        }
        if let Some(v) = self.bits {
            kv.set("quant.bits", v);
        }
        if let Some(v) = self.seed {
            kv.set("sensing.seed", v);
        }
        ExperimentConfig::load(&self.config, &kv)
    }
}

fn show(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn pair(v: &Option<Vec<PathBuf>>) -> Option<(&Path, &Path)> {
    v.as_ref().map(|v| (v[0].as_path(), v[1].as_path()))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Encode {
            image,
            output,
            rate,
            bits,
            seed,
            block_size,
        } => {
            let dims = gcmp::io::read_pgm::<f64>(&image)?.dims();
            let mut spec = SensingSpec::from_rate(dims, rate, seed)?;
            spec.block_size = block_size;
            spec.validate()?;
            let r = pipeline::encode(&image, &output, spec, bits)?;
            println!("measurements {}", r.measurements);
            println!("bits {}", r.bits);
            println!("bytes {}", r.bytes);
        }
        Command::Estimate(args) => {
            let cfg = args.load()?;
            let out = pipeline::estimate(&cfg)?;
            let r = &out.point.record;
            println!("{}", pipeline::RD_COLUMNS.join(","));
            println!("{}", r.csv_row());
            show(&out.files);
        }
        Command::Benchmark(args) => {
            let cfg = args.load()?;
            let out = pipeline::benchmark(&cfg)?;
            let failed = out.records.iter().filter(|r| r.status != "ok").count();
            println!("points {} failed {}", out.records.len(), failed);
            show(&[out.csv, out.timings, out.summary]);
        }
        Command::Synthesize { scene, output, set } => {
            let mut kv = KvConfig::load(&scene)?;
            kv.merge(&overrides(&set)?);
            let spec = SceneSpec::from_kv(&kv)?;
            show(&pipeline::synthesize(&spec, &output)?);
        }
        Command::Metrics {
            psnr,
            disparity,
            gt_scale,
        } => {
            let m = pipeline::metrics(pair(&psnr), pair(&disparity), gt_scale)?;
            if let Some(p) = m.psnr_db {
                println!("psnr_db {p:.4}");
            }
            if let Some(d) = m.disparity_error {
                println!("disparity_error {d:.6}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
