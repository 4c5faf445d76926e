//! Shared fixtures: scenes and experiment configs from the repository's
//! `configs/` directory, rendered into scratch directories.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gcmp::kv::KvConfig;
use gcmp::pipeline::{synthesize, ExperimentConfig, Scene, SceneSpec};

pub fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Fresh, empty directory under the system temp dir.
pub fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gcmp-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

/// Renders `configs/<name>_scene.kv` into `dir`.
pub fn render(name: &str, dir: &Path) -> Scene {
    let kv = KvConfig::load(&configs().join(format!("{name}_scene.kv"))).unwrap();
    let spec = SceneSpec::from_kv(&kv).unwrap();
    synthesize(&spec, dir).unwrap();
    spec.render().unwrap()
}

/// `configs/<name>.kv` with its inputs redirected to `data` and its outputs
/// to `out`, then `extra` applied on top.
pub fn experiment(name: &str, data: &Path, out: &Path, extra: &[(&str, String)]) -> ExperimentConfig {
    let path = configs().join(format!("{name}.kv"));
    let file = KvConfig::load(&path).unwrap();
    let mut kv = KvConfig::new();
    for key in ["reference", "target", "ground_truth"] {
        if let Some(v) = file.raw(key) {
            let moved: Vec<String> = v
                .split(',')
                .map(|p| {
                    data.join(Path::new(p.trim()).file_name().unwrap())
                        .display()
                        .to_string()
                })
                .collect();
            kv.set(key, moved.join(", "));
        }
    }
    kv.set("output", out.display());
    kv.set("mp.sidecar", out.join("atoms.txt").display());
    for (k, v) in extra {
        kv.set(*k, v);
    }
    ExperimentConfig::load(&path, &kv).unwrap()
}
