use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gcmp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcmp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gcmp-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

const SCENE: &str = "scene.rows = 24
scene.cols = 32
scene.background = 30
scene.seed = 4
scene.objects = 1
scene.object.0 = rect, 12, 10, 8, 8, 200
scene.object.0.motion = 2, 0, 1
";

const EXPERIMENT: &str = "reference = data/view_0.pgm
target = data/view_1.pgm
ground_truth = data/motion_h_1.pfm
output = out
mp.atoms = 5
sensing.rate = 0.25
window.tx = 2
window.ty = 1
window.sx = 0
window.sy = 0
energy.alpha1 = 10000
energy.alpha2 = 300
";

fn setup(name: &str) -> PathBuf {
    let d = scratch(name);
    std::fs::write(d.join("scene.kv"), SCENE).unwrap();
    std::fs::write(d.join("exp.kv"), EXPERIMENT).unwrap();
    let o = gcmp(&["synthesize", "scene.kv", "-o", "data"], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    d
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn encode_then_estimate_from_the_packet() {
    let d = setup("encode");
    let o = gcmp(
        &[
            "encode",
            "data/view_1.pgm",
            "-o",
            "view_1.gcm",
            "--rate",
            "0.25",
            "--bits",
            "3",
        ],
        &d,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("measurements 192"));
    let o = gcmp(&["estimate", "exp.kv", "--target", "view_1.gcm", "--bits", "3"], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("out/field_h.pfm").is_file());
    let o = gcmp(&["metrics", "--psnr", "out/predicted_0.pgm", "data/view_1.pgm"], &d);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("psnr_db "));
}

#[test]
fn estimate_and_benchmark_report() {
    let d = setup("bench");
    let o = gcmp(&["estimate", "exp.kv", "--mode", "opt1"], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("point,mode,rate,bits,seed,"));
    assert!(text.lines().nth(1).unwrap().starts_with("0,opt1,0.25,2,1,"));
    let o = gcmp(
        &["benchmark", "exp.kv", "--set", "benchmark.bits=2,3", "-o", "bench"],
        &d,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("points 2 failed 0"));
    let csv = std::fs::read_to_string(d.join("bench/rd.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let o = gcmp(
        &["metrics", "--disparity", "out/field_h.pfm", "data/motion_h_1.pfm"],
        &d,
    );
    assert!(stdout(&o).starts_with("disparity_error "));
}

#[test]
fn exit_codes() {
    let d = setup("codes");
    // Bad input: 2.
    assert_eq!(gcmp(&["estimate", "exp.kv", "--rate", "0"], &d).status.code(), Some(2));
    assert_eq!(
        gcmp(&["estimate", "exp.kv", "--set", "oops"], &d).status.code(),
        Some(2)
    );
    assert_eq!(gcmp(&["metrics"], &d).status.code(), Some(2));
    // Failure while running, I/O included: 3.
    assert_eq!(gcmp(&["estimate", "missing.kv"], &d).status.code(), Some(3));
    std::fs::write(d.join("bad.gcm"), b"GCMPxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx").unwrap();
    let o = gcmp(&["estimate", "exp.kv", "--target", "bad.gcm"], &d);
    assert!(matches!(o.status.code(), Some(2) | Some(3)), "{o:?}");
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    // Usage errors come from the argument parser.
    assert_eq!(gcmp(&["estimate"], &d).status.code(), Some(2));
}
