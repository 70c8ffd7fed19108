use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn evfocus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evfocus")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = evfocus(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

/// `line` split on spaces, followed by `extra`.
fn ok_with(line: &str, extra: &[&str]) {
    let args: Vec<&str> = line.split(' ').chain(extra.iter().copied()).collect();
    ok(&args);
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

/// Rotation dataset with ω = (0.5, −0.3, 2.0) rad/s on a 120x90 sensor.
fn rotation_dataset(dir: &Path) {
    ok_with("synth --scene rotation --width 120 --height 90 --focal 100 --elements 800 --duration 0.2 --rate 200", &["--out", p(dir)]);
}

#[test]
fn angvel_recovers_synthetic_rotation() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    rotation_dataset(&data);
    let (events, calib, poses) = (data.join("events.txt"), data.join("calib.txt"), data.join("groundtruth.txt"));
    ok_with(
        "angvel --width 120 --height 90 --loss variance,mav --n-events 4000",
        &["--events", p(&events), "--calib", p(&calib), "--poses", p(&poses), "--out", p(&out)],
    );
    let summary = rows(&out.join("summary.csv"));
    assert_eq!(summary[0][0], "loss");
    let variance = summary.iter().find(|r| r[0] == "variance").unwrap();
    let rms: f64 = variance[11].parse().unwrap();
    let norm = (0.5f64 * 0.5 + 0.3 * 0.3 + 2.0 * 2.0).sqrt().to_degrees();
    assert!(rms < 0.02 * norm, "RMS {rms} deg/s against |w| = {norm} deg/s");
    let mav = summary.iter().find(|r| r[0] == "mav").unwrap();
    assert!(mav[1..].iter().all(|c| c == "-"), "{mav:?}");
    let errors = rows(&out.join("errors.csv"));
    assert_eq!(errors[0].len(), 16);
    assert!(errors[1..].iter().all(|r| r[0] == "variance"));
}

#[test]
fn empty_stream_gives_header_only_csvs() {
    let tmp = TempDir::new().unwrap();
    let events = tmp.path().join("events.txt");
    let calib = tmp.path().join("calib.txt");
    fs::write(&events, "").unwrap();
    fs::write(&calib, "200 200 120 90 0 0 0 0 0\n").unwrap();
    let out = tmp.path().join("out");
    ok(&["angvel", "--events", p(&events), "--calib", p(&calib), "--out", p(&out)]);
    for name in ["errors.csv", "summary.csv"] {
        assert_eq!(rows(&out.join(name)).len(), 1, "{name}");
    }
}

#[test]
fn flow_surface_is_complete_and_deterministic() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    ok(&[
        "synth",
        "--scene",
        "flow",
        "--flow",
        "-40,0",
        "--width",
        "64",
        "--height",
        "64",
        "--duration",
        "0.3",
        "--rate",
        "100",
        "--seed",
        "2",
        "--out",
        p(&data),
    ]);
    let events = data.join("events.txt");
    let run =
        |out: &Path| ok_with("flow-surface --width 64 --height 64 --loss variance,area-exp --steps 21", &["--events", p(&events), "--out", p(out)]);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&a);
    run(&b);
    for name in ["variance.csv", "area-exp.csv", "variance.pgm"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let grid = rows(&a.join("variance.csv"));
    assert_eq!(grid.len(), 1 + 21 * 21);
    let best = grid[1..].iter().max_by(|x, y| x[2].parse::<f64>().unwrap().total_cmp(&y[2].parse().unwrap())).unwrap();
    let (vx, vy): (f64, f64) = (best[0].parse().unwrap(), best[1].parse().unwrap());
    assert!((vx + 40.0).abs() <= 6.0 && vy.abs() <= 6.0, "{best:?}");
}

#[test]
fn depth_writes_curves_and_maps() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    ok(&["synth", "--scene", "plane", "--width", "64", "--height", "48", "--focal", "60", "--rate", "60", "--seed", "3", "--out", p(&data)]);
    let (events, calib, poses) = (data.join("events.txt"), data.join("calib.txt"), data.join("groundtruth.txt"));
    ok_with(
        "depth --width 64 --height 48 --loss variance,area-exp --steps 30",
        &["--events", p(&events), "--calib", p(&calib), "--poses", p(&poses), "--out", p(&out)],
    );
    let curves = rows(&out.join("focal_curves.csv"));
    assert_eq!(curves[0], ["depth", "variance", "variance_normalized", "area-exp", "area-exp_normalized"]);
    assert_eq!(curves.len(), 31);
    for name in ["depth.pfm", "confidence.pfm"] {
        let bytes = fs::read(out.join(name)).unwrap();
        assert!(bytes.starts_with(b"Pf\n64 48\n"), "{name}");
    }
}

#[test]
fn gradcheck_marks_rows_and_fails_on_corruption() {
    let tmp = TempDir::new().unwrap();
    let small = ["--seeds", "1", "--n-events", "200", "--size", "32", "--out"];
    let out = tmp.path().join("ok");
    let args: Vec<&str> = ["gradcheck", "--loss", "variance,moran"].into_iter().chain(small).chain([p(&out)]).collect();
    ok(&args);
    let table = rows(&out.join("gradcheck.csv"));
    assert_eq!(table[0], ["loss", "warp", "seed", "max_rel_err", "status"]);
    assert!(table[1..].iter().all(|r| (r[0] == "variance" && r[4] == "pass") || (r[0] == "moran" && r[4] == "fd-only")));

    let out = tmp.path().join("bad");
    let args: Vec<&str> = ["gradcheck", "--loss", "variance", "--corrupt", "1.01"].into_iter().chain(small).chain([p(&out)]).collect();
    assert_eq!(evfocus(&args).status.code(), Some(3));
}

#[test]
fn bench_has_one_row_per_loss_plus_warp() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    ok(&["bench", "--loss", "variance,entropy,dog", "--n-events", "2000", "--repetitions", "3", "--out", p(&out)]);
    let table = rows(&out.join("timing.csv"));
    let names: Vec<&str> = table[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["warp+accumulate", "variance", "entropy", "dog"]);
}

#[test]
fn exit_codes_separate_usage_and_data_errors() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("missing.txt");
    assert_eq!(evfocus(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(evfocus(&["gradcheck", "--loss", "sharpness"]).status.code(), Some(1));
    assert_eq!(evfocus(&["angvel", "--events", p(&missing), "--calib", p(&missing)]).status.code(), Some(2));
    assert_eq!(evfocus(&["--help"]).status.code(), Some(0));
}
