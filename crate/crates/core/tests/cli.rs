//! End-to-end tests of the command-line interface: exit codes, report
//! shapes, benchmark CSV determinism, and the synth/detect round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rstreg::preprocess::{binarize, crop_to_content};
use rstreg::raster::{load_pnm, save_pnm, GrayImage, PnmImage};
use rstreg::synth::BENCH_CSV_HEADER;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rstreg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn rstreg")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rstreg-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json_field(json: &serde_json::Value, path: &[&str]) -> serde_json::Value {
    let mut v = json;
    for p in path {
        v = &v[p];
    }
    v.clone()
}

fn read_gray(path: &Path) -> GrayImage {
    match load_pnm(&std::fs::read(path).unwrap()).unwrap() {
        PnmImage::Gray(g) => g,
        PnmImage::Rgb(_) => panic!("expected grayscale"),
    }
}

#[test]
fn detect_identity_pair_reports_identity() {
    let dir = tmp_dir("identity");
    let reference = dir.join("ref.pgm");
    // Content placed at zero margins so the pair's translation is (0, 0).
    let out = run(&[
        "synth",
        "--seed",
        "3",
        "--tx",
        "0",
        "--ty",
        "0",
        "--out",
        reference.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = run(&[
        "detect",
        reference.to_str().unwrap(),
        reference.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(json_field(&report, &["detected", "rotation_deg"]), 0.0);
    assert_eq!(json_field(&report, &["detected", "scale"]), 1.0);
    assert_eq!(json_field(&report, &["detected", "translation", "dx"]), 0);
    assert_eq!(json_field(&report, &["detected", "translation", "dy"]), 0);
    assert!(report["coarse_trace"]["entries"].as_array().unwrap().len() == 25);
}

#[test]
fn synth_detect_round_trip_recovers_rotation() {
    let dir = tmp_dir("roundtrip");
    let reference = dir.join("ref.pgm");
    let user = dir.join("user.pgm");
    assert!(run(&["synth", "--seed", "9", "--out", reference.to_str().unwrap()])
        .status
        .success());
    assert!(run(&[
        "synth",
        "--seed",
        "9",
        "--rotation",
        "-48",
        "--tx",
        "30",
        "--ty",
        "12",
        "--out",
        user.to_str().unwrap(),
    ])
    .status
    .success());

    // Sidecar carries the exact ground truth.
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("user.json")).unwrap()).unwrap();
    assert_eq!(sidecar["rotation_deg"], -48.0);
    assert_eq!(sidecar["scale"], 1.0);
    assert_eq!(sidecar["tx"], 30);
    assert_eq!(sidecar["ty"], 12);

    let out = run(&[
        "detect",
        reference.to_str().unwrap(),
        user.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let detected = json_field(&report, &["detected", "rotation_deg"])
        .as_f64()
        .unwrap();
    assert!(
        (detected - (-48.0)).abs() <= 1.0,
        "detected rotation {detected}"
    );
}

#[test]
fn detect_csv_summary_is_single_row() {
    let dir = tmp_dir("csv");
    let reference = dir.join("ref.pgm");
    assert!(run(&["synth", "--seed", "4", "--out", reference.to_str().unwrap()])
        .status
        .success());
    let out = run(&[
        "detect",
        reference.to_str().unwrap(),
        reference.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "rotation_deg,scale,scale_x,dx,dy");
    assert!(lines[1].starts_with("0,1,"));
}

#[test]
fn correct_writes_output_matching_reference_crop_height() {
    let dir = tmp_dir("correct");
    let reference = dir.join("ref.pgm");
    let user = dir.join("user.pgm");
    let fixed = dir.join("fixed.pgm");
    assert!(run(&["synth", "--seed", "5", "--out", reference.to_str().unwrap()])
        .status
        .success());
    assert!(run(&[
        "synth",
        "--seed",
        "5",
        "--rotation",
        "20",
        "--tx",
        "40",
        "--ty",
        "15",
        "--out",
        user.to_str().unwrap(),
    ])
    .status
    .success());

    let out = run(&[
        "correct",
        reference.to_str().unwrap(),
        user.to_str().unwrap(),
        "--out",
        fixed.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let corrected = read_gray(&fixed);
    let ref_img = read_gray(&reference);
    let ref_crop = crop_to_content(&ref_img, &binarize(&ref_img, 0.5)).unwrap();
    assert!(
        (corrected.height() as i64 - ref_crop.height() as i64).abs() <= 1,
        "corrected height {} vs reference crop {}",
        corrected.height(),
        ref_crop.height()
    );
}

#[test]
fn correct_identity_pair_outputs_reference_crop() {
    let dir = tmp_dir("correct-id");
    let reference = dir.join("ref.pgm");
    let fixed = dir.join("fixed.pgm");
    assert!(run(&["synth", "--seed", "6", "--out", reference.to_str().unwrap()])
        .status
        .success());
    let out = run(&[
        "correct",
        reference.to_str().unwrap(),
        reference.to_str().unwrap(),
        "--out",
        fixed.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let ref_img = read_gray(&reference);
    let ref_crop = crop_to_content(&ref_img, &binarize(&ref_img, 0.5)).unwrap();
    let expected = save_pnm(&ref_crop, 255).unwrap();
    assert_eq!(std::fs::read(&fixed).unwrap(), expected);
}

#[test]
fn bench_is_deterministic_and_table3_is_exact() {
    let args = ["bench", "--table", "3", "--glyphs", "2", "--seed", "11"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "bench must be byte-identical");

    let text = stdout_str(&first);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), BENCH_CSV_HEADER);
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[12], "false", "no skips expected: {line}");
        assert_eq!(fields[11], "true", "trans_exact must hold: {line}");
        rows += 1;
    }
    assert_eq!(rows, 20);
}

#[test]
fn bench_all_covers_every_table() {
    let args = ["bench", "--table", "all", "--glyphs", "1", "--seed", "2"];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let again = run(&args);
    assert_eq!(out.stdout, again.stdout, "bench all must be byte-identical");
    let text = stdout_str(&out);
    for prefix in ["t1/", "t2/", "t3/", "t4/"] {
        assert!(
            text.lines().any(|l| l.starts_with(prefix)),
            "missing rows for {prefix}"
        );
    }
    // The extreme scaling row is present, flagged or skipped but never
    // silently dropped.
    let extreme = text
        .lines()
        .find(|l| l.starts_with("t2/") && l.contains(",7.69,"))
        .expect("extreme ratio row");
    assert!(extreme.contains("envelope") || extreme.contains("blank"));
}

#[test]
fn unreadable_path_exits_3_and_names_path() {
    let out = run(&["detect", "/nonexistent/ref.pgm", "/nonexistent/user.pgm"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/ref.pgm"), "stderr: {err}");
}

#[test]
fn malformed_image_exits_4() {
    let dir = tmp_dir("malformed");
    let bad = dir.join("bad.pgm");
    std::fs::write(&bad, b"P5\n10 10\n255\nshort").unwrap();
    let out = run(&["detect", bad.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn blank_image_exits_5() {
    let dir = tmp_dir("blank");
    let white = dir.join("white.pgm");
    let img = GrayImage::filled(32, 32, 1.0).unwrap();
    std::fs::write(&white, save_pnm(&img, 255).unwrap()).unwrap();
    let out = run(&["detect", white.to_str().unwrap(), white.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn synth_overflow_exits_7() {
    let dir = tmp_dir("overflow");
    let out_path = dir.join("big.pgm");
    let out = run(&[
        "synth",
        "--seed",
        "1",
        "--tx",
        "250",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn invalid_threshold_exits_2() {
    let dir = tmp_dir("threshold");
    let reference = dir.join("ref.pgm");
    assert!(run(&["synth", "--seed", "8", "--out", reference.to_str().unwrap()])
        .status
        .success());
    let out = run(&[
        "detect",
        reference.to_str().unwrap(),
        reference.to_str().unwrap(),
        "--threshold",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
