//! End-to-end smoke tests of the command-line binary: the
//! synth → extract → train → eval pipeline, error behavior, and
//! byte-for-byte determinism of reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chromatex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chromatex"))
        .args(args)
        .env("CHROMATEX_LOG", "error")
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Generates a small corpus and extracts default-descriptor features.
fn synth_and_extract(root: &Path, tag: &str, seed: &str) -> (String, String) {
    let corpus = root.join(format!("corpus_{tag}"));
    let corpus = corpus.to_str().unwrap().to_string();
    let out = chromatex(&[
        "synth", "--out", &corpus, "--subjects", "8", "--train", "4", "--dev", "0", "--test",
        "4", "--frames", "6", "--seed", seed,
    ]);
    assert_success(&out, "synth");

    let manifest = format!("{corpus}/manifest.jsonl");
    let features = root.join(format!("features_{tag}.jsonl"));
    let features = features.to_str().unwrap().to_string();
    let out = chromatex(&[
        "extract",
        "--manifest",
        &manifest,
        "--out",
        &features,
        "--window-len",
        "0.2",
        "--window-stride",
        "0.2",
    ]);
    assert_success(&out, "extract");
    (corpus, features)
}

const FAST_GRID: &[&str] = &["--c-grid", "1,10", "--gamma-grid", "0.25,1", "--folds", "2"];

#[test]
fn pipeline_synth_extract_train_eval() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, features) = synth_and_extract(dir.path(), "a", "5");
    assert!(Path::new(&corpus).join("manifest.jsonl").is_file());

    let model = dir.path().join("model.cxsv");
    let model = model.to_str().unwrap();
    let mut train_args = vec!["train", "--features", &features, "--out", model];
    train_args.extend_from_slice(FAST_GRID);
    let out = chromatex(&train_args);
    assert_success(&out, "train");
    assert!(Path::new(model).is_file());
    assert!(Path::new(&format!("{model}.json")).is_file());

    let report_dir = dir.path().join("report");
    let report_dir_s = report_dir.to_str().unwrap();
    let out = chromatex(&[
        "eval",
        "--features",
        &features,
        "--model",
        model,
        "--out",
        report_dir_s,
    ]);
    assert_success(&out, "eval");

    let csv = fs::read_to_string(report_dir.join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // One row per scenario for the single evaluated descriptor: three
    // qualities, three attack kinds, and the overall pool.
    assert_eq!(rows.len(), 7, "csv rows: {rows:?}");
    for row in &rows {
        assert!(row.starts_with("ycbcr,rbf"), "row: {row}");
    }
    assert!(report_dir.join("report.txt").is_file());
    assert!(report_dir.join("roc_ycbcr.csv").is_file());
    let roc = fs::read_to_string(report_dir.join("roc_ycbcr.csv")).unwrap();
    assert!(roc.starts_with("threshold,far,frr"));
    assert!(roc.lines().count() > 2);
}

#[test]
fn eval_without_model_tunes_in_place() {
    let dir = tempfile::tempdir().unwrap();
    let (_, features) = synth_and_extract(dir.path(), "b", "6");
    let report_dir = dir.path().join("report");
    let mut args = vec![
        "eval",
        "--features",
        &features,
        "--out",
        report_dir.to_str().unwrap(),
        "--kernel",
        "linear",
    ];
    args.extend_from_slice(FAST_GRID);
    let out = chromatex(&args);
    assert_success(&out, "eval without model");
    let csv = fs::read_to_string(report_dir.join("report.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).count(), 7);
    assert!(csv.contains("ycbcr,linear,overall,eer,"));
}

#[test]
fn eval_with_missing_model_fails_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let (_, features) = synth_and_extract(dir.path(), "c", "7");
    let report_dir = dir.path().join("report");
    let out = chromatex(&[
        "eval",
        "--features",
        &features,
        "--model",
        dir.path().join("no_such_model.cxsv").to_str().unwrap(),
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    // Missing files map to the file-system exit code.
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.lines().any(|l| l.starts_with("error: kind=io msg=")),
        "stderr: {stderr}"
    );
    assert!(!report_dir.join("report.csv").exists());
    assert!(!report_dir.join("report.txt").exists());
}

#[test]
fn mismatched_descriptor_layout_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, features) = synth_and_extract(dir.path(), "d", "8");

    let gray = dir.path().join("gray.jsonl");
    let gray = gray.to_str().unwrap().to_string();
    let out = chromatex(&[
        "extract",
        "--manifest",
        &format!("{corpus}/manifest.jsonl"),
        "--out",
        &gray,
        "--space",
        "gray",
        "--window-len",
        "0.2",
        "--window-stride",
        "0.2",
    ]);
    assert_success(&out, "gray extract");

    let model = dir.path().join("model.cxsv");
    let model = model.to_str().unwrap();
    let mut train_args = vec!["train", "--features", &features, "--out", model];
    train_args.extend_from_slice(FAST_GRID);
    assert_success(&chromatex(&train_args), "train");

    let report_dir = dir.path().join("report");
    let out = chromatex(&[
        "eval",
        "--features",
        &gray,
        "--model",
        model,
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(7));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kind=dim-mismatch"), "stderr: {stderr}");
    assert!(!report_dir.exists());
}

#[test]
fn same_seed_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports: Vec<(String, String, Vec<u8>)> = Vec::new();
    for tag in ["r1", "r2"] {
        let (_, features) = synth_and_extract(dir.path(), tag, "11");
        let report_dir = dir.path().join(format!("report_{tag}"));
        let mut args = vec![
            "eval",
            "--features",
            &features,
            "--out",
            report_dir.to_str().unwrap(),
            "--kernel",
            "rbf",
        ];
        args.extend_from_slice(FAST_GRID);
        assert_success(&chromatex(&args), "eval");
        reports.push((
            fs::read_to_string(report_dir.join("report.csv")).unwrap(),
            fs::read_to_string(report_dir.join("report.txt")).unwrap(),
            fs::read(report_dir.join("roc_ycbcr.csv")).unwrap(),
        ));
        // The feature files themselves must also match byte for byte.
        let bytes = fs::read(&features).unwrap();
        if tag == "r2" {
            let first = fs::read(dir.path().join("features_r1.jsonl")).unwrap();
            assert_eq!(first, bytes, "feature files differ between reruns");
        }
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn crosseval_reports_transfer_error_for_both_kernels() {
    let dir = tempfile::tempdir().unwrap();
    let (_, features_a) = synth_and_extract(dir.path(), "xa", "21");
    let (_, features_b) = synth_and_extract(dir.path(), "xb", "22");
    let report_dir = dir.path().join("cross");
    let mut args = vec![
        "crosseval",
        "--features-a",
        &features_a,
        "--features-b",
        &features_b,
        "--out",
        report_dir.to_str().unwrap(),
    ];
    args.extend_from_slice(FAST_GRID);
    let out = chromatex(&args);
    assert_success(&out, "crosseval");
    let csv = fs::read_to_string(report_dir.join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // Two kernels x (tuning-side split, test split).
    assert_eq!(rows.len(), 4, "rows: {rows:?}");
    assert!(rows.iter().any(|r| r.contains(",linear,cross:train,hter,")));
    assert!(rows.iter().any(|r| r.contains(",linear,cross:test,hter,")));
    assert!(rows
        .iter()
        .any(|r| r.contains(",rbf(gamma=") && r.contains(",cross:test,hter,")));
}

#[test]
fn synth_refuses_non_empty_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("corpus");
    fs::create_dir(&out_dir).unwrap();
    fs::write(out_dir.join("occupied"), "x").unwrap();
    let out = chromatex(&[
        "synth",
        "--out",
        out_dir.to_str().unwrap(),
        "--subjects",
        "3",
        "--train",
        "2",
        "--dev",
        "0",
        "--test",
        "1",
        "--frames",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kind=params"), "stderr: {stderr}");
    // The pre-existing file is untouched.
    assert!(out_dir.join("occupied").is_file());
}

#[test]
fn help_documents_every_flag() {
    let top = chromatex(&["--help"]);
    assert_success(&top, "--help");
    let text = String::from_utf8_lossy(&top.stdout).to_string();
    for sub in ["synth", "extract", "train", "eval", "crosseval"] {
        assert!(text.contains(sub), "top help lacks {sub}");
    }

    let flags: &[(&str, &[&str])] = &[
        ("synth", &["--out", "--subjects", "--frames", "--seed", "--gamut", "--cast"]),
        (
            "extract",
            &[
                "--manifest",
                "--out",
                "--space",
                "--fuse",
                "--p",
                "--r",
                "--sampling",
                "--window-len",
                "--window-stride",
            ],
        ),
        (
            "train",
            &["--features", "--out", "--kernel", "--c-grid", "--gamma-grid", "--folds", "--seed"],
        ),
        ("eval", &["--features", "--model", "--out", "--kernel"]),
        ("crosseval", &["--features-a", "--features-b", "--out", "--kernel"]),
    ];
    for (sub, expected) in flags {
        let out = chromatex(&[sub, "--help"]);
        assert_success(&out, "subcommand help");
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        for flag in *expected {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
        assert!(text.contains("--jobs"), "{sub} --help lacks --jobs");
    }
}
