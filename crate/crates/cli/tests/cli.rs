use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bulbar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bulbar"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn bulbar")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, subjects: usize, reps: usize) -> PathBuf {
    let o = bulbar(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--subjects",
        &subjects.to_string(),
        "--reps",
        &reps.to_string(),
        "--seed",
        "5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join("manifest.json")
}

fn evaluate(manifest: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "evaluate",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--grid",
        "smoke",
    ];
    args.extend_from_slice(extra);
    bulbar(&args)
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn write_report(dir: &Path, name: &str, rmse: &[(&str, f64)]) {
    let mut text = String::from("subject,group,n_reps,rmse,inner_score,grid_index,spec\n");
    for (s, r) in rmse {
        text.push_str(&format!("{s},ALS,9,{r},0.5,0,svr\n"));
    }
    fs::write(dir.join(name), text).unwrap();
}

fn friedman_row(dir: &Path) -> BTreeMap<String, String> {
    let text = fs::read_to_string(dir.join("friedman.csv")).unwrap();
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    head.iter().zip(row).map(|(h, v)| (h.to_string(), v.to_string())).collect()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&bulbar(&["--help"])), 0);
    assert_eq!(code(&bulbar(&["--version"])), 0);
    assert_eq!(code(&bulbar(&["evaluate", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bulbar(&["frobnicate"])), 1);
    assert_eq!(code(&bulbar(&["evaluate", "--model", "forest"])), 1);
    let o = bulbar(&["evaluate"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("manifest"), "{}", stderr(&o));
}

#[test]
fn missing_manifest_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("nope.json");
    let o = bulbar(&["validate", "--manifest", m.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope.json"));
}

#[test]
fn features_and_validate_on_a_synthetic_cohort() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("cohort"), 3, 4);
    let o = bulbar(&["validate", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("3 subjects"));

    let out = dir.path().join("out");
    let o = bulbar(&["features", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let audio = fs::read_to_string(out.join("features_audio.csv")).unwrap();
    let video = fs::read_to_string(out.join("features_video.csv")).unwrap();
    // subject and rep columns come first.
    assert_eq!(audio.lines().next().unwrap().split(',').count(), 2 + 18);
    assert_eq!(video.lines().next().unwrap().split(',').count(), 2 + 15);
    assert_eq!(audio.lines().count(), 1 + 3 * 3);
    let log = fs::read_to_string(out.join("exclusions.log")).unwrap();
    assert!(log.contains("repetition 1"));

    let again = dir.path().join("again");
    let o = bulbar(&["features", "--manifest", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(files(&out), files(&again));
}

#[test]
fn unreadable_wav_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("cohort"), 3, 3);
    let wav = dir.path().join("cohort/S02/audio.wav");
    assert!(wav.exists());

    fs::write(&wav, b"RIFF garbage").unwrap();
    let o = bulbar(&["features", "--manifest", manifest.to_str().unwrap(), "--out", dir.path().join("o1").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("S02") && stderr(&o).contains("audio.wav"), "{}", stderr(&o));

    fs::remove_file(&wav).unwrap();
    let o = bulbar(&["features", "--manifest", manifest.to_str().unwrap(), "--out", dir.path().join("o2").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("S02") && stderr(&o).contains("audio.wav"), "{}", stderr(&o));
}

#[test]
fn two_subjects_are_too_few() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("cohort"), 2, 3);
    let o = evaluate(&manifest, &dir.path().join("out"), &["--model", "svr"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains('2') && stderr(&o).contains('3'), "{}", stderr(&o));
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 1\n[audio.pitch]\nf0_floor = 500.0\nf0_ceiling = 100.0\n").unwrap();
    let o = bulbar(&["evaluate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    fs::write(&cfg, "no_such_key = 3\n").unwrap();
    assert_eq!(code(&bulbar(&["evaluate", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn full_layout_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("cohort"), 4, 3);
    let out = dir.path().join("out");
    let o = evaluate(&manifest, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 9);
    let names = files(&out);
    assert_eq!(names.keys().filter(|n| n.starts_with("report_")).count(), 9);
    for f in ["predictions.csv", "figure_scatter.svg", "exclusions.log", "features_audio.csv", "features_video.csv"] {
        assert!(names.contains_key(f), "{f}");
    }
    let svg = String::from_utf8(names["figure_scatter.svg"].clone()).unwrap();
    // 4 subjects × 2 modeled repetitions.
    assert_eq!(svg.matches("<circle").count(), 8);
    assert_eq!(svg.matches("<line").count(), 1);

    let o = bulbar(&["stats", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let row = friedman_row(&out);
    assert_eq!(row["df"], "8");
    assert_eq!(row["n_blocks"], "4");
}

#[test]
fn stats_on_hand_built_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_report(d, "report_audio_svr.csv", &[("A", 1.0), ("B", 1.0)]);
    write_report(d, "report_audio_mlp.csv", &[("A", 2.0), ("B", 2.0)]);
    write_report(d, "report_audio_gbt.csv", &[("A", 3.0), ("B", 3.0)]);
    let o = bulbar(&["stats", "--out", d.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let row = friedman_row(d);
    assert_eq!(row["chi2"].parse::<f64>().unwrap(), 4.0);
    assert_eq!(row["df"], "2");
    assert!((row["p"].parse::<f64>().unwrap() - 0.1353).abs() < 1e-4);

    let two = dir.path().join("two");
    fs::create_dir(&two).unwrap();
    write_report(&two, "report_video_svr.csv", &[("A", 1.5), ("B", 0.7), ("C", 2.0)]);
    write_report(&two, "report_video_gbt.csv", &[("A", 1.5), ("B", 0.7), ("C", 2.0)]);
    assert_eq!(code(&bulbar(&["stats", "--out", two.to_str().unwrap()])), 0);
    let row = friedman_row(&two);
    assert_eq!(row["chi2"].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row["p"].parse::<f64>().unwrap(), 1.0);

    let disjoint = dir.path().join("disjoint");
    fs::create_dir(&disjoint).unwrap();
    write_report(&disjoint, "report_audio_svr.csv", &[("A", 1.0), ("B", 2.0)]);
    write_report(&disjoint, "report_audio_mlp.csv", &[("C", 1.0), ("D", 2.0)]);
    assert_ne!(code(&bulbar(&["stats", "--out", disjoint.to_str().unwrap()])), 0);
}

#[test]
fn evaluate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("cohort"), 4, 3);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = evaluate(&manifest, out, &["--seed", "18446744073709551615"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (fa, fb) = (files(&a), files(&b));
    assert!(fa.len() >= 15);
    assert_eq!(fa, fb);
}
