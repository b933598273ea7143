//! Smoke tests of the binary surface: every subcommand runs against the
//! bundled fixture and produces its artifact.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

struct Workdir {
    _dir: tempfile::TempDir,
    settings_path: PathBuf,
    out_dir: PathBuf,
}

fn workdir() -> Workdir {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("panel.csv");
    fs::write(&input, common::fixture_csv()).unwrap();
    let out_dir = dir.path().join("out");
    let settings = common::fixture_settings(input, out_dir.clone());
    let settings_path = dir.path().join("settings.json");
    fs::write(&settings_path, settings.to_json_pretty()).unwrap();
    Workdir {
        _dir: dir,
        settings_path,
        out_dir,
    }
}

fn run(w: &Workdir, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stldtw"))
        .arg("--settings")
        .arg(&w.settings_path)
        .args(args)
        .output()
        .expect("spawn stldtw")
}

fn assert_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_file(path: &Path) {
    assert!(path.exists(), "missing {}", path.display());
}

#[test]
fn validate_reports_clean_fixture() {
    let w = workdir();
    let stdout = assert_ok(&run(&w, &["validate"]));
    assert!(stdout.contains("no problems"), "{stdout}");
}

#[test]
fn stats_writes_per_country_summaries() {
    let w = workdir();
    assert_ok(&run(&w, &["stats"]));
    assert_file(&w.out_dir.join("stats.csv"));
    let text = fs::read_to_string(w.out_dir.join("stats.csv")).unwrap();
    assert!(text.starts_with("country,observations,mean,std,min,p25,p50,p75,max"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn impute_writes_completed_panel_and_log() {
    let w = workdir();
    assert_ok(&run(&w, &["impute"]));
    assert_file(&w.out_dir.join("panel_imputed.csv"));
    assert_file(&w.out_dir.join("training_log.csv"));
}

#[test]
fn decompose_writes_components() {
    let w = workdir();
    assert_ok(&run(&w, &["decompose"]));
    let text = fs::read_to_string(w.out_dir.join("decomposition.csv")).unwrap();
    // 600 series x 24 years plus the header row.
    assert_eq!(text.lines().count(), 600 * 24 + 1);
}

#[test]
fn distance_between_panel_keys() {
    let w = workdir();
    let stdout = assert_ok(&run(&w, &["distance", "--key-a", "REF:I001", "--key-b", "CPY:I001"]));
    let cost: f64 = stdout.trim().parse().unwrap();
    assert_eq!(cost, 0.0);

    // REF has no gaps, so same-country pairs always work on the raw panel.
    let stdout = assert_ok(&run(
        &w,
        &["distance", "--key-a", "REF:I001", "--key-b", "REF:I008", "--exact"],
    ));
    let cost: f64 = stdout.trim().parse().unwrap();
    assert!(cost > 0.0);

    // Gappy raw series are refused with a pointer at the offending year.
    let out = run(&w, &["distance", "--key-a", "REF:I001", "--key-b", "RND:I001"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing value"));
}

#[test]
fn distance_between_csv_columns_with_path_output() {
    let w = workdir();
    let file = w._dir.path().join("pair.csv");
    fs::write(&file, "x,y\n1,1\n2,3\n3,5\n4,7\n").unwrap();
    let path_out = w._dir.path().join("path.csv");
    let stdout = assert_ok(&run(
        &w,
        &[
            "distance",
            "--file",
            file.to_str().unwrap(),
            "--col-a",
            "x",
            "--col-b",
            "y",
            "--exact",
            "--path",
            path_out.to_str().unwrap(),
        ],
    ));
    let cost: f64 = stdout.trim().parse().unwrap();
    assert!(cost > 0.0);
    let path_text = fs::read_to_string(&path_out).unwrap();
    assert!(path_text.starts_with("i,j,local_cost"));
    assert!(path_text.lines().count() >= 5);
}

#[test]
fn rank_defaults_to_the_reference_country() {
    let w = workdir();
    assert_ok(&run(&w, &["rank"]));
    let text = fs::read_to_string(w.out_dir.join("ranking_REF.csv")).unwrap();
    // 49 ranked indicators plus the header.
    assert_eq!(text.lines().count(), 50);

    assert_ok(&run(&w, &["rank", "--country", "C07"]));
    assert_file(&w.out_dir.join("ranking_C07.csv"));
}

#[test]
fn group_ranks_and_comparisons() {
    let w = workdir();
    assert_ok(&run(&w, &["group-ranks"]));
    assert_file(&w.out_dir.join("group_ranks.csv"));
    assert_ok(&run(&w, &["compare-rankings"]));
    assert_file(&w.out_dir.join("compare_rankings.csv"));
    assert_ok(&run(&w, &["compare-countries"]));
    assert_file(&w.out_dir.join("compare_countries.csv"));
}

#[test]
fn run_executes_the_full_pipeline() {
    let w = workdir();
    let stdout = assert_ok(&run(&w, &["run"]));
    assert!(stdout.contains("done: 9 stages"), "{stdout}");
    assert_file(&w.out_dir.join("manifest.json"));
}

#[test]
fn missing_input_is_a_nonzero_exit() {
    let w = workdir();
    let out = run(&w, &["--input", "/nonexistent/panel.csv", "run"]);
    assert!(!out.status.success());
}

#[test]
fn seed_override_changes_imputed_cells() {
    let w = workdir();
    assert_ok(&run(&w, &["impute"]));
    let base = fs::read_to_string(w.out_dir.join("panel_imputed.csv")).unwrap();
    assert_ok(&run(&w, &["--seed", "777", "impute"]));
    let reseeded = fs::read_to_string(w.out_dir.join("panel_imputed.csv")).unwrap();
    assert_ne!(base, reseeded);
}
