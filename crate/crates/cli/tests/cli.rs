use compwave_cli::rundir::{RunManifest, MANIFEST, RUNS_ENV};
use compwave_cli::run_cli;
use std::path::{Path, PathBuf};
use std::process::Command;

fn cli(root: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["compwave".to_string(), "--runs-dir".into(), root.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run_cli(argv)
}

fn only_run(root: &Path, prefix: &str) -> PathBuf {
    let mut hits: Vec<PathBuf> = std::fs::read_dir(root)
        .unwrap()
        .flatten()
        .filter(|e| e.file_name().to_string_lossy().starts_with(prefix))
        .map(|e| e.path())
        .collect();
    assert_eq!(hits.len(), 1, "{hits:?}");
    hits.pop().unwrap()
}

fn all_files(dir: &Path, base: &Path, out: &mut Vec<String>) {
    for e in std::fs::read_dir(dir).unwrap().flatten() {
        let p = e.path();
        if p.is_dir() {
            all_files(&p, base, out);
        } else {
            out.push(p.strip_prefix(base).unwrap().to_string_lossy().replace('\\', "/"));
        }
    }
}

fn assert_no_orphans(run: &Path) {
    let m = RunManifest::load(run).unwrap();
    let mut on_disk = Vec::new();
    all_files(run, run, &mut on_disk);
    on_disk.retain(|f| f != MANIFEST);
    on_disk.sort();
    let mut listed = m.files.clone();
    listed.sort();
    assert_eq!(on_disk, listed);
}

#[test]
fn no_arguments_is_a_usage_error() {
    assert_eq!(run_cli(["compwave"]), 2);
    assert_eq!(run_cli(["compwave", "frobnicate"]), 2);
    assert_eq!(run_cli(["compwave", "classify", "--a", "x"]), 2);
    assert_eq!(run_cli(["compwave", "--help"]), 0);
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(tmp.path(), &["classify", "--a", "1.5"]), 2);
    assert_eq!(cli(tmp.path(), &["wave", "--d", "-1"]), 2);
    assert!(std::fs::read_dir(tmp.path()).map_or(true, |mut d| d.next().is_none()));
}

#[test]
fn classify_reports_linear_selection() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(tmp.path(), &["classify", "--a", "0.5", "--b", "1.5", "--d", "1", "--r", "1"]), 0);
    let run = only_run(tmp.path(), "classify-");
    let m = RunManifest::load(&run).unwrap();
    assert_eq!(m.summary["verdict"], "LinearSufficient");
    assert!(m.pass());
    assert_no_orphans(&run);
    let id = m.run_id.clone();
    let text = compwave_cli::commands::report(tmp.path(), &id).unwrap();
    assert!(text.contains("r(ab-1) <= (2-d)(1-a)"), "{text}");
    assert_eq!(cli(tmp.path(), &["report", &id]), 0);
    assert_eq!(cli(tmp.path(), &["report", "no-such-run"]), 2);
}

#[test]
fn wave_finds_pushed_speed() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(tmp.path(), &["wave", "--a", "0.9", "--b", "5", "--d", "1", "--r", "1", "--tol", "1e-3"]), 0);
    let run = only_run(tmp.path(), "wave-");
    let m = RunManifest::load(&run).unwrap();
    let c = m.summary["c_star"].as_f64().unwrap();
    assert!(c > 2.0 * 0.1f64.sqrt() + 1e-3, "{c}");
    assert!(m.files.iter().any(|f| f == "plots/profile.svg"));
    assert_no_orphans(&run);
}

#[test]
fn config_file_and_overrides_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[params]\na = 0.9\nb = 5\n\n[sim]\nt_end = 20\n").unwrap();
    let runs = tmp.path().join("runs");
    let cfg_s = cfg.display().to_string();
    assert_eq!(cli(&runs, &["--config", &cfg_s, "simulate"]), 0);
    let first = only_run(&runs, "simulate-");
    let data1 = std::fs::read(first.join("data/observations.csv")).unwrap();
    let m1 = RunManifest::load(&first).unwrap();
    assert_eq!(m1.params.a, 0.9);
    // Same file again: same hash, same directory, identical numbers.
    assert_eq!(cli(&runs, &["--config", &cfg_s, "simulate"]), 0);
    let again = only_run(&runs, "simulate-");
    assert_eq!(again, first);
    assert_eq!(std::fs::read(again.join("data/observations.csv")).unwrap(), data1);
    // The stored config reproduces the hash.
    let stored = compwave_cli::config::Config::load(&first.join("config.toml")).unwrap();
    assert_eq!(stored.hash("simulate"), m1.config_hash);
    assert_no_orphans(&first);
    // A flag override changes the configuration and therefore the run id.
    assert_eq!(cli(&runs, &["--config", &cfg_s, "simulate", "--t-end", "10"]), 0);
    let n = std::fs::read_dir(&runs).unwrap().count();
    assert_eq!(n, 2);
}

#[test]
fn sweep_is_ordered_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["sweep", "--a", "0.5,0.9", "--b", "1.5,5", "--kind", "wave"];
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "4"]);
    assert_eq!(cli(tmp.path(), &with_jobs), 0);
    let run = only_run(tmp.path(), "sweep-");
    let csv1 = std::fs::read_to_string(run.join("data/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv1.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let keys: Vec<String> = rows.iter().map(|r| r.split(',').take(3).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(keys, ["0,0.5,1.5", "1,0.5,5", "2,0.9,1.5", "3,0.9,5"]);
    assert_eq!(cli(tmp.path(), &with_jobs), 0);
    assert_eq!(std::fs::read_to_string(run.join("data/sweep.csv")).unwrap(), csv1);

    // Single-threaded execution gives the same table.
    let serial = tempfile::tempdir().unwrap();
    let mut one = args.to_vec();
    one.extend(["--jobs", "1"]);
    assert_eq!(cli(serial.path(), &one), 0);
    let run1 = only_run(serial.path(), "sweep-");
    assert_eq!(std::fs::read_to_string(run1.join("data/sweep.csv")).unwrap(), csv1);

    let m = RunManifest::load(&run).unwrap();
    assert!(m.files.iter().any(|f| f == "plots/regime_map.svg"));
    let text = compwave_cli::commands::report(tmp.path(), &m.run_id).unwrap();
    assert!(text.contains("plots/regime_map.svg"));
    assert_no_orphans(&run);
}

#[test]
fn one_point_sweep_matches_single_command() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(tmp.path(), &["sweep", "--a", "0.9", "--b", "5", "--kind", "wave"]), 0);
    assert_eq!(cli(tmp.path(), &["wave", "--a", "0.9", "--b", "5"]), 0);
    let m = RunManifest::load(&only_run(tmp.path(), "wave-")).unwrap();
    let csv = std::fs::read_to_string(only_run(tmp.path(), "sweep-").join("data/sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[7].parse::<f64>().unwrap(), m.summary["c_star"].as_f64().unwrap());
    assert_eq!(row[6], "NonlinearSufficient");
}

#[test]
fn sweep_flags_points_outside_the_strong_weak_case() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(tmp.path(), &["sweep", "--a", "0.5,1.2", "--b", "1.5", "--kind", "classify"]), 0);
    let csv = std::fs::read_to_string(only_run(tmp.path(), "sweep-").join("data/sweep.csv")).unwrap();
    let bad = csv.lines().nth(2).unwrap();
    assert!(bad.contains(",false,") && bad.contains("skipped"), "{bad}");
}

#[test]
fn verification_commands() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(tmp.path(), &["verify", "residuals", "--a", "0.9", "--b", "5"]), 0);
    // Linearly selected fronts have no sub/super-solution pair.
    assert_eq!(cli(tmp.path(), &["verify", "residuals", "--a", "0.5", "--b", "1.5"]), 1);
    assert_eq!(cli(tmp.path(), &["verify", "cp", "--a", "0.9", "--b", "5", "--t-end", "20"]), 0);
    assert_eq!(cli(tmp.path(), &["verify", "sandwich", "--a", "0.9", "--b", "5", "--t-end", "60"]), 0);
    // Too short a run to fit the super-solution shift: a failing check.
    assert_eq!(cli(tmp.path(), &["verify", "sandwich", "--a", "0.9", "--b", "5", "--t-end", "5"]), 1);
    let failed = std::fs::read_dir(tmp.path())
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .find(|p| p.join(MANIFEST).is_file() && !RunManifest::load(p).unwrap().pass() && p.to_string_lossy().contains("sandwich"))
        .unwrap();
    let m = RunManifest::load(&failed).unwrap();
    let text = compwave_cli::commands::report(tmp.path(), &m.run_id).unwrap();
    assert!(text.contains("worst violation") && text.contains("at (t, x)"), "{text}");
    assert_no_orphans(&failed);
}

#[test]
fn track_checks_the_regime() {
    let tmp = tempfile::tempdir().unwrap();
    let code = cli(
        tmp.path(),
        &["track", "--scenario", "b", "--a", "0.5", "--b", "1.5", "--d", "1", "--r", "0.5", "--t-end", "150"],
    );
    assert_eq!(code, 0);
    let m = RunManifest::load(&only_run(tmp.path(), "track-")).unwrap();
    assert_eq!(m.summary["regime"], "FasterU");
}

#[test]
fn binary_honours_runs_dir_variable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_compwave"))
        .args(["classify", "--a", "0.9", "--b", "5"])
        .env(RUNS_ENV, tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    assert_eq!(line.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["verdict"], "NonlinearSufficient");
    only_run(tmp.path(), "classify-");

    let out = Command::new(env!("CARGO_BIN_EXE_compwave")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}
