use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dacgsa::records::read_runs;
use dacgsa::{analyze, build_layout, build_samples, emit_plot_data, run_experiment, ExperimentConfig, PipelineError, Qoi, RunRecord, RunStatus};
use dacgsa_core::dist::{DistributionSpec, InputSpace};

fn config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        n_runs: 60,
        n_clusters: 6,
        seed: 11,
        dummy_replicates: 2,
        bootstrap_replicates: 0,
        out_dir: dir.join("out"),
        ..Default::default()
    }
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

/// Input space whose LS capacity factor can exceed one.
fn broken_space(dir: &Path) -> PathBuf {
    let mut space = InputSpace::default_space();
    let i = space.index_of("cf_ls").unwrap();
    space.entries[i].distribution = DistributionSpec::Uniform { lo: 0.5, hi: 1.5 };
    let path = dir.join("broken_space.json");
    fs::write(&path, space.to_json()).unwrap();
    path
}

#[test]
fn every_run_completes_once_per_cluster_slot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    let s = run_experiment(&cfg, None).unwrap();
    assert_eq!((s.total, s.new_runs, s.failed), (60, 60, 0));

    let inputs = cfg.resolve().unwrap();
    let layout = build_layout(&cfg, &build_samples(&cfg, &inputs).unwrap()).unwrap();
    let mut seen = vec![0usize; 60];
    for c in &layout.clusters {
        assert_eq!(c.len(), 10);
        for &i in c {
            seen[i] += 1;
        }
    }
    assert!(seen.iter().all(|&k| k == 1));

    let table = read_runs(&cfg.out_dir.join("runs.csv")).unwrap();
    assert_eq!(table.ok_records().count(), 60);
    for r in &table.records {
        assert!(layout.clusters[r.cluster_id].contains(&r.run_id[1..].parse::<usize>().unwrap()));
    }
}

#[test]
fn rerun_is_idempotent_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config(a.path());
    run_experiment(&cfg, None).unwrap();
    let first = read(cfg.out_dir.join("runs.csv"));
    let again = run_experiment(&cfg, None).unwrap();
    assert_eq!((again.new_runs, again.skipped), (0, 60));
    assert_eq!(read(cfg.out_dir.join("runs.csv")), first);

    let fresh = config(b.path());
    run_experiment(&fresh, None).unwrap();
    assert_eq!(read(fresh.out_dir.join("runs.csv")), first);
    assert_eq!(read(fresh.out_dir.join("trajectories.csv")), read(cfg.out_dir.join("trajectories.csv")));
}

#[test]
fn serial_and_parallel_runs_match() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, cb) = (config(a.path()), config(b.path()));
    run_experiment(&ca, Some(1)).unwrap();
    run_experiment(&cb, Some(4)).unwrap();
    for f in ["runs.csv", "trajectories.csv", "layout.json", "samples.csv"] {
        assert_eq!(read(ca.out_dir.join(f)), read(cb.out_dir.join(f)), "{f}");
    }
}

#[test]
fn changed_experiment_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    run_experiment(&cfg, None).unwrap();
    let other = ExperimentConfig { seed: 12, ..cfg };
    let err = run_experiment(&other, None).unwrap_err();
    assert!(matches!(err, PipelineError::Config(_)), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn resume_after_torn_part_file() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let reference = config(a.path());
    run_experiment(&reference, None).unwrap();

    let cfg = config(b.path());
    run_experiment(&cfg, None).unwrap();
    let part = cfg.out_dir.join("parts/c0002.runs.csv");
    let text = fs::read_to_string(&part).unwrap();
    let cut = text.trim_end().rfind('\n').unwrap() + 40;
    fs::write(&part, &text[..cut]).unwrap();
    fs::remove_file(cfg.out_dir.join("runs.csv")).unwrap();

    let s = run_experiment(&cfg, None).unwrap();
    assert_eq!((s.new_runs, s.skipped), (1, 59));
    for f in ["runs.csv", "trajectories.csv"] {
        assert_eq!(read(cfg.out_dir.join(f)), read(reference.out_dir.join(f)), "{f}");
    }
}

#[test]
fn failed_rows_do_not_change_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    run_experiment(&cfg, None).unwrap();
    analyze(&cfg.out_dir, Qoi::Emissions, None).unwrap();
    let files = [
        "analysis/emissions/sensitivity.csv",
        "analysis/emissions/sensitivity.json",
        "analysis/emissions/ranking_grouped.csv",
        "analysis/emissions/ranking_inputs.csv",
        "analysis/summary.csv",
        "analysis/exceedance.json",
        "analysis/gigaton_subsidy.json",
    ];
    let before: Vec<Vec<u8>> = files.iter().map(|f| read(cfg.out_dir.join(f))).collect();

    let runs = cfg.out_dir.join("runs.csv");
    let n_inputs = read_runs(&runs).unwrap().input_names.len();
    let poison = RunRecord {
        run_id: "r999999".into(),
        cluster_id: 0,
        order: 99,
        status: RunStatus::Failed,
        reason: "injected".into(),
        inputs: vec![1e30; n_inputs],
        qoi: Vec::new(),
    };
    let mut text = fs::read_to_string(&runs).unwrap();
    text.push_str(&poison.to_csv_line());
    fs::write(&runs, text).unwrap();

    let s = analyze(&cfg.out_dir, Qoi::Emissions, None).unwrap();
    assert_eq!((s.n_ok, s.n_failed), (60, 1));
    for (f, b) in files.iter().zip(&before) {
        assert_eq!(&read(cfg.out_dir.join(f)), b, "{f}");
    }
    let status = fs::read_to_string(cfg.out_dir.join("analysis/status.json")).unwrap();
    assert!(status.contains("r999999"));
}

#[test]
fn plot_tables_cover_every_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { plot_bins: 5, ..config(tmp.path()) };
    run_experiment(&cfg, None).unwrap();
    analyze(&cfg.out_dir, Qoi::TotalSubsidies, None).unwrap();
    let written = emit_plot_data(&cfg.out_dir, None).unwrap();
    assert_eq!(written.len(), 4);
    let n_inputs = read_runs(&cfg.out_dir.join("runs.csv")).unwrap().input_names.len();
    let binned = fs::read_to_string(cfg.out_dir.join("plots/pdp_binned.csv")).unwrap();
    let scatter = fs::read_to_string(cfg.out_dir.join("plots/pdp_scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 60 * n_inputs);
    assert!(binned.lines().count() > n_inputs);
    let seps = fs::read_to_string(cfg.out_dir.join("plots/separations.csv")).unwrap();
    assert!(seps.lines().skip(1).all(|l| l.starts_with("total_subsidies,")));
}

#[test]
fn cli_reports_partial_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let space = broken_space(tmp.path());
    let cfg_path = tmp.path().join("cfg.json");
    fs::write(
        &cfg_path,
        format!(
            r#"{{"n_runs": 60, "n_clusters": 6, "dummy_replicates": 2, "bootstrap_replicates": 0, "input_space": "{}"}}"#,
            space.display()
        ),
    )
    .unwrap();
    let out = tmp.path().join("out");
    let bin = env!("CARGO_BIN_EXE_dacgsa");
    let run = Command::new(bin)
        .args(["run", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(3), "{}", String::from_utf8_lossy(&run.stderr));

    let table = read_runs(&out.join("runs.csv")).unwrap();
    assert!(table.n_failed() > 0 && table.ok_records().count() > 0);
    assert!(table
        .records
        .iter()
        .filter(|r| r.status == RunStatus::Failed)
        .all(|r| r.reason.contains("out of range")));

    let an = Command::new(bin)
        .args(["analyze", "--qoi", "emissions"])
        .env("DACGSA_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(an.status.code(), Some(0), "{}", String::from_utf8_lossy(&an.stderr));

    let bad = Command::new(bin)
        .args(["run", "--solver", "simplex"])
        .env("DACGSA_OUT", tmp.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
