use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dacgsa_core::daccs::{
    avg_subsidy, check_invariants, qoi_emissions, qoi_policy_gains, qoi_total_subsidies, simulate, write_trajectories,
    Metric, Model,
};
use dacgsa_core::dist::lhs_sample;
use dacgsa_core::doe::{cluster_balanced, ExperimentLayout, SampleMatrix};

use crate::config::{ExperimentConfig, Inputs};
use crate::records::{
    header_line, parse_runs, run_id, RunRecord, RunStatus, RunTable, RUNS_SCHEMA_VERSION, TRAJECTORY_HEADER,
};
use crate::PipelineError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const LAYOUT_SCHEMA_VERSION: u32 = 1;
pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total: usize,
    /// Simulations executed by this invocation.
    pub new_runs: usize,
    pub skipped: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub code_version: String,
    pub config_hash: String,
    pub schemas: Schemas,
    pub config: ExperimentConfig,
    pub n_runs: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schemas {
    pub runs: u32,
    pub trajectories: u32,
    pub layout: u32,
    pub report: u32,
}

pub fn read_manifest(dir: &Path) -> Result<Option<Manifest>, PipelineError> {
    let path = dir.join("manifest.json");
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| PipelineError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

pub fn build_samples(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<SampleMatrix, PipelineError> {
    lhs_sample(&inputs.space, cfg.n_runs, cfg.lhs_designs, cfg.seed).map_err(|e| PipelineError::Config(vec![e.to_string()]))
}

pub fn build_layout(cfg: &ExperimentConfig, samples: &SampleMatrix) -> Result<ExperimentLayout, PipelineError> {
    cluster_balanced(samples, cfg.n_clusters, cfg.seed).map_err(|e| PipelineError::Config(vec![e.to_string()]))
}

pub fn samples_csv(samples: &SampleMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["run_id".to_string()];
    header.extend(samples.column_names().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for i in 0..samples.n_rows() {
        let mut row = vec![run_id(i)];
        row.extend(samples.row(i).iter().map(|v| v.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

fn layout_json(layout: &ExperimentLayout) -> String {
    #[derive(Serialize)]
    struct Versioned<'a> {
        schema_version: u32,
        #[serde(flatten)]
        layout: &'a ExperimentLayout,
    }
    serde_json::to_string_pretty(&Versioned {
        schema_version: LAYOUT_SCHEMA_VERSION,
        layout,
    })
    .expect("layout serializes")
}

/// Simulates one input row: QoI vector and trajectory rows.
fn simulate_row(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    names: &[String],
    row: &[f64],
    id: &str,
) -> Result<(Vec<f64>, Vec<u8>), String> {
    let model = Model::from_inputs(&inputs.daccs, cfg.scenario, names, row).map_err(|e| e.to_string())?;
    let world = simulate(&model).map_err(|e| e.to_string())?;
    let violations = check_invariants(&model, &world);
    if let Some(v) = violations.first() {
        return Err(format!("invariant {}: {}", v.kind, v.detail));
    }
    let baseline = simulate(&model.without_subsidies()).map_err(|e| e.to_string())?;
    let rho = model.discount_rate;
    let mut qoi = qoi_emissions(&world).to_vec();
    for metric in [Metric::Gdp, Metric::Consumption] {
        let g = qoi_policy_gains(&world, &baseline, metric, rho).map_err(|e| e.to_string())?;
        qoi.push(g.npv);
        qoi.extend(g.per_period.iter().map(|p| p.1));
    }
    qoi.push(qoi_total_subsidies(&world, &model.schedule, rho));
    qoi.push(avg_subsidy(&model.schedule, &world.years));
    if let Some(bad) = qoi.iter().find(|v| !v.is_finite()) {
        return Err(format!("non-finite quantity of interest {bad}"));
    }
    let vars: Vec<&str> = cfg.trajectory_variables.iter().map(String::as_str).collect();
    let mut traj = Vec::new();
    write_trajectories(&mut traj, id, &world, &vars).map_err(|e| e.to_string())?;
    Ok((qoi, traj))
}

fn part_paths(dir: &Path, cluster: usize) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("c{cluster:04}.runs.csv")),
        dir.join(format!("c{cluster:04}.traj.csv")),
    )
}

/// Completed records of a cluster part; rewrites the part files so they
/// hold only whole lines of completed runs.
fn recover_part(runs: &Path, traj: &Path, input_names: &[String]) -> Result<Vec<RunRecord>, PipelineError> {
    let header = header_line(input_names);
    let records = if runs.exists() {
        let text = fs::read_to_string(runs).map_err(|e| PipelineError::io(runs, e))?;
        let table = parse_runs(&text, &runs.display().to_string())?;
        if table.input_names != input_names {
            return Err(PipelineError::Data(format!("{}: input columns changed", runs.display())));
        }
        table.records
    } else {
        Vec::new()
    };
    let mut body = header.clone();
    for r in &records {
        body.push_str(&r.to_csv_line());
    }
    write_atomic(runs, body.as_bytes())?;

    let done: HashSet<&str> = records.iter().map(|r| r.run_id.as_str()).collect();
    let mut kept = String::new();
    if traj.exists() {
        let text = fs::read_to_string(traj).map_err(|e| PipelineError::io(traj, e))?;
        let complete = &text[..text.rfind('\n').map_or(0, |i| i + 1)];
        for line in complete.lines() {
            if line.split(',').next().is_some_and(|id| done.contains(id)) {
                kept.push_str(line);
                kept.push('\n');
            }
        }
    }
    write_atomic(traj, kept.as_bytes())?;
    Ok(records)
}

fn append(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let mut f = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| PipelineError::io(path, e))?;
    f.write_all(bytes).map_err(|e| PipelineError::io(path, e))?;
    f.flush().map_err(|e| PipelineError::io(path, e))
}

struct ClusterOutcome {
    new_runs: usize,
    skipped: usize,
}

fn run_cluster(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    samples: &SampleMatrix,
    cluster: usize,
    members: &[usize],
    parts: &Path,
) -> Result<ClusterOutcome, PipelineError> {
    let names = samples.column_names();
    let (runs_path, traj_path) = part_paths(parts, cluster);
    let done: HashSet<String> = recover_part(&runs_path, &traj_path, names)?
        .into_iter()
        .map(|r| r.run_id)
        .collect();
    let mut out = ClusterOutcome { new_runs: 0, skipped: 0 };
    for (order, &idx) in members.iter().enumerate() {
        let id = run_id(idx);
        if done.contains(&id) {
            out.skipped += 1;
            continue;
        }
        let row = samples.row(idx);
        let result = std::panic::catch_unwind(|| simulate_row(cfg, inputs, names, row, &id))
            .unwrap_or_else(|_| Err("simulation panicked".to_string()));
        let (status, reason, qoi, traj) = match result {
            Ok((qoi, traj)) => (RunStatus::Ok, String::new(), qoi, traj),
            Err(reason) => (RunStatus::Failed, reason, Vec::new(), Vec::new()),
        };
        let record = RunRecord {
            run_id: id,
            cluster_id: cluster,
            order,
            status,
            reason,
            inputs: row.to_vec(),
            qoi,
        };
        append(&traj_path, &traj)?;
        append(&runs_path, record.to_csv_line().as_bytes())?;
        out.new_runs += 1;
    }
    Ok(out)
}

/// Samples, lays out and simulates every run of `cfg`, skipping runs
/// already persisted in the output directory, then merges the per-cluster
/// parts into `runs.csv` and `trajectories.csv`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RunSummary, PipelineError> {
    let inputs = cfg.resolve()?;
    let dir = &cfg.out_dir;
    let hash = cfg.fingerprint(&inputs);
    if let Some(m) = read_manifest(dir)? {
        if m.config_hash != hash {
            return Err(PipelineError::Config(vec![format!(
                "{} holds a different experiment (hash {})",
                dir.display(),
                m.config_hash
            )]));
        }
    }
    let parts = dir.join("parts");
    fs::create_dir_all(&parts).map_err(|e| PipelineError::io(&parts, e))?;

    let samples = build_samples(cfg, &inputs)?;
    write_atomic(&dir.join("samples.csv"), samples_csv(&samples).as_bytes())?;
    let layout = build_layout(cfg, &samples)?;
    write_atomic(&dir.join("layout.json"), layout_json(&layout).as_bytes())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Data(e.to_string()))?;
    let outcomes: Vec<ClusterOutcome> = pool.install(|| {
        layout
            .clusters
            .par_iter()
            .enumerate()
            .map(|(c, members)| run_cluster(cfg, &inputs, &samples, c, members, &parts))
            .collect::<Result<_, _>>()
    })?;

    let table = merge(dir, &parts, &layout, samples.column_names())?;
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: hash,
        schemas: Schemas {
            runs: RUNS_SCHEMA_VERSION,
            trajectories: TRAJECTORY_SCHEMA_VERSION,
            layout: LAYOUT_SCHEMA_VERSION,
            report: dacgsa_core::gsa::REPORT_SCHEMA_VERSION,
        },
        config: cfg.clone(),
        n_runs: table.records.len(),
        n_ok: table.ok_records().count(),
        n_failed: table.n_failed(),
        files: ["runs.csv", "trajectories.csv", "layout.json", "samples.csv"]
            .map(String::from)
            .to_vec(),
    };
    write_atomic(
        &dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes").as_bytes(),
    )?;
    Ok(RunSummary {
        total: table.records.len(),
        new_runs: outcomes.iter().map(|o| o.new_runs).sum(),
        skipped: outcomes.iter().map(|o| o.skipped).sum(),
        failed: table.n_failed(),
    })
}

fn merge(dir: &Path, parts: &Path, layout: &ExperimentLayout, names: &[String]) -> Result<RunTable, PipelineError> {
    let mut records = Vec::new();
    let mut traj_lines: Vec<(String, String)> = Vec::new();
    for c in 0..layout.clusters.len() {
        let (runs_path, traj_path) = part_paths(parts, c);
        let text = fs::read_to_string(&runs_path).map_err(|e| PipelineError::io(&runs_path, e))?;
        records.extend(parse_runs(&text, &runs_path.display().to_string())?.records);
        let traj = fs::read_to_string(&traj_path).map_err(|e| PipelineError::io(&traj_path, e))?;
        for line in traj.lines() {
            let id = line.split(',').next().unwrap_or("").to_string();
            traj_lines.push((id, line.to_string()));
        }
    }
    records.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    // stable: rows of one run keep their emitted order
    traj_lines.sort_by(|a, b| a.0.cmp(&b.0));

    let mut runs = header_line(names);
    for r in &records {
        runs.push_str(&r.to_csv_line());
    }
    write_atomic(&dir.join("runs.csv"), runs.as_bytes())?;
    let mut traj = String::from(TRAJECTORY_HEADER);
    traj.push('\n');
    for (_, line) in &traj_lines {
        traj.push_str(line);
        traj.push('\n');
    }
    write_atomic(&dir.join("trajectories.csv"), traj.as_bytes())?;
    Ok(RunTable {
        input_names: names.to_vec(),
        records,
    })
}
