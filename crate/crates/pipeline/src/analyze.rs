use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use dacgsa_core::dist::kde::empirical_quantile;
use dacgsa_core::dist::substream;
use dacgsa_core::doe::SampleMatrix;
use dacgsa_core::gsa::{
    analyze_sample, rank_inputs, write_ranking_csv, AnalysisOptions, EstimatorOptions, IoSample, RankRow, Solver,
};

use crate::records::{qoi_columns, read_runs, RunTable};
use crate::runner::{read_manifest, write_atomic};
use crate::PipelineError;

/// Removals counted as gigaton scale, tCO2/yr.
pub const GIGATON: f64 = 1e9;
pub const GIGATON_BOOTSTRAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qoi {
    Emissions,
    GainsGdp,
    GainsConsumption,
    TotalSubsidies,
}

impl Qoi {
    pub const ALL: [Qoi; 4] = [Qoi::Emissions, Qoi::GainsGdp, Qoi::GainsConsumption, Qoi::TotalSubsidies];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Emissions => "emissions",
            Self::GainsGdp => "gains_gdp",
            Self::GainsConsumption => "gains_consumption",
            Self::TotalSubsidies => "total_subsidies",
        }
    }

    /// `runs.csv` columns forming the GSA output vector.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::Emissions => &["e2040", "e2045", "e2050"],
            Self::GainsGdp => &["gdp_npv"],
            Self::GainsConsumption => &["consumption_npv"],
            Self::TotalSubsidies => &["total_subsidies"],
        }
    }
}

impl std::str::FromStr for Qoi {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|q| q.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown QoI `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub threshold: f64,
    pub n_runs: usize,
    pub n_exceeding: usize,
    pub probability: f64,
}

/// 5th percentile of the average subsidy among gigaton-scale runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GigatonSubsidy {
    pub defined: bool,
    pub n_gigaton: usize,
    pub p5: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub level: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub column: String,
    pub n: usize,
    pub mean: f64,
    pub p5: f64,
    pub median: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub qoi: Qoi,
    pub n_ok: usize,
    pub n_failed: usize,
    pub dummy_threshold: f64,
    pub exceedance: Exceedance,
    pub gigaton_subsidy: GigatonSubsidy,
    pub ranking: Vec<RankRow>,
    pub ranking_by_input: Vec<RankRow>,
}

fn column(table: &RunTable, name: &str) -> Result<Vec<f64>, PipelineError> {
    let cols = qoi_columns();
    let c = cols
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| PipelineError::Analysis(format!("missing QoI column `{name}`")))?;
    Ok(table.ok_records().map(|r| r.qoi[c]).collect())
}

pub fn quantile_summary(name: &str, values: &[f64]) -> Option<QuantileRow> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(QuantileRow {
        column: name.to_string(),
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        p5: empirical_quantile(&v, 0.05),
        median: empirical_quantile(&v, 0.5),
        p95: empirical_quantile(&v, 0.95),
    })
}

pub fn exceedance(e2050: &[f64]) -> Exceedance {
    let n_exceeding = e2050.iter().filter(|&&e| e >= GIGATON).count();
    Exceedance {
        threshold: GIGATON,
        n_runs: e2050.len(),
        n_exceeding,
        probability: if e2050.is_empty() {
            0.0
        } else {
            n_exceeding as f64 / e2050.len() as f64
        },
    }
}

pub fn gigaton_subsidy(e2050: &[f64], avg_subsidy: &[f64], level: f64, replicates: usize, seed: u64) -> GigatonSubsidy {
    let mut sel: Vec<f64> = e2050
        .iter()
        .zip(avg_subsidy)
        .filter(|(&e, _)| e >= GIGATON)
        .map(|(_, &s)| s)
        .collect();
    let mut out = GigatonSubsidy {
        defined: !sel.is_empty(),
        n_gigaton: sel.len(),
        p5: None,
        ci: None,
        level,
        replicates,
    };
    if sel.is_empty() {
        return out;
    }
    sel.sort_by(f64::total_cmp);
    out.p5 = Some(empirical_quantile(&sel, 0.05));
    let n = sel.len();
    let mut stats: Vec<f64> = (0..replicates)
        .map(|r| {
            let mut rng = substream(seed, "analysis/gigaton", r as u64);
            let mut b: Vec<f64> = (0..n).map(|_| sel[rng.gen_range(0..n)]).collect();
            b.sort_by(f64::total_cmp);
            empirical_quantile(&b, 0.05)
        })
        .collect();
    if !stats.is_empty() {
        stats.sort_by(f64::total_cmp);
        let a = (1.0 - level) / 2.0;
        out.ci = Some((empirical_quantile(&stats, a), empirical_quantile(&stats, 1.0 - a)));
    }
    out
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn write_csv_rows<S: Serialize>(path: &Path, rows: &[S]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| PipelineError::io(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::io(path, e))?;
    write_atomic(path, &bytes)
}

/// Runs the sensitivity suite for `qoi` over the ok runs of `run_dir` and
/// writes report tables under `run_dir/analysis`.
pub fn analyze(run_dir: &Path, qoi: Qoi, solver: Option<Solver>) -> Result<AnalysisSummary, PipelineError> {
    let manifest = read_manifest(run_dir)?
        .ok_or_else(|| PipelineError::Analysis(format!("{} has no manifest.json", run_dir.display())))?;
    let cfg = manifest.config;
    let inputs = cfg.resolve()?;
    let table = read_runs(&run_dir.join("runs.csv")).map_err(|e| match e {
        PipelineError::Analysis(m) => PipelineError::Analysis(m),
        other => PipelineError::Analysis(other.to_string()),
    })?;
    let n_ok = table.ok_records().count();
    if n_ok == 0 {
        return Err(PipelineError::Analysis("no successful runs".into()));
    }

    let out = run_dir.join("analysis");
    let qdir = out.join(qoi.as_str());
    fs::create_dir_all(&qdir).map_err(|e| PipelineError::io(&qdir, e))?;

    let mut values = Vec::with_capacity(n_ok * table.input_names.len());
    for r in table.ok_records() {
        values.extend_from_slice(&r.inputs);
    }
    let x = SampleMatrix::from_values(table.input_names.clone(), values).map_err(|e| PipelineError::Analysis(e.to_string()))?;
    let cols: Vec<Vec<f64>> = qoi
        .columns()
        .iter()
        .map(|c| column(&table, c))
        .collect::<Result<_, _>>()?;
    let y: Vec<f64> = (0..n_ok).flat_map(|i| cols.iter().map(move |c| c[i])).collect();

    let labels = table
        .input_names
        .iter()
        .map(|n| inputs.space.get(n).map_or_else(|| n.clone(), |e| e.label.clone()))
        .collect();
    let discrete = table
        .input_names
        .iter()
        .map(|n| inputs.space.get(n).is_some_and(|e| e.distribution.is_discrete()))
        .collect();
    let sample = IoSample::new(x, y, cols.len())
        .and_then(|s| s.with_groups(labels))
        .and_then(|s| s.with_discrete(discrete))
        .map_err(|e| PipelineError::Analysis(e.to_string()))?;
    let opts = AnalysisOptions {
        estimator: EstimatorOptions {
            partitions: cfg.partitions(),
            solver: solver.unwrap_or(cfg.solver),
            ..Default::default()
        },
        dummy_replicates: cfg.dummy_replicates,
        bootstrap_replicates: cfg.bootstrap_replicates,
        level: cfg.confidence_level,
        seed: cfg.seed,
    };
    let report = analyze_sample(&sample, &opts).map_err(|e| PipelineError::Analysis(e.to_string()))?;
    let grouped = rank_inputs(&report, true);
    let by_input = rank_inputs(&report, false);

    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(|e| PipelineError::Analysis(e.to_string()))?;
    write_atomic(&qdir.join("sensitivity.csv"), &buf)?;
    write_atomic(&qdir.join("sensitivity.json"), report.to_json().as_bytes())?;
    for (name, rows) in [("ranking_grouped.csv", &grouped), ("ranking_inputs.csv", &by_input)] {
        let mut buf = Vec::new();
        write_ranking_csv(rows, &mut buf).map_err(|e| PipelineError::Analysis(e.to_string()))?;
        write_atomic(&qdir.join(name), &buf)?;
    }

    let mut quantiles = Vec::new();
    for c in qoi_columns() {
        quantiles.extend(quantile_summary(&c, &column(&table, &c)?));
    }
    write_csv_rows(&out.join("summary.csv"), &quantiles)?;
    let e2050 = column(&table, "e2050")?;
    let exc = exceedance(&e2050);
    write_atomic(&out.join("exceedance.json"), to_json(&exc).as_bytes())?;
    let giga = gigaton_subsidy(
        &e2050,
        &column(&table, "avg_subsidy")?,
        cfg.confidence_level,
        GIGATON_BOOTSTRAP,
        cfg.seed,
    );
    write_atomic(&out.join("gigaton_subsidy.json"), to_json(&giga).as_bytes())?;

    #[derive(Serialize)]
    struct Status<'a> {
        n_ok: usize,
        n_failed: usize,
        failed: Vec<(&'a str, &'a str)>,
    }
    let status = Status {
        n_ok,
        n_failed: table.n_failed(),
        failed: table
            .records
            .iter()
            .filter(|r| r.status == crate::RunStatus::Failed)
            .map(|r| (r.run_id.as_str(), r.reason.as_str()))
            .collect(),
    };
    write_atomic(&out.join("status.json"), to_json(&status).as_bytes())?;

    Ok(AnalysisSummary {
        qoi,
        n_ok,
        n_failed: table.n_failed(),
        dummy_threshold: report.dummy.value,
        exceedance: exc,
        gigaton_subsidy: giga,
        ranking: grouped,
        ranking_by_input: by_input,
    })
}
