use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::PipelineError;

pub const RUNS_SCHEMA_VERSION: u32 = 1;
pub const TRAJECTORY_HEADER: &str = "run_id,region,tech,year,variable,value";

/// Years of the per-period gain columns.
pub const GAIN_YEARS: [i32; 6] = [2025, 2030, 2035, 2040, 2045, 2050];

/// QoI column names of `runs.csv`, in order.
pub fn qoi_columns() -> Vec<String> {
    let mut cols: Vec<String> = ["e2040", "e2045", "e2050"].map(String::from).to_vec();
    for m in ["gdp", "consumption"] {
        cols.push(format!("{m}_npv"));
        cols.extend(GAIN_YEARS.iter().map(|y| format!("{m}_{y}")));
    }
    cols.push("total_subsidies".into());
    cols.push("avg_subsidy".into());
    cols
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub cluster_id: usize,
    pub order: usize,
    pub status: RunStatus,
    pub reason: String,
    pub inputs: Vec<f64>,
    /// Values for [`qoi_columns`]; empty for failed runs.
    pub qoi: Vec<f64>,
}

pub fn run_id(index: usize) -> String {
    format!("r{index:06}")
}

pub fn runs_header(input_names: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["run_id", "cluster_id", "order", "status", "reason"].map(String::from).to_vec();
    h.extend(input_names.iter().cloned());
    h.extend(qoi_columns());
    h
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

impl RunRecord {
    /// One CSV line, newline-terminated.
    pub fn to_csv_line(&self) -> String {
        let mut f = vec![
            self.run_id.clone(),
            self.cluster_id.to_string(),
            self.order.to_string(),
            self.status.as_str().to_string(),
            self.reason.clone(),
        ];
        f.extend(self.inputs.iter().map(|v| v.to_string()));
        if self.qoi.is_empty() {
            f.extend(std::iter::repeat(String::new()).take(qoi_columns().len()));
        } else {
            f.extend(self.qoi.iter().map(|v| v.to_string()));
        }
        csv_line(&f)
    }
}

pub fn header_line(input_names: &[String]) -> String {
    csv_line(&runs_header(input_names))
}

/// Parsed `runs.csv`: column names plus records.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    pub input_names: Vec<String>,
    pub records: Vec<RunRecord>,
}

impl RunTable {
    pub fn ok_records(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| r.status == RunStatus::Ok)
    }

    pub fn n_failed(&self) -> usize {
        self.records.iter().filter(|r| r.status == RunStatus::Failed).count()
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, PipelineError> {
    s.trim()
        .parse()
        .map_err(|_| PipelineError::Data(format!("bad number `{s}` in {what}")))
}

/// Reads run records from CSV text. Unterminated trailing lines, left by
/// an interrupted writer, are ignored.
pub fn parse_runs(text: &str, source: &str) -> Result<RunTable, PipelineError> {
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut rdr = csv::ReaderBuilder::new().from_reader(complete.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| PipelineError::Data(format!("{source}: {e}")))?
        .iter()
        .map(String::from)
        .collect();
    let qcols = qoi_columns();
    if header.len() < 5 + qcols.len() || header[..5] != ["run_id", "cluster_id", "order", "status", "reason"] {
        return Err(PipelineError::Data(format!("{source}: unexpected header")));
    }
    let n_inputs = header.len() - 5 - qcols.len();
    if header[5 + n_inputs..] != qcols[..] {
        let missing: Vec<&String> = qcols.iter().filter(|c| !header.contains(c)).collect();
        return Err(PipelineError::Analysis(format!("{source}: missing QoI columns {missing:?}")));
    }
    let input_names = header[5..5 + n_inputs].to_vec();
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| PipelineError::Data(format!("{source}: {e}")))?;
        let status = match &rec[3] {
            "ok" => RunStatus::Ok,
            "failed" => RunStatus::Failed,
            other => return Err(PipelineError::Data(format!("{source}: bad status `{other}`"))),
        };
        let inputs = (5..5 + n_inputs)
            .map(|c| parse_f64(&rec[c], source))
            .collect::<Result<Vec<_>, _>>()?;
        let qoi = match status {
            RunStatus::Ok => (5 + n_inputs..rec.len())
                .map(|c| parse_f64(&rec[c], source))
                .collect::<Result<Vec<_>, _>>()?,
            RunStatus::Failed => Vec::new(),
        };
        records.push(RunRecord {
            run_id: rec[0].to_string(),
            cluster_id: parse_f64(&rec[1], source)? as usize,
            order: parse_f64(&rec[2], source)? as usize,
            status,
            reason: rec[4].to_string(),
            inputs,
            qoi,
        });
    }
    Ok(RunTable { input_names, records })
}

pub fn read_runs(path: &Path) -> Result<RunTable, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    parse_runs(&text, &path.display().to_string())
}
