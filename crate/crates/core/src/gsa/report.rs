use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gsa::estimator::{bootstrap_ci, dummy_prepared, estimate_prepared, DummyThreshold, Prepared};
use crate::gsa::{CellSeparation, EstimatorOptions, GsaError, IoSample};
use crate::scalar::Scalar;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub estimator: EstimatorOptions,
    pub dummy_replicates: usize,
    /// 0 skips confidence intervals.
    pub bootstrap_replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            estimator: EstimatorOptions::default(),
            dummy_replicates: 10,
            bootstrap_replicates: 0,
            level: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputReport {
    pub name: String,
    pub group: String,
    pub index: f64,
    pub mean_part: f64,
    pub cov_part: f64,
    pub residual_part: f64,
    pub ci: Option<(f64, f64)>,
    pub irrelevant: bool,
    pub separations: Vec<CellSeparation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub schema_version: u32,
    pub n_rows: usize,
    pub output_dim: usize,
    pub options: AnalysisOptions,
    pub dummy: DummyThreshold,
    pub inputs: Vec<InputReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    /// Group label, or the input name when not grouping.
    pub label: String,
    /// Input that attains the row's index.
    pub input: String,
    pub index: f64,
    pub ci: Option<(f64, f64)>,
    pub irrelevant: bool,
}

/// Indices, decompositions, separation curves and optional intervals for
/// every input column.
pub fn analyze_sample<T: Scalar>(sample: &IoSample<T>, opts: &AnalysisOptions) -> Result<SensitivityReport, GsaError> {
    let s = sample.compact()?;
    let prep = Prepared::new(&s)?;
    let dummy = dummy_prepared(&prep, &opts.estimator, opts.dummy_replicates.max(1), opts.seed)?;
    let names = s.inputs.column_names().to_vec();
    let inputs = (0..s.n_inputs())
        .into_par_iter()
        .map(|i| {
            let est = estimate_prepared(&s, &prep, i, &opts.estimator)?;
            let mut separations = est.cells;
            let ci = if opts.bootstrap_replicates > 0 {
                let b = bootstrap_ci(&s, i, &opts.estimator, opts.level, opts.bootstrap_replicates, opts.seed)?;
                if let Some(cells) = &b.cell_ci {
                    if cells.len() == separations.len() {
                        for (c, &ci) in separations.iter_mut().zip(cells) {
                            c.ci = Some(ci);
                        }
                    }
                }
                Some((b.lo, b.hi))
            } else {
                None
            };
            Ok(InputReport {
                name: names[i].clone(),
                group: s.groups[i].clone(),
                index: est.index,
                mean_part: est.mean_part,
                cov_part: est.cov_part,
                residual_part: est.residual_part,
                ci,
                irrelevant: est.index <= dummy.value,
                separations,
            })
        })
        .collect::<Result<Vec<_>, GsaError>>()?;
    Ok(SensitivityReport {
        schema_version: REPORT_SCHEMA_VERSION,
        n_rows: s.inputs.n_rows(),
        output_dim: s.output_dim,
        options: *opts,
        dummy,
        inputs,
    })
}

/// Descending by index, ties in declaration order. Grouping keeps the
/// largest index within each group.
pub fn rank_inputs(report: &SensitivityReport, group_by_technology: bool) -> Vec<RankRow> {
    let mut rows: Vec<RankRow> = Vec::new();
    for inp in &report.inputs {
        let label = if group_by_technology { &inp.group } else { &inp.name };
        match rows.iter_mut().find(|r| &r.label == label) {
            Some(r) if inp.index > r.index => {
                r.input = inp.name.clone();
                r.index = inp.index;
                r.ci = inp.ci;
                r.irrelevant = inp.irrelevant;
            }
            Some(_) => {}
            None => rows.push(RankRow {
                rank: 0,
                label: label.clone(),
                input: inp.name.clone(),
                index: inp.index,
                ci: inp.ci,
                irrelevant: inp.irrelevant,
            }),
        }
    }
    rows.sort_by(|a, b| b.index.total_cmp(&a.index));
    for (k, r) in rows.iter_mut().enumerate() {
        r.rank = k + 1;
    }
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl SensitivityReport {
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "name",
            "group",
            "index",
            "mean_part",
            "cov_part",
            "residual_part",
            "ci_lo",
            "ci_hi",
            "irrelevant",
        ])?;
        for r in &self.inputs {
            w.write_record([
                r.name.clone(),
                r.group.clone(),
                r.index.to_string(),
                r.mean_part.to_string(),
                r.cov_part.to_string(),
                r.residual_part.to_string(),
                opt(r.ci.map(|c| c.0)),
                opt(r.ci.map(|c| c.1)),
                r.irrelevant.to_string(),
            ])?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GsaError> {
        serde_json::from_str(text).map_err(|e| GsaError::Shape(e.to_string()))
    }
}

pub fn write_ranking_csv<W: Write>(rows: &[RankRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "label", "input", "index", "ci_lo", "ci_hi", "irrelevant"])?;
    for r in rows {
        w.write_record([
            r.rank.to_string(),
            r.label.clone(),
            r.input.clone(),
            r.index.to_string(),
            opt(r.ci.map(|c| c.0)),
            opt(r.ci.map(|c| c.1)),
            r.irrelevant.to_string(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsa::DummyThreshold;

    fn report(entries: &[(&str, &str, f64)]) -> SensitivityReport {
        SensitivityReport {
            schema_version: REPORT_SCHEMA_VERSION,
            n_rows: 10,
            output_dim: 1,
            options: AnalysisOptions::default(),
            dummy: DummyThreshold {
                value: 0.05,
                replicates: vec![0.05],
            },
            inputs: entries
                .iter()
                .map(|&(n, g, i)| InputReport {
                    name: n.into(),
                    group: g.into(),
                    index: i,
                    mean_part: i,
                    cov_part: 0.0,
                    residual_part: 0.0,
                    ci: None,
                    irrelevant: i <= 0.05,
                    separations: vec![],
                })
                .collect(),
        }
    }

    #[test]
    fn grouped_rows_take_the_max() {
        let r = report(&[("cf_ls", "CF", 0.1), ("cf_ss", "CF", 0.3), ("cf_cao", "CF", 0.2), ("k", "Growth", 0.25)]);
        let rows = rank_inputs(&r, true);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].label.as_str(), rows[0].input.as_str(), rows[0].index), ("CF", "cf_ss", 0.3));
        assert_eq!(rows[1].rank, 2);
    }

    #[test]
    fn ties_keep_declaration_order() {
        let r = report(&[("a", "a", 0.2), ("b", "b", 0.2), ("c", "c", 0.2)]);
        let labels: Vec<_> = rank_inputs(&r, false).into_iter().map(|r| r.label).collect();
        assert_eq!(labels, ["a", "b", "c"]);
    }

    #[test]
    fn first_row_is_the_max() {
        let r = report(&[("a", "a", 0.01), ("b", "b", 0.5), ("c", "c", 0.2)]);
        let rows = rank_inputs(&r, false);
        assert_eq!(rows[0].index, 0.5);
        assert!(rank_inputs(&r, false)[2].irrelevant);
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let r = report(&[("a", "A", 0.1)]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,group,index"));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(SensitivityReport::from_json(&r.to_json()).unwrap(), r);
    }
}
