use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::substream;
use crate::gsa::{GsaError, IoSample, MIN_CELL_SIZE};
use crate::ot::{
    empirical_summary, solve_exact, solve_exact_1d, solve_sinkhorn, squared_euclidean_cost, wasserstein_bures,
    DiscreteMeasure, GaussianSummary, SinkhornOptions,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Exact,
    /// Entropic plan with epsilon at a fraction of the median ground cost.
    Sinkhorn,
    /// Closed-form Wasserstein-Bures part only.
    Wb,
}

impl std::str::FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "sinkhorn" => Ok(Self::Sinkhorn),
            "wb" | "wb_only" => Ok(Self::Wb),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub partitions: usize,
    pub solver: Solver,
    /// Sinkhorn epsilon relative to the median ground cost.
    pub sinkhorn_rel_epsilon: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            partitions: 30,
            solver: Solver::Exact,
            sinkhorn_rel_epsilon: 1e-2,
        }
    }
}

/// One conditioning cell: member rows and a representative input value.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub members: Vec<usize>,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSeparation {
    pub center: f64,
    pub size: usize,
    /// Probability mass of the cell.
    pub weight: f64,
    /// OT cost between the cell's outputs and all outputs.
    pub gamma: f64,
    pub mean_part: f64,
    pub cov_part: f64,
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub index: f64,
    pub mean_part: f64,
    pub cov_part: f64,
    pub residual_part: f64,
    /// Weighted mean of the cell separations.
    pub xi: f64,
    /// Trace of the (standardized) output covariance.
    pub total_variance: f64,
    pub cells: Vec<CellSeparation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DummyThreshold {
    pub value: f64,
    pub replicates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub replicates: Vec<f64>,
    /// Per rank-ordered cell, when every replicate produced the same cell count.
    pub cell_ci: Option<Vec<(f64, f64)>>,
}

/// Splits rows by the values `x`. Continuous columns get `partitions`
/// equal-mass rank cells (ties broken by row order); discrete columns, and
/// columns with fewer distinct values than `partitions`, get one cell per
/// distinct value.
pub fn partition(x: &[f64], partitions: usize, discrete: bool) -> Result<Vec<Cell>, GsaError> {
    if partitions < 2 {
        return Err(GsaError::Partitions(partitions));
    }
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let distinct = order.windows(2).filter(|w| x[w[0]] != x[w[1]]).count() + usize::from(n > 0);

    if discrete || distinct < partitions {
        // one cell per distinct value; rare values join their upper neighbour
        let mut cells: Vec<Cell> = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            open.push(i);
            let value_ends = order.get(k + 1).map_or(true, |&j| x[j] != x[i]);
            if value_ends && open.len() >= MIN_CELL_SIZE {
                cells.push(value_cell(x, std::mem::take(&mut open)));
            }
        }
        if !open.is_empty() {
            match cells.pop() {
                Some(last) => {
                    let mut members = last.members;
                    members.extend(open);
                    cells.push(value_cell(x, members));
                }
                None => cells.push(value_cell(x, open)),
            }
        }
        return Ok(cells);
    }

    Ok((0..partitions)
        .map(|c| {
            let members = order[c * n / partitions..(c + 1) * n / partitions].to_vec();
            let mid = members[members.len() / 2];
            Cell { center: x[mid], members }
        })
        .collect())
}

fn value_cell(x: &[f64], members: Vec<usize>) -> Cell {
    Cell { center: x[members[members.len() / 2]], members }
}

/// Standardized outputs with their full-sample measure and summary.
pub(crate) struct Prepared<T> {
    outputs: Vec<T>,
    dim: usize,
    total_variance: T,
    full: DiscreteMeasure<T>,
    full_summary: GaussianSummary<T>,
}

impl<T: Scalar> Prepared<T> {
    pub(crate) fn new(sample: &IoSample<T>) -> Result<Self, GsaError> {
        let (outputs, total_variance) = sample.standardized_outputs()?;
        let full = DiscreteMeasure::uniform(outputs.clone(), sample.output_dim)?;
        let full_summary = empirical_summary(&full);
        Ok(Self {
            outputs,
            dim: sample.output_dim,
            total_variance,
            full,
            full_summary,
        })
    }

    fn n(&self) -> usize {
        self.outputs.len() / self.dim
    }

    fn cell_measure(&self, members: &[usize]) -> Result<DiscreteMeasure<T>, GsaError> {
        let mut pts = Vec::with_capacity(members.len() * self.dim);
        for &i in members {
            pts.extend_from_slice(&self.outputs[i * self.dim..(i + 1) * self.dim]);
        }
        Ok(DiscreteMeasure::uniform(pts, self.dim)?)
    }

    /// `(gamma, mean_part, cov_part)` of one cell.
    fn separation(&self, members: &[usize], opts: &EstimatorOptions) -> Result<(T, T, T), GsaError> {
        let cond = self.cell_measure(members)?;
        let wb = wasserstein_bures(&empirical_summary(&cond), &self.full_summary)?;
        let gamma = match opts.solver {
            Solver::Wb => wb.total(),
            Solver::Exact if self.dim == 1 => solve_exact_1d(&cond, &self.full)?.cost,
            Solver::Exact => solve_exact(&cond, &self.full)?.cost,
            Solver::Sinkhorn => {
                let mut cost = squared_euclidean_cost(&cond, &self.full)?;
                let mid = cost.len() / 2;
                let (_, med, _) = cost.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
                let mut scale = *med;
                if !(scale > T::zero()) {
                    scale = T::one();
                }
                let mut so = SinkhornOptions::new(scale * T::lit(opts.sinkhorn_rel_epsilon));
                so.tol = T::lit(1e-5);
                so.max_iter = 20_000;
                solve_sinkhorn(&cond, &self.full, so)?.cost
            }
        };
        Ok((gamma, wb.mean_term, wb.cov_term))
    }

    fn estimate_cells(&self, cells: &[Cell], input: usize, opts: &EstimatorOptions) -> Result<IndexEstimate, GsaError> {
        if let Some((c, cell)) = cells.iter().enumerate().find(|(_, c)| c.members.len() < MIN_CELL_SIZE) {
            return Err(GsaError::CellUnderflow {
                input,
                cell: c,
                size: cell.members.len(),
            });
        }
        let parts: Vec<(T, T, T)> = cells
            .par_iter()
            .map(|c| self.separation(&c.members, opts))
            .collect::<Result<_, _>>()?;
        let n = self.n() as f64;
        let denom = 2.0 * self.total_variance.to_f64_lossy();
        let mut xi = 0.0;
        let mut mean_part = 0.0;
        let mut cov_part = 0.0;
        let mut seps = Vec::with_capacity(cells.len());
        for (cell, &(g, v, s)) in cells.iter().zip(&parts) {
            let w = cell.members.len() as f64 / n;
            let (g, v, s) = (g.to_f64_lossy(), v.to_f64_lossy(), s.to_f64_lossy());
            xi += w * g;
            mean_part += w * v;
            cov_part += w * s;
            seps.push(CellSeparation {
                center: cell.center,
                size: cell.members.len(),
                weight: w,
                gamma: g,
                mean_part: v,
                cov_part: s,
                ci: None,
            });
        }
        let index = xi / denom;
        let mean_part = mean_part / denom;
        let cov_part = cov_part / denom;
        let residual_part = if opts.solver == Solver::Wb {
            0.0
        } else {
            index - mean_part - cov_part
        };
        Ok(IndexEstimate {
            index,
            mean_part,
            cov_part,
            residual_part,
            xi,
            total_variance: self.total_variance.to_f64_lossy(),
            cells: seps,
        })
    }
}

fn check_input<T>(sample: &IoSample<T>, input: usize) -> Result<(), GsaError> {
    if input >= sample.inputs.n_cols() {
        return Err(GsaError::InputIndex(input));
    }
    Ok(())
}

/// Index of input `input` on the valid rows of `sample`.
pub fn estimate_index<T: Scalar>(
    sample: &IoSample<T>,
    input: usize,
    opts: &EstimatorOptions,
) -> Result<IndexEstimate, GsaError> {
    check_input(sample, input)?;
    let s = sample.compact()?;
    let prep = Prepared::new(&s)?;
    estimate_prepared(&s, &prep, input, opts)
}

pub(crate) fn estimate_prepared<T: Scalar>(
    sample: &IoSample<T>,
    prep: &Prepared<T>,
    input: usize,
    opts: &EstimatorOptions,
) -> Result<IndexEstimate, GsaError> {
    let cells = partition(&sample.inputs.column(input), opts.partitions, sample.discrete[input])?;
    prep.estimate_cells(&cells, input, opts)
}

/// Per-cell separations of input `input`; their weighted mean is `xi`.
pub fn local_separations<T: Scalar>(
    sample: &IoSample<T>,
    input: usize,
    opts: &EstimatorOptions,
) -> Result<Vec<CellSeparation>, GsaError> {
    Ok(estimate_index(sample, input, opts)?.cells)
}

/// Mean index of fresh uniform inputs drawn independently of the outputs.
pub fn dummy_threshold<T: Scalar>(
    sample: &IoSample<T>,
    opts: &EstimatorOptions,
    replicates: usize,
    seed: u64,
) -> Result<DummyThreshold, GsaError> {
    if replicates == 0 {
        return Err(GsaError::Replicates(0));
    }
    let s = sample.compact()?;
    let prep = Prepared::new(&s)?;
    dummy_prepared(&prep, opts, replicates, seed)
}

pub(crate) fn dummy_prepared<T: Scalar>(
    prep: &Prepared<T>,
    opts: &EstimatorOptions,
    replicates: usize,
    seed: u64,
) -> Result<DummyThreshold, GsaError> {
    let n = prep.n();
    let reps: Vec<f64> = (0..replicates)
        .map(|r| {
            let mut rng = substream(seed, "gsa/dummy", r as u64);
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let cells = partition(&x, opts.partitions, false)?;
            Ok(prep.estimate_cells(&cells, usize::MAX, opts)?.index)
        })
        .collect::<Result<_, GsaError>>()?;
    let value = reps.iter().sum::<f64>() / reps.len() as f64;
    Ok(DummyThreshold {
        value,
        replicates: reps,
    })
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    crate::dist::kde::empirical_quantile(sorted, p)
}

/// Percentile bootstrap over jointly resampled rows.
pub fn bootstrap_ci<T: Scalar>(
    sample: &IoSample<T>,
    input: usize,
    opts: &EstimatorOptions,
    level: f64,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapCi, GsaError> {
    check_input(sample, input)?;
    if replicates < 2 {
        return Err(GsaError::Replicates(replicates));
    }
    let s = sample.compact()?;
    let n = s.inputs.n_rows();
    let stream = format!("gsa/bootstrap/{input}");
    let runs: Vec<IndexEstimate> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, &stream, r as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let bs = s.select_rows(&idx);
            let prep = Prepared::new(&bs)?;
            estimate_prepared(&bs, &prep, input, opts)
        })
        .collect::<Result<_, _>>()?;

    let alpha = (1.0 - level) / 2.0;
    let mut values: Vec<f64> = runs.iter().map(|e| e.index).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let cells = runs[0].cells.len();
    let cell_ci = runs.iter().all(|e| e.cells.len() == cells).then(|| {
        (0..cells)
            .map(|c| {
                let mut g: Vec<f64> = runs.iter().map(|e| e.cells[c].gamma).collect();
                g.sort_by(f64::total_cmp);
                (percentile(&g, alpha), percentile(&g, 1.0 - alpha))
            })
            .collect()
    });
    let out = BootstrapCi {
        level,
        lo: percentile(&sorted, alpha),
        hi: percentile(&sorted, 1.0 - alpha),
        replicates: std::mem::take(&mut values),
        cell_ci,
    };
    Ok(out)
}
