use std::fs;
use std::path::Path;

use serde::Serialize;

use dacgsa_core::gsa::SensitivityReport;

use crate::analyze::Qoi;
use crate::records::{qoi_columns, read_runs};
use crate::runner::{read_manifest, write_atomic};
use crate::PipelineError;

/// Columns written to `density.csv`.
pub const DENSITY_COLUMNS: [&str; 5] = ["e2040", "e2045", "e2050", "total_subsidies", "avg_subsidy"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub bin: usize,
    pub n: usize,
    pub x_mean: f64,
    pub y_mean: f64,
}

/// Means of `x` and `y` over `bins` equal-count groups of rows ordered by
/// `x` (ties by row order).
pub fn rank_binned_means(x: &[f64], y: &[f64], bins: usize) -> Vec<Bin> {
    let n = x.len().min(y.len());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let bins = bins.min(n).max(1);
    (0..bins)
        .filter_map(|b| {
            let idx = &order[b * n / bins..(b + 1) * n / bins];
            (!idx.is_empty()).then(|| Bin {
                bin: b,
                n: idx.len(),
                x_mean: idx.iter().map(|&i| x[i]).sum::<f64>() / idx.len() as f64,
                y_mean: idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64,
            })
        })
        .collect()
}

struct Table(csv::Writer<Vec<u8>>);

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Self(w)
    }

    fn row(&mut self, fields: &[String]) {
        self.0.write_record(fields).expect("in-memory write");
    }

    fn save(self, path: &Path) -> Result<(), PipelineError> {
        let bytes = self.0.into_inner().map_err(|e| PipelineError::io(path, e))?;
        write_atomic(path, &bytes)
    }
}

/// Writes plotting tables under `run_dir/plots`: QoI densities, partial
/// dependence of E(2050) on every input (scatter and rank-binned means),
/// and separation curves of any analyses already run.
pub fn emit_plot_data(run_dir: &Path, bins: Option<usize>) -> Result<Vec<String>, PipelineError> {
    let manifest = read_manifest(run_dir)?
        .ok_or_else(|| PipelineError::Analysis(format!("{} has no manifest.json", run_dir.display())))?;
    let bins = bins.unwrap_or(manifest.config.plot_bins);
    let table = read_runs(&run_dir.join("runs.csv"))?;
    let dir = run_dir.join("plots");
    fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    let cols = qoi_columns();
    let col = |name: &str| cols.iter().position(|c| c == name).expect("known column");
    let ok: Vec<_> = table.ok_records().collect();
    let mut written = Vec::new();

    let mut density = Table::new(&["qoi", "run_id", "value"]);
    for name in DENSITY_COLUMNS {
        let c = col(name);
        for r in &ok {
            density.row(&[name.to_string(), r.run_id.clone(), r.qoi[c].to_string()]);
        }
    }
    density.save(&dir.join("density.csv"))?;
    written.push("density.csv".to_string());

    let e = col("e2050");
    let y: Vec<f64> = ok.iter().map(|r| r.qoi[e]).collect();
    let mut scatter = Table::new(&["input", "run_id", "x", "e2050"]);
    let mut binned = Table::new(&["input", "bin", "n", "x_mean", "y_mean"]);
    for (k, name) in table.input_names.iter().enumerate() {
        let x: Vec<f64> = ok.iter().map(|r| r.inputs[k]).collect();
        for (r, (&xi, &yi)) in ok.iter().zip(x.iter().zip(&y)) {
            scatter.row(&[name.clone(), r.run_id.clone(), xi.to_string(), yi.to_string()]);
        }
        for b in rank_binned_means(&x, &y, bins) {
            binned.row(&[
                name.clone(),
                b.bin.to_string(),
                b.n.to_string(),
                b.x_mean.to_string(),
                b.y_mean.to_string(),
            ]);
        }
    }
    scatter.save(&dir.join("pdp_scatter.csv"))?;
    binned.save(&dir.join("pdp_binned.csv"))?;
    written.extend(["pdp_scatter.csv".to_string(), "pdp_binned.csv".to_string()]);

    let mut seps = Table::new(&["qoi", "input", "cell", "center", "weight", "gamma", "ci_lo", "ci_hi"]);
    let mut any = false;
    for q in Qoi::ALL {
        let path = run_dir.join("analysis").join(q.as_str()).join("sensitivity.json");
        if !path.exists() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
        let report = SensitivityReport::from_json(&text).map_err(|e| PipelineError::Data(e.to_string()))?;
        any = true;
        for inp in &report.inputs {
            for (c, s) in inp.separations.iter().enumerate() {
                let (lo, hi) = s.ci.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
                seps.row(&[
                    q.as_str().to_string(),
                    inp.name.clone(),
                    c.to_string(),
                    s.center.to_string(),
                    s.weight.to_string(),
                    s.gamma.to_string(),
                    lo,
                    hi,
                ]);
            }
        }
    }
    if any {
        seps.save(&dir.join("separations.csv"))?;
        written.push("separations.csv".to_string());
    }
    Ok(written)
}
