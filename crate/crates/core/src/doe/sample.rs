use serde::{Deserialize, Serialize};

use crate::doe::DoeError;

/// `N x p` input realizations (row-major) with their quantile-space twin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    column_names: Vec<String>,
    values: Vec<f64>,
    quantiles: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(
        column_names: Vec<String>,
        values: Vec<f64>,
        quantiles: Vec<f64>,
    ) -> Result<Self, DoeError> {
        let p = column_names.len();
        if p == 0 || values.len() != quantiles.len() || values.len() % p != 0 {
            return Err(DoeError::Shape(format!(
                "{} columns, {} values, {} quantiles",
                p,
                values.len(),
                quantiles.len()
            )));
        }
        if let Some(u) = quantiles.iter().find(|u| !(0.0..=1.0).contains(*u)) {
            return Err(DoeError::Shape(format!("quantile {u} outside [0, 1]")));
        }
        Ok(Self {
            column_names,
            values,
            quantiles,
        })
    }

    /// Builds a matrix whose quantile twin is the per-column normalized rank.
    pub fn from_values(column_names: Vec<String>, values: Vec<f64>) -> Result<Self, DoeError> {
        let p = column_names.len().max(1);
        let n = values.len() / p;
        let mut quantiles = vec![0.0; values.len()];
        for c in 0..column_names.len() {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| values[a * p + c].total_cmp(&values[b * p + c]).then(a.cmp(&b)));
            for (rank, &r) in idx.iter().enumerate() {
                quantiles[r * p + c] = (rank as f64 + 0.5) / n as f64;
            }
        }
        Self::new(column_names, values, quantiles)
    }

    pub fn n_rows(&self) -> usize {
        self.values.len() / self.column_names.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn quantile_row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.quantiles[i * p..(i + 1) * p]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.n_cols()).copied().collect()
    }

    pub fn quantile_column(&self, c: usize) -> Vec<f64> {
        self.quantiles.iter().skip(c).step_by(self.n_cols()).copied().collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn quantiles(&self) -> &[f64] {
        &self.quantiles
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.n_cols());
        let mut quantiles = Vec::with_capacity(idx.len() * self.n_cols());
        for &i in idx {
            values.extend_from_slice(self.row(i));
            quantiles.extend_from_slice(self.quantile_row(i));
        }
        Self {
            column_names: self.column_names.clone(),
            values,
            quantiles,
        }
    }

    /// Appends a column at the right edge.
    pub fn with_column(&self, name: &str, values: &[f64], quantiles: &[f64]) -> Result<Self, DoeError> {
        let n = self.n_rows();
        if values.len() != n || quantiles.len() != n {
            return Err(DoeError::Shape(format!("new column has {} rows, expected {n}", values.len())));
        }
        let p = self.n_cols();
        let mut v = Vec::with_capacity(n * (p + 1));
        let mut q = Vec::with_capacity(n * (p + 1));
        for i in 0..n {
            v.extend_from_slice(self.row(i));
            v.push(values[i]);
            q.extend_from_slice(self.quantile_row(i));
            q.push(quantiles[i]);
        }
        let mut names = self.column_names.clone();
        names.push(name.to_string());
        Self::new(names, v, q)
    }
}
