use crate::doe::SampleMatrix;
use crate::gsa::GsaError;
use crate::scalar::Scalar;

/// Inputs, row-major outputs and a validity mask for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct IoSample<T> {
    pub inputs: SampleMatrix,
    /// Family label per input column, used when grouping rankings.
    pub groups: Vec<String>,
    /// Columns whose cells are their distinct values.
    pub discrete: Vec<bool>,
    pub outputs: Vec<T>,
    pub output_dim: usize,
    pub valid: Vec<bool>,
}

impl<T: Scalar> IoSample<T> {
    pub fn new(inputs: SampleMatrix, outputs: Vec<T>, output_dim: usize) -> Result<Self, GsaError> {
        let n = inputs.n_rows();
        if output_dim == 0 || outputs.len() != n * output_dim {
            return Err(GsaError::Shape(format!(
                "{} output values for {n} rows of dimension {output_dim}",
                outputs.len()
            )));
        }
        let k = inputs.n_cols();
        Ok(Self {
            groups: inputs.column_names().to_vec(),
            discrete: vec![false; k],
            inputs,
            outputs,
            output_dim,
            valid: vec![true; n],
        })
    }

    pub fn with_groups(mut self, groups: Vec<String>) -> Result<Self, GsaError> {
        if groups.len() != self.inputs.n_cols() {
            return Err(GsaError::Shape(format!("{} groups for {} inputs", groups.len(), self.inputs.n_cols())));
        }
        self.groups = groups;
        Ok(self)
    }

    pub fn with_discrete(mut self, discrete: Vec<bool>) -> Result<Self, GsaError> {
        if discrete.len() != self.inputs.n_cols() {
            return Err(GsaError::Shape(format!("{} flags for {} inputs", discrete.len(), self.inputs.n_cols())));
        }
        self.discrete = discrete;
        Ok(self)
    }

    pub fn with_mask(mut self, valid: Vec<bool>) -> Result<Self, GsaError> {
        if valid.len() != self.inputs.n_rows() {
            return Err(GsaError::Shape(format!("mask of {} for {} rows", valid.len(), self.inputs.n_rows())));
        }
        self.valid = valid;
        Ok(self)
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.n_cols()
    }

    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Drops masked rows.
    pub fn compact(&self) -> Result<Self, GsaError> {
        let keep: Vec<usize> = (0..self.valid.len()).filter(|&i| self.valid[i]).collect();
        if keep.is_empty() {
            return Err(GsaError::Empty);
        }
        Ok(self.select_rows(&keep))
    }

    /// Rows `idx` in order; repeats allowed.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let m = self.output_dim;
        let mut outputs = Vec::with_capacity(idx.len() * m);
        for &i in idx {
            outputs.extend_from_slice(&self.outputs[i * m..(i + 1) * m]);
        }
        Self {
            inputs: self.inputs.select_rows(idx),
            groups: self.groups.clone(),
            discrete: self.discrete.clone(),
            outputs,
            output_dim: m,
            valid: idx.iter().map(|&i| self.valid[i]).collect(),
        }
    }

    /// Per-dimension standardized outputs (population sd); constant
    /// dimensions are only centered. Returns the trace of their covariance.
    pub(crate) fn standardized_outputs(&self) -> Result<(Vec<T>, T), GsaError> {
        let m = self.output_dim;
        let n = self.outputs.len() / m;
        if n == 0 {
            return Err(GsaError::Empty);
        }
        let nt = T::lit(n as f64);
        let mut out = self.outputs.clone();
        let mut trace = T::zero();
        for j in 0..m {
            let mean = (0..n).map(|i| out[i * m + j]).sum::<T>() / nt;
            let var = (0..n).map(|i| (out[i * m + j] - mean).powi(2)).sum::<T>() / nt;
            let sd = var.sqrt();
            let scale = mean.abs().max(T::one());
            let keep_scale = sd > T::lit(1e-12) * scale;
            for i in 0..n {
                let v = out[i * m + j] - mean;
                out[i * m + j] = if keep_scale { v / sd } else { T::zero() };
            }
            if keep_scale {
                trace = trace + (0..n).map(|i| out[i * m + j].powi(2)).sum::<T>() / nt;
            }
        }
        if !(trace > T::zero()) {
            return Err(GsaError::ZeroVariance);
        }
        Ok((out, trace))
    }
}
