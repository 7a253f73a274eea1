use crate::ot::OtError;
use crate::scalar::{sq_dist, Scalar};

/// Weighted point cloud in `R^dim`, points stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    points: Vec<T>,
    weights: Vec<T>,
    dim: usize,
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn new(points: Vec<T>, dim: usize, weights: Vec<T>) -> Result<Self, OtError> {
        if dim == 0 {
            return Err(OtError::ZeroDimension);
        }
        if weights.is_empty() {
            return Err(OtError::Empty);
        }
        if points.len() != dim * weights.len() {
            return Err(OtError::ShapeMismatch {
                points: points.len(),
                dim,
                weights: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(OtError::InvalidWeight(w.to_f64_lossy()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(OtError::NonFinite);
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::mass_tol() {
            return Err(OtError::MassNotOne(total.to_f64_lossy()));
        }
        Ok(Self {
            points,
            weights,
            dim,
        })
    }

    /// Empirical measure putting mass `1/n` on every row.
    pub fn uniform(points: Vec<T>, dim: usize) -> Result<Self, OtError> {
        if dim == 0 {
            return Err(OtError::ZeroDimension);
        }
        let n = points.len() / dim;
        if n == 0 {
            return Err(OtError::Empty);
        }
        let w = T::one() / T::lit(n as f64);
        Self::new(points, dim, vec![w; n])
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, OtError> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(OtError::Empty)?;
        let mut flat = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(OtError::DimensionMismatch(dim, r.len()));
            }
            flat.extend_from_slice(r);
        }
        Self::uniform(flat, dim)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// True when every atom carries the same mass.
    pub fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|&w| w == w0)
    }
}

/// Dense squared-Euclidean ground cost between the atoms of two measures.
pub fn squared_euclidean_cost<T: Scalar>(
    source: &DiscreteMeasure<T>,
    target: &DiscreteMeasure<T>,
) -> Result<Vec<T>, OtError> {
    if source.dim() != target.dim() {
        return Err(OtError::DimensionMismatch(source.dim(), target.dim()));
    }
    let (n, m) = (source.len(), target.len());
    let mut cost = Vec::with_capacity(n * m);
    for i in 0..n {
        let p = source.point(i);
        cost.extend((0..m).map(|j| sq_dist(p, target.point(j))));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(OtError::NonFinite);
    }
    Ok(cost)
}

/// Optimal (or approximate) coupling between two discrete measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T> {
    /// Row-major `rows x cols` coupling matrix.
    pub coupling: Vec<T>,
    pub rows: usize,
    pub cols: usize,
    /// `sum_ij cost_ij * coupling_ij`, without any regularization term.
    pub cost: T,
}

impl<T: Scalar> TransportPlan<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.coupling[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.coupling
            .chunks(self.cols)
            .map(|r| r.iter().copied().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for row in self.coupling.chunks(self.cols) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o = *o + v;
            }
        }
        out
    }

    /// Largest absolute deviation of either marginal from the prescribed weights.
    pub fn marginal_error(&self, source: &[T], target: &[T]) -> T {
        let r = self
            .row_sums()
            .iter()
            .zip(source)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        let c = self
            .col_sums()
            .iter()
            .zip(target)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        r.max(c)
    }

    /// Non-zero entries as `(row, col, mass)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.coupling
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > T::zero())
            .map(move |(k, &v)| (k / self.cols, k % self.cols, v))
    }
}

pub(crate) fn plan_cost<T: Scalar>(coupling: &[T], cost: &[T]) -> T {
    coupling
        .iter()
        .zip(cost)
        .fold(T::zero(), |acc, (&p, &c)| acc + p * c)
}
