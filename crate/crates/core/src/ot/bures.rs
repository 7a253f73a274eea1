use crate::ot::linalg::{matmul, symmetric_apply, symmetric_eigen, symmetrize, trace};
use crate::ot::measure::DiscreteMeasure;
use crate::ot::OtError;
use crate::scalar::Scalar;

/// Mean vector and covariance matrix (row-major) of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary<T> {
    pub mean: Vec<T>,
    pub covariance: Vec<T>,
}

impl<T: Scalar> GaussianSummary<T> {
    pub fn new(mean: Vec<T>, mut covariance: Vec<T>) -> Result<Self, OtError> {
        let d = mean.len();
        if covariance.len() != d * d {
            return Err(OtError::DimensionMismatch(d * d, covariance.len()));
        }
        symmetrize(&mut covariance, d);
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Sum of the marginal variances.
    pub fn total_variance(&self) -> T {
        trace(&self.covariance, self.dim())
    }
}

/// The two closed-form parts of the squared Gaussian Wasserstein distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WbTerms<T> {
    /// `||m - m'||^2`
    pub mean_term: T,
    /// `Tr(S + S' - 2 (S'^1/2 S S'^1/2)^1/2)`
    pub cov_term: T,
}

impl<T: Scalar> WbTerms<T> {
    pub fn total(&self) -> T {
        self.mean_term + self.cov_term
    }
}

fn psd_sqrt<T: Scalar>(a: &[T], n: usize) -> Result<Vec<T>, OtError> {
    let scale = a.iter().fold(T::one(), |m, x| m.max(x.abs()));
    let floor = -T::lit(1e-10) * scale;
    let (vals, _) = symmetric_eigen(a, n);
    if let Some(&bad) = vals.iter().find(|&&v| v < floor || !v.is_finite()) {
        return Err(OtError::NotPsd(bad.to_f64_lossy()));
    }
    Ok(symmetric_apply(a, n, |v| v.max(T::zero()).sqrt()))
}

/// Wasserstein-Bures semi-metric between two mean/covariance summaries.
pub fn wasserstein_bures<T: Scalar>(
    a: &GaussianSummary<T>,
    b: &GaussianSummary<T>,
) -> Result<WbTerms<T>, OtError> {
    let n = a.dim();
    if n != b.dim() {
        return Err(OtError::DimensionMismatch(n, b.dim()));
    }
    let mean_term = a
        .mean
        .iter()
        .zip(&b.mean)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>();

    let root_b = psd_sqrt(&b.covariance, n)?;
    // validates a as well
    psd_sqrt(&a.covariance, n)?;
    let mut middle = matmul(&matmul(&root_b, &a.covariance, n), &root_b, n);
    symmetrize(&mut middle, n);
    let (vals, _) = symmetric_eigen(&middle, n);
    let cross: T = vals.into_iter().map(|v| v.max(T::zero()).sqrt()).sum();

    let cov_term = trace(&a.covariance, n) + trace(&b.covariance, n) - T::lit(2.0) * cross;
    Ok(WbTerms {
        mean_term: mean_term.max(T::zero()),
        cov_term: cov_term.max(T::zero()),
    })
}

/// Weighted mean and population covariance of a discrete measure.
pub fn empirical_summary<T: Scalar>(measure: &DiscreteMeasure<T>) -> GaussianSummary<T> {
    let d = measure.dim();
    let total: T = measure.weights().iter().copied().sum();
    let mut mean = vec![T::zero(); d];
    for (i, &w) in measure.weights().iter().enumerate() {
        for (m, &x) in mean.iter_mut().zip(measure.point(i)) {
            *m = *m + w * x;
        }
    }
    for m in &mut mean {
        *m = *m / total;
    }
    let mut cov = vec![T::zero(); d * d];
    for (i, &w) in measure.weights().iter().enumerate() {
        let p = measure.point(i);
        for r in 0..d {
            let dr = p[r] - mean[r];
            for c in r..d {
                cov[r * d + c] = cov[r * d + c] + w * dr * (p[c] - mean[c]);
            }
        }
    }
    for r in 0..d {
        for c in r..d {
            let v = cov[r * d + c] / total;
            cov[r * d + c] = v;
            cov[c * d + r] = v;
        }
    }
    GaussianSummary {
        mean,
        covariance: cov,
    }
}
