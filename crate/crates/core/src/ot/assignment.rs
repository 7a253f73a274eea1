use crate::ot::network_simplex::solve_transport;
use crate::ot::OtError;
use crate::scalar::{sq_dist, Scalar};

/// Capacity-constrained assignment of points to centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedAssignment<T> {
    /// `assignment[i]` is the centroid index of point `i`.
    pub assignment: Vec<usize>,
    /// Sum of squared distances between points and their centroids.
    pub cost: T,
}

impl<T> BalancedAssignment<T> {
    pub fn members(&self, centroid: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == centroid)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Assigns every point to a centroid so that each centroid receives exactly
/// `capacity` points and the total squared distance is minimal.
///
/// The uniform-marginal transportation LP has integral vertices, so the
/// network simplex basis solution is a pure assignment.
pub fn solve_balanced_assignment<T: Scalar, P: AsRef<[T]>, Q: AsRef<[T]>>(
    points: &[P],
    centroids: &[Q],
    capacity: usize,
) -> Result<BalancedAssignment<T>, OtError> {
    let (n, k) = (points.len(), centroids.len());
    if k == 0 || capacity == 0 || n != capacity * k {
        return Err(OtError::Cardinality {
            points: n,
            centroids: k,
            capacity,
        });
    }
    let dim = centroids[0].as_ref().len();
    for p in points.iter().map(AsRef::as_ref).chain(centroids.iter().map(AsRef::as_ref)) {
        if p.len() != dim {
            return Err(OtError::DimensionMismatch(dim, p.len()));
        }
    }
    let mut cost = Vec::with_capacity(n * k);
    for p in points {
        cost.extend(centroids.iter().map(|c| sq_dist(p.as_ref(), c.as_ref())));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(OtError::NonFinite);
    }

    let sol = solve_transport::<T, i64>(&vec![1; n], &vec![capacity as i64; k], &cost)?;
    let mut assignment = vec![usize::MAX; n];
    let mut total = T::zero();
    for i in 0..n {
        let row = &sol.flow[i * k..(i + 1) * k];
        let j = row
            .iter()
            .position(|&f| f == 1)
            .expect("integral assignment from network simplex");
        assignment[i] = j;
        total = total + cost[i * k + j];
    }
    Ok(BalancedAssignment {
        assignment,
        cost: total,
    })
}
