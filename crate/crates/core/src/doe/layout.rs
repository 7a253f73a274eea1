use serde::{Deserialize, Serialize};

use crate::dist::sobol_points;
use crate::doe::{DoeError, SampleMatrix};
use crate::ot::solve_balanced_assignment;
use crate::scalar::sq_dist;

/// Equal-size clusters of run indices, each stored in execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentLayout {
    pub seed: u64,
    pub clusters: Vec<Vec<usize>>,
    pub centroids: Vec<Vec<f64>>,
    /// Total squared quantile-space distance of the assignment.
    pub assignment_cost: f64,
}

impl ExperimentLayout {
    pub fn n_runs(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// `(cluster, position)` of every run index.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut pos = vec![(usize::MAX, usize::MAX); self.n_runs()];
        for (c, members) in self.clusters.iter().enumerate() {
            for (k, &r) in members.iter().enumerate() {
                if r < pos.len() {
                    pos[r] = (c, k);
                }
            }
        }
        pos
    }

    /// Checks that the clusters partition `0..n` into equal parts.
    pub fn validate(&self, n: usize) -> Result<(), DoeError> {
        let size = self.clusters.first().map_or(0, Vec::len);
        if self.clusters.iter().any(|c| c.len() != size) {
            return Err(DoeError::Layout("clusters have unequal sizes".into()));
        }
        let mut seen = vec![false; n];
        for &r in self.clusters.iter().flatten() {
            if r >= n || std::mem::replace(&mut seen[r], true) {
                return Err(DoeError::Layout(format!("run {r} missing from range or repeated")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(DoeError::Layout("layout does not cover every run".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DoeError> {
        serde_json::from_str(text).map_err(|e| DoeError::Layout(e.to_string()))
    }
}

/// Greedy nearest-neighbour tour through `rows`, starting at the row nearest
/// to `anchor`. Ties go to the lowest index.
pub fn order_cluster<R: AsRef<[f64]>>(rows: &[R], anchor: &[f64]) -> Vec<usize> {
    let n = rows.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = anchor.to_vec();
    for _ in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in rows.iter().enumerate() {
            if visited[i] {
                continue;
            }
            let d = sq_dist(r.as_ref(), &current);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("unvisited row remains");
        visited[i] = true;
        order.push(i);
        current = rows[i].as_ref().to_vec();
    }
    order
}

/// Splits the rows of `samples` into `n_clusters` equal clusters by a
/// balanced assignment to Sobol centroids in quantile space, then orders each
/// cluster from the all-0.5 point.
pub fn cluster_balanced(
    samples: &SampleMatrix,
    n_clusters: usize,
    seed: u64,
) -> Result<ExperimentLayout, DoeError> {
    let n = samples.n_rows();
    if n_clusters == 0 || n % n_clusters != 0 {
        return Err(DoeError::Divisibility {
            n,
            clusters: n_clusters,
        });
    }
    let p = samples.n_cols();
    let centroids = sobol_points(n_clusters, p)?;
    let rows: Vec<&[f64]> = (0..n).map(|i| samples.quantile_row(i)).collect();
    let assign = solve_balanced_assignment(&rows, &centroids, n / n_clusters)?;
    let anchor = vec![0.5; p];
    let clusters = (0..n_clusters)
        .map(|c| {
            let members = assign.members(c);
            let member_rows: Vec<&[f64]> = members.iter().map(|&i| rows[i]).collect();
            order_cluster(&member_rows, &anchor)
                .into_iter()
                .map(|k| members[k])
                .collect()
        })
        .collect();
    Ok(ExperimentLayout {
        seed,
        clusters,
        centroids,
        assignment_cost: assign.cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_order() {
        let rows = [[0.1], [0.5], [0.9]];
        // 0.1 and 0.9 tie from 0.5; the lower index wins
        assert_eq!(order_cluster(&rows, &[0.5]), vec![1, 0, 2]);
    }

    #[test]
    fn single_point() {
        assert_eq!(order_cluster(&[[0.3, 0.2]], &[0.5, 0.5]), vec![0]);
    }

    #[test]
    fn coincident_pairs_stay_together() {
        // Sobol centroids for two clusters in 1D are 0.5 and 0.75
        let q = vec![0.5, 0.75, 0.5, 0.75];
        let m = SampleMatrix::new(vec!["x".into()], q.clone(), q).unwrap();
        let layout = cluster_balanced(&m, 2, 0).unwrap();
        assert_eq!(layout.assignment_cost, 0.0);
        let mut c: Vec<Vec<usize>> = layout.clusters.clone();
        for v in &mut c {
            v.sort_unstable();
        }
        c.sort();
        assert_eq!(c, vec![vec![0, 2], vec![1, 3]]);
        layout.validate(4).unwrap();
    }

    #[test]
    fn divisibility() {
        let m = SampleMatrix::new(vec!["x".into()], vec![0.1; 5], vec![0.1; 5]).unwrap();
        assert!(matches!(cluster_balanced(&m, 2, 0), Err(DoeError::Divisibility { .. })));
    }

    #[test]
    fn json_round_trip() {
        let q = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let m = SampleMatrix::new(vec!["x".into()], q.clone(), q).unwrap();
        let l = cluster_balanced(&m, 3, 5).unwrap();
        assert_eq!(ExperimentLayout::from_json(&l.to_json()).unwrap(), l);
        assert!(l.validate(6).is_ok());
        assert!(l.validate(7).is_err());
    }
}
