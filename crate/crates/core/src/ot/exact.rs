use crate::ot::measure::{plan_cost, squared_euclidean_cost, DiscreteMeasure, TransportPlan};
use crate::ot::network_simplex::solve_transport;
use crate::ot::OtError;
use crate::scalar::Scalar;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer atom masses `(per_source, per_target, total)` when both measures are
/// uniform and the common refinement stays small enough for `i64` flows.
fn integer_masses(n_src: usize, n_dst: usize) -> Option<(i64, i64, i64)> {
    let l = (n_src / gcd(n_src, n_dst)).checked_mul(n_dst)?;
    if l > (1usize << 40) {
        return None;
    }
    Some(((l / n_src) as i64, (l / n_dst) as i64, l as i64))
}

/// Exact optimal transport between two measures under a caller-supplied
/// row-major ground cost matrix.
pub fn solve_exact_with_cost<T: Scalar>(
    source_weights: &[T],
    target_weights: &[T],
    cost: &[T],
) -> Result<TransportPlan<T>, OtError> {
    let (n, m) = (source_weights.len(), target_weights.len());
    if n == 0 || m == 0 {
        return Err(OtError::Empty);
    }
    if cost.len() != n * m {
        return Err(OtError::CostShape {
            got: cost.len(),
            expected: n * m,
        });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(OtError::NonFinite);
    }

    let uniform = |w: &[T]| w.iter().all(|&x| x == w[0]);
    let coupling: Vec<T> = match integer_masses(n, m) {
        Some((a, b, total)) if uniform(source_weights) && uniform(target_weights) => {
            let sol = solve_transport::<T, i64>(&vec![a; n], &vec![b; m], cost)?;
            let inv = T::one() / T::lit(total as f64);
            sol.flow.iter().map(|&f| T::lit(f as f64) * inv).collect()
        }
        _ => {
            let a: Vec<f64> = source_weights.iter().map(|w| w.to_f64_lossy()).collect();
            let mut b: Vec<f64> = target_weights.iter().map(|w| w.to_f64_lossy()).collect();
            // Push rounding residue into the largest target so totals agree exactly.
            let diff = a.iter().sum::<f64>() - b.iter().sum::<f64>();
            let jmax = (0..m).max_by(|&x, &y| b[x].total_cmp(&b[y])).unwrap_or(0);
            b[jmax] += diff;
            let sol = solve_transport::<T, f64>(&a, &b, cost)?;
            sol.flow.iter().map(|&f| T::lit(f.max(0.0))).collect()
        }
    };
    let total = plan_cost(&coupling, cost);
    Ok(TransportPlan {
        coupling,
        rows: n,
        cols: m,
        cost: total,
    })
}

/// Exact optimal transport with squared-Euclidean ground cost, solved by
/// network simplex on the bipartite transportation polytope.
pub fn solve_exact<T: Scalar>(
    source: &DiscreteMeasure<T>,
    target: &DiscreteMeasure<T>,
) -> Result<TransportPlan<T>, OtError> {
    let cost = squared_euclidean_cost(source, target)?;
    solve_exact_with_cost(source.weights(), target.weights(), &cost)
}

/// Exact optimal transport for one-dimensional measures. For a convex ground
/// cost on the line the monotone (north-west corner on sorted atoms) coupling
/// is optimal, so no LP is needed.
pub fn solve_exact_1d<T: Scalar>(
    source: &DiscreteMeasure<T>,
    target: &DiscreteMeasure<T>,
) -> Result<TransportPlan<T>, OtError> {
    if source.dim() != 1 || target.dim() != 1 {
        return Err(OtError::DimensionMismatch(source.dim(), target.dim()));
    }
    let (n, m) = (source.len(), target.len());
    let order = |x: &DiscreteMeasure<T>| {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&a, &b| {
            x.point(a)[0]
                .partial_cmp(&x.point(b)[0])
                .unwrap()
                .then(a.cmp(&b))
        });
        idx
    };
    let (si, ti) = (order(source), order(target));
    let mut coupling = vec![T::zero(); n * m];

    match integer_masses(n, m) {
        Some((a, b, total)) if source.is_uniform() && target.is_uniform() => {
            let inv = T::one() / T::lit(total as f64);
            let (mut i, mut j) = (0, 0);
            let (mut ra, mut rb) = (a, b);
            while i < n && j < m {
                let f = ra.min(rb);
                coupling[si[i] * m + ti[j]] = T::lit(f as f64) * inv;
                ra -= f;
                rb -= f;
                if ra == 0 {
                    i += 1;
                    ra = a;
                }
                if rb == 0 {
                    j += 1;
                    rb = b;
                }
            }
        }
        _ => {
            let (mut i, mut j) = (0, 0);
            let mut ra = source.weights()[si[0]];
            let mut rb = target.weights()[ti[0]];
            while i < n && j < m {
                let f = ra.min(rb);
                let cell = &mut coupling[si[i] * m + ti[j]];
                *cell = *cell + f;
                ra = ra - f;
                rb = rb - f;
                if ra <= rb {
                    i += 1;
                    if i < n {
                        ra = source.weights()[si[i]];
                    }
                } else {
                    j += 1;
                    if j < m {
                        rb = target.weights()[ti[j]];
                    }
                }
            }
        }
    }

    let mut cost = T::zero();
    for (k, &p) in coupling.iter().enumerate() {
        if p > T::zero() {
            let d = source.point(k / m)[0] - target.point(k % m)[0];
            cost = cost + p * d * d;
        }
    }
    Ok(TransportPlan {
        coupling,
        rows: n,
        cols: m,
        cost,
    })
}
