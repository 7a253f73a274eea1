use crate::ot::measure::{plan_cost, squared_euclidean_cost, DiscreteMeasure, TransportPlan};
use crate::ot::OtError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct SinkhornOptions<T> {
    pub epsilon: T,
    pub max_iter: usize,
    /// Stop once the L1 row-marginal violation drops below this value.
    pub tol: T,
    /// Anneal epsilon down from the largest ground cost, warm-starting the
    /// potentials. Only iterations at the target epsilon are traced.
    pub scaling: bool,
}

impl<T: Scalar> SinkhornOptions<T> {
    pub fn new(epsilon: T) -> Self {
        Self {
            epsilon,
            max_iter: 100_000,
            tol: T::lit(1e-9),
            scaling: true,
        }
    }
}

fn log_sum_exp<T: Scalar>(vals: impl Iterator<Item = T> + Clone) -> T {
    let mx = vals.clone().fold(T::neg_infinity(), T::max);
    if mx == T::neg_infinity() {
        return mx;
    }
    mx + vals.map(|v| (v - mx).exp()).sum::<T>().ln()
}

/// Entropic optimal transport, log-domain updates. The returned cost is the
/// transport cost of the entropic plan, without the entropy term.
pub fn solve_sinkhorn<T: Scalar>(
    source: &DiscreteMeasure<T>,
    target: &DiscreteMeasure<T>,
    opts: SinkhornOptions<T>,
) -> Result<TransportPlan<T>, OtError> {
    solve_sinkhorn_traced(source, target, opts).map(|(plan, _)| plan)
}

/// Same as [`solve_sinkhorn`], also returning the L1 row-marginal violation
/// after each full (row + column) iteration.
pub fn solve_sinkhorn_traced<T: Scalar>(
    source: &DiscreteMeasure<T>,
    target: &DiscreteMeasure<T>,
    opts: SinkhornOptions<T>,
) -> Result<(TransportPlan<T>, Vec<T>), OtError> {
    if !(opts.epsilon > T::zero()) || !opts.epsilon.is_finite() {
        return Err(OtError::BadEpsilon(opts.epsilon.to_f64_lossy()));
    }
    let cost = squared_euclidean_cost(source, target)?;
    let (n, m) = (source.len(), target.len());
    let eps = opts.epsilon;
    let log_a: Vec<T> = source.weights().iter().map(|w| w.ln()).collect();
    let log_b: Vec<T> = target.weights().iter().map(|w| w.ln()).collect();
    let mut f = vec![T::zero(); n];
    let mut g = vec![T::zero(); m];
    let mut trace = Vec::new();

    let row_violation_at = |f: &[T], g: &[T], eps: T| -> T {
        (0..n)
            .map(|i| {
                let row = &cost[i * m..(i + 1) * m];
                let mass: T = (0..m)
                    .map(|j| ((f[i] + g[j] - row[j]) / eps).exp())
                    .sum();
                (mass - source.weights()[i]).abs()
            })
            .sum()
    };

    let sweep = |f: &mut [T], g: &mut [T], eps: T| {
        for i in 0..n {
            let row = &cost[i * m..(i + 1) * m];
            let lse = log_sum_exp((0..m).map(|j| (g[j] - row[j]) / eps));
            f[i] = eps * (log_a[i] - lse);
        }
        for j in 0..m {
            let lse = log_sum_exp((0..n).map(|i| (f[i] - cost[i * m + j]) / eps));
            g[j] = eps * (log_b[j] - lse);
        }
    };

    let mut budget = opts.max_iter;
    if opts.scaling {
        let max_cost = cost.iter().copied().fold(T::zero(), T::max);
        let stage_tol = opts.tol.max(T::lit(1e-4));
        let mut stage_eps = max_cost;
        while stage_eps * T::lit(0.5) > opts.epsilon && budget > 0 {
            stage_eps = stage_eps * T::lit(0.5);
            while budget > 0 {
                sweep(&mut f, &mut g, stage_eps);
                budget -= 1;
                let err = row_violation_at(&f, &g, stage_eps);
                if !err.is_finite() || err <= stage_tol {
                    break;
                }
            }
        }
    }

    let mut converged = false;
    for _ in 0..budget {
        sweep(&mut f, &mut g, eps);
        let err = row_violation_at(&f, &g, eps);
        trace.push(err);
        if !err.is_finite() {
            break;
        }
        if err <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OtError::NotConverged {
            iterations: trace.len(),
            error: trace.last().map_or(f64::NAN, |e| e.to_f64_lossy()),
        });
    }

    let mut coupling = vec![T::zero(); n * m];
    for i in 0..n {
        for j in 0..m {
            coupling[i * m + j] = ((f[i] + g[j] - cost[i * m + j]) / eps).exp();
        }
    }
    let total = plan_cost(&coupling, &cost);
    Ok((
        TransportPlan {
            coupling,
            rows: n,
            cols: m,
            cost: total,
        },
        trace,
    ))
}
