//! Primal network simplex for the complete bipartite transportation problem.
//!
//! The spanning-tree bookkeeping (parent / thread / successor counts) follows
//! the classic LEMON layout: every node hangs off an artificial root through
//! an artificial arc, and pivots use block search over the real arcs.

use std::fmt::Debug;
use std::ops::{Add, Neg, Sub};

use crate::ot::OtError;
use crate::scalar::Scalar;

/// Flow amounts carried by the solver. Integer flows keep uniform empirical
/// measures exact; float flows handle arbitrary weights.
pub(crate) trait Flow:
    Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + Debug
{
    const ZERO: Self;
    const INF: Self;

    /// Whether a leftover amount on an artificial arc is real infeasibility
    /// rather than rounding, relative to the total shipped mass.
    fn significant(self, total: Self) -> bool;
}

impl Flow for i64 {
    const ZERO: Self = 0;
    const INF: Self = i64::MAX / 4;

    fn significant(self, _total: Self) -> bool {
        self > 0
    }
}

impl Flow for f64 {
    const ZERO: Self = 0.0;
    const INF: Self = f64::INFINITY;

    fn significant(self, total: Self) -> bool {
        self > 1e-12 * total.max(1.0)
    }
}

const STATE_UPPER: i8 = -1;
const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;

/// Optimal flow for a transportation instance.
#[derive(Debug, Clone)]
pub(crate) struct FlowSolution<F> {
    /// Row-major `n_src x n_dst` flow matrix.
    pub flow: Vec<F>,
}

struct Solver<'a, C, F> {
    node_num: usize,
    arc_num: usize,
    cost_matrix: &'a [C],

    // arc data (real arcs first, then one artificial arc per node)
    source: Vec<u32>,
    target: Vec<u32>,
    art_cost: Vec<C>,
    flow: Vec<F>,
    state: Vec<i8>,

    // spanning tree
    supply: Vec<F>,
    pi: Vec<C>,
    parent: Vec<isize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,

    // pivot
    block_size: usize,
    next_arc: usize,
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: F,
    eps: C,
}

impl<'a, C: Scalar, F: Flow> Solver<'a, C, F> {
    fn cost(&self, e: usize) -> C {
        if e < self.arc_num {
            self.cost_matrix[e]
        } else {
            self.art_cost[e - self.arc_num]
        }
    }

    fn new(supply_src: &[F], demand_dst: &[F], cost_matrix: &'a [C]) -> Self {
        let n_src = supply_src.len();
        let n_dst = demand_dst.len();
        let node_num = n_src + n_dst;
        let arc_num = n_src * n_dst;
        let all_arc = arc_num + node_num;
        let root = node_num;

        let mut source = Vec::with_capacity(all_arc);
        let mut target = Vec::with_capacity(all_arc);
        for i in 0..n_src {
            for j in 0..n_dst {
                source.push(i as u32);
                target.push((n_src + j) as u32);
            }
        }
        source.resize(all_arc, 0);
        target.resize(all_arc, 0);

        let max_cost = cost_matrix
            .iter()
            .copied()
            .fold(C::zero(), |a, b| a.max(b.abs()));
        let big = (max_cost + C::one()) * C::lit(node_num as f64);
        let eps = C::epsilon() * big * C::lit(8.0);

        let mut supply: Vec<F> = supply_src.to_vec();
        supply.extend(demand_dst.iter().map(|&d| -d));
        supply.push(F::ZERO);

        let mut s = Self {
            node_num,
            arc_num,
            cost_matrix,
            source,
            target,
            art_cost: vec![C::zero(); node_num],
            flow: vec![F::ZERO; all_arc],
            state: vec![STATE_LOWER; all_arc],
            supply,
            pi: vec![C::zero(); node_num + 1],
            parent: vec![-1; node_num + 1],
            pred: vec![usize::MAX; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: F::ZERO,
            eps,
        };

        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;

        for u in 0..node_num {
            let e = arc_num + u;
            s.parent[u] = root as isize;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = STATE_TREE;
            if s.supply[u] >= F::ZERO {
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = C::zero();
                s.source[e] = u as u32;
                s.target[e] = root as u32;
                s.flow[e] = s.supply[u];
                s.art_cost[u] = C::zero();
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = big;
                s.source[e] = root as u32;
                s.target[e] = u as u32;
                s.flow[e] = -s.supply[u];
                s.art_cost[u] = big;
            }
        }
        s
    }

    #[inline]
    fn reduced(&self, e: usize) -> C {
        let c = self.cost_matrix[e] + self.pi[self.source[e] as usize]
            - self.pi[self.target[e] as usize];
        if self.state[e] == STATE_LOWER {
            c
        } else {
            -c
        }
    }

    /// Block search pivot rule over the real arcs.
    fn find_entering_arc(&mut self) -> bool {
        let mut min = -self.eps;
        let mut found = false;
        let mut cnt = self.block_size;
        let m = self.arc_num;
        let start = self.next_arc;
        for k in 0..m {
            let e = if start + k < m { start + k } else { start + k - m };
            if self.state[e] != STATE_TREE {
                let c = self.reduced(e);
                if c < min {
                    min = c;
                    self.in_arc = e;
                    found = true;
                }
            }
            cnt -= 1;
            if cnt == 0 {
                if found {
                    self.next_arc = if e + 1 == m { 0 } else { e + 1 };
                    return true;
                }
                cnt = self.block_size;
            }
        }
        if found {
            self.next_arc = 0;
        }
        found
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc] as usize;
        let mut v = self.target[self.in_arc] as usize;
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u] as usize;
            } else {
                v = self.parent[v] as usize;
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let (first, second) = if self.state[self.in_arc] == STATE_LOWER {
            (
                self.source[self.in_arc] as usize,
                self.target[self.in_arc] as usize,
            )
        } else {
            (
                self.target[self.in_arc] as usize,
                self.source[self.in_arc] as usize,
            )
        };
        self.delta = F::INF;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_DOWN {
                F::INF
            } else {
                self.flow[e]
            };
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u] as usize;
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_UP {
                F::INF
            } else {
                self.flow[e]
            };
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u] as usize;
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self) {
        let in_arc = self.in_arc;
        if self.delta > F::ZERO {
            let val = if self.state[in_arc] == STATE_LOWER {
                self.delta
            } else {
                -self.delta
            };
            self.flow[in_arc] = self.flow[in_arc] + val;
            let mut u = self.source[in_arc] as usize;
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] = if self.pred_dir[u] == DIR_UP {
                    self.flow[e] - val
                } else {
                    self.flow[e] + val
                };
                u = self.parent[u] as usize;
            }
            let mut u = self.target[in_arc] as usize;
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] = if self.pred_dir[u] == DIR_UP {
                    self.flow[e] + val
                } else {
                    self.flow[e] - val
                };
                u = self.parent[u] as usize;
            }
        }
        self.state[in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        self.state[out] = if self.flow[out] == F::ZERO {
            STATE_LOWER
        } else {
            STATE_UPPER
        };
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;

        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out] as usize;

        let mut u = self.last_succ[u_in];
        let mut right = self.thread[u];
        let last = if old_rev_thread == v_in {
            self.thread[old_last_succ]
        } else {
            self.thread[v_in]
        };

        // Re-hang the stem between u_in and u_out, reversing parent links.
        let mut stem = u_in;
        let mut par_stem = v_in;
        self.thread[v_in] = u_in;
        self.dirty_revs.clear();
        self.dirty_revs.push(v_in);
        while stem != u_out {
            let new_stem = self.parent[stem] as usize;
            self.thread[u] = new_stem;
            self.dirty_revs.push(u);

            let w = self.rev_thread[stem];
            self.thread[w] = right;
            self.rev_thread[right] = w;

            self.parent[stem] = par_stem as isize;
            par_stem = stem;
            stem = new_stem;

            u = if self.last_succ[stem] == self.last_succ[par_stem] {
                self.rev_thread[par_stem]
            } else {
                self.last_succ[stem]
            };
            right = self.thread[u];
        }
        self.parent[u_out] = par_stem as isize;
        self.thread[u] = last;
        self.rev_thread[last] = u;
        self.last_succ[u_out] = u;

        if old_rev_thread != v_in {
            self.thread[old_rev_thread] = right;
            self.rev_thread[right] = old_rev_thread;
        }
        for k in 0..self.dirty_revs.len() {
            let w = self.dirty_revs[k];
            let t = self.thread[w];
            self.rev_thread[t] = w;
        }

        let mut tmp_sc: isize = 0;
        let tmp_ls = self.last_succ[u_out];
        let mut u = u_out;
        while u != u_in {
            let w = self.parent[u] as usize;
            self.pred[u] = self.pred[w];
            self.pred_dir[u] = -self.pred_dir[w];
            tmp_sc += self.succ_num[u] as isize - self.succ_num[w] as isize;
            self.succ_num[u] = tmp_sc as usize;
            self.last_succ[w] = tmp_ls;
            u = w;
        }
        self.pred[u_in] = in_arc;
        self.pred_dir[u_in] = if u_in == self.source[in_arc] as usize {
            DIR_UP
        } else {
            DIR_DOWN
        };
        self.succ_num[u_in] = old_succ_num;

        let (up_limit_in, up_limit_out): (isize, isize) = if self.last_succ[join] == v_in {
            (-1, join as isize)
        } else {
            (join as isize, -1)
        };
        let ls_out = self.last_succ[u_out];
        let mut u = v_in as isize;
        while u != up_limit_in && self.last_succ[u as usize] == v_in {
            self.last_succ[u as usize] = ls_out;
            u = self.parent[u as usize];
        }
        let replacement = if join != old_rev_thread && v_in != old_rev_thread {
            old_rev_thread
        } else {
            ls_out
        };
        let mut u = v_out as isize;
        while u != up_limit_out && self.last_succ[u as usize] == old_last_succ {
            self.last_succ[u as usize] = replacement;
            u = self.parent[u as usize];
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u] as usize;
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u] as usize;
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let c = self.cost(self.in_arc);
        let dir = C::lit(self.pred_dir[u_in] as f64);
        let sigma = self.pi[self.v_in] - self.pi[u_in] - dir * c;
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] = self.pi[u] + sigma;
            u = self.thread[u];
        }
    }

    #[cfg(test)]
    fn check_tree(&self, pivot: usize) {
        let root = self.node_num;
        // thread visits every node once
        let mut seen = vec![false; root + 1];
        let mut u = root;
        for _ in 0..=root {
            assert!(!seen[u], "pivot {pivot}: thread revisits {u}");
            seen[u] = true;
            assert_eq!(self.rev_thread[self.thread[u]], u, "pivot {pivot}: rev_thread at {u}");
            u = self.thread[u];
        }
        assert_eq!(u, root, "pivot {pivot}: thread not closed");
        for v in 0..root {
            let e = self.pred[v];
            let p = self.parent[v] as usize;
            let (s, t) = (self.source[e] as usize, self.target[e] as usize);
            if self.pred_dir[v] == DIR_UP {
                assert!(s == v && t == p, "pivot {pivot}: pred dir up at {v}");
            } else {
                assert!(t == v && s == p, "pivot {pivot}: pred dir down at {v}");
            }
            let rc = self.cost(e) + self.pi[s] - self.pi[t];
            assert!(rc.abs().to_f64_lossy() < 1e-6, "pivot {pivot}: tree arc reduced cost {rc:?} at {v}");
            assert_eq!(self.state[e], STATE_TREE, "pivot {pivot}: state at {v}");
        }
        // succ_num and last_succ agree with the thread order
        for v in 0..=root {
            let mut k = 1;
            let mut w = v;
            while k < self.succ_num[v] {
                w = self.thread[w];
                k += 1;
            }
            assert_eq!(w, self.last_succ[v], "pivot {pivot}: last_succ of {v}");
        }
        let tree_arcs = self.state.iter().filter(|&&s| s == STATE_TREE).count();
        assert_eq!(tree_arcs, root, "pivot {pivot}: tree arc count");
    }

    fn run(mut self, max_pivots: usize) -> Result<FlowSolution<F>, OtError> {
        let mut pivots = 0usize;
        while self.find_entering_arc() {
            if pivots >= max_pivots {
                return Err(OtError::PivotLimit(max_pivots));
            }
            self.find_join_node();
            if !self.find_leaving_arc() || self.delta >= F::INF {
                return Err(OtError::Unbounded);
            }
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
            #[cfg(test)]
            self.check_tree(pivots);
            pivots += 1;
        }

        // With balanced totals and a large enough artificial cost, every
        // artificial arc is empty at the optimum.
        let total = self.supply[..self.node_num]
            .iter()
            .fold(F::ZERO, |acc, &s| if s > F::ZERO { acc + s } else { acc });
        if (self.arc_num..self.arc_num + self.node_num).any(|e| self.flow[e].significant(total)) {
            return Err(OtError::Infeasible);
        }

        let mut flow = std::mem::take(&mut self.flow);
        flow.truncate(self.arc_num);
        Ok(FlowSolution { flow })
    }
}

/// Solves `min <cost, flow>` subject to row sums `supply` and column sums
/// `demand`. The two totals must agree exactly.
pub(crate) fn solve_transport<C: Scalar, F: Flow>(
    supply: &[F],
    demand: &[F],
    cost: &[C],
) -> Result<FlowSolution<F>, OtError> {
    assert_eq!(cost.len(), supply.len() * demand.len());
    let node_num = supply.len() + demand.len();
    let max_pivots = 1000 * node_num.max(1) + 10 * cost.len();
    Solver::new(supply, demand, cost).run(max_pivots)
}
