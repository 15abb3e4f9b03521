//! Revised simplex for `min c.x` subject to `A x = b`, `x >= 0`, with `b >= 0`.
//!
//! Columns are stored densely; the basis inverse is kept explicitly and rebuilt
//! from scratch every few dozen pivots. Dantzig pricing, switching to Bland's rule
//! after a run of degenerate pivots.

use crate::linalg::solve_dense;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `y` with `c_j - y.A_j >= 0` at the optimum.
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpStatus {
    Infeasible,
    Unbounded,
    IterationLimit,
}

const EPS: f64 = 1e-11;
const REFACTOR: usize = 40;

struct State<'a> {
    cols: &'a [Vec<f64>],
    m: usize,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    b: &'a [f64],
}

impl State<'_> {
    // columns `n..n+m` are the artificials `e_i`
    fn column(&self, j: usize) -> Vec<f64> {
        let n = self.cols.len();
        if j < n {
            self.cols[j].clone()
        } else {
            let mut e = vec![0.0; self.m];
            e[j - n] = 1.0;
            e
        }
    }

    fn refactor(&mut self) -> bool {
        let m = self.m;
        let bmat: Vec<Vec<f64>> = (0..m)
            .map(|i| self.basis.iter().map(|&j| self.column(j)[i]).collect())
            .collect();
        let mut inv = vec![vec![0.0; m]; m];
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            let Some(col) = solve_dense(bmat.clone(), e) else {
                return false;
            };
            for i in 0..m {
                inv[i][k] = col[i];
            }
        }
        self.binv = inv;
        self.xb = (0..m)
            .map(|i| (0..m).map(|k| self.binv[i][k] * self.b[k]).sum::<f64>().max(0.0))
            .collect();
        true
    }

    fn ftran(&self, col: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| (0..self.m).map(|k| self.binv[i][k] * col[k]).sum())
            .collect()
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        (0..self.m)
            .map(|k| (0..self.m).map(|i| cost(self.basis[i]) * self.binv[i][k]).sum())
            .collect()
    }

    fn pivot(&mut self, r: usize, enter: usize, d: &[f64]) {
        let m = self.m;
        let p = d[r];
        let theta = self.xb[r] / p;
        for i in 0..m {
            if i != r {
                self.xb[i] = (self.xb[i] - theta * d[i]).max(0.0);
            }
        }
        self.xb[r] = theta;
        let row_r: Vec<f64> = self.binv[r].iter().map(|v| v / p).collect();
        for i in 0..m {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for k in 0..m {
                    self.binv[i][k] -= f * row_r[k];
                }
            }
        }
        self.binv[r] = row_r;
        self.basis[r] = enter;
    }

    /// Runs simplex iterations for the given costs over the allowed columns.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, allowed: usize, max_iter: usize) -> Result<(), LpStatus> {
        let mut degenerate = 0usize;
        for it in 0..max_iter {
            if it % REFACTOR == REFACTOR - 1 && !self.refactor() {
                return Err(LpStatus::IterationLimit);
            }
            let y = self.duals(cost);
            let bland = degenerate > 30;
            let mut enter = None;
            let mut best = -EPS;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let col = self.column(j);
                let rc = cost(j) - y.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>();
                let scale = 1.0 + cost(j).abs();
                if rc < best * scale {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = rc / scale;
                }
            }
            let Some(enter) = enter else {
                return Ok(());
            };
            let d = self.ftran(&self.column(enter));
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if d[i] > 1e-12 {
                    let ratio = self.xb[i] / d[i];
                    let better = match leave {
                        None => true,
                        Some((l, r0)) => {
                            ratio < r0 - 1e-14 || (ratio <= r0 + 1e-14 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpStatus::Unbounded);
            };
            degenerate = if ratio <= 1e-14 { degenerate + 1 } else { 0 };
            self.pivot(r, enter, &d);
        }
        Err(LpStatus::IterationLimit)
    }
}

/// Two-phase revised simplex. `cols[j]` is column `j` of `A`.
pub(crate) fn solve(cols: &[Vec<f64>], cost: &[f64], b: &[f64]) -> Result<LpSolution, LpStatus> {
    let m = b.len();
    let n = cols.len();
    let mut st = State {
        cols,
        m,
        basis: (n..n + m).collect(),
        binv: (0..m)
            .map(|i| (0..m).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
            .collect(),
        xb: b.to_vec(),
        b,
    };
    let max_iter = 50 * (n + m) + 1000;
    // phase one: drive the artificials out
    let c1 = |j: usize| if j >= n { 1.0 } else { 0.0 };
    st.optimize(&c1, n + m, max_iter)?;
    let infeas: f64 = st
        .basis
        .iter()
        .zip(&st.xb)
        .filter(|(j, _)| **j >= n)
        .map(|(_, v)| v)
        .sum();
    let bscale = b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if infeas > 1e-9 * bscale {
        return Err(LpStatus::Infeasible);
    }
    // pivot zero-level artificials out where possible
    for r in 0..m {
        if st.basis[r] < n {
            continue;
        }
        let row = st.binv[r].clone();
        if let Some(j) = (0..n)
            .filter(|j| !st.basis.contains(j))
            .find(|&j| row.iter().zip(&cols[j]).map(|(a, b)| a * b).sum::<f64>().abs() > 1e-9)
        {
            let d = st.ftran(&cols[j]);
            st.pivot(r, j, &d);
        }
    }
    let c2 = |j: usize| if j < n { cost[j] } else { 0.0 };
    st.optimize(&c2, n, max_iter)?;
    st.refactor();
    let mut x = vec![0.0; n];
    for (i, &j) in st.basis.iter().enumerate() {
        if j < n {
            x[j] = st.xb[i];
        }
    }
    let objective = x.iter().zip(cost).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        duals: st.duals(&c2),
        x,
        objective,
    })
}
