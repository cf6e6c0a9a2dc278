//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as: minimize c'x subject to row constraints
//! (<=, >=, =) over non-negative variables. Rows are converted to equalities
//! with slack/surplus columns, phase 1 drives an artificial basis to zero,
//! phase 2 optimizes the real objective. Entering columns follow Dantzig's
//! rule with a Bland fallback after a stall, so the method terminates on
//! degenerate problems. Sized for the load-shedding programs of this
//! toolkit (a few hundred variables); callers treat the formulation as the
//! contract and the algorithm as replaceable.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintOp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    op: ConstraintOp,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex failed to converge within the iteration budget")]
    IterationLimit,
}

const EPS: f64 = 1e-9;

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn add_row(&mut self, coeffs: &[(usize, f64)], op: ConstraintOp, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.num_vars));
        self.rows.push(Row {
            coeffs: coeffs.to_vec(),
            op,
            rhs,
        });
    }

    /// Solve with Dantzig pricing and a Bland fallback; returns the optimal
    /// vertex (any one of them on ties) and the objective value recomputed
    /// from the original coefficients.
    pub fn solve(&self) -> Result<Solution, LpError> {
        Tableau::build(self)?.solve(self)
    }
}

struct Tableau {
    /// rows x (columns + rhs); structural, then slack, then artificial.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_structural: usize,
    n_slack: usize,
    n_artificial: usize,
}

impl Tableau {
    fn total_cols(&self) -> usize {
        self.n_structural + self.n_slack + self.n_artificial
    }

    fn build(lp: &LinearProgram) -> Result<Self, LpError> {
        let m = lp.rows.len();
        let n = lp.num_vars;
        let n_slack = lp.rows.iter().filter(|r| r.op != ConstraintOp::Eq).count();
        // every row gets an artificial column; redundant ones never enter
        let n_artificial = m;
        let width = n + n_slack + n_artificial + 1;

        let mut a = vec![vec![0.0; width]; m];
        let mut basis = vec![0usize; m];
        let mut slack_idx = 0;
        for (i, row) in lp.rows.iter().enumerate() {
            let flip = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            for &(j, v) in &row.coeffs {
                a[i][j] += flip * v;
            }
            a[i][width - 1] = flip * row.rhs;
            match row.op {
                ConstraintOp::Le => {
                    a[i][n + slack_idx] = flip;
                    slack_idx += 1;
                }
                ConstraintOp::Ge => {
                    a[i][n + slack_idx] = -flip;
                    slack_idx += 1;
                }
                ConstraintOp::Eq => {}
            }
            let art = n + n_slack + i;
            a[i][art] = 1.0;
            basis[i] = art;
        }
        Ok(Self {
            a,
            basis,
            n_structural: n,
            n_slack,
            n_artificial,
        })
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<Solution, LpError> {
        let cols = self.total_cols();

        // phase 1: minimize the sum of artificials
        let mut phase1_cost = vec![0.0; cols];
        for j in (self.n_structural + self.n_slack)..cols {
            phase1_cost[j] = 1.0;
        }
        let feas = self.run_simplex(&phase1_cost, true)?;
        if feas > 1e-7 {
            return Err(LpError::Infeasible);
        }
        self.evict_artificials();

        // phase 2: the real objective over structural + slack columns
        let mut cost = vec![0.0; cols];
        cost[..self.n_structural].copy_from_slice(&lp.objective);
        self.run_simplex(&cost, false)?;

        let mut x = vec![0.0; self.n_structural];
        let rhs_col = cols;
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_structural {
                x[b] = self.a[i][rhs_col].max(0.0);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(Solution { x, objective })
    }

    /// Pivot artificial variables out of the basis after phase 1. A row
    /// whose artificial cannot leave is linearly dependent; zeroing it out
    /// is safe because its rhs is zero at feasibility.
    fn evict_artificials(&mut self) {
        let art_start = self.n_structural + self.n_slack;
        for i in 0..self.basis.len() {
            if self.basis[i] < art_start {
                continue;
            }
            let pivot_col = (0..art_start).find(|&j| self.a[i][j].abs() > EPS);
            match pivot_col {
                Some(j) => self.pivot(i, j),
                None => {
                    for v in self.a[i].iter_mut() {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    /// Primal simplex on the current basis for the given cost vector,
    /// maintaining the reduced-cost row in the tableau. Returns the final
    /// objective value of that cost vector.
    fn run_simplex(&mut self, cost: &[f64], phase1: bool) -> Result<f64, LpError> {
        let m = self.a.len();
        let cols = self.total_cols();
        let rhs_col = cols;
        let art_start = self.n_structural + self.n_slack;
        let max_iters = 200 + 50 * (m + cols);
        let stall_limit = 4 * (m + cols) + 20;

        // reduced-cost row: cost_row[j] = c_j - c_B' B^-1 A_j, rhs slot
        // holds the negated objective; pivots update it like any other row
        let mut cost_row = vec![0.0; cols + 1];
        cost_row[..cols].copy_from_slice(&cost[..cols]);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (r, v) in cost_row.iter_mut().zip(&self.a[i]) {
                    *r -= cb * v;
                }
            }
        }

        let mut best_obj = f64::INFINITY;
        let mut stalled = 0usize;
        let mut bland = false;

        for _ in 0..max_iters {
            let allowed = |j: usize| phase1 || j < art_start;
            let entering = if bland {
                (0..cols).find(|&j| allowed(j) && cost_row[j] < -EPS)
            } else {
                (0..cols)
                    .filter(|&j| allowed(j) && cost_row[j] < -EPS)
                    .min_by(|&a, &b| cost_row[a].partial_cmp(&cost_row[b]).unwrap())
            };
            let Some(enter) = entering else {
                return Ok(-cost_row[rhs_col]);
            };

            // ratio test; ties resolved toward the lowest basis index
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                let aij = self.a[i][enter];
                if aij > EPS {
                    let ratio = self.a[i][rhs_col] / aij;
                    let better = ratio < best_ratio - EPS
                        || (ratio < best_ratio + EPS
                            && leave.map_or(true, |l| self.basis[i] < self.basis[l]));
                    if better {
                        best_ratio = ratio.max(0.0);
                        leave = Some(i);
                    }
                }
            }
            let Some(leave) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(leave, enter);
            eliminate_column(&mut cost_row, &self.a[leave], enter);

            let obj = -cost_row[rhs_col];
            if obj < best_obj - 1e-12 {
                best_obj = obj;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            }
        }
        Err(LpError::IterationLimit)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        debug_assert!(p.abs() > 1e-12);
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        let (pivot_row, rest) = take_row(&mut self.a, row);
        for (i, other) in rest {
            let _ = i;
            eliminate_column(other, pivot_row, col);
        }
        self.basis[row] = col;
    }
}

/// Subtract `factor * pivot_row` from `row` where `factor` clears `col`.
fn eliminate_column(row: &mut [f64], pivot_row: &[f64], col: usize) {
    let factor = row[col];
    if factor == 0.0 {
        return;
    }
    for (r, p) in row.iter_mut().zip(pivot_row) {
        *r -= factor * p;
    }
    row[col] = 0.0;
}

/// Split the matrix into the pivot row and an iterator over the others.
fn take_row(
    a: &mut [Vec<f64>],
    row: usize,
) -> (&[f64], impl Iterator<Item = (usize, &mut Vec<f64>)>) {
    let (before, rest) = a.split_at_mut(row);
    let (pivot, after) = rest.split_first_mut().expect("row in range");
    let iter = before.iter_mut().enumerate().chain(
        after
            .iter_mut()
            .enumerate()
            .map(move |(k, r)| (row + 1 + k, r)),
    );
    (pivot.as_slice(), iter)
}
