//! Bounded-variable revised simplex for the calibration program
//!
//! ```text
//!     max  dᵀm   s.t.  A m = rhs,  0 ≤ m ≤ 1
//! ```
//!
//! with `n` equality rows and `J ≥ n` box-constrained columns. The solver
//! returns the primal vertex together with the simplex multipliers of the
//! equality rows; those multipliers are the critical value function
//! coefficients.
//!
//! Phase one starts from a crash point (every column at a bound) and drives
//! signed artificial columns to zero. Phase two keeps any artificial that is
//! still basic fixed at zero. Entering and leaving choices follow Bland's
//! smallest-index rule, so the method terminates on degenerate problems.

use crate::error::{Error, Result};

/// Box-constrained LP with equality rows. The constraint matrix is stored
/// column-major: column `j` is `matrix[j * rows .. (j + 1) * rows]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

impl LpProblem {
    /// Builds a problem from row-major rows of `A`.
    pub fn from_rows(objective: Vec<f64>, rows: &[Vec<f64>], rhs: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let j = objective.len();
        if rows.iter().any(|r| r.len() != j) {
            return Err(Error::InvalidInput("constraint rows must all have length J".into()));
        }
        let mut matrix = vec![0.0; n * j];
        for (i, row) in rows.iter().enumerate() {
            for (col, &v) in row.iter().enumerate() {
                matrix[col * n + i] = v;
            }
        }
        Self::from_columns(objective, matrix, rhs)
    }

    /// Builds a problem from a column-major matrix of size `rhs.len() × objective.len()`.
    pub fn from_columns(objective: Vec<f64>, matrix: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = rhs.len();
        let j = objective.len();
        if n == 0 {
            return Err(Error::InvalidInput("LP needs at least one equality row".into()));
        }
        if j < n {
            return Err(Error::InvalidInput(format!("LP needs J >= n (J={j}, n={n})")));
        }
        if matrix.len() != n * j {
            return Err(Error::InvalidInput("constraint matrix has the wrong size".into()));
        }
        if objective.iter().chain(&matrix).chain(&rhs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("LP data must be finite".into()));
        }
        Ok(Self { objective, matrix, rhs })
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.rows();
        &self.matrix[j * n..(j + 1) * n]
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[col * self.rows() + row]
    }

    /// `A m` for a candidate primal point.
    pub fn apply(&self, m: &[f64]) -> Vec<f64> {
        let n = self.rows();
        let mut out = vec![0.0; n];
        for (j, &mj) in m.iter().enumerate() {
            if mj != 0.0 {
                for (o, a) in out.iter_mut().zip(self.column(j)) {
                    *o += a * mj;
                }
            }
        }
        out
    }

    /// Reduced costs `d_j − (Aᵀk)_j`.
    pub fn reduced_costs(&self, k: &[f64]) -> Vec<f64> {
        (0..self.cols())
            .map(|j| self.objective[j] - dot(self.column(j), k))
            .collect()
    }

    /// Dual objective `rhsᵀk + Σ_j max(d_j − (Aᵀk)_j, 0)`; an upper bound on
    /// the primal optimum for every `k`.
    pub fn dual_objective(&self, k: &[f64]) -> f64 {
        dot(&self.rhs, k) + self.reduced_costs(k).iter().map(|r| r.max(0.0)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    /// Optimal, but the vertex is degenerate or has ties in the reduced
    /// costs, so the reported multipliers need not be the only optimal ones.
    DegenerateWarning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub m: Vec<f64>,
    pub k: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    /// Start with the columns carrying the largest objective at their upper
    /// bound; otherwise every column starts at zero.
    pub crash: bool,
    pub max_iterations: Option<usize>,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            dual_tol: 1e-9,
            pivot_tol: 1e-11,
            crash: true,
            max_iterations: None,
            refactor_every: 64,
        }
    }
}

pub fn solve_boxed_lp(problem: &LpProblem) -> Result<LpSolution> {
    solve_boxed_lp_with(problem, &SimplexOptions::default())
}

pub fn solve_boxed_lp_with(problem: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    Simplex::new(problem, opts).run(None)
}

/// Like [`solve_boxed_lp_with`], but the starting point puts column `j` at
/// its upper bound exactly when it prices out against the guessed row duals
/// `k_hint`. A hint from a smaller draw of the same problem usually leaves
/// only a few pivots to do.
pub fn solve_boxed_lp_warm(problem: &LpProblem, opts: &SimplexOptions, k_hint: &[f64]) -> Result<LpSolution> {
    if k_hint.len() != problem.rows() || k_hint.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("dual hint must be finite with one entry per row".into()));
    }
    Simplex::new(problem, opts).run(Some(k_hint))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
}

struct Simplex<'a> {
    p: &'a LpProblem,
    opts: SimplexOptions,
    n: usize,
    j: usize,
    /// Sign of each artificial column (`±e_i`).
    art_sign: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    xb: Vec<f64>,
    /// Row-major `n × n` basis inverse.
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem, opts: &SimplexOptions) -> Self {
        let n = p.rows();
        let j = p.cols();
        let max_iterations = opts.max_iterations.unwrap_or(50 * (n + j) + 10_000);
        Self {
            p,
            opts: *opts,
            n,
            j,
            art_sign: vec![1.0; n],
            upper: vec![1.0; j + n],
            cost: vec![0.0; j + n],
            state: vec![VarState::Lower; j + n],
            basis: Vec::with_capacity(n),
            xb: vec![0.0; n],
            binv: vec![0.0; n * n],
            since_refactor: 0,
            iterations: 0,
            max_iterations,
        }
    }

    fn column_dot(&self, var: usize, y: &[f64]) -> f64 {
        if var < self.j {
            dot(self.p.column(var), y)
        } else {
            let i = var - self.j;
            self.art_sign[i] * y[i]
        }
    }

    /// `B⁻¹ a_var`.
    fn ftran(&self, var: usize) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n];
        if var < self.j {
            let col = self.p.column(var);
            for (r, wr) in w.iter_mut().enumerate() {
                *wr = dot(&self.binv[r * n..(r + 1) * n], col);
            }
        } else {
            let i = var - self.j;
            for (r, wr) in w.iter_mut().enumerate() {
                *wr = self.binv[r * n + i] * self.art_sign[i];
            }
        }
        w
    }

    fn value_of(&self, var: usize) -> f64 {
        match self.state[var] {
            VarState::Basic(r) => self.xb[r],
            VarState::Lower => 0.0,
            VarState::Upper => self.upper[var],
        }
    }

    fn crash(&mut self, hint: Option<&[f64]>) {
        let j = self.j;
        if let Some(k) = hint {
            for col in 0..j {
                if self.p.objective[col] > dot(self.p.column(col), k) {
                    self.state[col] = VarState::Upper;
                }
            }
        } else if self.opts.crash {
            // keep the top rhs-share of columns by objective at their upper bound
            let share = self.p.rhs().iter().sum::<f64>() / self.n as f64;
            let count = ((share * j as f64).floor() as usize).min(j);
            let mut order: Vec<usize> = (0..j).collect();
            order.sort_by(|&a, &b| {
                self.p.objective[b]
                    .partial_cmp(&self.p.objective[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            for &col in order.iter().take(count) {
                self.state[col] = VarState::Upper;
            }
        }
        let mut residual = self.p.rhs().to_vec();
        for col in 0..j {
            if self.state[col] == VarState::Upper {
                for (r, a) in residual.iter_mut().zip(self.p.column(col)) {
                    *r -= a;
                }
            }
        }
        self.basis.clear();
        for (i, &res) in residual.iter().enumerate() {
            self.art_sign[i] = if res < 0.0 { -1.0 } else { 1.0 };
            let var = j + i;
            self.upper[var] = f64::INFINITY;
            self.state[var] = VarState::Basic(i);
            self.basis.push(var);
            self.xb[i] = res.abs();
        }
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            self.binv[i * self.n + i] = self.art_sign[i];
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        // dense Gauss-Jordan with partial pivoting on [B | I]
        let mut b = vec![0.0; n * n];
        for (pos, &var) in self.basis.iter().enumerate() {
            if var < self.j {
                for (r, &a) in self.p.column(var).iter().enumerate() {
                    b[r * n + pos] = a;
                }
            } else {
                let i = var - self.j;
                b[i * n + pos] = self.art_sign[i];
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&a, &c| b[a * n + col].abs().partial_cmp(&b[c * n + col].abs()).unwrap())
                .unwrap();
            let pv = b[piv * n + col];
            if pv.abs() < 1e-14 {
                return Err(Error::NumericalFailure("singular basis during refactorization".into()));
            }
            if piv != col {
                for k in 0..n {
                    b.swap(piv * n + k, col * n + k);
                    inv.swap(piv * n + k, col * n + k);
                }
            }
            for k in 0..n {
                b[col * n + k] /= pv;
                inv[col * n + k] /= pv;
            }
            for r in 0..n {
                if r != col {
                    let f = b[r * n + col];
                    if f != 0.0 {
                        for k in 0..n {
                            b[r * n + k] -= f * b[col * n + k];
                            inv[r * n + k] -= f * inv[col * n + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        // recompute basic values from the nonbasic ones
        let mut rhs = self.p.rhs().to_vec();
        for var in 0..self.j + self.n {
            if let VarState::Upper = self.state[var] {
                let u = self.upper[var];
                if var < self.j {
                    for (r, a) in rhs.iter_mut().zip(self.p.column(var)) {
                        *r -= a * u;
                    }
                } else {
                    let i = var - self.j;
                    rhs[i] -= self.art_sign[i] * u;
                }
            }
        }
        for r in 0..n {
            self.xb[r] = dot(&self.binv[r * n..(r + 1) * n], &rhs);
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn duals(&self) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for (r, &var) in self.basis.iter().enumerate() {
            let c = self.cost[var];
            if c != 0.0 {
                for (yk, bk) in y.iter_mut().zip(&self.binv[r * n..(r + 1) * n]) {
                    *yk += c * bk;
                }
            }
        }
        y
    }

    fn pivot_binv(&mut self, row: usize, w: &[f64]) {
        let n = self.n;
        let wr = w[row];
        for k in 0..n {
            self.binv[row * n + k] /= wr;
        }
        for r in 0..n {
            if r != row && w[r] != 0.0 {
                let f = w[r];
                for k in 0..n {
                    self.binv[r * n + k] -= f * self.binv[row * n + k];
                }
            }
        }
    }

    /// Runs simplex iterations for the current costs until no column prices out.
    fn iterate(&mut self) -> Result<()> {
        let total = self.j + self.n;
        let cmax = self.cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let dual_tol = self.opts.dual_tol * cmax.max(1.0);
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {} iterations",
                    self.max_iterations
                )));
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let y = self.duals();

            // Bland: smallest eligible index enters
            let mut entering = None;
            for var in 0..total {
                let st = self.state[var];
                if matches!(st, VarState::Basic(_)) || self.upper[var] <= 0.0 {
                    continue;
                }
                let rc = self.cost[var] - self.column_dot(var, &y);
                match st {
                    VarState::Lower if rc > dual_tol => {
                        entering = Some((var, 1.0));
                        break;
                    }
                    VarState::Upper if rc < -dual_tol => {
                        entering = Some((var, -1.0));
                        break;
                    }
                    _ => {}
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(());
            };
            self.iterations += 1;
            self.since_refactor += 1;

            let w = self.ftran(q);
            let mut theta = self.upper[q];
            let mut leave: Option<(usize, bool)> = None; // (row, leaves at upper)
            for r in 0..self.n {
                let delta = -dir * w[r];
                let var = self.basis[r];
                let (limit, at_upper) = if delta < -self.opts.pivot_tol {
                    (self.xb[r].max(0.0) / -delta, false)
                } else if delta > self.opts.pivot_tol && self.upper[var].is_finite() {
                    ((self.upper[var] - self.xb[r]).max(0.0) / delta, true)
                } else {
                    continue;
                };
                let take = match leave {
                    None => limit < theta - 1e-12,
                    Some((lr, _)) => {
                        limit < theta - 1e-12 || (limit <= theta + 1e-12 && var < self.basis[lr])
                    }
                };
                if take {
                    theta = theta.min(limit);
                    leave = Some((r, at_upper));
                }
            }
            if !theta.is_finite() {
                return Err(Error::NumericalFailure("unbounded direction in a bounded LP".into()));
            }
            for r in 0..self.n {
                self.xb[r] -= theta * dir * w[r];
            }
            match leave {
                None => {
                    // bound flip
                    self.state[q] = match self.state[q] {
                        VarState::Lower => VarState::Upper,
                        _ => VarState::Lower,
                    };
                }
                Some((row, at_upper)) => {
                    let old = self.basis[row];
                    let entering_value = self.value_of(q) + dir * theta;
                    self.state[old] = if at_upper { VarState::Upper } else { VarState::Lower };
                    self.basis[row] = q;
                    self.state[q] = VarState::Basic(row);
                    self.xb[row] = entering_value;
                    self.pivot_binv(row, &w);
                }
            }
        }
    }

    /// Pivots zero-level artificials out of the basis where some structural
    /// column can replace them.
    fn expel_artificials(&mut self) -> Result<()> {
        let n = self.n;
        for row in 0..n {
            let var = self.basis[row];
            if var < self.j {
                continue;
            }
            let brow: Vec<f64> = self.binv[row * n..(row + 1) * n].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for col in 0..self.j {
                if matches!(self.state[col], VarState::Basic(_)) {
                    continue;
                }
                let v = dot(&brow, self.p.column(col)).abs();
                if v > 1e-7 && best.is_none_or(|(_, bv)| v > bv * 10.0) {
                    best = Some((col, v));
                }
            }
            if let Some((col, _)) = best {
                let w = self.ftran(col);
                let value = self.value_of(col);
                self.state[var] = VarState::Lower;
                self.basis[row] = col;
                self.state[col] = VarState::Basic(row);
                self.pivot_binv(row, &w);
                // degenerate pivot: the artificial was at zero, values carry over
                self.xb[row] = value;
                self.refactor()?;
            }
        }
        Ok(())
    }

    fn run(mut self, hint: Option<&[f64]>) -> Result<LpSolution> {
        let (j, n) = (self.j, self.n);
        self.crash(hint);

        // phase one: maximize −Σ artificials
        for i in 0..n {
            self.cost[j + i] = -1.0;
        }
        self.iterate()?;
        self.refactor()?;
        let residual: f64 = (0..n).map(|i| self.value_of(j + i)).sum();
        let scale = 1.0 + self.p.rhs().iter().map(|v| v.abs()).sum::<f64>();
        if residual > self.opts.feasibility_tol * scale {
            return Err(Error::Infeasible { residual });
        }
        for i in 0..n {
            let var = j + i;
            self.upper[var] = 0.0;
            self.cost[var] = 0.0;
            if !matches!(self.state[var], VarState::Basic(_)) {
                self.state[var] = VarState::Lower;
            }
        }
        self.expel_artificials()?;

        // phase two
        self.cost[..j].copy_from_slice(&self.p.objective);
        self.refactor()?;
        self.iterate()?;
        self.refactor()?;

        let m: Vec<f64> = (0..j).map(|v| self.value_of(v).clamp(0.0, 1.0)).collect();
        let k = self.duals();
        let objective_value = dot(&self.p.objective, &m);

        let cmax = self.p.objective.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
        let tie_tol = 1e-9 * cmax;
        let bound_tol = 1e-9;
        let mut degenerate = false;
        for var in 0..j {
            match self.state[var] {
                VarState::Basic(r) => {
                    let x = self.xb[r];
                    if x.abs() <= bound_tol || (x - 1.0).abs() <= bound_tol {
                        degenerate = true;
                    }
                }
                _ => {
                    let rc = self.p.objective[var] - dot(self.p.column(var), &k);
                    if rc.abs() <= tie_tol {
                        degenerate = true;
                    }
                }
            }
        }
        if self.basis.iter().any(|&v| v >= j) {
            degenerate = true;
        }
        let status = if degenerate { LpStatus::DegenerateWarning } else { LpStatus::Optimal };

        let resid = self.p.apply(&m);
        let worst = resid
            .iter()
            .zip(self.p.rhs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if worst > 1e-7 * scale {
            return Err(Error::NumericalFailure(format!(
                "final primal residual {worst:.3e} exceeds tolerance"
            )));
        }
        Ok(LpSolution { m, k, objective_value, status, iterations: self.iterations })
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
