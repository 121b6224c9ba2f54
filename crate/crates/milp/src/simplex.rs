//! Dense bounded-variable simplex.
//!
//! The tableau holds `B^-1 [A | I | R]` where `I` are row slacks and `R` the
//! phase-one artificial columns. Every column carries its own bounds, so
//! branching on a binary is a bound change followed by a dual simplex
//! warm start from the previous optimal basis.

use std::time::Instant;

use crate::model::{Model, Relation, Sense};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or a singular basis during refactorisation.
    Numerical,
    /// The deadline passed mid-solve.
    TimeLimit,
}

#[derive(Clone, Debug)]
pub(crate) struct Tolerances<S> {
    pub pivot: S,
    pub primal: S,
    pub dual: S,
    pub tiny: S,
}

impl<S: Scalar> Tolerances<S> {
    pub fn new(feasibility: f64) -> Self {
        Self {
            pivot: S::tolerance(1e-7),
            primal: S::tolerance(feasibility),
            dual: S::tolerance(1e-9),
            tiny: S::tolerance(1e-12),
        }
    }
}

pub(crate) struct Tableau<S> {
    m: usize,
    n_struct: usize,
    ncols: usize,
    /// Row-major `m x ncols`.
    t: Vec<S>,
    /// `B^-1 b`.
    beta: Vec<S>,
    /// Original sparse rows of `[A | I | R]` for refactorisation.
    orig_rows: Vec<Vec<(usize, S)>>,
    orig_rhs: Vec<S>,
    lower: Vec<Option<S>>,
    upper: Vec<Option<S>>,
    /// Minimisation costs of the structural columns (phase two).
    cost: Vec<S>,
    phase_one: bool,
    d: Vec<S>,
    basis: Vec<usize>,
    status: Vec<Status>,
    x: Vec<S>,
    tol: Tolerances<S>,
    pivots_since_refactor: usize,
    pub iterations: usize,
    bland: bool,
    deadline: Option<Instant>,
}

impl<S: Scalar> Tableau<S> {
    /// Builds the tableau for the continuous relaxation of `model` and
    /// leaves it at a phase-one starting basis.
    pub fn new(model: &Model<S>, tol: Tolerances<S>) -> Self {
        let m = model.constraints.len();
        let n = model.variables.len();

        let mut lower: Vec<Option<S>> = model.variables.iter().map(|v| v.lower.clone()).collect();
        let mut upper: Vec<Option<S>> = model.variables.iter().map(|v| v.upper.clone()).collect();
        let mut cost = vec![S::zero(); n];
        for (v, c) in &model.objective.terms {
            let c = match model.objective.sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c.clone(),
            };
            cost[v.0] = cost[v.0].clone() + c;
        }

        // starting point: structurals at a finite bound (or zero when free)
        let mut x: Vec<S> = (0..n)
            .map(|j| start_value(&lower[j], &upper[j]))
            .collect();
        let mut status: Vec<Status> = (0..n)
            .map(|j| start_status(&lower[j], &upper[j]))
            .collect();

        let mut orig_rows: Vec<Vec<(usize, S)>> = Vec::with_capacity(m);
        let mut orig_rhs = Vec::with_capacity(m);
        let mut slack_bounds = Vec::with_capacity(m);
        let mut residuals = Vec::with_capacity(m);
        for c in &model.constraints {
            let mut row: Vec<(usize, S)> = Vec::with_capacity(c.terms.len() + 1);
            for (v, a) in &c.terms {
                if let Some(e) = row.iter_mut().find(|(j, _)| *j == v.0) {
                    e.1 = e.1.clone() + a.clone();
                } else {
                    row.push((v.0, a.clone()));
                }
            }
            row.retain(|(_, a)| !a.is_zero());
            let activity = row
                .iter()
                .fold(S::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone());
            residuals.push(c.rhs.clone() - activity);
            slack_bounds.push(match c.relation {
                Relation::Le => (Some(S::zero()), None),
                Relation::Ge => (None, Some(S::zero())),
                Relation::Eq => (Some(S::zero()), Some(S::zero())),
            });
            orig_rows.push(row);
            orig_rhs.push(c.rhs.clone());
        }

        // slacks, and artificials for rows whose slack cannot absorb the residual
        let mut basis = Vec::with_capacity(m);
        let mut artificial_rows = Vec::new();
        for i in 0..m {
            let (sl, su) = slack_bounds[i].clone();
            let r = residuals[i].clone();
            let fits = sl.as_ref().is_none_or(|l| r >= *l) && su.as_ref().is_none_or(|u| r <= *u);
            lower.push(sl.clone());
            upper.push(su.clone());
            orig_rows[i].push((n + i, S::one()));
            if fits {
                x.push(r);
                status.push(Status::Basic);
                basis.push(n + i);
            } else {
                let clamped = if sl.as_ref().is_some_and(|l| r < *l) {
                    sl.clone().unwrap()
                } else {
                    su.clone().unwrap()
                };
                status.push(if sl.as_ref() == Some(&clamped) {
                    Status::AtLower
                } else {
                    Status::AtUpper
                });
                x.push(clamped.clone());
                artificial_rows.push((i, r - clamped));
                basis.push(usize::MAX);
            }
        }
        for (k, (i, rest)) in artificial_rows.iter().enumerate() {
            let col = n + m + k;
            let sign = if *rest >= S::zero() { S::one() } else { -S::one() };
            orig_rows[*i].push((col, sign.clone()));
            lower.push(Some(S::zero()));
            upper.push(None);
            x.push(rest.abs());
            status.push(Status::Basic);
            basis[*i] = col;
        }
        let ncols = n + m + artificial_rows.len();
        let phase_one = !artificial_rows.is_empty();

        let mut tab = Tableau {
            m,
            n_struct: n,
            ncols,
            t: vec![S::zero(); m * ncols],
            beta: vec![S::zero(); m],
            orig_rows,
            orig_rhs,
            lower,
            upper,
            cost,
            phase_one,
            d: vec![S::zero(); ncols],
            basis,
            status,
            x,
            tol,
            pivots_since_refactor: 0,
            iterations: 0,
            bland: false,
            deadline: None,
        };
        // the starting basis is a signed identity, so this cannot fail
        let ok = tab.refactor();
        debug_assert!(ok);
        tab
    }

    pub fn values(&self) -> Vec<S> {
        self.x[..self.n_struct].to_vec()
    }

    pub fn value(&self, j: usize) -> &S {
        &self.x[j]
    }

    /// Minimisation objective of the current point.
    pub fn min_objective(&self) -> S {
        self.cost
            .iter()
            .zip(&self.x)
            .fold(S::zero(), |acc, (c, x)| acc + c.clone() * x.clone())
    }

    pub fn bounds(&self, j: usize) -> (&Option<S>, &Option<S>) {
        (&self.lower[j], &self.upper[j])
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<S>, upper: Option<S>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    fn cost_of(&self, j: usize) -> S {
        if self.phase_one {
            if j >= self.n_struct + self.m {
                S::one()
            } else {
                S::zero()
            }
        } else if j < self.n_struct {
            self.cost[j].clone()
        } else {
            S::zero()
        }
    }

    fn recompute_duals(&mut self) {
        let costs_b: Vec<S> = self.basis.iter().map(|&j| self.cost_of(j)).collect();
        for j in 0..self.ncols {
            if self.status[j] == Status::Basic {
                self.d[j] = S::zero();
                continue;
            }
            let mut dj = self.cost_of(j);
            for (i, cb) in costs_b.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let a = &self.t[i * self.ncols + j];
                if !a.is_zero() {
                    dj = dj - cb.clone() * a.clone();
                }
            }
            self.d[j] = dj.flush(&self.tol.tiny);
        }
    }

    fn recompute_basic_values(&mut self) {
        let nonbasic: Vec<usize> = (0..self.ncols)
            .filter(|&j| self.status[j] != Status::Basic && !self.x[j].is_zero())
            .collect();
        for i in 0..self.m {
            let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
            let mut v = self.beta[i].clone();
            for &j in &nonbasic {
                let a = &row[j];
                if !a.is_zero() {
                    v = v - a.clone() * self.x[j].clone();
                }
            }
            let b = self.basis[i];
            self.x[b] = v;
        }
    }

    /// Rebuilds `B^-1 [A | I | R]` from the original rows for the current
    /// basis. Returns `false` if the basis is numerically singular.
    pub fn refactor(&mut self) -> bool {
        let (m, nc) = (self.m, self.ncols);
        for v in self.t.iter_mut() {
            *v = S::zero();
        }
        for (i, row) in self.orig_rows.iter().enumerate() {
            for (j, a) in row {
                self.t[i * nc + j] = a.clone();
            }
            self.beta[i] = self.orig_rhs[i].clone();
        }
        let old_basis = std::mem::take(&mut self.basis);
        let mut assigned = vec![usize::MAX; m];
        for &col in &old_basis {
            let mut best: Option<(usize, S)> = None;
            for i in 0..m {
                if assigned[i] != usize::MAX {
                    continue;
                }
                let a = self.t[i * nc + col].abs();
                if a > self.tol.pivot && best.as_ref().is_none_or(|(_, b)| a > *b) {
                    best = Some((i, a));
                }
            }
            let Some((r, _)) = best else {
                self.basis = old_basis;
                return false;
            };
            self.pivot_rows(r, col);
            assigned[r] = col;
        }
        self.basis = assigned;
        self.pivots_since_refactor = 0;
        self.recompute_duals();
        self.recompute_basic_values();
        true
    }

    /// Gauss-Jordan step on the tableau and `beta` only.
    fn pivot_rows(&mut self, r: usize, q: usize) -> Vec<usize> {
        let nc = self.ncols;
        let piv = self.t[r * nc + q].clone();
        let mut nz = Vec::new();
        for j in 0..nc {
            let idx = r * nc + j;
            if !self.t[idx].is_zero() {
                self.t[idx] = (self.t[idx].clone() / piv.clone()).flush(&self.tol.tiny);
                if !self.t[idx].is_zero() {
                    nz.push(j);
                }
            }
        }
        self.t[r * nc + q] = S::one();
        self.beta[r] = self.beta[r].clone() / piv;
        let (head, rest) = self.t.split_at_mut(r * nc);
        let (prow, tail) = rest.split_at_mut(nc);
        let beta_r = self.beta[r].clone();
        let update = |row: &mut [S], beta_i: &mut S| {
            let f = row[q].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] = (row[j].clone() - f.clone() * prow[j].clone()).flush(&self.tol.tiny);
            }
            row[q] = S::zero();
            *beta_i = (beta_i.clone() - f * beta_r.clone()).flush(&self.tol.tiny);
        };
        let (beta_head, beta_rest) = self.beta.split_at_mut(r);
        for (row, b) in head.chunks_mut(nc).zip(beta_head.iter_mut()) {
            update(row, b);
        }
        for (row, b) in tail.chunks_mut(nc).zip(beta_rest[1..].iter_mut()) {
            update(row, b);
        }
        nz
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nz = self.pivot_rows(r, q);
        let dq = self.d[q].clone();
        if !dq.is_zero() {
            let nc = self.ncols;
            for &j in &nz {
                self.d[j] = (self.d[j].clone() - dq.clone() * self.t[r * nc + j].clone()).flush(&self.tol.tiny);
            }
        }
        self.d[q] = S::zero();
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.status[q] = Status::Basic;
        let _ = leaving;
        self.pivots_since_refactor += 1;
        self.iterations += 1;
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lower[j], &self.upper[j]), (Some(l), Some(u)) if l == u)
    }

    fn maybe_refactor(&mut self) -> bool {
        if S::EXACT || self.pivots_since_refactor < 2 * self.m.max(50) {
            return true;
        }
        self.refactor()
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Checked every few iterations only; reading the clock is not free.
    fn past_deadline(&self, steps: usize) -> bool {
        steps.is_multiple_of(32) && self.deadline.is_some_and(|d| Instant::now() > d)
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.m + self.ncols) + 1000
    }

    /// Runs phase one (if needed) and phase two from the current basis.
    pub fn solve_primal(&mut self) -> LpOutcome {
        if self.phase_one {
            self.recompute_duals();
            match self.primal_loop() {
                LpOutcome::Optimal => {}
                LpOutcome::Unbounded => return LpOutcome::Numerical,
                other => return other,
            }
            let infeas = (self.n_struct + self.m..self.ncols)
                .fold(S::zero(), |acc, j| acc + self.x[j].clone());
            if infeas > self.tol.primal {
                return LpOutcome::Infeasible;
            }
            for j in self.n_struct + self.m..self.ncols {
                self.lower[j] = Some(S::zero());
                self.upper[j] = Some(S::zero());
                if self.status[j] != Status::Basic {
                    self.status[j] = Status::AtLower;
                    self.x[j] = S::zero();
                }
            }
            self.phase_one = false;
        }
        self.recompute_duals();
        self.primal_loop()
    }

    fn entering_candidate(&self) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool, S)> = None;
        for j in 0..self.ncols {
            let inc = match self.status[j] {
                Status::Basic => continue,
                _ if self.is_fixed(j) => continue,
                Status::AtLower => {
                    if self.d[j] < -self.tol.dual.clone() {
                        true
                    } else {
                        continue;
                    }
                }
                Status::AtUpper => {
                    if self.d[j] > self.tol.dual {
                        false
                    } else {
                        continue;
                    }
                }
                Status::Free => {
                    if self.d[j].is_negligible(&self.tol.dual) {
                        continue;
                    }
                    self.d[j] < S::zero()
                }
            };
            if self.bland {
                return Some((j, inc));
            }
            let score = self.d[j].abs();
            if best.as_ref().is_none_or(|(_, _, s)| score > *s) {
                best = Some((j, inc, score));
            }
        }
        best.map(|(j, inc, _)| (j, inc))
    }

    fn primal_loop(&mut self) -> LpOutcome {
        let cap = self.iteration_cap();
        let mut degenerate = 0usize;
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > cap {
                return LpOutcome::Numerical;
            }
            if self.past_deadline(steps) {
                return LpOutcome::TimeLimit;
            }
            if !self.maybe_refactor() {
                return LpOutcome::Numerical;
            }
            let Some((q, increase)) = self.entering_candidate() else {
                self.bland = false;
                return LpOutcome::Optimal;
            };
            let nc = self.ncols;
            let sgn = if increase { S::one() } else { -S::one() };
            let leave = if self.bland {
                self.ratio_bland(q, &sgn)
            } else {
                self.ratio_harris(q, &sgn)
            };
            let range = match (&self.lower[q], &self.upper[q]) {
                (Some(l), Some(u)) => Some(u.clone() - l.clone()),
                _ => None,
            };
            let flip = match (&range, &leave) {
                (Some(rg), Some((_, th))) => rg <= th,
                (Some(_), None) => true,
                _ => false,
            };
            if leave.is_none() && !flip {
                return LpOutcome::Unbounded;
            }
            let theta = if flip {
                range.clone().unwrap()
            } else {
                leave.as_ref().unwrap().1.clone()
            };
            if theta.is_negligible(&self.tol.tiny) {
                degenerate += 1;
                if degenerate > 50 {
                    self.bland = true;
                }
            } else {
                degenerate = 0;
                self.bland = false;
            }
            // move basic values
            if !theta.is_zero() {
                for i in 0..self.m {
                    let a = &self.t[i * nc + q];
                    if a.is_zero() {
                        continue;
                    }
                    let b = self.basis[i];
                    self.x[b] = self.x[b].clone() - sgn.clone() * a.clone() * theta.clone();
                }
            }
            if flip {
                if increase {
                    self.x[q] = self.upper[q].clone().unwrap();
                    self.status[q] = Status::AtUpper;
                } else {
                    self.x[q] = self.lower[q].clone().unwrap();
                    self.status[q] = Status::AtLower;
                }
                self.iterations += 1;
                continue;
            }
            let (r, _) = leave.unwrap();
            let b = self.basis[r];
            self.x[q] = self.x[q].clone() + sgn.clone() * theta;
            let delta = -(sgn * self.t[r * nc + q].clone());
            if delta < S::zero() {
                self.x[b] = self.lower[b].clone().unwrap();
                self.status[b] = Status::AtLower;
            } else {
                self.x[b] = self.upper[b].clone().unwrap();
                self.status[b] = Status::AtUpper;
            }
            self.pivot(r, q);
        }
    }

    /// Step limit of basic row `i` when column `q` moves in direction `sgn`,
    /// with the bound widened by `slack`. `None` if the row never blocks.
    fn row_limit(&self, i: usize, q: usize, sgn: &S, slack: &S) -> Option<S> {
        let a = &self.t[i * self.ncols + q];
        if a.is_negligible(&self.tol.pivot) {
            return None;
        }
        let delta = -(sgn.clone() * a.clone());
        let b = self.basis[i];
        let limit = if delta < S::zero() {
            let l = self.lower[b].as_ref()?;
            (self.x[b].clone() - l.clone() + slack.clone()) / (-delta)
        } else {
            let u = self.upper[b].as_ref()?;
            (u.clone() - self.x[b].clone() + slack.clone()) / delta
        };
        Some(if limit < S::zero() { S::zero() } else { limit })
    }

    /// Smallest step, ties to the lowest basic column index.
    fn ratio_bland(&self, q: usize, sgn: &S) -> Option<(usize, S)> {
        let zero = S::zero();
        let mut leave: Option<(usize, S)> = None;
        for i in 0..self.m {
            let Some(limit) = self.row_limit(i, q, sgn, &zero) else {
                continue;
            };
            let better = leave
                .as_ref()
                .is_none_or(|(r, th)| limit < *th || (limit == *th && self.basis[i] < self.basis[*r]));
            if better {
                leave = Some((i, limit));
            }
        }
        leave
    }

    /// Two-pass ratio test: bounds are relaxed by the primal tolerance to
    /// find the admissible step, then the largest pivot within it leaves.
    fn ratio_harris(&self, q: usize, sgn: &S) -> Option<(usize, S)> {
        let zero = S::zero();
        let mut max_step: Option<S> = None;
        for i in 0..self.m {
            if let Some(limit) = self.row_limit(i, q, sgn, &self.tol.primal) {
                if max_step.as_ref().is_none_or(|m| limit < *m) {
                    max_step = Some(limit);
                }
            }
        }
        let max_step = max_step?;
        let nc = self.ncols;
        let mut leave: Option<(usize, S, S)> = None;
        for i in 0..self.m {
            let Some(limit) = self.row_limit(i, q, sgn, &zero) else {
                continue;
            };
            if limit > max_step {
                continue;
            }
            let mag = self.t[i * nc + q].abs();
            if leave.as_ref().is_none_or(|(_, _, am)| mag > *am) {
                leave = Some((i, limit, mag));
            }
        }
        leave.map(|(i, th, _)| (i, th))
    }

    /// Places nonbasic columns at the bound their reduced cost asks for.
    /// Returns `false` if a needed bound is infinite (dual infeasible).
    fn place_nonbasics(&mut self) -> bool {
        let mut ok = true;
        for j in 0..self.ncols {
            if self.status[j] == Status::Basic {
                continue;
            }
            let (l, u) = (&self.lower[j], &self.upper[j]);
            let want = if self.is_fixed(j) {
                Status::AtLower
            } else if self.d[j] > self.tol.dual {
                if l.is_some() {
                    Status::AtLower
                } else {
                    ok = false;
                    Status::Free
                }
            } else if self.d[j] < -self.tol.dual.clone() {
                if u.is_some() {
                    Status::AtUpper
                } else {
                    ok = false;
                    Status::Free
                }
            } else {
                match self.status[j] {
                    Status::AtLower if l.is_some() => Status::AtLower,
                    Status::AtUpper if u.is_some() => Status::AtUpper,
                    _ => start_status(l, u),
                }
            };
            self.status[j] = want;
            self.x[j] = match want {
                Status::AtLower => l.clone().unwrap(),
                Status::AtUpper => u.clone().unwrap(),
                _ => S::zero(),
            };
        }
        ok
    }

    /// Checks, against the original rows, that row `r` of `B^-1` combines
    /// the constraints into one that no point within the bounds satisfies.
    fn certifies_infeasible(&self, r: usize) -> bool {
        let nc = self.ncols;
        let y: Vec<S> = (0..self.m).map(|i| self.t[r * nc + self.n_struct + i].clone()).collect();
        let mut coef = vec![S::zero(); nc];
        let mut rhs = S::zero();
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (j, a) in &self.orig_rows[i] {
                coef[*j] = coef[*j].clone() + yi.clone() * a.clone();
            }
            rhs = rhs + yi.clone() * self.orig_rhs[i].clone();
        }
        let (mut lo, mut hi) = (Some(S::zero()), Some(S::zero()));
        let mut scale = S::one() + rhs.abs();
        for (j, c) in coef.iter().enumerate() {
            if c.is_negligible(&self.tol.tiny) {
                continue;
            }
            let (for_lo, for_hi) = if *c > S::zero() {
                (&self.lower[j], &self.upper[j])
            } else {
                (&self.upper[j], &self.lower[j])
            };
            lo = match (lo, for_lo) {
                (Some(acc), Some(v)) => {
                    scale = scale + (c.clone() * v.clone()).abs();
                    Some(acc + c.clone() * v.clone())
                }
                _ => None,
            };
            hi = match (hi, for_hi) {
                (Some(acc), Some(v)) => {
                    scale = scale + (c.clone() * v.clone()).abs();
                    Some(acc + c.clone() * v.clone())
                }
                _ => None,
            };
        }
        let margin = self.tol.primal.clone() * scale;
        lo.is_some_and(|l| rhs < l - margin.clone()) || hi.is_some_and(|h| rhs > h + margin)
    }

    /// Re-solves after bound changes, starting from the current basis.
    pub fn reoptimize(&mut self) -> LpOutcome {
        if self.phase_one {
            return self.solve_primal();
        }
        if !self.place_nonbasics() {
            return LpOutcome::Numerical;
        }
        self.recompute_basic_values();
        match self.dual_loop() {
            LpOutcome::Optimal => self.primal_loop(),
            other => other,
        }
    }

    fn dual_loop(&mut self) -> LpOutcome {
        let cap = self.iteration_cap();
        let mut steps = 0usize;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            steps += 1;
            if steps > cap {
                return LpOutcome::Numerical;
            }
            if self.past_deadline(steps) {
                return LpOutcome::TimeLimit;
            }
            if !self.maybe_refactor() {
                return LpOutcome::Numerical;
            }
            // leaving row: largest bound violation
            let mut leave: Option<(usize, S, bool)> = None;
            for i in 0..self.m {
                let b = self.basis[i];
                let (viol, below) = if let Some(l) = self.lower[b].as_ref().filter(|l| self.x[b] < **l) {
                    (l.clone() - self.x[b].clone(), true)
                } else if let Some(u) = self.upper[b].as_ref().filter(|u| self.x[b] > **u) {
                    (self.x[b].clone() - u.clone(), false)
                } else {
                    continue;
                };
                if viol <= self.tol.primal {
                    continue;
                }
                let better = match &leave {
                    None => true,
                    Some((r, v, _)) => {
                        if bland {
                            b < self.basis[*r]
                        } else {
                            viol > *v
                        }
                    }
                };
                if better {
                    leave = Some((i, viol, below));
                }
            }
            let Some((r, _, below)) = leave else {
                return LpOutcome::Optimal;
            };
            let nc = self.ncols;
            let mut enter: Option<(usize, S, S)> = None;
            for j in 0..nc {
                if self.status[j] == Status::Basic || self.is_fixed(j) {
                    continue;
                }
                let a = &self.t[r * nc + j];
                if a.is_negligible(&self.tol.pivot) {
                    continue;
                }
                let positive = *a > S::zero();
                let eligible = match self.status[j] {
                    Status::AtLower => positive != below,
                    Status::AtUpper => positive == below,
                    Status::Free => true,
                    Status::Basic => false,
                };
                if !eligible {
                    continue;
                }
                let ratio = self.d[j].abs() / a.abs();
                let mag = a.abs();
                let better = match &enter {
                    None => true,
                    Some((_, best, bm)) => {
                        if bland {
                            ratio < *best
                        } else {
                            let slack = self.tol.tiny.clone();
                            ratio < best.clone() - slack.clone()
                                || (ratio <= best.clone() + slack && mag > *bm)
                        }
                    }
                };
                if better {
                    enter = Some((j, ratio, mag));
                }
            }
            let Some((q, ratio, _)) = enter else {
                // drift can fake an empty ratio test; let the caller cold start
                return if self.certifies_infeasible(r) {
                    LpOutcome::Infeasible
                } else {
                    LpOutcome::Numerical
                };
            };
            if ratio.is_negligible(&self.tol.tiny) {
                degenerate += 1;
                if degenerate > 50 {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            let b = self.basis[r];
            let target = if below {
                self.lower[b].clone().unwrap()
            } else {
                self.upper[b].clone().unwrap()
            };
            let alpha = self.t[r * nc + q].clone();
            let theta = (self.x[b].clone() - target.clone()) / alpha;
            for i in 0..self.m {
                let a = &self.t[i * nc + q];
                if a.is_zero() {
                    continue;
                }
                let bi = self.basis[i];
                self.x[bi] = self.x[bi].clone() - a.clone() * theta.clone();
            }
            self.x[q] = self.x[q].clone() + theta;
            self.x[b] = target;
            self.status[b] = if below { Status::AtLower } else { Status::AtUpper };
            self.pivot(r, q);
        }
    }
}

fn start_status<S: Scalar>(l: &Option<S>, u: &Option<S>) -> Status {
    match (l, u) {
        (Some(_), _) => Status::AtLower,
        (None, Some(_)) => Status::AtUpper,
        (None, None) => Status::Free,
    }
}

fn start_value<S: Scalar>(l: &Option<S>, u: &Option<S>) -> S {
    match (l, u) {
        (Some(l), _) => l.clone(),
        (None, Some(u)) => u.clone(),
        (None, None) => S::zero(),
    }
}
