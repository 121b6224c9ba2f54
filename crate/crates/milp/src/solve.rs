//! LP relaxation and branch-and-bound drivers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::model::{Model, Sense, VarKind};
use crate::scalar::Scalar;
use crate::simplex::{LpOutcome, Tableau, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
    NumericalFailure,
}

/// Solver settings. All tolerances live here.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveParams {
    pub time_limit_seconds: f64,
    /// Relative optimality gap, with an absolute floor of `1e-9`.
    pub mip_gap: f64,
    pub feasibility_tolerance: f64,
    pub integrality_tolerance: f64,
    pub node_limit: usize,
    /// Only accept solutions strictly better than this objective value
    /// (in the model's own sense). Nodes that cannot beat it are pruned.
    pub cutoff: Option<f64>,
    /// Record one [`NodeEvent`] per processed node.
    pub record_trace: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            time_limit_seconds: 3600.0,
            mip_gap: 1e-6,
            feasibility_tolerance: 1e-7,
            integrality_tolerance: 1e-6,
            node_limit: 10_000_000,
            cutoff: None,
            record_trace: false,
        }
    }
}

impl SolveParams {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit_seconds = seconds;
        self
    }
}

/// One processed branch-and-bound node, objective in the model's sense.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeEvent<S> {
    pub depth: usize,
    pub lp_bound: Option<S>,
    pub parent_bound: Option<S>,
    pub incumbent: Option<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<S> {
    pub status: SolveStatus,
    /// One value per model variable; empty when no solution is known.
    pub values: Vec<S>,
    pub objective: Option<S>,
    /// Best proven bound in the model's sense (lower for minimisation).
    pub bound: Option<S>,
    pub node_count: usize,
    pub lp_iterations: usize,
    pub trace: Vec<NodeEvent<S>>,
}

impl<S: Scalar> Solution<S> {
    fn empty(status: SolveStatus) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: None,
            bound: None,
            node_count: 0,
            lp_iterations: 0,
            trace: Vec::new(),
        }
    }

    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, var: crate::VarId) -> &S {
        &self.values[var.0]
    }
}

fn deadline(params: &SolveParams) -> Option<Instant> {
    Duration::try_from_secs_f64(params.time_limit_seconds.max(0.0))
        .ok()
        .and_then(|d| Instant::now().checked_add(d))
}

fn to_sense<S: Scalar>(sense: Sense, min_value: S) -> S {
    match sense {
        Sense::Minimize => min_value,
        Sense::Maximize => -min_value,
    }
}

/// Solves the continuous relaxation of `model`.
pub fn solve_lp<S: Scalar>(model: &Model<S>, params: &SolveParams) -> Solution<S> {
    if model.validate().is_err() {
        return Solution::empty(SolveStatus::NumericalFailure);
    }
    let tol = Tolerances::new(params.feasibility_tolerance);
    let mut tab = Tableau::new(model, tol);
    tab.set_deadline(deadline(params));
    let outcome = tab.solve_primal();
    let mut sol = match outcome {
        LpOutcome::Optimal => {
            let values = tab.values();
            let obj = model.objective_value(&values);
            Solution {
                status: SolveStatus::Optimal,
                objective: Some(obj.clone()),
                bound: Some(obj),
                values,
                node_count: 1,
                lp_iterations: 0,
                trace: Vec::new(),
            }
        }
        LpOutcome::Infeasible => Solution::empty(SolveStatus::Infeasible),
        LpOutcome::Unbounded => Solution::empty(SolveStatus::Unbounded),
        LpOutcome::Numerical => Solution::empty(SolveStatus::NumericalFailure),
        LpOutcome::TimeLimit => Solution::empty(SolveStatus::TimeLimit),
    };
    if sol.status == SolveStatus::Optimal {
        let slack = S::tolerance(params.feasibility_tolerance * 100.0);
        if model.max_violation(&sol.values) > slack {
            // one clean refactorisation before giving up
            if tab.refactor() && tab.reoptimize() == LpOutcome::Optimal {
                sol.values = tab.values();
                let obj = model.objective_value(&sol.values);
                sol.objective = Some(obj.clone());
                sol.bound = Some(obj);
            }
            if model.max_violation(&sol.values) > slack {
                sol = Solution::empty(SolveStatus::NumericalFailure);
            }
        }
    }
    sol.lp_iterations = tab.iterations;
    sol
}

struct Node<S> {
    /// Minimisation bound inherited from the parent relaxation.
    bound: S,
    depth: usize,
    seq: usize,
    fixes: Vec<(usize, bool)>,
}

impl<S: Scalar> PartialEq for Node<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Node<S> {}
impl<S: Scalar> PartialOrd for Node<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Node<S> {
    // max-heap: smallest bound first, then deepest, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct BranchState<'a, S> {
    model: &'a Model<S>,
    params: &'a SolveParams,
    tab: Tableau<S>,
    binaries: Vec<usize>,
    root_bounds: Vec<(Option<S>, Option<S>)>,
    applied: Vec<Option<bool>>,
    int_tol: S,
    /// The tableau failed a warm start and holds no trustworthy basis.
    suspect: bool,
    deadline: Option<Instant>,
}

impl<'a, S: Scalar> BranchState<'a, S> {
    fn apply(&mut self, fixes: &[(usize, bool)]) {
        let mut target: Vec<Option<bool>> = vec![None; self.binaries.len()];
        for &(k, up) in fixes {
            target[k] = Some(up);
        }
        for k in 0..self.binaries.len() {
            if target[k] == self.applied[k] {
                continue;
            }
            let j = self.binaries[k];
            match target[k] {
                None => {
                    let (l, u) = self.root_bounds[k].clone();
                    self.tab.set_bounds(j, l, u);
                }
                Some(up) => {
                    let v = if up { S::one() } else { S::zero() };
                    self.tab.set_bounds(j, Some(v.clone()), Some(v));
                }
            }
            self.applied[k] = target[k];
        }
    }

    fn solve_node(&mut self, fixes: &[(usize, bool)]) -> LpOutcome {
        self.apply(fixes);
        if !self.suspect {
            match self.tab.reoptimize() {
                LpOutcome::Numerical => {}
                other => return other,
            }
        }
        // cold start with the node's bounds; the result only replaces the
        // shared tableau once it holds an optimal basis
        let mut local = self.model.clone();
        for &j in &self.binaries {
            let (l, u) = self.tab.bounds(j);
            local.variables[j].lower = l.clone();
            local.variables[j].upper = u.clone();
        }
        let mut fresh = Tableau::new(&local, Tolerances::new(self.params.feasibility_tolerance));
        fresh.set_deadline(self.deadline);
        fresh.iterations = self.tab.iterations;
        let outcome = fresh.solve_primal();
        if outcome == LpOutcome::Optimal {
            self.tab = fresh;
            self.suspect = false;
        } else {
            self.tab.iterations = fresh.iterations;
            self.suspect = true;
        }
        outcome
    }

    /// Index into `binaries` of the branching variable, or `None` if the
    /// relaxation is integral.
    fn branching_candidate(&self) -> Option<usize> {
        let half = S::one() / (S::one() + S::one());
        let mut best: Option<(usize, i32, S)> = None;
        for (k, &j) in self.binaries.iter().enumerate() {
            let x = self.tab.value(j).clone();
            let frac = if x < half { x.abs() } else { (S::one() - x).abs() };
            if frac <= self.int_tol {
                continue;
            }
            let prio = self.model.variables[j].branch_priority;
            let better = match &best {
                None => true,
                Some((_, bp, bf)) => prio > *bp || (prio == *bp && frac > *bf),
            };
            if better {
                best = Some((k, prio, frac));
            }
        }
        best.map(|(k, _, _)| k)
    }

    /// Fixes every binary to its rounded value and re-solves so that the
    /// continuous part is consistent with exact 0/1 values.
    fn polish(&mut self) -> Option<Vec<S>> {
        let half = S::one() / (S::one() + S::one());
        let rounded: Vec<(usize, bool)> = self
            .binaries
            .iter()
            .enumerate()
            .map(|(k, &j)| (k, *self.tab.value(j) >= half))
            .collect();
        if self.solve_node(&rounded) != LpOutcome::Optimal {
            return None;
        }
        let mut values = self.tab.values();
        for (k, up) in rounded {
            values[self.binaries[k]] = if up { S::one() } else { S::zero() };
        }
        Some(values)
    }
}

/// Branch-and-bound over the binary variables of `model`.
///
/// Node selection is best-bound with depth-first plunging; branching picks
/// the most fractional binary of the highest priority class, ties going to
/// the smallest index.
pub fn solve_mip<S: Scalar>(model: &Model<S>, params: &SolveParams) -> Solution<S> {
    if model.validate().is_err() {
        return Solution::empty(SolveStatus::NumericalFailure);
    }
    let start = Instant::now();
    let time_limit = Duration::try_from_secs_f64(params.time_limit_seconds.max(0.0)).unwrap_or(Duration::MAX);
    let sense = model.objective.sense;
    let to_min = |v: S| -> S {
        match sense {
            Sense::Minimize => v,
            Sense::Maximize => -v,
        }
    };

    let binaries: Vec<usize> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let root_bounds = binaries
        .iter()
        .map(|&j| (model.variables[j].lower.clone(), model.variables[j].upper.clone()))
        .collect();
    let tol = Tolerances::new(params.feasibility_tolerance);
    let mut tab = Tableau::new(model, tol);
    let lp_deadline = deadline(params);
    tab.set_deadline(lp_deadline);
    let mut st = BranchState {
        model,
        params,
        tab,
        applied: vec![None; binaries.len()],
        binaries,
        root_bounds,
        int_tol: S::tolerance(params.integrality_tolerance),
        suspect: false,
        deadline: lp_deadline,
    };

    let abs_gap = S::tolerance(1e-9);
    let rel_gap = S::tolerance(params.mip_gap);
    let prune_margin = |inc: &S| -> S {
        let r = rel_gap.clone() * inc.abs();
        if r > abs_gap {
            r
        } else {
            abs_gap.clone()
        }
    };

    let mut incumbent: Option<(S, Vec<S>)> = None;
    let mut cutoff: Option<S> = params.cutoff.map(|c| to_min(S::from_f64_lossy(c)));
    let mut heap: BinaryHeap<Node<S>> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut trace = Vec::new();
    let mut pruned_min: Option<S> = None;
    let mut numerical_trouble = false;
    let mut limit_status: Option<SolveStatus> = None;
    // an open node without any relaxation bound
    let mut unbounded_open = false;

    let note_pruned = |pruned_min: &mut Option<S>, b: &S| {
        if pruned_min.as_ref().is_none_or(|p| b < p) {
            *pruned_min = Some(b.clone());
        }
    };

    // current dive: (fixes, parent bound, depth)
    let mut current: Option<(Vec<(usize, bool)>, Option<S>, usize)> = Some((Vec::new(), None, 0));
    loop {
        let (fixes, parent_bound, depth) = match current.take() {
            Some(c) => c,
            None => match heap.pop() {
                Some(node) => {
                    let threshold = cutoff.as_ref().map(|c| c.clone() - prune_margin(c));
                    if threshold.as_ref().is_some_and(|t| node.bound >= *t) {
                        note_pruned(&mut pruned_min, &node.bound);
                        continue;
                    }
                    (node.fixes, Some(node.bound), node.depth)
                }
                None => break,
            },
        };
        if nodes >= params.node_limit {
            limit_status = Some(SolveStatus::NodeLimit);
            match parent_bound {
                Some(bound) => heap.push(Node { bound, depth, seq, fixes }),
                None => unbounded_open = true,
            }
            break;
        }
        if start.elapsed() > time_limit {
            limit_status = Some(SolveStatus::TimeLimit);
            match parent_bound {
                Some(bound) => heap.push(Node { bound, depth, seq, fixes }),
                None => unbounded_open = true,
            }
            break;
        }
        nodes += 1;
        let outcome = if depth == 0 && nodes == 1 {
            st.tab.solve_primal()
        } else {
            st.solve_node(&fixes)
        };
        let record = |trace: &mut Vec<NodeEvent<S>>, lp: Option<S>, inc: &Option<(S, Vec<S>)>| {
            if params.record_trace {
                trace.push(NodeEvent {
                    depth,
                    lp_bound: lp.map(|v| to_sense(sense, v)),
                    parent_bound: parent_bound.clone().map(|v| to_sense(sense, v)),
                    incumbent: inc.as_ref().map(|(v, _)| to_sense(sense, v.clone())),
                });
            }
        };
        match outcome {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => {
                record(&mut trace, None, &incumbent);
                continue;
            }
            LpOutcome::Unbounded => {
                if depth == 0 {
                    let mut sol = Solution::empty(SolveStatus::Unbounded);
                    sol.node_count = nodes;
                    sol.lp_iterations = st.tab.iterations;
                    return sol;
                }
                numerical_trouble = true;
                continue;
            }
            LpOutcome::Numerical => {
                numerical_trouble = true;
                record(&mut trace, None, &incumbent);
                continue;
            }
            LpOutcome::TimeLimit => {
                limit_status = Some(SolveStatus::TimeLimit);
                match parent_bound {
                    Some(bound) => heap.push(Node { bound, depth, seq, fixes }),
                    None => unbounded_open = true,
                }
                break;
            }
        }
        let lp_obj = st.tab.min_objective();
        record(&mut trace, Some(lp_obj.clone()), &incumbent);
        let threshold = cutoff.as_ref().map(|c| c.clone() - prune_margin(c));
        if threshold.as_ref().is_some_and(|t| lp_obj >= *t) {
            note_pruned(&mut pruned_min, &lp_obj);
            continue;
        }
        match st.branching_candidate() {
            None => {
                let Some(values) = st.polish() else {
                    numerical_trouble = true;
                    continue;
                };
                let slack = S::tolerance(params.feasibility_tolerance * 100.0);
                if model.max_violation(&values) > slack {
                    numerical_trouble = true;
                    continue;
                }
                let obj = to_min(model.objective_value(&values));
                let improves = cutoff.as_ref().is_none_or(|c| obj < c.clone() - prune_margin(c));
                let first_below_cutoff = incumbent.is_none() && cutoff.as_ref().is_none_or(|c| obj < *c);
                if improves || first_below_cutoff {
                    cutoff = Some(obj.clone());
                    incumbent = Some((obj, values));
                }
            }
            Some(k) => {
                let j = st.binaries[k];
                let x = st.tab.value(j).clone();
                let half = S::one() / (S::one() + S::one());
                let dive_up = x >= half;
                let mut other = fixes.clone();
                other.push((k, !dive_up));
                seq += 1;
                heap.push(Node {
                    bound: lp_obj.clone(),
                    depth: depth + 1,
                    seq,
                    fixes: other,
                });
                let mut dive = fixes;
                dive.push((k, dive_up));
                current = Some((dive, Some(lp_obj), depth + 1));
            }
        }
    }

    let open_min = if unbounded_open {
        None
    } else {
        heap.iter()
        .map(|n| n.bound.clone())
        .fold(None::<S>, |acc, b| match acc {
            Some(a) if a <= b => Some(a),
            _ => Some(b),
        })
    };
    let iterations = st.tab.iterations;
    let mut sol = match incumbent {
        Some((obj, values)) => {
            let mut bound = obj.clone();
            if let Some(p) = &pruned_min {
                if *p < bound {
                    bound = p.clone();
                }
            }
            if let Some(o) = &open_min {
                if *o < bound {
                    bound = o.clone();
                }
            }
            let status = limit_status.unwrap_or(if numerical_trouble {
                SolveStatus::NumericalFailure
            } else {
                SolveStatus::Optimal
            });
            Solution {
                status,
                objective: Some(to_sense(sense, obj)),
                bound: (!unbounded_open).then(|| to_sense(sense, bound)),
                values,
                node_count: nodes,
                lp_iterations: 0,
                trace: Vec::new(),
            }
        }
        None => {
            let status = limit_status.unwrap_or(if numerical_trouble {
                SolveStatus::NumericalFailure
            } else {
                SolveStatus::Infeasible
            });
            let mut s = Solution::empty(status);
            s.bound = open_min.map(|b| to_sense(sense, b));
            s.node_count = nodes;
            s
        }
    };
    sol.lp_iterations = iterations;
    sol.trace = trace;
    sol
}
