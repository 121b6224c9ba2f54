//! Solution algorithms for the design problem: the extensive form,
//! scenario-based decomposition, the greedy union heuristic with switch
//! repair, variable neighborhood search, their hybrid, and a brute-force
//! enumeration used as a verification oracle.

mod extensive;
mod greedy;
mod oracle;
mod sbd;
mod sbvnds;
mod vns;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use gridforge_milp::{solve_mip, MipSolution, SolveParams, SolveStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{enumerate_cycles, CycleSet, DEFAULT_MAX_CYCLES};
use crate::error::GridError;
use crate::formulation::{apply_chance_relaxation, build_master, chance_budget, price_scenario, Design, MasterModel, PricingResult};
use crate::grid::{validate_instance, NetworkInstance};
use crate::scenario::{Scenario, ScenarioSet};

pub use extensive::solve_extensive;
pub use greedy::{repair_switches, solve_greedy};
pub use oracle::{brute_force_oracle, OracleResult, ORACLE_MAX_BINARIES};
pub use sbd::solve_sbd;
pub use sbvnds::solve_sbvnds;
pub use vns::solve_vns;

/// The solution methods selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Extensive,
    Sbd,
    Greedy,
    Vns,
    Sbvnds,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Extensive,
        Algorithm::Sbd,
        Algorithm::Greedy,
        Algorithm::Vns,
        Algorithm::Sbvnds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Extensive => "extensive",
            Algorithm::Sbd => "sbd",
            Algorithm::Greedy => "greedy",
            Algorithm::Vns => "vns",
            Algorithm::Sbvnds => "sbvnds",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| GridError::UnknownId {
                kind: "algorithm",
                id: s.to_string(),
            })
    }
}

/// Runs one algorithm. Standalone neighborhood search starts from the
/// greedy design.
pub fn run_algorithm(algorithm: Algorithm, problem: &Problem, params: &AlgoParams) -> Result<SolveReport, GridError> {
    match algorithm {
        Algorithm::Extensive => solve_extensive(problem, params),
        Algorithm::Sbd => solve_sbd(problem, params),
        Algorithm::Greedy => solve_greedy(problem, params),
        Algorithm::Sbvnds => solve_sbvnds(problem, params),
        Algorithm::Vns => {
            let clock = Clock::new(params.time_limit_seconds);
            let start = solve_greedy(problem, params)?;
            let Some(initial) = start.design else {
                return Ok(SolveReport {
                    algorithm: "vns".into(),
                    wall_time_seconds: clock.elapsed(),
                    ..start
                });
            };
            let rest = AlgoParams {
                time_limit_seconds: clock.remaining(),
                ..params.clone()
            };
            let mut report = solve_vns(problem, &initial, &rest)?;
            let mut trace = start.trace;
            trace.append(&mut report.trace);
            report.trace = trace;
            report.wall_time_seconds = clock.elapsed();
            Ok(report)
        }
    }
}

/// Settings of the neighborhood search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnsParams {
    pub max_restarts: usize,
    pub max_iterations: usize,
    pub max_time_seconds: f64,
    /// Neighborhood growth divisor.
    pub d: usize,
    pub shuffle_seed: u64,
    /// Stop as soon as the incumbent matches the LP relaxation bound.
    pub stop_at_lp_bound: bool,
}

impl Default for VnsParams {
    fn default() -> Self {
        Self {
            max_restarts: 10,
            max_iterations: 4,
            max_time_seconds: 48.0 * 3600.0,
            d: 2,
            shuffle_seed: 0,
            stop_at_lp_bound: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub time_limit_seconds: f64,
    /// Relative optimality gap handed to every exact MIP solve.
    pub mip_gap: f64,
    /// Fraction of scenarios whose service targets may be violated.
    pub epsilon: f64,
    /// Scenarios the decompositions start from.
    pub initial_scenarios: Vec<usize>,
    pub vns: VnsParams,
    pub max_cycles: usize,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            time_limit_seconds: 3600.0,
            mip_gap: 1e-9,
            epsilon: 0.0,
            initial_scenarios: vec![0],
            vns: VnsParams::default(),
            max_cycles: DEFAULT_MAX_CYCLES,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    /// Proven optimal.
    Optimal,
    /// Meets every requirement, optimality not proven.
    Feasible,
    Infeasible,
    TimeLimit,
}

/// One step of an algorithm, serialised as a tagged JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    MasterSolved {
        scenarios: Vec<usize>,
        objective: Option<f64>,
        status: String,
    },
    ScenarioAdded {
        scenario: usize,
        l_value: f64,
    },
    SingleScenario {
        scenario: usize,
        objective: f64,
    },
    SwitchesAdded {
        scenario: usize,
        edges: Vec<String>,
    },
    LpRelaxation {
        objective: f64,
        divergent: usize,
    },
    Neighborhood {
        restart: usize,
        iteration: usize,
        fixed: usize,
        free: usize,
        objective: Option<f64>,
        accepted: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub algorithm: String,
    pub status: ReportStatus,
    /// Investment cost of `design`.
    pub objective: Option<f64>,
    /// Best proven lower bound, when the algorithm has one.
    pub bound: Option<f64>,
    pub design: Option<Design>,
    /// Pricing of the design on every scenario.
    pub per_scenario: Vec<PricingResult>,
    /// Scenarios whose targets the design misses; at most the chance
    /// budget for a design the algorithm accepted.
    pub excused: Vec<usize>,
    /// Scenarios in the final decomposition master, in insertion order.
    pub master_scenarios: Vec<usize>,
    pub trace: Vec<TraceEvent>,
    pub wall_time_seconds: f64,
}

impl SolveReport {
    pub fn violated(&self) -> Vec<usize> {
        self.per_scenario.iter().filter(|p| !p.is_feasible()).map(|p| p.scenario).collect()
    }

    pub fn scenarios_added(&self) -> usize {
        self.trace
            .iter()
            .filter(|e| matches!(e, TraceEvent::ScenarioAdded { .. }))
            .count()
    }
}

/// A validated instance, its scenarios and its cycle structure.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    pub instance: &'a NetworkInstance,
    pub scenarios: &'a ScenarioSet,
    pub cycles: CycleSet,
}

impl<'a> Problem<'a> {
    pub fn new(instance: &'a NetworkInstance, scenarios: &'a ScenarioSet, max_cycles: usize) -> Result<Self, GridError> {
        let report = validate_instance(instance);
        if !report.is_empty() {
            return Err(GridError::InvalidInstance(report));
        }
        scenarios.validate(instance)?;
        let cycles = enumerate_cycles(instance, max_cycles)?;
        Ok(Self {
            instance,
            scenarios,
            cycles,
        })
    }

    pub fn scenario(&self, id: usize) -> &Scenario {
        &self.scenarios.scenarios[id]
    }

    pub fn budget(&self, epsilon: f64) -> usize {
        chance_budget(epsilon, self.scenarios.len())
    }

    fn subset(&self, ids: &[usize]) -> Vec<Scenario> {
        ids.iter().map(|&i| self.scenarios.scenarios[i].clone()).collect()
    }

    /// Master over the given scenarios, relaxed when `budget` is given.
    pub fn master(&self, ids: &[usize], budget: Option<usize>) -> Result<MasterModel, GridError> {
        let mut master = build_master(self.instance, &self.subset(ids), &self.cycles)?;
        if let Some(b) = budget {
            apply_chance_relaxation(&mut master, b);
        }
        Ok(master)
    }
}

/// Wall-clock budget shared by the steps of one algorithm run.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Clock {
    start: Instant,
    limit: f64,
}

impl Clock {
    pub fn new(limit: f64) -> Self {
        Self {
            start: Instant::now(),
            limit,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn remaining(&self) -> f64 {
        (self.limit - self.elapsed()).max(0.0)
    }

    pub fn expired(&self) -> bool {
        self.remaining() <= 0.0
    }
}

pub(crate) fn mip_params(params: &AlgoParams, time: f64) -> SolveParams {
    SolveParams {
        time_limit_seconds: time,
        mip_gap: params.mip_gap,
        ..SolveParams::default()
    }
}

pub(crate) fn status_name(status: SolveStatus) -> String {
    format!("{status:?}")
}

/// Outcome of one master solve.
pub(crate) struct MasterRun {
    pub master: MasterModel,
    pub solution: MipSolution,
}

impl MasterRun {
    pub fn design(&self) -> Option<Design> {
        self.solution.has_solution().then(|| self.master.design(&self.solution.values))
    }
}

pub(crate) fn solve_master(
    problem: &Problem,
    ids: &[usize],
    budget: Option<usize>,
    params: &SolveParams,
) -> Result<MasterRun, GridError> {
    let master = problem.master(ids, budget)?;
    let solution = solve_mip(&master.model, params);
    if solution.status == SolveStatus::NumericalFailure && !solution.has_solution() {
        return Err(GridError::Solver(format!("master over {ids:?} failed numerically")));
    }
    Ok(MasterRun { master, solution })
}

/// Prices `design` on each listed scenario, in parallel, returned in the
/// order given.
pub fn price_many(problem: &Problem, design: &Design, ids: &[usize], time: f64) -> Result<Vec<PricingResult>, GridError> {
    let params = SolveParams {
        time_limit_seconds: time,
        ..SolveParams::default()
    };
    ids.par_iter()
        .map(|&i| price_scenario(problem.instance, problem.scenario(i), design, &problem.cycles, &params))
        .collect()
}

/// One pricing result per scenario, in scenario order.
pub fn evaluate_design(problem: &Problem, design: &Design) -> Result<Vec<PricingResult>, GridError> {
    let ids: Vec<usize> = (0..problem.scenarios.len()).collect();
    price_many(problem, design, &ids, f64::INFINITY)
}

/// Highest shortfall among the results, ties to the lowest scenario id.
pub(crate) fn worst(results: &[PricingResult]) -> Option<&PricingResult> {
    results
        .iter()
        .filter(|r| !r.is_feasible())
        .fold(None, |best: Option<&PricingResult>, r| match best {
            Some(b) if b.l_value > r.l_value || (b.l_value == r.l_value && b.scenario < r.scenario) => Some(b),
            _ => Some(r),
        })
}

pub(crate) struct Finish {
    pub algorithm: &'static str,
    pub status: ReportStatus,
    pub design: Option<Design>,
    pub bound: Option<f64>,
    pub master_scenarios: Vec<usize>,
    pub trace: Vec<TraceEvent>,
}

/// Prices the final design on every scenario and assembles the report.
pub(crate) fn finish(problem: &Problem, clock: &Clock, f: Finish) -> Result<SolveReport, GridError> {
    let per_scenario = match &f.design {
        Some(d) => evaluate_design(problem, d)?,
        None => Vec::new(),
    };
    let excused = per_scenario.iter().filter(|p| !p.is_feasible()).map(|p| p.scenario).collect();
    Ok(SolveReport {
        algorithm: f.algorithm.to_string(),
        status: f.status,
        objective: f.design.as_ref().map(|d| d.cost(problem.instance)),
        bound: f.bound,
        design: f.design,
        per_scenario,
        excused,
        master_scenarios: f.master_scenarios,
        trace: f.trace,
        wall_time_seconds: clock.elapsed(),
    })
}
