//! Sensitivity sweeps: re-solve while one parameter walks a grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{run_algorithm, AlgoParams, Algorithm, Problem, ReportStatus};
use crate::error::GridError;
use crate::grid::NetworkInstance;
use crate::scenario::{sample_scenarios, DamageModel, ScenarioSet, ScenarioSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Required served fraction of critical load.
    Lambda,
    /// Chance-constraint fraction.
    Epsilon,
    /// Per-mile line failure probability; scenarios are re-sampled.
    Damage,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::Lambda => "lambda",
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::Damage => "damage",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lambda" => Ok(SweepParameter::Lambda),
            "epsilon" => Ok(SweepParameter::Epsilon),
            "damage" | "per_mile_probability" => Ok(SweepParameter::Damage),
            other => Err(GridError::UnknownId {
                kind: "sweep parameter",
                id: other.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    /// Strictly increasing.
    pub grid: Vec<f64>,
    pub algorithm: Algorithm,
    /// Seed for re-sampled scenarios in damage sweeps.
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.grid.is_empty() {
            return Err(GridError::Domain("sweep grid is empty".into()));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GridError::Domain("sweep grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub objective: Option<f64>,
    pub cpu_seconds: f64,
    pub status: String,
}

fn status_label(status: ReportStatus) -> String {
    serde_json::to_value(status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Solves once per grid value, in grid order. A failed row records its
/// error as the status and the sweep moves on.
pub fn run_sweep(
    instance: &NetworkInstance,
    scenarios: &ScenarioSet,
    spec: &SweepSpec,
    params: &AlgoParams,
) -> Result<Vec<SweepRow>, GridError> {
    spec.validate()?;
    let damage_model = match (&scenarios.source, spec.parameter) {
        (ScenarioSource::Sampled { model, .. }, SweepParameter::Damage) => Some(*model),
        (ScenarioSource::UserProvided, SweepParameter::Damage) => {
            return Err(GridError::Domain(
                "damage sweeps need sampled scenarios to re-sample from".into(),
            ))
        }
        _ => None,
    };
    let mut rows = Vec::with_capacity(spec.grid.len());
    for &value in &spec.grid {
        let mut inst = instance.clone();
        let mut p = params.clone();
        let mut set = None;
        match spec.parameter {
            SweepParameter::Lambda => inst.critical_fraction = value,
            SweepParameter::Epsilon => p.epsilon = value,
            SweepParameter::Damage => {
                let model = DamageModel {
                    per_mile_probability: value,
                    rng_seed: spec.seed,
                    ..damage_model.expect("checked above")
                };
                set = Some(sample_scenarios(&inst, &model, scenarios.len())?);
            }
        }
        let set = set.as_ref().unwrap_or(scenarios);
        let outcome = Problem::new(&inst, set, p.max_cycles).and_then(|problem| run_algorithm(spec.algorithm, &problem, &p));
        rows.push(match outcome {
            Ok(r) => SweepRow {
                parameter: spec.parameter.to_string(),
                value,
                objective: r.objective,
                cpu_seconds: r.wall_time_seconds,
                status: status_label(r.status),
            },
            Err(e) => SweepRow {
                parameter: spec.parameter.to_string(),
                value,
                objective: None,
                cpu_seconds: 0.0,
                status: format!("error: {e}"),
            },
        });
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: [&str; 5] = ["parameter", "value", "objective", "cpu_seconds", "status"];

pub fn sweep_to_csv(rows: &[SweepRow], include_timing: bool) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.parameter.clone(),
            r.value.to_string(),
            r.objective.map(|o| o.to_string()).unwrap_or_default(),
            if include_timing { r.cpu_seconds.to_string() } else { String::new() },
            r.status.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
