//! JSON files for instances, scenario sets, designs and reports, plus the
//! CSV summaries.
//!
//! Files reference edges and buses by id. Every document carries a
//! `schema_version`, checked before anything else is read.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{ReportStatus, SolveReport, TraceEvent};
use crate::error::GridError;
use crate::formulation::{Design, PricingResult};
use crate::grid::{validate_instance, Bus, Edge, NetworkInstance, PerPhase};
use crate::scenario::{Scenario, ScenarioSet, ScenarioSource};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("parse error at {section} (line {line}, column {column}): {message}")]
    Parse {
        /// Path of the value being read, e.g. `edges[3].capacity`.
        section: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema version {found:?} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: Option<u64>, expected: u32 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    /// Required served fraction of critical load.
    pub lambda: f64,
    /// Required served fraction of non-critical load.
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub id: usize,
    pub damaged: Vec<String>,
    #[serde(default)]
    pub hardened_damaged: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub source: ScenarioSource,
    pub scenarios: Vec<ScenarioRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub parameters: Parameters,
    pub buses: Vec<Bus>,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<ScenarioFile>,
}

/// Upgrades of a design, listed by id. Existing equipment is implied.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub schema_version: u32,
    #[serde(default)]
    pub lines_built: Vec<String>,
    #[serde(default)]
    pub switches_built: Vec<String>,
    #[serde(default)]
    pub hardened: Vec<String>,
    #[serde(default)]
    pub facilities: Vec<String>,
    /// New capacity per phase at each built facility.
    #[serde(default)]
    pub capacity: BTreeMap<String, PerPhase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub instance: String,
    pub algorithm: String,
    pub status: ReportStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub design: Option<DesignFile>,
    pub excused: Vec<usize>,
    pub master_scenarios: Vec<usize>,
    pub per_scenario: Vec<PricingResult>,
    pub trace: Vec<TraceEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn typed<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let section = e.path().to_string();
        let inner = e.into_inner();
        IoError::Parse {
            section,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| IoError::Parse {
        section: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

/// Parses a versioned JSON document. A document that is not valid JSON
/// reports the section where reading stopped.
pub fn parse_versioned<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let Ok(value) = serde_json::from_str::<serde_json::Value>(text) else {
        return typed(text);
    };
    let found = value.get("schema_version").and_then(serde_json::Value::as_u64);
    if found != Some(u64::from(SCHEMA_VERSION)) {
        return Err(IoError::SchemaVersionMismatch {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    typed(text)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s
}

pub fn scenarios_to_file(instance: &NetworkInstance, set: &ScenarioSet) -> ScenarioFile {
    let ids = |v: &[usize]| v.iter().map(|&k| instance.edges[k].id.clone()).collect();
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        source: set.source.clone(),
        scenarios: set
            .scenarios
            .iter()
            .map(|s| ScenarioRecord {
                id: s.id,
                damaged: ids(&s.damaged),
                hardened_damaged: ids(&s.hardened_damaged),
            })
            .collect(),
    }
}

pub fn scenarios_from_file(instance: &NetworkInstance, file: &ScenarioFile) -> Result<ScenarioSet, GridError> {
    let index = instance.edge_index();
    let mut scenarios = Vec::with_capacity(file.scenarios.len());
    for r in &file.scenarios {
        let resolve = |names: &[String]| -> Result<Vec<usize>, GridError> {
            let mut out = names
                .iter()
                .map(|n| {
                    index.get(n.as_str()).copied().ok_or_else(|| GridError::UnknownScenarioEdge {
                        scenario: r.id,
                        edge: n.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.sort_unstable();
            out.dedup();
            Ok(out)
        };
        scenarios.push(Scenario {
            id: r.id,
            damaged: resolve(&r.damaged)?,
            hardened_damaged: resolve(&r.hardened_damaged)?,
        });
    }
    let set = ScenarioSet {
        scenarios,
        source: file.source.clone(),
    };
    set.validate(instance)?;
    Ok(set)
}

pub fn instance_to_file(instance: &NetworkInstance, scenarios: Option<&ScenarioSet>) -> InstanceFile {
    InstanceFile {
        schema_version: SCHEMA_VERSION,
        name: instance.name.clone(),
        parameters: Parameters {
            lambda: instance.critical_fraction,
            gamma: instance.total_fraction,
        },
        buses: instance.buses.clone(),
        edges: instance.edges.clone(),
        scenarios: scenarios.map(|s| scenarios_to_file(instance, s)),
    }
}

/// Validated instance and, when embedded, its scenario set.
pub fn instance_from_file(file: InstanceFile) -> Result<(NetworkInstance, Option<ScenarioSet>), GridError> {
    let instance = NetworkInstance {
        name: file.name,
        buses: file.buses,
        edges: file.edges,
        critical_fraction: file.parameters.lambda,
        total_fraction: file.parameters.gamma,
    };
    let report = validate_instance(&instance);
    if !report.is_empty() {
        return Err(GridError::InvalidInstance(report));
    }
    let scenarios = file.scenarios.map(|s| scenarios_from_file(&instance, &s)).transpose()?;
    Ok((instance, scenarios))
}

pub fn instance_to_json(instance: &NetworkInstance, scenarios: Option<&ScenarioSet>) -> String {
    to_json(&instance_to_file(instance, scenarios))
}

pub fn instance_from_json(text: &str) -> Result<(NetworkInstance, Option<ScenarioSet>), IoError> {
    Ok(instance_from_file(parse_versioned(text)?)?)
}

pub fn load_instance(path: &Path) -> Result<(NetworkInstance, Option<ScenarioSet>), IoError> {
    instance_from_json(&read_file(path)?)
}

pub fn save_instance(path: &Path, instance: &NetworkInstance, scenarios: Option<&ScenarioSet>) -> Result<(), IoError> {
    write_file(path, &instance_to_json(instance, scenarios))
}

pub fn scenarios_to_json(instance: &NetworkInstance, set: &ScenarioSet) -> String {
    to_json(&scenarios_to_file(instance, set))
}

pub fn scenarios_from_json(instance: &NetworkInstance, text: &str) -> Result<ScenarioSet, IoError> {
    Ok(scenarios_from_file(instance, &parse_versioned(text)?)?)
}

pub fn load_scenarios(path: &Path, instance: &NetworkInstance) -> Result<ScenarioSet, IoError> {
    scenarios_from_json(instance, &read_file(path)?)
}

pub fn save_scenarios(path: &Path, instance: &NetworkInstance, set: &ScenarioSet) -> Result<(), IoError> {
    write_file(path, &scenarios_to_json(instance, set))
}

pub fn design_to_file(instance: &NetworkInstance, design: &Design) -> DesignFile {
    let mut f = DesignFile {
        schema_version: SCHEMA_VERSION,
        ..DesignFile::default()
    };
    for (k, e) in instance.edges.iter().enumerate() {
        if design.line_built[k] && !e.exists {
            f.lines_built.push(e.id.clone());
        }
        if design.switch_built[k] && !e.has_existing_switch {
            f.switches_built.push(e.id.clone());
        }
        if design.hardened[k] {
            f.hardened.push(e.id.clone());
        }
    }
    for (i, b) in instance.buses.iter().enumerate() {
        if design.facility_built[i] {
            f.facilities.push(b.id.clone());
            f.capacity.insert(b.id.clone(), design.new_capacity[i]);
        }
    }
    f
}

pub fn design_from_file(instance: &NetworkInstance, file: &DesignFile) -> Result<Design, GridError> {
    let edges = instance.edge_index();
    let buses = instance.bus_index();
    let lookup = |map: &HashMap<&str, usize>, kind: &'static str, id: &str| {
        map.get(id).copied().ok_or_else(|| GridError::UnknownId { kind, id: id.to_string() })
    };
    let mut d = Design::existing(instance);
    for id in &file.lines_built {
        d.line_built[lookup(&edges, "edge", id)?] = true;
    }
    for id in &file.switches_built {
        d.switch_built[lookup(&edges, "edge", id)?] = true;
    }
    for id in &file.hardened {
        d.hardened[lookup(&edges, "edge", id)?] = true;
    }
    for id in &file.facilities {
        d.facility_built[lookup(&buses, "bus", id)?] = true;
    }
    for (id, cap) in &file.capacity {
        d.new_capacity[lookup(&buses, "bus", id)?] = *cap;
    }
    d.validate(instance)?;
    Ok(d)
}

pub fn load_design(path: &Path, instance: &NetworkInstance) -> Result<Design, IoError> {
    let file: DesignFile = parse_versioned(&read_file(path)?)?;
    Ok(design_from_file(instance, &file)?)
}

pub fn save_design(path: &Path, instance: &NetworkInstance, design: &Design) -> Result<(), IoError> {
    write_file(path, &to_json(&design_to_file(instance, design)))
}

/// The report as written to disk. Without timing the output depends only
/// on the inputs.
pub fn report_to_file(instance: &NetworkInstance, report: &SolveReport, include_timing: bool) -> ReportFile {
    ReportFile {
        schema_version: SCHEMA_VERSION,
        instance: instance.name.clone(),
        algorithm: report.algorithm.clone(),
        status: report.status,
        objective: report.objective,
        bound: report.bound,
        design: report.design.as_ref().map(|d| design_to_file(instance, d)),
        excused: report.excused.clone(),
        master_scenarios: report.master_scenarios.clone(),
        per_scenario: report.per_scenario.clone(),
        trace: report.trace.clone(),
        wall_time_seconds: include_timing.then_some(report.wall_time_seconds),
    }
}

pub fn report_to_json(instance: &NetworkInstance, report: &SolveReport, include_timing: bool) -> String {
    to_json(&report_to_file(instance, report, include_timing))
}

pub const REPORT_CSV_HEADER: [&str; 8] = [
    "row",
    "scenario",
    "objective",
    "cpu_seconds",
    "status",
    "l_value",
    "served_critical_fraction",
    "served_total_fraction",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn status_label(status: ReportStatus) -> String {
    serde_json::to_value(status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// One summary row, then one row per priced scenario.
pub fn report_to_csv(report: &SolveReport, include_timing: bool) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_CSV_HEADER)?;
    let cpu = if include_timing { report.wall_time_seconds.to_string() } else { String::new() };
    w.write_record([
        "summary".to_string(),
        String::new(),
        opt(report.objective),
        cpu,
        status_label(report.status),
        String::new(),
        String::new(),
        String::new(),
    ])?;
    for p in &report.per_scenario {
        w.write_record([
            "scenario".to_string(),
            p.scenario.to_string(),
            String::new(),
            String::new(),
            String::new(),
            p.l_value.to_string(),
            p.served_critical_fraction.to_string(),
            p.served_total_fraction.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `<path>` as JSON and the CSV next to it with a `.csv` extension.
pub fn save_results(path: &Path, instance: &NetworkInstance, report: &SolveReport, include_timing: bool) -> Result<(), IoError> {
    write_file(path, &report_to_json(instance, report, include_timing))?;
    write_file(&path.with_extension("csv"), &report_to_csv(report, include_timing)?)
}
