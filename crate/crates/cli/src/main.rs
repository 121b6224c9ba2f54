use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gridforge::algorithms::{evaluate_design, run_algorithm, AlgoParams, Algorithm, Problem};
use gridforge::formulation::{apply_chance_relaxation, build_master};
use gridforge::io::{load_design, load_instance, load_scenarios, save_instance, save_results, save_scenarios};
use gridforge::milp::export_mps;
use gridforge::scenario::{sample_scenarios, DamageModel, DEFAULT_SCENARIO_COUNT};
use gridforge::sweep::{run_sweep, sweep_to_csv, SweepParameter, SweepSpec};
use gridforge::synthetic::{generate_synthetic, Profile};
use gridforge::{NetworkInstance, ScenarioSet, DEFAULT_MAX_CYCLES};

#[derive(Parser)]
#[command(name = "gridforge", version, about = "Resilient distribution grid upgrade planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multi-feeder instance.
    Generate {
        #[arg(long)]
        profile: Profile,
        #[arg(long)]
        feeders: usize,
        #[arg(long = "buses-per-feeder")]
        buses_per_feeder: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o')]
        output: PathBuf,
    },
    /// Sample damage scenarios for an instance.
    Scenarios {
        #[arg(long = "per-mile")]
        per_mile: f64,
        #[arg(long = "hardened-ratio")]
        hardened_ratio: f64,
        #[arg(long, default_value_t = DEFAULT_SCENARIO_COUNT)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'i')]
        instance: PathBuf,
        #[arg(short = 'o')]
        output: PathBuf,
    },
    /// Compute a design and write the report as JSON plus CSV.
    Solve {
        #[arg(long)]
        algorithm: Algorithm,
        #[command(flatten)]
        tuning: Tuning,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'o')]
        output: PathBuf,
        /// Leave wall-clock times out so reruns are byte-identical.
        #[arg(long = "no-timing")]
        no_timing: bool,
    },
    /// Price a design on every scenario and print the results as JSON.
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'd')]
        design: PathBuf,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Re-solve over a grid of parameter values and write a CSV.
    Sweep {
        #[arg(long)]
        param: SweepParameter,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Vec<f64>,
        #[arg(long)]
        algorithm: Algorithm,
        /// Seed for re-sampled scenarios in damage sweeps.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tuning: Tuning,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short = 'o')]
        output: PathBuf,
        #[arg(long = "no-timing")]
        no_timing: bool,
    },
    /// Write the extensive-form model in fixed MPS format.
    ExportMps {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(short = 'o')]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(short = 'i')]
    instance: PathBuf,
    /// Scenario file; defaults to the set embedded in the instance.
    #[arg(short = 's')]
    scenarios: Option<PathBuf>,
}

#[derive(Args)]
struct Tuning {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
}

impl Tuning {
    fn apply(&self, instance: &mut NetworkInstance) -> AlgoParams {
        if let Some(l) = self.lambda {
            instance.critical_fraction = l;
        }
        if let Some(g) = self.gamma {
            instance.total_fraction = g;
        }
        let mut params = AlgoParams::default();
        if let Some(e) = self.epsilon {
            params.epsilon = e;
        }
        if let Some(t) = self.time_limit {
            params.time_limit_seconds = t;
        }
        params
    }
}

fn read_inputs(inputs: &Inputs) -> Result<(NetworkInstance, ScenarioSet)> {
    let (instance, embedded) =
        load_instance(&inputs.instance).with_context(|| format!("reading {}", inputs.instance.display()))?;
    let scenarios = match (&inputs.scenarios, embedded) {
        (Some(path), _) => load_scenarios(path, &instance).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(set)) => set,
        (None, None) => bail!("no scenario file given and the instance embeds none"),
    };
    Ok((instance, scenarios))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate {
            profile,
            feeders,
            buses_per_feeder,
            seed,
            output,
        } => {
            let instance = generate_synthetic(profile, feeders, buses_per_feeder, seed)?;
            save_instance(&output, &instance, None)?;
        }
        Command::Scenarios {
            per_mile,
            hardened_ratio,
            count,
            seed,
            instance,
            output,
        } => {
            let (instance, _) = load_instance(&instance)?;
            let model = DamageModel {
                per_mile_probability: per_mile,
                hardened_rate_ratio: hardened_ratio,
                rng_seed: seed,
            };
            let set = sample_scenarios(&instance, &model, count)?;
            save_scenarios(&output, &instance, &set)?;
        }
        Command::Solve {
            algorithm,
            tuning,
            inputs,
            output,
            no_timing,
        } => {
            let (mut instance, scenarios) = read_inputs(&inputs)?;
            let params = tuning.apply(&mut instance);
            let problem = Problem::new(&instance, &scenarios, params.max_cycles)?;
            let report = run_algorithm(algorithm, &problem, &params)?;
            save_results(&output, &instance, &report, !no_timing)?;
            println!(
                "{} {:?} objective={}",
                report.algorithm,
                report.status,
                report.objective.map_or("none".to_string(), |o| o.to_string())
            );
        }
        Command::Evaluate { inputs, design, output } => {
            let (instance, scenarios) = read_inputs(&inputs)?;
            let problem = Problem::new(&instance, &scenarios, DEFAULT_MAX_CYCLES)?;
            let design = load_design(&design, &instance)?;
            let results = evaluate_design(&problem, &design)?;
            let mut text = serde_json::to_string_pretty(&results)?;
            text.push('\n');
            match output {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Sweep {
            param,
            grid,
            algorithm,
            seed,
            tuning,
            inputs,
            output,
            no_timing,
        } => {
            let (mut instance, scenarios) = read_inputs(&inputs)?;
            let params = tuning.apply(&mut instance);
            let spec = SweepSpec {
                parameter: param,
                grid,
                algorithm,
                seed,
            };
            let rows = run_sweep(&instance, &scenarios, &spec, &params)?;
            write(&output, &sweep_to_csv(&rows, !no_timing)?)?;
        }
        Command::ExportMps { inputs, epsilon, output } => {
            let (instance, scenarios) = read_inputs(&inputs)?;
            let cycles = gridforge::enumerate_cycles(&instance, DEFAULT_MAX_CYCLES)?;
            let mut master = build_master(&instance, &scenarios.scenarios, &cycles)?;
            if let Some(e) = epsilon.filter(|&e| e > 0.0) {
                let budget = gridforge::formulation::chance_budget(e, scenarios.len());
                apply_chance_relaxation(&mut master, budget);
            }
            write(&output, &export_mps(&master.model)?)?;
        }
    }
    Ok(())
}
