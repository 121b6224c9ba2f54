//! Minimum-cost upgrade planning for distribution grids that must keep
//! serving critical load across sampled damage scenarios.

pub mod algorithms;
pub mod cycles;
pub mod error;
pub mod fixtures;
pub mod formulation;
pub mod grid;
pub mod io;
pub mod scenario;
pub mod sweep;
pub mod synthetic;

pub use cycles::{enumerate_cycles, CycleSet, DEFAULT_MAX_CYCLES};
pub use error::GridError;
pub use formulation::{Design, PricingResult, ScenarioOperation};
pub use grid::{validate_instance, Bus, Edge, GenerationSite, LoadBlock, NetworkInstance, Phase, PhaseSet};
pub use scenario::{line_failure_probability, sample_scenarios, DamageModel, Scenario, ScenarioSet};
pub use algorithms::{run_algorithm, AlgoParams, Algorithm, Problem, ReportStatus, SolveReport, VnsParams};
pub use io::{load_instance, load_scenarios, IoError, SCHEMA_VERSION};
pub use sweep::{run_sweep, SweepParameter, SweepRow, SweepSpec};
pub use synthetic::{generate_synthetic, random_case, Profile};
pub use gridforge_milp as milp;
