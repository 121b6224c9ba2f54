//! Ice-storm damage scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::grid::NetworkInstance;

/// Name of the generator recorded alongside sampled scenario sets.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Default number of sampled scenarios.
pub const DEFAULT_SCENARIO_COUNT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DamageModel {
    /// Probability that a one-mile segment fails.
    pub per_mile_probability: f64,
    /// Failure rate of hardened lines relative to unhardened ones.
    pub hardened_rate_ratio: f64,
    pub rng_seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: usize,
    /// Edge indices that fail unless hardened, ascending.
    pub damaged: Vec<usize>,
    /// Edge indices that fail even when hardened; a subset of `damaged`.
    pub hardened_damaged: Vec<usize>,
}

impl Scenario {
    pub fn benign(id: usize) -> Self {
        Self {
            id,
            ..Self::default()
        }
    }

    pub fn is_damaged(&self, edge: usize) -> bool {
        self.damaged.binary_search(&edge).is_ok()
    }

    pub fn is_hardened_damaged(&self, edge: usize) -> bool {
        self.hardened_damaged.binary_search(&edge).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSource {
    Sampled {
        model: DamageModel,
        rng: String,
    },
    UserProvided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
    pub source: ScenarioSource,
}

impl ScenarioSet {
    /// Wraps hand-built scenarios, renumbering ids and sorting edge lists.
    pub fn user_provided(mut scenarios: Vec<Scenario>) -> Self {
        for (i, s) in scenarios.iter_mut().enumerate() {
            s.id = i;
            s.damaged.sort_unstable();
            s.damaged.dedup();
            s.hardened_damaged.sort_unstable();
            s.hardened_damaged.dedup();
        }
        Self {
            scenarios,
            source: ScenarioSource::UserProvided,
        }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// Checks ids, edge references and the nesting of the two damage sets.
    pub fn validate(&self, instance: &NetworkInstance) -> Result<(), GridError> {
        let m = instance.edges.len();
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.id != i {
                return Err(GridError::Domain(format!("scenario at position {i} has id {}", s.id)));
            }
            let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
            if !sorted(&s.damaged) || !sorted(&s.hardened_damaged) {
                return Err(GridError::Domain(format!("scenario {i} edge lists must be strictly ascending")));
            }
            if let Some(&e) = s.damaged.iter().chain(&s.hardened_damaged).find(|&&e| e >= m) {
                return Err(GridError::UnknownScenarioEdge {
                    scenario: i,
                    edge: format!("#{e}"),
                });
            }
            if s.hardened_damaged.iter().any(|e| !s.is_damaged(*e)) {
                return Err(GridError::Domain(format!(
                    "scenario {i}: hardened-damaged edges must also be damaged"
                )));
            }
        }
        Ok(())
    }
}

/// Failure probability of a line made of independent one-mile segments.
pub fn line_failure_probability(per_mile: f64, length_miles: f64) -> Result<f64, GridError> {
    if !(0.0..=1.0).contains(&per_mile) {
        return Err(GridError::Domain(format!("per-mile probability {per_mile} outside [0, 1]")));
    }
    if !(length_miles >= 0.0 && length_miles.is_finite()) {
        return Err(GridError::Domain(format!("line length {length_miles} must be finite and nonnegative")));
    }
    if length_miles == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - (1.0 - per_mile).powf(length_miles))
}

/// Draws `count` scenarios. One uniform number per (scenario, edge) decides
/// both damage sets, which keeps hardened damage nested in damage.
pub fn sample_scenarios(instance: &NetworkInstance, model: &DamageModel, count: usize) -> Result<ScenarioSet, GridError> {
    if !(0.0..=1.0).contains(&model.hardened_rate_ratio) {
        return Err(GridError::Domain(format!(
            "hardened rate ratio {} outside [0, 1]",
            model.hardened_rate_ratio
        )));
    }
    let probs = instance
        .edges
        .iter()
        .map(|e| {
            let p = line_failure_probability(model.per_mile_probability, e.length_miles)?;
            let ph = line_failure_probability(model.per_mile_probability * model.hardened_rate_ratio, e.length_miles)?;
            Ok((p, ph))
        })
        .collect::<Result<Vec<_>, GridError>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.rng_seed);
    let scenarios = (0..count)
        .map(|id| {
            let mut s = Scenario::benign(id);
            for (e, &(p, ph)) in probs.iter().enumerate() {
                let u: f64 = rng.gen();
                if u < p {
                    s.damaged.push(e);
                }
                if u < ph {
                    s.hardened_damaged.push(e);
                }
            }
            s
        })
        .collect();
    Ok(ScenarioSet {
        scenarios,
        source: ScenarioSource::Sampled {
            model: *model,
            rng: RNG_ALGORITHM.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_probability_examples() {
        assert!((line_failure_probability(0.1, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(line_failure_probability(0.7, 0.0).unwrap(), 0.0);
        assert!((line_failure_probability(0.1, 2.0).unwrap() - 0.19).abs() < 1e-15);
        assert!(line_failure_probability(1.5, 1.0).is_err());
        assert!(line_failure_probability(-0.1, 1.0).is_err());
    }
}
