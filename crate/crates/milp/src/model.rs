//! Model container for mixed-integer linear programs.

use std::collections::HashMap;
use std::fmt;

use crate::error::MilpError;
use crate::scalar::Scalar;

/// Index of a variable inside a [`Model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Index of a constraint inside a [`Model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A decision variable. `None` bounds are infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct Variable<S> {
    pub name: String,
    pub lower: Option<S>,
    pub upper: Option<S>,
    pub kind: VarKind,
    /// Branch-and-bound considers fractional binaries of the highest
    /// priority class first. Defaults to 0.
    pub branch_priority: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<S> {
    pub name: String,
    pub terms: Vec<(VarId, S)>,
    pub relation: Relation,
    pub rhs: S,
}

/// A linear objective with an optimisation sense.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective<S> {
    pub sense: Sense,
    pub terms: Vec<(VarId, S)>,
}

/// A mixed-integer linear program over binaries and continuous variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<S> {
    pub name: String,
    pub variables: Vec<Variable<S>>,
    pub constraints: Vec<Constraint<S>>,
    pub objective: Objective<S>,
}

impl<S: Scalar> Default for Model<S> {
    fn default() -> Self {
        Self::new("model")
    }
}

impl<S: Scalar> Model<S> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense: Sense::Minimize,
                terms: Vec::new(),
            },
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: Option<S>,
        upper: Option<S>,
        kind: VarKind,
    ) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            kind,
            branch_priority: 0,
        });
        id
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: Option<S>, upper: Option<S>) -> VarId {
        self.add_var(name, lower, upper, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, Some(S::zero()), Some(S::one()), VarKind::Binary)
    }

    pub fn set_branch_priority(&mut self, var: VarId, priority: i32) {
        self.variables[var.0].branch_priority = priority;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, S)>,
        relation: Relation,
        rhs: S,
    ) -> ConstraintId {
        let id = ConstraintId(self.constraints.len());
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        id
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(VarId, S)>) {
        self.objective = Objective { sense, terms };
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn name_index(&self) -> HashMap<&str, VarId> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), VarId(i)))
            .collect()
    }

    /// Checks that binaries live in [0, 1], bounds are ordered and every
    /// term references a declared variable.
    pub fn validate(&self) -> Result<(), MilpError> {
        for v in &self.variables {
            if let (Some(l), Some(u)) = (&v.lower, &v.upper) {
                if l > u {
                    return Err(MilpError::InvalidBounds(v.name.clone()));
                }
            }
            if v.kind == VarKind::Binary {
                let lo_ok = v.lower.as_ref().is_some_and(|l| *l >= S::zero() && *l <= S::one());
                let hi_ok = v.upper.as_ref().is_some_and(|u| *u >= S::zero() && *u <= S::one());
                if !lo_ok || !hi_ok {
                    return Err(MilpError::InvalidBounds(v.name.clone()));
                }
            }
        }
        let n = self.variables.len();
        for c in &self.constraints {
            if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= n) {
                return Err(MilpError::UnknownVariable(format!("{}#{}", c.name, v.0)));
            }
        }
        if let Some((v, _)) = self.objective.terms.iter().find(|(v, _)| v.0 >= n) {
            return Err(MilpError::UnknownVariable(format!("objective#{}", v.0)));
        }
        Ok(())
    }

    /// Returns a copy where each fixed variable has `lower = upper = value`.
    pub fn fix_assignment(&self, fixes: &[(VarId, S)]) -> Result<Model<S>, MilpError> {
        let mut fixed = self.clone();
        for (var, value) in fixes {
            let v = fixed
                .variables
                .get_mut(var.0)
                .ok_or_else(|| MilpError::UnknownVariable(format!("#{}", var.0)))?;
            let below = v.lower.as_ref().is_some_and(|l| value < l);
            let above = v.upper.as_ref().is_some_and(|u| value > u);
            if below || above {
                return Err(MilpError::ValueOutOfBounds {
                    name: v.name.clone(),
                    value: value.to_f64_lossy(),
                });
            }
            v.lower = Some(value.clone());
            v.upper = Some(value.clone());
        }
        Ok(fixed)
    }

    /// Same as [`Model::fix_assignment`] but addressed by variable name.
    pub fn fix_by_name(&self, fixes: &[(&str, S)]) -> Result<Model<S>, MilpError> {
        let index = self.name_index();
        let resolved = fixes
            .iter()
            .map(|(name, value)| {
                index
                    .get(name)
                    .map(|id| (*id, value.clone()))
                    .ok_or_else(|| MilpError::UnknownVariable((*name).to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.fix_assignment(&resolved)
    }

    /// Objective value of an assignment in the model's own sense.
    pub fn objective_value(&self, values: &[S]) -> S {
        self.objective
            .terms
            .iter()
            .fold(S::zero(), |acc, (v, c)| acc + c.clone() * values[v.0].clone())
    }

    /// Largest absolute violation of any bound or constraint.
    pub fn max_violation(&self, values: &[S]) -> S {
        let mut worst = S::zero();
        let mut bump = |amount: S| {
            if amount > worst {
                worst = amount;
            }
        };
        for (v, x) in self.variables.iter().zip(values) {
            if let Some(l) = &v.lower {
                bump(l.clone() - x.clone());
            }
            if let Some(u) = &v.upper {
                bump(x.clone() - u.clone());
            }
        }
        for c in &self.constraints {
            let lhs = c
                .terms
                .iter()
                .fold(S::zero(), |acc, (v, a)| acc + a.clone() * values[v.0].clone());
            match c.relation {
                Relation::Le => bump(lhs - c.rhs.clone()),
                Relation::Ge => bump(c.rhs.clone() - lhs),
                Relation::Eq => bump((lhs - c.rhs.clone()).abs()),
            }
        }
        worst
    }

    /// Largest distance of a binary variable from {0, 1}.
    pub fn max_integrality_violation(&self, values: &[S]) -> S {
        let mut worst = S::zero();
        for (v, x) in self.variables.iter().zip(values) {
            if v.kind == VarKind::Binary {
                let d0 = x.abs();
                let d1 = (x.clone() - S::one()).abs();
                let d = if d0 < d1 { d0 } else { d1 };
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Copy of the model with every binary relaxed to a continuous variable.
    pub fn relaxed(&self) -> Model<S> {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.kind = VarKind::Continuous;
        }
        m
    }

    /// Lossy conversion to another scalar type.
    pub fn convert<T: Scalar>(&self) -> Model<T> {
        let cv = |x: &S| T::from_f64_lossy(x.to_f64_lossy());
        Model {
            name: self.name.clone(),
            variables: self
                .variables
                .iter()
                .map(|v| Variable {
                    name: v.name.clone(),
                    lower: v.lower.as_ref().map(cv),
                    upper: v.upper.as_ref().map(cv),
                    kind: v.kind,
                    branch_priority: v.branch_priority,
                })
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    name: c.name.clone(),
                    terms: c.terms.iter().map(|(v, a)| (*v, cv(a))).collect(),
                    relation: c.relation,
                    rhs: cv(&c.rhs),
                })
                .collect(),
            objective: Objective {
                sense: self.objective.sense,
                terms: self.objective.terms.iter().map(|(v, a)| (*v, cv(a))).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Model<f64> {
        let mut m = Model::new("small");
        let x = m.add_binary("x");
        let z = m.add_continuous("z", Some(0.0), Some(10.0));
        m.add_constraint("c", vec![(x, 1.0), (z, 1.0)], Relation::Le, 4.0);
        m.set_objective(Sense::Maximize, vec![(x, 1.0), (z, 1.0)]);
        m
    }

    #[test]
    fn fix_binary_sets_both_bounds() {
        let m = small().fix_assignment(&[(VarId(0), 1.0)]).unwrap();
        assert_eq!(m.variables[0].lower, Some(1.0));
        assert_eq!(m.variables[0].upper, Some(1.0));
    }

    #[test]
    fn fix_continuous_inside_bounds() {
        let m = small().fix_by_name(&[("z", 2.5)]).unwrap();
        assert_eq!(m.variables[1].lower, Some(2.5));
        assert_eq!(m.variables[1].upper, Some(2.5));
    }

    #[test]
    fn fix_rejects_unknown_and_out_of_range() {
        let m = small();
        assert!(matches!(
            m.fix_assignment(&[(VarId(7), 0.0)]),
            Err(MilpError::UnknownVariable(_))
        ));
        assert!(matches!(
            m.fix_by_name(&[("z", 11.0)]),
            Err(MilpError::ValueOutOfBounds { .. })
        ));
        assert!(matches!(m.fix_by_name(&[("nope", 1.0)]), Err(MilpError::UnknownVariable(_))));
    }

    #[test]
    fn validate_catches_bad_binary_and_dangling_term() {
        let mut m = small();
        m.variables[0].upper = Some(2.0);
        assert!(m.validate().is_err());
        let mut m = small();
        m.add_constraint("bad", vec![(VarId(9), 1.0)], Relation::Le, 1.0);
        assert!(matches!(m.validate(), Err(MilpError::UnknownVariable(_))));
    }

    #[test]
    fn violation_measures() {
        let m = small();
        assert_eq!(m.max_violation(&[1.0, 3.0]), 0.0);
        assert_eq!(m.max_violation(&[1.0, 5.0]), 2.0);
        assert!((m.max_integrality_violation(&[0.3, 0.0]) - 0.3).abs() < 1e-12);
    }
}
