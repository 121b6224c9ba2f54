#![allow(dead_code)]

use gridforge_milp::{BigRational, Model, Relation, Sense, VarKind};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

fn qf(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap()
}

/// The model behind `fixtures/golden.mps`.
pub fn golden_model() -> Model<f64> {
    let mut m = Model::<f64>::new("golden");
    let x = m.add_continuous("x", Some(0.0), None);
    let y = m.add_binary("y");
    let z = m.add_continuous("z", Some(-2.0), Some(5.0));
    let w = m.add_continuous("w", None, None);
    m.add_continuous("v", Some(1.0), Some(1.0));
    m.add_constraint("cap", vec![(x, 1.0), (y, 2.0), (z, -1.0)], Relation::Le, 4.0);
    m.add_constraint("demand", vec![(x, 1.0), (w, 1.0)], Relation::Ge, 1.0);
    m.add_constraint("balance", vec![(y, 1.0), (z, 1.0)], Relation::Eq, 2.5);
    m.set_objective(Sense::Minimize, vec![(x, 3.0), (y, 1.5)]);
    m
}

/// Random model with small integer data. Continuous variables always have
/// finite bounds so the feasible region is a polytope.
pub fn random_model(rng: &mut ChaCha8Rng, n_bin: usize, n_cont: usize, n_rows: usize) -> Model<f64> {
    let mut m = Model::<f64>::new("rnd");
    for i in 0..n_bin {
        m.add_binary(format!("b{i}"));
    }
    for i in 0..n_cont {
        let lo = rng.gen_range(-3..=1) as f64;
        let hi = lo + rng.gen_range(0..=5) as f64;
        m.add_continuous(format!("c{i}"), Some(lo), Some(hi));
    }
    let n = n_bin + n_cont;
    for r in 0..n_rows {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                let a = rng.gen_range(-5..=5);
                if a != 0 {
                    terms.push((gridforge_milp::VarId(j), a as f64));
                }
            }
        }
        let rel = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs = rng.gen_range(-4..=8) as f64;
        m.add_constraint(format!("r{r}"), terms, rel, rhs);
    }
    let obj = (0..n)
        .map(|j| (gridforge_milp::VarId(j), rng.gen_range(-6..=6) as f64))
        .collect();
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    m.set_objective(sense, obj);
    m
}

/// Solves the square system `a x = b` exactly; `None` if singular.
fn solve_square(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exact optimum (in the model's sense) by enumerating every binary
/// assignment and every vertex of the remaining continuous polytope.
pub fn enumerate_optimum(model: &Model<f64>) -> Option<BigRational> {
    let bins: Vec<usize> = (0..model.num_vars())
        .filter(|&j| model.variables[j].kind == VarKind::Binary)
        .collect();
    let conts: Vec<usize> = (0..model.num_vars())
        .filter(|&j| model.variables[j].kind == VarKind::Continuous)
        .collect();
    let mut pos = vec![usize::MAX; model.num_vars()];
    for (k, &j) in conts.iter().enumerate() {
        pos[j] = k;
    }
    let maximize = model.objective.sense == Sense::Maximize;
    let mut obj = vec![q(0); model.num_vars()];
    for (v, c) in &model.objective.terms {
        obj[v.0] += qf(*c);
    }
    let nc = conts.len();
    let mut best: Option<BigRational> = None;

    for mask in 0u64..(1u64 << bins.len()) {
        let mut fixed = vec![q(0); model.num_vars()];
        for (k, &j) in bins.iter().enumerate() {
            if mask >> k & 1 == 1 {
                fixed[j] = q(1);
            }
        }
        // continuous rows: a x (rel) rhs - binary part
        let mut rows: Vec<(Vec<BigRational>, Relation, BigRational)> = Vec::new();
        for c in &model.constraints {
            let mut a = vec![q(0); nc];
            let mut rhs = qf(c.rhs);
            for (v, coef) in &c.terms {
                if pos[v.0] == usize::MAX {
                    rhs -= qf(*coef) * &fixed[v.0];
                } else {
                    a[pos[v.0]] += qf(*coef);
                }
            }
            rows.push((a, c.relation, rhs));
        }
        for (k, &j) in conts.iter().enumerate() {
            let v = &model.variables[j];
            let mut a = vec![q(0); nc];
            a[k] = q(1);
            rows.push((a.clone(), Relation::Ge, qf(v.lower.unwrap())));
            rows.push((a, Relation::Le, qf(v.upper.unwrap())));
        }
        let feasible = |x: &[BigRational]| {
            rows.iter().all(|(a, rel, rhs)| {
                let lhs: BigRational = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
                match rel {
                    Relation::Le => lhs <= *rhs,
                    Relation::Ge => lhs >= *rhs,
                    Relation::Eq => lhs == *rhs,
                }
            })
        };
        let bin_obj: BigRational = bins.iter().map(|&j| &obj[j] * &fixed[j]).sum();
        for active in combinations(rows.len(), nc) {
            let a: Vec<Vec<BigRational>> = active.iter().map(|&r| rows[r].0.clone()).collect();
            let b: Vec<BigRational> = active.iter().map(|&r| rows[r].2.clone()).collect();
            let Some(x) = solve_square(a, b) else { continue };
            if !feasible(&x) {
                continue;
            }
            let val: BigRational =
                &bin_obj + conts.iter().zip(&x).map(|(&j, xi)| &obj[j] * xi).sum::<BigRational>();
            let better = match &best {
                None => true,
                Some(b) => (maximize && val > *b) || (!maximize && val < *b),
            };
            if better {
                best = Some(val);
            }
        }
    }
    best
}

pub fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn rational_is_integral(v: &BigRational) -> bool {
    v.is_integer() && (v.is_zero() || v.abs() == BigRational::one())
}
