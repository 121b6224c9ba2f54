//! Plain-text assignments: one `name value` pair per line, `#` comments.

use crate::error::MilpError;
use crate::model::Model;

/// Formats `values` (one per model variable) as `name value` lines.
pub fn write_solution(model: &Model<f64>, values: &[f64]) -> String {
    let mut out = String::new();
    for (v, x) in model.variables.iter().zip(values) {
        let x = if *x == 0.0 { 0.0 } else { *x };
        out.push_str(&format!("{} {}\n", v.name, x));
    }
    out
}

/// Reads an assignment for `model`. Variables not mentioned are zero;
/// unknown names and malformed lines are errors.
pub fn read_solution(model: &Model<f64>, text: &str) -> Result<Vec<f64>, MilpError> {
    let index = model.name_index();
    let mut values = vec![0.0; model.num_vars()];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| MilpError::SolutionParse {
            line: n + 1,
            message: message.to_string(),
        };
        let mut toks = line.split_whitespace();
        let (Some(name), Some(value), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(err("expected `name value`"));
        };
        let id = index.get(name).ok_or_else(|| err(&format!("unknown variable {name}")))?;
        values[id.0] = value.parse().map_err(|_| err("bad number"))?;
    }
    Ok(values)
}
