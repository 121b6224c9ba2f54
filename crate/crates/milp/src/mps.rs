//! MPS export and a small reader for the subset the writer emits.
//!
//! Output uses the fixed-format column layout (fields start at columns
//! 2, 5, 15, 25, 40, 50). Names longer than eight characters push later
//! fields right, which every whitespace-tokenising reader accepts.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::MilpError;
use crate::model::{Model, Relation, Sense, VarId, VarKind};
use crate::scalar::Scalar;

const OBJ_ROW: &str = "OBJ";

/// Maps a name to an MPS-legal token: printable ASCII without spaces,
/// not starting with `$` or `*`.
pub fn sanitize_name(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_graphic() { c } else { '_' })
        .collect();
    if out.is_empty() {
        out.push('_');
    }
    if out.starts_with('$') || out.starts_with('*') {
        out.replace_range(0..1, "_");
    }
    out
}

fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn field_line(out: &mut String, code: &str, f2: &str, f3: &str, f4: &str) {
    // " CC NNNNNNNN  NNNNNNNN  VVVVVVVVVVVV"
    let mut line = format!(" {code:<2} {f2:<8}");
    if !f3.is_empty() {
        line.push_str(&format!("  {f3:<8}"));
    }
    if !f4.is_empty() {
        line.push_str(&format!("  {f4:>12}"));
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Writes `model` as MPS text.
pub fn export_mps<S: Scalar>(model: &Model<S>) -> Result<String, MilpError> {
    model.validate()?;
    let rows: Vec<String> = model.constraints.iter().map(|c| sanitize_name(&c.name)).collect();
    let cols: Vec<String> = model.variables.iter().map(|v| sanitize_name(&v.name)).collect();
    let mut seen = HashSet::new();
    seen.insert(OBJ_ROW.to_string());
    for r in &rows {
        if !seen.insert(r.clone()) {
            return Err(MilpError::NameCollision(r.clone()));
        }
    }
    let mut seen = HashSet::new();
    for c in &cols {
        if !seen.insert(c.clone()) {
            return Err(MilpError::NameCollision(c.clone()));
        }
    }

    // column-major coefficients, objective first
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols.len()];
    let mut obj = vec![0.0f64; cols.len()];
    for (v, c) in &model.objective.terms {
        obj[v.0] += c.to_f64_lossy();
    }
    for (i, c) in model.constraints.iter().enumerate() {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (v, a) in &c.terms {
            match merged.iter_mut().find(|(j, _)| *j == v.0) {
                Some(e) => e.1 += a.to_f64_lossy(),
                None => merged.push((v.0, a.to_f64_lossy())),
            }
        }
        for (j, a) in merged {
            if a != 0.0 {
                by_col[j].push((i, a));
            }
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", sanitize_name(&model.name));
    if model.objective.sense == Sense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n");
    field_line(&mut out, "N", OBJ_ROW, "", "");
    for (c, name) in model.constraints.iter().zip(&rows) {
        let code = match c.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        field_line(&mut out, code, name, "", "");
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0usize;
    for (j, v) in model.variables.iter().enumerate() {
        let is_int = v.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER{marker:<4}          'MARKER'                 {tag}");
            marker += 1;
            in_int = is_int;
        }
        let mut wrote = false;
        if obj[j] != 0.0 || by_col[j].is_empty() {
            field_line(&mut out, "", &cols[j], OBJ_ROW, &format_number(obj[j]));
            wrote = true;
        }
        for (i, a) in &by_col[j] {
            field_line(&mut out, "", &cols[j], &rows[*i], &format_number(*a));
            wrote = true;
        }
        debug_assert!(wrote);
    }
    if in_int {
        let _ = writeln!(out, "    MARKER{marker:<4}          'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    for (c, name) in model.constraints.iter().zip(&rows) {
        let r = c.rhs.to_f64_lossy();
        if r != 0.0 {
            field_line(&mut out, "", "RHS", name, &format_number(r));
        }
    }

    out.push_str("BOUNDS\n");
    for (v, name) in model.variables.iter().zip(&cols) {
        let lo = v.lower.as_ref().map(|x| x.to_f64_lossy());
        let up = v.upper.as_ref().map(|x| x.to_f64_lossy());
        if v.kind == VarKind::Binary && lo == Some(0.0) && up == Some(1.0) {
            field_line(&mut out, "BV", "BND", name, "");
            continue;
        }
        match (lo, up) {
            (None, None) => field_line(&mut out, "FR", "BND", name, ""),
            (None, Some(u)) => {
                field_line(&mut out, "MI", "BND", name, "");
                field_line(&mut out, "UP", "BND", name, &format_number(u));
            }
            (Some(l), Some(u)) if l == u => field_line(&mut out, "FX", "BND", name, &format_number(l)),
            (Some(l), u) => {
                if l != 0.0 || v.kind == VarKind::Binary {
                    field_line(&mut out, "LO", "BND", name, &format_number(l));
                }
                match u {
                    Some(u) => field_line(&mut out, "UP", "BND", name, &format_number(u)),
                    None if v.kind == VarKind::Binary => field_line(&mut out, "PL", "BND", name, ""),
                    None => {}
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

#[derive(PartialEq)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

/// Parses MPS text into a model. Integer-marked columns become binaries
/// with default bounds [0, 1]. `RANGES` is not supported.
pub fn parse_mps(text: &str) -> Result<Model<f64>, MilpError> {
    let err = |line: usize, message: &str| MilpError::MpsParse {
        line,
        message: message.to_string(),
    };
    let mut model = Model::<f64>::new("model");
    let mut sense = Sense::Minimize;
    let mut section = Section::None;
    let mut obj_name: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, VarId> = HashMap::new();
    let mut objective: Vec<(VarId, f64)> = Vec::new();
    let mut integer = false;
    let mut ended = false;

    for (n, raw) in text.lines().enumerate() {
        let ln = n + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match toks[0] {
                "NAME" => {
                    model.name = toks.get(1).unwrap_or(&"model").to_string();
                    Section::None
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        sense = parse_sense(s).ok_or_else(|| err(ln, "bad OBJSENSE"))?;
                        Section::None
                    } else {
                        Section::ObjSense
                    }
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "RANGES" => return Err(err(ln, "RANGES section is not supported")),
                "ENDATA" => {
                    ended = true;
                    break;
                }
                other => return Err(err(ln, &format!("unknown section {other}"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(err(ln, "data line outside a section")),
            Section::ObjSense => {
                sense = parse_sense(toks[0]).ok_or_else(|| err(ln, "bad OBJSENSE"))?;
                section = Section::None;
            }
            Section::Rows => {
                if toks.len() < 2 {
                    return Err(err(ln, "row line needs a type and a name"));
                }
                let rel = match toks[0] {
                    "N" => {
                        if obj_name.is_none() {
                            obj_name = Some(toks[1].to_string());
                        }
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    _ => return Err(err(ln, "unknown row type")),
                };
                let id = model.add_constraint(toks[1], Vec::new(), rel, 0.0);
                row_index.insert(toks[1].to_string(), id.0);
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => integer = true,
                        "'INTEND'" => integer = false,
                        _ => return Err(err(ln, "unknown marker")),
                    }
                    continue;
                }
                if toks.len() < 3 || toks.len().is_multiple_of(2) {
                    return Err(err(ln, "column line needs name/value pairs"));
                }
                let var = match col_index.get(toks[0]) {
                    Some(v) => *v,
                    None => {
                        let v = if integer {
                            model.add_binary(toks[0])
                        } else {
                            model.add_continuous(toks[0], Some(0.0), None)
                        };
                        col_index.insert(toks[0].to_string(), v);
                        v
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let value: f64 = pair[1].parse().map_err(|_| err(ln, "bad number"))?;
                    if value == 0.0 {
                        // placeholder entries for otherwise empty columns
                        if !row_index.contains_key(pair[0]) && Some(pair[0]) != obj_name.as_deref() {
                            return Err(err(ln, "unknown row"));
                        }
                        continue;
                    }
                    if Some(pair[0]) == obj_name.as_deref() {
                        objective.push((var, value));
                    } else {
                        let r = *row_index.get(pair[0]).ok_or_else(|| err(ln, "unknown row"))?;
                        model.constraints[r].terms.push((var, value));
                    }
                }
            }
            Section::Rhs => {
                if toks.len() < 3 {
                    return Err(err(ln, "rhs line needs a set name and pairs"));
                }
                // the set name is optional in some writers
                let start = if toks.len() % 2 == 1 { 1 } else { 0 };
                for pair in toks[start..].chunks(2) {
                    let value: f64 = pair[1].parse().map_err(|_| err(ln, "bad number"))?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        continue;
                    }
                    let r = *row_index.get(pair[0]).ok_or_else(|| err(ln, "unknown row"))?;
                    model.constraints[r].rhs = value;
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(err(ln, "bound line needs type, set and column"));
                }
                let var = *col_index.get(toks[2]).ok_or_else(|| err(ln, "unknown column"))?;
                let value = || -> Result<f64, MilpError> {
                    toks.get(3)
                        .ok_or_else(|| err(ln, "missing bound value"))?
                        .parse()
                        .map_err(|_| err(ln, "bad number"))
                };
                let v = &mut model.variables[var.0];
                match toks[0] {
                    "UP" => v.upper = Some(value()?),
                    "LO" => v.lower = Some(value()?),
                    "FX" => {
                        let x = value()?;
                        v.lower = Some(x);
                        v.upper = Some(x);
                    }
                    "FR" => {
                        v.lower = None;
                        v.upper = None;
                    }
                    "MI" => v.lower = None,
                    "PL" => v.upper = None,
                    "BV" => {
                        v.kind = VarKind::Binary;
                        v.lower = Some(0.0);
                        v.upper = Some(1.0);
                    }
                    _ => return Err(err(ln, "unknown bound type")),
                }
            }
        }
    }
    if !ended {
        return Err(err(text.lines().count(), "missing ENDATA"));
    }
    model.set_objective(sense, objective);
    Ok(model)
}

fn parse_sense(tok: &str) -> Option<Sense> {
    match tok {
        "MAX" | "MAXIMIZE" => Some(Sense::Maximize),
        "MIN" | "MINIMIZE" => Some(Sense::Minimize),
        _ => None,
    }
}
