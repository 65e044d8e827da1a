//! CPLEX LP text format: writer for any [`MilpModel`] and a reader for the
//! subset the writer produces (plus common spelling variants).

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::milp::{MilpModel, ModelError, Sense, VarId, VarKind, VarRole};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpFormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported LP feature: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const TERMS_PER_LINE: usize = 6;

fn num(x: f64) -> String {
    // Shortest representation that parses back to the same value.
    let s = format!("{x:?}");
    s.strip_suffix(".0").map_or(s.clone(), str::to_string)
}

fn push_expr(out: &mut String, terms: impl Iterator<Item = (String, f64)>) {
    let mut any = false;
    for (i, (name, a)) in terms.enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {name}", num(a.abs()));
        any = true;
    }
    if !any {
        out.push_str(" 0");
    }
}

/// Renders the model in LP format. Row and variable order follow the model.
pub fn write_lp(model: &MilpModel) -> String {
    let name = |v: VarId| model.variables[v.0].name.clone();
    let mut out = String::from("\\ reconstruction model\nMinimize\n obj:");
    let obj = model
        .objective
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (name(VarId(j)), c));
    push_expr(&mut out, obj);
    if model.objective_offset != 0.0 {
        let sign = if model.objective_offset < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", num(model.objective_offset.abs()));
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        push_expr(&mut out, c.terms.iter().map(|&(v, a)| (name(v), a)));
        let _ = writeln!(out, " {} {}", c.sense, num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, num(v.lower));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), v.name, num(v.upper));
        }
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    Done,
}

fn section_of(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::Done),
        _ => None,
    }
}

struct Reader {
    model: MilpModel,
    index: HashMap<String, usize>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        // LP default bounds are [0, +inf).
        let id = self.model.add_continuous(name, 0.0, f64::INFINITY, VarRole::Other);
        self.index.insert(name.to_string(), id.0);
        id.0
    }
}

fn parse_number(tok: &str) -> Option<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => tok.parse().ok(),
    }
}

fn numeric_start(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_digit() || c == '.')
}

/// Splits glued tokens such as `3x`, `x+y` or `x<=2` into separate tokens.
fn tokenize(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        if cur.is_empty() {
            return;
        }
        let t = std::mem::take(cur);
        // A number glued to a name: split at the first letter that does not
        // start an exponent.
        if numeric_start(&t) && t.parse::<f64>().is_err() {
            if let Some(pos) = t.char_indices().position(|(i, c)| {
                c.is_ascii_alphabetic() && !(matches!(c, 'e' | 'E') && t[i + 1..].starts_with(|d: char| d.is_ascii_digit()))
            }) {
                let (num, name) = t.split_at(t.char_indices().nth(pos).map_or(0, |(i, _)| i));
                out.push(num.to_string());
                out.push(name.to_string());
                return;
            }
        }
        out.push(t);
    };
    let mut chars = s.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            '<' | '>' | '=' => {
                flush(&mut cur, &mut out);
                let mut op = ch.to_string();
                if let Some(&next) = chars.peek() {
                    if matches!(next, '=' | '<' | '>') {
                        op.push(next);
                        chars.next();
                    }
                }
                out.push(match op.as_str() {
                    "=<" => "<=".into(),
                    "=>" => ">=".into(),
                    _ => op,
                });
            }
            '+' | '-' if !(numeric_start(&cur) && cur.ends_with(['e', 'E'])) => {
                flush(&mut cur, &mut out);
                out.push(ch.to_string());
            }
            _ => cur.push(ch),
        }
    }
    flush(&mut cur, &mut out);
    out
}

/// Parses `± a x ± b y ... [constant]` into terms and a constant.
fn parse_expr(rd: &mut Reader, toks: &[String], line: usize) -> Result<(Vec<(VarId, f64)>, f64), LpFormatError> {
    let mut terms: Vec<(VarId, f64)> = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for t in toks {
        match t.as_str() {
            "+" => {}
            "-" => sign = -sign,
            _ if numeric_start(t) => {
                let x = t.parse::<f64>().map_err(|_| LpFormatError::Syntax { line, message: format!("bad number {t:?}") })?;
                if let Some(c) = coef.replace(x) {
                    // A dangling number followed by another number is a constant.
                    constant += sign * c;
                    sign = 1.0;
                }
            }
            _ => {
                let v = VarId(rd.var(t));
                let a = sign * coef.take().unwrap_or(1.0);
                match terms.iter_mut().find(|(w, _)| *w == v) {
                    Some(slot) => slot.1 += a,
                    None => terms.push((v, a)),
                }
                sign = 1.0;
            }
        }
    }
    if let Some(c) = coef {
        constant += sign * c;
    }
    Ok((terms, constant))
}

/// Reads LP text into a model. Variables take the roles `Other`; variables
/// without an explicit upper bound keep an infinite one, which
/// [`MilpModel::validate`] rejects.
pub fn read_lp(text: &str) -> Result<MilpModel, LpFormatError> {
    let mut rd = Reader { model: MilpModel::new(), index: HashMap::new() };
    let mut section = Section::Preamble;
    // Logical statements may span lines; collect (first line, text).
    let mut stmts: Vec<(Section, usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('\\').next().unwrap_or("").trim_end();
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            section = s;
            continue;
        }
        let lower = line.trim().to_ascii_lowercase();
        if matches!(lower.as_str(), "maximize" | "maximise" | "max") {
            return Err(LpFormatError::Unsupported("maximisation".into()));
        }
        if matches!(lower.as_str(), "semi-continuous" | "semis" | "sos") {
            return Err(LpFormatError::Unsupported(lower));
        }
        let has_rel = |t: &str| t.contains(['<', '>', '=']);
        let joins = match (section, stmts.last()) {
            (Section::Objective, Some((s, _, _))) => *s == Section::Objective,
            (Section::Rows, Some((s, _, t))) => *s == Section::Rows && !has_rel(t),
            _ => false,
        };
        match stmts.last_mut() {
            Some((_, _, txt)) if joins => {
                txt.push(' ');
                txt.push_str(line.trim());
            }
            _ => stmts.push((section, i + 1, line.trim().to_string())),
        }
    }
    for (sec, line, stmt) in stmts {
        let err = |m: String| LpFormatError::Syntax { line, message: m };
        match sec {
            Section::Preamble | Section::Done => return Err(err(format!("statement outside a section: {stmt:?}"))),
            Section::Objective => {
                let body = stmt.split_once(':').map_or(stmt.as_str(), |(_, b)| b);
                let (terms, c) = parse_expr(&mut rd, &tokenize(body), line)?;
                for (v, a) in terms {
                    rd.model.objective[v.0] += a;
                }
                rd.model.objective_offset += c;
            }
            Section::Rows => {
                let (name, body) = stmt
                    .split_once(':')
                    .map(|(n, b)| (n.trim().to_string(), b))
                    .unwrap_or_else(|| (format!("R{}", rd.model.constraints.len() + 1), stmt.as_str()));
                let toks = tokenize(body);
                let pos = toks
                    .iter()
                    .position(|t| matches!(t.as_str(), "<=" | ">=" | "=" | "<" | ">"))
                    .ok_or_else(|| err("row without a relational operator".into()))?;
                let sense = match toks[pos].as_str() {
                    "<=" | "<" => Sense::Le,
                    ">=" | ">" => Sense::Ge,
                    _ => Sense::Eq,
                };
                let (terms, c_left) = parse_expr(&mut rd, &toks[..pos], line)?;
                let (rterms, c_right) = parse_expr(&mut rd, &toks[pos + 1..], line)?;
                if !rterms.is_empty() {
                    return Err(err("variables on the right-hand side".into()));
                }
                rd.model.add_constraint(name, &terms, sense, c_right - c_left);
            }
            Section::Bounds => {
                let toks = tokenize(&stmt);
                let set = |rd: &mut Reader, name: &str, lo: Option<f64>, hi: Option<f64>| {
                    let j = rd.var(name);
                    if let Some(lo) = lo {
                        rd.model.variables[j].lower = lo;
                    }
                    if let Some(hi) = hi {
                        rd.model.variables[j].upper = hi;
                    }
                };
                let t: Vec<&str> = toks.iter().map(String::as_str).collect();
                let joined = join_signed(&t);
                let t: Vec<&str> = joined.iter().map(String::as_str).collect();
                match t.as_slice() {
                    [name, free] if free.eq_ignore_ascii_case("free") => {
                        set(&mut rd, name, Some(f64::NEG_INFINITY), Some(f64::INFINITY))
                    }
                    [lo, "<=", name, "<=", hi] => {
                        let (lo, hi) = (parse_number(lo), parse_number(hi));
                        if lo.is_none() || hi.is_none() {
                            return Err(err(format!("bad bound {stmt:?}")));
                        }
                        set(&mut rd, name, lo, hi)
                    }
                    [name, "=", val] => {
                        let v = parse_number(val).ok_or_else(|| err(format!("bad bound {stmt:?}")))?;
                        set(&mut rd, name, Some(v), Some(v))
                    }
                    [name, op @ ("<=" | ">="), val] if parse_number(val).is_some() => {
                        let v = parse_number(val);
                        if *op == "<=" { set(&mut rd, name, None, v) } else { set(&mut rd, name, v, None) }
                    }
                    [val, op @ ("<=" | ">="), name] if parse_number(val).is_some() => {
                        let v = parse_number(val);
                        if *op == "<=" { set(&mut rd, name, v, None) } else { set(&mut rd, name, None, v) }
                    }
                    _ => return Err(err(format!("unrecognised bound {stmt:?}"))),
                }
            }
            Section::Binaries => {
                for name in stmt.split_whitespace() {
                    let j = rd.var(name);
                    let v = &mut rd.model.variables[j];
                    v.kind = VarKind::Binary;
                    v.lower = 0.0;
                    v.upper = 1.0;
                }
            }
            Section::Generals => {
                for name in stmt.split_whitespace() {
                    let j = rd.var(name);
                    let v = &mut rd.model.variables[j];
                    if v.lower == 0.0 && v.upper == 1.0 {
                        v.kind = VarKind::Binary;
                    } else {
                        return Err(LpFormatError::Unsupported(format!("general integer {name}")));
                    }
                }
            }
        }
    }
    Ok(rd.model)
}

/// Glues a leading sign onto the number that follows it.
fn join_signed(t: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < t.len() {
        if (t[i] == "-" || t[i] == "+") && i + 1 < t.len() {
            out.push(format!("{}{}", t[i], t[i + 1]));
            i += 2;
        } else {
            out.push(t[i].to_string());
            i += 1;
        }
    }
    out
}
