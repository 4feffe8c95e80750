//! CPLEX LP text format: export and a parser for the subset we export.

use std::collections::HashMap;
use std::fmt::Write;

use super::{LinearExpression, LpError, LpModel, Relation, Sense};

const WRAP_AT: usize = 200;

fn push_expr(out: &mut String, line_start: &mut usize, model: &LpModel, e: &LinearExpression) {
    let mut first = true;
    let mut piece = String::new();
    for (id, c) in e.terms() {
        piece.clear();
        let name = &model.unknowns[id].name;
        let mag = c.abs();
        let sign = if c < 0.0 { "-" } else { "+" };
        match (first, mag == 1.0) {
            (true, true) if c > 0.0 => write!(piece, " {name}"),
            (true, true) => write!(piece, " - {name}"),
            (true, false) if c > 0.0 => write!(piece, " {mag} {name}"),
            (true, false) => write!(piece, " - {mag} {name}"),
            (false, true) => write!(piece, " {sign} {name}"),
            (false, false) => write!(piece, " {sign} {mag} {name}"),
        }
        .unwrap();
        if out.len() - *line_start + piece.len() > WRAP_AT {
            out.push_str("\n  ");
            *line_start = out.len() - 2;
        }
        out.push_str(&piece);
        first = false;
    }
    if e.constant != 0.0 {
        let mag = e.constant.abs();
        match (first, e.constant < 0.0) {
            (true, false) => write!(out, " {mag}"),
            (true, true) => write!(out, " - {mag}"),
            (false, false) => write!(out, " + {mag}"),
            (false, true) => write!(out, " - {mag}"),
        }
        .unwrap();
    }
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Renders a model in CPLEX LP format. Unknowns keep their names; unnamed rows
/// are called `c1, c2, …` by position. Every unknown appears in `Bounds`, which
/// is omitted for a model without unknowns.
pub fn export_lp(model: &LpModel) -> String {
    let mut out = String::new();
    out.push_str(match model.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    let mut line_start = out.len();
    out.push_str(" obj:");
    push_expr(&mut out, &mut line_start, model, &model.objective);
    out.push_str("\nSubject To\n");
    for (i, row) in model.rows.iter().enumerate() {
        let mut line_start = out.len();
        write!(out, " {}:", model.row_name(i)).unwrap();
        push_expr(&mut out, &mut line_start, model, &row.expr);
        if row.expr.is_constant() {
            // an empty left-hand side still needs something to parse
            out.push_str(" 0");
        }
        writeln!(out, " {} {}", row.relation.symbol(), fmt_num(row.rhs)).unwrap();
    }
    if !model.unknowns.is_empty() {
        out.push_str("Bounds\n");
    }
    for u in &model.unknowns {
        let (lo, up) = (u.lower, u.upper);
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            writeln!(out, " {} free", u.name)
        } else if lo == up {
            writeln!(out, " {} = {}", u.name, fmt_num(lo))
        } else if up == f64::INFINITY {
            writeln!(out, " {} >= {}", u.name, fmt_num(lo))
        } else {
            writeln!(out, " {} <= {} <= {}", fmt_num(lo), u.name, fmt_num(up))
        }
        .unwrap();
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Label(String),
    Rel(Relation),
    Plus,
    Minus,
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, LpError> {
    let err = |message: String| LpError::Format { line, message };
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' {
            toks.push(Tok::Plus);
            i += 1;
        } else if c == '-' {
            toks.push(Tok::Minus);
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j], '<' | '>' | '=') {
                j += 1;
            }
            let op: String = chars[i..j].iter().collect();
            let rel = match op.as_str() {
                "<=" | "=<" | "<" => Relation::Le,
                ">=" | "=>" | ">" => Relation::Ge,
                "=" => Relation::Eq,
                _ => return Err(err(format!("unknown operator {op:?}"))),
            };
            toks.push(Tok::Rel(rel));
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    j = k;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
            }
            let s: String = chars[i..j].iter().collect();
            let v = s.parse().map_err(|_| err(format!("bad number {s:?}")))?;
            toks.push(Tok::Num(v));
            i = j;
        } else {
            let mut j = i;
            while j < chars.len()
                && !chars[j].is_whitespace()
                && !matches!(chars[j], '+' | '-' | '<' | '>' | '=' | ':')
            {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            if j < chars.len() && chars[j] == ':' {
                toks.push(Tok::Label(s));
                j += 1;
            } else if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
                toks.push(Tok::Num(f64::INFINITY));
            } else {
                toks.push(Tok::Name(s));
            }
            i = j;
        }
    }
    Ok(toks)
}

struct Builder {
    model: LpModel,
    ids: HashMap<String, usize>,
}

impl Builder {
    fn id(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.model.add_unknown(name, 0.0, f64::INFINITY);
        self.ids.insert(name.to_string(), id);
        id
    }
}

/// Parses `[sign] [number] [name]` terms until a relation or the end.
fn parse_expr(
    toks: &[Tok],
    pos: &mut usize,
    b: &mut Builder,
    line: usize,
) -> Result<LinearExpression, LpError> {
    let mut e = LinearExpression::zero();
    while *pos < toks.len() && !matches!(toks[*pos], Tok::Rel(_)) {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(*pos) {
            if *t == Tok::Minus {
                sign = -sign;
            }
            saw_sign = true;
            *pos += 1;
        }
        let mut coef = None;
        if let Some(Tok::Num(v)) = toks.get(*pos) {
            coef = Some(*v);
            *pos += 1;
        }
        match toks.get(*pos) {
            Some(Tok::Name(name)) => {
                let id = b.id(name);
                e.add_term(id, sign * coef.unwrap_or(1.0));
                *pos += 1;
            }
            _ => match coef {
                Some(v) => e.constant += sign * v,
                None if saw_sign => {
                    return Err(LpError::Format {
                        line,
                        message: "dangling sign".into(),
                    })
                }
                None => {
                    return Err(LpError::Format {
                        line,
                        message: format!("unexpected token {:?}", toks.get(*pos)),
                    })
                }
            },
        }
    }
    Ok(e)
}

fn signed_number(toks: &[Tok], pos: &mut usize, line: usize) -> Result<f64, LpError> {
    let mut sign = 1.0;
    while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(*pos) {
        if *t == Tok::Minus {
            sign = -sign;
        }
        *pos += 1;
    }
    match toks.get(*pos) {
        Some(Tok::Num(v)) => {
            *pos += 1;
            Ok(sign * v)
        }
        other => Err(LpError::Format {
            line,
            message: format!("expected a number, found {other:?}"),
        }),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" | "minimize" | "minimise" | "minimum"
        | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "end" => Some(Section::End),
        _ => None,
    }
}

/// Parses the CPLEX LP subset produced by [`export_lp`]. Unknowns are numbered
/// in order of first appearance in `Bounds`, then rows, then objective; unknowns
/// without a bounds entry default to `[0, ∞)`.
pub fn parse_lp(text: &str) -> Result<LpModel, LpError> {
    let mut b = Builder {
        model: LpModel::new(),
        ids: HashMap::new(),
    };
    let mut section = Section::Preamble;
    let mut objective_text: Vec<(usize, String)> = Vec::new();
    let mut constraint_text: Vec<(usize, String)> = Vec::new();
    let mut bound_lines: Vec<(usize, String)> = Vec::new();
    let mut saw_end = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_header(line) {
            if s == Section::Objective {
                if section != Section::Preamble {
                    return Err(LpError::Format {
                        line: line_no,
                        message: "objective section must come first".into(),
                    });
                }
                let l = line.trim().to_ascii_lowercase();
                b.model.sense = if l.starts_with("max") {
                    Sense::Maximize
                } else {
                    Sense::Minimize
                };
            }
            section = s;
            if s == Section::End {
                saw_end = true;
            }
            continue;
        }
        match section {
            Section::Preamble => {
                return Err(LpError::Format {
                    line: line_no,
                    message: "expected Maximize or Minimize".into(),
                })
            }
            Section::Objective => objective_text.push((line_no, line.to_string())),
            Section::Constraints => constraint_text.push((line_no, line.to_string())),
            Section::Bounds => bound_lines.push((line_no, line.to_string())),
            Section::End => {
                return Err(LpError::Format {
                    line: line_no,
                    message: "content after End".into(),
                })
            }
        }
    }
    if !saw_end {
        return Err(LpError::Format {
            line: text.lines().count(),
            message: "missing End".into(),
        });
    }

    // declare unknowns in bounds order first so ids follow the exported order
    let mut bounds = Vec::new();
    for (line_no, line) in &bound_lines {
        let toks = tokenize(line, *line_no)?;
        bounds.push((*line_no, toks));
    }
    for (_, toks) in &bounds {
        if let Some(name) = toks.iter().find_map(|t| match t {
            Tok::Name(n) if !n.eq_ignore_ascii_case("free") => Some(n.clone()),
            _ => None,
        }) {
            b.id(&name);
        }
    }

    // constraints: one token stream; each row is `label? expr rel number`
    let mut toks = Vec::new();
    let mut tok_lines = Vec::new();
    for (line_no, line) in &constraint_text {
        for t in tokenize(line, *line_no)? {
            toks.push(t);
            tok_lines.push(*line_no);
        }
    }
    let mut pos = 0;
    while pos < toks.len() {
        let line = tok_lines[pos];
        let name = if let Tok::Label(l) = &toks[pos] {
            pos += 1;
            Some(l.clone())
        } else {
            None
        };
        let expr = parse_expr(&toks, &mut pos, &mut b, line)?;
        let rel = match toks.get(pos) {
            Some(Tok::Rel(r)) => *r,
            _ => {
                return Err(LpError::Format {
                    line,
                    message: "constraint without relation".into(),
                })
            }
        };
        pos += 1;
        let rhs = signed_number(&toks, &mut pos, line)?;
        let index = b.model.rows.len();
        let row_name = name.filter(|n| *n != format!("c{}", index + 1));
        match row_name {
            Some(n) => b.model.add_named_row(n, expr, rel, rhs),
            None => b.model.add_row(expr, rel, rhs),
        };
    }

    let mut otoks = Vec::new();
    let mut first_line = 0;
    for (line_no, line) in &objective_text {
        if first_line == 0 {
            first_line = *line_no;
        }
        otoks.extend(tokenize(line, *line_no)?);
    }
    let mut pos = 0;
    if let Some(Tok::Label(_)) = otoks.first() {
        pos = 1;
    }
    let objective = parse_expr(&otoks, &mut pos, &mut b, first_line)?;
    if pos != otoks.len() {
        return Err(LpError::Format {
            line: first_line,
            message: "relation in objective".into(),
        });
    }
    b.model.objective = objective;

    for (line_no, toks) in bounds {
        apply_bound(&mut b, &toks, line_no)?;
    }
    Ok(b.model)
}

fn apply_bound(b: &mut Builder, toks: &[Tok], line: usize) -> Result<(), LpError> {
    let err = |message: &str| LpError::Format {
        line,
        message: message.to_string(),
    };
    if let [Tok::Name(n), Tok::Name(kw)] = toks {
        if kw.eq_ignore_ascii_case("free") {
            let id = b.id(n);
            let u = &mut b.model.unknowns[id];
            u.lower = f64::NEG_INFINITY;
            u.upper = f64::INFINITY;
            return Ok(());
        }
    }
    let mut pos = 0;
    if let Some(Tok::Name(n)) = toks.first() {
        // x rel v
        let id = b.id(n);
        pos += 1;
        let rel = match toks.get(pos) {
            Some(Tok::Rel(r)) => *r,
            _ => return Err(err("expected a relation")),
        };
        pos += 1;
        let v = signed_number(toks, &mut pos, line)?;
        if pos != toks.len() {
            return Err(err("trailing tokens in bound"));
        }
        let u = &mut b.model.unknowns[id];
        match rel {
            Relation::Le => u.upper = v,
            Relation::Ge => u.lower = v,
            Relation::Eq => {
                u.lower = v;
                u.upper = v;
            }
        }
        return Ok(());
    }
    // l rel x [rel u]
    let l = signed_number(toks, &mut pos, line)?;
    let rel1 = match toks.get(pos) {
        Some(Tok::Rel(r)) => *r,
        _ => return Err(err("expected a relation")),
    };
    pos += 1;
    let id = match toks.get(pos) {
        Some(Tok::Name(n)) => b.id(n),
        _ => return Err(err("expected a name")),
    };
    pos += 1;
    let apply = |u: &mut super::Unknown, rel: Relation, v: f64, left: bool| match (rel, left) {
        (Relation::Le, true) | (Relation::Ge, false) => u.lower = v,
        (Relation::Ge, true) | (Relation::Le, false) => u.upper = v,
        (Relation::Eq, _) => {
            u.lower = v;
            u.upper = v;
        }
    };
    apply(&mut b.model.unknowns[id], rel1, l, true);
    if pos < toks.len() {
        let rel2 = match toks.get(pos) {
            Some(Tok::Rel(r)) => *r,
            _ => return Err(err("expected a relation")),
        };
        pos += 1;
        let v = signed_number(toks, &mut pos, line)?;
        apply(&mut b.model.unknowns[id], rel2, v, false);
    }
    if pos != toks.len() {
        return Err(err("trailing tokens in bound"));
    }
    Ok(())
}
