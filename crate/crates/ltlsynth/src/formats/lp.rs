//! LP dump:
//!
//! ```text
//! maximize
//! var x 0.0 inf
//! obj 0 1.0
//! con c0 <= 4.0 : 0 1.0 1 2.0
//! ```
//!
//! Variables and constraints are numbered in order of appearance.

use std::fmt::Write;

use ltlsynth_core::optimize::{Constraint, LinearProgram, Relation, Sense, Variable};

use super::{check_name, content_lines, parse_f64, parse_usize, Num, ParseError};

pub fn write_lp(lp: &LinearProgram) -> Result<String, ParseError> {
    let mut out = String::new();
    let sense = match lp.sense {
        Sense::Maximize => "maximize",
        Sense::Minimize => "minimize",
    };
    writeln!(out, "{sense}").unwrap();
    for v in &lp.variables {
        check_name(&v.name)?;
        writeln!(out, "var {} {} {}", v.name, Num(v.lower), Num(v.upper)).unwrap();
    }
    for &(j, c) in &lp.objective {
        writeln!(out, "obj {j} {}", Num(c)).unwrap();
    }
    for c in &lp.constraints {
        check_name(&c.name)?;
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        write!(out, "con {} {rel} {} :", c.name, Num(c.rhs)).unwrap();
        for &(j, a) in &c.terms {
            write!(out, " {j} {}", Num(a)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_lp(text: &str) -> Result<LinearProgram, ParseError> {
    let mut lines = content_lines(text);
    let sense = match lines.next() {
        Some((_, "maximize")) => Sense::Maximize,
        Some((_, "minimize")) => Sense::Minimize,
        Some((n, other)) => return Err(ParseError::new(n, format!("expected sense, got `{other}`"))),
        None => return Err(ParseError::new(0, "empty LP")),
    };
    let mut lp = LinearProgram::new(sense);
    for (n, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["var", name, lo, hi] => lp.variables.push(Variable {
                name: name.to_string(),
                lower: parse_f64(n, lo)?,
                upper: parse_f64(n, hi)?,
            }),
            ["obj", j, c] => lp.objective.push((parse_usize(n, j)?, parse_f64(n, c)?)),
            ["con", name, rel, rhs, ":", rest @ ..] => {
                let relation = match *rel {
                    "<=" => Relation::Le,
                    ">=" => Relation::Ge,
                    "=" => Relation::Eq,
                    other => return Err(ParseError::new(n, format!("bad relation `{other}`"))),
                };
                if rest.len() % 2 != 0 {
                    return Err(ParseError::new(n, "unpaired term"));
                }
                let terms = rest
                    .chunks(2)
                    .map(|p| Ok((parse_usize(n, p[0])?, parse_f64(n, p[1])?)))
                    .collect::<Result<Vec<_>, ParseError>>()?;
                lp.constraints.push(Constraint {
                    name: name.to_string(),
                    terms,
                    relation,
                    rhs: parse_f64(n, rhs)?,
                });
            }
            _ => return Err(ParseError::new(n, format!("unrecognized line `{line}`"))),
        }
    }
    lp.validate()
        .map_err(|e| ParseError::new(0, e.to_string()))?;
    Ok(lp)
}
