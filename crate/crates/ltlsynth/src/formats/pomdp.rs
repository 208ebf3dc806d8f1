//! Labeled POMDP text format.
//!
//! ```text
//! states s0 s1
//! actions go stay
//! observations near far
//! ap a b
//! transition
//! s0 go s1 1.0
//! s0 stay s0 1.0
//! s1 go s1 1.0
//! s1 stay s1 1.0
//! observation_fn
//! s0 near 1.0
//! s1 far 1.0
//! initial
//! s0 1.0
//! labeling
//! s1 : a b
//! ```
//!
//! Entries are sparse; anything not listed is zero. Names are single tokens.
//! An optional `rewards` section lists `state value` lines.

use std::collections::HashMap;
use std::fmt::Write;

use ltlsynth_core::model::{LabeledPomdp, Letter, PomdpParts, MAX_PROPS};

use super::{check_name, content_lines, parse_f64, Num, ParseError};

/// Sections holding one entry per line after their header.
const BLOCKS: [&str; 5] = ["transition", "observation_fn", "initial", "labeling", "rewards"];

pub fn write_pomdp(model: &LabeledPomdp) -> Result<String, ParseError> {
    let mut out = String::new();
    write_body(&mut out, model)?;
    Ok(out)
}

pub(crate) fn write_body(out: &mut String, model: &LabeledPomdp) -> Result<(), ParseError> {
    let names = [
        ("states", model.state_names()),
        ("actions", model.action_names()),
        ("observations", model.observation_names()),
        ("ap", model.props()),
    ];
    for (key, list) in names {
        write!(out, "{key}").unwrap();
        for n in list {
            check_name(n)?;
            write!(out, " {n}").unwrap();
        }
        out.push('\n');
    }
    let (states, actions, obs) = (model.state_names(), model.action_names(), model.observation_names());
    out.push_str("transition\n");
    for (s, sn) in states.iter().enumerate() {
        for (a, an) in actions.iter().enumerate() {
            for (t, &p) in model.transition_row(s, a).iter().enumerate() {
                if p.to_bits() != 0 {
                    writeln!(out, "{sn} {an} {} {}", states[t], Num(p)).unwrap();
                }
            }
        }
    }
    out.push_str("observation_fn\n");
    for (s, sn) in states.iter().enumerate() {
        for (o, &p) in model.observation_row(s).iter().enumerate() {
            if p.to_bits() != 0 {
                writeln!(out, "{sn} {} {}", obs[o], Num(p)).unwrap();
            }
        }
    }
    out.push_str("initial\n");
    for (s, &p) in model.initial().iter().enumerate() {
        if p.to_bits() != 0 {
            writeln!(out, "{} {}", states[s], Num(p)).unwrap();
        }
    }
    out.push_str("labeling\n");
    for (s, &l) in model.labels().iter().enumerate() {
        if l != 0 {
            write!(out, "{} :", states[s]).unwrap();
            for (i, p) in model.props().iter().enumerate() {
                if l & (1 << i) != 0 {
                    write!(out, " {p}").unwrap();
                }
            }
            out.push('\n');
        }
    }
    if model.rewards().iter().any(|r| r.to_bits() != 0) {
        out.push_str("rewards\n");
        for (s, &r) in model.rewards().iter().enumerate() {
            if r.to_bits() != 0 {
                writeln!(out, "{} {}", states[s], Num(r)).unwrap();
            }
        }
    }
    Ok(())
}

/// Parses and validates a model.
pub fn parse_pomdp(text: &str) -> Result<LabeledPomdp, ParseError> {
    let (parts, rest) = parse_parts(text, &[])?;
    debug_assert!(rest.is_empty());
    LabeledPomdp::new(parts).map_err(|e| ParseError::new(0, e.to_string()))
}

/// Parses a model without validating it, for `validate`-style reporting.
pub fn parse_pomdp_unchecked(text: &str) -> Result<LabeledPomdp, ParseError> {
    let (parts, _) = parse_parts(text, &[])?;
    Ok(LabeledPomdp::from_parts_unchecked(parts))
}

fn index(names: &[String]) -> Result<HashMap<&str, usize>, String> {
    let mut map = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.as_str(), i).is_some() {
            return Err(format!("duplicate name `{n}`"));
        }
    }
    Ok(map)
}

fn lookup(map: &HashMap<&str, usize>, line: usize, name: &str) -> Result<usize, ParseError> {
    map.get(name)
        .copied()
        .ok_or_else(|| ParseError::new(line, format!("unknown name `{name}`")))
}

/// Parses the POMDP sections. Lines under any header in `extra` are handed
/// back untouched, keyed by that header.
pub(crate) fn parse_parts<'a>(
    text: &'a str,
    extra: &[&str],
) -> Result<(PomdpParts, Vec<(&'a str, usize, &'a str)>), ParseError> {
    let mut parts = PomdpParts::default();
    let mut blocks: HashMap<&str, Vec<(usize, &str)>> = HashMap::new();
    let mut rest = Vec::new();
    let mut current: Option<&str> = None;
    for (n, line) in content_lines(text) {
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap_or("");
        let names = || toks.clone().map(str::to_string).collect::<Vec<_>>();
        match head {
            "states" => parts.states = names(),
            "actions" => parts.actions = names(),
            "observations" => parts.observations = names(),
            "ap" => parts.props = names(),
            h if line == h && (BLOCKS.contains(&h) || extra.contains(&h)) => {
                if blocks.contains_key(h) || rest.iter().any(|&(k, _, _)| k == h) {
                    return Err(ParseError::new(n, format!("section `{h}` repeated")));
                }
                blocks.insert(h, Vec::new());
                current = Some(h);
                continue;
            }
            _ => match current {
                Some(c) if extra.contains(&c) => rest.push((c, n, line)),
                Some(c) => blocks.get_mut(c).unwrap().push((n, line)),
                None => return Err(ParseError::new(n, format!("unrecognized line `{line}`"))),
            },
        }
        if ["states", "actions", "observations", "ap"].contains(&head) {
            current = None;
        }
    }
    if parts.props.len() > MAX_PROPS {
        return Err(ParseError::new(0, "too many atomic propositions"));
    }
    let err = |m: String| ParseError::new(0, m);
    let si = index(&parts.states).map_err(err)?;
    let ai = index(&parts.actions).map_err(err)?;
    let oi = index(&parts.observations).map_err(err)?;
    let pi = index(&parts.props).map_err(err)?;
    let (ns, na, no) = (parts.states.len(), parts.actions.len(), parts.observations.len());
    parts.transition = vec![0.0; ns * na * ns];
    parts.observation = vec![0.0; ns * no];
    parts.initial = vec![0.0; ns];
    parts.labels = vec![0; ns];
    parts.rewards = vec![0.0; ns];
    let entries = |key: &str| blocks.get(key).cloned().unwrap_or_default();
    for (n, line) in entries("transition") {
        let t: Vec<&str> = line.split_whitespace().collect();
        let [s, a, sn, p] = t[..] else {
            return Err(ParseError::new(n, "expected `state action next p`"));
        };
        let (s, a, sn) = (lookup(&si, n, s)?, lookup(&ai, n, a)?, lookup(&si, n, sn)?);
        parts.transition[(s * na + a) * ns + sn] = parse_f64(n, p)?;
    }
    for (n, line) in entries("observation_fn") {
        let t: Vec<&str> = line.split_whitespace().collect();
        let [s, o, p] = t[..] else {
            return Err(ParseError::new(n, "expected `state observation p`"));
        };
        parts.observation[lookup(&si, n, s)? * no + lookup(&oi, n, o)?] = parse_f64(n, p)?;
    }
    for (key, target) in [("initial", &mut parts.initial), ("rewards", &mut parts.rewards)] {
        for (n, line) in entries(key) {
            let t: Vec<&str> = line.split_whitespace().collect();
            let [s, p] = t[..] else {
                return Err(ParseError::new(n, "expected `state value`"));
            };
            target[lookup(&si, n, s)?] = parse_f64(n, p)?;
        }
    }
    for (n, line) in entries("labeling") {
        let (s, props) = line
            .split_once(':')
            .ok_or_else(|| ParseError::new(n, "expected `state : props`"))?;
        let s = lookup(&si, n, s.trim())?;
        let mut letter: Letter = 0;
        for p in props.split_whitespace() {
            letter |= 1 << lookup(&pi, n, p)?;
        }
        parts.labels[s] = letter;
    }
    Ok((parts, rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltlsynth_core::gridworld::{build_gridworld, GridWorldSpec};

    #[test]
    fn gridworld_round_trips() {
        let m = build_gridworld(&GridWorldSpec::with_rows(3)).unwrap();
        let text = write_pomdp(&m).unwrap();
        let back = parse_pomdp(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(write_pomdp(&back).unwrap(), text);
    }

    #[test]
    fn unknown_names_are_reported_with_line() {
        let text = "states a\nactions x\nobservations o\nap\ntransition\na y a 1.0\n";
        let e = parse_pomdp(text).unwrap_err();
        assert_eq!(e.line, 6);
    }

    #[test]
    fn invalid_rows_fail_validation_but_parse_unchecked() {
        let text = "states a\nactions x\nobservations o\nap\ntransition\na x a 0.9\nobservation_fn\na o 1.0\ninitial\na 1.0\n";
        assert!(parse_pomdp(text).is_err());
        let m = parse_pomdp_unchecked(text).unwrap();
        assert_eq!(ltlsynth_core::model::validate_pomdp(&m).len(), 1);
    }
}
