//! Rabin automaton text format.
//!
//! ```text
//! ap a b
//! states q0 q1
//! initial q0
//! q0 -- {} --> q0
//! q0 -- {a} --> q1
//! q0 -- {b} --> q0
//! q0 -- {a,b} --> q1
//! ...
//! pairs:
//!   avoid: q0
//!   repeat: q1
//! ```
//!
//! Every state needs exactly one transition per subset of `ap`. Each `pairs:`
//! block declares one acceptance pair; either list may be empty.

use std::collections::HashMap;
use std::fmt::Write;

use ltlsynth_core::model::{Letter, MAX_PROPS};
use ltlsynth_core::rabin::{Dra, RabinPair};

use super::{check_name, content_lines, ParseError};

fn letter_text(props: &[String], l: Letter) -> String {
    let inside: Vec<&str> = props
        .iter()
        .enumerate()
        .filter(|&(i, _)| l & (1 << i) != 0)
        .map(|(_, p)| p.as_str())
        .collect();
    format!("{{{}}}", inside.join(","))
}

pub fn write_dra(dra: &Dra) -> Result<String, ParseError> {
    let mut out = String::new();
    for n in dra.props().iter().chain(dra.state_names()) {
        check_name(n)?;
    }
    writeln!(out, "ap {}", dra.props().join(" ")).unwrap();
    writeln!(out, "states {}", dra.state_names().join(" ")).unwrap();
    let names = dra.state_names();
    writeln!(out, "initial {}", names[dra.initial()]).unwrap();
    for q in 0..dra.n_states() {
        for l in 0..dra.n_letters() as Letter {
            let next = dra.step(q, l).expect("letter in range");
            writeln!(out, "{} -- {} --> {}", names[q], letter_text(dra.props(), l), names[next]).unwrap();
        }
    }
    for p in dra.pairs() {
        out.push_str("pairs:\n");
        for (key, set) in [("avoid", &p.avoid), ("repeat", &p.repeat)] {
            write!(out, "  {key}:").unwrap();
            for (q, _) in set.iter().enumerate().filter(|(_, &b)| b) {
                write!(out, " {}", names[q]).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn parse_dra(text: &str) -> Result<Dra, ParseError> {
    let mut props: Vec<String> = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<(usize, String)> = None;
    let mut edges: Vec<(usize, &str, &str, &str)> = Vec::new();
    let mut pairs: Vec<(usize, Option<Vec<String>>, Option<Vec<String>>)> = Vec::new();
    for (n, line) in content_lines(text) {
        if line == "pairs:" {
            pairs.push((n, None, None));
            continue;
        }
        if let Some((src, rest)) = line.split_once(" -- ") {
            let (letter, dst) = rest
                .split_once(" --> ")
                .ok_or_else(|| ParseError::new(n, "expected `q -- {props} --> q'`"))?;
            edges.push((n, src.trim(), letter.trim(), dst.trim()));
            continue;
        }
        let (head, tail) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let words = || tail.split_whitespace().map(str::to_string).collect::<Vec<_>>();
        match head {
            "ap" => props = words(),
            "states" => states = words(),
            "initial" => initial = Some((n, tail.trim().to_string())),
            "avoid:" | "repeat:" => {
                let Some(last) = pairs.last_mut() else {
                    return Err(ParseError::new(n, "set outside a `pairs:` block"));
                };
                let slot = if head == "avoid:" { &mut last.1 } else { &mut last.2 };
                if slot.replace(words()).is_some() {
                    return Err(ParseError::new(n, format!("`{head}` given twice")));
                }
            }
            _ => return Err(ParseError::new(n, format!("unrecognized line `{line}`"))),
        }
    }
    if props.len() > MAX_PROPS {
        return Err(ParseError::new(0, "too many atomic propositions"));
    }
    let mut si = HashMap::new();
    for (i, s) in states.iter().enumerate() {
        if si.insert(s.as_str(), i).is_some() {
            return Err(ParseError::new(0, format!("duplicate state `{s}`")));
        }
    }
    let state = |n: usize, name: &str| {
        si.get(name)
            .copied()
            .ok_or_else(|| ParseError::new(n, format!("unknown state `{name}`")))
    };
    let letters = 1usize << props.len();
    let mut delta: Vec<Option<usize>> = vec![None; states.len() * letters];
    for &(n, src, letter, dst) in &edges {
        let inner = letter
            .strip_prefix('{')
            .and_then(|l| l.strip_suffix('}'))
            .ok_or_else(|| ParseError::new(n, format!("bad letter `{letter}`")))?;
        let mut l = 0usize;
        for p in inner.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()) {
            let i = props
                .iter()
                .position(|x| x == p)
                .ok_or_else(|| ParseError::new(n, format!("unknown proposition `{p}`")))?;
            l |= 1 << i;
        }
        let slot = &mut delta[state(n, src)? * letters + l];
        if slot.replace(state(n, dst)?).is_some() {
            return Err(ParseError::new(n, "transition given twice"));
        }
    }
    let delta = delta
        .iter()
        .enumerate()
        .map(|(k, d)| {
            d.ok_or_else(|| {
                ParseError::new(
                    0,
                    format!(
                        "no transition from `{}` on {}",
                        states[k / letters],
                        letter_text(&props, (k % letters) as Letter)
                    ),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (n0, init) = initial.ok_or_else(|| ParseError::new(0, "missing `initial`"))?;
    let init = state(n0, &init)?;
    let mut out = Vec::new();
    for (n, avoid, repeat) in pairs {
        let ids = |set: Option<Vec<String>>| {
            set.unwrap_or_default()
                .iter()
                .map(|q| state(n, q))
                .collect::<Result<Vec<_>, _>>()
        };
        out.push(RabinPair::from_sets(states.len(), &ids(avoid)?, &ids(repeat)?));
    }
    Dra::new(states, props, delta, init, out).map_err(|e| ParseError::new(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltlsynth_core::rabin::builtin_dra;

    #[test]
    fn builtins_round_trip() {
        for name in ["case1", "case2"] {
            let d = builtin_dra(name).unwrap();
            let text = write_dra(&d).unwrap();
            assert_eq!(parse_dra(&text).unwrap(), d);
        }
    }

    #[test]
    fn missing_transition_is_named() {
        let text = "ap a\nstates q\ninitial q\nq -- {} --> q\npairs:\n  repeat: q\n";
        let e = parse_dra(text).unwrap_err();
        assert!(e.message.contains("{a}"), "{e}");
    }

    #[test]
    fn letter_accepts_spaces_and_commas() {
        let text = "ap a b\nstates q r\ninitial q\n\
            q -- {} --> q\nq -- {a} --> q\nq -- {b} --> q\nq -- {b a} --> r\n\
            r -- {} --> r\nr -- {a} --> r\nr -- {b} --> r\nr -- {a,b} --> r\n\
            pairs:\n  avoid:\n  repeat: r\n";
        let d = parse_dra(text).unwrap();
        assert_eq!(d.step(0, 3).unwrap(), 1);
        assert_eq!(d.pairs()[0].repeat, vec![false, true]);
    }
}
