//! Controller text format.
//!
//! ```text
//! observations 2
//! actions 3
//! transient 0
//! steady 1 2
//! kappa argmax
//! 0,0 -> 1,2 : 0.5
//! 0,0 -> 2,0 : 0.5
//! ...
//! ```
//!
//! I-states are numbered `0..|G|` and every index must appear in exactly one
//! of `transient` and `steady`. Entries are `g,o -> g',α : p` with
//! observations and actions given by index; missing entries are zero. The
//! `kappa` line is `argmax` or `fixed <g>`.

use std::fmt::Write;

use ltlsynth_core::controller::{Kappa, Sfsc};

use super::{content_lines, parse_f64, parse_usize, Num, ParseError};

pub fn write_sfsc(sfsc: &Sfsc) -> String {
    let mut out = String::new();
    writeln!(out, "observations {}", sfsc.n_observations()).unwrap();
    writeln!(out, "actions {}", sfsc.n_actions()).unwrap();
    for (key, flag) in [("transient", false), ("steady", true)] {
        write!(out, "{key}").unwrap();
        for g in (0..sfsc.n_istates()).filter(|&g| sfsc.is_steady(g) == flag) {
            write!(out, " {g}").unwrap();
        }
        out.push('\n');
    }
    match sfsc.kappa() {
        Kappa::Argmax => out.push_str("kappa argmax\n"),
        Kappa::Fixed(g) => writeln!(out, "kappa fixed {g}").unwrap(),
    }
    let na = sfsc.n_actions();
    for g in 0..sfsc.n_istates() {
        for o in 0..sfsc.n_observations() {
            for (k, &p) in sfsc.row(g, o).iter().enumerate() {
                if p.to_bits() != 0 {
                    writeln!(out, "{g},{o} -> {},{} : {}", k / na, k % na, Num(p)).unwrap();
                }
            }
        }
    }
    out
}

fn pair(n: usize, text: &str) -> Result<(usize, usize), ParseError> {
    let (a, b) = text
        .trim()
        .split_once(',')
        .ok_or_else(|| ParseError::new(n, format!("expected `x,y`, got `{text}`")))?;
    Ok((parse_usize(n, a.trim())?, parse_usize(n, b.trim())?))
}

pub fn parse_sfsc(text: &str) -> Result<Sfsc, ParseError> {
    let mut n_obs = None;
    let mut n_act = None;
    let mut partition: [Option<Vec<usize>>; 2] = [None, None];
    let mut kappa = None;
    let mut entries = Vec::new();
    for (n, line) in content_lines(text) {
        if let Some((lhs, rhs)) = line.split_once("->") {
            let (target, p) = rhs
                .split_once(':')
                .ok_or_else(|| ParseError::new(n, "expected `g,o -> g',a : p`"))?;
            entries.push((n, pair(n, lhs)?, pair(n, target)?, parse_f64(n, p.trim())?));
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["observations", k] => n_obs = Some(parse_usize(n, k)?),
            ["actions", k] => n_act = Some(parse_usize(n, k)?),
            ["kappa", "argmax"] => kappa = Some(Kappa::Argmax),
            ["kappa", "fixed", g] => kappa = Some(Kappa::Fixed(parse_usize(n, g)?)),
            [key @ ("transient" | "steady"), ids @ ..] => {
                let ids = ids.iter().map(|t| parse_usize(n, t)).collect::<Result<Vec<_>, _>>()?;
                partition[usize::from(*key == "steady")] = Some(ids);
            }
            _ => return Err(ParseError::new(n, format!("unrecognized line `{line}`"))),
        }
    }
    let missing = |what: &str| ParseError::new(0, format!("missing `{what}`"));
    let no = n_obs.ok_or_else(|| missing("observations"))?;
    let na = n_act.ok_or_else(|| missing("actions"))?;
    let [tr, ss] = partition;
    let (tr, ss) = (tr.ok_or_else(|| missing("transient"))?, ss.ok_or_else(|| missing("steady"))?);
    let ng = tr.len() + ss.len();
    let mut flags: Vec<Option<bool>> = vec![None; ng];
    for (ids, flag) in [(&tr, false), (&ss, true)] {
        for &g in ids {
            if g >= ng || flags[g].replace(flag).is_some() {
                return Err(ParseError::new(0, format!("I-state {g} is not declared exactly once")));
            }
        }
    }
    let steady: Vec<bool> = flags.into_iter().map(|f| f.unwrap_or(false)).collect();
    let mut omega = vec![0.0; ng * no * ng * na];
    for (n, (g, o), (gn, a), p) in entries {
        if g >= ng || gn >= ng || o >= no || a >= na {
            return Err(ParseError::new(n, "index out of range"));
        }
        omega[((g * no + o) * ng + gn) * na + a] = p;
    }
    Sfsc::new(no, na, steady, omega, kappa.ok_or_else(|| missing("kappa"))?)
        .map_err(|e| ParseError::new(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_round_trips_bit_exactly() {
        let c = Sfsc::uniform(4, 3, vec![false, true, true]).unwrap();
        let text = write_sfsc(&c);
        let back = parse_sfsc(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(write_sfsc(&back), text);
    }

    #[test]
    fn fixed_kappa_round_trips() {
        let c = Sfsc::uniform(1, 2, vec![true]).unwrap().with_kappa(Kappa::Fixed(0)).unwrap();
        assert_eq!(parse_sfsc(&write_sfsc(&c)).unwrap(), c);
    }

    #[test]
    fn structure_violation_is_rejected() {
        let text = "observations 1\nactions 1\ntransient 0\nsteady 1\nkappa argmax\n\
            0,0 -> 0,0 : 1.0\n1,0 -> 0,0 : 1.0\n";
        assert!(parse_sfsc(text).unwrap_err().message.contains("transient"));
    }
}
