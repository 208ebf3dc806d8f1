//! Product dump: the POMDP format over product states, followed by
//!
//! ```text
//! components
//! dra_states 3
//! convention destination
//! pruned true
//! s1.wait 1 0
//! ...
//! pairs
//! selected 0
//! 0 avoid : s1.wait s3.reject
//! 0 repeat : s6.hold_b
//! ```
//!
//! Component lines give each product state's model and automaton index.

use std::collections::HashMap;
use std::fmt::Write;

use ltlsynth_core::model::LabeledPomdp;
use ltlsynth_core::product::{LabelConvention, ProductOptions, ProductPair, ProductPomdp};

use super::pomdp::{parse_parts, write_body};
use super::{parse_usize, ParseError};

pub fn write_product(product: &ProductPomdp) -> Result<String, ParseError> {
    let mut out = String::new();
    write_body(&mut out, product.pomdp())?;
    let names = product.pomdp().state_names();
    let opts = product.options();
    out.push_str("components\n");
    writeln!(out, "dra_states {}", product.n_dra_states()).unwrap();
    let conv = match opts.convention {
        LabelConvention::Source => "source",
        LabelConvention::Destination => "destination",
    };
    writeln!(out, "convention {conv}").unwrap();
    writeln!(out, "pruned {}", opts.prune_unreachable).unwrap();
    for (s, &(m, q)) in product.components().iter().enumerate() {
        writeln!(out, "{} {m} {q}", names[s]).unwrap();
    }
    out.push_str("pairs\n");
    writeln!(out, "selected {}", product.rabin_index()).unwrap();
    for (r, p) in product.pairs().iter().enumerate() {
        for (key, set) in [("avoid", &p.avoid), ("repeat", &p.repeat)] {
            write!(out, "{r} {key} :").unwrap();
            for (s, _) in set.iter().enumerate().filter(|(_, &b)| b) {
                write!(out, " {}", names[s]).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn parse_product(text: &str) -> Result<ProductPomdp, ParseError> {
    let (parts, extra) = parse_parts(text, &["components", "pairs"])?;
    let ns = parts.states.len();
    let index: HashMap<&str, usize> = parts.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut components: Vec<Option<(usize, usize)>> = vec![None; ns];
    let mut n_dra = None;
    let mut options = ProductOptions::default();
    let mut selected = 0;
    let mut pairs: Vec<ProductPair> = Vec::new();
    for (section, n, line) in extra {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match (section, toks.as_slice()) {
            ("components", ["dra_states", k]) => n_dra = Some(parse_usize(n, k)?),
            ("components", ["convention", c]) => {
                options.convention = match *c {
                    "source" => LabelConvention::Source,
                    "destination" => LabelConvention::Destination,
                    _ => return Err(ParseError::new(n, format!("unknown convention `{c}`"))),
                }
            }
            ("components", ["pruned", b]) => {
                options.prune_unreachable = b.parse().map_err(|_| ParseError::new(n, "expected true or false"))?
            }
            ("components", [name, m, q]) => {
                let s = *index
                    .get(name)
                    .ok_or_else(|| ParseError::new(n, format!("unknown state `{name}`")))?;
                components[s] = Some((parse_usize(n, m)?, parse_usize(n, q)?));
            }
            ("pairs", ["selected", r]) => selected = parse_usize(n, r)?,
            ("pairs", [r, key @ ("avoid" | "repeat"), ":", states @ ..]) => {
                let r = parse_usize(n, r)?;
                if r > pairs.len() {
                    return Err(ParseError::new(n, "pairs must be numbered in order"));
                }
                if r == pairs.len() {
                    pairs.push(ProductPair {
                        avoid: vec![false; ns],
                        repeat: vec![false; ns],
                    });
                }
                let set = if *key == "avoid" { &mut pairs[r].avoid } else { &mut pairs[r].repeat };
                for s in states {
                    let i = *index
                        .get(s)
                        .ok_or_else(|| ParseError::new(n, format!("unknown state `{s}`")))?;
                    set[i] = true;
                }
            }
            _ => return Err(ParseError::new(n, format!("unrecognized line `{line}`"))),
        }
    }
    let components = components
        .into_iter()
        .enumerate()
        .map(|(s, c)| c.ok_or_else(|| ParseError::new(0, format!("no components for `{}`", parts.states[s]))))
        .collect::<Result<Vec<_>, _>>()?;
    let n_dra = n_dra.ok_or_else(|| ParseError::new(0, "missing `dra_states`"))?;
    let model = LabeledPomdp::new(parts).map_err(|e| ParseError::new(0, e.to_string()))?;
    ProductPomdp::from_parts(model, components, n_dra, pairs, selected)
        .map(|p| p.with_options(options))
        .map_err(|e| ParseError::new(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study::case_setup;

    #[test]
    fn case_products_round_trip() {
        for (id, rows) in [(1, 2), (2, 3)] {
            let p = case_setup(id, rows).unwrap().product;
            let text = write_product(&p).unwrap();
            let back = parse_product(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(write_product(&back).unwrap(), text);
        }
    }
}
