//! `key = value` configuration files mirroring [`BpiConfig`]. Unknown keys
//! are errors; omitted keys keep their defaults.

use std::fmt::Write;

use ltlsynth_core::bpi::{BilinearMode, BpiConfig};
use ltlsynth_core::controller::EvalMethod;

use super::{content_lines, parse_f64, parse_usize, Num, ParseError};

pub const KEYS: [&str; 15] = [
    "n_max",
    "n_new",
    "beta",
    "eps_beta",
    "eps_feas",
    "eps_improve",
    "m1",
    "m2",
    "max_iterations",
    "rabin_index",
    "eval_method",
    "bilinear_mode",
    "support_fallback",
    "seed_repair",
    "relaxation_limit",
];

pub fn write_config(c: &BpiConfig) -> String {
    let mut out = String::new();
    for key in KEYS {
        writeln!(out, "{key} = {}", get(c, key)).unwrap();
    }
    out
}

fn get(c: &BpiConfig, key: &str) -> String {
    match key {
        "n_max" => c.n_max.to_string(),
        "n_new" => c.n_new.to_string(),
        "beta" => Num(c.beta).to_string(),
        "eps_beta" => Num(c.eps_beta).to_string(),
        "eps_feas" => Num(c.eps_feas).to_string(),
        "eps_improve" => Num(c.eps_improve).to_string(),
        "m1" => Num(c.m1).to_string(),
        "m2" => Num(c.m2).to_string(),
        "max_iterations" => c.max_iterations.to_string(),
        "rabin_index" => c.rabin_index.to_string(),
        "eval_method" => match c.eval_method {
            EvalMethod::Direct => "direct".into(),
            EvalMethod::Richardson => "richardson".into(),
        },
        "bilinear_mode" => match c.bilinear_mode {
            BilinearMode::Full => "full".into(),
            BilinearMode::Reduced => "reduced".into(),
        },
        "support_fallback" => c.support_fallback.to_string(),
        "seed_repair" => c.seed_repair.to_string(),
        "relaxation_limit" => c.relaxation_limit.to_string(),
        _ => unreachable!("key list is fixed"),
    }
}

/// Sets one field from its text form. Line `0` is used for errors outside a file.
pub fn set_field(c: &mut BpiConfig, line: usize, key: &str, value: &str) -> Result<(), ParseError> {
    let flag = |v: &str| {
        v.parse::<bool>()
            .map_err(|_| ParseError::new(line, format!("`{key}` expects true or false")))
    };
    match key {
        "n_max" => c.n_max = parse_usize(line, value)?,
        "n_new" => c.n_new = parse_usize(line, value)?,
        "beta" => c.beta = parse_f64(line, value)?,
        "eps_beta" => c.eps_beta = parse_f64(line, value)?,
        "eps_feas" => c.eps_feas = parse_f64(line, value)?,
        "eps_improve" => c.eps_improve = parse_f64(line, value)?,
        "m1" => c.m1 = parse_f64(line, value)?,
        "m2" => c.m2 = parse_f64(line, value)?,
        "max_iterations" => c.max_iterations = parse_usize(line, value)?,
        "rabin_index" => c.rabin_index = parse_usize(line, value)?,
        "eval_method" => {
            c.eval_method = match value {
                "direct" => EvalMethod::Direct,
                "richardson" => EvalMethod::Richardson,
                _ => return Err(ParseError::new(line, "eval_method is direct or richardson")),
            }
        }
        "bilinear_mode" => {
            c.bilinear_mode = match value {
                "full" => BilinearMode::Full,
                "reduced" => BilinearMode::Reduced,
                _ => return Err(ParseError::new(line, "bilinear_mode is full or reduced")),
            }
        }
        "support_fallback" => c.support_fallback = flag(value)?,
        "seed_repair" => c.seed_repair = flag(value)?,
        "relaxation_limit" => c.relaxation_limit = parse_usize(line, value)?,
        _ => return Err(ParseError::new(line, format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parses a file on top of the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<BpiConfig, ParseError> {
    let mut c = BpiConfig::default();
    apply_config(&mut c, text)?;
    c.validate().map_err(|e| ParseError::new(0, e.to_string()))?;
    Ok(c)
}

/// Applies the entries of `text` to `c` without validating.
pub fn apply_config(c: &mut BpiConfig, text: &str) -> Result<(), ParseError> {
    let mut seen = Vec::new();
    for (n, line) in content_lines(text) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ParseError::new(n, "expected `key = value`"))?;
        let k = k.trim();
        if seen.contains(&k) {
            return Err(ParseError::new(n, format!("`{k}` set twice")));
        }
        seen.push(k);
        set_field(c, n, k, v.trim())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = BpiConfig::default();
        assert_eq!(parse_config(&write_config(&c)).unwrap(), c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = parse_config("# tuned\nbeta = 0.9\nbilinear_mode = full\n").unwrap();
        assert_eq!(c.beta, 0.9);
        assert_eq!(c.bilinear_mode, BilinearMode::Full);
        assert_eq!(c.n_max, BpiConfig::default().n_max);
    }

    #[test]
    fn bad_entries_are_rejected() {
        assert_eq!(parse_config("x = 1\n").unwrap_err().line, 1);
        assert!(parse_config("beta = 1.5\n").is_err());
        assert!(parse_config("beta = 0.9\nbeta = 0.8\n").is_err());
    }
}
