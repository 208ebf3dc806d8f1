//! Synthesis reports: a structured text summary and a per-iteration CSV.

use std::fmt::Write;

use ltlsynth_core::bpi::{BpiReport, IterationRecord, Termination};

use super::Num;

pub const CSV_HEADER: &str = "iteration,n_istates,n_steady,value,residual,repeat_frequency";

pub fn write_report(report: &BpiReport) -> String {
    let mut out = String::new();
    let term = match report.termination {
        Termination::NotImproved => "not-improved",
        Termination::IterationLimit => "iteration-limit",
    };
    writeln!(out, "termination {term}").unwrap();
    writeln!(out, "satisfaction {}", Num(report.satisfaction)).unwrap();
    writeln!(out, "istates {}", report.controller.n_istates()).unwrap();
    writeln!(out, "steady {}", report.controller.n_steady()).unwrap();
    writeln!(out, "iterations {}", report.records.len().saturating_sub(1)).unwrap();
    for r in &report.records {
        write_record(&mut out, r);
    }
    out
}

fn write_record(out: &mut String, r: &IterationRecord) {
    writeln!(
        out,
        "iteration {} istates {} steady {} value {} residual {} repeat_frequency {} added {}",
        r.iteration,
        r.n_istates,
        r.n_steady,
        Num(r.value),
        Num(r.residual),
        Num(r.repeat_frequency),
        r.added
    )
    .unwrap();
    if !r.improved.is_empty() {
        let ids: Vec<String> = r.improved.iter().map(|g| g.to_string()).collect();
        writeln!(out, "  improved {}", ids.join(" ")).unwrap();
    }
    if !r.epsilons.is_empty() {
        out.push_str("  epsilon");
        for &(g, e) in &r.epsilons {
            write!(out, " {g}:{}", Num(e)).unwrap();
        }
        out.push('\n');
    }
}

pub fn write_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration,
            r.n_istates,
            r.n_steady,
            Num(r.value),
            Num(r.residual),
            Num(r.repeat_frequency)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltlsynth_core::controller::Sfsc;

    fn report() -> BpiReport {
        let rec = |i: usize, v: f64| IterationRecord {
            iteration: i,
            n_istates: 2,
            n_steady: 1,
            value: v,
            residual: 0.0,
            repeat_frequency: 0.25,
            epsilons: vec![(0, 1e-3)],
            improved: vec![0],
            added: 0,
        };
        BpiReport {
            records: vec![rec(0, 0.1), rec(1, 0.2)],
            controller: Sfsc::uniform(1, 1, vec![false, true]).unwrap(),
            termination: Termination::NotImproved,
            satisfaction: 0.5,
        }
    }

    #[test]
    fn csv_has_one_row_per_record() {
        let csv = write_csv(&report().records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[2], "1,2,1,0.2,0.0,0.25");
    }

    #[test]
    fn text_lists_every_iteration() {
        let text = write_report(&report());
        assert!(text.starts_with("termination not-improved\nsatisfaction 0.5\n"));
        assert_eq!(text.matches("\niteration ").count(), 2);
        assert!(text.contains("  epsilon 0:0.001\n"));
    }
}
