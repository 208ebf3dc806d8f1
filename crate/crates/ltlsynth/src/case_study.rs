//! Grid-world case-study drivers.
//!
//! Case 1 asks the robot to reach cell 6 and stay there without ever
//! entering cell 3, starting from a uniform controller. Case 2 asks it to
//! visit cells 0 and 6 infinitely often while avoiding cell 3, starting from
//! a searched seed with one transient and two steady I-states.

use std::fmt::Write;

use ltlsynth_core::bpi::{
    find_initial_controller, repair_steady_rows, run_bpi_with, uniform_seed, BpiConfig, BpiReport,
    SeedReport,
};
use ltlsynth_core::controller::Sfsc;
use ltlsynth_core::gridworld::{build_gridworld, GridWorldSpec};
use ltlsynth_core::model::LabeledPomdp;
use ltlsynth_core::optimize::LpSolver;
use ltlsynth_core::product::{build_product_with, LabelConvention, ProductOptions, ProductPomdp};
use ltlsynth_core::rabin::{builtin_dra, Dra};
use ltlsynth_core::Error;

use crate::formats::Num;
use crate::simulate::{simulate, SimConfig, SimStats};

/// Product options used by both case studies.
pub const CASE_OPTIONS: ProductOptions = ProductOptions {
    convention: LabelConvention::Destination,
    prune_unreachable: true,
};

pub const GOAL_CELL: usize = 6;
pub const FORBIDDEN_CELL: usize = 3;

pub struct CaseSetup {
    pub model: LabeledPomdp,
    pub dra: Dra,
    pub product: ProductPomdp,
}

/// Builds the grid, automaton and product. Fails with `EmptyRepeat` when no
/// Repeat state is reachable, as on a single-row grid where the goal lies
/// behind the forbidden cell.
pub fn case_setup(id: u8, rows: usize) -> Result<CaseSetup, Error> {
    let spec = GridWorldSpec::with_rows(rows);
    let model = build_gridworld(&spec)?;
    let dra = builtin_dra(match id {
        1 => "case1",
        2 => "case2",
        _ => return Err(Error::InvalidConfig(format!("unknown case study {id}"))),
    })?;
    let product = build_product_with(&model, &dra, CASE_OPTIONS)?;
    if !product.pairs().iter().any(|p| p.repeat.iter().any(|&r| r)) {
        return Err(Error::EmptyRepeat);
    }
    Ok(CaseSetup { model, dra, product })
}

/// Case 1 seed: uniform over one transient and one steady I-state, with the
/// steady rows cut back to their safe support.
pub fn case1_seed(product: &ProductPomdp) -> Result<Sfsc, Error> {
    let uniform = uniform_seed(product, 1, 1)?;
    repair_steady_rows(product, &uniform)?
        .ok_or_else(|| Error::InvalidController("no safe steady support for the seed".into()))
}

pub fn case2_seed(product: &ProductPomdp, config: &BpiConfig, solver: &dyn LpSolver) -> Result<SeedReport, Error> {
    find_initial_controller(product, 1, 2, config, solver)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub id: u8,
    pub rows: usize,
    pub bpi: BpiConfig,
    pub sim_traces: usize,
    pub sim_seed: u64,
    pub sim_horizon: usize,
    pub reach_by: usize,
}

impl CaseConfig {
    /// Defaults: one row and `n_max = 15` for case 1, three rows for case 2.
    pub fn new(id: u8) -> Self {
        let mut bpi = BpiConfig::default();
        if id == 1 {
            bpi.n_max = 15;
        }
        Self {
            id,
            rows: if id == 1 { 1 } else { 3 },
            bpi,
            sim_traces: 10_000,
            sim_seed: 7,
            sim_horizon: if id == 1 { 20 } else { 200 },
            reach_by: 20,
        }
    }
}

/// One row of the case-study series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub iteration: usize,
    pub n_istates: usize,
    pub n_steady: usize,
    pub value: f64,
    pub residual: f64,
    pub repeat_frequency: f64,
    pub reach_probability: f64,
    pub sim_repeat_frequency: f64,
}

pub struct CaseResult {
    pub seed: Sfsc,
    pub seed_report: Option<SeedReport>,
    pub report: BpiReport,
    pub series: Vec<SeriesRow>,
    /// The controller after every iteration, starting with the seed.
    pub controllers: Vec<Sfsc>,
    pub seed_stats: SimStats,
    pub final_stats: SimStats,
}

pub fn sim_config(setup: &CaseSetup, config: &CaseConfig, initial_istate: usize) -> SimConfig {
    let mut sim = SimConfig::new(&setup.model, config.sim_horizon, config.sim_traces, config.sim_seed);
    sim.initial_istate = initial_istate;
    sim.convention = setup.product.options().convention;
    sim.rabin_index = config.bpi.rabin_index;
    sim.goal[GOAL_CELL] = true;
    sim.forbidden[FORBIDDEN_CELL] = true;
    sim.reach_by = config.reach_by;
    sim
}

pub fn run_case_study(config: &CaseConfig, solver: &dyn LpSolver) -> Result<CaseResult, Error> {
    let setup = case_setup(config.id, config.rows)?;
    let product = setup.product.clone().with_rabin_index(config.bpi.rabin_index)?;
    let (seed, seed_report) = if config.id == 1 {
        (case1_seed(&product)?, None)
    } else {
        let r = case2_seed(&product, &config.bpi, solver)?;
        (r.sfsc.clone(), Some(r))
    };
    let mut series = Vec::new();
    let mut controllers = Vec::new();
    let mut seed_stats = None;
    let mut final_stats = None;
    let mut sim_error = None;
    let report = run_bpi_with(&product, &seed, &config.bpi, solver, &mut |rec, sfsc, eval| {
        controllers.push(sfsc.clone());
        let sim = sim_config(&setup, config, eval.initial_istate);
        match simulate(&setup.model, &setup.dra, sfsc, &sim) {
            Ok(stats) => {
                series.push(SeriesRow {
                    iteration: rec.iteration,
                    n_istates: rec.n_istates,
                    n_steady: rec.n_steady,
                    value: rec.value,
                    residual: rec.residual,
                    repeat_frequency: rec.repeat_frequency,
                    reach_probability: stats.reach_probability,
                    sim_repeat_frequency: stats.repeat_frequency,
                });
                if rec.iteration == 0 {
                    seed_stats = Some(stats.clone());
                }
                final_stats = Some(stats);
            }
            Err(e) => sim_error = Some(e),
        }
    })?;
    if let Some(e) = sim_error {
        return Err(e);
    }
    let seed_stats = seed_stats.expect("the observer sees the seed");
    Ok(CaseResult {
        seed,
        seed_report,
        report,
        series,
        controllers,
        seed_stats,
        final_stats: final_stats.expect("the observer sees the seed"),
    })
}

pub const SERIES_HEADER: &str =
    "iteration,n_istates,n_steady,value,residual,repeat_frequency,reach_probability,sim_repeat_frequency";

pub fn write_series(rows: &[SeriesRow]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            r.n_istates,
            r.n_steady,
            Num(r.value),
            Num(r.residual),
            Num(r.repeat_frequency),
            Num(r.reach_probability),
            Num(r.sim_repeat_frequency)
        )
        .unwrap();
    }
    out
}
