use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ltlsynth::case_study::{run_case_study, write_series, CaseConfig, FORBIDDEN_CELL, GOAL_CELL};
use ltlsynth::formats::config::{apply_config, set_field};
use ltlsynth::formats::dra::parse_dra;
use ltlsynth::formats::pomdp::{parse_pomdp, parse_pomdp_unchecked};
use ltlsynth::formats::product::write_product;
use ltlsynth::formats::report::{write_csv, write_report};
use ltlsynth::formats::sfsc::{parse_sfsc, write_sfsc};
use ltlsynth::formats::Num;
use ltlsynth::lp::{AutoSolver, SparseSolver};
use ltlsynth::simulate::{simulate, write_stats, SimConfig};
use ltlsynth_core::bpi::{
    evaluate, find_initial_controller, repair_steady_rows, repeat_frequency, run_bpi, uniform_seed, BpiConfig, BpiReport,
};
use ltlsynth_core::chain::{build_global_chain, limiting_matrix_with, phi_feasible_sets, ChainKind};
use ltlsynth_core::controller::Sfsc;
use ltlsynth_core::gridworld::{build_gridworld, GridWorldSpec};
use ltlsynth_core::model::{validate_pomdp, LabeledPomdp};
use ltlsynth_core::optimize::{DenseSimplex, LpSolver};
use ltlsynth_core::product::{build_product_with, LabelConvention, ProductOptions, ProductPomdp};
use ltlsynth_core::rabin::{builtin_dra, Dra};

type Res<T> = Result<T, String>;

#[derive(Parser)]
#[command(name = "ltlsynth", version, about = "Controller synthesis for labeled POMDPs against Rabin objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model (and optionally an automaton) for well-formedness.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        dra: OptDraArgs,
    },
    /// Build the product and write its dump.
    Product {
        #[command(flatten)]
        input: ProductArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze the closed loop of a controller on the product.
    Analyze {
        #[command(flatten)]
        input: ProductArgs,
        #[command(flatten)]
        bpi: BpiArgs,
        /// Controller file.
        #[arg(long)]
        controller: PathBuf,
        /// Also print the limiting matrix.
        #[arg(long)]
        limiting: bool,
    },
    /// Search for a feasible seed controller.
    SeedController {
        #[command(flatten)]
        input: ProductArgs,
        #[command(flatten)]
        bpi: BpiArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1)]
        transient: usize,
        #[arg(long, default_value_t = 1)]
        steady: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run bounded policy iteration.
    Synth {
        #[command(flatten)]
        input: ProductArgs,
        #[command(flatten)]
        bpi: BpiArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Seed controller file; without it a seed is searched for.
        #[arg(long)]
        seed: Option<PathBuf>,
        /// Size of the searched or uniform seed.
        #[arg(long, default_value_t = 1)]
        transient: usize,
        #[arg(long, default_value_t = 1)]
        steady: usize,
        /// Start from the uniform controller instead of searching.
        #[arg(long)]
        uniform_seed: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo runs of a controller on the model.
    Simulate {
        #[command(flatten)]
        input: ProductArgs,
        #[command(flatten)]
        bpi: BpiArgs,
        #[arg(long)]
        controller: PathBuf,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[arg(long, default_value_t = 10_000)]
        traces: usize,
        #[arg(long = "rng-seed", default_value_t = 0)]
        rng_seed: u64,
        /// Goal model states, comma separated.
        #[arg(long, value_delimiter = ',')]
        goal: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        forbidden: Vec<usize>,
        /// Defaults to the horizon.
        #[arg(long)]
        reach_by: Option<usize>,
        /// Defaults to half the horizon.
        #[arg(long)]
        tail_start: Option<usize>,
        /// Model-state prefix, comma separated; repeatable.
        #[arg(long)]
        cylinder: Vec<String>,
        /// Initial I-state; defaults to the argmax rule.
        #[arg(long)]
        initial_istate: Option<usize>,
        #[arg(long)]
        keep_traces: bool,
    },
    /// Run one of the grid-world case studies.
    CaseStudy {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        id: u8,
        /// Grid rows; defaults to 1 for case 1 and 3 for case 2.
        #[arg(long)]
        rows: Option<usize>,
        #[command(flatten)]
        bpi: BpiArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 10_000)]
        traces: usize,
        #[arg(long = "rng-seed", default_value_t = 7)]
        rng_seed: u64,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 20)]
        reach_by: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// POMDP file.
    #[arg(long, conflicts_with = "grid_rows")]
    model: Option<PathBuf>,
    /// Use the built-in grid world with this many rows.
    #[arg(long)]
    grid_rows: Option<usize>,
}

#[derive(Args)]
struct OptDraArgs {
    /// Rabin automaton file.
    #[arg(long, conflicts_with = "builtin")]
    dra: Option<PathBuf>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Case1,
    Case2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Source,
    Destination,
}

#[derive(Args)]
struct ProductArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    dra: OptDraArgs,
    #[arg(long, value_enum, default_value_t = Convention::Source)]
    convention: Convention,
    /// Drop product states unreachable from the initial distribution.
    #[arg(long)]
    prune: bool,
}

#[derive(Args)]
struct BpiArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_max: Option<String>,
    #[arg(long)]
    n_new: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    eps_beta: Option<String>,
    #[arg(long)]
    eps_feas: Option<String>,
    #[arg(long)]
    eps_improve: Option<String>,
    #[arg(long)]
    m1: Option<String>,
    #[arg(long)]
    m2: Option<String>,
    #[arg(long)]
    max_iterations: Option<String>,
    /// Acceptance pair; without it `synth` tries every pair.
    #[arg(long)]
    rabin_index: Option<String>,
    /// direct or richardson.
    #[arg(long)]
    eval_method: Option<String>,
    /// full or reduced.
    #[arg(long)]
    bilinear_mode: Option<String>,
    #[arg(long)]
    support_fallback: Option<String>,
    #[arg(long)]
    seed_repair: Option<String>,
    #[arg(long)]
    relaxation_limit: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Auto,
    Dense,
    Sparse,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Auto)]
    solver: SolverKind,
    /// Largest rows x columns the auto solver hands to the dense simplex.
    #[arg(long, default_value_t = 2000)]
    dense_limit: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the text report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    controller_out: Option<PathBuf>,
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(path: Option<&PathBuf>, text: &str) -> Res<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl ModelArgs {
    fn load(&self, checked: bool) -> Res<LabeledPomdp> {
        match (&self.model, self.grid_rows) {
            (Some(p), _) => {
                let text = read(p)?;
                let parsed = if checked { parse_pomdp(&text) } else { parse_pomdp_unchecked(&text) };
                parsed.map_err(|e| format!("{}: {e}", p.display()))
            }
            (None, Some(rows)) => build_gridworld(&GridWorldSpec::with_rows(rows)).map_err(|e| e.to_string()),
            (None, None) => Err("give --model <file> or --grid-rows <n>".into()),
        }
    }
}

impl OptDraArgs {
    fn load(&self) -> Res<Option<Dra>> {
        match (&self.dra, self.builtin) {
            (Some(p), _) => parse_dra(&read(p)?).map(Some).map_err(|e| format!("{}: {e}", p.display())),
            (None, Some(b)) => {
                let name = match b {
                    Builtin::Case1 => "case1",
                    Builtin::Case2 => "case2",
                };
                builtin_dra(name).map(Some).map_err(|e| e.to_string())
            }
            (None, None) => Ok(None),
        }
    }
}

struct Loaded {
    model: LabeledPomdp,
    dra: Dra,
    product: ProductPomdp,
}

impl ProductArgs {
    fn load(&self) -> Res<Loaded> {
        let model = self.model.load(true)?;
        let dra = self.dra.load()?.ok_or("give --dra <file> or --builtin case1|case2")?;
        let options = ProductOptions {
            convention: match self.convention {
                Convention::Source => LabelConvention::Source,
                Convention::Destination => LabelConvention::Destination,
            },
            prune_unreachable: self.prune,
        };
        let product = build_product_with(&model, &dra, options).map_err(|e| e.to_string())?;
        Ok(Loaded { model, dra, product })
    }
}

impl BpiArgs {
    /// The configuration, and whether the Rabin pair was chosen explicitly.
    fn resolve(&self, mut config: BpiConfig) -> Res<(BpiConfig, bool)> {
        let mut explicit = false;
        if let Some(p) = &self.config {
            let text = read(p)?;
            apply_config(&mut config, &text).map_err(|e| format!("{}: {e}", p.display()))?;
            explicit = text.lines().any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("rabin_index"));
        }
        let flags = [
            ("n_max", &self.n_max),
            ("n_new", &self.n_new),
            ("beta", &self.beta),
            ("eps_beta", &self.eps_beta),
            ("eps_feas", &self.eps_feas),
            ("eps_improve", &self.eps_improve),
            ("m1", &self.m1),
            ("m2", &self.m2),
            ("max_iterations", &self.max_iterations),
            ("rabin_index", &self.rabin_index),
            ("eval_method", &self.eval_method),
            ("bilinear_mode", &self.bilinear_mode),
            ("support_fallback", &self.support_fallback),
            ("seed_repair", &self.seed_repair),
            ("relaxation_limit", &self.relaxation_limit),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                set_field(&mut config, 0, key, v).map_err(|e| format!("--{}: {}", key.replace('_', "-"), e.message))?;
            }
        }
        explicit |= self.rabin_index.is_some();
        config.validate().map_err(|e| e.to_string())?;
        Ok((config, explicit))
    }
}

impl SolverArgs {
    fn build(&self) -> Box<dyn LpSolver> {
        match self.solver {
            SolverKind::Auto => Box::new(AutoSolver {
                dense_limit: self.dense_limit,
                ..Default::default()
            }),
            SolverKind::Dense => Box::new(DenseSimplex::default()),
            SolverKind::Sparse => Box::new(SparseSolver::default()),
        }
    }
}

fn load_controller(path: &Path, product: &ProductPomdp) -> Res<Sfsc> {
    let c = parse_sfsc(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    if c.n_observations() != product.n_observations() || c.n_actions() != product.n_actions() {
        return Err(format!(
            "controller has {} observations and {} actions; the model has {} and {}",
            c.n_observations(),
            c.n_actions(),
            product.n_observations(),
            product.n_actions()
        ));
    }
    Ok(c)
}

fn with_pair(product: &ProductPomdp, r: usize) -> Res<ProductPomdp> {
    product.clone().with_rabin_index(r).map_err(|e| e.to_string())
}

fn validate(model: &ModelArgs, dra: &OptDraArgs) -> Res<bool> {
    let m = model.load(false)?;
    let report = validate_pomdp(&m);
    for v in &report {
        println!("violation {v}");
    }
    println!(
        "model: {} states, {} actions, {} observations, {} violation(s)",
        m.n_states(),
        m.n_actions(),
        m.n_observations(),
        report.len()
    );
    if let Some(d) = dra.load()? {
        println!("automaton: {} states, {} pair(s)", d.n_states(), d.pairs().len());
        if d.props() != m.props() {
            let mut a = d.props().to_vec();
            let mut b = m.props().to_vec();
            a.sort();
            b.sort();
            if a != b {
                println!("violation: automaton propositions differ from the model's");
                return Ok(false);
            }
        }
    }
    Ok(report.is_empty())
}

fn analyze(input: &ProductArgs, bpi: &BpiArgs, controller: &Path, limiting: bool) -> Res<()> {
    let loaded = input.load()?;
    let (config, _) = bpi.resolve(BpiConfig::default())?;
    let product = with_pair(&loaded.product, config.rabin_index)?;
    let sfsc = load_controller(controller, &product)?;
    let eval = evaluate(&product, &sfsc, &config).map_err(|e| e.to_string())?;
    let chain = build_global_chain(&product, &sfsc, ChainKind::Plain, eval.initial_istate).map_err(|e| e.to_string())?;
    let phi = phi_feasible_sets(&chain, &product).map_err(|e| e.to_string())?;
    let ng = sfsc.n_istates();
    let names = product.pomdp().state_names();
    let label = |i: usize| format!("{}/{}", names[i / ng], i % ng);
    println!("product_states {}", product.n_states());
    println!("istates {} steady {}", ng, sfsc.n_steady());
    println!("initial_istate {}", eval.initial_istate);
    println!("initial_value {}", Num(eval.initial_value));
    println!("feasibility_residual {}", Num(eval.residual));
    let freq = repeat_frequency(&product, &sfsc, &eval.ssd).map_err(|e| e.to_string())?;
    println!("repeat_frequency {}", Num(freq));
    println!("satisfaction {}", Num(phi.probability));
    let dec = &phi.decomposition;
    for (c, members) in dec.recurrent_classes() {
        let list: Vec<String> = members.iter().map(|&i| label(i)).collect();
        println!(
            "recurrent_class {c} phi_feasible {} reach {} : {}",
            phi.flagged[c],
            Num(phi.reach[c]),
            list.join(" ")
        );
    }
    println!("transient_states {}", dec.transient_states().len());
    println!("avoid_gain");
    for (i, g) in eval.avoid.gain.iter().enumerate() {
        if *g != 0.0 {
            println!("  {} {}", label(i), Num(*g));
        }
    }
    if limiting {
        let pi = limiting_matrix_with(&chain.transition, dec).map_err(|e| e.to_string())?;
        println!("limiting_matrix {}", pi.rows());
        for r in 0..pi.rows() {
            let row: Vec<String> = pi.row(r).iter().map(|&x| Num(x).to_string()).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}

fn write_outputs(output: &OutputArgs, report: &BpiReport) -> Res<()> {
    emit(output.report.as_ref(), &write_report(report))?;
    if let Some(p) = &output.csv {
        write(p, &write_csv(&report.records))?;
    }
    if let Some(p) = &output.controller_out {
        write(p, &write_sfsc(&report.controller))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn synth(
    input: &ProductArgs,
    bpi: &BpiArgs,
    solver: &SolverArgs,
    seed: Option<&Path>,
    n_tr: usize,
    n_ss: usize,
    uniform: bool,
    output: &OutputArgs,
) -> Res<()> {
    let loaded = input.load()?;
    let (config, explicit) = bpi.resolve(BpiConfig::default())?;
    let solver = solver.build();
    let pairs: Vec<usize> = if explicit {
        vec![config.rabin_index]
    } else {
        (0..loaded.product.pairs().len()).collect()
    };
    let mut best: Option<(usize, BpiReport)> = None;
    for r in pairs {
        let product = with_pair(&loaded.product, r)?;
        let config = BpiConfig { rabin_index: r, ..config };
        let start = match (seed, uniform) {
            (Some(p), _) => load_controller(p, &product)?,
            (None, true) => {
                let u = uniform_seed(&product, n_tr, n_ss).map_err(|e| e.to_string())?;
                match config.seed_repair {
                    true => match repair_steady_rows(&product, &u).map_err(|e| e.to_string())? {
                        Some(fixed) => fixed,
                        None => {
                            eprintln!("pair {r}: no safe steady support for the uniform seed");
                            continue;
                        }
                    },
                    false => u,
                }
            }
            (None, false) => match find_initial_controller(&product, n_tr, n_ss, &config, solver.as_ref()) {
                Ok(s) => s.sfsc,
                Err(e) => {
                    eprintln!("pair {r}: {e}");
                    continue;
                }
            },
        };
        let report = match run_bpi(&product, &start, &config, solver.as_ref()) {
            Ok(rep) => rep,
            Err(e) => {
                eprintln!("pair {r}: {e}");
                continue;
            }
        };
        eprintln!("pair {r}: satisfaction {}", Num(report.satisfaction));
        if best.as_ref().map_or(true, |(_, b)| report.satisfaction > b.satisfaction) {
            best = Some((r, report));
        }
    }
    let (r, report) = best.ok_or("no Rabin pair admitted a feasible controller")?;
    if !explicit {
        eprintln!("best pair {r}");
    }
    write_outputs(output, &report)
}

fn parse_cells(list: &[String]) -> Res<Vec<Vec<usize>>> {
    list.iter()
        .map(|c| {
            c.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad cylinder `{c}`")))
                .collect()
        })
        .collect()
}

fn run() -> Res<bool> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Validate { model, dra } => return validate(model, dra),
        Command::Product { input, out } => {
            let loaded = input.load()?;
            emit(out.as_ref(), &write_product(&loaded.product).map_err(|e| e.to_string())?)?;
        }
        Command::Analyze {
            input,
            bpi,
            controller,
            limiting,
        } => analyze(input, bpi, controller, *limiting)?,
        Command::SeedController {
            input,
            bpi,
            solver,
            transient,
            steady,
            out,
        } => {
            let loaded = input.load()?;
            let (config, _) = bpi.resolve(BpiConfig::default())?;
            let product = with_pair(&loaded.product, config.rabin_index)?;
            let solver = solver.build();
            let found = find_initial_controller(&product, *transient, *steady, &config, solver.as_ref())
                .map_err(|e| e.to_string())?;
            let sizes: Vec<String> = found.attempts.iter().map(|(t, s)| format!("{t}+{s}")).collect();
            eprintln!("attempted {}", sizes.join(" "));
            eprintln!(
                "objective {} residual {} repaired {}",
                Num(found.objective),
                Num(found.residual),
                found.repaired
            );
            emit(out.as_ref(), &write_sfsc(&found.sfsc))?;
        }
        Command::Synth {
            input,
            bpi,
            solver,
            seed,
            transient,
            steady,
            uniform_seed,
            output,
        } => synth(input, bpi, solver, seed.as_deref(), *transient, *steady, *uniform_seed, output)?,
        Command::Simulate {
            input,
            bpi,
            controller,
            horizon,
            traces,
            rng_seed,
            goal,
            forbidden,
            reach_by,
            tail_start,
            cylinder,
            initial_istate,
            keep_traces,
        } => {
            let loaded = input.load()?;
            let (config, _) = bpi.resolve(BpiConfig::default())?;
            let product = with_pair(&loaded.product, config.rabin_index)?;
            let sfsc = load_controller(controller, &product)?;
            let mut sim = SimConfig::new(&loaded.model, *horizon, *traces, *rng_seed);
            sim.initial_istate = match initial_istate {
                Some(g) => *g,
                None => evaluate(&product, &sfsc, &config).map_err(|e| e.to_string())?.initial_istate,
            };
            sim.convention = product.options().convention;
            sim.rabin_index = config.rabin_index;
            for (cells, mask) in [(goal, &mut sim.goal), (forbidden, &mut sim.forbidden)] {
                for &c in cells {
                    *mask.get_mut(c).ok_or(format!("no model state {c}"))? = true;
                }
            }
            sim.reach_by = reach_by.unwrap_or(*horizon);
            sim.tail_start = tail_start.unwrap_or(horizon / 2);
            sim.cylinders = parse_cells(cylinder)?;
            sim.keep_traces = *keep_traces;
            let stats = simulate(&loaded.model, &loaded.dra, &sfsc, &sim).map_err(|e| e.to_string())?;
            print!("{}", write_stats(&stats));
        }
        Command::CaseStudy {
            id,
            rows,
            bpi,
            solver,
            traces,
            rng_seed,
            horizon,
            reach_by,
            output,
        } => {
            let mut case = CaseConfig::new(*id);
            let (config, _) = bpi.resolve(case.bpi)?;
            case.bpi = config;
            case.rows = rows.unwrap_or(case.rows);
            case.sim_traces = *traces;
            case.sim_seed = *rng_seed;
            case.sim_horizon = horizon.unwrap_or(case.sim_horizon);
            case.reach_by = *reach_by;
            let solver = solver.build();
            let result = run_case_study(&case, solver.as_ref()).map_err(|e| e.to_string())?;
            let mut text = format!("case {} rows {}\n", case.id, case.rows);
            if let Some(s) = &result.seed_report {
                let sizes: Vec<String> = s.attempts.iter().map(|(t, k)| format!("{t}+{k}")).collect();
                text += &format!("seed_attempts {}\nseed_objective {}\n", sizes.join(" "), Num(s.objective));
            }
            text += &format!(
                "goal_cell {GOAL_CELL} forbidden_cell {FORBIDDEN_CELL}\nseed_reach_probability {}\nfinal_reach_probability {}\nseed_sim_repeat_frequency {}\nfinal_sim_repeat_frequency {}\n",
                Num(result.seed_stats.reach_probability),
                Num(result.final_stats.reach_probability),
                Num(result.seed_stats.repeat_frequency),
                Num(result.final_stats.repeat_frequency),
            );
            text += &write_report(&result.report);
            emit(output.report.as_ref(), &text)?;
            if let Some(p) = &output.csv {
                write(p, &write_series(&result.series))?;
            }
            if let Some(p) = &output.controller_out {
                write(p, &write_sfsc(&result.report.controller))?;
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
