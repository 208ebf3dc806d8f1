//! Monte Carlo execution of a POMDP under an sFSC, with the automaton
//! reading the emitted labels alongside.

use std::fmt::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ltlsynth_core::controller::Sfsc;
use ltlsynth_core::model::{LabeledPomdp, Letter};
use ltlsynth_core::product::LabelConvention;
use ltlsynth_core::rabin::Dra;
use ltlsynth_core::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of controller steps per trace.
    pub horizon: usize,
    pub n_traces: usize,
    pub seed: u64,
    pub initial_istate: usize,
    pub convention: LabelConvention,
    pub rabin_index: usize,
    /// Model states counted as reaching the goal.
    pub goal: Vec<bool>,
    /// Model states that spoil a trace for the reach metric.
    pub forbidden: Vec<bool>,
    /// Last step at which reaching the goal still counts.
    pub reach_by: usize,
    /// First step of the tail over which Repeat visits are averaged.
    pub tail_start: usize,
    /// Model-state prefixes whose empirical probability is reported.
    pub cylinders: Vec<Vec<usize>>,
    /// Keep every trace in the output.
    pub keep_traces: bool,
}

impl SimConfig {
    /// Reach and Repeat metrics off; set the fields you need.
    pub fn new(model: &LabeledPomdp, horizon: usize, n_traces: usize, seed: u64) -> Self {
        Self {
            horizon,
            n_traces,
            seed,
            initial_istate: 0,
            convention: LabelConvention::Source,
            rabin_index: 0,
            goal: vec![false; model.n_states()],
            forbidden: vec![false; model.n_states()],
            reach_by: horizon,
            tail_start: horizon / 2,
            cylinders: Vec::new(),
            keep_traces: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimStep {
    pub state: usize,
    pub observation: usize,
    pub istate: usize,
    pub action: usize,
}

/// One execution. `steps[t]` holds the state, observation and I-state at
/// time `t` and the action taken then; `dra_states[t]` is the automaton
/// state paired with `steps[t].state`. The final state reached by the last
/// action is recorded in `final_state`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub steps: Vec<SimStep>,
    pub final_state: usize,
    pub final_istate: usize,
    pub dra_states: Vec<usize>,
    pub hit_forbidden: bool,
    /// First time the goal was entered with no forbidden state before it.
    pub reached_goal_at: Option<usize>,
    /// Times at which the automaton was in the selected Repeat set.
    pub repeat_visits: Vec<usize>,
}

impl SimTrace {
    /// Model states at times `0..=horizon`.
    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.state).chain(std::iter::once(self.final_state))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub n_traces: usize,
    /// Fraction of traces entering the goal by `reach_by` without touching a
    /// forbidden state first.
    pub reach_probability: f64,
    /// Fraction of traces touching a forbidden state within the horizon.
    pub avoid_probability: f64,
    /// Mean fraction of tail steps spent in the selected Repeat set.
    pub repeat_frequency: f64,
    pub cylinder_frequencies: Vec<f64>,
    pub traces: Vec<SimTrace>,
}

/// Binomial standard error of an empirical frequency.
pub fn std_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn letter_map(model: &LabeledPomdp, dra: &Dra) -> Result<Vec<Letter>, Error> {
    if model.props().len() != dra.props().len() {
        return Err(Error::AlphabetMismatch);
    }
    let map: Vec<usize> = model
        .props()
        .iter()
        .map(|p| dra.props().iter().position(|d| d == p).ok_or(Error::AlphabetMismatch))
        .collect::<Result<_, _>>()?;
    Ok(model
        .labels()
        .iter()
        .map(|&l| {
            map.iter()
                .enumerate()
                .filter(|&(i, _)| l & (1 << i) != 0)
                .fold(0, |acc, (_, &j)| acc | (1 << j))
        })
        .collect())
}

fn table(rows: impl Iterator<Item = Vec<f64>>) -> Vec<Option<WeightedIndex<f64>>> {
    rows.map(|r| WeightedIndex::new(r).ok()).collect()
}

struct Sampler {
    n_obs: usize,
    n_actions: usize,
    initial: WeightedIndex<f64>,
    transition: Vec<Option<WeightedIndex<f64>>>,
    observation: Vec<Option<WeightedIndex<f64>>>,
    omega: Vec<Option<WeightedIndex<f64>>>,
}

fn pick(t: &[Option<WeightedIndex<f64>>], k: usize, rng: &mut ChaCha8Rng, what: &str) -> Result<usize, Error> {
    t[k].as_ref()
        .map(|d| d.sample(rng))
        .ok_or_else(|| Error::InvalidModel(format!("{what} row {k} has no mass")))
}

pub fn simulate(model: &LabeledPomdp, dra: &Dra, sfsc: &Sfsc, config: &SimConfig) -> Result<SimStats, Error> {
    let (ns, na, no) = (model.n_states(), model.n_actions(), model.n_observations());
    if sfsc.n_observations() != no || sfsc.n_actions() != na {
        return Err(Error::DimensionMismatch {
            expected: no * na,
            found: sfsc.n_observations() * sfsc.n_actions(),
        });
    }
    if config.initial_istate >= sfsc.n_istates() {
        return Err(Error::UnknownState(config.initial_istate));
    }
    let pair = dra
        .pairs()
        .get(config.rabin_index)
        .ok_or_else(|| Error::InvalidConfig(format!("no Rabin pair {}", config.rabin_index)))?;
    let letters = letter_map(model, dra)?;
    let sampler = Sampler {
        n_obs: no,
        n_actions: na,
        initial: WeightedIndex::new(model.initial())
            .map_err(|_| Error::InvalidModel("initial distribution has no mass".into()))?,
        transition: table((0..ns * na).map(|k| model.transition_row(k / na, k % na).to_vec())),
        observation: table((0..ns).map(|s| model.observation_row(s).to_vec())),
        omega: table((0..sfsc.n_istates() * no).map(|k| sfsc.row(k / no, k % no).to_vec())),
    };
    let mut reached = 0usize;
    let mut avoided = 0usize;
    let mut repeat_sum = 0.0;
    let mut cylinder_hits = vec![0usize; config.cylinders.len()];
    let mut traces = Vec::new();
    for i in 0..config.n_traces {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let trace = run_trace(&sampler, dra, &letters, &pair.repeat, config, &mut rng)?;
        reached += usize::from(trace.reached_goal_at.is_some());
        avoided += usize::from(trace.hit_forbidden);
        let tail = config.horizon + 1 - config.tail_start.min(config.horizon);
        let in_tail = trace.repeat_visits.iter().filter(|&&t| t >= config.tail_start).count();
        repeat_sum += in_tail as f64 / tail as f64;
        for (hits, cyl) in cylinder_hits.iter_mut().zip(&config.cylinders) {
            if cyl.len() <= config.horizon + 1 && trace.states().take(cyl.len()).eq(cyl.iter().copied()) {
                *hits += 1;
            }
        }
        if config.keep_traces {
            traces.push(trace);
        }
    }
    let n = config.n_traces.max(1) as f64;
    Ok(SimStats {
        n_traces: config.n_traces,
        reach_probability: reached as f64 / n,
        avoid_probability: avoided as f64 / n,
        repeat_frequency: repeat_sum / n,
        cylinder_frequencies: cylinder_hits.iter().map(|&h| h as f64 / n).collect(),
        traces,
    })
}

fn run_trace(
    sampler: &Sampler,
    dra: &Dra,
    letters: &[Letter],
    repeat: &[bool],
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SimTrace, Error> {
    let mut s = sampler.initial.sample(rng);
    let mut q = dra.step(dra.initial(), letters[s])?;
    let mut g = config.initial_istate;
    let mut trace = SimTrace {
        steps: Vec::with_capacity(config.horizon),
        final_state: s,
        final_istate: g,
        dra_states: Vec::with_capacity(config.horizon + 1),
        hit_forbidden: false,
        reached_goal_at: None,
        repeat_visits: Vec::new(),
    };
    for t in 0..=config.horizon {
        trace.dra_states.push(q);
        if repeat[q] {
            trace.repeat_visits.push(t);
        }
        if config.forbidden[s] {
            trace.hit_forbidden = true;
        }
        if trace.reached_goal_at.is_none() && !trace.hit_forbidden && config.goal[s] && t <= config.reach_by {
            trace.reached_goal_at = Some(t);
        }
        if t == config.horizon {
            break;
        }
        let o = pick(&sampler.observation, s, rng, "observation")?;
        let k = pick(&sampler.omega, g * sampler.n_obs + o, rng, "controller")?;
        let (gn, a) = (k / sampler.n_actions, k % sampler.n_actions);
        trace.steps.push(SimStep {
            state: s,
            observation: o,
            istate: g,
            action: a,
        });
        let sn = pick(&sampler.transition, s * sampler.n_actions + a, rng, "transition")?;
        q = match config.convention {
            LabelConvention::Source => dra.step(q, letters[s])?,
            LabelConvention::Destination => dra.step(q, letters[sn])?,
        };
        s = sn;
        g = gn;
    }
    trace.final_state = s;
    trace.final_istate = g;
    Ok(trace)
}

/// Summary lines followed by one block per kept trace.
pub fn write_stats(stats: &SimStats) -> String {
    let mut out = String::new();
    writeln!(out, "traces {}", stats.n_traces).unwrap();
    writeln!(out, "reach_probability {:?}", stats.reach_probability).unwrap();
    writeln!(out, "avoid_probability {:?}", stats.avoid_probability).unwrap();
    writeln!(out, "repeat_frequency {:?}", stats.repeat_frequency).unwrap();
    for (i, f) in stats.cylinder_frequencies.iter().enumerate() {
        writeln!(out, "cylinder {i} {f:?}").unwrap();
    }
    for (i, t) in stats.traces.iter().enumerate() {
        let reached = t.reached_goal_at.map_or("-".to_string(), |k| k.to_string());
        writeln!(out, "trace {i} reached {reached} forbidden {}", t.hit_forbidden).unwrap();
        out.push_str("  steps");
        for s in &t.steps {
            write!(out, " {}:{}:{}:{}", s.state, s.observation, s.istate, s.action).unwrap();
        }
        writeln!(out, " {}:-:{}:-", t.final_state, t.final_istate).unwrap();
        out.push_str("  dra");
        for q in &t.dra_states {
            write!(out, " {q}").unwrap();
        }
        out.push('\n');
    }
    out
}
