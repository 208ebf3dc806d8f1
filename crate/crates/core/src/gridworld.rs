//! The grid-world robot navigation benchmark.
//!
//! Cell `i = x + M·y` of an `M × N` grid is model state `i`. Proposition `a`
//! holds in cell 0, `b` in cell 6 and `c` in cell 3. Observations are cells.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{LabeledPomdp, PomdpParts};
use crate::Error;

pub const ACTIONS: [&str; 5] = ["Right", "Left", "Up", "Down", "Stop"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridWorldSpec {
    pub columns: usize,
    pub rows: usize,
    /// Probability of moving in the intended direction.
    pub p_forward: f64,
    /// Probability of moving to each side of the intended direction.
    pub p_lateral: f64,
    /// Observation mass on the true cell.
    pub obs_true: f64,
    /// Observation mass on each existing 4-neighbor, before renormalization.
    pub obs_neighbor: f64,
    pub start_cell: usize,
}

impl Default for GridWorldSpec {
    fn default() -> Self {
        Self {
            columns: 7,
            rows: 1,
            p_forward: 0.8,
            p_lateral: 0.1,
            obs_true: 0.6,
            obs_neighbor: 0.1,
            start_cell: 1,
        }
    }
}

impl GridWorldSpec {
    pub fn with_rows(rows: usize) -> Self {
        Self {
            rows,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        if self.columns < 7 || self.rows == 0 {
            return bad("the grid needs at least 7 columns and 1 row");
        }
        let probs = [self.p_forward, self.p_lateral, self.obs_true, self.obs_neighbor];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("probabilities must lie in [0,1]");
        }
        if self.p_forward + 2.0 * self.p_lateral > 1.0 + 1e-12 {
            return bad("forward and lateral mass exceed 1");
        }
        if self.obs_true == 0.0 && self.obs_neighbor == 0.0 {
            return bad("observation mass must be positive");
        }
        if self.start_cell >= self.columns * self.rows {
            return bad("start cell outside the grid");
        }
        Ok(())
    }
}

/// Unit step of a direction index in `ACTIONS` order.
fn delta(dir: usize) -> (i64, i64) {
    [(1, 0), (-1, 0), (0, 1), (0, -1)][dir]
}

/// Directions perpendicular to `dir`.
fn lateral(dir: usize) -> [usize; 2] {
    if dir < 2 {
        [2, 3]
    } else {
        [0, 1]
    }
}

pub fn build_gridworld(spec: &GridWorldSpec) -> Result<LabeledPomdp, Error> {
    spec.check()?;
    let (m, n) = (spec.columns as i64, spec.rows as i64);
    let ns = spec.columns * spec.rows;
    let cell = |x: i64, y: i64| (x + m * y) as usize;
    let step = |s: usize, dir: usize| -> Option<usize> {
        let (x, y) = ((s as i64) % m, (s as i64) / m);
        let (dx, dy) = delta(dir);
        let (nx, ny) = (x + dx, y + dy);
        ((0..m).contains(&nx) && (0..n).contains(&ny)).then(|| cell(nx, ny))
    };

    let na = ACTIONS.len();
    let mut transition = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            let row = &mut transition[(s * na + a) * ns..(s * na + a + 1) * ns];
            if a == 4 {
                row[s] = 1.0;
                continue;
            }
            let stay = 1.0 - spec.p_forward - 2.0 * spec.p_lateral;
            row[s] += stay.max(0.0);
            let moves = [(a, spec.p_forward), (lateral(a)[0], spec.p_lateral), (lateral(a)[1], spec.p_lateral)];
            for (dir, p) in moves {
                match step(s, dir) {
                    Some(t) => row[t] += p,
                    None => row[s] += p,
                }
            }
        }
    }

    let mut observation = vec![0.0; ns * ns];
    for s in 0..ns {
        let row = &mut observation[s * ns..(s + 1) * ns];
        row[s] = spec.obs_true;
        for dir in 0..4 {
            if let Some(t) = step(s, dir) {
                row[t] += spec.obs_neighbor;
            }
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    }

    let mut initial = vec![0.0; ns];
    initial[spec.start_cell] = 1.0;
    let mut labels = vec![0; ns];
    labels[0] = 0b001;
    labels[6] = 0b010;
    labels[3] = 0b100;
    LabeledPomdp::new(PomdpParts {
        states: (0..ns).map(|i| format!("s{i}")).collect(),
        actions: ACTIONS.iter().map(|a| (*a).into()).collect(),
        observations: (0..ns).map(|i| format!("o{i}")).collect(),
        transition,
        observation,
        initial,
        props: vec!["a".into(), "b".into(), "c".into()],
        labels,
        rewards: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_pomdp;

    #[test]
    fn corridor_is_valid() {
        let g = build_gridworld(&GridWorldSpec::default()).unwrap();
        assert!(validate_pomdp(&g).is_empty());
        assert_eq!(g.n_states(), 7);
        assert_eq!(g.initial()[1], 1.0);
    }

    #[test]
    fn stop_is_identity() {
        let g = build_gridworld(&GridWorldSpec::with_rows(3)).unwrap();
        for s in 0..21 {
            assert_eq!(g.transition(s, 4, s), 1.0);
        }
    }

    #[test]
    fn corridor_right_keeps_lateral_mass() {
        let g = build_gridworld(&GridWorldSpec::default()).unwrap();
        let row = g.transition_row(2, 0);
        assert!((row[3] - 0.8).abs() < 1e-15);
        assert!((row[2] - 0.2).abs() < 1e-15);
        let row = g.transition_row(6, 0);
        assert!((row[6] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_observation_is_identity() {
        let spec = GridWorldSpec {
            obs_true: 1.0,
            obs_neighbor: 0.0,
            ..GridWorldSpec::with_rows(2)
        };
        let g = build_gridworld(&spec).unwrap();
        for s in 0..14 {
            for o in 0..14 {
                assert_eq!(g.observation(s, o), if s == o { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn bad_spec() {
        let spec = GridWorldSpec {
            p_forward: 0.9,
            p_lateral: 0.1,
            ..GridWorldSpec::default()
        };
        assert!(matches!(build_gridworld(&spec), Err(Error::InvalidSpec(_))));
    }
}
