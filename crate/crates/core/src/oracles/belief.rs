//! Beliefs by summing over every hidden state path.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::LabeledPomdp;

/// Posterior over the current state after observing `observations[0..=k]`
/// with `actions[0..k]` taken in between. `None` if the history has zero
/// probability.
pub fn belief_by_paths(model: &LabeledPomdp, observations: &[usize], actions: &[usize]) -> Option<Vec<f64>> {
    assert_eq!(observations.len(), actions.len() + 1);
    let n = model.n_states();
    let mut post = vec![0.0; n];
    let mut path = vec![0usize; observations.len()];
    loop {
        let mut p = model.initial()[path[0]] * model.observation(path[0], observations[0]);
        for k in 1..path.len() {
            p *= model.transition(path[k - 1], actions[k - 1], path[k]) * model.observation(path[k], observations[k]);
        }
        post[*path.last().unwrap()] += p;
        // odometer increment
        let mut i = 0;
        loop {
            if i == path.len() {
                let z: f64 = post.iter().sum();
                return (z > 0.0).then(|| post.iter().map(|x| x / z).collect());
            }
            path[i] += 1;
            if path[i] < n {
                break;
            }
            path[i] = 0;
            i += 1;
        }
    }
}
