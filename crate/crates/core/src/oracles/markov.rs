//! Reference computations on finite Markov chains.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linalg::Matrix;

pub type Dense = Vec<Vec<f64>>;

pub fn to_dense(t: &Matrix) -> Dense {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}

fn mat_mul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, k) = (a.len(), b[0].len(), b.len());
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x != 0.0 {
                for j in 0..m {
                    c[i][j] += x * b[l][j];
                }
            }
        }
    }
    c
}

/// `(1/N) Σ_{t<N} Tᵗ` for `N = 2^doublings`.
pub fn cesaro_average(t: &Matrix, doublings: u32) -> Dense {
    let n = t.rows();
    let mut power = to_dense(t);
    let mut avg: Dense = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..doublings {
        // avg_{2N} = (avg_N + T^N avg_N) / 2
        let shifted = mat_mul(&power, &avg);
        for i in 0..n {
            for j in 0..n {
                avg[i][j] = 0.5 * (avg[i][j] + shifted[i][j]);
            }
        }
        power = mat_mul(&power, &power);
    }
    avg
}

/// Gauss-Jordan elimination with partial pivoting. `None` if singular.
pub fn gauss_jordan(mut a: Dense, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
        }
        b[col] /= d;
        for i in 0..n {
            if i != col && a[i][col] != 0.0 {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                }
                b[i] -= f * b[col];
            }
        }
    }
    Some(b)
}

/// Reflexive-transitive reachability by Warshall's algorithm.
pub fn reachability(t: &Dense) -> Vec<Vec<bool>> {
    let n = t.len();
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || t[i][j] > 0.0).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Closed communicating classes, each sorted, in order of smallest member.
pub fn recurrent_classes(t: &Dense) -> Vec<Vec<usize>> {
    let n = t.len();
    let r = reachability(t);
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] || !(0..n).all(|j| !r[i][j] || r[j][i]) {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| r[i][j]).collect();
        class.iter().for_each(|&j| seen[j] = true);
        out.push(class);
    }
    out
}

/// Probability of ever entering `target` from each state.
pub fn first_passage(t: &Dense, target: &[bool]) -> Vec<f64> {
    let n = t.len();
    let r = reachability(t);
    let live: Vec<usize> = (0..n)
        .filter(|&i| !target[i] && (0..n).any(|j| target[j] && r[i][j]))
        .collect();
    let mut x: Vec<f64> = target.iter().map(|&b| f64::from(u8::from(b))).collect();
    if live.is_empty() {
        return x;
    }
    let a: Dense = live
        .iter()
        .map(|&i| live.iter().map(|&j| f64::from(u8::from(i == j)) - t[i][j]).collect())
        .collect();
    let b: Vec<f64> = live
        .iter()
        .map(|&i| (0..n).filter(|&j| target[j]).map(|j| t[i][j]).sum())
        .collect();
    let sol = gauss_jordan(a, b).expect("first-passage system is nonsingular on live states");
    for (k, &i) in live.iter().enumerate() {
        x[i] = sol[k];
    }
    x
}

/// Stationary distribution of `t` restricted to a closed class.
pub fn class_stationary(t: &Dense, class: &[usize]) -> Vec<f64> {
    let m = class.len();
    // πᵀ(T_C − I) = 0 with the last equation replaced by Σπ = 1
    let mut a: Dense = (0..m)
        .map(|r| (0..m).map(|c| t[class[c]][class[r]] - f64::from(u8::from(r == c))).collect())
        .collect();
    a[m - 1] = vec![1.0; m];
    let mut b = vec![0.0; m];
    b[m - 1] = 1.0;
    gauss_jordan(a, b).expect("an irreducible class has a unique stationary law")
}

/// Limiting matrix assembled from class stationary laws and absorption
/// probabilities.
pub fn structural_limit(t: &Dense) -> Dense {
    let n = t.len();
    let mut pi = vec![vec![0.0; n]; n];
    for class in recurrent_classes(t) {
        let mut target = vec![false; n];
        class.iter().for_each(|&j| target[j] = true);
        let absorb = first_passage(t, &target);
        let stat = class_stationary(t, &class);
        for i in 0..n {
            for (k, &j) in class.iter().enumerate() {
                pi[i][j] += absorb[i] * stat[k];
            }
        }
    }
    pi
}

pub fn max_abs_diff(a: &Dense, b: &Matrix) -> f64 {
    let mut d: f64 = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            d = d.max((x - b[(i, j)]).abs());
        }
    }
    d
}

/// Probability of the finite path `path` under initial law `init`.
pub fn path_probability(t: &Dense, init: &[f64], path: &[usize]) -> f64 {
    let Some(&first) = path.first() else { return 1.0 };
    path.windows(2).fold(init[first], |p, w| p * t[w[0]][w[1]])
}

/// All state sequences `s_0 … s_k` whose first visit to `target` is at `k`.
pub fn first_hit_paths(n: usize, target: &[bool], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(k + 1);
    extend_paths(n, target, k, &mut path, &mut out);
    out
}

fn extend_paths(n: usize, target: &[bool], k: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    for s in 0..n {
        let last = path.len() == k;
        if target[s] != last {
            continue;
        }
        path.push(s);
        if last {
            out.push(path.clone());
        } else {
            extend_paths(n, target, k, path, out);
        }
        path.pop();
    }
}

fn sample(row: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}

/// Monte Carlo estimate of the probability of ever entering `target`.
/// Rollouts stop once `target` is no longer reachable.
pub fn mc_absorption(t: &Dense, init: &[f64], target: &[bool], rollouts: usize, rng: &mut impl Rng) -> f64 {
    let n = t.len();
    let r = reachability(t);
    let live: Vec<bool> = (0..n).map(|i| (0..n).any(|j| target[j] && r[i][j])).collect();
    let mut hits = 0usize;
    for _ in 0..rollouts {
        let mut s = sample(init, rng);
        while live[s] && !target[s] {
            s = sample(&t[s], rng);
        }
        hits += usize::from(target[s]);
    }
    hits as f64 / rollouts as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    #[test]
    fn cesaro_averages_out_periodicity() {
        let avg = cesaro_average(&two_state(), 10);
        assert!((avg[0][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn structural_limit_of_a_gambler_chain() {
        let t = to_dense(&Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.25, 0.25, 0.5],
            vec![0.0, 0.0, 1.0],
        ]));
        let pi = structural_limit(&t);
        assert!((pi[1][0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi[1][2] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn first_hit_paths_avoid_the_target_before_the_end() {
        let paths = first_hit_paths(3, &[false, false, true], 2);
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p[2] == 2 && p[..2].iter().all(|&s| s != 2)));
    }
}
