//! Brute-force oracles shared by the integration tests. They use only the
//! family's kernel, reward and optimum tables and plain arithmetic, never the
//! library's information-theoretic routines.

#![allow(dead_code)]

use rand::Rng;
use tsinfo::agents::ts_select;
use tsinfo::environments::sample_outcome;
use tsinfo::{HistoryEntry, ModelFamily, Posterior};

pub fn naive_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// `I(X; Y)` of a row-major table via `H(X) + H(Y) − H(X, Y)`.
pub fn naive_mi(rows: usize, cols: usize, p: &[f64]) -> f64 {
    let mut px = vec![0.0; rows];
    let mut py = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            px[i] += p[i * cols + j];
            py[j] += p[i * cols + j];
        }
    }
    naive_entropy(&px) + naive_entropy(&py) - naive_entropy(p)
}

/// `P(A* = a)` summed directly over models.
pub fn oracle_alpha(family: &ModelFamily, w: &[f64]) -> Vec<f64> {
    let mut alpha = vec![0.0; family.action_count()];
    for (m, &wm) in w.iter().enumerate() {
        alpha[family.optimal_actions()[m]] += wm;
    }
    alpha
}

/// `I(A*; (A, Y_A))` with `A ~ α` independent of the model, from the explicit
/// joint table over `(A*, (A, Y))`.
pub fn oracle_gain(family: &ModelFamily, w: &[f64]) -> f64 {
    let na = family.action_count();
    let ny = family.outcome_count();
    let alpha = oracle_alpha(family, w);
    let cols = na * ny;
    let mut joint = vec![0.0; na * cols];
    for (m, &wm) in w.iter().enumerate() {
        let astar = family.optimal_actions()[m];
        for a in 0..na {
            for (y, &k) in family.kernel_row(m, a).iter().enumerate() {
                joint[astar * cols + a * ny + y] += wm * alpha[a] * k;
            }
        }
    }
    naive_mi(na, cols, &joint)
}

/// `I(A*; Y_a)` for a fixed action.
pub fn oracle_action_info(family: &ModelFamily, w: &[f64], a: usize) -> f64 {
    let na = family.action_count();
    let ny = family.outcome_count();
    let mut joint = vec![0.0; na * ny];
    for (m, &wm) in w.iter().enumerate() {
        let astar = family.optimal_actions()[m];
        for (y, &k) in family.kernel_row(m, a).iter().enumerate() {
            joint[astar * ny + y] += wm * k;
        }
    }
    naive_mi(na, ny, &joint)
}

pub fn mean_reward(family: &ModelFamily, m: usize, a: usize) -> f64 {
    family
        .kernel_row(m, a)
        .iter()
        .zip(family.reward_row(a))
        .map(|(k, r)| k * r)
        .sum()
}

/// `E[R(Y_{A*})] − E[R(Y_A)]` with `A ~ α`.
pub fn oracle_regret(family: &ModelFamily, w: &[f64]) -> f64 {
    let alpha = oracle_alpha(family, w);
    let mut opt = 0.0;
    let mut played = 0.0;
    for (m, &wm) in w.iter().enumerate() {
        opt += wm * mean_reward(family, m, family.optimal_actions()[m]);
        for (a, &pa) in alpha.iter().enumerate() {
            played += wm * pa * mean_reward(family, m, a);
        }
    }
    opt - played
}

/// The prior followed by `steps` posteriors along one Thompson-sampling
/// trajectory under a model drawn from the prior.
pub fn reachable_posteriors<R: Rng>(
    family: &ModelFamily,
    steps: usize,
    rng: &mut R,
) -> Vec<Posterior> {
    let prior = family.prior().as_slice();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut truth = prior.len() - 1;
    for (m, &p) in prior.iter().enumerate() {
        acc += p;
        if u < acc {
            truth = m;
            break;
        }
    }
    let mut post = Posterior::prior(family);
    let mut out = vec![post.clone()];
    for _ in 0..steps {
        let action = ts_select(&post, family, rng).unwrap();
        let sample = sample_outcome(family, truth, action, rng).unwrap();
        post = post
            .bayes_update(
                family,
                HistoryEntry {
                    action,
                    outcome: sample.outcome,
                },
            )
            .unwrap();
        out.push(post.clone());
    }
    out
}

/// Random probability vector with some exact zeros when `sparse`.
pub fn random_dist<R: Rng>(n: usize, sparse: bool, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if sparse && rng.random_bool(0.25) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}
