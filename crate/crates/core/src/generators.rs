//! Randomized desk-scale instances of each information structure, plus the
//! worked symmetric two-arm example.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::environments::{
    make_bernoulli_bandit, make_full_information, make_linear_bandit, make_semi_bandit,
    make_semi_bandit_product, ModelFamily, StructureKind,
};
use crate::error::Result;
use crate::info_math::ProbVector;

/// Two arms, two models with swapped means 0.9 / 0.1, uniform prior.
pub fn symmetric_bandit() -> ModelFamily {
    make_bernoulli_bandit(
        &[vec![0.9, 0.1], vec![0.1, 0.9]],
        &ProbVector::uniform(2).expect("non-empty"),
    )
    .expect("valid constant instance")
}

/// Strictly positive random prior over `n` models.
pub fn random_prior<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ProbVector {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    ProbVector::from_unnormalized(w).expect("positive weights")
}

pub fn random_bandit<R: Rng + ?Sized>(rng: &mut R) -> Result<ModelFamily> {
    let actions = rng.random_range(2..=6);
    let models = rng.random_range(2..=6);
    let means: Vec<Vec<f64>> = (0..models)
        .map(|_| (0..actions).map(|_| rng.random::<f64>()).collect())
        .collect();
    make_bernoulli_bandit(&means, &random_prior(models, rng))
}

pub fn random_full_information<R: Rng + ?Sized>(rng: &mut R) -> Result<ModelFamily> {
    let actions = rng.random_range(2..=5);
    let z_count = rng.random_range(2..=4);
    let models = rng.random_range(2..=6);
    let z_dists: Vec<Vec<f64>> = (0..models)
        .map(|_| random_prior(z_count, rng).into_vec())
        .collect();
    let rewards: Vec<Vec<f64>> = (0..actions)
        .map(|_| (0..z_count).map(|_| rng.random::<f64>()).collect())
        .collect();
    make_full_information(&z_dists, &rewards, &random_prior(models, rng))
}

/// Features in `[0, 1/d]^d` and parameters in `[0, 1]^d`, so every mean
/// `aᵀθ` lies in `[0, 1]`.
pub fn random_linear<R: Rng + ?Sized>(rng: &mut R) -> Result<ModelFamily> {
    let d = rng.random_range(1..=3);
    random_linear_with_dim(d, rng)
}

pub fn random_linear_with_dim<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ModelFamily> {
    let actions = rng.random_range(2..=8);
    let models = rng.random_range(2..=6);
    let features: Vec<Vec<f64>> = (0..actions)
        .map(|_| (0..d).map(|_| rng.random::<f64>() / d as f64).collect())
        .collect();
    let thetas: Vec<Vec<f64>> = (0..models)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    make_linear_bandit(&features, &thetas, &random_prior(models, rng))
}

/// All `m`-subsets of `0..d` in lexicographic order.
pub fn all_subsets(d: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, m, &mut Vec::with_capacity(m), &mut out);
    out
}

fn random_semi_bandit_actions<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Vec<Vec<usize>> {
    if rng.random_bool(0.6) {
        return all_subsets(d, m);
    }
    // Random subsets of size 1..=m, at least two distinct ones.
    let count = rng.random_range(2..=10);
    let mut actions: Vec<Vec<usize>> = Vec::new();
    let mut comps: Vec<usize> = (0..d).collect();
    for _ in 0..count {
        comps.shuffle(rng);
        let size = rng.random_range(1..=m);
        let mut a = comps[..size].to_vec();
        a.sort_unstable();
        if !actions.contains(&a) {
            actions.push(a);
        }
    }
    if actions.len() < 2 {
        actions = all_subsets(d, m);
    }
    actions
}

/// Semi-bandit family with a product prior: up to three components carry two
/// candidate success probabilities, the rest are known.
pub fn random_semi_bandit<R: Rng + ?Sized>(rng: &mut R) -> Result<ModelFamily> {
    let d = rng.random_range(2..=6);
    let m = rng.random_range(1..=d.min(3));
    let actions = random_semi_bandit_actions(d, m, rng);
    let uncertain = rng.random_range(1..=d.min(3));
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut candidates = vec![Vec::new(); d];
    let mut priors = Vec::with_capacity(d);
    for (rank, &i) in order.iter().enumerate() {
        if rank < uncertain {
            let a: f64 = rng.random();
            let mut b: f64 = rng.random();
            while (a - b).abs() < 1e-3 {
                b = rng.random();
            }
            candidates[i] = vec![a, b];
        } else {
            candidates[i] = vec![rng.random()];
        }
    }
    for c in &candidates {
        priors.push(random_prior(c.len(), rng));
    }
    make_semi_bandit_product(d, m, &actions, &candidates, &priors)
}

/// Semi-bandit family whose models move components jointly, so components
/// are not independent under the posterior.
pub fn random_semi_bandit_mixture<R: Rng + ?Sized>(rng: &mut R) -> Result<ModelFamily> {
    let d = rng.random_range(2..=6);
    let m = rng.random_range(1..=d.min(3));
    let actions = random_semi_bandit_actions(d, m, rng);
    let models = rng.random_range(2..=5);
    let probs: Vec<Vec<f64>> = (0..models)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    make_semi_bandit(d, m, &actions, &probs, &random_prior(models, rng))
}

pub fn random_instance<R: Rng + ?Sized>(kind: StructureKind, rng: &mut R) -> Result<ModelFamily> {
    match kind {
        StructureKind::Bandit => random_bandit(rng),
        StructureKind::FullInformation => random_full_information(rng),
        StructureKind::Linear => random_linear(rng),
        StructureKind::SemiBandit => random_semi_bandit(rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::Structure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subsets_count() {
        assert_eq!(all_subsets(4, 2).len(), 6);
        assert_eq!(all_subsets(6, 3).len(), 20);
        assert_eq!(all_subsets(1, 1), vec![vec![0]]);
    }

    #[test]
    fn generators_produce_valid_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            for kind in StructureKind::ALL {
                let f = random_instance(kind, &mut rng).unwrap();
                assert_eq!(f.structure().kind(), kind);
                assert!(f.action_count() <= 20 && f.outcome_count() <= 64);
            }
            let sb = random_semi_bandit(&mut rng).unwrap();
            match sb.structure() {
                Structure::SemiBandit(meta) => assert!(meta.posterior_independent),
                _ => unreachable!(),
            }
            assert!(sb.model_count() <= 8);
            random_semi_bandit_mixture(&mut rng).unwrap();
        }
    }
}
