//! Exact posterior over the models of a finite family.

use serde::{Deserialize, Serialize};

use crate::environments::ModelFamily;
use crate::error::{Error, Result};
use crate::info_math::{entropy, ProbVector};

/// Weights below this are set to zero after every update.
pub const WEIGHT_FLOOR: f64 = 1e-15;

/// Events with probability below this are treated as impossible.
pub const EVENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub action: usize,
    pub outcome: usize,
}

/// `P_t`, the law of the true model given the first `step` observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    weights: ProbVector,
    step: u64,
}

impl Posterior {
    pub fn prior(family: &ModelFamily) -> Self {
        Self {
            weights: family.prior().clone(),
            step: 0,
        }
    }

    pub fn new(weights: ProbVector, step: u64) -> Self {
        Self { weights, step }
    }

    pub fn weights(&self) -> &ProbVector {
        &self.weights
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    fn check_family(&self, family: &ModelFamily) -> Result<()> {
        if self.weights.len() != family.model_count() {
            return Err(Error::InvalidArgument(format!(
                "posterior has {} weights for {} models",
                self.weights.len(),
                family.model_count()
            )));
        }
        Ok(())
    }

    /// Multiplies each weight by the likelihood of `obs` and renormalizes.
    pub fn bayes_update(&self, family: &ModelFamily, obs: HistoryEntry) -> Result<Posterior> {
        self.check_family(family)?;
        family.check_action(obs.action)?;
        family.check_outcome(obs.outcome)?;
        let mut w: Vec<f64> = self
            .weights
            .as_slice()
            .iter()
            .enumerate()
            .map(|(m, &p)| p * family.kernel_row(m, obs.action)[obs.outcome])
            .collect();
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(Error::ImpossibleObservation {
                action: obs.action,
                outcome: obs.outcome,
            });
        }
        for x in &mut w {
            *x /= total;
            if *x < WEIGHT_FLOOR {
                *x = 0.0;
            }
        }
        Ok(Posterior {
            weights: ProbVector::renormalized(w),
            step: self.step + 1,
        })
    }

    /// `α(a) = P_t(A* = a)`.
    pub fn optimal_action_distribution(&self, family: &ModelFamily) -> Result<ProbVector> {
        self.check_family(family)?;
        let mut alpha = vec![0.0; family.action_count()];
        for (&w, &opt) in self.weights.as_slice().iter().zip(family.optimal_actions()) {
            alpha[opt] += w;
        }
        Ok(ProbVector::renormalized(alpha))
    }

    /// `P_t(Y_a = ·)`.
    pub fn predictive(&self, family: &ModelFamily, action: usize) -> Result<ProbVector> {
        self.check_family(family)?;
        family.check_action(action)?;
        let mut out = vec![0.0; family.outcome_count()];
        for (m, &w) in self.weights.as_slice().iter().enumerate() {
            if w > 0.0 {
                for (o, k) in out.iter_mut().zip(family.kernel_row(m, action)) {
                    *o += w * k;
                }
            }
        }
        Ok(ProbVector::renormalized(out))
    }

    /// `P_t(Y_a = · | A* = astar)`.
    pub fn conditional_predictive(
        &self,
        family: &ModelFamily,
        action: usize,
        astar: usize,
    ) -> Result<ProbVector> {
        self.check_family(family)?;
        family.check_action(action)?;
        family.check_action(astar)?;
        let mut out = vec![0.0; family.outcome_count()];
        let mut mass = 0.0;
        for (m, &w) in self.weights.as_slice().iter().enumerate() {
            if w > 0.0 && family.optimal_actions()[m] == astar {
                mass += w;
                for (o, k) in out.iter_mut().zip(family.kernel_row(m, action)) {
                    *o += w * k;
                }
            }
        }
        if mass < EVENT_FLOOR {
            return Err(Error::ZeroProbabilityEvent(format!(
                "P(A* = {astar}) = {mass}"
            )));
        }
        for o in &mut out {
            *o /= mass;
        }
        Ok(ProbVector::renormalized(out))
    }

    /// `H_t(A*)`.
    pub fn entropy_of_optimum(&self, family: &ModelFamily) -> Result<f64> {
        Ok(entropy(&self.optimal_action_distribution(family)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::make_bernoulli_bandit;

    fn pv(w: &[f64]) -> ProbVector {
        ProbVector::new(w.to_vec()).unwrap()
    }

    fn symmetric() -> ModelFamily {
        make_bernoulli_bandit(&[vec![0.9, 0.1], vec![0.1, 0.9]], &pv(&[0.5, 0.5])).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn one_step_update() {
        let f = symmetric();
        let post = Posterior::prior(&f)
            .bayes_update(
                &f,
                HistoryEntry {
                    action: 0,
                    outcome: 1,
                },
            )
            .unwrap();
        assert!(close(post.weights().as_slice(), &[0.9, 0.1], 1e-15));
        assert_eq!(post.step(), 1);
    }

    #[test]
    fn point_mass_is_fixed() {
        let f = symmetric();
        let post = Posterior::new(pv(&[1.0, 0.0]), 0);
        let next = post
            .bayes_update(
                &f,
                HistoryEntry {
                    action: 1,
                    outcome: 0,
                },
            )
            .unwrap();
        assert_eq!(next.weights(), post.weights());
    }

    #[test]
    fn impossible_observation() {
        let f = make_bernoulli_bandit(&[vec![1.0], vec![1.0]], &pv(&[0.5, 0.5])).unwrap();
        let err = Posterior::prior(&f)
            .bayes_update(
                &f,
                HistoryEntry {
                    action: 0,
                    outcome: 0,
                },
            )
            .unwrap_err();
        assert!(matches!(
            err,
            Error::ImpossibleObservation {
                action: 0,
                outcome: 0
            }
        ));
    }

    #[test]
    fn zero_likelihood_model_is_exactly_zero() {
        let f = make_bernoulli_bandit(&[vec![1.0], vec![0.5]], &pv(&[0.5, 0.5])).unwrap();
        let post = Posterior::prior(&f)
            .bayes_update(
                &f,
                HistoryEntry {
                    action: 0,
                    outcome: 0,
                },
            )
            .unwrap();
        assert_eq!(post.weights().as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn optimal_action_distribution_examples() {
        let f = symmetric();
        let prior = Posterior::prior(&f);
        assert!(close(
            prior.optimal_action_distribution(&f).unwrap().as_slice(),
            &[0.5, 0.5],
            0.0
        ));
        let pm = Posterior::new(pv(&[0.0, 1.0]), 0);
        assert_eq!(
            pm.optimal_action_distribution(&f).unwrap().as_slice(),
            &[0.0, 1.0]
        );
        let skew = Posterior::new(pv(&[0.9, 0.1]), 0);
        assert!(close(
            skew.optimal_action_distribution(&f).unwrap().as_slice(),
            &[0.9, 0.1],
            1e-15
        ));
    }

    #[test]
    fn predictive_examples() {
        let f = symmetric();
        let pm = Posterior::new(pv(&[1.0, 0.0]), 0);
        assert!(close(
            pm.predictive(&f, 0).unwrap().as_slice(),
            f.kernel_row(0, 0),
            0.0
        ));
        let uni = Posterior::prior(&f);
        assert!(close(
            uni.predictive(&f, 0).unwrap().as_slice(),
            &[0.5, 0.5],
            1e-15
        ));
        // Kernel rows [0.9, 0.1] and [0.1, 0.9] mixed 0.7 / 0.3.
        let g = make_bernoulli_bandit(&[vec![0.1], vec![0.9]], &pv(&[0.5, 0.5])).unwrap();
        let mix = Posterior::new(pv(&[0.7, 0.3]), 0);
        let oracle = [0.7 * 0.9 + 0.3 * 0.1, 0.7 * 0.1 + 0.3 * 0.9];
        let got = mix.predictive(&g, 0).unwrap();
        assert!(close(got.as_slice(), &oracle, 1e-15));
        assert!(close(got.as_slice(), &[0.66, 0.34], 1e-15));
    }

    #[test]
    fn conditional_predictive_examples() {
        let f = symmetric();
        let uni = Posterior::prior(&f);
        assert!(close(
            uni.conditional_predictive(&f, 0, 0).unwrap().as_slice(),
            &[0.1, 0.9],
            1e-15
        ));
        let single = make_bernoulli_bandit(&[vec![0.3, 0.2]], &pv(&[1.0])).unwrap();
        let post = Posterior::prior(&single);
        assert!(close(
            post.conditional_predictive(&single, 1, 0)
                .unwrap()
                .as_slice(),
            single.kernel_row(0, 1),
            0.0
        ));
        let err = post.conditional_predictive(&single, 0, 1).unwrap_err();
        assert!(matches!(err, Error::ZeroProbabilityEvent(_)));
    }

    #[test]
    fn entropy_of_optimum_examples() {
        let f = symmetric();
        assert_eq!(
            Posterior::new(pv(&[1.0, 0.0]), 0)
                .entropy_of_optimum(&f)
                .unwrap(),
            0.0
        );
        let h = Posterior::prior(&f).entropy_of_optimum(&f).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-15);
        let h = Posterior::new(pv(&[0.9, 0.1]), 0)
            .entropy_of_optimum(&f)
            .unwrap();
        assert!((h - 0.325083).abs() < 1e-6);
    }

    #[test]
    fn mismatched_posterior_rejected() {
        let f = symmetric();
        let post = Posterior::new(pv(&[1.0]), 0);
        assert!(post.predictive(&f, 0).is_err());
    }
}
