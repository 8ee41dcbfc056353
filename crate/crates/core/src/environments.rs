//! Finite model families for the four information structures, and outcome
//! sampling from a drawn true model.
//!
//! Every family shares one finite outcome index set across actions. Each
//! model carries an `action_count × outcome_count` row-stochastic kernel and
//! the family carries one reward table over `(action, outcome)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info_math::{ProbVector, PROB_TOLERANCE};

/// Default cap on `outcome_count × action_count × model_count`.
pub const DEFAULT_SIZE_CAP: u64 = 1_000_000;

/// Two-point value set of a semi-bandit component.
pub const COMPONENT_LOW: f64 = -0.5;
pub const COMPONENT_HIGH: f64 = 0.5;

/// Constructor inputs of a family. This is also the serialized form of a
/// [`ModelFamily`], so a family read back from a config is re-validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum FamilySpec {
    Bandit {
        /// `arm_means[model][action]`, the success probability of each arm.
        arm_means: Vec<Vec<f64>>,
        prior: Vec<f64>,
    },
    FullInformation {
        /// `z_dists[model][z]`.
        z_dists: Vec<Vec<f64>>,
        /// `rewards[action][z]`.
        rewards: Vec<Vec<f64>>,
        prior: Vec<f64>,
    },
    Linear {
        features: Vec<Vec<f64>>,
        thetas: Vec<Vec<f64>>,
        prior: Vec<f64>,
    },
    SemiBandit {
        d: usize,
        m: usize,
        /// Zero-based component indices of each action.
        actions: Vec<Vec<usize>>,
        /// `component_probs[model][i]` = P(θ_i = +1/2 | model).
        component_probs: Vec<Vec<f64>>,
        prior: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Bandit,
    FullInformation,
    Linear,
    SemiBandit,
}

impl StructureKind {
    pub const ALL: [StructureKind; 4] = [
        StructureKind::Bandit,
        StructureKind::FullInformation,
        StructureKind::Linear,
        StructureKind::SemiBandit,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StructureKind::Bandit => "bandit",
            StructureKind::FullInformation => "full_information",
            StructureKind::Linear => "linear",
            StructureKind::SemiBandit => "semi_bandit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiBanditMeta {
    pub d: usize,
    pub m: usize,
    /// Sorted component indices per action.
    pub actions: Vec<Vec<usize>>,
    pub component_probs: Vec<Vec<f64>>,
    /// True when the prior is a product over per-component parameters, so
    /// components stay independent under every posterior.
    pub posterior_independent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Bandit,
    FullInformation,
    Linear {
        dim: usize,
        features: Vec<Vec<f64>>,
        thetas: Vec<Vec<f64>>,
    },
    SemiBandit(SemiBanditMeta),
}

impl Structure {
    pub fn kind(&self) -> StructureKind {
        match self {
            Structure::Bandit => StructureKind::Bandit,
            Structure::FullInformation => StructureKind::FullInformation,
            Structure::Linear { .. } => StructureKind::Linear,
            Structure::SemiBandit(_) => StructureKind::SemiBandit,
        }
    }
}

/// A finite family of outcome models with a prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilySpec", into = "FamilySpec")]
pub struct ModelFamily {
    action_count: usize,
    outcome_count: usize,
    model_count: usize,
    /// `[model][action][outcome]`, flattened.
    kernels: Vec<f64>,
    prior: ProbVector,
    /// `[action][outcome]`, flattened.
    rewards: Vec<f64>,
    /// `[model][action]`, flattened.
    expected_rewards: Vec<f64>,
    optimal_actions: Vec<usize>,
    structure: Structure,
    spec: FamilySpec,
}

/// One draw of `Y_{t,a}` for the selected action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSample {
    pub action: usize,
    pub outcome: usize,
    pub reward: f64,
}

impl ModelFamily {
    pub fn from_spec(spec: FamilySpec) -> Result<Self> {
        Self::from_spec_with_cap(spec, DEFAULT_SIZE_CAP)
    }

    pub fn from_spec_with_cap(spec: FamilySpec, cap: u64) -> Result<Self> {
        let parts = match &spec {
            FamilySpec::Bandit { arm_means, prior } => bandit_parts(arm_means, prior, cap)?,
            FamilySpec::FullInformation {
                z_dists,
                rewards,
                prior,
            } => full_information_parts(z_dists, rewards, prior, cap)?,
            FamilySpec::Linear {
                features,
                thetas,
                prior,
            } => linear_parts(features, thetas, prior, cap)?,
            FamilySpec::SemiBandit {
                d,
                m,
                actions,
                component_probs,
                prior,
            } => semi_bandit_parts(*d, *m, actions, component_probs, prior, cap)?,
        };
        Self::assemble(parts, spec)
    }

    fn assemble(parts: Parts, spec: FamilySpec) -> Result<Self> {
        let Parts {
            action_count,
            outcome_count,
            kernels,
            prior,
            rewards,
            structure,
        } = parts;
        let model_count = prior.len();
        debug_assert_eq!(kernels.len(), model_count * action_count * outcome_count);

        for m in 0..model_count {
            for a in 0..action_count {
                let row = &kernels[(m * action_count + a) * outcome_count..][..outcome_count];
                if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidFamily(format!(
                        "kernel row (model {m}, action {a}) has negative or non-finite entries"
                    )));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > PROB_TOLERANCE {
                    return Err(Error::InvalidFamily(format!(
                        "kernel row (model {m}, action {a}) sums to {s}"
                    )));
                }
            }
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidFamily(
                "reward table has non-finite entries".into(),
            ));
        }

        // Bounded rewards: span over reachable (action, outcome) pairs.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in 0..action_count {
            for y in 0..outcome_count {
                let reachable = (0..model_count)
                    .any(|m| kernels[(m * action_count + a) * outcome_count + y] > 0.0);
                if reachable {
                    let r = rewards[a * outcome_count + y];
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
        }
        if hi - lo > 1.0 + PROB_TOLERANCE {
            return Err(Error::InvalidFamily(format!(
                "reward span {} exceeds 1",
                hi - lo
            )));
        }

        let mut expected_rewards = vec![0.0; model_count * action_count];
        for m in 0..model_count {
            for a in 0..action_count {
                let row = &kernels[(m * action_count + a) * outcome_count..][..outcome_count];
                let rrow = &rewards[a * outcome_count..][..outcome_count];
                expected_rewards[m * action_count + a] =
                    row.iter().zip(rrow).map(|(p, r)| p * r).sum();
            }
        }
        let optimal_actions = (0..model_count)
            .map(|m| argmax_lowest(&expected_rewards[m * action_count..][..action_count]))
            .collect();

        let family = Self {
            action_count,
            outcome_count,
            model_count,
            kernels,
            prior,
            rewards,
            expected_rewards,
            optimal_actions,
            structure,
            spec,
        };
        family.check_structure()?;
        Ok(family)
    }

    fn check_structure(&self) -> Result<()> {
        match &self.structure {
            Structure::Bandit => Ok(()),
            Structure::FullInformation => {
                for m in 0..self.model_count {
                    let first = self.kernel_row(m, 0);
                    for a in 1..self.action_count {
                        let row = self.kernel_row(m, a);
                        if row
                            .iter()
                            .zip(first)
                            .any(|(x, y)| (x - y).abs() > PROB_TOLERANCE)
                        {
                            return Err(Error::InvalidFamily(format!(
                                "full-information kernel differs across actions under model {m}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            Structure::Linear {
                features, thetas, ..
            } => {
                for (m, theta) in thetas.iter().enumerate() {
                    for (a, feat) in features.iter().enumerate() {
                        let lin = dot(feat, theta);
                        let mean = self.expected_reward(m, a);
                        if (lin - mean).abs() > PROB_TOLERANCE {
                            return Err(Error::InvalidFamily(format!(
                                "linear invariant broken at (model {m}, action {a}): {mean} vs {lin}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            Structure::SemiBandit(meta) => {
                for (a, comps) in meta.actions.iter().enumerate() {
                    for m in 0..self.model_count {
                        let expected: f64 = comps
                            .iter()
                            .map(|&i| component_mean(meta.component_probs[m][i]))
                            .sum::<f64>()
                            / meta.m as f64;
                        if (expected - self.expected_reward(m, a)).abs() > PROB_TOLERANCE {
                            return Err(Error::InvalidFamily(format!(
                                "semi-bandit reward mismatch at (model {m}, action {a})"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    pub fn model_count(&self) -> usize {
        self.model_count
    }

    pub fn prior(&self) -> &ProbVector {
        &self.prior
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    /// `outcome_count × action_count × model_count`.
    pub fn size(&self) -> u64 {
        self.outcome_count as u64 * self.action_count as u64 * self.model_count as u64
    }

    /// `P(Y_a = · | model)`.
    pub fn kernel_row(&self, model: usize, action: usize) -> &[f64] {
        let start = (model * self.action_count + action) * self.outcome_count;
        &self.kernels[start..start + self.outcome_count]
    }

    pub fn reward(&self, action: usize, outcome: usize) -> f64 {
        self.rewards[action * self.outcome_count + outcome]
    }

    pub fn reward_row(&self, action: usize) -> &[f64] {
        &self.rewards[action * self.outcome_count..][..self.outcome_count]
    }

    /// `E[R(Y_a) | model]`.
    pub fn expected_reward(&self, model: usize, action: usize) -> f64 {
        self.expected_rewards[model * self.action_count + action]
    }

    /// Lowest-index maximizer of expected reward under `model`.
    pub fn optimal_action(&self, model: usize) -> Result<usize> {
        self.check_model(model)?;
        Ok(self.optimal_actions[model])
    }

    pub fn optimal_actions(&self) -> &[usize] {
        &self.optimal_actions
    }

    /// Same models and rewards under a different prior.
    pub fn with_prior(&self, prior: ProbVector) -> Result<Self> {
        if prior.len() != self.model_count {
            return Err(Error::InvalidArgument(format!(
                "prior has {} entries for {} models",
                prior.len(),
                self.model_count
            )));
        }
        let mut spec = self.spec.clone();
        match &mut spec {
            FamilySpec::Bandit { prior: p, .. }
            | FamilySpec::FullInformation { prior: p, .. }
            | FamilySpec::Linear { prior: p, .. }
            | FamilySpec::SemiBandit { prior: p, .. } => *p = prior.as_slice().to_vec(),
        }
        Self::from_spec(spec)
    }

    pub(crate) fn check_model(&self, model: usize) -> Result<()> {
        if model >= self.model_count {
            return Err(Error::IndexOutOfRange {
                what: "model",
                index: model,
                len: self.model_count,
            });
        }
        Ok(())
    }

    pub(crate) fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.action_count {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: action,
                len: self.action_count,
            });
        }
        Ok(())
    }

    pub(crate) fn check_outcome(&self, outcome: usize) -> Result<()> {
        if outcome >= self.outcome_count {
            return Err(Error::IndexOutOfRange {
                what: "outcome",
                index: outcome,
                len: self.outcome_count,
            });
        }
        Ok(())
    }
}

impl TryFrom<FamilySpec> for ModelFamily {
    type Error = Error;

    fn try_from(spec: FamilySpec) -> Result<Self> {
        ModelFamily::from_spec(spec)
    }
}

impl From<ModelFamily> for FamilySpec {
    fn from(family: ModelFamily) -> Self {
        family.spec
    }
}

struct Parts {
    action_count: usize,
    outcome_count: usize,
    kernels: Vec<f64>,
    prior: ProbVector,
    rewards: Vec<f64>,
    structure: Structure,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn component_mean(p_high: f64) -> f64 {
    p_high * COMPONENT_HIGH + (1.0 - p_high) * COMPONENT_LOW
}

fn check_size(outcomes: usize, actions: usize, models: usize, cap: u64) -> Result<()> {
    let size = (outcomes as u64)
        .saturating_mul(actions as u64)
        .saturating_mul(models as u64);
    if size > cap {
        return Err(Error::InstanceTooLarge { size, cap });
    }
    Ok(())
}

fn check_prior(prior: &[f64], models: usize) -> Result<ProbVector> {
    if prior.len() != models {
        return Err(Error::InvalidFamily(format!(
            "prior has {} entries for {models} models",
            prior.len()
        )));
    }
    ProbVector::new(prior.to_vec())
}

fn rectangular(rows: &[Vec<f64>], what: &str) -> Result<usize> {
    let width = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidFamily(format!("{what} is empty")))?;
    if width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidFamily(format!(
            "{what} must be a non-empty rectangular matrix"
        )));
    }
    Ok(width)
}

fn check_unit_interval(v: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::InvalidFamily(format!(
            "{what} = {v} is outside [0, 1]"
        )));
    }
    Ok(())
}

fn bernoulli_kernels(means: &[Vec<f64>]) -> Vec<f64> {
    means
        .iter()
        .flat_map(|row| row.iter().flat_map(|&p| [1.0 - p, p]))
        .collect()
}

fn bandit_parts(arm_means: &[Vec<f64>], prior: &[f64], cap: u64) -> Result<Parts> {
    let action_count = rectangular(arm_means, "arm_means")?;
    for row in arm_means {
        for &p in row {
            check_unit_interval(p, "arm mean")?;
        }
    }
    check_size(2, action_count, arm_means.len(), cap)?;
    Ok(Parts {
        action_count,
        outcome_count: 2,
        kernels: bernoulli_kernels(arm_means),
        prior: check_prior(prior, arm_means.len())?,
        rewards: (0..action_count).flat_map(|_| [0.0, 1.0]).collect(),
        structure: Structure::Bandit,
    })
}

fn full_information_parts(
    z_dists: &[Vec<f64>],
    rewards: &[Vec<f64>],
    prior: &[f64],
    cap: u64,
) -> Result<Parts> {
    let z_count = rectangular(z_dists, "z_dists")?;
    let reward_width = rectangular(rewards, "rewards")?;
    if reward_width != z_count {
        return Err(Error::InvalidFamily(format!(
            "reward rows have {reward_width} entries but Z has {z_count} values"
        )));
    }
    let action_count = rewards.len();
    check_size(z_count, action_count, z_dists.len(), cap)?;
    for (m, dist) in z_dists.iter().enumerate() {
        ProbVector::new(dist.clone())
            .map_err(|e| Error::InvalidFamily(format!("Z distribution of model {m}: {e}")))?;
    }
    let kernels = z_dists
        .iter()
        .flat_map(|dist| (0..action_count).flat_map(move |_| dist.iter().copied()))
        .collect();
    Ok(Parts {
        action_count,
        outcome_count: z_count,
        kernels,
        prior: check_prior(prior, z_dists.len())?,
        rewards: rewards.concat(),
        structure: Structure::FullInformation,
    })
}

fn linear_parts(
    features: &[Vec<f64>],
    thetas: &[Vec<f64>],
    prior: &[f64],
    cap: u64,
) -> Result<Parts> {
    let dim = rectangular(features, "features")?;
    let theta_dim = rectangular(thetas, "thetas")?;
    if dim != theta_dim {
        return Err(Error::InvalidFamily(format!(
            "features have dimension {dim}, thetas {theta_dim}"
        )));
    }
    check_size(2, features.len(), thetas.len(), cap)?;
    let mut means = Vec::with_capacity(thetas.len());
    for (m, theta) in thetas.iter().enumerate() {
        let mut row = Vec::with_capacity(features.len());
        for (a, feat) in features.iter().enumerate() {
            let mean = dot(feat, theta);
            check_unit_interval(mean, &format!("a^T theta for (action {a}, model {m})"))?;
            row.push(mean);
        }
        means.push(row);
    }
    Ok(Parts {
        action_count: features.len(),
        outcome_count: 2,
        kernels: bernoulli_kernels(&means),
        prior: check_prior(prior, thetas.len())?,
        rewards: (0..features.len()).flat_map(|_| [0.0, 1.0]).collect(),
        structure: Structure::Linear {
            dim,
            features: features.to_vec(),
            thetas: thetas.to_vec(),
        },
    })
}

/// Outcome `y` for an action with components `c_0 < c_1 < …` has bit `j` set
/// when `θ_{c_j} = +1/2`. Bits at or above the action's size are never set.
pub fn semi_bandit_outcome_reward(m: usize, size: usize, outcome: usize) -> f64 {
    (0..size)
        .map(|j| {
            if outcome >> j & 1 == 1 {
                COMPONENT_HIGH
            } else {
                COMPONENT_LOW
            }
        })
        .sum::<f64>()
        / m as f64
}

fn semi_bandit_parts(
    d: usize,
    m: usize,
    actions: &[Vec<usize>],
    component_probs: &[Vec<f64>],
    prior: &[f64],
    cap: u64,
) -> Result<Parts> {
    if d == 0 || m == 0 || m > d {
        return Err(Error::InvalidFamily(format!(
            "need 1 <= m <= d, got d = {d}, m = {m}"
        )));
    }
    if actions.is_empty() {
        return Err(Error::InvalidFamily("no actions".into()));
    }
    let mut sorted_actions = Vec::with_capacity(actions.len());
    for (a, comps) in actions.iter().enumerate() {
        if comps.len() > m {
            return Err(Error::InvalidFamily(format!(
                "action {a} has {} components, more than m = {m}",
                comps.len()
            )));
        }
        let mut sorted = comps.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != comps.len() {
            return Err(Error::InvalidFamily(format!(
                "action {a} repeats a component"
            )));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= d) {
            return Err(Error::InvalidFamily(format!(
                "action {a} uses component {bad} >= d = {d}"
            )));
        }
        sorted_actions.push(sorted);
    }
    let width = rectangular(component_probs, "component_probs")?;
    if width != d {
        return Err(Error::InvalidFamily(format!(
            "component_probs rows have {width} entries, expected d = {d}"
        )));
    }
    for row in component_probs {
        for &p in row {
            check_unit_interval(p, "component probability")?;
        }
    }
    if m >= usize::BITS as usize - 1 {
        return Err(Error::InstanceTooLarge {
            size: u64::MAX,
            cap,
        });
    }
    let outcome_count = 1usize << m;
    check_size(outcome_count, actions.len(), component_probs.len(), cap)?;
    let prior = check_prior(prior, component_probs.len())?;

    let mut kernels = Vec::with_capacity(component_probs.len() * actions.len() * outcome_count);
    for probs in component_probs {
        for comps in &sorted_actions {
            for y in 0..outcome_count {
                if y >> comps.len() != 0 {
                    kernels.push(0.0);
                    continue;
                }
                let p: f64 = comps
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| {
                        if y >> j & 1 == 1 {
                            probs[i]
                        } else {
                            1.0 - probs[i]
                        }
                    })
                    .product();
                kernels.push(p);
            }
        }
    }
    let rewards = sorted_actions
        .iter()
        .flat_map(|comps| {
            (0..outcome_count).map(move |y| semi_bandit_outcome_reward(m, comps.len(), y))
        })
        .collect();
    let posterior_independent = is_product_family(component_probs, prior.as_slice());
    Ok(Parts {
        action_count: actions.len(),
        outcome_count,
        kernels,
        prior,
        rewards,
        structure: Structure::SemiBandit(SemiBanditMeta {
            d,
            m,
            actions: sorted_actions,
            component_probs: component_probs.to_vec(),
            posterior_independent,
        }),
    })
}

/// Whether models enumerate a full Cartesian product of per-component values
/// and the prior factorizes over components.
fn is_product_family(component_probs: &[Vec<f64>], prior: &[f64]) -> bool {
    let models = component_probs.len();
    let d = component_probs[0].len();
    let mut value_sets: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut vals: Vec<f64> = component_probs.iter().map(|row| row[i]).collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals.dedup();
        value_sets.push(vals);
    }
    let product: usize = value_sets.iter().map(Vec::len).product();
    if product != models {
        return false;
    }
    let mut tuples: Vec<&Vec<f64>> = component_probs.iter().collect();
    tuples.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if tuples.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    let marginals: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            value_sets[i]
                .iter()
                .map(|&v| {
                    component_probs
                        .iter()
                        .zip(prior)
                        .filter(|(row, _)| row[i] == v)
                        .map(|(_, w)| w)
                        .sum()
                })
                .collect()
        })
        .collect();
    component_probs.iter().zip(prior).all(|(row, &w)| {
        let factored: f64 = (0..d)
            .map(|i| {
                let k = value_sets[i].iter().position(|&v| v == row[i]).unwrap_or(0);
                marginals[i][k]
            })
            .product();
        (factored - w).abs() <= 1e-12
    })
}

pub fn make_bernoulli_bandit(
    arm_means_per_model: &[Vec<f64>],
    prior: &ProbVector,
) -> Result<ModelFamily> {
    ModelFamily::from_spec(FamilySpec::Bandit {
        arm_means: arm_means_per_model.to_vec(),
        prior: prior.as_slice().to_vec(),
    })
}

pub fn make_full_information(
    z_dists_per_model: &[Vec<f64>],
    reward_by_action_and_z: &[Vec<f64>],
    prior: &ProbVector,
) -> Result<ModelFamily> {
    ModelFamily::from_spec(FamilySpec::FullInformation {
        z_dists: z_dists_per_model.to_vec(),
        rewards: reward_by_action_and_z.to_vec(),
        prior: prior.as_slice().to_vec(),
    })
}

pub fn make_linear_bandit(
    features: &[Vec<f64>],
    thetas: &[Vec<f64>],
    prior: &ProbVector,
) -> Result<ModelFamily> {
    ModelFamily::from_spec(FamilySpec::Linear {
        features: features.to_vec(),
        thetas: thetas.to_vec(),
        prior: prior.as_slice().to_vec(),
    })
}

pub fn make_semi_bandit(
    d: usize,
    m: usize,
    actions: &[Vec<usize>],
    component_probs_per_model: &[Vec<f64>],
    prior: &ProbVector,
) -> Result<ModelFamily> {
    make_semi_bandit_with_cap(
        d,
        m,
        actions,
        component_probs_per_model,
        prior,
        DEFAULT_SIZE_CAP,
    )
}

pub fn make_semi_bandit_with_cap(
    d: usize,
    m: usize,
    actions: &[Vec<usize>],
    component_probs_per_model: &[Vec<f64>],
    prior: &ProbVector,
    cap: u64,
) -> Result<ModelFamily> {
    ModelFamily::from_spec_with_cap(
        FamilySpec::SemiBandit {
            d,
            m,
            actions: actions.to_vec(),
            component_probs: component_probs_per_model.to_vec(),
            prior: prior.as_slice().to_vec(),
        },
        cap,
    )
}

/// Semi-bandit family whose models are the Cartesian product of per-component
/// candidate success probabilities, with a product prior. Components then
/// remain independent under every posterior.
pub fn make_semi_bandit_product(
    d: usize,
    m: usize,
    actions: &[Vec<usize>],
    candidates: &[Vec<f64>],
    candidate_priors: &[ProbVector],
) -> Result<ModelFamily> {
    if candidates.len() != d || candidate_priors.len() != d {
        return Err(Error::InvalidFamily(format!(
            "need candidates and priors for each of the {d} components"
        )));
    }
    for (i, (c, p)) in candidates.iter().zip(candidate_priors).enumerate() {
        if c.is_empty() || c.len() != p.len() {
            return Err(Error::InvalidFamily(format!(
                "component {i}: {} candidates but {} prior weights",
                c.len(),
                p.len()
            )));
        }
        let mut sorted = c.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        sorted.dedup();
        if sorted.len() != c.len() {
            return Err(Error::InvalidFamily(format!(
                "component {i} has duplicate candidates"
            )));
        }
    }
    let model_count: usize = candidates.iter().map(Vec::len).product();
    check_size(1 << m.min(62), actions.len(), model_count, DEFAULT_SIZE_CAP)?;
    let mut probs = Vec::with_capacity(model_count);
    let mut prior = Vec::with_capacity(model_count);
    let mut idx = vec![0usize; d];
    for _ in 0..model_count {
        probs.push((0..d).map(|i| candidates[i][idx[i]]).collect::<Vec<_>>());
        prior.push(
            (0..d)
                .map(|i| candidate_priors[i].get(idx[i]))
                .product::<f64>(),
        );
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < candidates[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
    let prior = ProbVector::renormalized(prior);
    make_semi_bandit(d, m, actions, &probs, &prior)
}

/// Draws an index from a probability vector by inversion.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

pub fn sample_outcome<R: Rng + ?Sized>(
    family: &ModelFamily,
    model_index: usize,
    action: usize,
    rng: &mut R,
) -> Result<OutcomeSample> {
    family.check_model(model_index)?;
    family.check_action(action)?;
    let outcome = sample_index(family.kernel_row(model_index, action), rng);
    Ok(OutcomeSample {
        action,
        outcome,
        reward: family.reward(action, outcome),
    })
}

/// One period's outcomes for every action, coupled the way the structure
/// couples them: a shared `Z` under full information, a shared component
/// vector under semi-bandit feedback, and independent draws otherwise. The
/// marginal of entry `a` is the kernel row of `a`.
pub fn sample_joint_outcomes<R: Rng + ?Sized>(
    family: &ModelFamily,
    model_index: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    family.check_model(model_index)?;
    match family.structure() {
        Structure::Bandit | Structure::Linear { .. } => Ok((0..family.action_count())
            .map(|a| sample_index(family.kernel_row(model_index, a), rng))
            .collect()),
        Structure::FullInformation => {
            let z = sample_index(family.kernel_row(model_index, 0), rng);
            Ok(vec![z; family.action_count()])
        }
        Structure::SemiBandit(meta) => {
            let probs = &meta.component_probs[model_index];
            let high: Vec<bool> = probs.iter().map(|&p| rng.random::<f64>() < p).collect();
            Ok(meta
                .actions
                .iter()
                .map(|comps| {
                    comps
                        .iter()
                        .enumerate()
                        .filter(|(_, &i)| high[i])
                        .fold(0usize, |y, (j, _)| y | 1 << j)
                })
                .collect())
        }
    }
}

pub fn optimal_action(family: &ModelFamily, model_index: usize) -> Result<usize> {
    family.optimal_action(model_index)
}
