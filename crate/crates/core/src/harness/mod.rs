//! Experiment orchestration: draw a true model, run a policy, log per-step
//! information-ratio reports and certificates, aggregate replications.
//!
//! Replication `k` of an experiment with master seed `s` uses the ChaCha20
//! stream `k` of the generator keyed by `s`. Streams of distinct `k` never
//! overlap, and the whole output is a function of `(config, s)`.

mod config;
mod report;
mod verify;

pub use config::{ExperimentConfig, FamilySource};
pub use report::{emit_report, format_number, ReportPaths, CSV_COLUMNS};
pub use verify::{
    enumerate_information_identity, run_verify, InformationIdentity, StructureVerify, VerifyReport,
    VerifySettings,
};

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    lg_ts_select, lg_update, ts_select, uniform_select, LinearGaussianState, PolicyKind,
};
use crate::analysis::{
    check_step, regret_bound, structural_gamma_bound, BoundCertificate, CheckLevel, InfoRatioReport,
};
use crate::belief::{HistoryEntry, Posterior};
use crate::environments::{sample_index, sample_joint_outcomes, ModelFamily, Structure};
use crate::error::{Error, Result};
use crate::info_math::entropy;

/// Families larger than this (outcomes × actions × models) are checked on
/// every 10th step only.
pub const CHECK_SIZE_CAP: u64 = 100_000;

/// Noise variance assumed by the Linear–Gaussian policy when none is given.
/// Bernoulli rewards have variance at most 1/4.
pub const DEFAULT_NOISE_VARIANCE: f64 = 0.25;

/// Violations listed individually in a summary; the rest are only counted.
const MAX_LISTED_VIOLATIONS: usize = 100;

/// Generator for replication `replication` under `master_seed`.
pub fn replication_rng(master_seed: u64, replication: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    /// 1-based period.
    pub t: usize,
    pub action: usize,
    pub outcome: usize,
    pub reward: f64,
    /// `R(Y_{t,A*}) − R(Y_{t,A_t})` for the drawn true model.
    pub instant_regret: f64,
    pub report: Option<InfoRatioReport>,
    pub gamma_bar_running: f64,
    pub regret_bound: f64,
    /// `None` when no checks ran at this step.
    pub bound_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub replication: usize,
    pub t: usize,
    pub certificate: BoundCertificate,
}

/// Per-bound tally: number of checks, failures, and the tightest instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateAggregate {
    pub bound_name: String,
    pub count: u64,
    pub violations: u64,
    pub worst: BoundCertificate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateTally {
    by_name: BTreeMap<String, CertificateAggregate>,
}

impl CertificateTally {
    pub fn record(&mut self, cert: &BoundCertificate) {
        let entry = self
            .by_name
            .entry(cert.bound_name.clone())
            .or_insert_with(|| CertificateAggregate {
                bound_name: cert.bound_name.clone(),
                count: 0,
                violations: 0,
                worst: cert.clone(),
            });
        entry.count += 1;
        if !cert.holds {
            entry.violations += 1;
        }
        if cert.slack < entry.worst.slack {
            entry.worst = cert.clone();
        }
    }

    pub fn merge(&mut self, other: &CertificateTally) {
        for agg in other.by_name.values() {
            match self.by_name.get_mut(&agg.bound_name) {
                Some(mine) => {
                    mine.count += agg.count;
                    mine.violations += agg.violations;
                    if agg.worst.slack < mine.worst.slack {
                        mine.worst = agg.worst.clone();
                    }
                }
                None => {
                    self.by_name.insert(agg.bound_name.clone(), agg.clone());
                }
            }
        }
    }

    pub fn aggregates(&self) -> impl Iterator<Item = &CertificateAggregate> {
        self.by_name.values()
    }

    pub fn get(&self, name: &str) -> Option<&CertificateAggregate> {
        self.by_name.get(name)
    }

    pub fn violations(&self) -> u64 {
        self.by_name.values().map(|a| a.violations).sum()
    }

    pub fn checks(&self) -> u64 {
        self.by_name.values().map(|a| a.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub replication: usize,
    pub true_model: usize,
    pub optimal_action: usize,
    /// `H(α_1)`, the entropy of the prior optimal-action distribution.
    pub prior_optimum_entropy: f64,
    pub rows: Vec<StepRow>,
    pub certificates: CertificateTally,
    pub violations: Vec<Violation>,
}

impl TrajectoryRecord {
    pub fn cumulative_regret(&self) -> f64 {
        self.rows.iter().map(|r| r.instant_regret).sum()
    }

    pub fn max_gamma(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.report.and_then(|rep| rep.ratio))
            .reduce(f64::max)
    }
}

enum PolicyState {
    Exact,
    Uniform,
    LinearGaussian {
        state: LinearGaussianState,
        features: Vec<DVector<f64>>,
    },
}

impl PolicyState {
    fn new(policy: PolicyKind, family: &ModelFamily, noise_variance: f64) -> Result<Self> {
        Ok(match policy {
            PolicyKind::ThompsonExact => PolicyState::Exact,
            PolicyKind::UniformBaseline => PolicyState::Uniform,
            PolicyKind::ThompsonLinearGaussian => {
                let Structure::Linear { features, .. } = family.structure() else {
                    return Err(Error::Config(
                        "thompson_linear_gaussian requires a linear family".into(),
                    ));
                };
                PolicyState::LinearGaussian {
                    state: LinearGaussianState::from_linear_family(family, noise_variance)?,
                    features: features
                        .iter()
                        .map(|f| DVector::from_column_slice(f))
                        .collect(),
                }
            }
        })
    }
}

/// Settings shared by every episode of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSettings {
    pub policy: PolicyKind,
    pub horizon: usize,
    pub checks: CheckLevel,
    pub noise_variance: f64,
}

impl EpisodeSettings {
    pub fn new(policy: PolicyKind, horizon: usize) -> Self {
        Self {
            policy,
            horizon,
            checks: CheckLevel::Full,
            noise_variance: DEFAULT_NOISE_VARIANCE,
        }
    }

    pub fn with_checks(mut self, checks: CheckLevel) -> Self {
        self.checks = checks;
        self
    }
}

/// Runs one episode. The true model is drawn from the prior with `rng`, and
/// every subsequent draw comes from the same stream.
pub fn run_episode<R: rand::Rng + ?Sized>(
    family: &ModelFamily,
    settings: &EpisodeSettings,
    replication: usize,
    rng: &mut R,
) -> Result<TrajectoryRecord> {
    if settings.horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let true_model = sample_index(family.prior().as_slice(), rng);
    let optimal = family.optimal_action(true_model)?;
    let mut post = Posterior::prior(family);
    let h1 = entropy(&post.optimal_action_distribution(family)?);
    let mut policy = PolicyState::new(settings.policy, family, settings.noise_variance)?;
    let sampled_checks = family.size() > CHECK_SIZE_CAP;

    let mut rows = Vec::with_capacity(settings.horizon);
    let mut tally = CertificateTally::default();
    let mut violations = Vec::new();
    let mut gamma_bar: f64 = 0.0;

    for t in 1..=settings.horizon {
        let level = if sampled_checks && t % 10 != 1 {
            CheckLevel::Off
        } else {
            settings.checks
        };
        let check = check_step(&post, family, level).map_err(|e| e.at_step(t))?;
        let mut bound_ok = None;
        if let Some(check) = &check {
            for cert in &check.certificates {
                tally.record(cert);
                if !cert.holds {
                    violations.push(Violation {
                        replication,
                        t,
                        certificate: cert.clone(),
                    });
                }
            }
            bound_ok = Some(check.all_hold());
            if let Some(ratio) = check.report.ratio {
                gamma_bar = gamma_bar.max(ratio);
            }
        }

        let action = match &policy {
            PolicyState::Exact => ts_select(&post, family, rng)?,
            PolicyState::Uniform => uniform_select(family.action_count(), rng)?,
            PolicyState::LinearGaussian { state, features } => {
                lg_ts_select(state, features, rng)?.0
            }
        };
        let joint = sample_joint_outcomes(family, true_model, rng)?;
        let outcome = joint[action];
        let reward = family.reward(action, outcome);
        let instant_regret = family.reward(optimal, joint[optimal]) - reward;

        post = post
            .bayes_update(family, HistoryEntry { action, outcome })
            .map_err(|e| e.at_step(t))?;
        if let PolicyState::LinearGaussian { state, features } = &mut policy {
            *state = lg_update(state, &features[action], reward).map_err(|e| e.at_step(t))?;
        }

        rows.push(StepRow {
            t,
            action,
            outcome,
            reward,
            instant_regret,
            report: check.map(|c| c.report),
            gamma_bar_running: gamma_bar,
            regret_bound: regret_bound(gamma_bar, h1, t as u64)?,
            bound_ok,
        });
    }

    Ok(TrajectoryRecord {
        replication,
        true_model,
        optimal_action: optimal,
        prior_optimum_entropy: h1,
        rows,
        certificates: tally,
        violations,
    })
}

/// Streaming reduction over trajectories. Sums, sums of squares and maxima,
/// so the result does not depend on the order trajectories arrive in.
#[derive(Debug, Clone)]
pub struct Aggregator {
    horizon: usize,
    replications: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    max_gamma: Option<f64>,
    tally: CertificateTally,
    violation_count: u64,
    violations: Vec<Violation>,
}

impl Aggregator {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            replications: 0,
            sum: vec![0.0; horizon],
            sum_sq: vec![0.0; horizon],
            max_gamma: None,
            tally: CertificateTally::default(),
            violation_count: 0,
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, traj: &TrajectoryRecord) {
        self.replications += 1;
        let mut cum = 0.0;
        for (i, row) in traj.rows.iter().enumerate().take(self.horizon) {
            cum += row.instant_regret;
            self.sum[i] += cum;
            self.sum_sq[i] += cum * cum;
        }
        if let Some(g) = traj.max_gamma() {
            self.max_gamma = Some(self.max_gamma.map_or(g, |m| m.max(g)));
        }
        self.tally.merge(&traj.certificates);
        self.violation_count += traj.violations.len() as u64;
        for v in &traj.violations {
            if self.violations.len() < MAX_LISTED_VIOLATIONS {
                self.violations.push(v.clone());
            }
        }
    }

    pub fn replications(&self) -> u64 {
        self.replications
    }

    /// Mean cumulative regret per step.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.replications.max(1) as f64;
        self.sum.iter().map(|s| s / n).collect()
    }

    /// Standard error of the mean cumulative regret per step (0 for fewer
    /// than two replications).
    pub fn standard_error(&self) -> Vec<f64> {
        let n = self.replications as f64;
        if self.replications < 2 {
            return vec![0.0; self.horizon];
        }
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, sq)| {
                let mean = s / n;
                let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect()
    }

    pub fn max_gamma(&self) -> Option<f64> {
        self.max_gamma
    }

    pub fn tally(&self) -> &CertificateTally {
        &self.tally
    }

    pub fn violation_count(&self) -> u64 {
        self.violation_count
    }

    pub fn finish(&self, family: &ModelFamily, echo: ConfigEcho) -> Result<Summary> {
        let h1 = Posterior::prior(family).entropy_of_optimum(family)?;
        let mean = self.mean();
        let se = self.standard_error();
        let gamma_bar = self.max_gamma.unwrap_or(0.0);
        let structural = structural_gamma_bound(family);
        let mut bound_curve = Vec::with_capacity(self.horizon);
        let mut structural_curve = Vec::with_capacity(self.horizon);
        let mut curve_certs = Vec::with_capacity(self.horizon);
        for t in 1..=self.horizon {
            let b = regret_bound(gamma_bar, h1, t as u64)?;
            bound_curve.push(b);
            structural_curve.push(regret_bound(structural, h1, t as u64)?);
            curve_certs.push(BoundCertificate::new(
                format!("regret_curve_t{t}"),
                mean[t - 1] + 3.0 * se[t - 1],
                b,
            ));
        }
        let seeds = (0..self.replications)
            .map(|k| SeedInfo {
                replication: k as usize,
                stream: k,
            })
            .collect();
        Ok(Summary {
            config: echo,
            seeds,
            replications: self.replications,
            prior_optimum_entropy: h1,
            structural_bound: structural,
            max_gamma: self.max_gamma,
            mean_cumulative_regret: mean,
            standard_error: se,
            regret_bound_curve: bound_curve,
            structural_regret_bound_curve: structural_curve,
            regret_curve_certificates: curve_certs,
            bound_violation_count: self.violation_count,
            violations: self.violations.clone(),
            certificates: self.tally.aggregates().cloned().collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub replication: usize,
    /// ChaCha20 stream id under the master seed.
    pub stream: u64,
}

/// What the summary records about the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub family: crate::environments::FamilySpec,
    pub policy: PolicyKind,
    pub horizon: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub checks_enabled: bool,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ConfigEcho,
    pub seeds: Vec<SeedInfo>,
    pub replications: u64,
    pub prior_optimum_entropy: f64,
    pub structural_bound: f64,
    /// Largest defined `Γ_t` seen in any replication.
    pub max_gamma: Option<f64>,
    pub mean_cumulative_regret: Vec<f64>,
    pub standard_error: Vec<f64>,
    /// `sqrt(max_gamma · H(α_1) · t)`.
    pub regret_bound_curve: Vec<f64>,
    /// `sqrt(structural_bound · H(α_1) · t)`.
    pub structural_regret_bound_curve: Vec<f64>,
    /// `mean + 3·se ≤ regret bound` per step. Statistical, so not counted as
    /// bound violations.
    pub regret_curve_certificates: Vec<BoundCertificate>,
    pub bound_violation_count: u64,
    pub violations: Vec<Violation>,
    pub certificates: Vec<CertificateAggregate>,
}

pub struct ExperimentOutcome {
    pub summary: Summary,
    pub trajectories: Vec<TrajectoryRecord>,
}

/// Runs `replications` episodes with streams `0..replications`. When
/// `keep_trajectories` is false only the aggregate is retained.
pub fn simulate(
    family: &ModelFamily,
    settings: &EpisodeSettings,
    replications: usize,
    master_seed: u64,
    keep_trajectories: bool,
) -> Result<(Aggregator, Vec<TrajectoryRecord>)> {
    let mut agg = Aggregator::new(settings.horizon);
    let mut kept = Vec::new();
    for k in 0..replications {
        let mut rng = replication_rng(master_seed, k as u64);
        let traj = run_episode(family, settings, k, &mut rng)?;
        agg.push(&traj);
        if keep_trajectories {
            kept.push(traj);
        }
    }
    Ok((agg, kept))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let family = config.resolve_family()?;
    let settings = EpisodeSettings {
        policy: config.policy,
        horizon: config.horizon,
        checks: if config.checks_enabled {
            CheckLevel::Full
        } else {
            CheckLevel::Off
        },
        noise_variance: config.noise_variance.unwrap_or(DEFAULT_NOISE_VARIANCE),
    };
    let (agg, trajectories) = simulate(
        &family,
        &settings,
        config.replications,
        config.master_seed,
        true,
    )?;
    let echo = ConfigEcho {
        family: family.spec().clone(),
        policy: config.policy,
        horizon: config.horizon,
        replications: config.replications,
        master_seed: config.master_seed,
        checks_enabled: config.checks_enabled,
        noise_variance: settings.noise_variance,
    };
    Ok(ExperimentOutcome {
        summary: agg.finish(&family, echo)?,
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::symmetric_bandit;
    use crate::info_math::ProbVector;

    #[test]
    fn point_mass_prior_has_zero_expected_regret() {
        let f = symmetric_bandit()
            .with_prior(ProbVector::new(vec![0.0, 1.0]).unwrap())
            .unwrap();
        for policy in [PolicyKind::ThompsonExact, PolicyKind::UniformBaseline] {
            let settings = EpisodeSettings::new(policy, 15);
            let traj = run_episode(&f, &settings, 0, &mut replication_rng(3, 0)).unwrap();
            for row in &traj.rows {
                let rep = row.report.unwrap();
                assert_eq!(rep.expected_instant_regret, 0.0);
                assert_eq!(row.regret_bound, 0.0);
            }
        }
    }

    #[test]
    fn first_step_matches_worked_example() {
        let f = symmetric_bandit();
        let settings = EpisodeSettings::new(PolicyKind::ThompsonExact, 2);
        let traj = run_episode(&f, &settings, 0, &mut replication_rng(1, 0)).unwrap();
        let rep = traj.rows[0].report.unwrap();
        let kl = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        assert!((rep.ratio.unwrap() - 0.16 / kl).abs() < 1e-12);
        assert_eq!(traj.rows.len(), 2);
        assert!(traj.violations.is_empty());
    }

    #[test]
    fn identical_seeds_identical_records() {
        let f = symmetric_bandit();
        let settings = EpisodeSettings::new(PolicyKind::ThompsonExact, 20);
        let a = run_episode(&f, &settings, 0, &mut replication_rng(9, 4)).unwrap();
        let b = run_episode(&f, &settings, 0, &mut replication_rng(9, 4)).unwrap();
        assert_eq!(a, b);
        let c = run_episode(&f, &settings, 0, &mut replication_rng(9, 5)).unwrap();
        assert_ne!(a.rows, c.rows);
    }

    #[test]
    fn single_replication_summary_matches_trajectory() {
        let f = symmetric_bandit();
        let settings = EpisodeSettings::new(PolicyKind::ThompsonExact, 10);
        let (agg, trajs) = simulate(&f, &settings, 1, 5, true).unwrap();
        let traj = &trajs[0];
        let mut cum = 0.0;
        for (row, mean) in traj.rows.iter().zip(agg.mean()) {
            cum += row.instant_regret;
            assert_eq!(cum, mean);
        }
        assert!(agg.standard_error().iter().all(|&s| s == 0.0));
        assert_eq!(agg.max_gamma(), traj.max_gamma());
    }

    #[test]
    fn linear_gaussian_policy_needs_linear_family() {
        let f = symmetric_bandit();
        let settings = EpisodeSettings::new(PolicyKind::ThompsonLinearGaussian, 3);
        assert!(matches!(
            run_episode(&f, &settings, 0, &mut replication_rng(0, 0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn tally_merge_is_order_independent() {
        let certs = [
            BoundCertificate::new("a", 0.1, 0.5),
            BoundCertificate::new("a", 0.4, 0.5),
            BoundCertificate::new("b", 1.0, 0.0),
        ];
        let mut x = CertificateTally::default();
        let mut y = CertificateTally::default();
        x.record(&certs[0]);
        y.record(&certs[1]);
        y.record(&certs[2]);
        let mut xy = x.clone();
        xy.merge(&y);
        let mut yx = y.clone();
        yx.merge(&x);
        assert_eq!(xy, yx);
        assert_eq!(xy.get("a").unwrap().count, 2);
        assert_eq!(xy.violations(), 1);
    }
}
