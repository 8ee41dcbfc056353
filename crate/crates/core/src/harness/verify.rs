use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    replication_rng, run_episode, CertificateAggregate, CertificateTally, EpisodeSettings,
};
use crate::agents::{ts_action_law, PolicyKind};
use crate::analysis::{
    expected_instant_regret, information_gain, information_ratio, BoundCertificate, CheckLevel,
};
use crate::belief::Posterior;
use crate::environments::{ModelFamily, StructureKind};
use crate::error::{Error, Result};
use crate::generators::{random_instance, random_semi_bandit_mixture};
use crate::info_math::{entropy, mutual_information, JointTable, ProbVector};

/// Enumeration refuses to build more terminal histories than this.
pub const ENUMERATION_LEAF_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub seed: u64,
    pub structures: Vec<StructureKind>,
    pub instances_per_structure: usize,
    pub steps: usize,
    /// Also run semi-bandit families whose components are correlated.
    pub include_mixtures: bool,
    /// Exact enumerations per structure.
    pub enumerations_per_structure: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            seed: 0,
            structures: StructureKind::ALL.to_vec(),
            instances_per_structure: 50,
            steps: 30,
            include_mixtures: true,
            enumerations_per_structure: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureVerify {
    pub structure: StructureKind,
    pub instances: usize,
    pub posteriors_checked: u64,
    pub certificates: Vec<CertificateAggregate>,
    pub violations: u64,
}

/// Exact quantities over all histories of a short Thompson-sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationIdentity {
    pub structure: StructureKind,
    pub horizon: usize,
    pub leaves: usize,
    /// `Σ_t E[I_t(A*; (A_t, Y_t))]`.
    pub expected_gain_sum: f64,
    /// `I(A*; (A_1, Y_1, …, A_T, Y_T))`.
    pub mutual_information: f64,
    /// `H(α_1)`.
    pub prior_entropy: f64,
    /// `Σ_t E[Δ_t]`.
    pub expected_regret_sum: f64,
    /// Largest defined ratio over reachable posteriors.
    pub max_gamma: f64,
    pub certificates: Vec<BoundCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub structures: Vec<StructureVerify>,
    pub enumerations: Vec<InformationIdentity>,
    pub total_violations: u64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.total_violations == 0
    }

    pub fn to_json(&self) -> Result<String> {
        super::report::to_rounded_json(self)
    }
}

struct Enumeration<'a> {
    family: &'a ModelFamily,
    horizon: usize,
    gain_sum: f64,
    regret_sum: f64,
    max_gamma: f64,
    columns: Vec<Vec<f64>>,
}

impl Enumeration<'_> {
    fn visit(&mut self, q: &[f64], depth: usize) -> Result<()> {
        let mass: f64 = q.iter().sum();
        if depth == self.horizon {
            let mut col = vec![0.0; self.family.action_count()];
            for (&w, &opt) in q.iter().zip(self.family.optimal_actions()) {
                col[opt] += w;
            }
            if self.columns.len() >= ENUMERATION_LEAF_CAP {
                return Err(Error::InstanceTooLarge {
                    size: self.columns.len() as u64 + 1,
                    cap: ENUMERATION_LEAF_CAP as u64,
                });
            }
            self.columns.push(col);
            return Ok(());
        }
        let post = Posterior::new(ProbVector::from_unnormalized(q.to_vec())?, depth as u64);
        self.gain_sum += mass * information_gain(&post, self.family)?;
        self.regret_sum += mass * expected_instant_regret(&post, self.family)?;
        if let Some(g) = information_ratio(&post, self.family)?.ratio {
            self.max_gamma = self.max_gamma.max(g);
        }
        let law = ts_action_law(&post, self.family)?;
        for (a, &pa) in law.as_slice().iter().enumerate() {
            if pa <= 0.0 {
                continue;
            }
            for y in 0..self.family.outcome_count() {
                let next: Vec<f64> = q
                    .iter()
                    .enumerate()
                    .map(|(m, &w)| w * pa * self.family.kernel_row(m, a)[y])
                    .collect();
                if next.iter().sum::<f64>() > 0.0 {
                    self.visit(&next, depth + 1)?;
                }
            }
        }
        Ok(())
    }
}

/// Walks every history of length `horizon` under Thompson sampling and
/// compares the summed expected information gains with the mutual
/// information between `A*` and the full history.
pub fn enumerate_information_identity(
    family: &ModelFamily,
    horizon: usize,
) -> Result<InformationIdentity> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let mut e = Enumeration {
        family,
        horizon,
        gain_sum: 0.0,
        regret_sum: 0.0,
        max_gamma: 0.0,
        columns: Vec::new(),
    };
    e.visit(family.prior().as_slice(), 0)?;
    let cols = e.columns.len();
    let rows = family.action_count();
    let mut entries = vec![0.0; rows * cols];
    for (j, col) in e.columns.iter().enumerate() {
        for (i, &p) in col.iter().enumerate() {
            entries[i * cols + j] = p;
        }
    }
    let table = JointTable::new(rows, cols, entries)?;
    let mi = mutual_information(&table)?;
    let h1 = entropy(&Posterior::prior(family).optimal_action_distribution(family)?);
    let bound = (e.max_gamma * h1 * horizon as f64).sqrt();
    let certificates = vec![
        BoundCertificate::equality("chain_rule_information", e.gain_sum, mi),
        BoundCertificate::new("information_le_entropy", mi, h1),
        BoundCertificate::new("exact_regret_bound", e.regret_sum, bound),
    ];
    Ok(InformationIdentity {
        structure: family.structure().kind(),
        horizon,
        leaves: cols,
        expected_gain_sum: e.gain_sum,
        mutual_information: mi,
        prior_entropy: h1,
        expected_regret_sum: e.regret_sum,
        max_gamma: e.max_gamma,
        certificates,
    })
}

/// Longest horizon (at most 4) whose history tree stays well under the cap.
fn enumeration_horizon(family: &ModelFamily) -> usize {
    let branch = (family.action_count() * family.outcome_count()) as f64;
    let mut t = 1;
    while t < 4 && branch.powi(t as i32 + 1) <= 20_000.0 {
        t += 1;
    }
    t
}

fn tiny_instance<R: Rng + ?Sized>(kind: StructureKind, rng: &mut R) -> Result<ModelFamily> {
    loop {
        let f = random_instance(kind, rng)?;
        if f.action_count() * f.outcome_count() <= 24 {
            return Ok(f);
        }
    }
}

/// Checks every certificate on Thompson-sampling trajectories over random
/// instances of each requested structure, then the exact chain-rule identity
/// on tiny instances.
pub fn run_verify(settings: &VerifySettings) -> Result<VerifyReport> {
    let episode = EpisodeSettings::new(PolicyKind::ThompsonExact, settings.steps.max(1))
        .with_checks(CheckLevel::Full);
    let mut structures = Vec::new();
    let mut enumerations = Vec::new();
    let mut total = 0;
    for &kind in &settings.structures {
        let stream = StructureKind::ALL
            .iter()
            .position(|&k| k == kind)
            .unwrap_or(0) as u64;
        let mut rng = replication_rng(settings.seed, stream);
        let mut tally = CertificateTally::default();
        let mut instances = 0;
        for i in 0..settings.instances_per_structure {
            let mut families = vec![random_instance(kind, &mut rng)?];
            if settings.include_mixtures && kind == StructureKind::SemiBandit {
                families.push(random_semi_bandit_mixture(&mut rng)?);
            }
            for family in &families {
                let traj = run_episode(family, &episode, i, &mut rng)?;
                tally.merge(&traj.certificates);
                instances += 1;
            }
        }
        for _ in 0..settings.enumerations_per_structure {
            let family = tiny_instance(kind, &mut rng)?;
            let id = enumerate_information_identity(&family, enumeration_horizon(&family))?;
            for c in &id.certificates {
                tally.record(c);
            }
            enumerations.push(id);
        }
        let posteriors_checked = tally.get("structural_gamma").map_or(0, |a| a.count);
        total += tally.violations();
        structures.push(StructureVerify {
            structure: kind,
            instances,
            posteriors_checked,
            certificates: tally.aggregates().cloned().collect(),
            violations: tally.violations(),
        });
    }
    Ok(VerifyReport {
        seed: settings.seed,
        structures,
        enumerations,
        total_violations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::symmetric_bandit;

    #[test]
    fn one_step_enumeration_matches_first_gain() {
        let f = symmetric_bandit();
        let id = enumerate_information_identity(&f, 1).unwrap();
        let kl = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        assert!((id.expected_gain_sum - kl).abs() < 1e-12);
        assert!((id.mutual_information - kl).abs() < 1e-12);
        assert!((id.expected_regret_sum - 0.4).abs() < 1e-12);
        assert!(id.certificates.iter().all(|c| c.holds));
    }

    #[test]
    fn multi_step_chain_rule() {
        let f = symmetric_bandit();
        let id = enumerate_information_identity(&f, 4).unwrap();
        assert!((id.expected_gain_sum - id.mutual_information).abs() < 1e-10);
        assert!(id.mutual_information <= id.prior_entropy + 1e-12);
    }

    #[test]
    fn small_verify_passes() {
        let report = run_verify(&VerifySettings {
            seed: 3,
            instances_per_structure: 3,
            steps: 5,
            enumerations_per_structure: 1,
            ..VerifySettings::default()
        })
        .unwrap();
        assert_eq!(report.structures.len(), 4);
        assert!(report.passed(), "{report:#?}");
    }
}
