//! Exact information-ratio computations and bound certificates.
//!
//! For a posterior `P_t` over a finite family, Thompson sampling plays
//! `A ~ α` independently of the true model, so
//!
//! ```text
//! E_t[R(Y_{A*}) − R(Y_A)] = Σ_a α(a) (E[R(Y_a) | A* = a] − E[R(Y_a)])
//! I_t(A*; (A, Y_A))       = Σ_{a, a*} α(a) α(a*) D(P(Y_a | A* = a*) ‖ P(Y_a))
//! ```
//!
//! Both are evaluated exactly from the predictive tables below. The gain is
//! also available as the mutual information of the explicit joint table over
//! `(A*, (A, Y_A))`, which serves as an independent check of the
//! decomposition.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::belief::{Posterior, EVENT_FLOOR};
use crate::environments::{ModelFamily, Structure, StructureKind, COMPONENT_HIGH, COMPONENT_LOW};
use crate::error::{Error, Result};
use crate::info_math::{
    kl_unchecked, matrix_rank, mutual_information, trace_rank_frobenius, JointTable,
};

/// Absolute tolerance of every certificate.
pub const CERT_TOLERANCE: f64 = 1e-9;

/// Below this information gain the ratio is undefined.
pub const GAIN_FLOOR: f64 = 1e-12;

/// Regret below this never counts as inconsistent with a vanishing gain.
pub const REGRET_FLOOR: f64 = 1e-9;

/// Absolute roundoff allowed in a computed information gain.
pub const GAIN_ROUNDOFF: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoRatioReport {
    pub expected_instant_regret: f64,
    pub info_gain: f64,
    /// `None` when the gain is numerically zero (and so is the regret).
    pub ratio: Option<f64>,
    pub optimum_entropy: f64,
    pub structural_bound: f64,
}

impl InfoRatioReport {
    /// The ratio with the undefined case counted as 0.
    pub fn ratio_or_zero(&self) -> f64 {
        self.ratio.unwrap_or(0.0)
    }
}

/// Record of one inequality check `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub bound_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl BoundCertificate {
    pub fn new(bound_name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            bound_name: bound_name.into(),
            lhs,
            rhs,
            slack,
            holds: slack >= -CERT_TOLERANCE,
        }
    }

    /// Certificate for `|a − b| ≤ 0` at the shared tolerance.
    pub fn equality(bound_name: impl Into<String>, a: f64, b: f64) -> Self {
        Self::new(bound_name, (a - b).abs(), 0.0)
    }
}

/// Shape parameters that determine the structural bounds on `Γ_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureShape {
    pub kind: StructureKind,
    pub action_count: usize,
    /// Feature dimension for linear families, component count for
    /// semi-bandit families.
    pub dim: Option<usize>,
    /// Maximum action size for semi-bandit families.
    pub m: Option<usize>,
    /// Semi-bandit components independent under every posterior.
    pub posterior_independent: bool,
}

impl StructureShape {
    pub fn of(family: &ModelFamily) -> Self {
        let action_count = family.action_count();
        match family.structure() {
            Structure::Bandit => Self {
                kind: StructureKind::Bandit,
                action_count,
                dim: None,
                m: None,
                posterior_independent: false,
            },
            Structure::FullInformation => Self {
                kind: StructureKind::FullInformation,
                action_count,
                dim: None,
                m: None,
                posterior_independent: false,
            },
            Structure::Linear { dim, .. } => Self {
                kind: StructureKind::Linear,
                action_count,
                dim: Some(*dim),
                m: None,
                posterior_independent: false,
            },
            Structure::SemiBandit(meta) => Self {
                kind: StructureKind::SemiBandit,
                action_count,
                dim: Some(meta.d),
                m: Some(meta.m),
                posterior_independent: meta.posterior_independent,
            },
        }
    }

    /// Smallest applicable bound on `Γ_t` for rewards with span at most 1.
    pub fn gamma_bound(&self) -> f64 {
        // Every structure: |A|/2.
        let mut bound = self.action_count as f64 / 2.0;
        match self.kind {
            StructureKind::Bandit => {}
            StructureKind::FullInformation => bound = bound.min(0.5),
            StructureKind::Linear | StructureKind::SemiBandit => {
                let d = self.dim.unwrap_or(self.action_count) as f64;
                bound = bound.min(d / 2.0);
                if self.kind == StructureKind::SemiBandit && self.posterior_independent {
                    let m = self.m.unwrap_or(1) as f64;
                    bound = bound.min(d / (2.0 * m * m));
                }
            }
        }
        bound
    }
}

pub fn structural_gamma_bound(family: &ModelFamily) -> f64 {
    StructureShape::of(family).gamma_bound()
}

/// Bounds on `Γ_t` when centred rewards are `σ`-sub-Gaussian. At `σ = 1/2`
/// these coincide with [`StructureShape::gamma_bound`].
pub fn sub_gaussian_gamma_bound(shape: &StructureShape, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let s2 = sigma * sigma;
    let mut bound = 2.0 * shape.action_count as f64 * s2;
    match shape.kind {
        StructureKind::Bandit => {}
        StructureKind::FullInformation => bound = bound.min(2.0 * s2),
        StructureKind::Linear | StructureKind::SemiBandit => {
            let d = shape.dim.unwrap_or(shape.action_count) as f64;
            bound = bound.min(2.0 * d * s2);
            if shape.kind == StructureKind::SemiBandit && shape.posterior_independent {
                let m = shape.m.unwrap_or(1) as f64;
                bound = bound.min(2.0 * d * s2 / (m * m));
            }
        }
    }
    Ok(bound)
}

/// `sqrt(Γ̄ · H(A*) · T)`.
pub fn regret_bound(gamma_bar: f64, optimum_entropy: f64, horizon: u64) -> Result<f64> {
    for (name, v) in [
        ("gamma_bar", gamma_bar),
        ("optimum_entropy", optimum_entropy),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be nonnegative, got {v}"
            )));
        }
    }
    Ok((gamma_bar * optimum_entropy * horizon as f64).sqrt())
}

/// `α`, the predictive laws `P(Y_a)` and the optimum-conditioned laws
/// `P(Y_a | A* = a*)` for one posterior.
#[derive(Debug, Clone)]
pub struct PredictiveTables {
    action_count: usize,
    outcome_count: usize,
    alpha: Vec<f64>,
    /// `[a][y]`.
    predictive: Vec<f64>,
    /// Per `a*` with `α(a*) ≥ EVENT_FLOOR`: `[a][y]`.
    conditional: Vec<Option<Vec<f64>>>,
    /// `E[R(Y_a)]`.
    mean_reward: Vec<f64>,
    /// `[a*][a]`: `E[R(Y_a) | A* = a*]`, NaN where undefined.
    conditional_mean_reward: Vec<f64>,
}

impl PredictiveTables {
    pub fn new(post: &Posterior, family: &ModelFamily) -> Result<Self> {
        let alpha = post.optimal_action_distribution(family)?.into_vec();
        let na = family.action_count();
        let ny = family.outcome_count();
        let weights = post.weights().as_slice();
        let mut predictive = vec![0.0; na * ny];
        let mut raw: Vec<Vec<f64>> = vec![Vec::new(); na];
        for (m, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let opt = family.optimal_actions()[m];
            let slot = &mut raw[opt];
            if slot.is_empty() {
                slot.resize(na * ny, 0.0);
            }
            for a in 0..na {
                let row = family.kernel_row(m, a);
                for y in 0..ny {
                    let v = w * row[y];
                    predictive[a * ny + y] += v;
                    slot[a * ny + y] += v;
                }
            }
        }
        let conditional: Vec<Option<Vec<f64>>> = raw
            .into_iter()
            .enumerate()
            .map(|(astar, mut v)| {
                if alpha[astar] < EVENT_FLOOR || v.is_empty() {
                    None
                } else {
                    for x in &mut v {
                        *x /= alpha[astar];
                    }
                    Some(v)
                }
            })
            .collect();

        let mean_reward = (0..na)
            .map(|a| dot(&predictive[a * ny..][..ny], family.reward_row(a)))
            .collect();
        let mut conditional_mean_reward = vec![f64::NAN; na * na];
        for (astar, cond) in conditional.iter().enumerate() {
            if let Some(c) = cond {
                for a in 0..na {
                    conditional_mean_reward[astar * na + a] =
                        dot(&c[a * ny..][..ny], family.reward_row(a));
                }
            }
        }
        Ok(Self {
            action_count: na,
            outcome_count: ny,
            alpha,
            predictive,
            conditional,
            mean_reward,
            conditional_mean_reward,
        })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn predictive(&self, action: usize) -> &[f64] {
        &self.predictive[action * self.outcome_count..][..self.outcome_count]
    }

    pub fn conditional(&self, action: usize, astar: usize) -> Option<&[f64]> {
        self.conditional[astar]
            .as_ref()
            .map(|c| &c[action * self.outcome_count..][..self.outcome_count])
    }

    /// `E[R(Y_a) | A* = a*] − E[R(Y_a)]`, or `None` when `α(a*)` is zero.
    pub fn mean_gap(&self, action: usize, astar: usize) -> Option<f64> {
        let c = self.conditional_mean_reward[astar * self.action_count + action];
        (!c.is_nan()).then(|| c - self.mean_reward[action])
    }

    fn live_actions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.action_count).filter(|&a| self.conditional[a].is_some())
    }

    pub fn expected_instant_regret(&self) -> f64 {
        self.live_actions()
            .map(|a| self.alpha[a] * self.mean_gap(a, a).unwrap_or(0.0))
            .sum()
    }

    /// `D(P(Y_a | A* = a*) ‖ P(Y_a))`.
    pub fn divergence(&self, action: usize, astar: usize) -> Result<Option<f64>> {
        match self.conditional(action, astar) {
            Some(c) => kl_unchecked(c, self.predictive(action)).map(Some),
            None => Ok(None),
        }
    }

    pub fn information_gain(&self) -> Result<f64> {
        let mut total = 0.0;
        for a in self.live_actions() {
            for astar in self.live_actions() {
                if let Some(d) = self.divergence(a, astar)? {
                    total += self.alpha[a] * self.alpha[astar] * d;
                }
            }
        }
        Ok(total)
    }

    /// `I(A*; Y_a)` under the posterior.
    pub fn action_information(&self, action: usize) -> Result<f64> {
        let mut total = 0.0;
        for astar in self.live_actions() {
            if let Some(d) = self.divergence(action, astar)? {
                total += self.alpha[astar] * d;
            }
        }
        Ok(total)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn expected_instant_regret(post: &Posterior, family: &ModelFamily) -> Result<f64> {
    Ok(PredictiveTables::new(post, family)?.expected_instant_regret())
}

/// Information gain via the divergence decomposition.
pub fn information_gain(post: &Posterior, family: &ModelFamily) -> Result<f64> {
    PredictiveTables::new(post, family)?.information_gain()
}

/// Joint law of `(A*, (A, Y_A))` when `A ~ α` independently of the model.
/// Rows are `a*`, columns are `a · outcome_count + y`.
pub fn optimum_observation_joint(post: &Posterior, family: &ModelFamily) -> Result<JointTable> {
    let alpha = post.optimal_action_distribution(family)?;
    let na = family.action_count();
    let ny = family.outcome_count();
    let mut entries = vec![0.0; na * na * ny];
    for (m, &w) in post.weights().as_slice().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let astar = family.optimal_actions()[m];
        let row = &mut entries[astar * na * ny..][..na * ny];
        for a in 0..na {
            let pa = alpha.get(a);
            if pa <= 0.0 {
                continue;
            }
            for (y, k) in family.kernel_row(m, a).iter().enumerate() {
                row[a * ny + y] += pa * w * k;
            }
        }
    }
    JointTable::new(na, na * ny, entries)
}

/// Information gain as the mutual information of the explicit joint table.
pub fn information_gain_direct(post: &Posterior, family: &ModelFamily) -> Result<f64> {
    mutual_information(&optimum_observation_joint(post, family)?)
}

fn report_from(tables: &PredictiveTables, family: &ModelFamily) -> Result<InfoRatioReport> {
    let regret = tables.expected_instant_regret();
    let gain = tables.information_gain()?;
    let bound = structural_gamma_bound(family);
    let ratio = if gain < GAIN_FLOOR {
        // Regret scales like the square root of the gain, so a tiny gain
        // only contradicts a regret that breaks the structural bound.
        if regret >= REGRET_FLOOR && regret * regret > bound * (gain + GAIN_ROUNDOFF) {
            return Err(Error::Inconsistency(format!(
                "expected regret {regret} with information gain {gain}"
            )));
        }
        None
    } else {
        Some(regret * regret / gain)
    };
    Ok(InfoRatioReport {
        expected_instant_regret: regret,
        info_gain: gain,
        ratio,
        optimum_entropy: crate::info_math::entropy_unchecked(tables.alpha()),
        structural_bound: bound,
    })
}

pub fn information_ratio(post: &Posterior, family: &ModelFamily) -> Result<InfoRatioReport> {
    let tables = PredictiveTables::new(post, family)?;
    report_from(&tables, family)
}

/// `M_ij = sqrt(α_i α_j) (E[R(Y_{a_i}) | A* = a_j] − E[R(Y_{a_i})])`.
pub fn regret_matrix(post: &Posterior, family: &ModelFamily) -> Result<DMatrix<f64>> {
    Ok(regret_matrix_from(&PredictiveTables::new(post, family)?))
}

fn regret_matrix_from(tables: &PredictiveTables) -> DMatrix<f64> {
    let k = tables.action_count;
    DMatrix::from_fn(k, k, |i, j| match tables.mean_gap(i, j) {
        Some(gap) => (tables.alpha[i] * tables.alpha[j]).sqrt() * gap,
        None => 0.0,
    })
}

/// Two sides of an information lower bound; `lhs ≥ rhs` is the claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoLowerBound {
    pub lhs: f64,
    pub rhs: f64,
}

/// Per-component `P(i ∈ A*)`, `E[θ_i | i ∈ A*]` and `E[θ_i]`.
#[derive(Debug, Clone)]
struct ComponentStats {
    p_in_opt: Vec<f64>,
    mean_given_in_opt: Vec<f64>,
    mean: Vec<f64>,
}

fn component_stats(post: &Posterior, family: &ModelFamily) -> Result<ComponentStats> {
    let Structure::SemiBandit(meta) = family.structure() else {
        return Err(Error::WrongStructure {
            expected: "semi_bandit",
        });
    };
    let d = meta.d;
    let mut p_in_opt = vec![0.0; d];
    let mut weighted_in_opt = vec![0.0; d];
    let mut mean = vec![0.0; d];
    for (m, &w) in post.weights().as_slice().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let probs = &meta.component_probs[m];
        let theta = |i: usize| probs[i] * COMPONENT_HIGH + (1.0 - probs[i]) * COMPONENT_LOW;
        for (i, mi) in mean.iter_mut().enumerate() {
            *mi += w * theta(i);
        }
        for &i in &meta.actions[family.optimal_actions()[m]] {
            p_in_opt[i] += w;
            weighted_in_opt[i] += w * theta(i);
        }
    }
    let mean_given_in_opt = p_in_opt
        .iter()
        .zip(&weighted_in_opt)
        .map(|(&p, &s)| if p >= EVENT_FLOOR { s / p } else { f64::NAN })
        .collect();
    Ok(ComponentStats {
        p_in_opt,
        mean_given_in_opt,
        mean,
    })
}

impl ComponentStats {
    /// `P(i ∈ A*)^power · (E[θ_i | i ∈ A*] − E[θ_i])²`.
    fn term(&self, i: usize, power: i32) -> f64 {
        let p = self.p_in_opt[i];
        if p < EVENT_FLOOR {
            return 0.0;
        }
        let gap = self.mean_given_in_opt[i] - self.mean[i];
        p.powi(power) * gap * gap
    }
}

/// Exact `I(A*; Y_a)` against `2 Σ_{i∈a} P(i∈A*) (E[θ_i | i∈A*] − E[θ_i])²`.
pub fn semi_bandit_info_lower_bound(
    post: &Posterior,
    family: &ModelFamily,
    action: usize,
) -> Result<InfoLowerBound> {
    let stats = component_stats(post, family)?;
    family.check_action(action)?;
    let Structure::SemiBandit(meta) = family.structure() else {
        unreachable!("checked by component_stats");
    };
    // I(A*; Y_a) from the joint table of (A*, Y_a).
    let tables = PredictiveTables::new(post, family)?;
    let ny = family.outcome_count();
    let mut entries = vec![0.0; family.action_count() * ny];
    for astar in 0..family.action_count() {
        if let Some(c) = tables.conditional(action, astar) {
            for y in 0..ny {
                entries[astar * ny + y] = tables.alpha[astar] * c[y];
            }
        }
    }
    let lhs = mutual_information(&JointTable::new(family.action_count(), ny, entries)?)?;
    let rhs = 2.0
        * meta.actions[action]
            .iter()
            .map(|&i| stats.term(i, 1))
            .sum::<f64>();
    Ok(InfoLowerBound { lhs, rhs })
}

/// Exact `I(A*; (A, Y_A))` against `2 Σ_i P(i∈A*)² (E[θ_i | i∈A*] − E[θ_i])²`.
pub fn semi_bandit_aggregate_bound(
    post: &Posterior,
    family: &ModelFamily,
) -> Result<InfoLowerBound> {
    let stats = component_stats(post, family)?;
    let d = stats.mean.len();
    let lhs = information_gain(post, family)?;
    let rhs = 2.0 * (0..d).map(|i| stats.term(i, 2)).sum::<f64>();
    Ok(InfoLowerBound { lhs, rhs })
}

/// How much checking to do per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckLevel {
    /// No report, no certificates.
    Off,
    /// Report and the structural-bound certificate only.
    Ratio,
    /// Report and every applicable certificate.
    Full,
}

/// Report and certificates for one posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub report: InfoRatioReport,
    pub certificates: Vec<BoundCertificate>,
}

impl StepCheck {
    pub fn all_hold(&self) -> bool {
        self.certificates.iter().all(|c| c.holds)
    }
}

fn worst(certs: impl IntoIterator<Item = BoundCertificate>) -> Option<BoundCertificate> {
    certs.into_iter().min_by(|a, b| a.slack.total_cmp(&b.slack))
}

/// Computes the report and the certificates applicable to the family's
/// structure.
pub fn check_step(
    post: &Posterior,
    family: &ModelFamily,
    level: CheckLevel,
) -> Result<Option<StepCheck>> {
    if level == CheckLevel::Off {
        return Ok(None);
    }
    let tables = PredictiveTables::new(post, family)?;
    let report = report_from(&tables, family)?;
    let mut certs = vec![BoundCertificate::new(
        "structural_gamma",
        report.ratio_or_zero(),
        report.structural_bound,
    )];
    if level == CheckLevel::Ratio {
        return Ok(Some(StepCheck {
            report,
            certificates: certs,
        }));
    }

    let direct = information_gain_direct(post, family)?;
    certs.push(BoundCertificate::equality(
        "gain_decomposition",
        report.info_gain,
        direct,
    ));
    certs.push(BoundCertificate::new(
        "optimum_entropy_range",
        report.optimum_entropy,
        (family.action_count() as f64).ln(),
    ));

    // Pinsker step for every (a, a*) with positive weight, squared so that
    // roundoff in a tiny divergence is not amplified by a square root.
    let mut pinsker = Vec::new();
    for a in tables.live_actions() {
        for astar in tables.live_actions() {
            if let (Some(gap), Some(d)) = (tables.mean_gap(a, astar), tables.divergence(a, astar)?)
            {
                pinsker.push(BoundCertificate::new("pinsker_gap", 2.0 * gap * gap, d));
            }
        }
    }
    certs.extend(worst(pinsker));

    if let Structure::Linear { dim, .. } = family.structure() {
        let m = regret_matrix_from(&tables);
        let tb = trace_rank_frobenius(&m)?;
        certs.push(BoundCertificate::equality(
            "regret_matrix_trace",
            tb.trace,
            report.expected_instant_regret,
        ));
        certs.push(BoundCertificate::new(
            "regret_matrix_frobenius",
            2.0 * tb.frobenius * tb.frobenius,
            report.info_gain,
        ));
        certs.push(BoundCertificate::new(
            "regret_matrix_rank",
            matrix_rank(&m) as f64,
            *dim as f64,
        ));
        certs.push(BoundCertificate::new(
            "trace_inequality",
            tb.trace,
            tb.bound,
        ));
    }

    if let Structure::SemiBandit(meta) = family.structure() {
        if meta.posterior_independent {
            let mut per_action = Vec::with_capacity(family.action_count());
            for a in 0..family.action_count() {
                let b = semi_bandit_info_lower_bound(post, family, a)?;
                per_action.push(BoundCertificate::new("component_action_info", b.rhs, b.lhs));
            }
            certs.extend(worst(per_action));
            let b = semi_bandit_aggregate_bound(post, family)?;
            certs.push(BoundCertificate::new(
                "component_aggregate_info",
                b.rhs,
                b.lhs,
            ));
        }
    }

    Ok(Some(StepCheck {
        report,
        certificates: certs,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{
        make_bernoulli_bandit, make_full_information, make_linear_bandit, make_semi_bandit,
    };
    use crate::info_math::ProbVector;

    fn pv(w: &[f64]) -> ProbVector {
        ProbVector::new(w.to_vec()).unwrap()
    }

    fn symmetric() -> ModelFamily {
        make_bernoulli_bandit(&[vec![0.9, 0.1], vec![0.1, 0.9]], &pv(&[0.5, 0.5])).unwrap()
    }

    fn kl_bern(p: f64, q: f64) -> f64 {
        p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()
    }

    #[test]
    fn symmetric_bandit_worked_example() {
        let f = symmetric();
        let post = Posterior::prior(&f);
        let regret = expected_instant_regret(&post, &f).unwrap();
        assert!((regret - 0.4).abs() < 1e-15);
        let gain = information_gain(&post, &f).unwrap();
        let oracle = kl_bern(0.9, 0.5);
        assert!((gain - oracle).abs() < 1e-15);
        assert!((gain - 0.368064).abs() < 1e-6);
        let direct = information_gain_direct(&post, &f).unwrap();
        assert!((direct - gain).abs() < 1e-12);
        let report = information_ratio(&post, &f).unwrap();
        let ratio = report.ratio.unwrap();
        assert!((ratio - 0.16 / oracle).abs() < 1e-14);
        assert!((ratio - 0.4347).abs() < 1e-4);
        assert_eq!(report.structural_bound, 1.0);
        assert!(ratio <= 1.0);
    }

    #[test]
    fn point_mass_everything_vanishes() {
        let f = symmetric().with_prior(pv(&[1.0, 0.0])).unwrap();
        let post = Posterior::prior(&f);
        assert_eq!(expected_instant_regret(&post, &f).unwrap(), 0.0);
        assert_eq!(information_gain(&post, &f).unwrap(), 0.0);
        assert_eq!(information_gain_direct(&post, &f).unwrap(), 0.0);
        let report = information_ratio(&post, &f).unwrap();
        assert_eq!(report.ratio, None);
        assert_eq!(report.optimum_entropy, 0.0);
        let check = check_step(&post, &f, CheckLevel::Full).unwrap().unwrap();
        assert!(check.all_hold());
    }

    #[test]
    fn shared_optimum_has_zero_regret() {
        let f = make_bernoulli_bandit(
            &[vec![0.9, 0.1, 0.3], vec![0.8, 0.5, 0.2]],
            &pv(&[0.4, 0.6]),
        )
        .unwrap();
        let post = Posterior::prior(&f);
        assert!(expected_instant_regret(&post, &f).unwrap().abs() < 1e-15);
    }

    #[test]
    fn full_information_gain_matches_mi_of_optimum_and_z() {
        let f = make_full_information(
            &[vec![0.8, 0.2], vec![0.3, 0.7]],
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            &pv(&[0.5, 0.5]),
        )
        .unwrap();
        let post = Posterior::prior(&f);
        // Joint of (A*, Z): model 0 has A* = 1, model 1 has A* = 0.
        let joint =
            JointTable::from_rows(&[vec![0.5 * 0.3, 0.5 * 0.7], vec![0.5 * 0.8, 0.5 * 0.2]])
                .unwrap();
        let oracle = mutual_information(&joint).unwrap();
        assert!((information_gain(&post, &f).unwrap() - oracle).abs() < 1e-12);
        let report = information_ratio(&post, &f).unwrap();
        assert!(report.ratio.unwrap() <= 0.5);
    }

    #[test]
    fn structural_bounds() {
        let bandit = make_bernoulli_bandit(&[vec![0.5; 6]], &pv(&[1.0])).unwrap();
        assert_eq!(structural_gamma_bound(&bandit), 3.0);
        let linear = make_linear_bandit(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]],
            &[vec![0.9, 0.1], vec![0.1, 0.9]],
            &pv(&[0.5, 0.5]),
        )
        .unwrap();
        assert_eq!(structural_gamma_bound(&linear), 1.0);
        let pairs: Vec<Vec<usize>> = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| vec![i, j]))
            .collect();
        let semi =
            make_semi_bandit(4, 2, &pairs, &[vec![0.3, 0.6, 0.5, 0.9]], &pv(&[1.0])).unwrap();
        assert_eq!(structural_gamma_bound(&semi), 0.5);
    }

    #[test]
    fn sub_gaussian_examples() {
        let bandit =
            StructureShape::of(&make_bernoulli_bandit(&[vec![0.5; 3]], &pv(&[1.0])).unwrap());
        assert_eq!(sub_gaussian_gamma_bound(&bandit, 0.5).unwrap(), 1.5);
        let linear = StructureShape::of(
            &make_linear_bandit(
                &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]],
                &[vec![0.9, 0.1]],
                &pv(&[1.0]),
            )
            .unwrap(),
        );
        assert_eq!(sub_gaussian_gamma_bound(&linear, 1.0).unwrap(), 4.0);
        for shape in [bandit, linear] {
            assert_eq!(
                sub_gaussian_gamma_bound(&shape, 0.5).unwrap(),
                shape.gamma_bound()
            );
        }
        assert!(sub_gaussian_gamma_bound(&bandit, 0.0).is_err());
    }

    #[test]
    fn regret_bound_examples() {
        let b = regret_bound(1.0, 2f64.ln(), 100).unwrap();
        assert!((b - 69.31471805599453f64.sqrt()).abs() < 1e-12);
        assert!((b - 8.3255).abs() < 1e-4);
        assert_eq!(regret_bound(3.0, 0.0, 50).unwrap(), 0.0);
        // Linear case with Γ̄ = d/2.
        let (h, d, t) = (0.9, 3.0, 40);
        let b = regret_bound(d / 2.0, h, t).unwrap();
        assert!((b - (h * d * t as f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!(regret_bound(-1.0, 1.0, 1).is_err());
        assert!(regret_bound(1.0, -1.0, 1).is_err());
    }

    #[test]
    fn component_bounds_point_mass_and_single_components() {
        let f =
            make_semi_bandit(2, 1, &[vec![0], vec![1]], &[vec![0.8, 0.3]], &pv(&[1.0])).unwrap();
        let post = Posterior::prior(&f);
        let b = semi_bandit_info_lower_bound(&post, &f, 0).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        let wrong = symmetric();
        assert!(matches!(
            semi_bandit_info_lower_bound(&Posterior::prior(&wrong), &wrong, 0),
            Err(Error::WrongStructure { .. })
        ));
    }

    #[test]
    fn certificate_semantics() {
        assert!(BoundCertificate::new("x", 1.0, 1.0 - 0.5e-9).holds);
        assert!(!BoundCertificate::new("x", 1.0, 1.0 - 2e-9).holds);
        assert!(BoundCertificate::equality("x", 0.3, 0.3).holds);
    }
}
