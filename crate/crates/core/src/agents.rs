//! Action-selection policies.
//!
//! `ts_select` is exact Thompson sampling over a finite family: draw a model
//! from the posterior, then act optimally for it. The Linear–Gaussian variant
//! keeps a conjugate Gaussian belief over the parameter vector and updates
//! it with a rank-one Kalman step.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::belief::Posterior;
use crate::environments::{sample_index, ModelFamily, Structure};
use crate::error::{Error, Result};
use crate::info_math::ProbVector;

const SYMMETRY_TOLERANCE: f64 = 1e-9;
const PSD_TOLERANCE: f64 = 1e-9;
const JITTER_SCALE: f64 = 1e-12;
const JITTER_RETRIES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    ThompsonExact,
    ThompsonLinearGaussian,
    UniformBaseline,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::ThompsonExact => "thompson_exact",
            PolicyKind::ThompsonLinearGaussian => "thompson_linear_gaussian",
            PolicyKind::UniformBaseline => "uniform_baseline",
        }
    }
}

/// Samples a model from the posterior and returns its optimal action.
pub fn ts_select<R: Rng + ?Sized>(
    post: &Posterior,
    family: &ModelFamily,
    rng: &mut R,
) -> Result<usize> {
    if post.weights().len() != family.model_count() {
        return Err(Error::InvalidArgument(
            "posterior does not match family".into(),
        ));
    }
    let model = sample_index(post.weights().as_slice(), rng);
    family.optimal_action(model)
}

/// Exact law of [`ts_select`]: the posterior pushed through the optimal-action
/// map.
pub fn ts_action_law(post: &Posterior, family: &ModelFamily) -> Result<ProbVector> {
    if post.weights().len() != family.model_count() {
        return Err(Error::InvalidArgument(
            "posterior does not match family".into(),
        ));
    }
    let mut law = vec![0.0; family.action_count()];
    for m in 0..family.model_count() {
        law[family.optimal_action(m)?] += post.weights().get(m);
    }
    ProbVector::from_unnormalized(law)
}

pub fn uniform_select<R: Rng + ?Sized>(action_count: usize, rng: &mut R) -> Result<usize> {
    if action_count == 0 {
        return Err(Error::InvalidArgument("need at least one action".into()));
    }
    Ok(rng.random_range(0..action_count))
}

/// Gaussian belief `N(mean, covariance)` over the parameter vector, with a
/// known homoscedastic reward-noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianState {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    noise_variance: f64,
}

impl LinearGaussianState {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>, noise_variance: f64) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "covariance is {}x{}, mean has dimension {d}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite mean or covariance".into(),
            ));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "covariance asymmetric by {asym}"
            )));
        }
        let min_eig = SymmetricEigen::new(covariance.clone()).eigenvalues.min();
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "covariance not PSD: minimum eigenvalue {min_eig}"
            )));
        }
        Ok(Self {
            mean,
            covariance,
            noise_variance,
        })
    }

    /// Moment-matched Gaussian for the prior over `θ` of a linear family.
    pub fn from_linear_family(family: &ModelFamily, noise_variance: f64) -> Result<Self> {
        let Structure::Linear { dim, thetas, .. } = family.structure() else {
            return Err(Error::WrongStructure { expected: "linear" });
        };
        let prior = family.prior().as_slice();
        let mut mean = DVector::zeros(*dim);
        for (w, th) in prior.iter().zip(thetas) {
            mean += DVector::from_column_slice(th) * *w;
        }
        let mut cov = DMatrix::zeros(*dim, *dim);
        for (w, th) in prior.iter().zip(thetas) {
            let dev = DVector::from_column_slice(th) - &mean;
            cov += &dev * dev.transpose() * *w;
        }
        cov = (&cov + cov.transpose()) * 0.5;
        Self::new(mean, cov, noise_variance)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// `L` with `L Lᵀ = Σ`, from a symmetric eigendecomposition. Retries with
/// additive diagonal jitter if the spectrum comes back non-finite or
/// materially negative.
fn psd_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = cov.nrows();
    let jitter_step = JITTER_SCALE * cov.trace().abs() / d as f64;
    let mut jitter = 0.0;
    for _ in 0..=JITTER_RETRIES {
        let shifted = cov + DMatrix::identity(d, d) * jitter;
        let eig = SymmetricEigen::new(shifted);
        let finite = eig.eigenvalues.iter().all(|v| v.is_finite())
            && eig.eigenvectors.iter().all(|v| v.is_finite());
        let scale = eig.eigenvalues.amax().max(1.0);
        if finite && eig.eigenvalues.min() >= -PSD_TOLERANCE * scale {
            let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            return Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots));
        }
        jitter += jitter_step.max(f64::MIN_POSITIVE);
    }
    Err(Error::Numerical(
        "covariance factorization failed after jitter retries".into(),
    ))
}

/// Draws `θ̂ ~ N(μ, Σ)` and returns the lowest-index maximizer of `⟨a, θ̂⟩`
/// along with the sample.
pub fn lg_ts_select<R: Rng + ?Sized>(
    state: &LinearGaussianState,
    actions: &[DVector<f64>],
    rng: &mut R,
) -> Result<(usize, DVector<f64>)> {
    if actions.is_empty() {
        return Err(Error::InvalidArgument("need at least one action".into()));
    }
    if let Some(a) = actions.iter().position(|a| a.len() != state.dim()) {
        return Err(Error::InvalidArgument(format!(
            "action {a} has dimension {}, state has {}",
            actions[a].len(),
            state.dim()
        )));
    }
    let factor = psd_factor(&state.covariance)?;
    let z = DVector::from_fn(state.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let theta = &state.mean + factor * z;
    let scores: Vec<f64> = actions.iter().map(|a| a.dot(&theta)).collect();
    let best = crate::environments::argmax_lowest(&scores);
    Ok((best, theta))
}

/// Conjugate update after observing `reward` for feature vector `action`:
/// `Σ' = Σ − Σa aᵀΣ / (s² + aᵀΣa)`, `μ' = μ + Σa (r − aᵀμ) / (s² + aᵀΣa)`.
pub fn lg_update(
    state: &LinearGaussianState,
    action: &DVector<f64>,
    reward: f64,
) -> Result<LinearGaussianState> {
    if !reward.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "reward must be finite, got {reward}"
        )));
    }
    if action.len() != state.dim() {
        return Err(Error::InvalidArgument(format!(
            "action has dimension {}, state has {}",
            action.len(),
            state.dim()
        )));
    }
    let sigma_a = &state.covariance * action;
    let denom = state.noise_variance + action.dot(&sigma_a);
    let innovation = reward - action.dot(&state.mean);
    let mean = &state.mean + &sigma_a * (innovation / denom);
    let mut covariance = &state.covariance - &sigma_a * sigma_a.transpose() / denom;
    covariance = (&covariance + covariance.transpose()) * 0.5;
    LinearGaussianState::new(mean, covariance, state.noise_variance)
}
