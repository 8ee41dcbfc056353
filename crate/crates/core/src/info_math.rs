//! Exact information measures over finite-support distributions.
//!
//! Everything is in nats. `0 · log 0` and `0 · log(0/0)` are taken to be 0;
//! a positive mass against a zero reference mass is an error rather than an
//! infinite divergence.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector or joint table.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_RELATIVE_THRESHOLD: f64 = 1e-10;

/// A validated probability vector over a finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates and renormalizes. Weights must be finite and nonnegative and
    /// sum to 1 within [`PROB_TOLERANCE`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "weight {i} is not finite ({w})"
                )));
            }
            if w < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "weight {i} is negative ({w})"
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self::renormalized(weights))
    }

    /// Normalizes arbitrary nonnegative weights with a positive total.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || total <= 0.0 {
            return Err(Error::InvalidDistribution("total mass is zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn point_mass(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::IndexOutOfRange {
                what: "support",
                index,
                len: n,
            });
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Ok(Self(w))
    }

    /// Internal constructor for vectors already known to be a distribution up
    /// to rounding.
    pub(crate) fn renormalized(mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        if total > 0.0 && total != 1.0 {
            for w in &mut weights {
                *w /= total;
            }
        }
        Self(weights)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn expectation(&self, g: &[f64]) -> f64 {
        self.0.iter().zip(g).map(|(p, v)| p * v).sum()
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        ProbVector::new(value)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(value: ProbVector) -> Self {
        value.0
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Joint distribution of `(X, Y)` over finite supports, stored row-major with
/// rows indexed by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl JointTable {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDistribution("empty joint table".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries for a {rows}x{cols} table, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let normalized = ProbVector::new(entries)?;
        Ok(Self {
            rows,
            cols,
            entries: normalized.into_vec(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("ragged joint table".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Product table `P(x) P(y)`.
    pub fn independent(px: &ProbVector, py: &ProbVector) -> Self {
        let entries = px
            .as_slice()
            .iter()
            .flat_map(|a| py.as_slice().iter().map(move |b| a * b))
            .collect();
        Self {
            rows: px.len(),
            cols: py.len(),
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.cols + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.cols..(x + 1) * self.cols]
    }

    pub fn marginal_x(&self) -> ProbVector {
        ProbVector::renormalized(
            self.entries
                .chunks(self.cols)
                .map(|r| r.iter().sum())
                .collect(),
        )
    }

    pub fn marginal_y(&self) -> ProbVector {
        let mut py = vec![0.0; self.cols];
        for row in self.entries.chunks(self.cols) {
            for (acc, v) in py.iter_mut().zip(row) {
                *acc += v;
            }
        }
        ProbVector::renormalized(py)
    }

    /// Swaps the roles of `X` and `Y`.
    pub fn transpose(&self) -> Self {
        let mut entries = vec![0.0; self.entries.len()];
        for x in 0..self.rows {
            for y in 0..self.cols {
                entries[y * self.rows + x] = self.get(x, y);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Shannon entropy in nats.
pub fn entropy(p: &ProbVector) -> f64 {
    entropy_unchecked(p.as_slice())
}

pub(crate) fn entropy_unchecked(p: &[f64]) -> f64 {
    let h = -p.iter().map(|&x| xlogx(x)).sum::<f64>();
    h.max(0.0)
}

fn check_same_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::InvalidArgument(format!(
            "support sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `D(p ‖ q)` in nats.
pub fn kl_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_same_len(p.as_slice(), q.as_slice())?;
    kl_unchecked(p.as_slice(), q.as_slice())
}

pub(crate) fn kl_unchecked(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut d = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::DivergenceUndefined { index: i, p: pi });
            }
            d += pi * (pi / qi).ln();
        }
    }
    Ok(d.max(0.0))
}

/// `H(X) − H(X | Y)`.
pub fn mutual_information_entropy_form(j: &JointTable) -> f64 {
    let hx = entropy(&j.marginal_x());
    let py = j.marginal_y();
    let mut h_x_given_y = 0.0;
    let mut column = vec![0.0; j.rows];
    for y in 0..j.cols {
        let mass = py.get(y);
        if mass <= 0.0 {
            continue;
        }
        for (x, c) in column.iter_mut().enumerate() {
            *c = j.get(x, y) / mass;
        }
        h_x_given_y += mass * entropy_unchecked(&column);
    }
    hx - h_x_given_y
}

/// `Σ_x P(x) · D(P(Y | x) ‖ P(Y))`.
pub fn mutual_information_kl_form(j: &JointTable) -> Result<f64> {
    let px = j.marginal_x();
    let py = j.marginal_y();
    let mut total = 0.0;
    let mut conditional = vec![0.0; j.cols];
    for x in 0..j.rows {
        let mass = px.get(x);
        if mass <= 0.0 {
            continue;
        }
        for (c, v) in conditional.iter_mut().zip(j.row(x)) {
            *c = v / mass;
        }
        total += mass * kl_unchecked(&conditional, py.as_slice())?;
    }
    Ok(total)
}

/// Mutual information `I(X; Y)` in nats.
///
/// Evaluated both as an entropy reduction and as an expected divergence; the
/// two must agree within [`PROB_TOLERANCE`] or an inconsistency is reported.
pub fn mutual_information(j: &JointTable) -> Result<f64> {
    let by_entropy = mutual_information_entropy_form(j);
    let by_kl = mutual_information_kl_form(j)?;
    if (by_entropy - by_kl).abs() > PROB_TOLERANCE {
        return Err(Error::Inconsistency(format!(
            "mutual information forms disagree: entropy form {by_entropy}, KL form {by_kl}"
        )));
    }
    Ok(by_kl)
}

/// Mean gap `E_p[g] − E_q[g]` together with the bound `sqrt(D(p‖q)/2)` that
/// holds whenever `g` spans at most 1.
pub fn pinsker_gap_bound(p: &ProbVector, q: &ProbVector, g: &[f64]) -> Result<(f64, f64)> {
    check_same_len(p.as_slice(), q.as_slice())?;
    check_same_len(p.as_slice(), g)?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("g must be finite".into()));
    }
    let (lo, hi) = g
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi - lo > 1.0 + PROB_TOLERANCE {
        return Err(Error::Precondition(format!("span of g is {} > 1", hi - lo)));
    }
    let gap = p.expectation(g) - q.expectation(g);
    let kl = kl_divergence(p, q)?;
    Ok((gap, (kl / 2.0).sqrt()))
}

/// Trace, rank and Frobenius norm of a square matrix, plus `sqrt(rank)·‖M‖_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBound {
    pub trace: f64,
    pub rank: usize,
    pub frobenius: f64,
    pub bound: f64,
}

/// Numerical rank by relative singular-value thresholding.
pub fn matrix_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter()
        .filter(|&&s| s > RANK_RELATIVE_THRESHOLD * largest)
        .count()
}

pub fn trace_rank_frobenius(m: &DMatrix<f64>) -> Result<TraceBound> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "matrix dimensions must be >= 1".into(),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    let rank = matrix_rank(m);
    let frobenius = m.norm();
    Ok(TraceBound {
        trace: m.trace(),
        rank,
        frobenius,
        bound: (rank as f64).sqrt() * frobenius,
    })
}
