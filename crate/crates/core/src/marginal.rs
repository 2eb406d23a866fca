use crate::error::{Error, Result};
use crate::sum::compensated_sum;

/// Default tolerance for mass conservation checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A finite probability vector, possibly the head of a truncated
/// denumerable law.
///
/// Entries may be zero. `tail_mass` is the probability discarded by
/// truncation; it is zero for exact finite distributions and is never
/// folded back into the entries by rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDistribution {
    probs: Vec<f64>,
    labels: Option<Vec<String>>,
    tail_mass: f64,
}

/// Validates `probs` as a probability vector.
///
/// Entries in `[-tol, 0)` are clamped to zero; anything more negative is
/// rejected, as is a total further than `tol` from one.
pub fn validate_marginal(probs: &[f64], tol: f64) -> Result<MarginalDistribution> {
    MarginalDistribution::with_tail(probs.to_vec(), 0.0, tol)
}

impl MarginalDistribution {
    /// Validates with [`DEFAULT_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tail(probs, 0.0, DEFAULT_TOL)
    }

    /// A truncated distribution: `probs` plus `tail_mass` must total one.
    pub fn with_tail(mut probs: Vec<f64>, tail_mass: f64, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        if !tail_mass.is_finite() || tail_mass < 0.0 {
            return Err(Error::OutOfRange { what: "tail_mass", value: tail_mass });
        }
        for (index, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if *p < -tol {
                return Err(Error::NegativeMass { index, value: *p });
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total = compensated_sum(probs.iter().copied()) + tail_mass;
        if (total - 1.0).abs() > tol {
            return Err(Error::MassNotOne { total, tol });
        }
        Ok(Self { probs, labels: None, tail_mass })
    }

    /// Uniform distribution over `n` atoms.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} atoms",
                labels.len(),
                self.probs.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Sum of the retained atoms (`1 - tail_mass` up to rounding).
    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn entropy(&self) -> f64 {
        crate::entropy::entropy(self)
    }

    /// Reorders atoms so that position `i` holds the atom at `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.len())?;
        Ok(Self {
            probs: order.iter().map(|&i| self.probs[i]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| order.iter().map(|&i| l[i].clone()).collect()),
            tail_mass: self.tail_mass,
        })
    }

    pub fn reversed(&self) -> Self {
        let order: Vec<usize> = (0..self.len()).rev().collect();
        self.permuted(&order).expect("reversal is a permutation")
    }

    /// Atom indices sorted by decreasing mass, lowest index first on ties.
    pub fn descending_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.probs[b].total_cmp(&self.probs[a]).then(a.cmp(&b)));
        idx
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::DimensionMismatch(format!("permutation of length {} for {} items", order.len(), n)));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::DimensionMismatch(format!("{order:?} is not a permutation")));
        }
        seen[i] = true;
    }
    Ok(())
}
