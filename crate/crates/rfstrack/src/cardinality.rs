//! Probability distribution over the number of objects present.

use crate::error::{Error, Result};

/// Truncated pmf over object counts `0..=max_count()`, kept normalized to
/// within 1e-10 by renormalizing after every operation.
#[derive(Debug, Clone)]
pub struct CardinalityDistribution {
    probs: Vec<f64>,
}

impl CardinalityDistribution {
    /// Builds from raw nonnegative masses; renormalizes.
    pub fn from_masses(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter(
                "cardinality support must be nonempty".into(),
            ));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(
                "cardinality masses must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidParameter(
                "cardinality masses sum to zero".into(),
            ));
        }
        for p in &mut probs {
            *p /= sum;
        }
        Ok(Self { probs })
    }

    /// All mass on exactly `n` objects, support `0..=max_count`.
    pub fn point_mass(n: usize, max_count: usize) -> Self {
        let mut probs = vec![0.0; max_count + 1];
        probs[n.min(max_count)] = 1.0;
        Self { probs }
    }

    /// Poisson(`mean`) truncated at `max_count` and renormalized.
    pub fn poisson(mean: f64, max_count: usize) -> Self {
        let mut probs = Vec::with_capacity(max_count + 1);
        if mean <= 0.0 {
            probs.push(1.0);
            probs.resize(max_count + 1, 0.0);
            return Self { probs };
        }
        let mut log_p = -mean; // ln P(0)
        probs.push(log_p.exp());
        for n in 1..=max_count {
            log_p += mean.ln() - (n as f64).ln();
            probs.push(log_p.exp());
        }
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest count in the support.
    pub fn max_count(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Expected object count.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Maximum a posteriori count; ties break toward the smaller count.
    pub fn map_estimate(&self) -> usize {
        let mut best = 0;
        let mut best_p = self.probs[0];
        for (n, &p) in self.probs.iter().enumerate().skip(1) {
            if p > best_p {
                best = n;
                best_p = p;
            }
        }
        best
    }
}
