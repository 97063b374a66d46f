//! Weighted Gaussian components and mixtures.
//!
//! A mixture is used here as an intensity function: its total mass is the
//! expected number of objects, so pruning and capping rescale the surviving
//! weights to conserve mass instead of normalizing to one.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Largest asymmetry a covariance may show; anything below is repaired by
/// symmetrization on construction.
pub const SYMMETRY_TOL: f64 = 1e-9;

const LN_2PI: f64 = 1.8378770664093453;

/// One weighted Gaussian term of a mixture.
#[derive(Debug, Clone)]
pub struct GaussianComponent {
    weight: f64,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianComponent {
    /// Builds a component, symmetrizing the covariance and checking that it
    /// admits a Cholesky factorization (strictly positive eigenvalues).
    pub fn new(weight: f64, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidWeight(weight));
        }
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: covariance.nrows(),
            });
        }
        let covariance = symmetrize(&covariance);
        if Cholesky::new(covariance.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            weight,
            mean,
            covariance,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Returns a copy with the weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            weight: self.weight * factor,
            mean: self.mean.clone(),
            covariance: self.covariance.clone(),
        }
    }

    /// Evaluates `weight * N(point; mean, covariance)`.
    pub fn density(&self, point: &DVector<f64>) -> Result<f64> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        let chol = Cholesky::new(self.covariance.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(self.weight * gaussian_log_density(point, &self.mean, &chol).exp())
    }
}

/// Log of the multivariate normal density at `point`, given the Cholesky
/// factor of the covariance.
pub(crate) fn gaussian_log_density(
    point: &DVector<f64>,
    mean: &DVector<f64>,
    chol: &Cholesky<f64, Dyn>,
) -> f64 {
    let diff = point - mean;
    let quad = diff.dot(&chol.solve(&diff));
    let log_det: f64 = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|d| d.ln())
        .sum::<f64>()
        * 2.0;
    -0.5 * (point.len() as f64 * LN_2PI + log_det + quad)
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Ordered collection of Gaussian components sharing one state dimension.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    components: Vec<GaussianComponent>,
    dim: usize,
}

impl GaussianMixture {
    pub fn empty(dim: usize) -> Self {
        Self {
            components: Vec::new(),
            dim,
        }
    }

    /// Builds a mixture from components, all of which must share a dimension.
    pub fn new(components: Vec<GaussianComponent>, dim: usize) -> Result<Self> {
        for c in &components {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        Ok(Self { components, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GaussianComponent> {
        self.components.iter()
    }

    /// Total mass of the mixture; equals the expected object count when the
    /// mixture represents an intensity.
    pub fn total_mass(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Removes components with weight below `threshold` and rescales the
    /// survivors so the total mass is unchanged. Pruning everything yields
    /// the empty mixture.
    pub fn prune(&self, threshold: f64) -> Self {
        let total = self.total_mass();
        let kept: Vec<GaussianComponent> = self
            .components
            .iter()
            .filter(|c| c.weight >= threshold)
            .cloned()
            .collect();
        let kept_mass: f64 = kept.iter().map(|c| c.weight).sum();
        let components = if kept_mass > 0.0 {
            let scale = total / kept_mass;
            kept.into_iter().map(|c| c.scaled(scale)).collect()
        } else {
            kept
        };
        Self {
            components,
            dim: self.dim,
        }
    }

    /// Greedy single-pass merge: the highest-weight unprocessed component
    /// absorbs every unprocessed component within squared Mahalanobis
    /// distance `threshold` of it (measured in the absorber's metric,
    /// `d = (x_i - x_j)^T P_i^-1 (x_i - x_j)`), replacing the group by its
    /// moment-matched Gaussian. Total mass is conserved.
    pub fn merge(&self, threshold: f64) -> Result<Self> {
        let mut order: Vec<usize> = (0..self.components.len()).collect();
        order.sort_by(|&a, &b| {
            self.components[b]
                .weight
                .partial_cmp(&self.components[a].weight)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });

        let mut absorbed = vec![false; self.components.len()];
        let mut merged = Vec::new();
        for &anchor in &order {
            if absorbed[anchor] {
                continue;
            }
            let anchor_comp = &self.components[anchor];
            let chol =
                Cholesky::new(anchor_comp.covariance.clone()).ok_or(Error::NotPositiveDefinite)?;
            let mut group = Vec::new();
            for &j in &order {
                if absorbed[j] {
                    continue;
                }
                let diff = &self.components[j].mean - &anchor_comp.mean;
                let dist = diff.dot(&chol.solve(&diff));
                if dist <= threshold {
                    group.push(j);
                    absorbed[j] = true;
                }
            }
            merged.push(self.moment_match(&group)?);
        }
        // Canonical order: descending weight (stable), so repeated merging
        // reproduces the same component sequence.
        merged.sort_by(|a, b| {
            b.weight
                .partial_cmp(&a.weight)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Self::new(merged, self.dim)
    }

    /// Moment-matched Gaussian of the sub-mixture selected by `indices`.
    fn moment_match(&self, indices: &[usize]) -> Result<GaussianComponent> {
        let weight: f64 = indices.iter().map(|&i| self.components[i].weight).sum();
        if weight <= 0.0 {
            // Zero-mass group: nothing to average; keep the anchor as-is.
            return Ok(self.components[indices[0]].clone());
        }
        let mut mean = DVector::zeros(self.dim);
        for &i in indices {
            mean += &self.components[i].mean * self.components[i].weight;
        }
        mean /= weight;
        let mut cov = DMatrix::zeros(self.dim, self.dim);
        for &i in indices {
            let c = &self.components[i];
            let d = &c.mean - &mean;
            cov += (&c.covariance + d.clone() * d.transpose()) * c.weight;
        }
        cov /= weight;
        GaussianComponent::new(weight, mean, cov)
    }

    /// Keeps the `max_components` highest-weight components, rescaled to
    /// conserve total mass.
    pub fn cap(&self, max_components: usize) -> Self {
        if self.components.len() <= max_components {
            return self.clone();
        }
        let total = self.total_mass();
        let mut order: Vec<usize> = (0..self.components.len()).collect();
        order.sort_by(|&a, &b| {
            self.components[b]
                .weight
                .partial_cmp(&self.components[a].weight)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order.truncate(max_components);
        let kept: Vec<GaussianComponent> =
            order.iter().map(|&i| self.components[i].clone()).collect();
        let kept_mass: f64 = kept.iter().map(|c| c.weight).sum();
        let scale = if kept_mass > 0.0 {
            total / kept_mass
        } else {
            1.0
        };
        Self {
            components: kept.into_iter().map(|c| c.scaled(scale)).collect(),
            dim: self.dim,
        }
    }
}
