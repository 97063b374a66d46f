//! Linear-Gaussian motion, measurement and birth models.
//!
//! State layout for the planar constant-velocity configuration is
//! `[p_x, v_x, p_y, v_y]` in micrometers and micrometers per second.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::cardinality::CardinalityDistribution;
use crate::error::{Error, Result};
use crate::gm::{symmetrize, GaussianComponent, GaussianMixture};

/// Linear-Gaussian transition `x' ~ N(F x, Q)` with state-independent
/// survival probability.
#[derive(Debug, Clone)]
pub struct MotionModel {
    pub f: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub p_s: f64,
}

impl MotionModel {
    pub fn new(f: DMatrix<f64>, q: DMatrix<f64>, p_s: f64) -> Result<Self> {
        if !f.is_square() || !q.is_square() || f.nrows() != q.nrows() {
            return Err(Error::DimensionMismatch {
                expected: f.nrows(),
                got: q.nrows(),
            });
        }
        if !(0.0..=1.0).contains(&p_s) {
            return Err(Error::InvalidParameter(format!(
                "survival probability {p_s} outside [0, 1]"
            )));
        }
        let q = symmetrize(&q);
        // Q may be singular (rank-deficient process noise) but not indefinite.
        if q.symmetric_eigenvalues().iter().any(|&l| l < -1e-9) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { f, q, p_s })
    }

    pub fn dim(&self) -> usize {
        self.f.nrows()
    }
}

/// Linear-Gaussian likelihood `z ~ N(H x, R)` with state-independent
/// detection probability.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    pub h: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub p_d: f64,
}

impl MeasurementModel {
    pub fn new(h: DMatrix<f64>, r: DMatrix<f64>, p_d: f64) -> Result<Self> {
        if !r.is_square() || r.nrows() != h.nrows() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                got: r.nrows(),
            });
        }
        if !(0.0..=1.0).contains(&p_d) {
            return Err(Error::InvalidParameter(format!(
                "detection probability {p_d} outside [0, 1]"
            )));
        }
        let r = symmetrize(&r);
        if Cholesky::new(r.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { h, r, p_d })
    }

    /// Probability of missing a detection, `1 - p_d` exactly.
    pub fn q_d(&self) -> f64 {
        1.0 - self.p_d
    }

    pub fn measurement_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn state_dim(&self) -> usize {
        self.h.ncols()
    }
}

/// Appearance model: a Gaussian-mixture intensity for where new objects
/// enter, plus the pmf of how many enter per step.
#[derive(Debug, Clone)]
pub struct BirthModel {
    pub intensity: GaussianMixture,
    pub cardinality: CardinalityDistribution,
}

impl BirthModel {
    pub fn new(intensity: GaussianMixture, cardinality: CardinalityDistribution) -> Self {
        Self {
            intensity,
            cardinality,
        }
    }

    /// Poisson birth: the count pmf is Poisson with mean equal to the
    /// intensity's total mass, truncated at `max_count`.
    pub fn poisson(intensity: GaussianMixture, max_count: usize) -> Self {
        let mean = intensity.total_mass();
        Self {
            cardinality: CardinalityDistribution::poisson(mean, max_count),
            intensity,
        }
    }

    /// No objects ever enter.
    pub fn none(dim: usize, max_count: usize) -> Self {
        Self {
            intensity: GaussianMixture::empty(dim),
            cardinality: CardinalityDistribution::point_mass(0, max_count),
        }
    }
}

/// Parameters of the discretized planar constant-velocity model.
#[derive(Debug, Clone, Copy)]
pub struct CvModelParams {
    /// Sampling interval, seconds.
    pub dt: f64,
    /// Acceleration-noise standard deviation on the x axis, um/s^2.
    pub sigma_x: f64,
    /// Acceleration-noise standard deviation on the y axis, um/s^2.
    pub sigma_y: f64,
    /// Measurement-noise standard deviation, um.
    pub sigma_o: f64,
}

impl CvModelParams {
    pub fn new(dt: f64, sigma_x: f64, sigma_y: f64, sigma_o: f64) -> Result<Self> {
        for (name, v) in [
            ("dt", dt),
            ("sigma_x", sigma_x),
            ("sigma_y", sigma_y),
            ("sigma_o", sigma_o),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            dt,
            sigma_x,
            sigma_y,
            sigma_o,
        })
    }

    /// Transition matrix: positions integrate velocities over one interval.
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let dt = self.dt;
        DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, dt, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, dt, //
                0.0, 0.0, 0.0, 1.0,
            ],
        )
    }

    /// Noise input matrix mapping per-axis accelerations into the state.
    pub fn noise_input_matrix(&self) -> DMatrix<f64> {
        let dt = self.dt;
        DMatrix::from_row_slice(
            4,
            2,
            &[dt * dt / 2.0, 0.0, dt, 0.0, 0.0, dt * dt / 2.0, 0.0, dt],
        )
    }

    /// Process noise covariance `G diag(sigma_x^2, sigma_y^2) G^T`.
    pub fn process_noise(&self) -> DMatrix<f64> {
        let g = self.noise_input_matrix();
        let sig = DMatrix::from_diagonal(&DVector::from_row_slice(&[
            self.sigma_x * self.sigma_x,
            self.sigma_y * self.sigma_y,
        ]));
        &g * sig * g.transpose()
    }

    /// Constant-velocity motion model with the given survival probability.
    pub fn motion_model(&self, p_s: f64) -> Result<MotionModel> {
        MotionModel::new(self.transition_matrix(), self.process_noise(), p_s)
    }

    /// Position-only measurement model with `R = sigma_o^2 I`.
    pub fn measurement_model(&self, p_d: f64) -> Result<MeasurementModel> {
        let h = DMatrix::from_row_slice(
            2,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        );
        let r = DMatrix::identity(2, 2) * (self.sigma_o * self.sigma_o);
        MeasurementModel::new(h, r, p_d)
    }
}

impl Default for CvModelParams {
    /// One-second sampling, 2.33 um/s^2 acceleration noise per axis,
    /// 0.2 um measurement noise.
    fn default() -> Self {
        Self {
            dt: 1.0,
            sigma_x: 2.33,
            sigma_y: 2.33,
            sigma_o: 0.2,
        }
    }
}

/// Positions of the four default birth locations, one per quadrant.
pub const QUADRANT_BIRTH_MEANS: [[f64; 4]; 4] = [
    [3.0, 0.0, 5.0, 0.0],
    [4.0, 0.0, -6.0, 0.0],
    [-3.0, 0.0, -2.0, 0.0],
    [-4.0, 0.0, 8.0, 0.0],
];

/// Poisson birth model covering all four quadrants with equal weight 0.25
/// and a broad covariance `10 I`, so the expected number of entries per
/// step is one.
pub fn quadrant_birth_model(max_count: usize) -> BirthModel {
    let comps = QUADRANT_BIRTH_MEANS
        .iter()
        .map(|mean| {
            GaussianComponent::new(
                0.25,
                DVector::from_row_slice(mean),
                DMatrix::identity(4, 4) * 10.0,
            )
            .expect("birth covariance is positive definite")
        })
        .collect();
    let intensity = GaussianMixture::new(comps, 4).expect("birth components share dimension");
    BirthModel::poisson(intensity, max_count)
}
