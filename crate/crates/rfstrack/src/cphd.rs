//! Clutter-free Gaussian-mixture CPHD recursion.
//!
//! The filter propagates an intensity (Gaussian mixture whose total mass is
//! the expected object count) together with the full cardinality
//! distribution. Every measurement is assumed to originate from a real
//! object; there is no clutter term. Permutation and binomial coefficients
//! are handled in log space so large cardinality supports do not overflow.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::cardinality::CardinalityDistribution;
use crate::error::{Error, Result};
use crate::gm::{gaussian_log_density, symmetrize, GaussianComponent, GaussianMixture};
use crate::models::{BirthModel, MeasurementModel, MotionModel};

/// Mixture-management and truncation settings.
#[derive(Debug, Clone, Copy)]
pub struct FilterConfig {
    /// Components with weight below this are pruned after each update.
    pub prune_threshold: f64,
    /// Squared-Mahalanobis merge radius.
    pub merge_threshold: f64,
    /// Hard cap on the number of mixture components.
    pub max_components: usize,
    /// Cardinality support is truncated at this count.
    pub max_cardinality: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            prune_threshold: 1e-5,
            merge_threshold: 0.004,
            max_components: 200,
            max_cardinality: 64,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prune_threshold < 0.0 {
            return Err(Error::InvalidParameter(
                "prune threshold must be nonnegative".into(),
            ));
        }
        if self.merge_threshold <= 0.0 {
            return Err(Error::InvalidParameter(
                "merge threshold must be positive".into(),
            ));
        }
        if self.max_components == 0 || self.max_cardinality == 0 {
            return Err(Error::InvalidParameter(
                "component and cardinality caps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Filter posterior at one time step: intensity, cardinality pmf and the
/// index of the most recently incorporated frame (-1 before any frame).
#[derive(Debug, Clone)]
pub struct FilterState {
    pub intensity: GaussianMixture,
    pub cardinality: CardinalityDistribution,
    pub time_index: i64,
}

impl FilterState {
    /// Expected object count from the cardinality distribution.
    pub fn expected_count(&self) -> f64 {
        self.cardinality.mean()
    }

    /// MAP object count; ties break toward the smaller count.
    pub fn map_count(&self) -> usize {
        self.cardinality.map_estimate()
    }

    /// Absolute gap between intensity mass and expected count. A diagnostic:
    /// large values signal an inconsistent prior or truncation trouble.
    pub fn consistency_gap(&self) -> f64 {
        (self.intensity.total_mass() - self.cardinality.mean()).abs()
    }

    /// Multi-object state estimate: the means of the MAP-count
    /// highest-weight components. If the mixture holds fewer components
    /// than the MAP count, all are returned and `shortfall` is nonzero.
    pub fn extract(&self) -> Extraction {
        let target = self.map_count();
        let mut order: Vec<usize> = (0..self.intensity.len()).collect();
        order.sort_by(|&a, &b| {
            let comps = self.intensity.components();
            comps[b]
                .weight()
                .partial_cmp(&comps[a].weight())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let take = target.min(order.len());
        let states = order[..take]
            .iter()
            .map(|&i| {
                let c = &self.intensity.components()[i];
                (c.mean().clone(), c.weight())
            })
            .collect();
        Extraction {
            states,
            shortfall: target - take,
        }
    }
}

/// Result of multi-object state extraction.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// Selected component means with their weights, heaviest first.
    pub states: Vec<(DVector<f64>, f64)>,
    /// How many requested states could not be backed by a component.
    pub shortfall: usize,
}

/// The filter: models plus mixture-management configuration.
#[derive(Debug, Clone)]
pub struct CphdFilter {
    pub motion: MotionModel,
    pub measurement: MeasurementModel,
    pub birth: BirthModel,
    pub config: FilterConfig,
}

impl CphdFilter {
    pub fn new(
        motion: MotionModel,
        measurement: MeasurementModel,
        birth: BirthModel,
        config: FilterConfig,
    ) -> Result<Self> {
        config.validate()?;
        if measurement.state_dim() != motion.dim() {
            return Err(Error::DimensionMismatch {
                expected: motion.dim(),
                got: measurement.state_dim(),
            });
        }
        if !birth.intensity.is_empty() && birth.intensity.dim() != motion.dim() {
            return Err(Error::DimensionMismatch {
                expected: motion.dim(),
                got: birth.intensity.dim(),
            });
        }
        Ok(Self {
            motion,
            measurement,
            birth,
            config,
        })
    }

    /// Initial state: cardinality is a point mass on a single object and
    /// the intensity is the supplied prior, or one broad unit-weight
    /// component at the origin when none is given.
    pub fn init(&self, prior: Option<GaussianMixture>) -> FilterState {
        let dim = self.motion.dim();
        let intensity = prior.unwrap_or_else(|| {
            let c = GaussianComponent::new(
                1.0,
                DVector::zeros(dim),
                DMatrix::identity(dim, dim) * 100.0,
            )
            .expect("default prior covariance is positive definite");
            GaussianMixture::new(vec![c], dim).expect("single-component prior")
        });
        FilterState {
            intensity,
            cardinality: CardinalityDistribution::point_mass(1, self.config.max_cardinality),
            time_index: -1,
        }
    }

    /// Prediction with the filter's stored motion and birth models.
    pub fn predict(&self, state: &FilterState) -> Result<FilterState> {
        self.predict_with(state, &self.motion, &self.birth)
    }

    /// Prediction with per-step model overrides.
    ///
    /// Survivors keep their shape under `(w, mu, P) -> (p_s w, F mu,
    /// Q + F P F^T)`; the birth intensity joins the mixture unchanged. The
    /// cardinality pmf is the binomial-survival thinning of the prior
    /// convolved with the birth count pmf.
    pub fn predict_with(
        &self,
        state: &FilterState,
        motion: &MotionModel,
        birth: &BirthModel,
    ) -> Result<FilterState> {
        let mut comps: Vec<GaussianComponent> =
            Vec::with_capacity(birth.intensity.len() + state.intensity.len());
        comps.extend(birth.intensity.iter().cloned());
        for c in state.intensity.iter() {
            let weight = motion.p_s * c.weight();
            if weight == 0.0 {
                continue;
            }
            let mean = &motion.f * c.mean();
            let cov = &motion.q + &motion.f * c.covariance() * motion.f.transpose();
            comps.push(GaussianComponent::new(weight, mean, cov)?);
        }
        let intensity = GaussianMixture::new(comps, state.intensity.dim())?;
        let cardinality = predict_cardinality(
            &state.cardinality,
            motion.p_s,
            &birth.cardinality,
            self.config.max_cardinality,
        )?;
        Ok(FilterState {
            intensity,
            cardinality,
            time_index: state.time_index + 1,
        })
    }

    /// Measurement update with the filter's stored measurement model.
    pub fn update(
        &self,
        state: &FilterState,
        measurements: &[DVector<f64>],
    ) -> Result<FilterState> {
        self.update_with(state, measurements, &self.measurement)
    }

    /// Measurement update with a per-step model override, followed by
    /// prune, merge and cap. `state` is expected to be a predicted state;
    /// the innovation likelihoods use its component parameters directly.
    pub fn update_with(
        &self,
        state: &FilterState,
        measurements: &[DVector<f64>],
        meas: &MeasurementModel,
    ) -> Result<FilterState> {
        let m = measurements.len();
        let n_max = self.config.max_cardinality;
        if m > n_max {
            return Err(Error::CardinalityExhausted {
                count: m,
                max: n_max,
            });
        }
        for z in measurements {
            if z.len() != meas.measurement_dim() {
                return Err(Error::DimensionMismatch {
                    expected: meas.measurement_dim(),
                    got: z.len(),
                });
            }
        }
        if m > 0 && state.intensity.is_empty() {
            return Err(Error::CardinalityDegenerate { count: m });
        }

        let q_d = meas.q_d();
        let ln_qd = q_d.ln();
        let lnf = ln_factorials(n_max);

        // Denominator terms  ln p(n) + ln P^n_m + (n-m) ln q_d,  n >= m.
        let mut ln_den_terms = vec![f64::NEG_INFINITY; n_max + 1];
        for n in m..=n_max {
            let p = state.cardinality.prob(n);
            if p <= 0.0 {
                continue;
            }
            let tail = if n > m { (n - m) as f64 * ln_qd } else { 0.0 };
            ln_den_terms[n] = p.ln() + lnf[n] - lnf[n - m] + tail;
        }
        let ln_den = log_sum_exp(&ln_den_terms[m..]);
        if ln_den == f64::NEG_INFINITY {
            return Err(Error::CardinalityDegenerate { count: m });
        }

        // Posterior cardinality: zero below m, renormalized above.
        let mut post = vec![0.0; n_max + 1];
        for n in m..=n_max {
            if ln_den_terms[n] > f64::NEG_INFINITY {
                post[n] = (ln_den_terms[n] - ln_den).exp();
            }
        }
        let cardinality = CardinalityDistribution::from_masses(post)?;

        // Missed-detection coefficient applied to every predicted component.
        let total_mass = state.intensity.total_mass();
        let miss_coeff = if q_d == 0.0 || total_mass == 0.0 {
            0.0
        } else {
            let mut ln_num_terms = vec![f64::NEG_INFINITY; n_max + 1];
            for n in (m + 1)..=n_max {
                let p = state.cardinality.prob(n);
                if p <= 0.0 {
                    continue;
                }
                let tail = if n > m + 1 {
                    (n - m - 1) as f64 * ln_qd
                } else {
                    0.0
                };
                ln_num_terms[n] = p.ln() + lnf[n] - lnf[n - m - 1] + tail;
            }
            let ln_num = log_sum_exp(&ln_num_terms[m + 1..]);
            if ln_num == f64::NEG_INFINITY {
                0.0
            } else {
                q_d * (ln_num - ln_den).exp() / total_mass
            }
        };

        let dim = state.intensity.dim();
        let mut comps: Vec<GaussianComponent> = Vec::with_capacity(state.intensity.len() * (m + 1));
        if miss_coeff > 0.0 {
            comps.extend(state.intensity.iter().map(|c| c.scaled(miss_coeff)));
        }

        if m > 0 && meas.p_d > 0.0 {
            let precomp = precompute_update(state, meas)?;
            for (z_index, z) in measurements.iter().enumerate() {
                let ln_lik: Vec<f64> = precomp
                    .iter()
                    .map(|d| d.ln_weight + gaussian_log_density(z, &d.predicted_meas, &d.chol_s))
                    .collect();
                let ln_norm = log_sum_exp(&ln_lik);
                if ln_norm == f64::NEG_INFINITY {
                    return Err(Error::DegenerateLikelihood { index: z_index });
                }
                for (d, &ln_l) in precomp.iter().zip(&ln_lik) {
                    let weight = meas.p_d * (ln_l - ln_norm).exp();
                    let innovation = z - &d.predicted_meas;
                    let mean = &d.predicted_mean + &d.gain * innovation;
                    comps.push(GaussianComponent::new(weight, mean, d.post_cov.clone())?);
                }
            }
        }

        let intensity = GaussianMixture::new(comps, dim)?
            .prune(self.config.prune_threshold)
            .merge(self.config.merge_threshold)?
            .cap(self.config.max_components);

        Ok(FilterState {
            intensity,
            cardinality,
            time_index: state.time_index,
        })
    }

    /// One full predict-update cycle.
    pub fn step(&self, state: &FilterState, measurements: &[DVector<f64>]) -> Result<FilterState> {
        let predicted = self.predict(state)?;
        self.update(&predicted, measurements)
    }
}

struct ComponentUpdate {
    ln_weight: f64,
    predicted_mean: DVector<f64>,
    predicted_meas: DVector<f64>,
    chol_s: Cholesky<f64, nalgebra::Dyn>,
    gain: DMatrix<f64>,
    post_cov: DMatrix<f64>,
}

/// Innovation covariance, gain and posterior covariance for every
/// component; each depends only on the component, so the later
/// per-measurement work is a single triangular solve and a mean shift.
fn precompute_update(state: &FilterState, meas: &MeasurementModel) -> Result<Vec<ComponentUpdate>> {
    let dim = state.intensity.dim();
    let eye = DMatrix::<f64>::identity(dim, dim);
    state
        .intensity
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let predicted_meas = &meas.h * c.mean();
            let s = symmetrize(&(&meas.r + &meas.h * c.covariance() * meas.h.transpose()));
            let chol_s = Cholesky::new(s).ok_or(Error::SingularInnovation { index })?;
            if chol_s.l_dirty().diagonal().iter().any(|&d| d * d < 1e-12) {
                return Err(Error::SingularInnovation { index });
            }
            // K = P H^T S^-1, computed as (S^-1 H P)^T.
            let gain = chol_s.solve(&(&meas.h * c.covariance())).transpose();
            let post_cov = symmetrize(&((&eye - &gain * &meas.h) * c.covariance()));
            Ok(ComponentUpdate {
                ln_weight: c.weight().ln(),
                predicted_mean: c.mean().clone(),
                predicted_meas,
                chol_s,
                gain,
                post_cov,
            })
        })
        .collect()
}

/// Cardinality prediction: binomial survival thinning convolved with the
/// birth count pmf, truncated at `max_count` and renormalized.
fn predict_cardinality(
    prior: &CardinalityDistribution,
    p_s: f64,
    birth: &CardinalityDistribution,
    max_count: usize,
) -> Result<CardinalityDistribution> {
    let l_max = prior.max_count();
    let lnf = ln_factorials(l_max);
    let ln_ps = p_s.ln();
    let ln_qs = (1.0 - p_s).ln();

    let mut survivors = vec![0.0; l_max + 1];
    for (j, slot) in survivors.iter_mut().enumerate() {
        let mut acc = 0.0;
        for l in j..=l_max {
            let p_l = prior.prob(l);
            if p_l <= 0.0 {
                continue;
            }
            // ln [ C(l,j) p_s^j (1-p_s)^(l-j) ]; each term is a probability,
            // so the exponent never overflows.
            let mut ln_term = lnf[l] - lnf[j] - lnf[l - j];
            if j > 0 {
                ln_term += j as f64 * ln_ps;
            }
            if l > j {
                ln_term += (l - j) as f64 * ln_qs;
            }
            acc += ln_term.exp() * p_l;
        }
        *slot = acc;
    }

    let mut predicted = vec![0.0; max_count + 1];
    for (n, slot) in predicted.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, surv) in survivors.iter().enumerate().take(n.min(l_max) + 1) {
            acc += birth.prob(n - j) * surv;
        }
        *slot = acc;
    }
    CardinalityDistribution::from_masses(predicted)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lnf = Vec::with_capacity(n + 1);
    lnf.push(0.0);
    for k in 1..=n {
        lnf.push(lnf[k - 1] + (k as f64).ln());
    }
    lnf
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|&t| (t - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{quadrant_birth_model, CvModelParams};
    use approx::assert_relative_eq;

    fn cv_filter(p_s: f64, p_d: f64) -> CphdFilter {
        let params = CvModelParams::default();
        CphdFilter::new(
            params.motion_model(p_s).unwrap(),
            params.measurement_model(p_d).unwrap(),
            quadrant_birth_model(FilterConfig::default().max_cardinality),
            FilterConfig::default(),
        )
        .unwrap()
    }

    fn single_component(weight: f64, mean: &[f64]) -> GaussianMixture {
        let c = GaussianComponent::new(
            weight,
            DVector::from_row_slice(mean),
            DMatrix::identity(4, 4),
        )
        .unwrap();
        GaussianMixture::new(vec![c], 4).unwrap()
    }

    #[test]
    fn default_init_is_single_object_prior() {
        let f = cv_filter(0.99, 0.98);
        let s = f.init(None);
        assert_eq!(s.map_count(), 1);
        assert_relative_eq!(s.cardinality.prob(1), 1.0, epsilon = 0.0);
        assert_relative_eq!(s.cardinality.prob(0), 0.0, epsilon = 0.0);
        assert_relative_eq!(s.intensity.total_mass(), 1.0, epsilon = 0.0);
        assert_eq!(s.time_index, -1);
    }

    #[test]
    fn init_passes_prior_through() {
        let f = cv_filter(0.99, 0.98);
        let comps = (0..3)
            .map(|i| {
                GaussianComponent::new(
                    2.0 / 3.0,
                    DVector::from_element(4, i as f64),
                    DMatrix::identity(4, 4),
                )
                .unwrap()
            })
            .collect();
        let prior = GaussianMixture::new(comps, 4).unwrap();
        let s = f.init(Some(prior));
        assert_relative_eq!(s.intensity.total_mass(), 2.0, epsilon = 1e-15);
        assert_eq!(s.map_count(), 1);
    }

    #[test]
    fn predict_with_certain_survival_is_identity() {
        let params = CvModelParams::default();
        let motion = MotionModel::new(DMatrix::identity(4, 4), DMatrix::zeros(4, 4), 1.0).unwrap();
        let filter = CphdFilter::new(
            motion.clone(),
            params.measurement_model(0.98).unwrap(),
            BirthModel::none(4, 64),
            FilterConfig::default(),
        )
        .unwrap();
        let state = FilterState {
            intensity: single_component(0.7, &[1.0, 2.0, 3.0, 4.0]),
            cardinality: CardinalityDistribution::point_mass(1, 64),
            time_index: -1,
        };
        let pred = filter.predict(&state).unwrap();
        assert_eq!(pred.intensity.len(), 1);
        let c = &pred.intensity.components()[0];
        assert_relative_eq!(c.weight(), 0.7, epsilon = 0.0);
        assert_relative_eq!(
            (c.mean() - state.intensity.components()[0].mean()).norm(),
            0.0
        );
        assert_relative_eq!(pred.cardinality.prob(1), 1.0, epsilon = 1e-15);
        assert_eq!(pred.time_index, 0);
    }

    #[test]
    fn predict_with_total_death_leaves_birth_only() {
        let f = cv_filter(0.0, 0.98);
        let state = FilterState {
            intensity: single_component(1.0, &[0.0; 4]),
            cardinality: CardinalityDistribution::point_mass(1, 64),
            time_index: 0,
        };
        let pred = f.predict(&state).unwrap();
        assert_eq!(pred.intensity.len(), 4); // birth components only
        let poisson = CardinalityDistribution::poisson(1.0, 64);
        for n in 0..=64 {
            assert_relative_eq!(pred.cardinality.prob(n), poisson.prob(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn predict_cardinality_matches_binomial_thinning() {
        let prior = CardinalityDistribution::point_mass(3, 10);
        let none = CardinalityDistribution::point_mass(0, 10);
        let pred = predict_cardinality(&prior, 0.9, &none, 10).unwrap();
        let expected = [0.001, 0.027, 0.243, 0.729];
        for (n, &e) in expected.iter().enumerate() {
            assert_relative_eq!(pred.prob(n), e, epsilon = 1e-12);
        }
        assert_relative_eq!(pred.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn predict_cardinality_matches_bruteforce_convolution() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n_max = 10usize;
            let prior_masses: Vec<f64> = (0..=n_max).map(|_| rng.random_range(0.0..1.0)).collect();
            let birth_masses: Vec<f64> = (0..=n_max).map(|_| rng.random_range(0.0..1.0)).collect();
            let prior = CardinalityDistribution::from_masses(prior_masses).unwrap();
            let birth = CardinalityDistribution::from_masses(birth_masses).unwrap();
            let p_s: f64 = rng.random_range(0.0..=1.0);

            let got = predict_cardinality(&prior, p_s, &birth, n_max).unwrap();

            // Brute force: plain double loop with exact small binomials.
            let choose = |n: usize, k: usize| -> f64 {
                let mut c = 1.0;
                for i in 0..k {
                    c = c * (n - i) as f64 / (i + 1) as f64;
                }
                c
            };
            let mut expected = vec![0.0; n_max + 1];
            for (n, e) in expected.iter_mut().enumerate() {
                for j in 0..=n {
                    let mut surv = 0.0;
                    for l in j..=n_max {
                        surv += choose(l, j)
                            * p_s.powi(j as i32)
                            * (1.0 - p_s).powi((l - j) as i32)
                            * prior.prob(l);
                    }
                    *e += birth.prob(n - j) * surv;
                }
            }
            let total: f64 = expected.iter().sum();
            for (n, e) in expected.iter().enumerate() {
                assert_relative_eq!(got.prob(n), e / total, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn predict_preserves_mass_split() {
        let f = cv_filter(0.99, 0.98);
        let state = FilterState {
            intensity: single_component(2.5, &[1.0, 0.0, -1.0, 0.0]),
            cardinality: CardinalityDistribution::point_mass(2, 64),
            time_index: 3,
        };
        let pred = f.predict(&state).unwrap();
        let expected = 0.99 * 2.5 + f.birth.intensity.total_mass();
        assert_relative_eq!(pred.intensity.total_mass(), expected, epsilon = 1e-12);
        assert_relative_eq!(
            pred.cardinality.probs().iter().sum::<f64>(),
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn empty_update_scales_by_missed_detection_ratio() {
        let f = cv_filter(0.99, 0.98);
        let init = f.init(None);
        let pred = f.predict(&init).unwrap();
        let updated = f.update(&pred, &[]).unwrap();

        // Independent evaluation of the scale factor.
        let q = 0.02f64;
        let num: f64 = (1..=64)
            .map(|n| n as f64 * pred.cardinality.prob(n) * q.powi(n as i32 - 1))
            .sum();
        let den: f64 = (0..=64)
            .map(|n| pred.cardinality.prob(n) * q.powi(n as i32))
            .sum();
        let coeff = q * num / (pred.intensity.total_mass() * den);
        let expected_mass = coeff * pred.intensity.total_mass();
        assert_relative_eq!(
            updated.intensity.total_mass(),
            expected_mass,
            epsilon = 1e-9
        );

        // Posterior mass equals posterior expected count when no
        // measurements arrive.
        assert_relative_eq!(
            updated.intensity.total_mass(),
            updated.expected_count(),
            epsilon = 1e-9
        );
        // Cardinality is pulled toward small counts.
        assert!(updated.cardinality.prob(0) > pred.cardinality.prob(0));
    }

    #[test]
    fn detection_weights_concentrate_on_nearby_component() {
        let f = cv_filter(0.99, 0.98);
        let a = GaussianComponent::new(
            0.5,
            DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0]),
            DMatrix::identity(4, 4),
        )
        .unwrap();
        let b = GaussianComponent::new(
            0.5,
            DVector::from_row_slice(&[40.0, 0.0, 40.0, 0.0]),
            DMatrix::identity(4, 4),
        )
        .unwrap();
        let state = FilterState {
            intensity: GaussianMixture::new(vec![a, b], 4).unwrap(),
            cardinality: CardinalityDistribution::point_mass(2, 64),
            time_index: 0,
        };
        let measurements = [
            DVector::from_row_slice(&[0.1, -0.1]),
            DVector::from_row_slice(&[39.9, 40.1]),
        ];
        // Oracle: direct ratio of the two innovation likelihoods.
        let meas = &f.measurement;
        for z in &measurements {
            let mut qs = Vec::new();
            for c in state.intensity.iter() {
                let s = &meas.r + &meas.h * c.covariance() * meas.h.transpose();
                let chol = Cholesky::new(s).unwrap();
                qs.push(c.weight() * gaussian_log_density(z, &(&meas.h * c.mean()), &chol).exp());
            }
            let total: f64 = qs.iter().sum();
            let top = qs.iter().cloned().fold(f64::MIN, f64::max) / total;
            assert!(top > 0.99, "oracle ratio should concentrate, got {top}");
        }

        let updated = f.update(&state, &measurements).unwrap();
        // After pruning, each measurement keeps essentially one component
        // with weight close to p_d plus the missed-detection remnants.
        let heavy: Vec<f64> = updated
            .intensity
            .iter()
            .map(|c| c.weight())
            .filter(|w| *w > 0.9)
            .collect();
        assert_eq!(heavy.len(), 2);
    }

    #[test]
    fn cardinality_update_matches_bruteforce() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let params = CvModelParams::default();
        for _ in 0..50 {
            let masses: Vec<f64> = (0..=8).map(|_| rng.random_range(0.0..1.0)).collect();
            let pred_card = CardinalityDistribution::from_masses(masses).unwrap();
            let m = 3usize;
            let q_d = 0.02f64;

            let config = FilterConfig {
                max_cardinality: 8,
                ..FilterConfig::default()
            };
            let filter = CphdFilter::new(
                params.motion_model(0.99).unwrap(),
                params.measurement_model(1.0 - q_d).unwrap(),
                BirthModel::none(4, 8),
                config,
            )
            .unwrap();
            let comps = (0..4)
                .map(|i| {
                    GaussianComponent::new(
                        1.0,
                        DVector::from_row_slice(&[10.0 * i as f64, 0.0, 0.0, 0.0]),
                        DMatrix::identity(4, 4),
                    )
                    .unwrap()
                })
                .collect();
            let state = FilterState {
                intensity: GaussianMixture::new(comps, 4).unwrap(),
                cardinality: pred_card.clone(),
                time_index: 0,
            };
            let measurements: Vec<DVector<f64>> = (0..m)
                .map(|i| DVector::from_row_slice(&[10.0 * i as f64, 0.1]))
                .collect();
            let updated = filter.update(&state, &measurements).unwrap();

            // Scalar-loop oracle for the posterior cardinality.
            let perm = |n: usize, m: usize| -> f64 {
                let mut p = 1.0;
                for i in 0..m {
                    p *= (n - i) as f64;
                }
                p
            };
            let mut expected = [0.0; 9];
            for (n, e) in expected.iter_mut().enumerate() {
                if n < m {
                    continue;
                }
                *e = pred_card.prob(n) * perm(n, m) * q_d.powi((n - m) as i32);
            }
            let total: f64 = expected.iter().sum();
            for (n, e) in expected.iter().enumerate() {
                assert_relative_eq!(updated.cardinality.prob(n), e / total, epsilon = 1e-12);
            }
            for n in 0..m {
                assert_eq!(updated.cardinality.prob(n), 0.0);
            }
        }
    }

    #[test]
    fn large_cardinality_support_stays_finite() {
        // Permutation coefficients like 200!/160! overflow f64 if formed
        // directly; the log-space path must keep everything finite.
        let params = CvModelParams::default();
        let config = FilterConfig {
            max_cardinality: 200,
            ..FilterConfig::default()
        };
        let filter = CphdFilter::new(
            params.motion_model(0.99).unwrap(),
            params.measurement_model(0.98).unwrap(),
            BirthModel::none(4, 200),
            config,
        )
        .unwrap();
        let comps: Vec<GaussianComponent> = (0..40)
            .map(|i| {
                GaussianComponent::new(
                    1.0,
                    DVector::from_row_slice(&[
                        (i % 8) as f64 * 40.0,
                        0.0,
                        (i / 8) as f64 * 40.0,
                        0.0,
                    ]),
                    DMatrix::identity(4, 4),
                )
                .unwrap()
            })
            .collect();
        let mut state = FilterState {
            intensity: GaussianMixture::new(comps, 4).unwrap(),
            cardinality: CardinalityDistribution::poisson(40.0, 200),
            time_index: 0,
        };
        let measurements: Vec<DVector<f64>> = (0..40)
            .map(|i| DVector::from_row_slice(&[(i % 8) as f64 * 40.0 + 0.1, (i / 8) as f64 * 40.0]))
            .collect();
        for _ in 0..5 {
            state = filter.step(&state, &measurements).unwrap();
            assert!(state.cardinality.probs().iter().all(|p| p.is_finite()));
            assert!(state.intensity.total_mass().is_finite());
            assert_relative_eq!(
                state.cardinality.probs().iter().sum::<f64>(),
                1.0,
                epsilon = 1e-10
            );
        }
        assert_eq!(state.map_count(), 40);
        assert!(state.consistency_gap() < 0.02 * 40.0 + 0.5);
    }

    #[test]
    fn certain_detection_with_no_measurements_empties_the_scene() {
        // p_d = 1 and an empty measurement set certify that nothing is
        // there: the posterior count collapses to zero and the intensity
        // empties. The birth process then repopulates candidates on the
        // next cycle.
        let params = CvModelParams::default();
        let filter = CphdFilter::new(
            params.motion_model(0.99).unwrap(),
            params.measurement_model(1.0).unwrap(),
            quadrant_birth_model(64),
            FilterConfig::default(),
        )
        .unwrap();
        let init = filter.init(None);
        let state = filter.step(&init, &[]).unwrap();
        assert_eq!(state.map_count(), 0);
        assert_relative_eq!(state.cardinality.prob(0), 1.0, epsilon = 1e-12);
        assert!(state.intensity.is_empty());

        let z = [DVector::from_row_slice(&[3.0, 5.0])];
        let next = filter.step(&state, &z).unwrap();
        assert_eq!(next.map_count(), 1);
        assert!(!next.intensity.is_empty());
    }

    #[test]
    fn update_rejects_near_singular_innovation() {
        // R below the pivot tolerance: Cholesky may succeed numerically,
        // but the update must refuse to invert it.
        let params = CvModelParams::default();
        let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = DMatrix::identity(2, 2) * 1e-14;
        let meas = MeasurementModel::new(h, r, 1.0).unwrap();
        let filter = CphdFilter::new(
            params.motion_model(1.0).unwrap(),
            meas.clone(),
            BirthModel::none(4, 64),
            FilterConfig::default(),
        )
        .unwrap();
        let c = GaussianComponent::new(1.0, DVector::zeros(4), DMatrix::identity(4, 4) * 1e-14)
            .unwrap();
        let state = FilterState {
            intensity: GaussianMixture::new(vec![c], 4).unwrap(),
            cardinality: CardinalityDistribution::point_mass(1, 64),
            time_index: 0,
        };
        let z = [DVector::from_row_slice(&[0.0, 0.0])];
        let err = filter.update(&state, &z);
        assert!(matches!(err, Err(Error::SingularInnovation { index: 0 })));
    }

    #[test]
    fn update_rejects_wrong_measurement_dimension() {
        let f = cv_filter(0.99, 0.98);
        let state = f.init(None);
        let pred = f.predict(&state).unwrap();
        let z = [DVector::from_row_slice(&[1.0, 2.0, 3.0])];
        assert!(matches!(
            f.update(&pred, &z),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn filter_construction_validates_config_and_dimensions() {
        let params = CvModelParams::default();
        let bad_config = FilterConfig {
            merge_threshold: 0.0,
            ..FilterConfig::default()
        };
        assert!(CphdFilter::new(
            params.motion_model(0.99).unwrap(),
            params.measurement_model(0.98).unwrap(),
            quadrant_birth_model(64),
            bad_config,
        )
        .is_err());

        let mismatched =
            MotionModel::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 2), 0.9).unwrap();
        assert!(CphdFilter::new(
            mismatched,
            params.measurement_model(0.98).unwrap(),
            quadrant_birth_model(64),
            FilterConfig::default(),
        )
        .is_err());
    }

    #[test]
    fn update_rejects_oversized_measurement_sets() {
        let config = FilterConfig {
            max_cardinality: 4,
            ..FilterConfig::default()
        };
        let params = CvModelParams::default();
        let filter = CphdFilter::new(
            params.motion_model(0.99).unwrap(),
            params.measurement_model(0.98).unwrap(),
            quadrant_birth_model(4),
            config,
        )
        .unwrap();
        let state = filter.init(None);
        let pred = filter.predict(&state).unwrap();
        let measurements: Vec<DVector<f64>> = (0..5)
            .map(|i| DVector::from_row_slice(&[i as f64, 0.0]))
            .collect();
        let err = filter.update(&pred, &measurements);
        assert!(matches!(
            err,
            Err(Error::CardinalityExhausted { count: 5, max: 4 })
        ));
    }

    #[test]
    fn full_cycle_keeps_mass_near_expected_count() {
        let f = cv_filter(0.99, 0.98);
        let mut state = f.init(None);
        let measurements = [
            DVector::from_row_slice(&[3.0, 5.0]),
            DVector::from_row_slice(&[-4.0, 8.0]),
        ];
        for _ in 0..10 {
            state = f.step(&state, &measurements).unwrap();
            let gap = state.consistency_gap();
            // Exact identity: mass = E[n] - q_d * m, so the gap is q_d * m.
            assert!(gap <= 0.02 * measurements.len() as f64 + 1e-9, "gap {gap}");
            assert_relative_eq!(
                state.cardinality.probs().iter().sum::<f64>(),
                1.0,
                epsilon = 1e-10
            );
        }
        assert_eq!(state.map_count(), 2);
    }

    #[test]
    fn extraction_follows_map_count() {
        let comps = vec![
            GaussianComponent::new(0.95, DVector::from_element(4, 1.0), DMatrix::identity(4, 4))
                .unwrap(),
            GaussianComponent::new(0.9, DVector::from_element(4, 2.0), DMatrix::identity(4, 4))
                .unwrap(),
            GaussianComponent::new(0.1, DVector::from_element(4, 3.0), DMatrix::identity(4, 4))
                .unwrap(),
        ];
        let state = FilterState {
            intensity: GaussianMixture::new(comps, 4).unwrap(),
            cardinality: CardinalityDistribution::from_masses(vec![0.0, 0.05, 0.9, 0.05]).unwrap(),
            time_index: 0,
        };
        let ex = state.extract();
        assert_eq!(ex.states.len(), 2);
        assert_eq!(ex.shortfall, 0);
        assert_relative_eq!(ex.states[0].0[0], 1.0, epsilon = 0.0);
        assert_relative_eq!(ex.states[1].0[0], 2.0, epsilon = 0.0);

        let empty_card = FilterState {
            intensity: state.intensity.clone(),
            cardinality: CardinalityDistribution::point_mass(0, 4),
            time_index: 0,
        };
        assert!(empty_card.extract().states.is_empty());

        let starved = FilterState {
            intensity: GaussianMixture::empty(4),
            cardinality: CardinalityDistribution::point_mass(2, 4),
            time_index: 0,
        };
        let ex = starved.extract();
        assert!(ex.states.is_empty());
        assert_eq!(ex.shortfall, 2);
    }

    #[test]
    fn kalman_degeneration_short_run() {
        // p_d = 1, p_s = 1, no birth, one component, one measurement per
        // step: the single mixture component must follow the standard
        // Kalman recursion exactly.
        let params = CvModelParams::default();
        let filter = CphdFilter::new(
            params.motion_model(1.0).unwrap(),
            params.measurement_model(1.0).unwrap(),
            BirthModel::none(4, 64),
            FilterConfig::default(),
        )
        .unwrap();
        let mut state = filter.init(None);

        let mut kx = DVector::zeros(4);
        let mut kp = DMatrix::identity(4, 4) * 100.0;
        let f_mat = params.transition_matrix();
        let q = params.process_noise();
        let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = DMatrix::identity(2, 2) * 0.04;

        for t in 0..5 {
            let z = DVector::from_row_slice(&[t as f64 * 1.5, -(t as f64)]);
            state = filter.step(&state, std::slice::from_ref(&z)).unwrap();

            kx = &f_mat * kx;
            kp = &q + &f_mat * &kp * f_mat.transpose();
            let s = &r + &h * &kp * h.transpose();
            let k = &kp * h.transpose() * s.try_inverse().unwrap();
            kx += &k * (&z - &h * &kx);
            kp = (DMatrix::identity(4, 4) - &k * &h) * &kp;

            assert_eq!(state.intensity.len(), 1);
            let c = &state.intensity.components()[0];
            assert_relative_eq!(c.weight(), 1.0, epsilon = 1e-12);
            assert!((c.mean() - &kx).norm() < 1e-9);
            assert!((c.covariance() - &kp).norm() < 1e-9);
            assert_eq!(state.map_count(), 1);
        }
    }
}
