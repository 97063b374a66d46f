//! Kolmogorov-Smirnov normality testing and acceleration statistics.
//!
//! Accelerations are recovered from position tracks by double-differencing,
//! so only consecutive triplets of time points contribute. The normality
//! test fits mean and standard deviation from the sample and converts the
//! KS statistic to a p-value with the asymptotic Kolmogorov distribution;
//! estimating the parameters makes the plain p-value conservative, which is
//! reported alongside the results.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// One-sample KS test outcome.
#[derive(Debug, Clone, Copy)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(t) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 t^2)`.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t <= 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-14 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Tests whether `samples` look normal, with mean and standard deviation
/// estimated from the sample itself. Returns `None` for degenerate inputs
/// (fewer than three samples or zero variance), where the test is
/// meaningless.
pub fn ks_normal_test(samples: &[f64]) -> Option<KsTest> {
    let n = samples.len();
    if n < 3 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd.is_nan() || sd <= 0.0 || !sd.is_finite() {
        return None;
    }
    let normal = Normal::new(mean, sd).expect("positive finite sd");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(*x);
        d = d.max((i + 1) as f64 / n as f64 - cdf);
        d = d.max(cdf - i as f64 / n as f64);
    }
    Some(KsTest {
        statistic: d,
        p_value: kolmogorov_survival((n as f64).sqrt() * d),
        n,
    })
}

/// Position path of one track: `(time_index, p_x, p_y)` in time order.
#[derive(Debug, Clone)]
pub struct PathPoints {
    pub id: usize,
    pub points: Vec<(usize, f64, f64)>,
}

/// One double-difference acceleration sample, um/s^2.
#[derive(Debug, Clone, Copy)]
pub struct AccelSample {
    pub track_id: usize,
    pub time_index: usize,
    pub ax: f64,
    pub ay: f64,
}

/// Per-axis moments plus the normality test (absent for degenerate data).
#[derive(Debug, Clone, Copy)]
pub struct AxisSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ks: Option<KsTest>,
}

impl AxisSummary {
    /// Whether the normality hypothesis survives at level `alpha`;
    /// `None` when the test was skipped.
    pub fn accepted(&self, alpha: f64) -> Option<bool> {
        self.ks.map(|k| k.p_value >= alpha)
    }

    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                n: 0,
                mean: 0.0,
                sd: 0.0,
                ks: None,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            n,
            mean,
            sd,
            ks: ks_normal_test(samples),
        }
    }
}

/// One point of normal-quantile plot data.
#[derive(Debug, Clone, Copy)]
pub struct QuantilePoint {
    pub axis: char,
    pub theoretical: f64,
    pub sample: f64,
}

/// Full output of the acceleration analysis.
#[derive(Debug, Clone)]
pub struct AccelerationAnalysis {
    pub samples: Vec<AccelSample>,
    pub x: AxisSummary,
    pub y: AxisSummary,
    pub quantiles: Vec<QuantilePoint>,
    /// Tracks too short for double-differencing, excluded from pooling.
    pub skipped_tracks: Vec<usize>,
}

/// Double-differences track positions into accelerations and tests each
/// axis for normality. Tracks without at least three consecutive time
/// points are skipped and reported.
pub fn analyze_accelerations(paths: &[PathPoints], dt: f64) -> Result<AccelerationAnalysis> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sampling interval must be positive, got {dt}"
        )));
    }
    let dt2 = dt * dt;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for path in paths {
        let mut contributed = false;
        for w in path.points.windows(3) {
            let (t0, x0, y0) = w[0];
            let (t1, x1, y1) = w[1];
            let (t2, x2, y2) = w[2];
            if t1 != t0 + 1 || t2 != t1 + 1 {
                continue;
            }
            samples.push(AccelSample {
                track_id: path.id,
                time_index: t1,
                ax: (x2 - 2.0 * x1 + x0) / dt2,
                ay: (y2 - 2.0 * y1 + y0) / dt2,
            });
            contributed = true;
        }
        if !contributed {
            skipped.push(path.id);
        }
    }

    let ax: Vec<f64> = samples.iter().map(|s| s.ax).collect();
    let ay: Vec<f64> = samples.iter().map(|s| s.ay).collect();
    let x = AxisSummary::from_samples(&ax);
    let y = AxisSummary::from_samples(&ay);

    let mut quantiles = Vec::new();
    for (axis, values, summary) in [('x', &ax, &x), ('y', &ay, &y)] {
        if values.is_empty() || summary.sd == 0.0 {
            continue;
        }
        let normal = Normal::new(summary.mean, summary.sd).expect("positive sd");
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len() as f64;
        for (i, &s) in sorted.iter().enumerate() {
            quantiles.push(QuantilePoint {
                axis,
                theoretical: normal.inverse_cdf((i as f64 + 0.5) / n),
                sample: s,
            });
        }
    }

    Ok(AccelerationAnalysis {
        samples,
        x,
        y,
        quantiles,
        skipped_tracks: skipped,
    })
}
