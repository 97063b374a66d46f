//! Single-object degeneration: with certain detection and survival, no
//! births and one mixture component, the CPHD update collapses to the
//! standard Kalman filter. This example runs both side by side and prints
//! the largest deviation over a 100-step track.

use nalgebra::{DMatrix, DVector};
use rfstrack::{BirthModel, CphdFilter, CvModelParams, FilterConfig, ScenarioSpec};

fn main() -> rfstrack::Result<()> {
    let params = CvModelParams::default();
    let filter = CphdFilter::new(
        params.motion_model(1.0)?,
        params.measurement_model(1.0)?,
        BirthModel::none(4, 64),
        FilterConfig::default(),
    )?;

    let spec = ScenarioSpec {
        duration: 100,
        tracks: vec![rfstrack::BirthEvent {
            birth_step: 0,
            death_step: 100,
            initial_state: DVector::from_row_slice(&[1.0, 0.8, -2.0, 1.1]),
        }],
        motion: params,
        p_d: 1.0,
        seed: 99,
        noise: rfstrack::AccelerationNoise::Gaussian,
    };
    let (_, frames) = rfstrack::generate(&spec)?;

    // Plain Kalman filter over the same data.
    let f = params.transition_matrix();
    let q = params.process_noise();
    let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let r = DMatrix::identity(2, 2) * (0.2f64 * 0.2);
    let mut kx = DVector::zeros(4);
    let mut kp = DMatrix::identity(4, 4) * 100.0;

    let mut state = filter.init(None);
    let mut worst_mean: f64 = 0.0;
    let mut worst_cov: f64 = 0.0;
    for frame in &frames {
        state = filter.step(&state, &frame.measurements)?;

        let z = &frame.measurements[0];
        kx = &f * kx;
        kp = &q + &f * &kp * f.transpose();
        let s = &r + &h * &kp * h.transpose();
        let gain = &kp * h.transpose() * s.try_inverse().expect("2x2 invertible");
        kx += &gain * (z - &h * &kx);
        kp = (DMatrix::identity(4, 4) - &gain * &h) * &kp;

        let c = &state.intensity.components()[0];
        worst_mean = worst_mean.max((c.mean() - &kx).amax());
        worst_cov = worst_cov.max((c.covariance() - &kp).amax());
    }

    println!("100 steps, single object, p_d = p_s = 1, no births:");
    println!("  mixture size stayed at {}", state.intensity.len());
    println!("  max |mean difference|       = {worst_mean:.3e}");
    println!("  max |covariance difference| = {worst_cov:.3e}");
    println!("  final Kalman mean    {:?}", kx.as_slice());
    println!(
        "  final mixture mean   {:?}",
        state.intensity.components()[0].mean().as_slice()
    );
    Ok(())
}
