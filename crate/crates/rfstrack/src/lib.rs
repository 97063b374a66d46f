//! Multi-object Bayesian tracking over sets of point detections.
//!
//! The central piece is a clutter-free Gaussian-mixture CPHD filter: it
//! propagates an intensity function (a Gaussian mixture whose total mass is
//! the expected object count) together with the full cardinality
//! distribution, so both the number of objects and their states are
//! estimated jointly from unlabeled position measurements. Around it sit a
//! constant-velocity model family, a scenario simulator, the OSPA set
//! metric for evaluation, greedy track linking, and an acceleration
//! normality analysis for validating the motion model on real tracks.
//!
//! Per-update cost is linear in the number of measurements times the
//! number of mixture components, which keeps dense frames cheap.
//!
//! ## Runnable examples
//!
//! One example per capability, under `examples/`:
//!
//! ```bash
//! cargo run --release -p rfstrack --example filter_two_objects
//! cargo run --release -p rfstrack --example simulate_scenario
//! cargo run --release -p rfstrack --example track_detections
//! cargo run --release -p rfstrack --example evaluate_ospa
//! cargo run --release -p rfstrack --example analyze_accelerations
//! cargo run --release -p rfstrack --example kalman_equivalence
//! cargo run --release -p rfstrack --example crossing_tracks
//! ```
//!
//! The same flows are scriptable through the `rfstrack` binary
//! (`simulate`, `track`, `evaluate`, `analyze` subcommands).

pub mod assignment;
pub mod cardinality;
pub mod cphd;
pub mod error;
pub mod gm;
pub mod io;
pub mod link;
pub mod models;
pub mod ospa;
pub mod pipeline;
pub mod sim;
pub mod stats;

pub use cardinality::CardinalityDistribution;
pub use cphd::{CphdFilter, Extraction, FilterConfig, FilterState};
pub use error::{Error, Result};
pub use gm::{GaussianComponent, GaussianMixture};
pub use io::RunConfig;
pub use link::{default_gate, link_tracks, Track};
pub use models::{quadrant_birth_model, BirthModel, CvModelParams, MeasurementModel, MotionModel};
pub use ospa::{ospa, ospa_series, OspaParams, OspaResult};
pub use sim::{
    benchmark_scenario, generate, AccelerationNoise, BirthEvent, DetectionFrame, GroundTruth,
    ScenarioSpec,
};
