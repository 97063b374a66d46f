//! Run configuration and file formats.

pub mod config;
pub mod csv;

pub use config::RunConfig;
pub use csv::TrackPoint;
