//! Thin command-line front end over [`rfstrack::pipeline`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rfstrack::io::config::parse_order;
use rfstrack::pipeline;
use rfstrack::{Error, RunConfig};

#[derive(Parser)]
#[command(
    name = "rfstrack",
    version,
    about = "Multi-object tracking toolkit: simulate scenarios, track detections, evaluate with OSPA, analyze accelerations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonOpts {
    /// Key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic 12-track scenario: truth.csv and detections.csv
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Detection probability override
        #[arg(long = "p-d")]
        p_d: Option<f64>,
    },
    /// Run the tracker over a detections file: tracks.csv and cardinality.csv
    Track {
        /// Input detections.csv
        detections: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compare tracks against truth with the OSPA metric: ospa.csv
    Evaluate {
        /// Reference truth.csv
        truth: PathBuf,
        /// Estimated tracks.csv
        tracks: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
        /// OSPA cutoff c override
        #[arg(long = "cutoff-c")]
        cutoff_c: Option<f64>,
        /// OSPA order l override (number or 'inf')
        #[arg(long = "order-l")]
        order_l: Option<String>,
    },
    /// Acceleration statistics and normality tests of a tracks file
    Analyze {
        /// Input tracks.csv (or truth.csv)
        tracks: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn load_config(common: &CommonOpts) -> Result<RunConfig, Error> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { common, p_d } => {
            let mut config = load_config(&common)?;
            if let Some(p_d) = p_d {
                if !(0.0..=1.0).contains(&p_d) {
                    return Err(Error::InvalidParameter(format!(
                        "--p-d must lie in [0, 1], got {p_d}"
                    )));
                }
                config.p_d = p_d;
            }
            let s = pipeline::simulate(&config)?;
            println!(
                "simulated {} tracks over {} steps (seed {})",
                s.track_count, s.steps, config.seed
            );
            println!(
                "  {} measurements -> {}",
                s.measurement_count,
                s.detections_path.display()
            );
            println!("  truth -> {}", s.truth_path.display());
        }
        Command::Track { detections, common } => {
            let config = load_config(&common)?;
            let start = std::time::Instant::now();
            let s = pipeline::track(&detections, &config)?;
            println!(
                "tracked {} frames in {:.2} s: {} linked tracks, {} points",
                s.steps,
                start.elapsed().as_secs_f64(),
                s.linked_track_count,
                s.point_count
            );
            println!("  tracks -> {}", s.tracks_path.display());
            println!("  cardinality -> {}", s.cardinality_path.display());
            if s.gap_warnings > 0 {
                eprintln!(
                    "warning: |intensity mass - expected count| exceeded 0.5 on {} steps (max {:.3})",
                    s.gap_warnings, s.max_consistency_gap
                );
            }
        }
        Command::Evaluate {
            truth,
            tracks,
            common,
            cutoff_c,
            order_l,
        } => {
            let mut config = load_config(&common)?;
            if let Some(c) = cutoff_c {
                if c.is_nan() || c <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "--cutoff-c must be positive, got {c}"
                    )));
                }
                config.ospa.cutoff = c;
            }
            if let Some(l) = order_l {
                config.ospa.order = parse_order(&l).map_err(Error::InvalidParameter)?;
            }
            let s = pipeline::evaluate(&truth, &tracks, &config)?;
            println!(
                "ospa summary (c={}, l={}) over steps {}..={}:",
                s.cutoff,
                s.order,
                s.first_step,
                s.first_step + s.steps - 1
            );
            println!(
                "  mean: total={:.6}, localization={:.6}, cardinality={:.6}",
                s.mean.total, s.mean.localization, s.mean.cardinality
            );
            println!(
                "  max:  total={:.6}, localization={:.6}, cardinality={:.6}",
                s.max.total, s.max.localization, s.max.cardinality
            );
            println!("  per-step -> {}", s.ospa_path.display());
        }
        Command::Analyze { tracks, common } => {
            let config = load_config(&common)?;
            let s = pipeline::analyze(&tracks, &config)?;
            for line in s.report_lines() {
                println!("{line}");
            }
            println!("  accelerations -> {}", s.accelerations_path.display());
            println!("  normal quantiles -> {}", s.quantiles_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
