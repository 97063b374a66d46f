//! High-level runs behind the CLI subcommands and the examples: simulate,
//! track, evaluate, analyze. Each reads/writes the CSV formats of
//! [`crate::io::csv`] under the configured output directory and returns a
//! summary the caller can print or assert on.

use std::path::{Path, PathBuf};

use nalgebra::DVector;

use crate::cphd::CphdFilter;
use crate::error::{Error, Result};
use crate::io::csv::{self, TrackPoint};
use crate::io::RunConfig;
use crate::link::link_tracks;
use crate::models::quadrant_birth_model;
use crate::ospa::{ospa_series, OspaResult};
use crate::sim::{benchmark_scenario, generate, DetectionFrame, GroundTruth};
use crate::stats::{analyze_accelerations, AccelerationAnalysis, AxisSummary, PathPoints};

/// Outcome of a `simulate` run.
#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub truth_path: PathBuf,
    pub detections_path: PathBuf,
    pub track_count: usize,
    pub steps: usize,
    pub measurement_count: usize,
}

/// Generates the benchmark scenario under the configured seed and model
/// parameters and writes `truth.csv` and `detections.csv`.
pub fn simulate(config: &RunConfig) -> Result<SimulateSummary> {
    let mut spec = benchmark_scenario(config.seed);
    spec.motion = config.model;
    spec.p_d = config.p_d;
    let (truth, frames) = generate(&spec)?;

    std::fs::create_dir_all(&config.out_dir)?;
    let truth_path = config.out_dir.join("truth.csv");
    let detections_path = config.out_dir.join("detections.csv");
    csv::write_track_points(&truth_path, &truth_to_points(&truth))?;
    csv::write_detections(&detections_path, &frames)?;

    Ok(SimulateSummary {
        truth_path,
        detections_path,
        track_count: spec.tracks.len(),
        steps: spec.duration,
        measurement_count: frames.iter().map(|f| f.measurements.len()).sum(),
    })
}

/// Ground truth as `truth.csv` rows, ordered by time then track id.
pub fn truth_to_points(truth: &GroundTruth) -> Vec<TrackPoint> {
    let mut points = Vec::new();
    for (t, alive) in truth.steps.iter().enumerate() {
        for (k, x) in alive {
            points.push(TrackPoint {
                track_id: *k,
                time_index: t,
                p_x: x[0],
                v_x: x[1],
                p_y: x[2],
                v_y: x[3],
                weight: 1.0,
            });
        }
    }
    points
}

/// Filter output for one frame.
#[derive(Debug, Clone)]
pub struct StepEstimate {
    pub time_index: usize,
    pub map_count: usize,
    pub expected_count: f64,
    /// Extracted states with their component weights.
    pub states: Vec<(DVector<f64>, f64)>,
    pub shortfall: usize,
    /// `|intensity mass - expected count|` after the update.
    pub consistency_gap: f64,
}

/// In-memory result of running the filter over a frame sequence.
#[derive(Debug, Clone)]
pub struct TrackRun {
    pub steps: Vec<StepEstimate>,
}

impl TrackRun {
    /// Per-step extracted positions `(p_x, p_y)`.
    pub fn position_sets(&self) -> Vec<Vec<DVector<f64>>> {
        self.steps
            .iter()
            .map(|s| {
                s.states
                    .iter()
                    .map(|(x, _)| DVector::from_row_slice(&[x[0], x[2]]))
                    .collect()
            })
            .collect()
    }

    pub fn map_counts(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.map_count).collect()
    }
}

/// Builds the filter described by `config` (constant-velocity motion,
/// position measurements, quadrant birth model).
pub fn build_filter(config: &RunConfig) -> Result<CphdFilter> {
    CphdFilter::new(
        config.model.motion_model(config.p_s)?,
        config.model.measurement_model(config.p_d)?,
        quadrant_birth_model(config.filter.max_cardinality),
        config.filter,
    )
}

/// Runs one predict-update cycle per frame and extracts states. Frames
/// must be indexed 0..n with no gaps (empty frames included).
pub fn run_filter(frames: &[DetectionFrame], config: &RunConfig) -> Result<TrackRun> {
    let filter = build_filter(config)?;
    let mut state = filter.init(None);
    let mut steps = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        if frame.time_index != i {
            return Err(Error::InvalidParameter(format!(
                "frame sequence must be gapless: expected time {i}, got {}",
                frame.time_index
            )));
        }
        state = filter.step(&state, &frame.measurements)?;
        let extraction = state.extract();
        steps.push(StepEstimate {
            time_index: frame.time_index,
            map_count: state.map_count(),
            expected_count: state.expected_count(),
            states: extraction.states,
            shortfall: extraction.shortfall,
            consistency_gap: state.consistency_gap(),
        });
    }
    Ok(TrackRun { steps })
}

/// Outcome of a `track` run.
#[derive(Debug, Clone)]
pub struct TrackSummary {
    pub tracks_path: PathBuf,
    pub cardinality_path: PathBuf,
    pub steps: usize,
    pub linked_track_count: usize,
    pub point_count: usize,
    pub max_consistency_gap: f64,
    /// Steps where `|intensity mass - expected count|` exceeded 0.5.
    pub gap_warnings: usize,
}

/// Reads a detections file, runs the filter, links the extractions into
/// labeled tracks, and writes `tracks.csv` and `cardinality.csv`.
pub fn track(detections_path: &Path, config: &RunConfig) -> Result<TrackSummary> {
    let frames = csv::read_detections(detections_path)?;
    let run = run_filter(&frames, config)?;
    let points = linked_track_points(&run, config.link_gate);

    std::fs::create_dir_all(&config.out_dir)?;
    let tracks_path = config.out_dir.join("tracks.csv");
    let cardinality_path = config.out_dir.join("cardinality.csv");
    csv::write_track_points(&tracks_path, &points)?;
    let card_rows: Vec<(usize, usize, f64)> = run
        .steps
        .iter()
        .map(|s| (s.time_index, s.map_count, s.expected_count))
        .collect();
    csv::write_cardinality(&cardinality_path, &card_rows)?;

    let max_gap = run
        .steps
        .iter()
        .map(|s| s.consistency_gap)
        .fold(0.0, f64::max);
    let track_count = points
        .iter()
        .map(|p| p.track_id)
        .collect::<std::collections::HashSet<_>>()
        .len();
    Ok(TrackSummary {
        tracks_path,
        cardinality_path,
        steps: run.steps.len(),
        linked_track_count: track_count,
        point_count: points.len(),
        max_consistency_gap: max_gap,
        gap_warnings: run.steps.iter().filter(|s| s.consistency_gap > 0.5).count(),
    })
}

/// Links a filter run into labeled `tracks.csv` rows, time-major order.
pub fn linked_track_points(run: &TrackRun, gate: f64) -> Vec<TrackPoint> {
    let extraction_states: Vec<Vec<DVector<f64>>> = run
        .steps
        .iter()
        .map(|s| s.states.iter().map(|(x, _)| x.clone()).collect())
        .collect();
    let tracks = link_tracks(&extraction_states, gate);
    let mut points = Vec::new();
    for track in &tracks {
        for (t, x) in &track.points {
            let weight = run.steps[*t]
                .states
                .iter()
                .find(|(s, _)| s == x)
                .map(|(_, w)| *w)
                .unwrap_or(1.0);
            points.push(TrackPoint {
                track_id: track.id,
                time_index: *t,
                p_x: x[0],
                v_x: x[1],
                p_y: x[2],
                v_y: x[3],
                weight,
            });
        }
    }
    points.sort_by_key(|p| (p.time_index, p.track_id));
    points
}

/// Outcome of an `evaluate` run.
#[derive(Debug, Clone)]
pub struct EvaluateSummary {
    pub ospa_path: PathBuf,
    pub first_step: usize,
    pub steps: usize,
    pub cutoff: f64,
    pub order: f64,
    pub mean: OspaResult,
    pub max: OspaResult,
}

fn position_sets_by_step(
    points: &[TrackPoint],
    range: std::ops::RangeInclusive<usize>,
) -> Vec<Vec<DVector<f64>>> {
    range
        .map(|t| {
            points
                .iter()
                .filter(|p| p.time_index == t)
                .map(|p| DVector::from_row_slice(&[p.p_x, p.p_y]))
                .collect()
        })
        .collect()
}

/// Compares a tracks file against a truth file with the OSPA metric over
/// the overlapping time range and writes `ospa.csv`. The written values
/// are quantized to the file precision first, so the summary statistics
/// agree exactly with column statistics of the file.
pub fn evaluate(
    truth_path: &Path,
    tracks_path: &Path,
    config: &RunConfig,
) -> Result<EvaluateSummary> {
    let truth = csv::read_track_points(truth_path)?;
    let tracks = csv::read_track_points(tracks_path)?;
    let span = |pts: &[TrackPoint], path: &Path| -> Result<(usize, usize)> {
        let min = pts.iter().map(|p| p.time_index).min();
        let max = pts.iter().map(|p| p.time_index).max();
        min.zip(max).ok_or_else(|| Error::Data {
            path: path.display().to_string(),
            message: "file contains no rows".into(),
        })
    };
    let (truth_min, truth_max) = span(&truth, truth_path)?;
    let (tracks_min, tracks_max) = span(&tracks, tracks_path)?;
    let start = truth_min.max(tracks_min);
    let end = truth_max.min(tracks_max);
    if start > end {
        return Err(Error::Data {
            path: tracks_path.display().to_string(),
            message: format!(
                "time ranges are disjoint: truth covers {truth_min}..={truth_max}, tracks {tracks_min}..={tracks_max}"
            ),
        });
    }

    let truth_sets = position_sets_by_step(&truth, start..=end);
    let track_sets = position_sets_by_step(&tracks, start..=end);
    let results: Vec<(usize, OspaResult)> = ospa_series(&truth_sets, &track_sets, &config.ospa)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            (
                start + i,
                OspaResult {
                    total: csv::quantize(r.total),
                    localization: csv::quantize(r.localization),
                    cardinality: csv::quantize(r.cardinality),
                },
            )
        })
        .collect();

    std::fs::create_dir_all(&config.out_dir)?;
    let ospa_path = config.out_dir.join("ospa.csv");
    csv::write_ospa(&ospa_path, &results)?;

    let n = results.len() as f64;
    let mean = OspaResult {
        total: results.iter().map(|(_, r)| r.total).sum::<f64>() / n,
        localization: results.iter().map(|(_, r)| r.localization).sum::<f64>() / n,
        cardinality: results.iter().map(|(_, r)| r.cardinality).sum::<f64>() / n,
    };
    let max = OspaResult {
        total: results.iter().map(|(_, r)| r.total).fold(0.0, f64::max),
        localization: results
            .iter()
            .map(|(_, r)| r.localization)
            .fold(0.0, f64::max),
        cardinality: results
            .iter()
            .map(|(_, r)| r.cardinality)
            .fold(0.0, f64::max),
    };
    Ok(EvaluateSummary {
        ospa_path,
        first_step: start,
        steps: results.len(),
        cutoff: config.ospa.cutoff,
        order: config.ospa.order,
        mean,
        max,
    })
}

/// Outcome of an `analyze` run.
#[derive(Debug, Clone)]
pub struct AnalyzeSummary {
    pub accelerations_path: PathBuf,
    pub quantiles_path: PathBuf,
    pub analysis: AccelerationAnalysis,
    pub tracks_used: usize,
}

impl AnalyzeSummary {
    /// Human-readable report, one line per item.
    pub fn report_lines(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "samples: m={} (tracks used: {}, skipped: {})",
            self.analysis.samples.len(),
            self.tracks_used,
            self.analysis.skipped_tracks.len()
        )];
        lines.push(axis_line("x", &self.analysis.x));
        lines.push(axis_line("y", &self.analysis.y));
        lines.push(
            "note: p-values use the asymptotic Kolmogorov distribution; mean and sigma are \
             estimated from the sample, which makes the test conservative"
                .into(),
        );
        lines
    }
}

fn axis_line(axis: &str, s: &AxisSummary) -> String {
    match s.ks {
        Some(ks) => format!(
            "{axis}-axis: mu={:.4}, sigma={:.4}, ks={:.4}, p={:.4}, H0 {} (alpha=0.05)",
            s.mean,
            s.sd,
            ks.statistic,
            ks.p_value,
            if ks.p_value >= 0.05 {
                "accepted"
            } else {
                "rejected"
            }
        ),
        None => format!(
            "{axis}-axis: mu={:.4}, sigma={:.4}, zero-variance sample, test skipped",
            s.mean, s.sd
        ),
    }
}

/// Reads a tracks file, double-differences positions into accelerations,
/// tests normality per axis, and writes `accelerations.csv` plus
/// normal-quantile plot data.
pub fn analyze(tracks_path: &Path, config: &RunConfig) -> Result<AnalyzeSummary> {
    let points = csv::read_track_points(tracks_path)?;
    let mut by_track: std::collections::BTreeMap<usize, Vec<(usize, f64, f64)>> =
        std::collections::BTreeMap::new();
    for p in &points {
        by_track
            .entry(p.track_id)
            .or_default()
            .push((p.time_index, p.p_x, p.p_y));
    }
    let paths: Vec<PathPoints> = by_track
        .into_iter()
        .map(|(id, mut pts)| {
            pts.sort_by_key(|&(t, _, _)| t);
            PathPoints { id, points: pts }
        })
        .collect();
    let analysis = analyze_accelerations(&paths, config.model.dt)?;

    std::fs::create_dir_all(&config.out_dir)?;
    let accelerations_path = config.out_dir.join("accelerations.csv");
    let quantiles_path = config.out_dir.join("normal_quantiles.csv");
    csv::write_accelerations(&accelerations_path, &analysis.samples)?;
    csv::write_quantiles(&quantiles_path, &analysis.quantiles)?;

    let tracks_used = paths.len() - analysis.skipped_tracks.len();
    Ok(AnalyzeSummary {
        accelerations_path,
        quantiles_path,
        analysis,
        tracks_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn temp_config() -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            out_dir: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        (dir, config)
    }

    #[test]
    fn simulate_track_evaluate_roundtrip() {
        let (_dir, config) = temp_config();
        let sim = simulate(&config).unwrap();
        assert_eq!(sim.track_count, 12);
        assert_eq!(sim.steps, 100);
        assert!(sim.measurement_count > 300);

        let tracked = track(&sim.detections_path, &config).unwrap();
        assert_eq!(tracked.steps, 100);
        assert!(tracked.linked_track_count >= 12);
        assert_eq!(tracked.gap_warnings, 0, "mass/cardinality gaps detected");

        let eval = evaluate(&sim.truth_path, &tracked.tracks_path, &config).unwrap();
        assert_eq!(eval.steps, 100);
        assert!(eval.mean.total < 10.0, "mean OSPA {}", eval.mean.total);

        // Summary statistics must equal column statistics of the file.
        let rows = csv::read_ospa(&eval.ospa_path).unwrap();
        let col_mean: f64 = rows.iter().map(|(_, r)| r.total).sum::<f64>() / rows.len() as f64;
        assert_relative_eq!(eval.mean.total, col_mean, epsilon = 1e-12);
    }

    #[test]
    fn evaluate_of_truth_against_itself_is_zero() {
        let (_dir, config) = temp_config();
        let sim = simulate(&config).unwrap();
        let eval = evaluate(&sim.truth_path, &sim.truth_path, &config).unwrap();
        assert_eq!(eval.mean.total, 0.0);
        assert_eq!(eval.max.total, 0.0);
    }

    #[test]
    fn evaluate_rejects_disjoint_ranges() {
        let (_dir, config) = temp_config();
        let a = config.out_dir.join("a.csv");
        let b = config.out_dir.join("b.csv");
        let point = |t: usize| TrackPoint {
            track_id: 0,
            time_index: t,
            p_x: 0.0,
            v_x: 0.0,
            p_y: 0.0,
            v_y: 0.0,
            weight: 1.0,
        };
        csv::write_track_points(&a, &[point(0), point(1)]).unwrap();
        csv::write_track_points(&b, &[point(5)]).unwrap();
        match evaluate(&a, &b, &config) {
            Err(Error::Data { message, .. }) => assert!(message.contains("disjoint")),
            other => panic!("expected disjoint-range error, got {other:?}"),
        }
    }

    #[test]
    fn analyze_reports_in_expected_format() {
        let (_dir, config) = temp_config();
        let sim = simulate(&config).unwrap();
        let summary = analyze(&sim.truth_path, &config).unwrap();
        let lines = summary.report_lines();
        assert!(lines[0].starts_with("samples: m="));
        assert!(lines[1].contains("mu=") && lines[1].contains("sigma="));
        assert!(lines[1].contains("H0"));
        assert!(summary.accelerations_path.exists());
        assert!(summary.quantiles_path.exists());
    }

    #[test]
    fn run_filter_requires_gapless_frames() {
        let config = RunConfig::default();
        let frames = vec![DetectionFrame {
            time_index: 3,
            measurements: vec![],
        }];
        assert!(run_filter(&frames, &config).is_err());
    }
}
