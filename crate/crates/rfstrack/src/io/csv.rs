//! CSV schemas shared by the CLI, the library and downstream tooling.
//!
//! All files are plain comma-separated ASCII with one header line and no
//! quoting. Floating-point fields are written in scientific notation with
//! nine significant digits (`{:.8e}`), which makes write -> read -> write
//! byte-stable.
//!
//! * `detections.csv` — `time_index,p_x_um,p_y_um`; a frame with zero
//!   detections appears as a single row with both coordinate fields empty,
//!   so the frame sequence is gapless.
//! * `truth.csv`, `tracks.csv` —
//!   `track_id,time_index,p_x_um,v_x_um_s,p_y_um,v_y_um_s`.
//! * `cardinality.csv` — `step,map_n,expected_n`.
//! * `ospa.csv` — `step,total,localization,cardinality_err`.
//! * `accelerations.csv` — `track_id,time_index,a_x_um_s2,a_y_um_s2`.
//! * `normal_quantiles.csv` — `axis,theoretical,sample`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ospa::OspaResult;
use crate::sim::DetectionFrame;
use crate::stats::{AccelSample, QuantilePoint};

pub const DETECTIONS_HEADER: &str = "time_index,p_x_um,p_y_um";
pub const TRACKS_HEADER: &str = "track_id,time_index,p_x_um,v_x_um_s,p_y_um,v_y_um_s";
pub const CARDINALITY_HEADER: &str = "step,map_n,expected_n";
pub const OSPA_HEADER: &str = "step,total,localization,cardinality_err";
pub const ACCELERATIONS_HEADER: &str = "track_id,time_index,a_x_um_s2,a_y_um_s2";
pub const QUANTILES_HEADER: &str = "axis,theoretical,sample";

/// One row of `truth.csv` or `tracks.csv`. The weight is an in-memory
/// diagnostic (extraction weight); it is not persisted, and reads set it
/// to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    pub track_id: usize,
    pub time_index: usize,
    pub p_x: f64,
    pub v_x: f64,
    pub p_y: f64,
    pub v_y: f64,
    pub weight: f64,
}

/// Nine-significant-digit float formatting used for every CSV field.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.8e}")
}

/// The value a float field will hold after one write-read cycle.
pub fn quantize(v: f64) -> f64 {
    fmt_f64(v).parse().expect("formatted float reparses")
}

/// Writes via a temporary file in the same directory, then renames.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn data_err(path: &Path, message: String) -> Error {
    Error::Data {
        path: path.display().to_string(),
        message,
    }
}

fn read_lines(path: &Path, expected_header: &str) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == expected_header => {}
        Some((_, header)) => {
            return Err(data_err(
                path,
                format!("expected header '{expected_header}', got '{header}'"),
            ))
        }
        None => return Err(data_err(path, "file is empty".into())),
    }
    Ok(lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect())
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    field: &str,
    value: &str,
) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| {
        data_err(
            path,
            format!("line {line}: field '{field}': cannot parse '{value}'"),
        )
    })
}

pub fn write_detections(path: &Path, frames: &[DetectionFrame]) -> Result<()> {
    let mut out = String::from(DETECTIONS_HEADER);
    out.push('\n');
    for frame in frames {
        if frame.measurements.is_empty() {
            let _ = writeln!(out, "{},,", frame.time_index);
        } else {
            for z in &frame.measurements {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    frame.time_index,
                    fmt_f64(z[0]),
                    fmt_f64(z[1])
                );
            }
        }
    }
    atomic_write(path, &out)
}

/// Reads a detections file, enforcing sorted, gapless frame indices
/// starting at 0. Offending frames are listed in the error.
pub fn read_detections(path: &Path) -> Result<Vec<DetectionFrame>> {
    let rows = read_lines(path, DETECTIONS_HEADER)?;
    let mut frames: Vec<DetectionFrame> = Vec::new();
    let mut sentinel_frames: Vec<usize> = Vec::new();
    let mut order_violations: Vec<usize> = Vec::new();

    for (line, row) in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(data_err(
                path,
                format!("line {line}: expected 3 fields, got {}", fields.len()),
            ));
        }
        let t: usize = parse_field(path, *line, "time_index", fields[0])?;
        let is_sentinel = fields[1].trim().is_empty() && fields[2].trim().is_empty();

        match frames.last().map(|f| f.time_index) {
            Some(last) if t == last => {}
            Some(last) if t < last => order_violations.push(t),
            _ => frames.push(DetectionFrame {
                time_index: t,
                measurements: Vec::new(),
            }),
        }

        if is_sentinel {
            sentinel_frames.push(t);
            continue;
        }
        let px: f64 = parse_field(path, *line, "p_x_um", fields[1])?;
        let py: f64 = parse_field(path, *line, "p_y_um", fields[2])?;
        if let Some(frame) = frames.iter_mut().rev().find(|f| f.time_index == t) {
            frame.measurements.push(DVector::from_row_slice(&[px, py]));
        }
    }

    if !order_violations.is_empty() {
        return Err(data_err(
            path,
            format!("unsorted time indices at frames {order_violations:?}"),
        ));
    }
    for t in &sentinel_frames {
        if let Some(frame) = frames.iter().find(|f| f.time_index == *t) {
            if !frame.measurements.is_empty() {
                return Err(data_err(
                    path,
                    format!("frame {t} mixes an empty-frame sentinel with measurements"),
                ));
            }
        }
    }
    let gaps: Vec<usize> = frames
        .iter()
        .enumerate()
        .filter(|(i, f)| f.time_index != *i)
        .map(|(_, f)| f.time_index)
        .collect();
    if !gaps.is_empty() {
        return Err(data_err(
            path,
            format!(
                "frame sequence must be gapless from 0 (empty frames need sentinel rows); first offending frames: {:?}",
                &gaps[..gaps.len().min(10)]
            ),
        ));
    }
    Ok(frames)
}

pub fn write_track_points(path: &Path, points: &[TrackPoint]) -> Result<()> {
    let mut out = String::from(TRACKS_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.track_id,
            p.time_index,
            fmt_f64(p.p_x),
            fmt_f64(p.v_x),
            fmt_f64(p.p_y),
            fmt_f64(p.v_y)
        );
    }
    atomic_write(path, &out)
}

pub fn read_track_points(path: &Path) -> Result<Vec<TrackPoint>> {
    let rows = read_lines(path, TRACKS_HEADER)?;
    let mut points = Vec::with_capacity(rows.len());
    for (line, row) in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 6 {
            return Err(data_err(
                path,
                format!("line {line}: expected 6 fields, got {}", fields.len()),
            ));
        }
        points.push(TrackPoint {
            track_id: parse_field(path, *line, "track_id", fields[0])?,
            time_index: parse_field(path, *line, "time_index", fields[1])?,
            p_x: parse_field(path, *line, "p_x_um", fields[2])?,
            v_x: parse_field(path, *line, "v_x_um_s", fields[3])?,
            p_y: parse_field(path, *line, "p_y_um", fields[4])?,
            v_y: parse_field(path, *line, "v_y_um_s", fields[5])?,
            weight: 1.0,
        });
    }
    Ok(points)
}

pub fn write_cardinality(path: &Path, rows: &[(usize, usize, f64)]) -> Result<()> {
    let mut out = String::from(CARDINALITY_HEADER);
    out.push('\n');
    for (step, map_n, expected) in rows {
        let _ = writeln!(out, "{step},{map_n},{}", fmt_f64(*expected));
    }
    atomic_write(path, &out)
}

pub fn read_cardinality(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let rows = read_lines(path, CARDINALITY_HEADER)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, row) in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(data_err(
                path,
                format!("line {line}: expected 3 fields, got {}", fields.len()),
            ));
        }
        out.push((
            parse_field(path, *line, "step", fields[0])?,
            parse_field(path, *line, "map_n", fields[1])?,
            parse_field(path, *line, "expected_n", fields[2])?,
        ));
    }
    Ok(out)
}

pub fn write_ospa(path: &Path, rows: &[(usize, OspaResult)]) -> Result<()> {
    let mut out = String::from(OSPA_HEADER);
    out.push('\n');
    for (step, r) in rows {
        let _ = writeln!(
            out,
            "{step},{},{},{}",
            fmt_f64(r.total),
            fmt_f64(r.localization),
            fmt_f64(r.cardinality)
        );
    }
    atomic_write(path, &out)
}

pub fn read_ospa(path: &Path) -> Result<Vec<(usize, OspaResult)>> {
    let rows = read_lines(path, OSPA_HEADER)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, row) in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 4 {
            return Err(data_err(
                path,
                format!("line {line}: expected 4 fields, got {}", fields.len()),
            ));
        }
        out.push((
            parse_field(path, *line, "step", fields[0])?,
            OspaResult {
                total: parse_field(path, *line, "total", fields[1])?,
                localization: parse_field(path, *line, "localization", fields[2])?,
                cardinality: parse_field(path, *line, "cardinality_err", fields[3])?,
            },
        ));
    }
    Ok(out)
}

pub fn write_accelerations(path: &Path, samples: &[AccelSample]) -> Result<()> {
    let mut out = String::from(ACCELERATIONS_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.track_id,
            s.time_index,
            fmt_f64(s.ax),
            fmt_f64(s.ay)
        );
    }
    atomic_write(path, &out)
}

pub fn write_quantiles(path: &Path, points: &[QuantilePoint]) -> Result<()> {
    let mut out = String::from(QUANTILES_HEADER);
    out.push('\n');
    for q in points {
        let _ = writeln!(
            out,
            "{},{},{}",
            q.axis,
            fmt_f64(q.theoretical),
            fmt_f64(q.sample)
        );
    }
    atomic_write(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn detections_roundtrip_with_empty_frames() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("detections.csv");
        let frames = vec![
            DetectionFrame {
                time_index: 0,
                measurements: vec![DVector::from_row_slice(&[1.25, -3.5])],
            },
            DetectionFrame {
                time_index: 1,
                measurements: vec![],
            },
            DetectionFrame {
                time_index: 2,
                measurements: vec![
                    DVector::from_row_slice(&[0.1, 0.2]),
                    DVector::from_row_slice(&[7.0, 8.0]),
                ],
            },
        ];
        write_detections(&path, &frames).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("1,,"), "sentinel row missing:\n{text}");
        let back = read_detections(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert!(back[1].measurements.is_empty());
        assert_eq!(back[2].measurements.len(), 2);
        assert_eq!(back[0].measurements[0][0], 1.25);
    }

    #[test]
    fn detections_reject_gaps_and_disorder() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("detections.csv");
        atomic_write(&path, "time_index,p_x_um,p_y_um\n0,1.0,1.0\n2,2.0,2.0\n").unwrap();
        match read_detections(&path) {
            Err(Error::Data { message, .. }) => assert!(message.contains('2'), "{message}"),
            other => panic!("expected data error, got {other:?}"),
        }
        atomic_write(&path, "time_index,p_x_um,p_y_um\n1,1.0,1.0\n0,2.0,2.0\n").unwrap();
        match read_detections(&path) {
            Err(Error::Data { message, .. }) => assert!(message.contains("unsorted"), "{message}"),
            other => panic!("expected data error, got {other:?}"),
        }
        atomic_write(&path, "time_index,p_x_um,p_y_um\n0,,\n0,1.0,1.0\n").unwrap();
        assert!(read_detections(&path).is_err());
        atomic_write(&path, "wrong,header\n").unwrap();
        assert!(read_detections(&path).is_err());
    }

    #[test]
    fn track_points_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tracks.csv");
        let points = vec![TrackPoint {
            track_id: 3,
            time_index: 14,
            p_x: 1.0 / 3.0,
            v_x: -2.5,
            p_y: 1e-7,
            v_y: 123.456,
            weight: 1.0,
        }];
        write_track_points(&path, &points).unwrap();
        let back = read_track_points(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].track_id, 3);
        assert_eq!(back[0].time_index, 14);
        assert_eq!(back[0].p_x, quantize(1.0 / 3.0));
        assert_eq!(back[0].v_y, 123.456);
    }

    proptest! {
        #[test]
        fn float_formatting_is_write_stable(v in -1e12f64..1e12) {
            // After one quantization, further write/read cycles are exact.
            let q = quantize(v);
            prop_assert_eq!(quantize(q), q);
            prop_assert_eq!(fmt_f64(q), fmt_f64(quantize(q)));
            // Nine significant digits keep eight digits of relative accuracy.
            if v != 0.0 {
                prop_assert!(((q - v) / v).abs() < 1e-8);
            }
        }
    }
}
