//! Flat `key = value` run configuration.
//!
//! Recognized keys (all optional; defaults in parentheses):
//!
//! | key               | meaning                                   | default |
//! |-------------------|-------------------------------------------|---------|
//! | `delta`           | sampling interval, s                      | 1.0     |
//! | `sigma_x`         | x acceleration noise sd, um/s^2           | 2.33    |
//! | `sigma_y`         | y acceleration noise sd, um/s^2           | 2.33    |
//! | `sigma_o`         | measurement noise sd, um                  | 0.2     |
//! | `p_s`             | survival probability                      | 0.99    |
//! | `p_d`             | detection probability                     | 0.98    |
//! | `prune_threshold` | mixture pruning weight threshold          | 1e-5    |
//! | `merge_threshold` | squared-Mahalanobis merge radius          | 0.004   |
//! | `max_components`  | mixture component cap                     | 200     |
//! | `max_cardinality` | cardinality support cap                   | 64      |
//! | `ospa_cutoff`     | OSPA cutoff c, um                         | 30      |
//! | `ospa_order`      | OSPA order l (number or `inf`)            | 1       |
//! | `link_gate`       | track-linking gate, um                    | 7.6     |
//! | `seed`            | random seed                               | 0       |
//! | `out_dir`         | output directory                          | `.`     |
//!
//! Lines starting with `#` and blank lines are ignored. Unknown or
//! duplicated keys are errors.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::cphd::FilterConfig;
use crate::error::{Error, Result};
use crate::link::default_gate;
use crate::models::CvModelParams;
use crate::ospa::OspaParams;

/// Everything a run needs: model parameters, filter thresholds, metric
/// parameters, linking gate, seed and output directory.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: CvModelParams,
    pub p_s: f64,
    pub p_d: f64,
    pub filter: FilterConfig,
    pub ospa: OspaParams,
    pub link_gate: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: CvModelParams::default(),
            p_s: 0.99,
            p_d: 0.98,
            filter: FilterConfig::default(),
            ospa: OspaParams::default(),
            link_gate: default_gate(0.2, 7.0, 1.0),
            seed: 0,
            out_dir: PathBuf::from("."),
        }
    }
}

/// Parses an OSPA order: a number `>= 1` or `inf`/`infinity`.
pub fn parse_order(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim().to_ascii_lowercase();
    if t == "inf" || t == "infinity" {
        return Ok(f64::INFINITY);
    }
    let v: f64 = t
        .parse()
        .map_err(|_| format!("expected a number or 'inf', got '{text}'"))?;
    if v >= 1.0 {
        Ok(v)
    } else {
        Err(format!("order must be at least 1, got {v}"))
    }
}

impl RunConfig {
    /// Loads a config file over the defaults. Fails loudly: unknown keys,
    /// duplicates and unparsable or out-of-range values are all errors
    /// carrying the offending line number.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        let path_str = path.display().to_string();
        let mut seen: HashSet<String> = HashSet::new();

        let err = |line: usize, message: String| Error::Config {
            path: path_str.clone(),
            line,
            message,
        };

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected 'key = value', got '{raw}'")))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(err(line_no, format!("duplicate key '{key}'")));
            }

            let parse_f64 = |field: &str| -> Result<f64> {
                value.parse::<f64>().map_err(|_| {
                    err(
                        line_no,
                        format!("field '{field}': expected a number, got '{value}'"),
                    )
                })
            };
            let parse_usize = |field: &str| -> Result<usize> {
                value.parse::<usize>().map_err(|_| {
                    err(
                        line_no,
                        format!("field '{field}': expected a nonnegative integer, got '{value}'"),
                    )
                })
            };
            let positive = |field: &str, v: f64| -> Result<f64> {
                if v > 0.0 && v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(
                        line_no,
                        format!("field '{field}': must be positive, got {v}"),
                    ))
                }
            };
            let probability = |field: &str, v: f64| -> Result<f64> {
                if (0.0..=1.0).contains(&v) {
                    Ok(v)
                } else {
                    Err(err(
                        line_no,
                        format!("field '{field}': must lie in [0, 1], got {v}"),
                    ))
                }
            };

            match key {
                "delta" => cfg.model.dt = positive(key, parse_f64(key)?)?,
                "sigma_x" => cfg.model.sigma_x = positive(key, parse_f64(key)?)?,
                "sigma_y" => cfg.model.sigma_y = positive(key, parse_f64(key)?)?,
                "sigma_o" => cfg.model.sigma_o = positive(key, parse_f64(key)?)?,
                "p_s" => cfg.p_s = probability(key, parse_f64(key)?)?,
                "p_d" => cfg.p_d = probability(key, parse_f64(key)?)?,
                "prune_threshold" => {
                    let v = parse_f64(key)?;
                    if v < 0.0 {
                        return Err(err(line_no, format!("field '{key}': must be nonnegative")));
                    }
                    cfg.filter.prune_threshold = v;
                }
                "merge_threshold" => cfg.filter.merge_threshold = positive(key, parse_f64(key)?)?,
                "max_components" => {
                    let v = parse_usize(key)?;
                    if v == 0 {
                        return Err(err(line_no, format!("field '{key}': must be at least 1")));
                    }
                    cfg.filter.max_components = v;
                }
                "max_cardinality" => {
                    let v = parse_usize(key)?;
                    if v == 0 {
                        return Err(err(line_no, format!("field '{key}': must be at least 1")));
                    }
                    cfg.filter.max_cardinality = v;
                }
                "ospa_cutoff" => cfg.ospa.cutoff = positive(key, parse_f64(key)?)?,
                "ospa_order" => {
                    cfg.ospa.order = parse_order(value)
                        .map_err(|m| err(line_no, format!("field '{key}': {m}")))?
                }
                "link_gate" => cfg.link_gate = positive(key, parse_f64(key)?)?,
                "seed" => {
                    cfg.seed = value.parse::<u64>().map_err(|_| {
                        err(
                            line_no,
                            format!("field '{key}': expected an integer, got '{value}'"),
                        )
                    })?
                }
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                other => {
                    return Err(err(line_no, format!("unknown key '{other}'")));
                }
            }
        }
        Ok(cfg)
    }
}
