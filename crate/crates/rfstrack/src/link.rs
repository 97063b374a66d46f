//! Greedy nearest-neighbor linking of per-step state estimates into
//! labeled tracks.
//!
//! The filter itself is label-free; linking is a post-processing step.
//! Estimates are associated frame to frame in position space. Labels can
//! swap when paths cross; that is an accepted limitation of
//! nearest-neighbor linking.

use nalgebra::DVector;

/// One labeled trajectory: `(time_index, state)` points in time order.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: usize,
    pub points: Vec<(usize, DVector<f64>)>,
}

/// Planar position of a state vector laid out `[p_x, v_x, p_y, v_y]`
/// (or `[p_x, p_y]` when only positions are carried).
fn position(state: &DVector<f64>) -> (f64, f64) {
    if state.len() >= 4 {
        (state[0], state[2])
    } else {
        (state[0], state[1])
    }
}

/// Where a state should sit one frame later: position advanced by the
/// carried velocity when there is one, so the gate measures innovation
/// rather than raw displacement and stays valid for fast movers.
fn forecast(state: &DVector<f64>) -> (f64, f64) {
    if state.len() >= 4 {
        (state[0] + state[1], state[2] + state[3])
    } else {
        (state[0], state[1])
    }
}

/// Links time-indexed extraction lists into tracks.
///
/// Consecutive frames are associated greedily by ascending position
/// distance, accepting pairs within `gate` (micrometers). A new estimate
/// matches a track through whichever is closer of the track's last
/// position and its velocity forecast, so fast movers stay linked without
/// losing robustness to a bad velocity estimate. Estimates left unmatched
/// start new tracks; tracks unmatched for one step are terminated.
/// Deterministic: ties break on track id, then estimate index.
pub fn link_tracks(extractions: &[Vec<DVector<f64>>], gate: f64) -> Vec<Track> {
    let mut tracks: Vec<Track> = Vec::new();
    // Track ids still alive after the previous frame, with their last and
    // forecast positions.
    type ActiveTrack = (usize, (f64, f64), (f64, f64));
    let mut active: Vec<ActiveTrack> = Vec::new();

    for (t, estimates) in extractions.iter().enumerate() {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ai, &(_, last, expected)) in active.iter().enumerate() {
            for (ei, est) in estimates.iter().enumerate() {
                let p = position(est);
                let d_last = ((p.0 - last.0).powi(2) + (p.1 - last.1).powi(2)).sqrt();
                let d_fore = ((p.0 - expected.0).powi(2) + (p.1 - expected.1).powi(2)).sqrt();
                let d = d_last.min(d_fore);
                if d <= gate {
                    pairs.push((d, ai, ei));
                }
            }
        }
        pairs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(active[a.1].0.cmp(&active[b.1].0))
                .then(a.2.cmp(&b.2))
        });

        let mut taken_active = vec![false; active.len()];
        let mut taken_est = vec![false; estimates.len()];
        let mut next_active: Vec<ActiveTrack> = Vec::new();
        for (_, ai, ei) in pairs {
            if taken_active[ai] || taken_est[ei] {
                continue;
            }
            taken_active[ai] = true;
            taken_est[ei] = true;
            let track_id = active[ai].0;
            tracks[track_id].points.push((t, estimates[ei].clone()));
            next_active.push((track_id, position(&estimates[ei]), forecast(&estimates[ei])));
        }
        for (ei, est) in estimates.iter().enumerate() {
            if taken_est[ei] {
                continue;
            }
            let id = tracks.len();
            tracks.push(Track {
                id,
                points: vec![(t, est.clone())],
            });
            next_active.push((id, position(est), forecast(est)));
        }
        next_active.sort_by_key(|&(id, _, _)| id);
        active = next_active;
    }
    tracks
}

/// Default association gate for the planar configuration: three
/// measurement sigmas plus the largest plausible per-step displacement.
pub fn default_gate(sigma_o: f64, max_speed: f64, dt: f64) -> f64 {
    3.0 * sigma_o + max_speed * dt
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(px: f64, py: f64) -> DVector<f64> {
        DVector::from_row_slice(&[px, 0.0, py, 0.0])
    }

    #[test]
    fn single_object_yields_single_track() {
        let frames: Vec<Vec<DVector<f64>>> = (0..10).map(|t| vec![state(t as f64, 0.0)]).collect();
        let tracks = link_tracks(&frames, 7.6);
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].points.len(), 10);
    }

    #[test]
    fn distant_parallel_objects_keep_labels() {
        let frames: Vec<Vec<DVector<f64>>> = (0..10)
            .map(|t| vec![state(t as f64, 0.0), state(t as f64, 100.0)])
            .collect();
        let tracks = link_tracks(&frames, 7.6);
        assert_eq!(tracks.len(), 2);
        for track in &tracks {
            assert_eq!(track.points.len(), 10);
            let y0 = track.points[0].1[2];
            assert!(track.points.iter().all(|(_, s)| s[2] == y0));
        }
    }

    #[test]
    fn crossing_objects_stay_two_tracks() {
        // Paths cross in y at t = 5; labels may swap, but the number of
        // tracks must remain two with no fragmentation.
        let frames: Vec<Vec<DVector<f64>>> = (0..11)
            .map(|t| {
                let t = t as f64;
                vec![state(t, t), state(t, 10.0 - t)]
            })
            .collect();
        let tracks = link_tracks(&frames, 7.6);
        assert_eq!(tracks.len(), 2);
        let total_points: usize = tracks.iter().map(|t| t.points.len()).sum();
        assert_eq!(total_points, 22);
    }

    #[test]
    fn gap_terminates_track() {
        let mut frames: Vec<Vec<DVector<f64>>> =
            (0..4).map(|t| vec![state(t as f64, 0.0)]).collect();
        frames.push(vec![]);
        frames.push(vec![state(5.0, 0.0)]);
        let tracks = link_tracks(&frames, 7.6);
        assert_eq!(tracks.len(), 2);
    }

    #[test]
    fn default_gate_matches_planar_configuration() {
        assert!((default_gate(0.2, 7.0, 1.0) - 7.6).abs() < 1e-12);
    }
}
