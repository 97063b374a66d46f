//! The OSPA set metric, standalone and on a full tracking run.

use nalgebra::DVector;
use rfstrack::pipeline::{evaluate, simulate, track};
use rfstrack::{ospa, OspaParams, RunConfig};

fn v2(x: f64, y: f64) -> DVector<f64> {
    DVector::from_row_slice(&[x, y])
}

fn main() -> rfstrack::Result<()> {
    let params = OspaParams::default(); // c = 30, l = 1
    println!(
        "standalone examples (c = {}, l = {}):",
        params.cutoff, params.order
    );

    type Case = (&'static str, Vec<DVector<f64>>, Vec<DVector<f64>>);
    let cases: [Case; 4] = [
        ("identical sets", vec![v2(1.0, 1.0)], vec![v2(1.0, 1.0)]),
        ("small offset", vec![v2(1.0, 1.0)], vec![v2(1.3, 0.6)]),
        (
            "missed object",
            vec![v2(1.0, 1.0)],
            vec![v2(1.0, 1.0), v2(9.0, 9.0)],
        ),
        (
            "everything wrong",
            vec![v2(-50.0, 0.0)],
            vec![v2(50.0, 0.0), v2(60.0, 0.0)],
        ),
    ];
    for (name, xs, ys) in &cases {
        let r = ospa(xs, ys, &params)?;
        println!(
            "  {name:18} total {:6.3} = localization {:6.3} + cardinality {:6.3}",
            r.total, r.localization, r.cardinality
        );
    }

    let out_dir = std::env::temp_dir().join("rfstrack_examples/evaluate");
    let config = RunConfig {
        seed: 11,
        out_dir,
        ..RunConfig::default()
    };
    let sim = simulate(&config)?;
    let tracked = track(&sim.detections_path, &config)?;
    let summary = evaluate(&sim.truth_path, &tracked.tracks_path, &config)?;
    println!("\nfull benchmark run (seed {}):", config.seed);
    println!(
        "  mean total {:.3} (localization {:.3}, cardinality {:.3})",
        summary.mean.total, summary.mean.localization, summary.mean.cardinality
    );
    println!(
        "  max total {:.3}; per-step series -> {}",
        summary.max.total,
        summary.ospa_path.display()
    );
    Ok(())
}
