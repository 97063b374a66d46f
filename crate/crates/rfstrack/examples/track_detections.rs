//! Full tracking run: simulate detections, run the filter, link tracks.
//!
//! Prints the estimated object count against the truth for every step; the
//! estimate should follow births and deaths within a step or two and drop
//! to zero over the scheduled empty interval.

use rfstrack::pipeline::{simulate, track};
use rfstrack::{benchmark_scenario, generate, RunConfig};

fn main() -> rfstrack::Result<()> {
    let out_dir = std::env::temp_dir().join("rfstrack_examples/track");
    let config = RunConfig {
        seed: 3,
        out_dir,
        ..RunConfig::default()
    };

    let sim = simulate(&config)?;
    let started = std::time::Instant::now();
    let summary = track(&sim.detections_path, &config)?;
    let elapsed = started.elapsed().as_secs_f64();

    let (truth, _) = generate(&benchmark_scenario(config.seed))?;
    let true_counts = truth.cardinality_series();
    let card = rfstrack::io::csv::read_cardinality(&summary.cardinality_path)?;

    println!("step: truth vs MAP estimate");
    let mut matches = 0;
    for (step, map_n, expected) in &card {
        let truth_n = true_counts[*step];
        let mark = if *map_n == truth_n { ' ' } else { '*' };
        if step % 4 == 0 || *map_n != truth_n {
            println!("  {step:3}: {truth_n:2} vs {map_n:2} (E[n] = {expected:5.2}) {mark}");
        }
        if *map_n == truth_n {
            matches += 1;
        }
    }
    println!(
        "\ncount matched at {}/{} steps; {} linked tracks; run took {elapsed:.2} s",
        matches,
        card.len(),
        summary.linked_track_count
    );
    println!("tracks      -> {}", summary.tracks_path.display());
    println!("cardinality -> {}", summary.cardinality_path.display());
    Ok(())
}
