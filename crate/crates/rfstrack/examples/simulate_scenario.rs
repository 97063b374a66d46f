//! Generate the 12-track benchmark scenario and write its CSV files.

use rfstrack::pipeline::simulate;
use rfstrack::{benchmark_scenario, RunConfig};

fn main() -> rfstrack::Result<()> {
    let out_dir = std::env::temp_dir().join("rfstrack_examples/simulate");
    let config = RunConfig {
        seed: 42,
        out_dir,
        ..RunConfig::default()
    };

    let spec = benchmark_scenario(config.seed);
    println!("schedule:");
    for (k, ev) in spec.tracks.iter().enumerate() {
        println!(
            "  track {k:2}: alive {:3}..{:3}, start ({:5.1}, {:5.1}) um, velocity ({:4.1}, {:4.1}) um/s",
            ev.birth_step,
            ev.death_step - 1,
            ev.initial_state[0],
            ev.initial_state[2],
            ev.initial_state[1],
            ev.initial_state[3]
        );
    }
    println!("scheduled empty intervals: {:?}", spec.empty_intervals());

    let summary = simulate(&config)?;
    println!(
        "\ngenerated {} tracks x {} steps, {} measurements",
        summary.track_count, summary.steps, summary.measurement_count
    );
    println!("truth      -> {}", summary.truth_path.display());
    println!("detections -> {}", summary.detections_path.display());
    Ok(())
}
