//! Miniature power/timing benchmark: sweeps the transmit antenna count for
//! all three constellations and prints the gain over plain zero-forcing.
//! The `slp bench` subcommand runs the same harness with CSV output.
//!
//! ```bash
//! cargo run --release --example power_sweep
//! ```

use slp::sim::{run_benchmark, TrialConfig};

fn main() -> slp::Result<()> {
    for token in ["qpsk", "8psk", "16apsk"] {
        let cfg = TrialConfig {
            n_r: 10,
            n_t_values: vec![10, 12, 14, 16],
            constellation: token.to_string(),
            gamma_db: 10.0,
            trials: 400,
            noise_var: 0.0,
            master_seed: 9,
            ring_ratio: 2.7,
        };
        let report = run_benchmark(&cfg)?;
        println!("{token}: nr=10, gamma 10 dB, 400 trials");
        println!(
            "  {:>4} {:>9} {:>12} {:>12} {:>11} {:>10}",
            "nt", "gain_db", "mean_zf", "mean_slp", "median_us", "corr_rate"
        );
        for s in &report.summaries {
            println!(
                "  {:>4} {:>9.2} {:>12.3} {:>12.3} {:>11.1} {:>10.3}",
                s.n_t,
                s.gain_db,
                s.mean_power_zf,
                s.mean_power_slp,
                s.median_time_ns as f64 / 1e3,
                s.correction_rate
            );
        }
        println!();
    }
    Ok(())
}
