//! Detectability check through an AWGN receiver: paired symbol-error rates
//! for the symbol-level precoder and plain zero-forcing across receive
//! SNRs. The constructive perturbations push symbols deeper into their
//! detection regions, so the SLP curve sits at or below the ZF curve.
//!
//! ```bash
//! cargo run --release --example ser_comparison
//! ```

use slp::sim::{ser_compare, TrialConfig};

fn main() -> slp::Result<()> {
    let cfg = TrialConfig {
        n_r: 10,
        n_t_values: vec![10],
        constellation: "qpsk".to_string(),
        gamma_db: 10.0,
        trials: 4000,
        noise_var: 0.0,
        master_seed: 9,
        ring_ratio: 2.7,
    };
    println!("qpsk, nr = nt = 10, 40000 paired decisions per point");
    println!("{:>8} {:>12} {:>12}", "snr_db", "ser_slp", "ser_zf");
    for snr_db in [8.0f64, 9.0, 10.0, 11.0, 12.0] {
        let ser = ser_compare(&cfg, snr_db)?;
        println!(
            "{:>8.1} {:>12.3e} {:>12.3e}",
            snr_db, ser.ser_slp, ser.ser_zf
        );
    }
    Ok(())
}
