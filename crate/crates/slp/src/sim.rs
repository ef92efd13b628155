//! Monte Carlo benchmark harness: power and timing against the plain
//! zero-forcing baseline, plus an AWGN symbol-error-rate validation.
//!
//! Every trial derives its own seeds from the master seed through a
//! counter-based split, so results are identical no matter how many worker
//! threads run the trials or in which order they finish. ZF and SLP powers
//! within a trial always use the same channel and symbols (paired
//! comparison).

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channel::{draw_channel, zf_precoder, ChannelMatrix, ZfPrecoder};
use crate::constellation::{draw_symbols, Constellation};
use crate::error::{Result, SlpError};
use crate::nnls::NnlsSolver;
use crate::precode::precode_slot_with;

/// Leading trials per antenna count excluded from timing statistics.
pub const WARMUP_TRIALS: usize = 10;

/// Redraw attempts before a singular channel discards the trial.
pub const MAX_CHANNEL_REDRAWS: usize = 4;

/// Benchmark configuration.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub n_r: usize,
    pub n_t_values: Vec<usize>,
    /// Constellation token: `qpsk`, `8psk` or `16apsk`.
    pub constellation: String,
    /// Per-user SNR constraint in dB; converted once to a linear amplitude.
    pub gamma_db: f64,
    pub trials: usize,
    /// AWGN variance for receiver validation runs (unused by the noiseless
    /// power benchmark).
    pub noise_var: f64,
    pub master_seed: u64,
    pub ring_ratio: f64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_r < 1 {
            return Err(SlpError::FatalConfig("n_r must be at least 1".to_string()));
        }
        if self.n_t_values.is_empty() {
            return Err(SlpError::FatalConfig("no n_t values given".to_string()));
        }
        if let Some(&n_t) = self.n_t_values.iter().find(|&&n_t| n_t < self.n_r) {
            return Err(SlpError::AntennaCount { n_t, n_r: self.n_r });
        }
        if self.trials < 1 {
            return Err(SlpError::FatalConfig("need at least one trial".to_string()));
        }
        if !self.gamma_db.is_finite() {
            return Err(SlpError::FatalConfig("gamma_db must be finite".to_string()));
        }
        if !(self.noise_var >= 0.0) {
            return Err(SlpError::FatalConfig(
                "noise_var must be nonnegative".to_string(),
            ));
        }
        Constellation::from_token(&self.constellation, self.ring_ratio)?;
        Ok(())
    }

    /// `10^(gamma_db / 20)`, the linear amplitude the receiver must meet.
    pub fn gamma_amplitude(&self) -> f64 {
        10f64.powf(self.gamma_db / 20.0)
    }
}

/// Per-trial outputs; one CSV row each.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub n_t: usize,
    pub trial: usize,
    pub power_zf: f64,
    pub power_slp: f64,
    pub solve_time_ns: u64,
    pub correction_time_ns: u64,
    /// Users whose perturbation the detection-region step altered.
    pub corrections: usize,
    pub discarded: bool,
}

/// Aggregates for one transmit-antenna count.
#[derive(Debug, Clone)]
pub struct NtSummary {
    pub n_t: usize,
    pub mean_power_zf: f64,
    pub mean_power_slp: f64,
    /// `10 log10(mean_power_zf / mean_power_slp)`.
    pub gain_db: f64,
    pub mean_time_ns: f64,
    pub median_time_ns: u64,
    pub p95_time_ns: u64,
    pub median_correction_ns: u64,
    /// Corrected users over all users of non-discarded trials.
    pub correction_rate: f64,
    pub discarded_trials: usize,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub summaries: Vec<NtSummary>,
    pub records: Vec<TrialRecord>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based seed split: mixing the master seed with structured
/// counters keeps trials independent and order-free.
fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ 0x6A09_E667_F3BC_C909);
    for &p in parts {
        state = splitmix64(state ^ splitmix64(p));
    }
    state
}

const STREAM_CHANNEL: u64 = 0;
const STREAM_SYMBOLS: u64 = 1;
const STREAM_NOISE: u64 = 2;

/// Draws a channel and its ZF precoder, redrawing on singular channels.
fn draw_usable_channel(
    cfg: &TrialConfig,
    n_t: usize,
    trial: usize,
) -> Option<(ChannelMatrix, ZfPrecoder)> {
    for attempt in 0..=MAX_CHANNEL_REDRAWS as u64 {
        let seed = derive_seed(
            cfg.master_seed,
            &[n_t as u64, trial as u64, STREAM_CHANNEL, attempt],
        );
        let Ok(h) = draw_channel(cfg.n_r, n_t, seed) else {
            return None;
        };
        if let Ok(w) = zf_precoder(&h) {
            return Some((h, w));
        }
    }
    None
}

fn zf_transmit(w: &ZfPrecoder, symbols: &[Complex64], gamma_amp: f64) -> DVector<Complex64> {
    let target = DVector::from_iterator(symbols.len(), symbols.iter().map(|&p| p * gamma_amp));
    w.matrix() * target
}

fn run_trial(
    solver: &mut NnlsSolver,
    cfg: &TrialConfig,
    c: &Constellation,
    gamma: &[f64],
    n_t: usize,
    trial: usize,
) -> TrialRecord {
    let discarded = TrialRecord {
        n_t,
        trial,
        power_zf: 0.0,
        power_slp: 0.0,
        solve_time_ns: 0,
        correction_time_ns: 0,
        corrections: 0,
        discarded: true,
    };
    let Some((h, w)) = draw_usable_channel(cfg, n_t, trial) else {
        return discarded;
    };
    let symbol_seed = derive_seed(cfg.master_seed, &[n_t as u64, trial as u64, STREAM_SYMBOLS]);
    let s = draw_symbols(c, cfg.n_r, symbol_seed);
    let power_zf = zf_transmit(&w, s.entries(), cfg.gamma_amplitude()).norm_squared();

    let Ok(slot) = precode_slot_with(solver, &h, &w, &s, c, gamma) else {
        return discarded;
    };
    TrialRecord {
        n_t,
        trial,
        power_zf,
        power_slp: slot.total_power,
        solve_time_ns: slot.solve_time.as_nanos() as u64,
        correction_time_ns: slot.correction_time.as_nanos() as u64,
        corrections: slot.corrected_users(),
        discarded: false,
    }
}

fn percentile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn summarize(n_t: usize, n_r: usize, records: &[TrialRecord]) -> NtSummary {
    let kept: Vec<&TrialRecord> = records.iter().filter(|r| !r.discarded).collect();
    let discarded_trials = records.len() - kept.len();
    let count = kept.len().max(1) as f64;
    let mean_power_zf = kept.iter().map(|r| r.power_zf).sum::<f64>() / count;
    let mean_power_slp = kept.iter().map(|r| r.power_slp).sum::<f64>() / count;
    let gain_db = 10.0 * (mean_power_zf / mean_power_slp).log10();
    let corrected: usize = kept.iter().map(|r| r.corrections).sum();
    let correction_rate = corrected as f64 / (kept.len().max(1) * n_r) as f64;

    let warmup = WARMUP_TRIALS.min(records.len().saturating_sub(1));
    let mut timed: Vec<&TrialRecord> = kept.iter().copied().filter(|r| r.trial >= warmup).collect();
    if timed.is_empty() {
        timed = kept.clone();
    }
    let mut solve_times: Vec<u64> = timed.iter().map(|r| r.solve_time_ns).collect();
    solve_times.sort_unstable();
    let mut correction_times: Vec<u64> = timed.iter().map(|r| r.correction_time_ns).collect();
    correction_times.sort_unstable();
    let mean_time_ns = if solve_times.is_empty() {
        0.0
    } else {
        solve_times.iter().sum::<u64>() as f64 / solve_times.len() as f64
    };

    NtSummary {
        n_t,
        mean_power_zf,
        mean_power_slp,
        gain_db,
        mean_time_ns,
        median_time_ns: percentile(&solve_times, 0.5),
        p95_time_ns: percentile(&solve_times, 0.95),
        median_correction_ns: percentile(&correction_times, 0.5),
        correction_rate,
        discarded_trials,
    }
}

/// Runs the full benchmark: for every `n_t` and trial, a paired ZF/SLP
/// power measurement and the slot solve time. Trials run on the current
/// rayon pool; aggregation is a deterministic reduction in trial order.
pub fn run_benchmark(cfg: &TrialConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let c = Constellation::from_token(&cfg.constellation, cfg.ring_ratio)?;
    let gamma = vec![cfg.gamma_amplitude(); cfg.n_r];

    let mut summaries = Vec::with_capacity(cfg.n_t_values.len());
    let mut records = Vec::with_capacity(cfg.n_t_values.len() * cfg.trials);
    for &n_t in &cfg.n_t_values {
        let nt_records: Vec<TrialRecord> = (0..cfg.trials)
            .into_par_iter()
            .map_init(NnlsSolver::new, |solver, trial| {
                run_trial(solver, cfg, &c, &gamma, n_t, trial)
            })
            .collect();
        summaries.push(summarize(n_t, cfg.n_r, &nt_records));
        records.extend(nt_records);
    }

    let discarded: usize = summaries.iter().map(|s| s.discarded_trials).sum();
    if discarded * 100 > records.len() {
        return Err(SlpError::FatalConfig(format!(
            "{discarded} of {} trials discarded (> 1%)",
            records.len()
        )));
    }
    Ok(BenchReport { summaries, records })
}

/// Paired symbol-error-rate comparison through an AWGN receiver.
#[derive(Debug, Clone, Copy)]
pub struct SerComparison {
    pub ser_slp: f64,
    pub ser_zf: f64,
    pub decisions: usize,
    pub errors_slp: usize,
    pub errors_zf: usize,
}

/// Minimum-distance detection of SLP and ZF transmissions over the same
/// channels, symbols and noise realizations. `snr_db` is the per-user
/// receive SNR (average symbol energy over noise variance); the noise
/// draws do not depend on it, so sweeps over `snr_db` are paired.
pub fn ser_compare(cfg: &TrialConfig, snr_db: f64) -> Result<SerComparison> {
    cfg.validate()?;
    let noise_var = 10f64.powf(cfg.gamma_db / 10.0) / 10f64.powf(snr_db / 10.0);
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(SlpError::InvalidInput(format!(
            "receive SNR {snr_db} dB gives unusable noise variance {noise_var}"
        )));
    }
    let c = Constellation::from_token(&cfg.constellation, cfg.ring_ratio)?;
    let amp = cfg.gamma_amplitude();
    let gamma = vec![amp; cfg.n_r];
    let sigma = noise_var.sqrt();

    let mut decisions = 0usize;
    let mut errors_slp = 0usize;
    let mut errors_zf = 0usize;
    for &n_t in &cfg.n_t_values {
        let counts: Vec<(usize, usize, usize)> = (0..cfg.trials)
            .into_par_iter()
            .map_init(NnlsSolver::new, |solver, trial| {
                let Some((h, w)) = draw_usable_channel(cfg, n_t, trial) else {
                    return (0, 0, 0);
                };
                let symbol_seed =
                    derive_seed(cfg.master_seed, &[n_t as u64, trial as u64, STREAM_SYMBOLS]);
                let s = draw_symbols(&c, cfg.n_r, symbol_seed);
                let Ok(slot) = precode_slot_with(solver, &h, &w, &s, &c, &gamma) else {
                    return (0, 0, 0);
                };
                let x_zf = zf_transmit(&w, s.entries(), amp);

                let noise_seed =
                    derive_seed(cfg.master_seed, &[n_t as u64, trial as u64, STREAM_NOISE]);
                let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
                let normal =
                    Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid std dev");
                let unit_noise = DVector::from_fn(cfg.n_r, |_, _| {
                    Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
                });

                let scaled_noise = unit_noise.map(|z| z * sigma);
                let y_slp = h.matrix() * &slot.x + &scaled_noise;
                let y_zf = h.matrix() * x_zf + &scaled_noise;
                let mut slp = 0usize;
                let mut zf = 0usize;
                for k in 0..cfg.n_r {
                    let sent = s.source_indices()[k];
                    if c.detect(y_slp[k] / amp) != sent {
                        slp += 1;
                    }
                    if c.detect(y_zf[k] / amp) != sent {
                        zf += 1;
                    }
                }
                (cfg.n_r, slp, zf)
            })
            .collect();
        for (d, slp, zf) in counts {
            decisions += d;
            errors_slp += slp;
            errors_zf += zf;
        }
    }
    if decisions == 0 {
        return Err(SlpError::FatalConfig(
            "all SER trials discarded".to_string(),
        ));
    }
    Ok(SerComparison {
        ser_slp: errors_slp as f64 / decisions as f64,
        ser_zf: errors_zf as f64 / decisions as f64,
        decisions,
        errors_slp,
        errors_zf,
    })
}

/// Symbol-error rate of the precoded link at the given receive SNR.
pub fn ser_check(cfg: &TrialConfig, snr_db: f64) -> Result<f64> {
    Ok(ser_compare(cfg, snr_db)?.ser_slp)
}

fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes the per-trial CSV, the summary CSV and one plot-ready `.dat`
/// file per metric into `dir`. Returns the written paths.
pub fn emit_report(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut trials_csv =
        String::from("nt,trial,power_zf,power_slp,solve_time_ns,corrections,discarded\n");
    for r in &report.records {
        trials_csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n_t,
            r.trial,
            format_f64(r.power_zf),
            format_f64(r.power_slp),
            r.solve_time_ns,
            r.corrections,
            r.discarded as u8
        ));
    }
    let path = dir.join("trials.csv");
    std::fs::write(&path, trials_csv)?;
    written.push(path);

    let mut summary_csv =
        String::from("nt,gain_db,mean_time_ns,median_time_ns,p95_time_ns,correction_rate\n");
    for s in &report.summaries {
        summary_csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.n_t,
            format_f64(s.gain_db),
            format_f64(s.mean_time_ns),
            s.median_time_ns,
            s.p95_time_ns,
            format_f64(s.correction_rate)
        ));
    }
    let path = dir.join("summary.csv");
    std::fs::write(&path, summary_csv)?;
    written.push(path);

    let mut power_dat = String::from("# nt mean_power_zf mean_power_slp gain_db\n");
    for s in &report.summaries {
        power_dat.push_str(&format!(
            "{} {} {} {}\n",
            s.n_t,
            format_f64(s.mean_power_zf),
            format_f64(s.mean_power_slp),
            format_f64(s.gain_db)
        ));
    }
    let path = dir.join("power.dat");
    std::fs::write(&path, power_dat)?;
    written.push(path);

    let mut timing_dat = String::from("# nt mean_ns median_ns p95_ns median_correction_ns\n");
    for s in &report.summaries {
        timing_dat.push_str(&format!(
            "{} {} {} {} {}\n",
            s.n_t,
            format_f64(s.mean_time_ns),
            s.median_time_ns,
            s.p95_time_ns,
            s.median_correction_ns
        ));
    }
    let path = dir.join("timing.dat");
    std::fs::write(&path, timing_dat)?;
    written.push(path);

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> TrialConfig {
        TrialConfig {
            n_r: 3,
            n_t_values: vec![3, 5],
            constellation: "qpsk".to_string(),
            gamma_db: 10.0,
            trials: 50,
            noise_var: 0.0,
            master_seed: 42,
            ring_ratio: 2.7,
        }
    }

    #[test]
    fn config_validation_catches_bad_setups() {
        let mut cfg = small_config();
        cfg.n_t_values = vec![2];
        assert!(matches!(cfg.validate(), Err(SlpError::AntennaCount { .. })));
        let mut cfg = small_config();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.constellation = "64qam".to_string();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn benchmark_is_reproducible_and_paired() {
        let cfg = small_config();
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a.records.len(), 100);
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(ra.n_t, rb.n_t);
            assert_eq!(ra.trial, rb.trial);
            assert_eq!(ra.power_zf, rb.power_zf);
            assert_eq!(ra.power_slp, rb.power_slp);
            assert_eq!(ra.corrections, rb.corrections);
        }
        // QPSK dominance per trial
        for r in &a.records {
            assert!(!r.discarded);
            assert!(r.power_slp <= r.power_zf + 1e-9);
        }
        for s in &a.summaries {
            assert!(s.gain_db >= 0.0);
        }
    }

    #[test]
    fn seed_change_changes_results() {
        let mut cfg = small_config();
        let a = run_benchmark(&cfg).unwrap();
        cfg.master_seed = 43;
        let b = run_benchmark(&cfg).unwrap();
        assert_ne!(a.records[0].power_zf, b.records[0].power_zf);
    }

    #[test]
    fn derive_seed_separates_streams() {
        let a = derive_seed(1, &[10, 0, STREAM_CHANNEL, 0]);
        let b = derive_seed(1, &[10, 0, STREAM_SYMBOLS]);
        let c = derive_seed(1, &[10, 1, STREAM_CHANNEL, 0]);
        let d = derive_seed(2, &[10, 0, STREAM_CHANNEL, 0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn percentile_is_nearest_rank() {
        let values = vec![10, 20, 30, 40];
        assert_eq!(percentile(&values, 0.5), 20);
        assert_eq!(percentile(&values, 0.95), 40);
        assert_eq!(percentile(&values, 1.0), 40);
        assert_eq!(percentile(&[], 0.5), 0);
    }

    #[test]
    fn ser_is_zero_without_noise_pressure() {
        let mut cfg = small_config();
        cfg.n_t_values = vec![4];
        cfg.trials = 30;
        // 60 dB above the target: noise negligible
        let ser = ser_check(&cfg, 60.0).unwrap();
        assert_eq!(ser, 0.0);
    }

    #[test]
    fn ser_decreases_with_snr_on_paired_noise() {
        let mut cfg = small_config();
        cfg.n_t_values = vec![3];
        cfg.trials = 400;
        let low = ser_compare(&cfg, 10.0).unwrap();
        let high = ser_compare(&cfg, 13.0).unwrap();
        assert!(low.ser_zf > 0.0, "need errors for a meaningful test");
        assert!(high.ser_slp <= low.ser_slp);
        assert!(high.ser_zf <= low.ser_zf);
    }

    #[test]
    fn emit_report_writes_expected_files() {
        let cfg = small_config();
        let report = run_benchmark(&cfg).unwrap();
        let dir = std::env::temp_dir().join(format!("slp-sim-test-{}", std::process::id()));
        let files = emit_report(&report, &dir).unwrap();
        assert_eq!(files.len(), 4);
        let trials = std::fs::read_to_string(dir.join("trials.csv")).unwrap();
        let mut lines = trials.lines();
        assert_eq!(
            lines.next().unwrap(),
            "nt,trial,power_zf,power_slp,solve_time_ns,corrections,discarded"
        );
        assert_eq!(trials.lines().count(), 1 + report.records.len());
        let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
        assert!(summary
            .starts_with("nt,gain_db,mean_time_ns,median_time_ns,p95_time_ns,correction_rate"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
