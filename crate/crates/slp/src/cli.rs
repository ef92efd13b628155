//! Command-line front end: `bench`, `slot` and `selftest` subcommands.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::channel::{apply_channel, draw_channel, zf_precoder};
use crate::constellation::{draw_symbols, wrap_angle, Constellation, ConstellationKind};
use crate::error::{Result, SlpError};
use crate::precode::{precode_slot, Correction};
use crate::selftest::{self, SelftestOptions};
use crate::sim::{emit_report, run_benchmark, TrialConfig};

#[derive(Debug, Parser)]
#[command(
    name = "slp",
    version,
    about = "Symbol-level precoding: NNLS power minimization over a zero-forcing MIMO downlink"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo power/timing benchmark against plain zero-forcing.
    Bench(BenchArgs),
    /// Inspect a single seeded precoding slot.
    Slot(SlotArgs),
    /// Run the solver oracle-equivalence and invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Receive antennas.
    #[arg(long, default_value_t = 10)]
    nr: usize,
    /// Transmit antennas: a single value, `a:b` (inclusive) or `a:b:step`.
    #[arg(long, default_value = "10:16:2")]
    nt: String,
    /// Constellation: qpsk, 8psk or 16apsk.
    #[arg(long = "mod", default_value = "qpsk")]
    modulation: String,
    /// Per-user SNR constraint in dB.
    #[arg(long, default_value_t = 10.0)]
    gamma_db: f64,
    /// Trials per antenna count.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Master seed; all per-trial randomness derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// AWGN variance for receiver validation (0 = noiseless benchmark).
    #[arg(long, default_value_t = 0.0)]
    noise_var: f64,
    /// APSK outer/inner ring ratio.
    #[arg(long, default_value_t = 2.7)]
    ring_ratio: f64,
    /// Directory for trials.csv, summary.csv and .dat files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "SLP_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SlotArgs {
    #[arg(long, default_value_t = 4)]
    pub nr: usize,
    #[arg(long, default_value_t = 6)]
    pub nt: usize,
    #[arg(long = "mod", default_value = "8psk")]
    pub modulation: String,
    #[arg(long, default_value_t = 10.0)]
    pub gamma_db: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.7)]
    pub ring_ratio: f64,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Pass/fail tolerance for oracle gaps and KKT violations.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Random problem count for the oracle-equivalence check.
    #[arg(long, default_value_t = 200)]
    problems: usize,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
}

/// Parses and dispatches, returning the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Command::Bench(args) => cmd_bench(&args),
        Command::Slot(args) => cmd_slot(&args),
        Command::Selftest(args) => cmd_selftest(&args),
    }
}

/// Expands `a`, `a:b` or `a:b:step` into an inclusive list.
pub fn parse_nt_spec(spec: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| SlpError::InvalidInput(format!("bad antenna count `{s}` in `{spec}`")))
    };
    let values = match parts.as_slice() {
        [single] => vec![parse(single)?],
        [start, end] | [start, end, _] => {
            let start = parse(start)?;
            let end = parse(end)?;
            let step = if let [_, _, step] = parts.as_slice() {
                parse(step)?
            } else {
                1
            };
            if step == 0 || end < start {
                return Err(SlpError::InvalidInput(format!(
                    "bad antenna range `{spec}`"
                )));
            }
            (start..=end).step_by(step).collect()
        }
        _ => return Err(SlpError::InvalidInput(format!("bad antenna spec `{spec}`"))),
    };
    Ok(values)
}

fn usage_error(e: &SlpError) -> i32 {
    eprintln!("error: {e}");
    eprintln!("run with --help for usage");
    2
}

fn cmd_bench(args: &BenchArgs) -> i32 {
    let cfg = match bench_config(args) {
        Ok(cfg) => cfg,
        Err(e) => return usage_error(&e),
    };
    match with_pool(args.workers, || bench_body(args, &cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn bench_config(args: &BenchArgs) -> Result<TrialConfig> {
    let cfg = TrialConfig {
        n_r: args.nr,
        n_t_values: parse_nt_spec(&args.nt)?,
        constellation: args.modulation.clone(),
        gamma_db: args.gamma_db,
        trials: args.trials,
        noise_var: args.noise_var,
        master_seed: args.seed,
        ring_ratio: args.ring_ratio,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn with_pool<T>(workers: Option<usize>, body: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match workers {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SlpError::FatalConfig(format!("worker pool: {e}")))?;
            pool.install(body)
        }
        _ => body(),
    }
}

fn bench_body(args: &BenchArgs, cfg: &TrialConfig) -> Result<()> {
    let report = run_benchmark(cfg)?;
    println!(
        "{} benchmark: nr={} gamma={} dB trials={} seed={}",
        cfg.constellation, cfg.n_r, cfg.gamma_db, cfg.trials, cfg.master_seed
    );
    println!(
        "{:>4}  {:>8}  {:>14}  {:>14}  {:>10}  {:>10}  {:>9}  {:>9}",
        "nt", "gain_db", "mean_zf", "mean_slp", "median_us", "p95_us", "corr_rate", "discarded"
    );
    for s in &report.summaries {
        println!(
            "{:>4}  {:>8.2}  {:>14.4}  {:>14.4}  {:>10.1}  {:>10.1}  {:>9.4}  {:>9}",
            s.n_t,
            s.gain_db,
            s.mean_power_zf,
            s.mean_power_slp,
            s.median_time_ns as f64 / 1e3,
            s.p95_time_ns as f64 / 1e3,
            s.correction_rate,
            s.discarded_trials
        );
    }
    if let Some(dir) = &args.out {
        let files = emit_report(&report, dir)?;
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

/// Renders the full debug view of one seeded slot. Everything printed is
/// deterministic for a given argument set; no timing appears here.
pub fn render_slot(args: &SlotArgs) -> Result<String> {
    if args.nt < args.nr || args.nr < 1 {
        return Err(SlpError::AntennaCount {
            n_t: args.nt,
            n_r: args.nr,
        });
    }
    let c = Constellation::from_token(&args.modulation, args.ring_ratio)?;
    if !args.gamma_db.is_finite() {
        return Err(SlpError::InvalidInput(
            "gamma_db must be finite".to_string(),
        ));
    }
    let amp = 10f64.powf(args.gamma_db / 20.0);

    let h = draw_channel(args.nr, args.nt, args.seed)?;
    let w = zf_precoder(&h)?;
    let s = draw_symbols(&c, args.nr, args.seed.wrapping_add(1));
    let gamma = vec![amp; args.nr];
    let slot = precode_slot(&h, &w, &s, &c, &gamma)?;
    let y = apply_channel(&h, &slot.x, 0.0, 0)?;

    let zf_target = nalgebra::DVector::from_iterator(args.nr, s.entries().iter().map(|&p| p * amp));
    let power_zf = (w.matrix() * &zf_target).norm_squared();

    let mut out = String::new();
    out.push_str(&format!(
        "slot seed={} nr={} nt={} mod={} gamma_db={} (amplitude {:.6})\n",
        args.seed, args.nr, args.nt, args.modulation, args.gamma_db, amp
    ));
    out.push_str(&format!("H ({}x{}):\n", args.nr, args.nt));
    for i in 0..args.nr {
        let row: Vec<String> = (0..args.nt)
            .map(|j| fmt_complex(h.matrix()[(i, j)]))
            .collect();
        out.push_str(&format!("  {}\n", row.join(" ")));
    }
    out.push_str(&format!("W_zf ({}x{}):\n", args.nt, args.nr));
    for i in 0..args.nt {
        let row: Vec<String> = (0..args.nr)
            .map(|j| fmt_complex(w.matrix()[(i, j)]))
            .collect();
        out.push_str(&format!("  {}\n", row.join(" ")));
    }
    out.push_str("symbols:\n");
    for (k, &sym) in s.entries().iter().enumerate() {
        out.push_str(&format!(
            "  user {k}: index {:2}  s = {}\n",
            s.source_indices()[k],
            fmt_complex(sym)
        ));
    }
    let fmt_vec = |v: &nalgebra::DVector<f64>| {
        v.iter()
            .map(|x| format!("{x:+.6}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    out.push_str(&format!("u_raw:       {}\n", fmt_vec(&slot.u_raw)));
    out.push_str(&format!("u_corrected: {}\n", fmt_vec(&slot.u_corrected)));
    out.push_str("corrections: ");
    let flags: Vec<&str> = slot
        .corrections
        .iter()
        .map(|f| match f {
            Correction::None => "none",
            Correction::LowerEdge => "lower_edge",
            Correction::UpperEdge => "upper_edge",
            Correction::ApskZeroed => "apsk_zeroed",
        })
        .collect();
    out.push_str(&flags.join(" "));
    out.push('\n');
    out.push_str("x:\n");
    for (i, &xi) in slot.x.iter().enumerate() {
        out.push_str(&format!("  antenna {i}: {}\n", fmt_complex(xi)));
    }
    out.push_str(&format!(
        "power_zf={:.6} power_slp={:.6} gain_db={:.3} nnls_iterations={}\n",
        power_zf,
        slot.total_power,
        10.0 * (power_zf / slot.total_power).log10(),
        slot.nnls_iterations
    ));
    out.push_str("noiseless receive margins:\n");
    for k in 0..args.nr {
        let sym = s.entries()[k];
        let target = sym * amp;
        let br = if sym.re > 0.0 { 1.0 } else { -1.0 };
        let bi = if sym.im > 0.0 { 1.0 } else { -1.0 };
        let margin_re = br * y[k].re - br * target.re;
        let margin_im = bi * y[k].im - bi * target.im;
        let offset = wrap_angle(y[k].arg() - sym.arg());
        let limit = match c.kind() {
            ConstellationKind::Mpsk => c.theta0(),
            ConstellationKind::Mapsk => {
                if c.is_top_ring(s.source_indices()[k]) {
                    c.theta0()
                } else {
                    0.0
                }
            }
        };
        out.push_str(&format!(
            "  user {k}: re={margin_re:+.6} im={margin_im:+.6} arg_offset={:+.4} deg (limit {:.4} deg)\n",
            offset.to_degrees(),
            limit.to_degrees()
        ));
    }
    Ok(out)
}

fn cmd_slot(args: &SlotArgs) -> i32 {
    match render_slot(args) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e @ (SlpError::AntennaCount { .. } | SlpError::UnknownModulation { .. })) => {
            usage_error(&e)
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_selftest(args: &SelftestArgs) -> i32 {
    if !(args.tol > 0.0) || args.problems == 0 {
        return usage_error(&SlpError::InvalidInput(
            "selftest needs --tol > 0 and --problems >= 1".to_string(),
        ));
    }
    let report = selftest::run(&SelftestOptions {
        problems: args.problems,
        tolerance: args.tol,
        seed: args.seed,
    });
    for check in &report.checks {
        println!(
            "{} {} — {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    if report.passed() {
        println!("selftest passed");
        0
    } else {
        println!("selftest FAILED");
        1
    }
}
