//! Symbol-level precoding for MIMO downlinks.
//!
//! A zero-forcing precoded downlink spends power inverting the channel for
//! every user. When the transmitter knows the data symbols it can do better:
//! cross-user interference that happens to push a received symbol *deeper*
//! into its detection region does not have to be cancelled. This crate
//! designs, per symbol slot, the cheapest transmit vector that keeps every
//! user at or above its SNR target by solving a small Non-Negative Least
//! Squares problem over the zero-forcing precoder, then applies
//! detection-region corrections so the scheme stays safe for multi-level
//! constellations (M-PSK with M > 4, and multi-ring APSK where only the
//! outermost ring tolerates outward perturbation).
//!
//! The pipeline per slot:
//!
//! 1. [`channel::draw_channel`] / [`channel::zf_precoder`] — channel `H` and
//!    its right pseudo-inverse `W`.
//! 2. [`realify::build_stack`] — complex-to-real stacking plus sign flips
//!    that rotate every symbol into the first quadrant, turning the
//!    constrained power minimization into standard NNLS form.
//! 3. [`nnls::NnlsSolver`] — active-set solver with cached cross-products.
//! 4. [`precode::correct_mpsk`] / [`precode::gate_apsk`] — post-processing
//!    that pins perturbations inside each symbol's detection sector.
//! 5. [`precode::precode_slot`] — the whole slot pipeline in one call.
//!
//! [`sim::run_benchmark`] wraps this in a reproducible Monte Carlo harness
//! that compares total transmit power and solve time against the plain
//! zero-forcing baseline, and [`sim::ser_check`] validates detectability
//! through an AWGN receiver.
//!
//! ```
//! use slp::{channel, constellation, precode};
//!
//! let qpsk = constellation::make_mpsk(4)?;
//! let h = channel::draw_channel(4, 6, 7)?;
//! let w = channel::zf_precoder(&h)?;
//! let s = constellation::draw_symbols(&qpsk, 4, 42);
//! let gamma = vec![10f64.powf(10.0 / 20.0); 4]; // 10 dB SNR target
//!
//! let slot = precode::precode_slot(&h, &w, &s, &qpsk, &gamma)?;
//! let zf_power = (w.matrix()
//!     * nalgebra::DVector::from_iterator(4, s.entries().iter().map(|&p| p * gamma[0])))
//! .norm_squared();
//! assert!(slot.total_power <= zf_power + 1e-9);
//! # Ok::<(), slp::SlpError>(())
//! ```
//!
//! Runnable demonstrations live under `examples/`; `cargo run --example
//! power_sweep` reproduces a miniature power benchmark. The `slp` binary
//! exposes the same functionality as `bench`, `slot` and `selftest`
//! subcommands.

// negated comparisons like `!(x > 0.0)` are deliberate: they treat NaN as
// out of range instead of silently accepting it
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod constellation;
mod error;
pub mod nnls;
pub mod precode;
pub mod realify;
pub mod selftest;
pub mod sim;

pub use channel::{apply_channel, draw_channel, zf_precoder, ChannelMatrix, ZfPrecoder};
pub use constellation::{draw_symbols, make_mapsk16, make_mpsk, Constellation, SymbolVector};
pub use error::{Result, SlpError};
pub use nnls::{NnlsProblem, NnlsSolution, NnlsSolver};
pub use precode::{precode_slot, Correction, SlpResult};
pub use realify::{build_stack, unstack, RealStack, SignVector};
pub use sim::{run_benchmark, ser_check, BenchReport, TrialConfig, TrialRecord};
