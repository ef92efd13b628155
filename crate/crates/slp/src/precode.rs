//! Slot-level precoding: NNLS assembly, detection-region corrections and
//! transmit-vector reconstruction.
//!
//! For QPSK the NNLS solution is final: each quadrant holds one symbol, so
//! any nonnegative perturbation in the rotated frame stays inside the
//! detection region. For M-PSK with M > 4 the region is a sector of
//! half-angle `theta0 = pi/M` around the symbol, and a raw perturbation can
//! rotate the received symbol out of it. [`correct_mpsk`] checks each user's
//! perturbation direction against the sector edges through the rotated
//! symbol angle `theta_k` and, on violation, shrinks one component back to
//! the edge:
//!
//! * below the lower edge — the in-phase part is reduced to
//!   `u_q / tan(theta_k - theta0)`;
//! * above the upper edge — the quadrature part is reduced to
//!   `u_i * tan(theta_k + theta0)`.
//!
//! The comparisons are done in cross-multiplied form so `u_i = 0` needs no
//! special casing, and edges that coincide with the quadrant boundaries
//! (horizontal lower edge, vertical upper edge) cannot be violated by a
//! nonnegative perturbation at all.
//!
//! For M-APSK only the outermost ring can absorb an outward push;
//! [`gate_apsk`] zeroes the perturbation of every inner-ring user and runs
//! the sector check, with the top ring's angular spacing, on the rest.

use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{ChannelMatrix, ZfPrecoder};
use crate::constellation::{Constellation, ConstellationKind, SymbolVector};
use crate::error::{Result, SlpError};
use crate::nnls::{self, NnlsProblem, NnlsSolver};
use crate::realify::{build_stack, unstack};

/// Sector edges closer than this (radians) to the quadrant boundary are
/// treated as the boundary itself.
const EDGE_EPS: f64 = 1e-9;

/// Per-user outcome of the detection-region post-processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    /// Perturbation already inside the sector.
    None,
    /// In-phase component reduced to the lower sector edge.
    LowerEdge,
    /// Quadrature component reduced to the upper sector edge.
    UpperEdge,
    /// Inner-ring APSK user; perturbation reset to zero.
    ApskZeroed,
}

/// Everything produced for one symbol slot.
#[derive(Debug, Clone)]
pub struct SlpResult {
    /// Raw NNLS solution in the rotated frame, before corrections.
    pub u_raw: DVector<f64>,
    /// Perturbation after detection-region post-processing.
    pub u_corrected: DVector<f64>,
    /// Complex transmit vector.
    pub x: DVector<Complex64>,
    /// `||x||_2^2`, recomputed from `x`.
    pub total_power: f64,
    /// Per-user correction flags.
    pub corrections: Vec<Correction>,
    /// Wall-clock time for stack assembly, NNLS and corrections.
    pub solve_time: Duration,
    /// Portion of `solve_time` spent in the correction step.
    pub correction_time: Duration,
    /// Outer iterations the NNLS solve took.
    pub nnls_iterations: usize,
}

impl SlpResult {
    /// Number of users whose perturbation was altered.
    pub fn corrected_users(&self) -> usize {
        self.corrections
            .iter()
            .filter(|c| !matches!(c, Correction::None))
            .count()
    }
}

/// Runs the full slot pipeline with a fresh solver.
pub fn precode_slot(
    h: &ChannelMatrix,
    w: &ZfPrecoder,
    s: &SymbolVector,
    c: &Constellation,
    gamma: &[f64],
) -> Result<SlpResult> {
    let mut solver = NnlsSolver::new();
    precode_slot_with(&mut solver, h, w, s, c, gamma)
}

/// Runs the full slot pipeline reusing a caller-owned solver, so a worker
/// can process a stream of slots without reallocating solver scratch.
pub fn precode_slot_with(
    solver: &mut NnlsSolver,
    h: &ChannelMatrix,
    w: &ZfPrecoder,
    s: &SymbolVector,
    c: &Constellation,
    gamma: &[f64],
) -> Result<SlpResult> {
    if w.n_t() != h.n_t() || w.n_r() != h.n_r() {
        return Err(SlpError::DimensionMismatch {
            context: "precoder shape",
            expected: h.n_t(),
            actual: w.n_t(),
        });
    }

    let started = Instant::now();
    let stack = build_stack(w, s, gamma)?;
    let problem = NnlsProblem::new(stack.w_tilde().clone(), stack.nnls_target())?;
    let solution = solver.solve(
        &problem,
        nnls::DEFAULT_TOLERANCE,
        nnls::default_max_iter(problem.ncols()),
    )?;

    let correction_started = Instant::now();
    let (u_corrected, corrections) = match c.kind() {
        ConstellationKind::Mpsk => correct_mpsk(&solution.u, stack.s_tilde(), c),
        ConstellationKind::Mapsk => gate_apsk(&solution.u, s, c),
    };
    let correction_time = correction_started.elapsed();

    let x = unstack(&stack.transmit_stack(&u_corrected))?;
    let total_power = x.norm_squared();
    let solve_time = started.elapsed();

    Ok(SlpResult {
        u_raw: solution.u,
        u_corrected,
        x,
        total_power,
        corrections,
        solve_time,
        correction_time,
        nnls_iterations: solution.iterations,
    })
}

/// Clamps one user's perturbation into the sector
/// `[theta_sym - theta0, theta_sym + theta0]` (first-quadrant frame).
/// Both edge tests read the raw components; at most one can fail.
fn sector_correct(u_i: f64, u_q: f64, theta_sym: f64, theta0: f64) -> (f64, f64, Correction) {
    let lower = theta_sym - theta0;
    let upper = theta_sym + theta0;
    let mut out = (u_i, u_q, Correction::None);

    if lower > EDGE_EPS {
        let tan_lower = lower.tan();
        if u_q < tan_lower * u_i {
            out = (u_q / tan_lower, u_q, Correction::LowerEdge);
        }
    }
    if upper < std::f64::consts::FRAC_PI_2 - EDGE_EPS {
        let tan_upper = upper.tan();
        if u_q > tan_upper * u_i {
            debug_assert!(matches!(out.2, Correction::None));
            out = (u_i, u_i * tan_upper, Correction::UpperEdge);
        }
    }
    out
}

/// M-PSK detection-region correction in the rotated frame. Identity for
/// QPSK, where the sector spans the whole quadrant.
pub fn correct_mpsk(
    u_raw: &DVector<f64>,
    s_tilde: &DVector<f64>,
    c: &Constellation,
) -> (DVector<f64>, Vec<Correction>) {
    let n = s_tilde.len() / 2;
    debug_assert_eq!(u_raw.len(), 2 * n);
    let mut flags = vec![Correction::None; n];
    if c.order() <= 4 {
        return (u_raw.clone(), flags);
    }
    let mut u = u_raw.clone();
    for k in 0..n {
        let theta_sym = s_tilde[k + n].atan2(s_tilde[k]);
        let (u_i, u_q, flag) = sector_correct(u_raw[k], u_raw[k + n], theta_sym, c.theta0());
        u[k] = u_i;
        u[k + n] = u_q;
        flags[k] = flag;
    }
    (u, flags)
}

/// M-APSK gating: inner-ring users get a zero perturbation, top-ring users
/// go through the sector correction with the top ring's half-angle.
pub fn gate_apsk(
    u: &DVector<f64>,
    s: &SymbolVector,
    c: &Constellation,
) -> (DVector<f64>, Vec<Correction>) {
    let n = s.len();
    debug_assert_eq!(u.len(), 2 * n);
    let mut out = u.clone();
    let mut flags = vec![Correction::None; n];
    for k in 0..n {
        if c.is_top_ring(s.source_indices()[k]) {
            let sym = s.entries()[k];
            let theta_sym = sym.im.abs().atan2(sym.re.abs());
            let (u_i, u_q, flag) = sector_correct(u[k], u[k + n], theta_sym, c.theta0());
            out[k] = u_i;
            out[k + n] = u_q;
            flags[k] = flag;
        } else {
            out[k] = 0.0;
            out[k + n] = 0.0;
            flags[k] = Correction::ApskZeroed;
        }
    }
    (out, flags)
}
