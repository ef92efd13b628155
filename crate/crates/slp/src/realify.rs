//! Complex-to-real stacking and the first-quadrant rotation.
//!
//! The power minimization is a complex problem with per-component sign
//! constraints. Stacking real over imaginary parts turns it into a real
//! least-squares problem of twice the size:
//!
//! ```text
//! w_bar = | Re(W)  -Im(W) |      s_bar = | Re(s) |      gamma_bar = | G |
//!         | Im(W)   Re(W) |              | Im(s) |                  | G |
//! ```
//!
//! with the norm identity `|| w_bar * v ||_2 = || W * (v_head + i v_tail) ||_2`.
//! Flipping the sign of every negative symbol component (the `b` vector,
//! conceptually a diagonal matrix applied to both `w_bar` and `s_bar`)
//! rotates each symbol into the first quadrant without changing the
//! product, so the perturbation constraint becomes plain `u >= 0` and the
//! problem is standard NNLS:
//!
//! ```text
//! min || w_tilde * u - d ||_2   s.t.  u >= 0,    d = -w_tilde * (gamma_bar o s_tilde)
//! ```
//!
//! The transmit stack `x_bar = w_tilde * (gamma_bar o s_tilde + u)` is then
//! exactly the residual vector of that NNLS problem.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ZfPrecoder;
use crate::constellation::SymbolVector;
use crate::error::{Result, SlpError};

/// Per-user component signs: `b_r[k] = sign(Re(s_k))`, `b_i[k] = sign(Im(s_k))`.
#[derive(Debug, Clone)]
pub struct SignVector {
    b_r: Vec<f64>,
    b_i: Vec<f64>,
}

impl SignVector {
    /// Extracts signs from the symbols; errors on a zero component, which
    /// the axis-offset constellations exclude upstream.
    pub fn from_symbols(entries: &[Complex64]) -> Result<SignVector> {
        let mut b_r = Vec::with_capacity(entries.len());
        let mut b_i = Vec::with_capacity(entries.len());
        for (k, s) in entries.iter().enumerate() {
            if s.re == 0.0 || s.im == 0.0 {
                return Err(SlpError::DegenerateSymbol { index: k });
            }
            b_r.push(if s.re > 0.0 { 1.0 } else { -1.0 });
            b_i.push(if s.im > 0.0 { 1.0 } else { -1.0 });
        }
        Ok(SignVector { b_r, b_i })
    }

    pub fn len(&self) -> usize {
        self.b_r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_r.is_empty()
    }

    pub fn b_r(&self) -> &[f64] {
        &self.b_r
    }

    pub fn b_i(&self) -> &[f64] {
        &self.b_i
    }

    /// The stacked `[b_r; b_i]` vector of length `2 N_r`.
    pub fn stacked(&self) -> DVector<f64> {
        let n = self.len();
        DVector::from_fn(
            2 * n,
            |j, _| {
                if j < n {
                    self.b_r[j]
                } else {
                    self.b_i[j - n]
                }
            },
        )
    }
}

/// The real-valued view of one precoding slot.
#[derive(Debug, Clone)]
pub struct RealStack {
    w_bar: DMatrix<f64>,
    w_tilde: DMatrix<f64>,
    s_bar: DVector<f64>,
    s_tilde: DVector<f64>,
    gamma_bar: DVector<f64>,
    signs: SignVector,
}

/// Stacks precoder, symbols and SNR targets into the rotated real form.
///
/// `gamma` holds per-user amplitude targets (linear scale, already
/// square-rooted), all strictly positive.
pub fn build_stack(w: &ZfPrecoder, s: &SymbolVector, gamma: &[f64]) -> Result<RealStack> {
    let n_r = w.n_r();
    let n_t = w.n_t();
    if s.len() != n_r {
        return Err(SlpError::DimensionMismatch {
            context: "symbol vector",
            expected: n_r,
            actual: s.len(),
        });
    }
    if gamma.len() != n_r {
        return Err(SlpError::DimensionMismatch {
            context: "SNR target vector",
            expected: n_r,
            actual: gamma.len(),
        });
    }
    if gamma.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(SlpError::InvalidInput(
            "SNR targets must be positive linear amplitudes".to_string(),
        ));
    }
    let signs = SignVector::from_symbols(s.entries())?;

    let wm = w.matrix();
    let mut w_bar = DMatrix::zeros(2 * n_t, 2 * n_r);
    for i in 0..n_t {
        for j in 0..n_r {
            let z = wm[(i, j)];
            w_bar[(i, j)] = z.re;
            w_bar[(i, j + n_r)] = -z.im;
            w_bar[(i + n_t, j)] = z.im;
            w_bar[(i + n_t, j + n_r)] = z.re;
        }
    }

    // The rotation matrix B = diag(b) is applied as a column scaling.
    let b = signs.stacked();
    let mut w_tilde = w_bar.clone();
    for j in 0..2 * n_r {
        if b[j] < 0.0 {
            w_tilde.column_mut(j).neg_mut();
        }
    }

    let s_bar = DVector::from_fn(2 * n_r, |j, _| {
        if j < n_r {
            s.entries()[j].re
        } else {
            s.entries()[j - n_r].im
        }
    });
    let s_tilde = s_bar.component_mul(&b);
    debug_assert!(s_tilde.iter().all(|&v| v > 0.0));

    let gamma_bar = DVector::from_fn(2 * n_r, |j, _| gamma[j % n_r]);

    Ok(RealStack {
        w_bar,
        w_tilde,
        s_bar,
        s_tilde,
        gamma_bar,
        signs,
    })
}

impl RealStack {
    pub fn n_r(&self) -> usize {
        self.signs.len()
    }

    pub fn n_t(&self) -> usize {
        self.w_bar.nrows() / 2
    }

    pub fn w_bar(&self) -> &DMatrix<f64> {
        &self.w_bar
    }

    pub fn w_tilde(&self) -> &DMatrix<f64> {
        &self.w_tilde
    }

    pub fn s_bar(&self) -> &DVector<f64> {
        &self.s_bar
    }

    /// Rotated symbol stack; strictly positive in every component.
    pub fn s_tilde(&self) -> &DVector<f64> {
        &self.s_tilde
    }

    pub fn gamma_bar(&self) -> &DVector<f64> {
        &self.gamma_bar
    }

    pub fn signs(&self) -> &SignVector {
        &self.signs
    }

    /// `gamma_bar o s_tilde`, the rotated amplitude targets.
    pub fn scaled_symbol_stack(&self) -> DVector<f64> {
        self.gamma_bar.component_mul(&self.s_tilde)
    }

    /// The NNLS right-hand side `d = -w_tilde * (gamma_bar o s_tilde)`.
    pub fn nnls_target(&self) -> DVector<f64> {
        -(&self.w_tilde * self.scaled_symbol_stack())
    }

    /// Transmit stack `x_bar = w_tilde * (gamma_bar o s_tilde + u)`.
    pub fn transmit_stack(&self, u_tilde: &DVector<f64>) -> DVector<f64> {
        &self.w_tilde * (self.scaled_symbol_stack() + u_tilde)
    }

    /// Reassembles the rotated perturbation into the complex per-user
    /// perturbation `u_k = b_r[k] u[k] + i b_i[k] u[k + N_r]`.
    pub fn perturbation_to_complex(&self, u_tilde: &DVector<f64>) -> DVector<Complex64> {
        let n = self.n_r();
        DVector::from_fn(n, |k, _| {
            Complex64::new(
                self.signs.b_r()[k] * u_tilde[k],
                self.signs.b_i()[k] * u_tilde[k + n],
            )
        })
    }
}

/// Stacks a complex vector as `[Re; Im]`.
pub fn stack_complex(x: &DVector<Complex64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |j, _| if j < n { x[j].re } else { x[j - n].im })
}

/// Inverse of [`stack_complex`]: `x_i = x_bar[i] + i x_bar[i + N_t]`.
pub fn unstack(x_bar: &DVector<f64>) -> Result<DVector<Complex64>> {
    if !x_bar.len().is_multiple_of(2) {
        return Err(SlpError::DimensionMismatch {
            context: "stacked real vector",
            expected: x_bar.len() + 1,
            actual: x_bar.len(),
        });
    }
    let n = x_bar.len() / 2;
    Ok(DVector::from_fn(n, |i, _| {
        Complex64::new(x_bar[i], x_bar[i + n])
    }))
}
