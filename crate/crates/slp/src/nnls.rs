//! Active-set Non-Negative Least Squares solver.
//!
//! Solves `min || A u - d ||_2  subject to  u >= 0` with the Lawson-Hanson
//! active-set method in its fast, cross-product form: `A^T A` and `A^T d`
//! are formed once per solve and every passive-set subproblem is solved
//! through a dense Cholesky factorization of the corresponding principal
//! submatrix. For the tall skinny problems this crate produces (m = 2 N_t
//! rows, n = 2 N_r columns, both a few tens) that is the dominant win: the
//! harness solves thousands of problems of identical shape and never touches
//! the m-row matrix inside the iteration.
//!
//! Termination is certified by the KKT conditions: at the solution the
//! gradient `g = A^T (A u - d)` vanishes on the passive set (`u_j > 0`) and
//! is nonnegative on the active set (`u_j = 0`). The solver is fully
//! deterministic: ties in the entering-variable selection break toward the
//! lowest index, and a variable kicked out of the passive set is banned from
//! re-entering until the iterate actually moves (the standard anti-cycling
//! safeguard).

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SlpError};

/// Default relative tolerance on the dual vector, scaled by `||A^T d||_inf`.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Default outer-iteration cap for an `n`-variable problem.
pub fn default_max_iter(n: usize) -> usize {
    30 * n.max(1)
}

/// A dense NNLS instance `min || a u - d ||` over `u >= 0`.
#[derive(Debug, Clone)]
pub struct NnlsProblem {
    a: DMatrix<f64>,
    d: DVector<f64>,
}

impl NnlsProblem {
    pub fn new(a: DMatrix<f64>, d: DVector<f64>) -> Result<NnlsProblem> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(SlpError::InvalidInput(
                "NNLS design matrix must be nonempty".to_string(),
            ));
        }
        if d.len() != a.nrows() {
            return Err(SlpError::DimensionMismatch {
                context: "NNLS target",
                expected: a.nrows(),
                actual: d.len(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) || d.iter().any(|v| !v.is_finite()) {
            return Err(SlpError::InvalidInput(
                "NNLS inputs must be finite".to_string(),
            ));
        }
        Ok(NnlsProblem { a, d })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }
}

/// Solution with optimality diagnostics.
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    /// The nonnegative minimizer.
    pub u: DVector<f64>,
    /// `|| A u - d ||_2` at the solution.
    pub residual_norm: f64,
    /// Indices pinned at zero.
    pub active_set: Vec<usize>,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Worst KKT violation, relative to `||A^T d||_inf`.
    pub kkt_max_violation: f64,
}

/// Reusable solver; keeps scratch buffers across calls so a worker can
/// solve a stream of same-shape problems without reallocating.
#[derive(Debug, Default)]
pub struct NnlsSolver {
    ata: DMatrix<f64>,
    atd: DVector<f64>,
    w: DVector<f64>,
    u: DVector<f64>,
    passive: Vec<bool>,
    banned: Vec<bool>,
    // Cholesky workspace for the passive-set subproblem
    idx: Vec<usize>,
    sub: Vec<f64>,
    rhs: Vec<f64>,
}

impl NnlsSolver {
    pub fn new() -> NnlsSolver {
        NnlsSolver::default()
    }

    /// Solves the problem; `tolerance` is relative to `||A^T d||_inf` and
    /// `max_iter` caps outer iterations (use [`default_max_iter`]).
    pub fn solve(
        &mut self,
        problem: &NnlsProblem,
        tolerance: f64,
        max_iter: usize,
    ) -> Result<NnlsSolution> {
        self.solve_inner(problem, tolerance, max_iter, None)
    }

    /// Like [`NnlsSolver::solve`] but also returns the residual norm after
    /// each outer iteration, for descent diagnostics.
    pub fn solve_traced(
        &mut self,
        problem: &NnlsProblem,
        tolerance: f64,
        max_iter: usize,
    ) -> Result<(NnlsSolution, Vec<f64>)> {
        let mut trace = Vec::new();
        let solution = self.solve_inner(problem, tolerance, max_iter, Some(&mut trace))?;
        Ok((solution, trace))
    }

    fn solve_inner(
        &mut self,
        problem: &NnlsProblem,
        tolerance: f64,
        max_iter: usize,
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<NnlsSolution> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(SlpError::InvalidInput(format!(
                "tolerance must be positive and finite, got {tolerance}"
            )));
        }
        if max_iter == 0 {
            return Err(SlpError::InvalidInput(
                "max_iter must be at least 1".to_string(),
            ));
        }
        let n = problem.ncols();

        // Cached cross-products; everything below works on n x n data.
        self.ata = problem.a.tr_mul(&problem.a);
        self.atd = problem.a.tr_mul(&problem.d);

        self.u = DVector::zeros(n);
        self.w = DVector::zeros(n);
        self.passive.clear();
        self.passive.resize(n, false);
        self.banned.clear();
        self.banned.resize(n, false);

        let scale = self.atd.amax();
        let mut iterations = 0;
        if scale > 0.0 {
            let tol_abs = tolerance * scale;
            loop {
                // dual vector w = A^T d - A^T A u; positive entries on the
                // active set mark descent directions
                self.w = &self.atd - &self.ata * &self.u;
                let mut entering = None;
                for j in 0..n {
                    if self.passive[j] || self.banned[j] || !(self.w[j] > tol_abs) {
                        continue;
                    }
                    // strict > keeps the lowest index on ties
                    if entering.is_none_or(|(_, best)| self.w[j] > best) {
                        entering = Some((j, self.w[j]));
                    }
                }
                let Some((j_star, _)) = entering else {
                    break;
                };
                if iterations == max_iter {
                    let best = self.finish(problem, iterations, scale);
                    return Err(SlpError::NnlsNonConvergence {
                        iterations,
                        best: Box::new(best),
                    });
                }
                iterations += 1;

                self.passive[j_star] = true;
                if self.run_inner_loop(j_star) {
                    // the iterate moved, so stale bans no longer apply
                    self.banned.iter_mut().for_each(|b| *b = false);
                }
                if let Some(t) = trace.as_deref_mut() {
                    t.push((&problem.a * &self.u - &problem.d).norm());
                }
            }
        }
        Ok(self.finish(problem, iterations, scale))
    }

    /// Restores primal feasibility after `j_star` joined the passive set.
    /// Returns whether the iterate changed.
    fn run_inner_loop(&mut self, j_star: usize) -> bool {
        let mut progressed = false;
        loop {
            self.idx.clear();
            self.idx
                .extend((0..self.u.len()).filter(|&j| self.passive[j]));
            let Some(z) = self.solve_passive_subproblem() else {
                // entering column is numerically dependent on the passive
                // set; back it out and bar it until the iterate moves
                self.passive[j_star] = false;
                self.banned[j_star] = true;
                return progressed;
            };

            if z.iter().all(|&v| v > 0.0) {
                for (i, &j) in self.idx.iter().enumerate() {
                    self.u[j] = z[i];
                }
                return true;
            }

            // step length toward z that keeps u feasible
            let mut alpha = f64::INFINITY;
            let mut blocking = 0;
            for (i, &j) in self.idx.iter().enumerate() {
                if z[i] <= 0.0 {
                    let denom = self.u[j] - z[i];
                    let t = if denom > 0.0 { self.u[j] / denom } else { 0.0 };
                    if t < alpha {
                        alpha = t;
                        blocking = j;
                    }
                }
            }
            if alpha > 0.0 {
                for (i, &j) in self.idx.iter().enumerate() {
                    self.u[j] += alpha * (z[i] - self.u[j]);
                }
                progressed = true;
            }

            let snap = 1e-13 * (1.0 + self.u.amax());
            let mut removed = false;
            for (i, &j) in self.idx.iter().enumerate() {
                if z[i] <= 0.0 && self.u[j] <= snap {
                    self.u[j] = 0.0;
                    self.passive[j] = false;
                    self.banned[j] = true;
                    removed = true;
                }
            }
            if !removed {
                // numerical safety: force out the blocking variable so the
                // inner loop cannot stall
                self.u[blocking] = 0.0;
                self.passive[blocking] = false;
                self.banned[blocking] = true;
            }
        }
    }

    /// Solves `ata[P, P] z = atd[P]` by Cholesky; `None` when the principal
    /// submatrix is not numerically positive definite.
    fn solve_passive_subproblem(&mut self) -> Option<Vec<f64>> {
        let k = self.idx.len();
        if k == 0 {
            return Some(Vec::new());
        }
        self.sub.clear();
        self.sub.resize(k * k, 0.0);
        self.rhs.clear();
        for (col, &j) in self.idx.iter().enumerate() {
            for (row, &i) in self.idx.iter().enumerate() {
                self.sub[row + col * k] = self.ata[(i, j)];
            }
            self.rhs.push(self.atd[j]);
        }

        let mut diag_max = 0.0f64;
        for i in 0..k {
            diag_max = diag_max.max(self.sub[i + i * k]);
        }
        let pd_floor = 1e-13 * diag_max.max(f64::MIN_POSITIVE);

        // in-place lower Cholesky
        for j in 0..k {
            let mut diag = self.sub[j + j * k];
            for p in 0..j {
                diag -= self.sub[j + p * k] * self.sub[j + p * k];
            }
            if diag <= pd_floor {
                return None;
            }
            let l_jj = diag.sqrt();
            self.sub[j + j * k] = l_jj;
            for i in (j + 1)..k {
                let mut v = self.sub[i + j * k];
                for p in 0..j {
                    v -= self.sub[i + p * k] * self.sub[j + p * k];
                }
                self.sub[i + j * k] = v / l_jj;
            }
        }
        // forward then back substitution
        let mut z = self.rhs.clone();
        for i in 0..k {
            for p in 0..i {
                z[i] -= self.sub[i + p * k] * z[p];
            }
            z[i] /= self.sub[i + i * k];
        }
        for i in (0..k).rev() {
            for p in (i + 1)..k {
                z[i] -= self.sub[p + i * k] * z[p];
            }
            z[i] /= self.sub[i + i * k];
        }
        Some(z)
    }

    fn finish(&self, problem: &NnlsProblem, iterations: usize, scale: f64) -> NnlsSolution {
        let residual = &problem.a * &self.u - &problem.d;
        let gradient = problem.a.tr_mul(&residual);
        let mut violation = 0.0f64;
        for j in 0..self.u.len() {
            if self.passive[j] {
                violation = violation.max(gradient[j].abs());
            } else {
                violation = violation.max(-gradient[j]);
            }
        }
        let active_set = (0..self.u.len()).filter(|&j| !self.passive[j]).collect();
        NnlsSolution {
            u: self.u.clone(),
            residual_norm: residual.norm(),
            active_set,
            iterations,
            kkt_max_violation: if scale > 0.0 {
                violation.max(0.0) / scale
            } else {
                0.0
            },
        }
    }
}

/// One-shot convenience wrapper around [`NnlsSolver::solve`].
pub fn solve(problem: &NnlsProblem, tolerance: f64, max_iter: usize) -> Result<NnlsSolution> {
    NnlsSolver::new().solve(problem, tolerance, max_iter)
}

/// Evaluates `|| A u - d ||_2`.
pub fn objective(problem: &NnlsProblem, u: &DVector<f64>) -> Result<f64> {
    if u.len() != problem.ncols() {
        return Err(SlpError::DimensionMismatch {
            context: "NNLS candidate",
            expected: problem.ncols(),
            actual: u.len(),
        });
    }
    Ok((&problem.a * u - &problem.d).norm())
}
