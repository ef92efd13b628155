//! Reference implementations and invariant suites used to cross-check the
//! solver and the precoding pipeline at runtime.
//!
//! Everything here deliberately avoids the production code paths:
//! [`brute_force_nnls`] solves the restricted least-squares problem of every
//! support subset through nalgebra's SVD, and [`projected_gradient_nnls`]
//! is a plain accelerated first-order method. Their only contact with the
//! solver under test is the final objective comparison.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_channel, draw_channel, zf_precoder};
use crate::constellation::{draw_symbols, make_mapsk16, make_mpsk, wrap_angle, Constellation};
use crate::error::{Result, SlpError};
use crate::nnls::{self, NnlsProblem, NnlsSolver};
use crate::precode::precode_slot;
use crate::realify::build_stack;

/// Result of the exhaustive support-enumeration oracle.
#[derive(Debug, Clone)]
pub struct BruteForceSolution {
    pub u: DVector<f64>,
    pub objective: f64,
}

/// Exhaustive NNLS oracle: for every subset S of columns solve the
/// unconstrained least-squares problem restricted to S, keep the feasible
/// candidates (all components nonnegative) and return the best objective.
/// The optimum's own support makes it one of the candidates, and every
/// feasible candidate is a feasible point of the NNLS problem, so the
/// minimum over candidates is exactly the NNLS optimum.
///
/// Cost is `2^n` small solves; refuses `n > 20`.
pub fn brute_force_nnls(a: &DMatrix<f64>, d: &DVector<f64>) -> Result<BruteForceSolution> {
    let n = a.ncols();
    if n > 20 {
        return Err(SlpError::InvalidInput(format!(
            "brute-force oracle is exponential; refusing n = {n} > 20"
        )));
    }
    let mut best_u = DVector::zeros(n);
    let mut best_objective = d.norm();

    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let a_s = a.select_columns(support.iter());
        let svd = a_s.svd(true, true);
        let Ok(u_s) = svd.solve(d, 1e-12) else {
            continue;
        };
        if u_s.iter().any(|&v| v < -1e-10) {
            continue;
        }
        let mut u = DVector::zeros(n);
        for (i, &j) in support.iter().enumerate() {
            u[j] = u_s[i].max(0.0);
        }
        let objective = (a * &u - d).norm();
        if objective < best_objective {
            best_objective = objective;
            best_u = u;
        }
    }
    Ok(BruteForceSolution {
        u: best_u,
        objective: best_objective,
    })
}

/// FISTA solve of `min 1/2 || a u - d ||^2` over `u >= 0`; converges to the
/// NNLS optimum for any fixed step `1/L` with `L >= lambda_max(a^T a)`.
pub fn projected_gradient_nnls(
    a: &DMatrix<f64>,
    d: &DVector<f64>,
    iterations: usize,
) -> DVector<f64> {
    let n = a.ncols();
    let ata = a.tr_mul(a);
    let atd = a.tr_mul(d);

    // power iteration for the largest eigenvalue of a^T a
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 1.0;
    for _ in 0..100 {
        let next = &ata * &v;
        lambda = next.norm();
        if lambda == 0.0 {
            return DVector::zeros(n);
        }
        v = next / lambda;
    }
    let step = 1.0 / (lambda * 1.01);

    let zeros = DVector::zeros(n);
    let mut u_prev = DVector::<f64>::zeros(n);
    let mut y = DVector::<f64>::zeros(n);
    let mut t_prev = 1.0f64;
    for _ in 0..iterations {
        let gradient = &ata * &y - &atd;
        let u_next = (&y - gradient * step).sup(&zeros);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt());
        y = &u_next + (&u_next - &u_prev) * ((t_prev - 1.0) / t_next);
        u_prev = u_next;
        t_prev = t_next;
    }
    u_prev
}

/// One named check of the self-test suite.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    /// Random NNLS instances for the oracle-equivalence check.
    pub problems: usize,
    /// Pass/fail tolerance for objective gaps and KKT violations.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            problems: 200,
            tolerance: 1e-8,
            seed: 0x5EED,
        }
    }
}

fn random_problem(rng: &mut ChaCha8Rng, max_n: usize) -> NnlsProblem {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(n..=3 * n);
    let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    let d = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    NnlsProblem::new(a, d).expect("finite inputs")
}

/// Runs the oracle-equivalence and invariant suites; every check records a
/// pass/fail with detail.
pub fn run(opts: &SelftestOptions) -> SelftestReport {
    let checks = vec![
        oracle_equivalence(opts),
        dominance_and_determinism(opts),
        monotone_descent(opts),
        stacking_identities(opts),
        sector_containment(opts),
        noiseless_margins(opts),
    ];
    SelftestReport { checks }
}

fn oracle_equivalence(opts: &SelftestOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut solver = NnlsSolver::new();
    let mut worst_gap = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..opts.problems {
        let p = random_problem(&mut rng, 8);
        let solution = match solver.solve(
            &p,
            nnls::DEFAULT_TOLERANCE,
            nnls::default_max_iter(p.ncols()),
        ) {
            Ok(s) => s,
            Err(e) => {
                return CheckOutcome {
                    name: "nnls-oracle-equivalence",
                    passed: false,
                    detail: format!("solver error: {e}"),
                }
            }
        };
        let oracle = match brute_force_nnls(p.a(), p.d()) {
            Ok(o) => o,
            Err(e) => {
                return CheckOutcome {
                    name: "nnls-oracle-equivalence",
                    passed: false,
                    detail: format!("oracle error: {e}"),
                }
            }
        };
        let gap = (solution.residual_norm - oracle.objective).abs() / oracle.objective.max(1.0);
        worst_gap = worst_gap.max(gap);
        worst_kkt = worst_kkt.max(solution.kkt_max_violation);
        if gap > opts.tolerance || solution.kkt_max_violation > opts.tolerance {
            failures += 1;
        }
    }
    CheckOutcome {
        name: "nnls-oracle-equivalence",
        passed: failures == 0,
        detail: format!(
            "{} problems, {} failures, worst objective gap {:.3e}, worst KKT {:.3e}",
            opts.problems, failures, worst_gap, worst_kkt
        ),
    }
}

fn dominance_and_determinism(opts: &SelftestOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xD0D0);
    let mut solver = NnlsSolver::new();
    for i in 0..100usize {
        let p = random_problem(&mut rng, 10);
        let max_iter = nnls::default_max_iter(p.ncols());
        let a = solver.solve(&p, nnls::DEFAULT_TOLERANCE, max_iter);
        let b = solver.solve(&p, nnls::DEFAULT_TOLERANCE, max_iter);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                if a.u != b.u || a.iterations != b.iterations {
                    return CheckOutcome {
                        name: "nnls-dominance-determinism",
                        passed: false,
                        detail: format!("instance {i}: repeated solve differed"),
                    };
                }
                if a.residual_norm > p.d().norm() + 1e-12 || a.u.iter().any(|&v| v < 0.0) {
                    return CheckOutcome {
                        name: "nnls-dominance-determinism",
                        passed: false,
                        detail: format!("instance {i}: dominance or feasibility violated"),
                    };
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                return CheckOutcome {
                    name: "nnls-dominance-determinism",
                    passed: false,
                    detail: format!("instance {i}: {e}"),
                }
            }
        }
    }
    CheckOutcome {
        name: "nnls-dominance-determinism",
        passed: true,
        detail: "100 instances: feasible, never worse than u = 0, bitwise repeatable".to_string(),
    }
}

fn monotone_descent(opts: &SelftestOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x3333);
    let mut solver = NnlsSolver::new();
    for i in 0..50usize {
        let p = random_problem(&mut rng, 10);
        let traced = solver.solve_traced(&p, nnls::DEFAULT_TOLERANCE, nnls::default_max_iter(10));
        let Ok((_, trace)) = traced else {
            return CheckOutcome {
                name: "nnls-monotone-descent",
                passed: false,
                detail: format!("instance {i} failed to solve"),
            };
        };
        let mut prev = p.d().norm();
        for &r in &trace {
            if r > prev + 1e-12 * prev.max(1.0) {
                return CheckOutcome {
                    name: "nnls-monotone-descent",
                    passed: false,
                    detail: format!("instance {i}: residual rose {prev} -> {r}"),
                };
            }
            prev = r;
        }
    }
    CheckOutcome {
        name: "nnls-monotone-descent",
        passed: true,
        detail: "50 instances: outer residuals non-increasing".to_string(),
    }
}

fn stacking_identities(opts: &SelftestOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7777);
    let qpsk = make_mpsk(4).expect("valid order");
    for i in 0..100usize {
        let n_r = rng.gen_range(1..5);
        let n_t = n_r + rng.gen_range(0..4);
        let Ok(h) = draw_channel(n_r, n_t, rng.gen()) else {
            continue;
        };
        let Ok(w) = zf_precoder(&h) else { continue };
        let s = draw_symbols(&qpsk, n_r, rng.gen());
        let gamma = vec![rng.gen_range(0.5..4.0); n_r];
        let stack = match build_stack(&w, &s, &gamma) {
            Ok(st) => st,
            Err(e) => {
                return CheckOutcome {
                    name: "realify-identities",
                    passed: false,
                    detail: format!("instance {i}: {e}"),
                }
            }
        };
        // norm preservation on a random real vector
        let v = DVector::from_fn(2 * n_r, |_, _| rng.gen_range(-2.0..2.0));
        let real_norm = (stack.w_bar() * &v).norm();
        let v_complex = crate::realify::unstack(&v).expect("even length");
        let complex_norm = (w.matrix() * v_complex).norm();
        // rotation cancellation
        let via_tilde = stack.w_tilde() * stack.gamma_bar().component_mul(stack.s_tilde());
        let via_bar = stack.w_bar() * stack.gamma_bar().component_mul(stack.s_bar());
        let scale = complex_norm.max(1.0);
        if (real_norm - complex_norm).abs() > 1e-12 * scale
            || (via_tilde - via_bar).norm() > 1e-12 * scale
            || stack.s_tilde().iter().any(|&x| x <= 0.0)
        {
            return CheckOutcome {
                name: "realify-identities",
                passed: false,
                detail: format!("instance {i}: stacking identity violated"),
            };
        }
    }
    CheckOutcome {
        name: "realify-identities",
        passed: true,
        detail: "100 instances: norm preservation, rotation cancellation, positive s~".to_string(),
    }
}

fn sector_containment(opts: &SelftestOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xAAAA);
    for order in [8usize, 16, 32] {
        let c = make_mpsk(order).expect("valid order");
        for i in 0..200usize {
            let s = draw_symbols(&c, 2, rng.gen());
            let s_tilde = DVector::from_fn(4, |j, _| {
                let sym = s.entries()[j % 2];
                if j < 2 {
                    sym.re.abs()
                } else {
                    sym.im.abs()
                }
            });
            let u = DVector::from_fn(4, |_, _| rng.gen_range(0.0..3.0));
            let (corrected, _) = crate::precode::correct_mpsk(&u, &s_tilde, &c);
            for k in 0..2 {
                let (ci, cq) = (corrected[k], corrected[k + 2]);
                if ci < 0.0 || cq < 0.0 {
                    return CheckOutcome {
                        name: "sector-containment",
                        passed: false,
                        detail: format!("order {order}, instance {i}: negative output"),
                    };
                }
                if ci > 0.0 || cq > 0.0 {
                    let dir = cq.atan2(ci);
                    let theta = s_tilde[k + 2].atan2(s_tilde[k]);
                    if dir < theta - c.theta0() - 1e-9 || dir > theta + c.theta0() + 1e-9 {
                        return CheckOutcome {
                            name: "sector-containment",
                            passed: false,
                            detail: format!("order {order}, instance {i}: direction escaped"),
                        };
                    }
                }
            }
        }
    }
    CheckOutcome {
        name: "sector-containment",
        passed: true,
        detail: "600 corrections across M in {8, 16, 32} stayed in sector".to_string(),
    }
}

fn noiseless_margins(opts: &SelftestOptions) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xBEEF);
    let gamma_amp = 10f64.powf(10.0 / 20.0);
    let constellations: Vec<(String, Constellation)> = vec![
        ("qpsk".to_string(), make_mpsk(4).expect("valid")),
        ("8psk".to_string(), make_mpsk(8).expect("valid")),
        ("16apsk".to_string(), make_mapsk16(2.7).expect("valid")),
    ];
    for (token, c) in &constellations {
        for i in 0..100usize {
            let n_r = rng.gen_range(2..5);
            let n_t = n_r + rng.gen_range(0..3);
            let Ok(h) = draw_channel(n_r, n_t, rng.gen()) else {
                continue;
            };
            let Ok(w) = zf_precoder(&h) else { continue };
            let s = draw_symbols(c, n_r, rng.gen());
            let gamma = vec![gamma_amp; n_r];
            let outcome = (|| -> Result<Option<String>> {
                let slot = precode_slot(&h, &w, &s, c, &gamma)?;
                let y = apply_channel(&h, &slot.x, 0.0, 0)?;
                for k in 0..n_r {
                    let sym = s.entries()[k];
                    let target = sym * gamma_amp;
                    let br = if sym.re > 0.0 { 1.0 } else { -1.0 };
                    let bi = if sym.im > 0.0 { 1.0 } else { -1.0 };
                    if br * y[k].re < br * target.re - 1e-9 || bi * y[k].im < bi * target.im - 1e-9
                    {
                        return Ok(Some(format!("user {k}: amplitude margin violated")));
                    }
                    match token.as_str() {
                        "16apsk" => {
                            if !c.is_top_ring(s.source_indices()[k])
                                && (y[k] - target).norm() > 1e-9
                            {
                                return Ok(Some(format!("user {k}: inner ring not exact")));
                            }
                        }
                        _ => {
                            let offset = wrap_angle(y[k].arg() - sym.arg()).abs();
                            if offset > c.theta0() + 1e-9 {
                                return Ok(Some(format!("user {k}: sector violated")));
                            }
                        }
                    }
                }
                Ok(None)
            })();
            match outcome {
                Ok(None) => {}
                Ok(Some(msg)) => {
                    return CheckOutcome {
                        name: "noiseless-margins",
                        passed: false,
                        detail: format!("{token} instance {i}: {msg}"),
                    }
                }
                Err(e) => {
                    return CheckOutcome {
                        name: "noiseless-margins",
                        passed: false,
                        detail: format!("{token} instance {i}: {e}"),
                    }
                }
            }
        }
    }
    CheckOutcome {
        name: "noiseless-margins",
        passed: true,
        detail: "300 random slots met every receive constraint".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_handles_trivial_cases() {
        let a = DMatrix::<f64>::identity(2, 2);
        let d = DVector::from_vec(vec![-1.0, -2.0]);
        let sol = brute_force_nnls(&a, &d).unwrap();
        assert_eq!(sol.u, DVector::zeros(2));
        assert!((sol.objective - 5.0f64.sqrt()).abs() < 1e-12);

        let d = DVector::from_vec(vec![3.0, -1.0]);
        let sol = brute_force_nnls(&a, &d).unwrap();
        assert!((sol.u[0] - 3.0).abs() < 1e-10);
        assert_eq!(sol.u[1], 0.0);
    }

    #[test]
    fn brute_force_refuses_large_problems() {
        let a = DMatrix::<f64>::zeros(4, 21);
        let d = DVector::zeros(4);
        assert!(brute_force_nnls(&a, &d).is_err());
    }

    #[test]
    fn projected_gradient_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let a = DMatrix::from_fn(8, 4, |_, _| rng.gen_range(-1.0..1.0));
            let d = DVector::from_fn(8, |_, _| rng.gen_range(-1.0..1.0));
            let pg = projected_gradient_nnls(&a, &d, 50_000);
            let bf = brute_force_nnls(&a, &d).unwrap();
            let pg_obj = (&a * &pg - &d).norm();
            assert!(
                (pg_obj - bf.objective).abs() < 1e-6 * bf.objective.max(1.0),
                "pg {pg_obj} vs bf {}",
                bf.objective
            );
        }
    }

    #[test]
    fn default_suite_passes() {
        let report = run(&SelftestOptions {
            problems: 30,
            ..SelftestOptions::default()
        });
        for check in &report.checks {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn absurd_tolerance_fails_the_suite() {
        let report = run(&SelftestOptions {
            problems: 20,
            tolerance: 1e-30,
            ..SelftestOptions::default()
        });
        assert!(!report.passed());
    }
}
