//! The NNLS kernel on its own: hand-picked corner cases, then a random
//! instance checked against the exhaustive subset-enumeration oracle.
//!
//! ```bash
//! cargo run --example nnls_solver
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp::nnls::{self, NnlsProblem, NnlsSolver};
use slp::selftest::brute_force_nnls;

fn main() -> slp::Result<()> {
    let mut solver = NnlsSolver::new();

    // all-negative target: the origin is optimal
    let p = NnlsProblem::new(DMatrix::identity(2, 2), DVector::from_vec(vec![-1.0, -2.0]))?;
    let sol = solver.solve(&p, nnls::DEFAULT_TOLERANCE, nnls::default_max_iter(2))?;
    println!(
        "identity, d = [-1, -2]: u = {:?}, residual {:.6}",
        sol.u.as_slice(),
        sol.residual_norm
    );

    // mixed signs: coordinate-wise clamp
    let p = NnlsProblem::new(DMatrix::identity(2, 2), DVector::from_vec(vec![3.0, -1.0]))?;
    let sol = solver.solve(&p, nnls::DEFAULT_TOLERANCE, nnls::default_max_iter(2))?;
    println!(
        "identity, d = [3, -1]:  u = {:?}, active set {:?}",
        sol.u.as_slice(),
        sol.active_set
    );

    // a random tall problem, cross-checked against the 2^n oracle
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let a = DMatrix::from_fn(12, 6, |_, _| rng.gen_range(-1.0..1.0));
    let d = DVector::from_fn(12, |_, _| rng.gen_range(-1.0..1.0));
    let p = NnlsProblem::new(a, d)?;
    let sol = solver.solve(&p, nnls::DEFAULT_TOLERANCE, nnls::default_max_iter(6))?;
    let oracle = brute_force_nnls(p.a(), p.d())?;
    println!("random 12x6 problem:");
    println!("  solver objective: {:.12}", sol.residual_norm);
    println!("  oracle objective: {:.12}", oracle.objective);
    println!(
        "  outer iterations: {}, KKT violation: {:.3e}",
        sol.iterations, sol.kkt_max_violation
    );
    println!("  active set {:?} (u pinned at zero there)", sol.active_set);
    Ok(())
}
