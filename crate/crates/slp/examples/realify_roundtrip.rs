//! The complex-to-real machinery behind the NNLS reformulation: block
//! stacking, the first-quadrant rotation and why the transmit vector is
//! exactly the NNLS residual.
//!
//! ```bash
//! cargo run --example realify_roundtrip
//! ```

use slp::channel::{draw_channel, zf_precoder};
use slp::constellation::{draw_symbols, make_mpsk};
use slp::nnls::{self, NnlsProblem, NnlsSolver};
use slp::realify::{build_stack, unstack};

fn main() -> slp::Result<()> {
    let n_r = 3;
    let qpsk = make_mpsk(4)?;
    let h = draw_channel(n_r, 5, 4)?;
    let w = zf_precoder(&h)?;
    let s = draw_symbols(&qpsk, n_r, 12);
    let gamma = vec![10f64.powf(0.5); n_r];

    let stack = build_stack(&w, &s, &gamma)?;
    println!(
        "stacked precoder: {}x{} real (from {}x{} complex)",
        stack.w_bar().nrows(),
        stack.w_bar().ncols(),
        w.n_t(),
        w.n_r()
    );
    println!("signs b: {:?}", stack.signs().stacked().as_slice());
    println!(
        "rotated symbol stack (all positive): {:?}",
        stack
            .s_tilde()
            .iter()
            .map(|v| (v * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );

    let problem = NnlsProblem::new(stack.w_tilde().clone(), stack.nnls_target())?;
    let mut solver = NnlsSolver::new();
    let sol = solver.solve(
        &problem,
        nnls::DEFAULT_TOLERANCE,
        nnls::default_max_iter(problem.ncols()),
    )?;

    // x_bar = w_tilde (gamma o s_tilde + u) = A u - d: the NNLS residual IS
    // the transmit stack, so residual_norm^2 is the transmit power
    let x = unstack(&stack.transmit_stack(&sol.u))?;
    println!(
        "transmit power {:.6} = residual^2 {:.6}",
        x.norm_squared(),
        sol.residual_norm * sol.residual_norm
    );
    Ok(())
}
