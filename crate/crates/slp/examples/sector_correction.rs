//! 8-PSK detection-region correction in isolation: a perturbation that
//! would rotate the received symbol out of its sector is clamped back onto
//! the sector edge.
//!
//! ```bash
//! cargo run --example sector_correction
//! ```

use nalgebra::DVector;
use slp::constellation::make_mpsk;
use slp::precode::correct_mpsk;

fn main() -> slp::Result<()> {
    let c = make_mpsk(8)?;
    println!(
        "8-PSK sector half-angle: {:.2} deg",
        c.theta0().to_degrees()
    );

    // one user whose rotated symbol sits at 67.5 deg; its sector spans
    // [45, 90] deg
    let theta = 3.0 * std::f64::consts::PI / 8.0;
    let s_tilde = DVector::from_vec(vec![theta.cos(), theta.sin()]);

    let cases = [
        ("inside the sector", 0.5, 1.2),
        ("below the lower edge", 1.0, 0.2),
        ("pure in-phase push", 1.0, 0.0),
        ("zero perturbation", 0.0, 0.0),
    ];
    for (label, u_i, u_q) in cases {
        let u = DVector::from_vec(vec![u_i, u_q]);
        let (corrected, flags) = correct_mpsk(&u, &s_tilde, &c);
        let dir = |i: f64, q: f64| {
            if i == 0.0 && q == 0.0 {
                f64::NAN
            } else {
                q.atan2(i).to_degrees()
            }
        };
        println!(
            "{label:22} raw u = ({u_i:.2}, {u_q:.2}) at {:6.1} deg -> ({:.4}, {:.4}) at {:6.1} deg  [{:?}]",
            dir(u_i, u_q),
            corrected[0],
            corrected[1],
            dir(corrected[0], corrected[1]),
            flags[0]
        );
    }
    println!("sector for this symbol: [45.0, 90.0] deg");
    Ok(())
}
