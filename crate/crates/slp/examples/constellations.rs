//! Tour of the supported symbol alphabets and their precoder-facing
//! geometry: point layout, detection half-angles and ring structure.
//!
//! ```bash
//! cargo run --example constellations
//! ```

use slp::constellation::{make_mapsk16, make_mpsk};

fn main() -> slp::Result<()> {
    for order in [4usize, 8] {
        let c = make_mpsk(order)?;
        println!("{order}-PSK:");
        println!("  average energy: {:.12}", c.average_energy());
        println!("  detection half-angle: {:.4} deg", c.theta0().to_degrees());
        for (i, p) in c.points().iter().enumerate() {
            println!(
                "  point {i:2}: {:+.4}{:+.4}i  (angle {:7.2} deg, |p| = {:.4})",
                p.re,
                p.im,
                p.arg().to_degrees(),
                p.norm()
            );
        }
        println!();
    }

    let c = make_mapsk16(2.7)?;
    println!("16-APSK (ring ratio 2.7):");
    println!("  average energy: {:.12}", c.average_energy());
    println!("  ring radii: {:?}", c.ring_radii());
    println!("  top ring power P_t: {:.6}", c.top_ring_power());
    println!(
        "  top-ring detection half-angle: {:.4} deg",
        c.theta0().to_degrees()
    );
    for (i, p) in c.points().iter().enumerate() {
        println!(
            "  point {i:2}: ring {}  {:+.4}{:+.4}i  (angle {:7.2} deg)",
            c.ring_index(i),
            p.re,
            p.im,
            p.arg().to_degrees()
        );
    }
    Ok(())
}
