//! Compute the center-manifold reduction of the Cahn-Hilliard model at its
//! first crossing and verify the invariance residual decays at the expected
//! order.
//!
//! ```bash
//! cargo run --example reduce_center_manifold
//! ```

use bifurcade::center_manifold::{invariance_residual, reduce};
use bifurcade::model::build_cahn_hilliard_1d;
use bifurcade::spectrum::crossing_data;

fn main() -> bifurcade::Result<()> {
    let (b2, b3) = (0.9, 1.0);
    let model = build_cahn_hilliard_1d(std::f64::consts::PI, b2, b3, 8)?;
    let crossing = crossing_data(&model, 1.0, 1e-9)?;
    let reduced = reduce(&model, &crossing, 3)?;

    println!("reduction at lambda0 = 1 (center mode 1), order 3, b2 = {b2}, b3 = {b3}:");
    println!(
        "  w' = {:.6} nu w + [{}]",
        reduced.unfolding[0], reduced.nonlinear[0]
    );
    println!(
        "  effective cubic coefficient: {:.6}  (closed form b2^2/6 - 3 b3/4 = {:.6})",
        reduced.nonlinear[0].coefficient(&[3]),
        b2 * b2 / 6.0 - 0.75 * b3
    );

    println!("\nslave graph (leading coefficients):");
    for (s, xi) in reduced.slaves.iter().take(4) {
        println!("  a_{s} = xi_{s}(w) = {xi}");
    }

    println!("\ninvariance residual (should decay like h^4 for order 3):");
    let mut prev = None;
    for h in [0.2, 0.1, 0.05, 0.025] {
        let r = invariance_residual(&model, &reduced, h, 8)?;
        match prev {
            Some(p) => println!("  h = {h:<6}: {r:.3e}   ratio {:.1}", p / r),
            None => println!("  h = {h:<6}: {r:.3e}"),
        }
        prev = Some(r);
    }
    Ok(())
}
