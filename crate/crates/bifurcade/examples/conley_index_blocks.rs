//! Build isolating blocks for the basic hyperbolic fields, compute their
//! homology Conley indices, and exercise the wedge/suspension algebra.
//!
//! ```bash
//! cargo run --example conley_index_blocks
//! ```

use bifurcade::conley::{
    build_isolating_block, relative_betti, suspend, wedge, BoxRegion, ConleyIndex,
};

fn show(index: &ConleyIndex) -> String {
    if index.trivial {
        return "0-bar".into();
    }
    let parts: Vec<String> = index
        .betti
        .iter()
        .map(|(d, r)| format!("{d}:{r}"))
        .collect();
    format!("betti {{{}}}", parts.join(", "))
}

fn main() -> bifurcade::Result<()> {
    let region = BoxRegion::square((-1.0, -1.0), (1.0, 1.0))?;
    println!("planar hyperbolic equilibria, box [-1,1]^2, grid 8x8:");
    for (name, sx, sy) in [
        ("attractor ", -1.0, -1.0),
        ("saddle    ", 1.0, -1.0),
        ("repeller  ", 1.0, 1.0),
    ] {
        let block = build_isolating_block(
            move |x: &[f64]| vec![sx * x[0], sy * x[1]],
            &region,
            &[8, 8],
        )?;
        let index = relative_betti(&block);
        println!(
            "  {name} exit faces {:>2}, ingress {:>2}  ->  {}",
            block.faces_exit.len(),
            block.faces_ingress.len(),
            show(&index)
        );
    }

    // a scalar block around one equilibrium of the reduced pitchfork
    let nu = 0.1;
    let field = move |x: &[f64]| vec![nu * x[0] - 0.75 * x[0] * x[0] * x[0]];
    let w_star = (4.0 * nu / 3.0f64).sqrt();
    let block = build_isolating_block(field, &BoxRegion::interval(0.2, 0.6)?, &[4])?;
    let single = relative_betti(&block);
    println!(
        "\nreduced pitchfork at nu = {nu}: block around w* = {w_star:.4} -> {}",
        show(&single)
    );

    // both equilibria together: wedge of two attractor indices
    let pair = wedge(&single, &single);
    println!("two symmetric attractors wedge to {}", show(&pair));
    println!(
        "suspended by m = 1 (one strongly unstable mode): {}",
        show(&suspend(&pair, 1))
    );

    // algebra identities
    let s0 = ConleyIndex::sigma(0);
    assert_eq!(suspend(&s0, 3), ConleyIndex::sigma(3));
    assert_eq!(wedge(&pair, &ConleyIndex::trivial_index()), pair);
    println!("\nidentities: Sigma^0 smash Sigma^3 = Sigma^3, i wedge 0-bar = i  (checked)");
    Ok(())
}
