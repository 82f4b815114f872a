//! Probe the connecting orbits that leave the trivial solution of the
//! Cahn-Hilliard model above its first crossing: forward orbits along the
//! unstable directions descend the Lyapunov functional into the nontrivial
//! equilibria.
//!
//! ```bash
//! cargo run --example heteroclinic_probe
//! ```

use bifurcade::continuation::{heteroclinic_probe, ProbeKind, ProbeLimit};
use bifurcade::model::{build_cahn_hilliard_1d, lyapunov_value};

fn main() -> bifurcade::Result<()> {
    let model = build_cahn_hilliard_1d(std::f64::consts::PI, 0.0, 1.0, 6)?;
    let lambda = 1.5;
    println!("J(0) = {}", lyapunov_value(&model, lambda, &[0.0; 6])?);

    let probe = heteroclinic_probe(&model, lambda, 4, 400.0)?;
    println!("probe at lambda = {lambda}: {}", probe.verdict);
    for orbit in &probe.found {
        let kind = match orbit.kind {
            ProbeKind::SigmaMinus => "sigma- (alpha limit 0)",
            ProbeKind::SigmaPlus => "sigma+ (omega limit 0, reversed run)",
        };
        match &orbit.limit {
            ProbeLimit::Converged { point, j } => println!(
                "  mode {} sign {:+}: {kind} -> a1 = {:+.5}, J = {:+.6}",
                orbit.mode, orbit.sign, point[0], j
            ),
            ProbeLimit::Diverged { t } => println!(
                "  mode {} sign {:+}: {kind} -> diverged at t = {t:.2} (no equilibrium above J = 0)",
                orbit.mode, orbit.sign
            ),
            ProbeLimit::TimedOut => {
                println!("  mode {} sign {:+}: {kind} -> no limit within the horizon", orbit.mode, orbit.sign)
            }
        }
    }
    println!("\nthe descending connections end strictly below J(0) = 0,");
    println!("the ordering the Lyapunov functional forces on the connecting structure.");

    // below the first crossing there is nothing to probe
    let empty = heteroclinic_probe(&model, 0.5, 4, 50.0)?;
    println!("\nat lambda = 0.5: {}", empty.note.unwrap_or_default());
    Ok(())
}
