//! Trace every bifurcation branch of the Cahn-Hilliard model over a window
//! and print the global verdicts plus the bifurcation-diagram data.
//!
//! ```bash
//! cargo run --example global_branches
//! ```

use bifurcade::continuation::{global_report, StepConfig, Window};
use bifurcade::model::build_cahn_hilliard_1d;

fn main() -> bifurcade::Result<()> {
    let model = build_cahn_hilliard_1d(std::f64::consts::PI, 0.0, 1.0, 8)?;
    let window = Window {
        lambda_lo: 0.0,
        lambda_hi: 12.0,
        v_norm_max: 50.0,
    };
    let report = global_report(&model, &window, 0.05, &StepConfig::default())?;

    println!(
        "window [0, 12] x {{ |a|_V <= 50 }}: {} crossings",
        report.crossings.len()
    );
    for b in &report.branches {
        match (&b.branch, &b.error) {
            (Some(branch), _) => {
                let last = branch.points.last().unwrap();
                println!(
                    "  branch from lambda0 = {:<4} (m = {}): {} points, ends {:?}",
                    b.lambda0,
                    b.m,
                    branch.points.len(),
                    branch.termination
                );
                println!("    verdict: {}", b.alternative.as_deref().unwrap_or("-"));
                println!(
                    "    endpoint: lambda = {:.3}, |a|_V = {:.4}, unstable modes = {}",
                    last.lambda, last.v_norm, last.n_unstable
                );
                if !branch.secondary_bifurcations.is_empty() {
                    let lambdas: Vec<f64> =
                        branch.secondary_bifurcations.iter().map(|s| s.1).collect();
                    println!("    stability changes along the branch near lambda = {lambdas:.3?}");
                }
            }
            (None, Some(e)) => println!("  branch from lambda0 = {}: failed ({e})", b.lambda0),
            _ => {}
        }
    }
    println!(
        "\nbranch extent proxies: lambda in [{:.3}, {:.3}]",
        report.lambda_min.unwrap_or(f64::NAN),
        report.lambda_max.unwrap_or(f64::NAN)
    );
    println!("note: {}", report.scope_note);

    // diagram rows for external plotting
    println!("\nbifurcation diagram sample rows (lambda, |a|_V) of branch 1:");
    if let Some(branch) = report.branches[0].branch.as_ref() {
        for p in branch.points.iter().step_by(branch.points.len() / 8 + 1) {
            println!("  {:>7.4}  {:>8.5}", p.lambda, p.v_norm);
        }
    }
    Ok(())
}
