//! Define a model as a JSON document, load it, and run the global pipeline
//! on it. The model here has the crafted polynomial linear part
//! beta(lambda) = (lambda - 1)(lambda - 2), so its nontrivial branch leaves
//! the trivial solution at lambda = 1 and reconnects at lambda = 2: the
//! global alternative where the branch meets another bifurcation point.
//!
//! ```bash
//! cargo run --example custom_model_file
//! ```

use bifurcade::continuation::{global_report, StepConfig, Termination, Window};
use bifurcade::model::load_model_file;

const MODEL: &str = r#"{
  "label": "reconnect",
  "dim": 1,
  "mu": [1.0],
  "linear": { "Polynomial": { "coeffs": [[2.0, -3.0, 1.0]] } },
  "q": [],
  "c": [ { "k": 1, "i": 1, "j": 1, "l": 1, "value": -1.0 } ],
  "gradient_info": { "potential": "ScalarPolynomial", "cube_integrals": null }
}"#;

fn main() -> bifurcade::Result<()> {
    let dir = std::env::temp_dir().join("bifurcade_example_model");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("reconnect.json");
    std::fs::write(&path, MODEL)?;

    let model = load_model_file(&path)?;
    println!(
        "loaded '{}' with {} mode(s) from {}",
        model.label,
        model.dim(),
        path.display()
    );
    println!(
        "beta(1.5) = {:+.4} (negative between the two roots)",
        model.beta(1, 1.5)
    );

    let window = Window {
        lambda_lo: 0.0,
        lambda_hi: 3.0,
        v_norm_max: 10.0,
    };
    let report = global_report(&model, &window, 0.05, &StepConfig::default())?;
    for b in &report.branches {
        let Some(branch) = &b.branch else { continue };
        println!("\nbranch from lambda0 = {}:", b.lambda0);
        println!("  termination: {:?}", branch.termination);
        println!("  verdict: {}", b.alternative.as_deref().unwrap_or("-"));
        let peak = branch
            .points
            .iter()
            .map(|p| p.a[0].abs())
            .fold(0.0f64, f64::max);
        println!("  peak amplitude {peak:.4} (closed form: 1/2 at lambda = 3/2)");
        if let Termination::ReconnectTrivial(l1) = branch.termination {
            println!("  reconnects to the trivial solution at lambda1 = {l1:.6}");
        }
    }
    println!("\nthe branch law a^2 = (lambda-1)(2-lambda) holds along every point");
    println!("(checked to 1e-8 in the acceptance suite).");
    Ok(())
}
