//! Classify the trivial solution on the center manifold for three model
//! families: a supercritical pitchfork, a subcritical one, and a
//! transcritical crossing, then map each onto the scalar static-bifurcation
//! alternatives.
//!
//! ```bash
//! cargo run --example classify_bifurcation
//! ```

use bifurcade::bifurcation::{classify_static_n1, classify_trivial};
use bifurcade::center_manifold::reduce;
use bifurcade::model::{
    build_cahn_hilliard_1d, build_custom, CustomModelSpec, LinearPart, QuadEntry, SpectralModel,
};
use bifurcade::spectrum::crossing_data;

fn transcritical() -> bifurcade::Result<SpectralModel> {
    build_custom(CustomModelSpec {
        label: "transcritical".into(),
        mu: vec![1.0],
        linear: LinearPart::Affine {
            c0: vec![0.0],
            c1: vec![1.0],
        },
        quadratic: vec![QuadEntry {
            k: 1,
            i: 1,
            j: 1,
            value: -1.0,
        }],
        cubic: vec![],
        gradient_info: None,
    })
}

fn report(name: &str, model: &SpectralModel, lambda0: f64) -> bifurcade::Result<()> {
    let crossing = crossing_data(model, lambda0, 1e-9)?;
    let reduced = reduce(model, &crossing, 3)?;
    let class = classify_trivial(&reduced, 1e-9);
    println!("{name}:");
    println!("  verdict on the center manifold: {:?}", class.verdict);
    println!("  witness: {:?}", class.witness);
    let (alt, caveat) = classify_static_n1(&crossing, &reduced)?;
    println!("  static alternative: {alt:?}");
    if let Some(c) = caveat {
        println!("  caveat: {c}");
    }
    println!();
    Ok(())
}

fn main() -> bifurcade::Result<()> {
    let pi = std::f64::consts::PI;
    // b2 = 0: the effective cubic is -3/4 b3 < 0
    report(
        "Cahn-Hilliard, b2 = 0 (supercritical pitchfork)",
        &build_cahn_hilliard_1d(pi, 0.0, 1.0, 6)?,
        1.0,
    )?;
    // b2 = 3: b2^2/6 - 3/4 = +3/4 > 0 flips the picture
    report(
        "Cahn-Hilliard, b2 = 3 (subcritical: repeller on the center manifold)",
        &build_cahn_hilliard_1d(pi, 3.0, 1.0, 6)?,
        1.0,
    )?;
    // leading even degree: neither attractor nor repeller, still isolated
    report("transcritical normal form", &transcritical()?, 0.0)?;
    Ok(())
}
