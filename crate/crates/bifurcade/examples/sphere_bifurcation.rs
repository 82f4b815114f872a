//! A crossing number of two: the duplicate-eigenvalue model bifurcates an
//! invariant circle. Compute the bifurcating set, its radius along 64 rays,
//! and the Conley index of the annulus block that isolates it.
//!
//! ```bash
//! cargo run --example sphere_bifurcation
//! ```

use bifurcade::bifurcation::{bifurcating_set, index_of_bifurcating_set};
use bifurcade::center_manifold::reduce;
use bifurcade::conley::BoxRegion;
use bifurcade::model::{build_custom, CubicEntry, CustomModelSpec, LinearPart};
use bifurcade::spectrum::crossing_data;

fn main() -> bifurcade::Result<()> {
    // two modes with the same eigenvalue and the rotationally symmetric
    // cubic w' = nu w - |w|^2 w
    let model = build_custom(CustomModelSpec {
        label: "duplicate-mu planar".into(),
        mu: vec![1.0, 1.0],
        linear: LinearPart::Affine {
            c0: vec![1.0, 1.0],
            c1: vec![1.0, 1.0],
        },
        quadratic: vec![],
        cubic: vec![
            CubicEntry {
                k: 1,
                i: 1,
                j: 1,
                l: 1,
                value: -1.0,
            },
            CubicEntry {
                k: 1,
                i: 1,
                j: 2,
                l: 2,
                value: -1.0 / 3.0,
            },
            CubicEntry {
                k: 2,
                i: 2,
                j: 2,
                l: 2,
                value: -1.0,
            },
            CubicEntry {
                k: 2,
                i: 1,
                j: 1,
                l: 2,
                value: -1.0 / 3.0,
            },
        ],
        gradient_info: None,
    })?;

    let crossing = crossing_data(&model, 1.0, 1e-9)?;
    println!(
        "crossing at lambda0 = 1 with n = {} (duplicate eigenvalue)",
        crossing.n
    );

    let reduced = reduce(&model, &crossing, 3)?;
    let search = BoxRegion::square((-1.0, -1.0), (1.0, 1.0))?;
    let lambda = 1.1;
    let report = bifurcating_set(&model, &crossing, &reduced, lambda, &search)?;

    println!("bifurcating set at lambda = {lambda}: {:?}", report.kind);
    let radii: Vec<f64> = report
        .sphere_samples
        .iter()
        .map(|s| (s[0] * s[0] + s[1] * s[1]).sqrt())
        .collect();
    let (min, max) = radii.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| {
        (lo.min(r), hi.max(r))
    });
    println!(
        "  circle radius over {} rays: [{min:.6}, {max:.6}]  (sqrt(nu) = {:.6})",
        radii.len(),
        0.1f64.sqrt()
    );
    println!("  Hausdorff semidistance to 0: {:.6}", report.d_h_to_zero);

    let (index, nontrivial) =
        index_of_bifurcating_set(&model, &crossing, &reduced, lambda, &search)?;
    println!(
        "  Conley index of the circle: betti {:?}, nontrivial = {nontrivial}",
        index.betti
    );
    println!("  (the attracting circle carries ranks in degrees 0 and 1)");
    Ok(())
}
