//! Local bifurcation classification at a crossing.
//!
//! On the center manifold the trivial equilibrium is an attractor, a
//! repeller, or neither; the leading terms of the reduced field decide
//! which (with a numerical flow confirmation in the planar case). The
//! bifurcating invariant set on the predicted side(s) of the crossing is
//! then computed explicitly: equilibria of the reduced field, and in the
//! attractor/repeller case the invariant topological sphere realized as the
//! boundary of the attraction basin of the origin under the appropriate
//! flow direction. Conley indices of the bifurcating set come from grid
//! blocks in reduced coordinates, suspended by the unstable dimension of
//! the crossing.

use crate::center_manifold::{evaluate_reduced, ReducedField};
use crate::conley::{
    build_block_with_hole, build_isolating_block, relative_betti, suspend, wedge, BoxRegion,
    ConleyIndex,
};
use crate::error::{Error, Result};
use crate::model::SpectralModel;
use crate::spectrum::CrossingData;
use serde::{Deserialize, Serialize};

/// Stability threshold on reduced Jacobian eigenvalues.
pub const STABILITY_EIG_TOL: f64 = 1e-8;
/// Newton deduplication radius for reduced equilibria.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Points closer to the origin than this are treated as the trivial branch.
pub const ZERO_EXCLUSION: f64 = 1e-6;

/// Verdict on the trivial equilibrium restricted to the center manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    AttractorOnCenter,
    RepellerOnCenter,
    /// Neither attractor nor repeller, but still isolated (leading term of
    /// even degree / mixed radial signs).
    NeitherIsolated,
    /// All reduced coefficients through the computed order vanish; nothing
    /// can be certified at this order.
    Unresolved,
}

/// Evidence backing a [`Verdict`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    LeadingTerm {
        degree: u32,
        coefficient: f64,
    },
    RadialSigns {
        degree: u32,
        negative: usize,
        positive: usize,
        confirmed_by_flow: bool,
    },
    AllVanish {
        through_order: u32,
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialClassification {
    pub verdict: Verdict,
    pub witness: Witness,
    pub order_used: u32,
}

/// Shape of the computed bifurcating invariant set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvariantSetKind {
    Empty,
    EquilibriumPoints,
    SphereBoundary,
    Unresolved,
}

/// A reduced-coordinate equilibrium with its stability data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedEquilibrium {
    pub w: Vec<f64>,
    /// Number of reduced Jacobian eigenvalues with real part above the
    /// stability threshold.
    pub unstable: usize,
    /// True when every eigenvalue real part is below minus the threshold.
    pub stable: bool,
}

/// The computed bifurcating set `K_lambda` at one parameter value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantSetReport {
    pub lambda: f64,
    pub kind: InvariantSetKind,
    pub points: Vec<ReducedEquilibrium>,
    /// Basin-boundary samples: the two endpoints in the scalar case, a
    /// closed polyline winding once around the origin in the planar case.
    pub sphere_samples: Vec<Vec<f64>>,
    /// The equilibria lifted to full mode space through the slave graph.
    pub lifted_points: Vec<Vec<f64>>,
    /// `sup` distance of the set samples to the origin (Hausdorff
    /// semidistance to the trivial equilibrium).
    pub d_h_to_zero: f64,
}

/// The three alternatives for static bifurcation at a scalar crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StaticAlternative {
    /// Nontrivial equilibria may accumulate at zero at lambda0 itself;
    /// vanishing through order p is evidence, not proof.
    AccumulatingNontrivialEquilibria,
    /// One-sided bifurcation with at least two nontrivial solutions.
    OneSidedTwoSolutions,
    /// Two-sided bifurcation with at least one nontrivial solution per side.
    TwoSidedOneSolution,
}

/// `sup_{a in A} dist(a, B)`; empty `A` gives 0 by convention, empty `B`
/// (with nonempty `A`) gives infinity.
pub fn hausdorff_semidistance(set_a: &[Vec<f64>], set_b: &[Vec<f64>]) -> f64 {
    set_a
        .iter()
        .map(|a| {
            set_b
                .iter()
                .map(|b| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Classifies the trivial equilibrium on the center manifold at `nu = 0`.
pub fn classify_trivial(reduced: &ReducedField, tol: f64) -> TrivialClassification {
    match reduced.n {
        1 => classify_scalar(reduced, tol),
        _ => classify_planar(reduced, tol),
    }
}

fn classify_scalar(reduced: &ReducedField, tol: f64) -> TrivialClassification {
    let p = reduced.order;
    for d in 2..=p {
        let c = reduced.nonlinear[0].coefficient(&[d]);
        if c.abs() > tol {
            let verdict = if d % 2 == 0 {
                Verdict::NeitherIsolated
            } else if c < 0.0 {
                Verdict::AttractorOnCenter
            } else {
                Verdict::RepellerOnCenter
            };
            return TrivialClassification {
                verdict,
                witness: Witness::LeadingTerm {
                    degree: d,
                    coefficient: c,
                },
                order_used: p,
            };
        }
    }
    TrivialClassification {
        verdict: Verdict::Unresolved,
        witness: Witness::AllVanish {
            through_order: p,
            tol,
        },
        order_used: p,
    }
}

fn classify_planar(reduced: &ReducedField, tol: f64) -> TrivialClassification {
    let p = reduced.order;
    let leading = (2..=p).find(|&d| {
        reduced
            .nonlinear
            .iter()
            .any(|poly| poly.homogeneous_part(d).max_abs_coefficient() > tol)
    });
    let Some(d) = leading else {
        return TrivialClassification {
            verdict: Verdict::Unresolved,
            witness: Witness::AllVanish {
                through_order: p,
                tol,
            },
            order_used: p,
        };
    };

    // Radial component of the full nonlinear part at shrinking radii; the
    // sign pattern of the leading behavior decides the verdict.
    const DIRECTIONS: usize = 64;
    let mut negative = 0;
    let mut positive = 0;
    let mut zero = 0;
    for i in 0..DIRECTIONS {
        let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / DIRECTIONS as f64;
        let dir = [th.cos(), th.sin()];
        let mut sign = 0i8;
        for &r in &[1e-1, 1e-2, 1e-3] {
            let w = [dir[0] * r, dir[1] * r];
            let f = evaluate_reduced(reduced, 0.0, &w);
            let radial = (f[0] * dir[0] + f[1] * dir[1]) / r.powi(d as i32);
            if radial > tol {
                sign = 1;
                break;
            }
            if radial < -tol {
                sign = -1;
                break;
            }
        }
        match sign {
            1 => positive += 1,
            -1 => negative += 1,
            _ => zero += 1,
        }
    }

    if zero > 0 {
        return TrivialClassification {
            verdict: Verdict::Unresolved,
            witness: Witness::RadialSigns {
                degree: d,
                negative,
                positive,
                confirmed_by_flow: false,
            },
            order_used: p,
        };
    }
    if negative > 0 && positive > 0 {
        return TrivialClassification {
            verdict: Verdict::NeitherIsolated,
            witness: Witness::RadialSigns {
                degree: d,
                negative,
                positive,
                confirmed_by_flow: false,
            },
            order_used: p,
        };
    }

    let attract = negative == DIRECTIONS;
    // flow confirmation: integrate from a ring (time-reversed for a
    // repeller); at the crossing itself the decay is only polynomial, so
    // halving the ring radius counts as convergence
    let ring_radius = 0.1;
    let confirmed = (0..8).all(|i| {
        let th = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
        let w = vec![ring_radius * th.cos(), ring_radius * th.sin()];
        converges_into(
            reduced,
            0.0,
            &w,
            !attract,
            2000.0,
            4.0 * ring_radius,
            0.5 * ring_radius,
        )
    });
    if !confirmed {
        return TrivialClassification {
            verdict: Verdict::Unresolved,
            witness: Witness::RadialSigns {
                degree: d,
                negative,
                positive,
                confirmed_by_flow: false,
            },
            order_used: p,
        };
    }
    TrivialClassification {
        verdict: if attract {
            Verdict::AttractorOnCenter
        } else {
            Verdict::RepellerOnCenter
        },
        witness: Witness::RadialSigns {
            degree: d,
            negative,
            positive,
            confirmed_by_flow: true,
        },
        order_used: p,
    }
}

/// Maps the classification onto the scalar static-bifurcation alternatives.
/// Returns the alternative plus a caveat string for the accumulation case.
pub fn classify_static_n1(
    crossing: &CrossingData,
    reduced: &ReducedField,
) -> Result<(StaticAlternative, Option<String>)> {
    if crossing.n != 1 {
        return Err(Error::WrongArity {
            expected: 1,
            got: crossing.n,
        });
    }
    let class = classify_trivial(reduced, 1e-9);
    Ok(match class.verdict {
        Verdict::Unresolved => (
            StaticAlternative::AccumulatingNontrivialEquilibria,
            Some(format!(
                "reduced coefficients vanish through order {}; accumulation is evidence only",
                class.order_used
            )),
        ),
        Verdict::AttractorOnCenter | Verdict::RepellerOnCenter => {
            (StaticAlternative::OneSidedTwoSolutions, None)
        }
        Verdict::NeitherIsolated => (StaticAlternative::TwoSidedOneSolution, None),
    })
}

/// Fixed-step RK4 on the reduced field; returns true when the orbit enters
/// `0.02 * escape` of the origin before leaving `escape` or timing out.
fn converges_to_zero(
    reduced: &ReducedField,
    nu: f64,
    w0: &[f64],
    reversed: bool,
    t_max: f64,
    escape: f64,
) -> bool {
    converges_into(reduced, nu, w0, reversed, t_max, escape, 0.02 * escape)
}

/// Like [`converges_to_zero`] with an explicit capture radius.
fn converges_into(
    reduced: &ReducedField,
    nu: f64,
    w0: &[f64],
    reversed: bool,
    t_max: f64,
    escape: f64,
    target: f64,
) -> bool {
    let n = reduced.n;
    let sign = if reversed { -1.0 } else { 1.0 };
    let f = |w: &[f64]| -> Vec<f64> {
        evaluate_reduced(reduced, nu, w)
            .into_iter()
            .map(|v| sign * v)
            .collect()
    };
    let mut w = w0.to_vec();
    let mut t = 0.0;
    // step scaled to the linear rate
    let rate = reduced
        .unfolding
        .iter()
        .map(|u| (nu * u).abs())
        .fold(0.01f64, f64::max);
    let h = (0.05 / rate).min(0.5);
    while t < t_max {
        let k1 = f(&w);
        let w2: Vec<f64> = (0..n).map(|i| w[i] + 0.5 * h * k1[i]).collect();
        let k2 = f(&w2);
        let w3: Vec<f64> = (0..n).map(|i| w[i] + 0.5 * h * k2[i]).collect();
        let k3 = f(&w3);
        let w4: Vec<f64> = (0..n).map(|i| w[i] + h * k3[i]).collect();
        let k4 = f(&w4);
        for i in 0..n {
            w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= target {
            return true;
        }
        if norm >= escape || !norm.is_finite() {
            return false;
        }
    }
    false
}

/// Which sides of the crossing carry a nonempty bifurcating set.
fn nonempty_sides(class: &TrivialClassification, orientation: i8) -> (bool, bool) {
    // (below lambda0, above lambda0). The set lives where the center modes
    // are unstable (attractor case) or stable (repeller case): the sign of
    // beta_center(lambda) is orientation * sign(nu).
    match class.verdict {
        Verdict::AttractorOnCenter => {
            // need beta < 0: nu * orientation < 0
            if orientation > 0 {
                (true, false)
            } else {
                (false, true)
            }
        }
        Verdict::RepellerOnCenter => {
            if orientation > 0 {
                (false, true)
            } else {
                (true, false)
            }
        }
        Verdict::NeitherIsolated => (true, true),
        Verdict::Unresolved => (false, false),
    }
}

/// Computes the bifurcating invariant set of the reduced flow at `lambda`,
/// inside `search` (a reduced-coordinate box centered at the origin).
pub fn bifurcating_set(
    model: &SpectralModel,
    crossing: &CrossingData,
    reduced: &ReducedField,
    lambda: f64,
    search: &BoxRegion,
) -> Result<InvariantSetReport> {
    if search.dim() != reduced.n {
        return Err(Error::Validation(
            "search box dimension must equal the crossing number".into(),
        ));
    }
    let nu = lambda - crossing.lambda0;
    let half_window = crossing.window.1 - crossing.lambda0;
    if nu.abs() > half_window {
        return Err(Error::Validation(format!(
            "lambda={lambda} is outside the trusted reduction window (|nu| <= {half_window:.3e})"
        )));
    }

    let class = classify_trivial(reduced, 1e-9);
    if class.verdict == Verdict::Unresolved {
        return Ok(InvariantSetReport {
            lambda,
            kind: InvariantSetKind::Unresolved,
            points: Vec::new(),
            sphere_samples: Vec::new(),
            lifted_points: Vec::new(),
            d_h_to_zero: 0.0,
        });
    }

    let (below, above) = nonempty_sides(&class, crossing.h4_orientation);
    let expected = if nu < 0.0 { below } else { above };

    let points = find_reduced_equilibria(reduced, nu, search)?;

    let sphere_samples = if expected
        && matches!(
            class.verdict,
            Verdict::AttractorOnCenter | Verdict::RepellerOnCenter
        ) {
        basin_boundary(reduced, nu, search, &points)?
    } else {
        Vec::new()
    };

    let kind = if !expected {
        InvariantSetKind::Empty
    } else if reduced.n >= 2
        && matches!(
            class.verdict,
            Verdict::AttractorOnCenter | Verdict::RepellerOnCenter
        )
    {
        InvariantSetKind::SphereBoundary
    } else {
        InvariantSetKind::EquilibriumPoints
    };

    if expected && points.is_empty() && sphere_samples.is_empty() {
        return Err(Error::NoInvariantSetFound { lambda });
    }
    if !expected && !points.is_empty() {
        // the local theory says this side is empty; a found equilibrium
        // means the reduction is being used outside its regime
        return Err(Error::NoInvariantSetFound { lambda });
    }

    let lifted_points: Vec<Vec<f64>> = points.iter().map(|p| reduced.lift(model, &p.w)).collect();
    let mut d_h: f64 = 0.0;
    for p in &points {
        d_h = d_h.max(p.w.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    for s in &sphere_samples {
        d_h = d_h.max(s.iter().map(|x| x * x).sum::<f64>().sqrt());
    }

    Ok(InvariantSetReport {
        lambda,
        kind,
        points,
        sphere_samples,
        lifted_points,
        d_h_to_zero: d_h,
    })
}

/// Nonzero equilibria of the reduced field in the box: polynomial root scan
/// in the scalar case, Newton from a seed grid in the planar case.
fn find_reduced_equilibria(
    reduced: &ReducedField,
    nu: f64,
    search: &BoxRegion,
) -> Result<Vec<ReducedEquilibrium>> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    match reduced.n {
        1 => {
            let (lo, hi) = (search.lo[0], search.hi[0]);
            const SCAN: usize = 4000;
            let f = |w: f64| evaluate_reduced(reduced, nu, &[w])[0];
            let mut prev_w = lo;
            let mut prev_f = f(lo);
            for s in 1..=SCAN {
                let w = lo + (hi - lo) * s as f64 / SCAN as f64;
                let fw = f(w);
                if prev_f == 0.0 {
                    points.push(vec![prev_w]);
                } else if prev_f * fw < 0.0 {
                    let (mut a, mut b) = (prev_w, w);
                    for _ in 0..100 {
                        let mid = 0.5 * (a + b);
                        if f(a) * f(mid) <= 0.0 {
                            b = mid;
                        } else {
                            a = mid;
                        }
                    }
                    points.push(vec![0.5 * (a + b)]);
                }
                prev_w = w;
                prev_f = fw;
            }
        }
        2 => {
            const SEEDS: usize = 32;
            for ix in 0..SEEDS {
                for iy in 0..SEEDS {
                    let mut w = vec![
                        search.lo[0]
                            + (search.hi[0] - search.lo[0]) * (ix as f64 + 0.5) / SEEDS as f64,
                        search.lo[1]
                            + (search.hi[1] - search.lo[1]) * (iy as f64 + 0.5) / SEEDS as f64,
                    ];
                    if newton_2d(reduced, nu, &mut w) && inside(search, &w) {
                        points.push(w);
                    }
                }
            }
        }
        n => {
            return Err(Error::Unsupported(format!(
                "equilibrium search implemented for crossing numbers 1 and 2, got {n}"
            )))
        }
    }

    // dedup and drop the trivial equilibrium
    let mut unique: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= ZERO_EXCLUSION {
            continue;
        }
        let dup = unique.iter().any(|q| {
            p.iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                < DEDUP_RADIUS
        });
        if !dup {
            unique.push(p);
        }
    }

    Ok(unique
        .into_iter()
        .map(|w| {
            let (unstable, stable) = stability(reduced, nu, &w);
            ReducedEquilibrium {
                w,
                unstable,
                stable,
            }
        })
        .collect())
}

fn inside(b: &BoxRegion, w: &[f64]) -> bool {
    w.iter()
        .enumerate()
        .all(|(a, &x)| x >= b.lo[a] - 1e-12 && x <= b.hi[a] + 1e-12)
}

fn newton_2d(reduced: &ReducedField, nu: f64, w: &mut [f64]) -> bool {
    for _ in 0..60 {
        let f = evaluate_reduced(reduced, nu, w);
        let fnorm = (f[0] * f[0] + f[1] * f[1]).sqrt();
        if fnorm <= 1e-13 {
            return true;
        }
        let j = reduced.jacobian(nu, w);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return false;
        }
        let dx = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dy = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        w[0] -= dx;
        w[1] -= dy;
        if !w[0].is_finite() || !w[1].is_finite() {
            return false;
        }
    }
    let f = evaluate_reduced(reduced, nu, w);
    (f[0] * f[0] + f[1] * f[1]).sqrt() <= 1e-10
}

fn stability(reduced: &ReducedField, nu: f64, w: &[f64]) -> (usize, bool) {
    let j = reduced.jacobian(nu, w);
    let res: Vec<f64> = match reduced.n {
        1 => vec![j[0][0]],
        2 => {
            let tr = j[0][0] + j[1][1];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let disc = tr * tr / 4.0 - det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                vec![tr / 2.0 + s, tr / 2.0 - s]
            } else {
                vec![tr / 2.0, tr / 2.0]
            }
        }
        _ => unreachable!("stability called for n <= 2 only"),
    };
    let unstable = res.iter().filter(|&&r| r > STABILITY_EIG_TOL).count();
    let stable = res.iter().all(|&r| r < -STABILITY_EIG_TOL);
    (unstable, stable)
}

/// Boundary of the attraction basin of the origin: the two bracketing
/// equilibria in the scalar case, radial bisection along 64 rays in the
/// planar case. The flow direction is whichever one makes the origin
/// locally attracting at this `nu` (forward when the origin is stable,
/// reversed when it is unstable), matching the construction of the sphere
/// as the basin boundary `dG`.
fn basin_boundary(
    reduced: &ReducedField,
    nu: f64,
    search: &BoxRegion,
    equilibria: &[ReducedEquilibrium],
) -> Result<Vec<Vec<f64>>> {
    let n = reduced.n;
    // growth rate of the origin is nu * unfolding per center mode; use the
    // flow direction that makes the origin attracting
    let origin_unstable = reduced.unfolding.iter().any(|u| nu * u > 0.0);
    let reversed = origin_unstable;

    if n == 1 {
        // a scalar basin is the interval up to the nearest equilibrium on
        // each side of the origin
        let mut out = Vec::new();
        let right = equilibria
            .iter()
            .map(|p| p.w[0])
            .filter(|&w| w > 0.0)
            .fold(f64::INFINITY, f64::min);
        if right.is_finite() {
            out.push(vec![right]);
        }
        let left = equilibria
            .iter()
            .map(|p| p.w[0])
            .filter(|&w| w < 0.0)
            .fold(f64::NEG_INFINITY, f64::max);
        if left.is_finite() {
            out.push(vec![left]);
        }
        return Ok(out);
    }
    if n != 2 {
        return Err(Error::Unsupported(
            "basin boundary implemented for crossing numbers 1 and 2".into(),
        ));
    }

    let r_max: f64 = (0..n)
        .map(|a| search.hi[a].abs().max(search.lo[a].abs()))
        .fold(f64::INFINITY, f64::min);
    let escape = 2.0 * r_max;
    let dirs: Vec<Vec<f64>> = (0..64)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
            vec![th.cos(), th.sin()]
        })
        .collect();

    let mut samples = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let point_at = |r: f64| -> Vec<f64> { dir.iter().map(|d| d * r).collect() };
        let inside_basin =
            |r: f64| converges_to_zero(reduced, nu, &point_at(r), reversed, 2000.0, escape);
        // bracket the boundary radius
        let mut r_in = r_max * 1e-4;
        if !inside_basin(r_in) {
            // origin basin thinner than the probe: shrink
            r_in *= 1e-3;
            if !inside_basin(r_in) {
                continue;
            }
        }
        let mut r_out = r_in;
        let mut found = false;
        while r_out < r_max {
            r_out = (r_out * 1.5).min(r_max);
            if !inside_basin(r_out) {
                found = true;
                break;
            }
            if r_out >= r_max {
                break;
            }
        }
        if !found {
            continue; // basin reaches the box on this ray
        }
        for _ in 0..45 {
            let mid = 0.5 * (r_in + r_out);
            if inside_basin(mid) {
                r_in = mid;
            } else {
                r_out = mid;
            }
        }
        samples.push(point_at(0.5 * (r_in + r_out)));
    }
    Ok(samples)
}

/// Conley index of the bifurcating set at `lambda`: block indices in
/// reduced coordinates (one block per equilibrium, or an enclosing block
/// with a hole around the origin when the set is a sphere), wedged together
/// and suspended by the unstable dimension `m`.
pub fn index_of_bifurcating_set(
    model: &SpectralModel,
    crossing: &CrossingData,
    reduced: &ReducedField,
    lambda: f64,
    search: &BoxRegion,
) -> Result<(ConleyIndex, bool)> {
    let (idx, nontrivial, _) =
        index_of_bifurcating_set_with_blocks(model, crossing, reduced, lambda, search)?;
    Ok((idx, nontrivial))
}

/// Same as [`index_of_bifurcating_set`], also returning the accepted blocks
/// for inspection or dumping.
pub fn index_of_bifurcating_set_with_blocks(
    model: &SpectralModel,
    crossing: &CrossingData,
    reduced: &ReducedField,
    lambda: f64,
    search: &BoxRegion,
) -> Result<(ConleyIndex, bool, Vec<crate::conley::IsolatingBlock>)> {
    let report = bifurcating_set(model, crossing, reduced, lambda, search)?;
    let nu = lambda - crossing.lambda0;
    let field = |w: &[f64]| evaluate_reduced(reduced, nu, w);
    let mut blocks = Vec::new();

    let center_index = match report.kind {
        InvariantSetKind::Empty | InvariantSetKind::Unresolved => {
            return Err(Error::NoInvariantSetFound { lambda });
        }
        InvariantSetKind::SphereBoundary => {
            let radii: Vec<f64> = report
                .sphere_samples
                .iter()
                .map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt())
                .collect();
            let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
            let r_max = radii.iter().cloned().fold(0.0, f64::max);
            let box_half: f64 = (0..reduced.n)
                .map(|a| search.hi[a].abs().min(search.lo[a].abs()))
                .fold(f64::INFINITY, f64::min);
            let outer = (1.6 * r_max).min(box_half);
            let hole = 0.45 * r_min;
            let region = BoxRegion::new(vec![-outer; 2], vec![outer; 2])?;
            let hole_box = BoxRegion::new(vec![-hole; 2], vec![hole; 2])?;
            let block = build_block_with_hole(field, &region, Some(&hole_box), &[16, 16])?;
            let idx = relative_betti(&block);
            blocks.push(block);
            idx
        }
        InvariantSetKind::EquilibriumPoints => {
            let mut idx = ConleyIndex::trivial_index();
            for (i, p) in report.points.iter().enumerate() {
                // block half-width: a comfortable fraction of the distance to
                // the nearest other invariant point (origin included)
                let mut nearest = p.w.iter().map(|x| x * x).sum::<f64>().sqrt();
                for (j, q) in report.points.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let d =
                        p.w.iter()
                            .zip(&q.w)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                    nearest = nearest.min(d / 2.0);
                }
                let half = 0.5 * nearest;
                let lo: Vec<f64> = p.w.iter().map(|x| x - half).collect();
                let hi: Vec<f64> = p.w.iter().map(|x| x + half).collect();
                let region = BoxRegion::new(lo, hi)?;
                let grid = vec![4usize; reduced.n];
                let block = build_isolating_block(field, &region, &grid)?;
                idx = wedge(&idx, &relative_betti(&block));
                blocks.push(block);
            }
            idx
        }
    };

    let total = suspend(&center_index, crossing.m as u32);
    let nontrivial = !total.trivial;
    Ok((total, nontrivial, blocks))
}

/// Index of the trivial equilibrium at the crossing itself,
/// `h(Phi_0, S_0) = Sigma^m ^ h(center flow, 0)`, from a block around the
/// origin in reduced coordinates at `nu = 0`.
pub fn trivial_index_at_crossing(
    crossing: &CrossingData,
    reduced: &ReducedField,
    half_width: f64,
) -> Result<ConleyIndex> {
    let n = reduced.n;
    let field = |w: &[f64]| evaluate_reduced(reduced, 0.0, w);
    let region = BoxRegion::new(vec![-half_width; n], vec![half_width; n])?;
    let block = build_isolating_block(field, &region, &vec![4; n])?;
    Ok(suspend(&relative_betti(&block), crossing.m as u32))
}

/// Checks the hypothesis under which the bifurcating set is guaranteed a
/// nontrivial index on the side of `lambda`: the index of the trivial solution at the
/// crossing must differ from `Sigma^m` (stable side) or `Sigma^(m+n)`
/// (unstable side).
pub fn nontriviality_hypothesis_holds(
    crossing: &CrossingData,
    reduced: &ReducedField,
    lambda: f64,
    trivial_at_crossing: &ConleyIndex,
) -> bool {
    let nu = lambda - crossing.lambda0;
    // beta_center(lambda) sign: orientation * sign(nu)
    let beta_sign = crossing.h4_orientation as f64 * nu.signum();
    let m = crossing.m as u32;
    let n = reduced.n as u32;
    let compare = if beta_sign < 0.0 {
        // center unstable at lambda: hypothesis h(Phi_0, S_0) != Sigma^(m+n)
        ConleyIndex::sigma(m + n)
    } else {
        ConleyIndex::sigma(m)
    };
    trivial_at_crossing != &compare
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center_manifold::reduce;
    use crate::model::{
        build_cahn_hilliard_1d, build_custom, CubicEntry, CustomModelSpec, LinearPart, QuadEntry,
    };
    use crate::spectrum::crossing_data;

    fn ch_setup(b2: f64, b3: f64, lambda0: f64) -> (SpectralModel, CrossingData, ReducedField) {
        let m = build_cahn_hilliard_1d(std::f64::consts::PI, b2, b3, 6).unwrap();
        let c = crossing_data(&m, lambda0, 1e-9).unwrap();
        let r = reduce(&m, &c, 3).unwrap();
        (m, c, r)
    }

    fn transcritical(q: f64) -> (SpectralModel, CrossingData, ReducedField) {
        let m = build_custom(CustomModelSpec {
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
                value: -q,
            }],
            cubic: vec![],
            gradient_info: Some(crate::model::GradientInfo {
                potential: crate::model::PotentialForm::ScalarPolynomial,
                cube_integrals: None,
            }),
        })
        .unwrap();
        let c = crossing_data(&m, 0.0, 1e-9).unwrap();
        let r = reduce(&m, &c, 3).unwrap();
        (m, c, r)
    }

    fn planar_radial() -> (SpectralModel, CrossingData, ReducedField) {
        let m = build_custom(CustomModelSpec {
            label: "planar".into(),
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
        })
        .unwrap();
        let c = crossing_data(&m, 1.0, 1e-9).unwrap();
        let r = reduce(&m, &c, 3).unwrap();
        (m, c, r)
    }

    #[test]
    fn ch_pitchfork_is_attractor_on_center() {
        let (_, _, r) = ch_setup(0.0, 1.0, 1.0);
        let c = classify_trivial(&r, 1e-9);
        assert_eq!(c.verdict, Verdict::AttractorOnCenter);
        match c.witness {
            Witness::LeadingTerm {
                degree,
                coefficient,
            } => {
                assert_eq!(degree, 3);
                assert!((coefficient + 0.75).abs() < 1e-12);
            }
            _ => panic!("expected a leading-term witness"),
        }
    }

    #[test]
    fn large_b2_flips_to_repeller() {
        // b2 = 3, b3 = 1: effective cubic b2^2/6 - 3/4 = 0.75 > 0.
        let (_, _, r) = ch_setup(3.0, 1.0, 1.0);
        let c = classify_trivial(&r, 1e-9);
        assert_eq!(c.verdict, Verdict::RepellerOnCenter);
    }

    #[test]
    fn transcritical_is_neither_isolated() {
        let (_, _, r) = transcritical(1.0);
        let c = classify_trivial(&r, 1e-9);
        assert_eq!(c.verdict, Verdict::NeitherIsolated);
        match c.witness {
            Witness::LeadingTerm { degree, .. } => assert_eq!(degree, 2),
            _ => panic!("expected leading-term witness"),
        }
    }

    #[test]
    fn planar_radial_cubic_is_attractor() {
        let (_, _, r) = planar_radial();
        let c = classify_trivial(&r, 1e-9);
        assert_eq!(c.verdict, Verdict::AttractorOnCenter);
        match c.witness {
            Witness::RadialSigns {
                negative,
                positive,
                confirmed_by_flow,
                ..
            } => {
                assert_eq!(negative, 64);
                assert_eq!(positive, 0);
                assert!(confirmed_by_flow);
            }
            _ => panic!("expected radial witness"),
        }
    }

    #[test]
    fn static_alternatives() {
        let (_, c, r) = ch_setup(0.0, 1.0, 1.0);
        assert_eq!(
            classify_static_n1(&c, &r).unwrap().0,
            StaticAlternative::OneSidedTwoSolutions
        );
        let (_, c, r) = transcritical(1.0);
        assert_eq!(
            classify_static_n1(&c, &r).unwrap().0,
            StaticAlternative::TwoSidedOneSolution
        );
        // degenerate input: identically zero nonlinearity
        let m = build_custom(CustomModelSpec {
            label: "flat".into(),
            mu: vec![1.0],
            linear: LinearPart::Affine {
                c0: vec![0.0],
                c1: vec![1.0],
            },
            quadratic: vec![],
            cubic: vec![],
            gradient_info: None,
        })
        .unwrap();
        let c = crossing_data(&m, 0.0, 1e-9).unwrap();
        let r = reduce(&m, &c, 3).unwrap();
        let (alt, caveat) = classify_static_n1(&c, &r).unwrap();
        assert_eq!(alt, StaticAlternative::AccumulatingNontrivialEquilibria);
        assert!(caveat.is_some());
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let (_, c, r) = planar_radial();
        assert!(matches!(
            classify_static_n1(&c, &r),
            Err(Error::WrongArity {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn pitchfork_supercritical_side() {
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        let rep = bifurcating_set(&m, &c, &r, 1.1, &search).unwrap();
        assert_eq!(rep.kind, InvariantSetKind::EquilibriumPoints);
        assert_eq!(rep.points.len(), 2);
        let w_star = (4.0 * 0.1 / 3.0f64).sqrt();
        for p in &rep.points {
            assert!((p.w[0].abs() - w_star).abs() < 1e-9);
            assert!(p.stable);
            // residual of the reduced field at the point
            let f = evaluate_reduced(&r, 0.1, &p.w);
            assert!(f[0].abs() <= 1e-9);
        }
        // the two points are the 0-sphere: basin boundary endpoints coincide
        assert_eq!(rep.sphere_samples.len(), 2);
        for s in &rep.sphere_samples {
            assert!((s[0].abs() - w_star).abs() < 1e-6, "sphere sample {}", s[0]);
        }
        assert!((rep.d_h_to_zero - w_star).abs() < 1e-6);
        // lifted points live on the full-space branch
        assert_eq!(rep.lifted_points.len(), 2);
        assert!((rep.lifted_points[0][0].abs() - w_star).abs() < 1e-9);
    }

    #[test]
    fn pitchfork_subcritical_side_is_empty() {
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        let rep = bifurcating_set(&m, &c, &r, 0.9, &search).unwrap();
        assert_eq!(rep.kind, InvariantSetKind::Empty);
        assert!(rep.points.is_empty());
    }

    #[test]
    fn transcritical_two_sided() {
        let (m, c, r) = transcritical(1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        for lambda in [0.1, -0.1] {
            let rep = bifurcating_set(&m, &c, &r, lambda, &search).unwrap();
            assert_eq!(rep.kind, InvariantSetKind::EquilibriumPoints);
            assert_eq!(rep.points.len(), 1, "lambda={lambda}");
            let p = &rep.points[0];
            assert!((p.w[0] - lambda).abs() < 1e-9);
            // w* = lambda has reduced derivative -lambda
            if lambda > 0.0 {
                assert!(p.stable);
            } else {
                assert_eq!(p.unstable, 1);
            }
        }
    }

    #[test]
    fn planar_sphere_radius() {
        let (m, c, r) = planar_radial();
        let search = BoxRegion::square((-1.0, -1.0), (1.0, 1.0)).unwrap();
        let rep = bifurcating_set(&m, &c, &r, 1.1, &search).unwrap();
        assert_eq!(rep.kind, InvariantSetKind::SphereBoundary);
        assert_eq!(rep.sphere_samples.len(), 64);
        let expect = 0.1f64.sqrt();
        for s in &rep.sphere_samples {
            let rr = (s[0] * s[0] + s[1] * s[1]).sqrt();
            assert!((rr - expect).abs() < 1e-3, "ray radius {rr}");
        }
        // winding number of the closed polyline around the origin is 1
        let mut total = 0.0;
        for i in 0..64 {
            let a = &rep.sphere_samples[i];
            let b = &rep.sphere_samples[(i + 1) % 64];
            let cross = a[0] * b[1] - a[1] * b[0];
            let dot = a[0] * b[0] + a[1] * b[1];
            total += cross.atan2(dot);
        }
        assert!((total / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sphere_is_numerically_invariant() {
        // flow the sphere samples for time 10: they stay within 1e-2 of the
        // sampled polyline (Hausdorff)
        let (m, c, r) = planar_radial();
        let search = BoxRegion::square((-1.0, -1.0), (1.0, 1.0)).unwrap();
        let rep = bifurcating_set(&m, &c, &r, 1.1, &search).unwrap();
        let nu = 0.1;
        let mut moved = Vec::new();
        for s in &rep.sphere_samples {
            let mut w = s.clone();
            let h = 0.01;
            for _ in 0..1000 {
                let k1 = evaluate_reduced(&r, nu, &w);
                let mid: Vec<f64> = (0..2).map(|i| w[i] + 0.5 * h * k1[i]).collect();
                let k2 = evaluate_reduced(&r, nu, &mid);
                for i in 0..2 {
                    w[i] += h * k2[i];
                }
            }
            moved.push(w);
        }
        let d = hausdorff_semidistance(&moved, &rep.sphere_samples);
        assert!(d < 1e-2, "sphere drifted by {d}");
    }

    #[test]
    fn dichotomy_on_lambda_grids() {
        // pitchfork: nonempty on exactly one side; transcritical: both sides
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        for i in 1..=20 {
            let d = 0.005 * i as f64;
            let above = bifurcating_set(&m, &c, &r, 1.0 + d, &search).unwrap();
            assert_eq!(above.kind, InvariantSetKind::EquilibriumPoints);
            assert!(!above.points.is_empty());
            let below = bifurcating_set(&m, &c, &r, 1.0 - d, &search).unwrap();
            assert_eq!(below.kind, InvariantSetKind::Empty);
        }
        let (m, c, r) = transcritical(2.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        for i in 1..=20 {
            let d = 0.005 * i as f64;
            for lambda in [d, -d] {
                let rep = bifurcating_set(&m, &c, &r, lambda, &search).unwrap();
                assert_eq!(rep.points.len(), 1);
                assert!((rep.points[0].w[0] - lambda / 2.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn shrinking_law() {
        // d_H(K_lambda, 0) decreases monotonically to 0 and follows
        // sqrt(4 (lambda - lambda0) / (3 b3)) within 5%.
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in (1..=20).rev() {
            let nu = 0.005 * i as f64;
            let rep = bifurcating_set(&m, &c, &r, 1.0 + nu, &search).unwrap();
            assert!(rep.d_h_to_zero < prev);
            prev = rep.d_h_to_zero;
            let law = (4.0 * nu / 3.0).sqrt();
            assert!(
                (rep.d_h_to_zero / law - 1.0).abs() < 0.05,
                "law violated at nu={nu}: {} vs {law}",
                rep.d_h_to_zero
            );
        }
    }

    #[test]
    fn pitchfork_index_two_attractors() {
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        let (idx, nontrivial) = index_of_bifurcating_set(&m, &c, &r, 1.1, &search).unwrap();
        assert!(nontrivial);
        assert_eq!(idx.rank(0), 2);
        assert_eq!(idx.betti.len(), 1);
    }

    #[test]
    fn pitchfork_index_suspended_at_second_crossing() {
        // crossing at lambda0 = 4 has m = 1: the same local picture
        // suspended by one degree
        let (m, c, r) = ch_setup(0.0, 1.0, 4.0);
        assert_eq!(c.m, 1);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        let (idx, nontrivial) = index_of_bifurcating_set(&m, &c, &r, 4.1, &search).unwrap();
        assert!(nontrivial);
        assert_eq!(idx.rank(1), 2);
        assert_eq!(idx.rank(0), 0);
    }

    #[test]
    fn transcritical_indices_both_sides() {
        let (m, c, r) = transcritical(1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        let (above, nt1) = index_of_bifurcating_set(&m, &c, &r, 0.1, &search).unwrap();
        assert!(nt1);
        assert_eq!(above, ConleyIndex::sigma(0));
        let (below, nt2) = index_of_bifurcating_set(&m, &c, &r, -0.1, &search).unwrap();
        assert!(nt2);
        assert_eq!(below, ConleyIndex::sigma(1));
    }

    #[test]
    fn planar_sphere_index() {
        let (m, c, r) = planar_radial();
        let search = BoxRegion::square((-1.0, -1.0), (1.0, 1.0)).unwrap();
        let (idx, nontrivial) = index_of_bifurcating_set(&m, &c, &r, 1.1, &search).unwrap();
        assert!(nontrivial);
        assert_eq!(idx.rank(0), 1);
        assert_eq!(idx.rank(1), 1);
    }

    #[test]
    fn index_on_the_empty_side_is_an_error() {
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        assert!(matches!(
            index_of_bifurcating_set(&m, &c, &r, 0.9, &search),
            Err(Error::NoInvariantSetFound { .. })
        ));
    }

    #[test]
    fn nontriviality_hypothesis_checks() {
        // pitchfork at lambda0=1 (m=0): h(Phi_0,S_0) = Sigma^0;
        // on the nonempty side (lambda>1, center unstable) the hypothesis
        // compares against Sigma^(m+n) = Sigma^1: holds.
        let (_m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let triv = trivial_index_at_crossing(&c, &r, 0.2).unwrap();
        assert_eq!(triv, ConleyIndex::sigma(0));
        assert!(nontriviality_hypothesis_holds(&c, &r, 1.1, &triv));
        // transcritical: h(Phi_0,S_0) = 0-bar, differs from both spheres
        let (_m, c, r) = transcritical(1.0);
        let triv = trivial_index_at_crossing(&c, &r, 0.3).unwrap();
        assert!(triv.trivial);
        assert!(nontriviality_hypothesis_holds(&c, &r, 0.1, &triv));
        assert!(nontriviality_hypothesis_holds(&c, &r, -0.1, &triv));
        // planar circle case at m=0: Sigma^0 at the crossing differs from
        // Sigma^(m+n) = Sigma^2 on the unstable side
        let (_m, c, r) = planar_radial();
        let triv = trivial_index_at_crossing(&c, &r, 0.2).unwrap();
        assert_eq!(triv, ConleyIndex::sigma(0));
        assert!(nontriviality_hypothesis_holds(&c, &r, 1.1, &triv));
    }

    #[test]
    fn lifted_points_residual_ratio() {
        // full-space residual of the lifted equilibria scales like |w|^4
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        let res = |nu: f64| -> f64 {
            let rep = bifurcating_set(&m, &c, &r, 1.0 + nu, &search).unwrap();
            let a = &rep.lifted_points[0];
            let f = crate::model::vector_field(&m, 1.0 + nu, a).unwrap();
            f.iter().map(|x| x * x).sum::<f64>().sqrt()
        };
        let ratio = res(0.04) / res(0.01); // w halves
        assert!(ratio > 10.0, "lifted residual ratio {ratio}");
    }

    #[test]
    fn hausdorff_conventions() {
        assert_eq!(hausdorff_semidistance(&[], &[vec![1.0]]), 0.0);
        let a = vec![vec![1.0, 0.0]];
        let b = vec![vec![0.0, 0.0]];
        assert_eq!(hausdorff_semidistance(&a, &b), 1.0);
        assert_eq!(hausdorff_semidistance(&a, &a), 0.0);
        assert_eq!(hausdorff_semidistance(&a, &[]), f64::INFINITY);
    }

    #[test]
    fn lambda_outside_trust_window_is_rejected() {
        let (m, c, r) = ch_setup(0.0, 1.0, 1.0);
        let search = BoxRegion::interval(-1.0, 1.0).unwrap();
        assert!(matches!(
            bifurcating_set(&m, &c, &r, 3.0, &search),
            Err(Error::Validation(_))
        ));
    }
}
