//! Polynomial center-manifold reductions.
//!
//! At a crossing the non-center ("slave") modes are expressed as a graph
//! `a_s = xi_s(w)` over the center coordinates `w`, solved order by order
//! from the invariance equation
//!
//! ```text
//! D xi_s(w) . F(w) = -beta_s xi_s(w) + [g(w + xi(w))]_s
//! ```
//!
//! where `F` is the reduced field on the center coordinates. Because the
//! linear part is diagonal, each slave coefficient at degree `d` solves a
//! scalar equation `beta_s * xi_{s,alpha} = rhs` with `beta_s(lambda0) != 0`.
//! The graph is computed at `lambda0`; the lambda-dependence enters the
//! reduced field only through the first-order unfolding `-dbeta/dlambda * nu`
//! on the linear term, which is all the downstream classification consumes.

use crate::error::{Error, Result};
use crate::model::SpectralModel;
use crate::poly::Poly;
use crate::spectrum::CrossingData;
use serde::{Deserialize, Serialize};

/// Reduced vector field on the center coordinates plus the slave graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedField {
    pub lambda0: f64,
    /// Center mode ids (1-based), ascending; `w_i` is the coefficient of
    /// mode `center_modes[i]`.
    pub center_modes: Vec<usize>,
    pub n: usize,
    /// Truncation order `p` in `w`.
    pub order: u32,
    /// Coefficient of `nu * w_i` in the i-th component (the unfolding
    /// `-dbeta/dlambda` per center mode).
    pub unfolding: Vec<f64>,
    /// Nu-independent polynomial part of each component, degrees 2..=p.
    pub nonlinear: Vec<Poly>,
    /// `(mode, xi_mode)` for each non-center mode, degrees 2..=p.
    pub slaves: Vec<(usize, Poly)>,
}

impl ReducedField {
    /// Lifts center coordinates to the full mode vector `w + xi(w)`.
    pub fn lift(&self, model: &SpectralModel, w: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; model.dim()];
        for (i, &k) in self.center_modes.iter().enumerate() {
            a[k - 1] = w[i];
        }
        for (s, xi) in &self.slaves {
            a[s - 1] = xi.eval(w);
        }
        a
    }

    /// Reduced Jacobian `dF/dw` at `(nu, w)`.
    pub fn jacobian(&self, nu: f64, w: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut jac = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                jac[i][j] = self.nonlinear[i].derivative(j).eval(w);
            }
            jac[i][i] += nu * self.unfolding[i];
        }
        jac
    }
}

/// Computes the order-`p` center-manifold reduction at a crossing.
pub fn reduce(model: &SpectralModel, crossing: &CrossingData, order: u32) -> Result<ReducedField> {
    if !(2..=5).contains(&order) {
        return Err(Error::Validation(format!(
            "reduction order must be in 2..=5, got {order}"
        )));
    }
    if crossing.degenerate {
        return Err(Error::Validation(
            "crossing is degenerate (non-transversal); reduction refused".into(),
        ));
    }
    let lambda0 = crossing.lambda0;
    let n_modes = model.dim();
    let center = &crossing.center_modes;
    let n = center.len();

    // Every non-center mode must be hyperbolic at lambda0.
    let mut slaves_idx = Vec::new();
    for k in 1..=n_modes {
        if center.contains(&k) {
            continue;
        }
        let beta = model.beta(k, lambda0);
        if beta.abs() < 1e-10 {
            return Err(Error::InconsistentCrossing { mode: k, beta });
        }
        slaves_idx.push(k);
    }

    // a_k as polynomials in w: center modes are coordinates, slaves start at 0.
    let mut coords: Vec<Poly> = vec![Poly::zero(n); n_modes];
    for (i, &k) in center.iter().enumerate() {
        coords[k - 1] = Poly::var(n, i);
    }

    let mut reduced: Vec<Poly> = vec![Poly::zero(n); n];
    let mut xi: Vec<Poly> = vec![Poly::zero(n); slaves_idx.len()];

    for d in 2..=order {
        // Nonlinear part of every mode equation evaluated on w + xi(w),
        // truncated at the current degree.
        let g = nonlinear_on_graph(model, &coords, d);

        // Collect the degree-d center projection into the reduced field.
        for (i, &k) in center.iter().enumerate() {
            reduced[i].add_assign(&g[k - 1].homogeneous_part(d));
        }

        // Solve the homological equations for the degree-d slave terms.
        for (si, &s) in slaves_idx.iter().enumerate() {
            let mut rhs = g[s - 1].homogeneous_part(d);
            // [D xi_s . F]_d where xi_s and F hold terms of degree < d.
            for i in 0..n {
                let dxi = xi[si].derivative(i);
                let prod = dxi.mul_truncated(&reduced[i], d);
                let part = prod.homogeneous_part(d);
                rhs.add_assign(&part.scale(-1.0));
            }
            let beta_s = model.beta(s, lambda0);
            let inc = rhs.scale(1.0 / beta_s);
            xi[si].add_assign(&inc);
            coords[s - 1].add_assign(&inc);
        }
    }

    let unfolding: Vec<f64> = center.iter().map(|&k| -model.dbeta(k, lambda0)).collect();

    Ok(ReducedField {
        lambda0,
        center_modes: center.clone(),
        n,
        order,
        unfolding,
        nonlinear: reduced,
        slaves: slaves_idx.into_iter().zip(xi).collect(),
    })
}

/// Quadratic plus cubic terms of every mode equation, with each `a_k`
/// substituted by the given polynomial, truncated to `max_deg`.
fn nonlinear_on_graph(model: &SpectralModel, coords: &[Poly], max_deg: u32) -> Vec<Poly> {
    let nvars = coords.iter().map(|p| p.nvars).max().unwrap_or(1);
    let mut g = vec![Poly::zero(nvars); model.dim()];
    for e in model.quadratic_entries() {
        let prod = coords[e.i - 1].mul_truncated(&coords[e.j - 1], max_deg);
        g[e.k - 1].add_assign(&prod.scale(e.value * e.multiplicity()));
    }
    for e in model.cubic_entries() {
        let prod = coords[e.i - 1]
            .mul_truncated(&coords[e.j - 1], max_deg)
            .mul_truncated(&coords[e.l - 1], max_deg);
        g[e.k - 1].add_assign(&prod.scale(e.value * e.multiplicity()));
    }
    g
}

/// Evaluates the reduced field at offset `nu = lambda - lambda0` and center
/// point `w`.
pub fn evaluate_reduced(reduced: &ReducedField, nu: f64, w: &[f64]) -> Vec<f64> {
    (0..reduced.n)
        .map(|i| nu * reduced.unfolding[i] * w[i] + reduced.nonlinear[i].eval(w))
        .collect()
}

/// Maximum invariance-equation residual over sampled `|w| = radius`.
///
/// The residual of the slave graph at `w` is
/// `D xi(w) F(w) - [full field at (w + xi(w))]_slaves`; for an order-`p`
/// reduction it decays like `radius^(p+1)`, which the ratio test in the
/// suite checks directly.
pub fn invariance_residual(
    model: &SpectralModel,
    reduced: &ReducedField,
    radius: f64,
    samples: usize,
) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::Validation("radius must be positive".into()));
    }
    let n = reduced.n;
    let dirs = sphere_directions(n, samples.max(2));
    let mut worst = 0.0f64;
    for dir in dirs {
        let w: Vec<f64> = dir.iter().map(|d| d * radius).collect();
        let a = reduced.lift(model, &w);
        let full = crate::model::vector_field(model, reduced.lambda0, &a)?;
        let fw = evaluate_reduced(reduced, 0.0, &w);
        for (s, xi) in &reduced.slaves {
            let mut lhs = 0.0;
            for i in 0..n {
                lhs += xi.derivative(i).eval(&w) * fw[i];
            }
            let r = (lhs - full[s - 1]).abs();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Unit directions for sampling: signs in 1D, a uniform circle otherwise.
fn sphere_directions(n: usize, samples: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..samples)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            // quasi-uniform via a simple lattice on the sphere; adequate for
            // residual sampling at small n
            let mut dirs = Vec::new();
            for i in 0..samples {
                let mut v: Vec<f64> = (0..n)
                    .map(|j| ((i * (j + 2) * 2654435761) % 1000) as f64 / 500.0 - 1.0)
                    .collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-9 {
                    for x in &mut v {
                        *x /= norm;
                    }
                    dirs.push(v);
                }
            }
            dirs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_cahn_hilliard_1d, build_custom, CubicEntry, CustomModelSpec, LinearPart, QuadEntry,
    };
    use crate::poly::Monomial;
    use crate::spectrum::crossing_data;
    use approx::assert_relative_eq;

    fn ch(b2: f64, b3: f64, n: usize) -> SpectralModel {
        build_cahn_hilliard_1d(std::f64::consts::PI, b2, b3, n).unwrap()
    }

    fn reduce_ch(b2: f64, b3: f64, lambda0: f64, order: u32) -> ReducedField {
        let m = ch(b2, b3, 6);
        let c = crossing_data(&m, lambda0, 1e-9).unwrap();
        reduce(&m, &c, order).unwrap()
    }

    #[test]
    fn ch_pitchfork_reduction_b2_zero() {
        // w' = nu w - 3/4 w^3, slave mode 3: xi_3 = -(1/32) w^3.
        let r = reduce_ch(0.0, 1.0, 1.0, 3);
        assert_eq!(r.center_modes, vec![1]);
        assert_relative_eq!(r.unfolding[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.nonlinear[0].coefficient(&[3]), -0.75, epsilon = 1e-12);
        assert_eq!(r.nonlinear[0].coefficient(&[2]), 0.0);
        let xi3 = &r.slaves.iter().find(|(s, _)| *s == 3).unwrap().1;
        assert_relative_eq!(xi3.coefficient(&[3]), -1.0 / 32.0, epsilon = 1e-12);
    }

    #[test]
    fn ch_reduction_with_quadratic_interaction() {
        // xi_2 = -(b2/6) w^2 and the effective cubic is b2^2/6 - (3/4) b3.
        let (b2, b3) = (0.9, 1.0);
        let r = reduce_ch(b2, b3, 1.0, 3);
        let xi2 = &r.slaves.iter().find(|(s, _)| *s == 2).unwrap().1;
        assert_relative_eq!(xi2.coefficient(&[2]), -b2 / 6.0, epsilon = 1e-12);
        assert_relative_eq!(
            r.nonlinear[0].coefficient(&[3]),
            b2 * b2 / 6.0 - 0.75 * b3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn one_mode_model_reduces_to_itself() {
        let m = build_custom(CustomModelSpec {
            label: "pitchfork".into(),
            mu: vec![1.0],
            linear: LinearPart::Affine {
                c0: vec![0.0],
                c1: vec![1.0],
            },
            quadratic: vec![QuadEntry {
                k: 1,
                i: 1,
                j: 1,
                value: 0.5,
            }],
            cubic: vec![CubicEntry {
                k: 1,
                i: 1,
                j: 1,
                l: 1,
                value: -1.0,
            }],
            gradient_info: None,
        })
        .unwrap();
        let c = crossing_data(&m, 0.0, 1e-9).unwrap();
        let r = reduce(&m, &c, 3).unwrap();
        assert!(r.slaves.is_empty());
        assert_relative_eq!(r.unfolding[0], 1.0, max_relative = 1e-14);
        assert_eq!(r.nonlinear[0].coefficient(&[2]), 0.5);
        assert_eq!(r.nonlinear[0].coefficient(&[3]), -1.0);
    }

    #[test]
    fn slave_graph_is_tangent() {
        let r = reduce_ch(0.7, 1.2, 1.0, 4);
        for (_, xi) in &r.slaves {
            assert_eq!(xi.coefficient(&[0]), 0.0);
            assert_eq!(xi.coefficient(&[1]), 0.0);
        }
    }

    #[test]
    fn orders_two_and_three_share_coefficients() {
        let r2 = reduce_ch(0.8, 1.1, 1.0, 2);
        let r3 = reduce_ch(0.8, 1.1, 1.0, 3);
        // order-2 terms agree exactly
        for (i, p2) in r2.nonlinear.iter().enumerate() {
            for (m, &c) in &p2.terms {
                assert_eq!(r3.nonlinear[i].terms.get(m).copied().unwrap_or(0.0), c);
            }
        }
        for ((s2, xi2), (s3, xi3)) in r2.slaves.iter().zip(&r3.slaves) {
            assert_eq!(s2, s3);
            for (m, &c) in &xi2.terms {
                assert_eq!(xi3.terms.get(m).copied().unwrap_or(0.0), c);
            }
        }
    }

    #[test]
    fn odd_symmetry_kills_even_coefficients() {
        // b2 = 0 makes the system odd: every even-degree coefficient of the
        // reduced field and of odd-mode slaves vanishes.
        let r = reduce_ch(0.0, 1.4, 1.0, 5);
        for p in &r.nonlinear {
            for (m, &c) in &p.terms {
                if m.degree() % 2 == 0 {
                    assert!(c.abs() < 1e-12, "even reduced coefficient {c}");
                }
            }
        }
        for (s, xi) in &r.slaves {
            if s % 2 == 1 {
                for (m, &c) in &xi.terms {
                    if m.degree() % 2 == 0 {
                        assert!(c.abs() < 1e-12, "even slave coefficient {c} on mode {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn evaluate_reduced_matches_pitchfork_root() {
        let r = reduce_ch(0.0, 1.0, 1.0, 3);
        assert_eq!(evaluate_reduced(&r, 0.1, &[0.0])[0], 0.0);
        let w_star = (4.0 * 0.1 / 3.0f64).sqrt();
        let v = evaluate_reduced(&r, 0.1, &[w_star])[0];
        assert!(v.abs() < 1e-12, "pitchfork equilibrium residual {v}");
        // nu = 0: pure nonlinear part
        let w = 0.2;
        assert_relative_eq!(
            evaluate_reduced(&r, 0.0, &[w])[0],
            -0.75 * w * w * w,
            epsilon = 1e-12
        );
    }

    #[test]
    fn residual_decays_at_order_p_plus_one() {
        let r = reduce_ch(0.6, 1.0, 1.0, 3);
        let m = ch(0.6, 1.0, 6);
        let r1 = invariance_residual(&m, &r, 0.1, 8).unwrap();
        let r2 = invariance_residual(&m, &r, 0.05, 8).unwrap();
        assert!(
            r1 / r2 >= 2.0f64.powi(4) * 0.8,
            "ratio {} below order-4 decay",
            r1 / r2
        );
        let r3 = invariance_residual(&m, &r, 0.05, 8).unwrap();
        let r4 = invariance_residual(&m, &r, 0.025, 8).unwrap();
        assert!(r3 / r4 >= 2.0f64.powi(4) * 0.8);
    }

    #[test]
    fn linear_model_has_zero_residual() {
        let m = build_custom(CustomModelSpec {
            label: "linear".into(),
            mu: vec![1.0, 4.0],
            linear: LinearPart::Affine {
                c0: vec![1.0, 16.0],
                c1: vec![1.0, 4.0],
            },
            quadratic: vec![],
            cubic: vec![],
            gradient_info: None,
        })
        .unwrap();
        let c = crossing_data(&m, 1.0, 1e-9).unwrap();
        let r = reduce(&m, &c, 3).unwrap();
        assert_eq!(invariance_residual(&m, &r, 0.1, 8).unwrap(), 0.0);
    }

    #[test]
    fn corrupted_coefficient_degrades_decay_order() {
        // Corrupt the quadratic slave coefficient: the residual then only
        // decays like h^2.
        let m = ch(0.8, 1.0, 6);
        let c = crossing_data(&m, 1.0, 1e-9).unwrap();
        let mut r = reduce(&m, &c, 3).unwrap();
        let slave2 = r.slaves.iter_mut().find(|(s, _)| *s == 2).unwrap();
        slave2.1.add_term(Monomial(vec![2]), 0.05);
        let r1 = invariance_residual(&m, &r, 0.1, 8).unwrap();
        let r2 = invariance_residual(&m, &r, 0.05, 8).unwrap();
        let ratio = r1 / r2;
        assert!(
            ratio < 6.0 && ratio > 3.0,
            "corrupted degree-2 decay ratio {ratio} should be near 4"
        );
    }

    #[test]
    fn lifted_equilibria_are_near_full_zeros() {
        // Lift the reduced pitchfork equilibrium and check the full residual
        // scales like |w|^(p+1) via the two-radius ratio test.
        let m = ch(0.0, 1.0, 6);
        let c = crossing_data(&m, 1.0, 1e-9).unwrap();
        let r = reduce(&m, &c, 3).unwrap();
        let residual_at = |nu: f64| -> f64 {
            let w = (4.0 * nu / 3.0f64).sqrt();
            let a = r.lift(&m, &[w]);
            let f = crate::model::vector_field(&m, 1.0 + nu, &a).unwrap();
            f.iter().map(|x| x * x).sum::<f64>().sqrt()
        };
        // w scales like sqrt(nu): nu/4 halves w, the p+1 = 4 decay gives 16.
        let q = residual_at(0.04) / residual_at(0.01);
        assert!(
            q > 10.0,
            "lifted-residual ratio {q} too small for order-4 decay"
        );
    }

    #[test]
    fn inconsistent_crossing_is_rejected() {
        // mu = (1, 1) but only mode 1 declared center.
        let m = build_custom(CustomModelSpec {
            label: "dup".into(),
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
                    k: 2,
                    i: 2,
                    j: 2,
                    l: 2,
                    value: -1.0,
                },
            ],
            gradient_info: None,
        })
        .unwrap();
        let mut c = crossing_data(&m, 1.0, 1e-9).unwrap();
        c.center_modes = vec![1];
        c.n = 1;
        assert!(matches!(
            reduce(&m, &c, 3),
            Err(Error::InconsistentCrossing { mode: 2, .. })
        ));
    }

    #[test]
    fn reduction_survives_a_json_round_trip() {
        let r = reduce_ch(0.7, 1.1, 1.0, 3);
        let text = serde_json::to_string(&r).unwrap();
        let back: ReducedField = serde_json::from_str(&text).unwrap();
        assert_eq!(back.center_modes, r.center_modes);
        assert_eq!(back.unfolding, r.unfolding);
        for w in [-0.3, 0.05, 0.2] {
            assert_eq!(
                evaluate_reduced(&back, 0.07, &[w]),
                evaluate_reduced(&r, 0.07, &[w])
            );
        }
        for ((s1, xi1), (s2, xi2)) in r.slaves.iter().zip(&back.slaves) {
            assert_eq!(s1, s2);
            assert_eq!(xi1, xi2);
        }
    }

    #[test]
    fn duplicate_mu_reduces_to_radial_cubic() {
        // Two equal modes with |w|^2 w coupling: reduced field is
        // w' = nu w - |w|^2 w in both components.
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
        assert_eq!(c.n, 2);
        let r = reduce(&m, &c, 3).unwrap();
        let w = [0.3, -0.2];
        let f = evaluate_reduced(&r, 0.1, &w);
        let nrm2 = w[0] * w[0] + w[1] * w[1];
        assert_relative_eq!(f[0], 0.1 * w[0] - nrm2 * w[0], epsilon = 1e-12);
        assert_relative_eq!(f[1], 0.1 * w[1] - nrm2 * w[1], epsilon = 1e-12);
    }
}
