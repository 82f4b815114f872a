//! Analysis of the lambda-parametrized linear spectrum.
//!
//! Models are diagonal in their declared basis, so the spectrum of the
//! linear part is exactly `{beta_k(lambda)}` and the spectral-gap
//! decomposition reduces to coordinate projection (the straightening
//! operator of the abstract theory is the identity here). Bifurcation
//! values are roots of the per-mode coefficients `beta_k`, found in closed
//! form for affine parts and via companion-matrix eigenvalues for
//! polynomial parts. All spectra here are real (the shipped models are
//! self-adjoint); conjugate complex pairs and Hopf crossings are an
//! extension point, not covered.

use crate::error::{Error, Result};
use crate::model::{LinearPart, SpectralModel};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Default tolerance when merging nearby roots into one crossing.
pub const ROOT_MERGE_TOL: f64 = 1e-9;
/// Crossings with |dbeta/dlambda| below this are flagged degenerate.
pub const TRANSVERSALITY_MIN: f64 = 1e-8;

/// Spectral bookkeeping for one bifurcation value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingData {
    pub lambda0: f64,
    /// Modes with `beta_k(lambda0) = 0` (1-based), ascending.
    pub center_modes: Vec<usize>,
    /// Crossing number `n = |center_modes|` (dimension of the center space).
    pub n: usize,
    /// Unstable dimension `m = #{k : beta_k(lambda0) < 0}` (the flow grows
    /// like `-beta`, so negative beta means an unstable mode).
    pub m: usize,
    /// Gap constants `(alpha1, alpha2, alpha3, alpha4)` with
    /// `sigma1 < -alpha1 < -alpha2 <= sigma2 < alpha3 < alpha4 < sigma3`
    /// holding on the reported interval `window`.
    pub gaps: (f64, f64, f64, f64),
    /// Interval `J0 = [lambda0 - eta, lambda0 + eta]` on which the gap chain
    /// was verified.
    pub window: (f64, f64),
    /// `(mode, dbeta/dlambda at lambda0)` per center mode.
    pub transversality: Vec<(usize, f64)>,
    /// +1 when the center eigenvalues move from negative to positive as
    /// lambda increases through lambda0, -1 for the reversed orientation
    /// (the Cahn-Hilliard case).
    pub h4_orientation: i8,
    /// Set when some center mode fails the transversality threshold;
    /// degenerate crossings are excluded from downstream pipelines unless
    /// forced.
    pub degenerate: bool,
}

/// Per-mode linear eigenvalues `(k, beta_k(lambda))`, exact evaluation.
pub fn linear_spectrum(model: &SpectralModel, lambda: f64) -> Vec<(usize, f64)> {
    (1..=model.dim())
        .map(|k| (k, model.beta(k, lambda)))
        .collect()
}

/// Real roots of a polynomial (coefficients constant-first) via the
/// companion matrix, polished with a few Newton steps.
fn real_poly_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut cs = coeffs.to_vec();
    while cs.last().is_some_and(|&c| c == 0.0) {
        cs.pop();
    }
    let deg = cs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-cs[0] / cs[1]];
    }
    let lead = cs[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for r in 1..deg {
        comp[(r, r - 1)] = 1.0;
    }
    for r in 0..deg {
        comp[(r, deg - 1)] = -cs[r] / lead;
    }
    let eigen = comp.complex_eigenvalues();
    let eval = |x: f64| cs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let dcs: Vec<f64> = cs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(p, &c)| p as f64 * c)
        .collect();
    let deval = |x: f64| dcs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let scale = cs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
    let mut roots = Vec::new();
    for ev in eigen.iter() {
        // Keep near-real eigenvalues; the residual test below rejects any
        // spurious ones. Double roots come out of the eigensolver with a
        // tiny imaginary perturbation, so the filter must stay loose.
        if ev.im.abs() > 1e-6 * (1.0 + ev.re.abs()) {
            continue;
        }
        let mut x = ev.re;
        for _ in 0..8 {
            let d = deval(x);
            if d == 0.0 {
                break;
            }
            x -= eval(x) / d;
        }
        if eval(x).abs() <= 1e-10 * scale * (1.0 + x.abs()) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// All roots of `beta_k` in `[lambda_lo, lambda_hi]`, as `(lambda, mode)`.
fn crossing_roots(model: &SpectralModel, lambda_lo: f64, lambda_hi: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    for k in 1..=model.dim() {
        let coeffs = match model.linear() {
            LinearPart::Affine { c0, c1 } => vec![c0[k - 1], -c1[k - 1]],
            LinearPart::Polynomial { coeffs } => coeffs[k - 1].clone(),
        };
        for r in real_poly_roots(&coeffs) {
            if r >= lambda_lo - 1e-12 && r <= lambda_hi + 1e-12 {
                out.push((r, k));
            }
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Detects every bifurcation value of the linear part in the window,
/// merging roots equal within `tol` into one crossing with `n` equal to the
/// multiplicity. Results are sorted ascending; degenerate (non-transversal)
/// crossings are flagged rather than dropped.
pub fn detect_bifurcation_values(
    model: &SpectralModel,
    lambda_lo: f64,
    lambda_hi: f64,
    tol: f64,
) -> Result<Vec<CrossingData>> {
    if !(lambda_lo < lambda_hi) {
        return Err(Error::Validation("need lambda_lo < lambda_hi".into()));
    }
    let roots = crossing_roots(model, lambda_lo, lambda_hi);
    let mut out = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        let mut j = i + 1;
        while j < roots.len() && roots[j].0 - roots[i].0 <= tol {
            j += 1;
        }
        let lambda0 = roots[i..j].iter().map(|r| r.0).sum::<f64>() / (j - i) as f64;
        out.push(crossing_data(model, lambda0, tol)?);
        i = j;
    }
    Ok(out)
}

/// Assembles the full [`CrossingData`] at a given bifurcation value.
///
/// The interval half-width `eta` is chosen as a fraction of the distance to
/// the nearest other crossing so that no second crossing enters `J0`; it is
/// then shrunk until the three spectral groups stay strictly separated over
/// the whole interval. Persistent failure reports the minimal separating
/// half-width through [`Error::IntervalTooTight`].
pub fn crossing_data(model: &SpectralModel, lambda0: f64, tol: f64) -> Result<CrossingData> {
    let n_modes = model.dim();
    let beta0: Vec<f64> = (1..=n_modes).map(|k| model.beta(k, lambda0)).collect();
    let center_modes: Vec<usize> = (1..=n_modes)
        .filter(|&k| beta0[k - 1].abs() <= tol)
        .collect();
    if center_modes.is_empty() {
        return Err(Error::Validation(format!(
            "lambda0={lambda0} is not a root of any beta_k within tol={tol}"
        )));
    }
    let unstable: Vec<usize> = (1..=n_modes).filter(|&k| beta0[k - 1] < -tol).collect();
    let stable: Vec<usize> = (1..=n_modes).filter(|&k| beta0[k - 1] > tol).collect();
    let m = unstable.len();
    let n = center_modes.len();

    let transversality: Vec<(usize, f64)> = center_modes
        .iter()
        .map(|&k| (k, model.dbeta(k, lambda0)))
        .collect();
    let degenerate = transversality
        .iter()
        .any(|(_, d)| d.abs() < TRANSVERSALITY_MIN)
        || {
            let signs: Vec<f64> = transversality.iter().map(|(_, d)| d.signum()).collect();
            signs.windows(2).any(|w| w[0] != w[1])
        };
    let h4_orientation: i8 = if degenerate || transversality[0].1 > 0.0 {
        1
    } else {
        -1
    };

    // Half-width of J0: stay clear of the nearest other crossing.
    let all_roots = crossing_roots(model, lambda0 - 1e6, lambda0 + 1e6);
    let nearest_other = all_roots
        .iter()
        .map(|r| (r.0 - lambda0).abs())
        .filter(|d| *d > tol.max(1e-9))
        .fold(f64::INFINITY, f64::min);
    let mut eta = if nearest_other.is_finite() {
        0.2 * nearest_other
    } else {
        0.5
    };

    // Shrink eta until the sign groups separate strictly over J0.
    let mut gaps = None;
    let min_eta = 1e-10 * (1.0 + lambda0.abs());
    while eta > min_eta {
        if let Some(g) = gap_constants(model, lambda0, eta, &unstable, &center_modes, &stable) {
            gaps = Some(g);
            break;
        }
        eta *= 0.5;
    }
    let gaps = gaps.ok_or(Error::IntervalTooTight {
        lambda0,
        min_eta: eta,
    })?;

    Ok(CrossingData {
        lambda0,
        center_modes,
        n,
        m,
        gaps,
        window: (lambda0 - eta, lambda0 + eta),
        transversality,
        h4_orientation,
        degenerate,
    })
}

/// Gap constants over `J0 = [lambda0 - eta, lambda0 + eta]`, or `None` when
/// the groups fail to separate on that interval. Groups are sampled on a
/// fixed lambda grid; the per-mode coefficients are polynomial in lambda
/// with modest degree, so sampling is adequate at these scales.
fn gap_constants(
    model: &SpectralModel,
    lambda0: f64,
    eta: f64,
    unstable: &[usize],
    center: &[usize],
    stable: &[usize],
) -> Option<(f64, f64, f64, f64)> {
    const SAMPLES: usize = 33;
    let range = |modes: &[usize]| -> Option<(f64, f64)> {
        if modes.is_empty() {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in 0..SAMPLES {
            let l = lambda0 - eta + 2.0 * eta * s as f64 / (SAMPLES - 1) as f64;
            for &k in modes {
                let b = model.beta(k, l);
                lo = lo.min(b);
                hi = hi.max(b);
            }
        }
        Some((lo, hi))
    };
    let center_range = range(center).expect("center group nonempty");
    let unstable_hi = range(unstable).map(|r| r.1);
    let stable_lo = range(stable).map(|r| r.0);

    // alpha2 bounds the center group from below, alpha3/alpha4 separate it
    // from the stable group, alpha1 separates the unstable group.
    let alpha2 = (-center_range.0).max(1e-12);
    let alpha1 = match unstable_hi {
        Some(hi) => {
            if hi >= -alpha2 {
                return None;
            }
            0.5 * (alpha2 - hi) // midway between -alpha2 and the group top
        }
        None => 2.0 * alpha2,
    };
    if alpha1 <= alpha2 {
        return None;
    }
    let top = center_range.1;
    let (alpha3, alpha4) = match stable_lo {
        Some(lo) => {
            if lo <= top {
                return None;
            }
            (top + (lo - top) / 3.0, top + 2.0 * (lo - top) / 3.0)
        }
        None => (top.abs() + 1.0, 2.0 * (top.abs() + 1.0)),
    };
    if !(top < alpha3 && alpha3 < alpha4) {
        return None;
    }
    Some((alpha1, alpha2, alpha3, alpha4))
}
