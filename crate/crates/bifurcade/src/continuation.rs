//! Global continuation of equilibrium branches and termination
//! classification against the global-bifurcation alternatives.
//!
//! Branches of the full Galerkin system are traced by pseudo-arclength
//! predictor-corrector steps (tangents from the bordered Jacobian, Newton
//! correction orthogonal to the tangent). A branch ends by leaving the
//! window (in parameter or norm), by reconnecting to the trivial solution
//! at another bifurcation value, by re-approaching the trivial solution at
//! its own origin, or by stalling. Only equilibrium branches are continued:
//! the shipped models are gradient-like, so their invariant sets are
//! generated by equilibria and connecting orbits, and the heteroclinic
//! probe covers the connecting structure; reports state this restriction.

use crate::center_manifold::reduce;
use crate::error::{Error, Result};
use crate::model::{
    integrate_to_steady, jacobian, lyapunov_value, vector_field, SpectralModel, SteadyOutcome,
};
use crate::spectrum::{detect_bifurcation_values, CrossingData};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Product window in parameter and weighted norm.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Window {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub v_norm_max: f64,
}

/// Pseudo-arclength stepping controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepConfig {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
    pub corrector_iters: usize,
    /// Norm below which a branch point counts as lying on the trivial branch.
    pub reconnect_tol: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            initial: 1e-2,
            min: 1e-4,
            max: 1e-1,
            max_steps: 20_000,
            corrector_tol: 1e-10,
            corrector_iters: 25,
            reconnect_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    HitParamBoundary(f64),
    HitNormBoundary(f64),
    /// Entered the trivial branch at a bifurcation value different from the
    /// branch origin.
    ReconnectTrivial(f64),
    /// Re-approached the trivial solution at the origin value itself.
    AccumulateAtZero(f64),
    MaxSteps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub a: Vec<f64>,
    pub v_norm: f64,
    pub n_unstable: usize,
    pub arclength: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchOrigin {
    pub lambda0: f64,
    pub center_modes: Vec<usize>,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub origin: Option<BranchOrigin>,
    /// Sign of the initial switching amplitude.
    pub direction: i8,
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    /// Indices of points where the stability signature changed, with the
    /// bracketing lambda midpoint. Recorded, never switched onto
    /// automatically.
    pub secondary_bifurcations: Vec<(usize, f64)>,
}

/// Stability-labelled piece of the trivial branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrivialBranch {
    /// `(lambda_from, lambda_to, unstable mode count)` segments.
    pub segments: Vec<(f64, f64, usize)>,
    /// Bifurcation values splitting the segments.
    pub breakpoints: Vec<f64>,
}

/// The trivial branch `a = 0` with per-segment unstable counts; breakpoints
/// are exactly the detected bifurcation values.
pub fn trace_trivial_branch(
    model: &SpectralModel,
    lambda_lo: f64,
    lambda_hi: f64,
) -> Result<TrivialBranch> {
    let crossings = detect_bifurcation_values(model, lambda_lo, lambda_hi, 1e-9)?;
    let breakpoints: Vec<f64> = crossings.iter().map(|c| c.lambda0).collect();
    let mut edges = vec![lambda_lo];
    edges.extend(&breakpoints);
    edges.push(lambda_hi);
    let mut segments = Vec::new();
    for pair in edges.windows(2) {
        if pair[1] - pair[0] < 1e-12 {
            continue;
        }
        let mid = 0.5 * (pair[0] + pair[1]);
        let unstable = (1..=model.dim())
            .filter(|&k| model.beta(k, mid) < 0.0)
            .count();
        segments.push((pair[0], pair[1], unstable));
    }
    Ok(TrivialBranch {
        segments,
        breakpoints,
    })
}

fn dfield_dlambda(model: &SpectralModel, lambda: f64, a: &[f64]) -> Vec<f64> {
    (1..=model.dim())
        .map(|k| -model.dbeta(k, lambda) * a[k - 1])
        .collect()
}

fn unstable_count(model: &SpectralModel, lambda: f64, a: &[f64]) -> usize {
    let j = jacobian(model, lambda, a).expect("dimension checked");
    let n = model.dim();
    let mat = DMatrix::from_fn(n, n, |r, c| j[r][c]);
    mat.complex_eigenvalues()
        .iter()
        .filter(|e| e.re > 1e-8)
        .count()
}

/// Newton solve of `f(a) = 0` at fixed lambda.
fn newton_fixed_lambda(
    model: &SpectralModel,
    lambda: f64,
    a0: &[f64],
    tol: f64,
    iters: usize,
) -> Option<Vec<f64>> {
    let n = model.dim();
    let mut a = a0.to_vec();
    for _ in 0..iters {
        let f = vector_field(model, lambda, &a).ok()?;
        let fnorm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        if fnorm <= tol {
            return Some(a);
        }
        let j = jacobian(model, lambda, &a).ok()?;
        let mat = DMatrix::from_fn(n, n, |r, c| j[r][c]);
        let rhs = DVector::from_fn(n, |r, _| -f[r]);
        let delta = mat.lu().solve(&rhs)?;
        for i in 0..n {
            a[i] += delta[i];
            if !a[i].is_finite() {
                return None;
            }
        }
    }
    let f = vector_field(model, lambda, &a).ok()?;
    if f.iter().map(|x| x * x).sum::<f64>().sqrt() <= tol {
        Some(a)
    } else {
        None
    }
}

/// Tangent of the solution curve at `(a, lambda)` from the bordered system
/// `[J | df/dlambda; border^T] t = e_(n+1)`, normalized. Falls back over a
/// small set of bordering directions when the first choice is singular.
fn curve_tangent(
    model: &SpectralModel,
    lambda: f64,
    a: &[f64],
    border: Option<&DVector<f64>>,
) -> Option<DVector<f64>> {
    let n = model.dim();
    let j = jacobian(model, lambda, a).ok()?;
    let fl = dfield_dlambda(model, lambda, a);
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    if let Some(b) = border {
        candidates.push(b.clone());
    }
    // amplitude direction, then lambda direction, then coordinates
    let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a > 1e-12 {
        let mut v = DVector::zeros(n + 1);
        for i in 0..n {
            v[i] = a[i] / norm_a;
        }
        candidates.push(v);
    }
    let mut vl = DVector::zeros(n + 1);
    vl[n] = 1.0;
    candidates.push(vl);
    for i in 0..n {
        let mut v = DVector::zeros(n + 1);
        v[i] = 1.0;
        candidates.push(v);
    }

    for cand in candidates {
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = j[r][c];
            }
            m[(r, n)] = fl[r];
        }
        for c in 0..=n {
            m[(n, c)] = cand[c];
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        if let Some(t) = m.lu().solve(&rhs) {
            let norm = t.norm();
            if norm > 1e-12 && t.iter().all(|v| v.is_finite()) {
                return Some(t / norm);
            }
        }
    }
    None
}

/// One pseudo-arclength correction: Newton on `[f(a, lambda); t.(x - x_pred)]`
/// from the initial guess `start` (usually the predictor itself).
fn palc_correct(
    model: &SpectralModel,
    pred: &DVector<f64>,
    start: &DVector<f64>,
    tangent: &DVector<f64>,
    tol: f64,
    iters: usize,
) -> Option<DVector<f64>> {
    let n = model.dim();
    let mut x = start.clone();
    for _ in 0..iters {
        let a: Vec<f64> = x.iter().take(n).cloned().collect();
        let lambda = x[n];
        let f = vector_field(model, lambda, &a).ok()?;
        let constraint: f64 = (0..=n).map(|i| tangent[i] * (x[i] - pred[i])).sum();
        let mut rnorm = constraint * constraint;
        for v in &f {
            rnorm += v * v;
        }
        if rnorm.sqrt() <= tol {
            return Some(x);
        }
        let j = jacobian(model, lambda, &a).ok()?;
        let fl = dfield_dlambda(model, lambda, &a);
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = j[r][c];
            }
            m[(r, n)] = fl[r];
        }
        for c in 0..=n {
            m[(n, c)] = tangent[c];
        }
        let mut rhs = DVector::zeros(n + 1);
        for r in 0..n {
            rhs[r] = -f[r];
        }
        rhs[n] = -constraint;
        let delta = m.lu().solve(&rhs)?;
        x += delta;
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    None
}

/// Predictor for a branch leaving a scalar crossing: `a = h e_c + xi(h)`
/// lifted through the slave graph, at the parameter offset where the
/// reduced field has an equilibrium of amplitude `h`; Newton-corrected at
/// fixed lambda before returning.
pub fn switch_branch(
    model: &SpectralModel,
    crossing: &CrossingData,
    amplitude: f64,
) -> Result<(f64, Vec<f64>)> {
    if crossing.n != 1 {
        return Err(Error::WrongArity {
            expected: 1,
            got: crossing.n,
        });
    }
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(Error::Validation("switch amplitude must be nonzero".into()));
    }
    let reduced = reduce(model, crossing, 3)?;
    let u = reduced.unfolding[0];
    let c2 = reduced.nonlinear[0].coefficient(&[2]);
    let c3 = reduced.nonlinear[0].coefficient(&[3]);
    if u.abs() < 1e-12 || (c2.abs() < 1e-12 && c3.abs() < 1e-12) {
        return Err(Error::SwitchFailed {
            lambda0: crossing.lambda0,
            details: "degenerate reduction: no usable leading coefficient".into(),
        });
    }
    let h = amplitude;
    let nu = -(c2 * h + c3 * h * h) / u;
    let lambda = crossing.lambda0 + nu;
    let a_pred = reduced.lift(model, &[h]);
    let a = newton_fixed_lambda(model, lambda, &a_pred, 1e-12, 20).ok_or_else(|| {
        Error::SwitchFailed {
            lambda0: crossing.lambda0,
            details: format!("corrector failed from amplitude {h}"),
        }
    })?;
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 0.5 * h.abs() {
        return Err(Error::SwitchFailed {
            lambda0: crossing.lambda0,
            details: "corrector collapsed onto the trivial branch".into(),
        });
    }
    Ok((lambda, a))
}

/// Traces an equilibrium branch from a corrected starting point until it
/// leaves the window or terminates per the global alternatives.
pub fn continue_branch(
    model: &SpectralModel,
    start_lambda: f64,
    start_a: &[f64],
    origin: Option<BranchOrigin>,
    window: &Window,
    cfg: &StepConfig,
) -> Result<Branch> {
    model.validate_state(start_a)?;
    if !(window.lambda_lo < window.lambda_hi) || !(window.v_norm_max > 0.0) {
        return Err(Error::Validation("window must be nondegenerate".into()));
    }
    let n = model.dim();
    let direction: i8 = 1;

    // bifurcation values for reconnect matching (slightly widened window)
    let pad = 0.01 * (window.lambda_hi - window.lambda_lo);
    let known_crossings: Vec<f64> =
        detect_bifurcation_values(model, window.lambda_lo - pad, window.lambda_hi + pad, 1e-9)?
            .iter()
            .map(|c| c.lambda0)
            .collect();

    let mut x = DVector::zeros(n + 1);
    for i in 0..n {
        x[i] = start_a[i];
    }
    x[n] = start_lambda;

    let mut tangent = curve_tangent(model, start_lambda, start_a, None)
        .ok_or_else(|| Error::Validation("no tangent at the starting point".into()))?;
    // orient outward: increasing amplitude, falling back to increasing lambda
    let amp_growth: f64 = (0..n).map(|i| x[i] * tangent[i]).sum();
    let degenerate_start = amp_growth.abs() <= 1e-12;
    if amp_growth < -1e-12 || (degenerate_start && tangent[n] < 0.0) {
        tangent = -tangent;
    }

    let mut points = Vec::new();
    let mut arclength = 0.0;
    let push_point = |points: &mut Vec<BranchPoint>, x: &DVector<f64>, arclength: f64| {
        let a: Vec<f64> = x.iter().take(n).cloned().collect();
        let lambda = x[n];
        points.push(BranchPoint {
            lambda,
            v_norm: model.v_norm(&a),
            n_unstable: unstable_count(model, lambda, &a),
            a,
            arclength,
        });
    };
    push_point(&mut points, &x, arclength);

    let mut step = cfg.initial;
    let mut termination = Termination::MaxSteps;
    let mut consecutive_failures = 0usize;

    for _ in 0..cfg.max_steps {
        // amplitude-scaled stepping near the trivial branch so a
        // reconnection lands below the reconnect tolerance instead of being
        // jumped over
        let amp = (0..n).map(|i| x[i] * x[i]).sum::<f64>().sqrt();
        let mut local_max = cfg.max;
        if amp < 0.1 && points.len() > 1 {
            local_max = (0.5 * amp).max(1e-9);
            step = step.min(local_max);
        }

        let pred = &x + &tangent * step;
        let corrected = palc_correct(
            model,
            &pred,
            &pred,
            &tangent,
            cfg.corrector_tol,
            cfg.corrector_iters,
        )
        .and_then(|next| {
            // near the trivial branch the equilibrium equation degenerates
            // like amp^3; rescale the residual demand so accepted points sit
            // on the true branch rather than in its numerical shadow
            let amp_next = (0..n).map(|i| next[i] * next[i]).sum::<f64>().sqrt();
            if amp_next < 0.01 && points.len() > 1 {
                let tight = (1e-9 * amp_next).max(1e-16);
                palc_correct(model, &pred, &next, &tangent, tight, cfg.corrector_iters)
            } else {
                Some(next)
            }
        });
        match corrected {
            Some(next) => {
                let ds = (&next - &x).norm();
                let a_next: Vec<f64> = next.iter().take(n).cloned().collect();
                let lambda_next = next[n];
                let norm_next = a_next.iter().map(|v| v * v).sum::<f64>().sqrt();

                // a reversed orientation of the mode vector means the step
                // jumped across the trivial branch; back off and resolve the
                // crossing instead
                let reversal: f64 = (0..n).map(|i| x[i] * next[i]).sum();
                if reversal < 0.0 && norm_next > cfg.reconnect_tol && points.len() > 1 {
                    step *= 0.25;
                    if step < 1e-12 {
                        termination = Termination::MaxSteps;
                        break;
                    }
                    continue;
                }
                consecutive_failures = 0;

                // termination: trivial-branch arrival
                if norm_next <= cfg.reconnect_tol && points.len() > 1 {
                    arclength += ds;
                    x = next;
                    push_point(&mut points, &x, arclength);
                    let lambda1 = lambda_next;
                    let origin_lambda = origin.as_ref().map(|o| o.lambda0);
                    let near_origin = origin_lambda.is_some_and(|l0| (lambda1 - l0).abs() < 1e-4);
                    let near_other = known_crossings.iter().any(|&c| {
                        (lambda1 - c).abs() < 1e-4
                            && origin_lambda.is_none_or(|l0| (c - l0).abs() > 1e-9)
                    });
                    termination = if near_origin {
                        Termination::AccumulateAtZero(lambda1)
                    } else if near_other {
                        Termination::ReconnectTrivial(lambda1)
                    } else {
                        log::warn!(
                            "branch entered the trivial solution at lambda={lambda1} which matches no detected bifurcation value"
                        );
                        Termination::MaxSteps
                    };
                    break;
                }

                // termination: parameter boundary
                if lambda_next > window.lambda_hi || lambda_next < window.lambda_lo {
                    let boundary = if lambda_next > window.lambda_hi {
                        window.lambda_hi
                    } else {
                        window.lambda_lo
                    };
                    if let Some(a_b) =
                        newton_fixed_lambda(model, boundary, &a_next, cfg.corrector_tol, 30)
                    {
                        let mut xb = DVector::zeros(n + 1);
                        for i in 0..n {
                            xb[i] = a_b[i];
                        }
                        xb[n] = boundary;
                        arclength += (&xb - &x).norm();
                        push_point(&mut points, &xb, arclength);
                    }
                    termination = Termination::HitParamBoundary(boundary);
                    break;
                }

                arclength += ds;
                x = next;
                push_point(&mut points, &x, arclength);

                // termination: norm boundary
                let v_norm = points.last().unwrap().v_norm;
                if v_norm > window.v_norm_max {
                    termination = Termination::HitNormBoundary(v_norm);
                    break;
                }

                let mut new_tangent = curve_tangent(model, x[n], &a_next, Some(&tangent))
                    .unwrap_or_else(|| tangent.clone());
                if new_tangent.dot(&tangent) < 0.0 {
                    new_tangent = -new_tangent;
                }
                tangent = new_tangent;
                step = (step * 1.4).min(local_max);
            }
            None => {
                consecutive_failures += 1;
                step *= 0.5;
                if step < cfg.min.min(local_max) || consecutive_failures > 40 {
                    termination = Termination::MaxSteps;
                    break;
                }
            }
        }
    }

    // stability-signature changes mark secondary bifurcation candidates
    let mut secondary = Vec::new();
    for i in 1..points.len() {
        if points[i].n_unstable != points[i - 1].n_unstable {
            secondary.push((i, 0.5 * (points[i].lambda + points[i - 1].lambda)));
        }
    }

    Ok(Branch {
        origin,
        direction,
        points,
        termination,
        secondary_bifurcations: secondary,
    })
}

/// Branch continuation starting from a crossing: switch then continue.
pub fn branch_from_crossing(
    model: &SpectralModel,
    crossing: &CrossingData,
    amplitude: f64,
    window: &Window,
    cfg: &StepConfig,
) -> Result<Branch> {
    let (lambda, a) = switch_branch(model, crossing, amplitude)?;
    let origin = BranchOrigin {
        lambda0: crossing.lambda0,
        center_modes: crossing.center_modes.clone(),
        n: crossing.n,
        m: crossing.m,
    };
    let mut branch = continue_branch(model, lambda, &a, Some(origin), window, cfg)?;
    branch.direction = if amplitude > 0.0 { 1 } else { -1 };
    Ok(branch)
}

/// Which global alternative a finished branch realizes.
pub fn alternative_label(t: &Termination) -> &'static str {
    match t {
        Termination::HitParamBoundary(_) | Termination::HitNormBoundary(_) => {
            "(1) branch meets the window boundary"
        }
        Termination::AccumulateAtZero(_) => {
            "(2) evidence: branch re-approaches the trivial solution at its origin"
        }
        Termination::ReconnectTrivial(_) => {
            "(3) branch reconnects to the trivial solution at another bifurcation value"
        }
        Termination::MaxSteps => "unresolved (step limit)",
    }
}

/// Per-crossing outcome inside a global report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchReport {
    pub lambda0: f64,
    pub n: usize,
    pub m: usize,
    pub branch: Option<Branch>,
    pub alternative: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlobalReport {
    pub window: Window,
    pub crossings: Vec<CrossingData>,
    pub branches: Vec<BranchReport>,
    /// min/max lambda over all branch points (proxies for the branch
    /// extent bounds).
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    /// Only equilibrium branches are continued; connecting orbits are
    /// probed separately.
    pub scope_note: String,
}

/// Runs detect -> switch -> continue for every non-degenerate crossing in
/// the window and labels each branch with the alternative it realizes.
/// Per-branch failures are recorded, not fatal.
pub fn global_report(
    model: &SpectralModel,
    window: &Window,
    amplitude: f64,
    cfg: &StepConfig,
) -> Result<GlobalReport> {
    let crossings = detect_bifurcation_values(model, window.lambda_lo, window.lambda_hi, 1e-9)?;
    let mut branches = Vec::new();
    for crossing in &crossings {
        if crossing.degenerate {
            branches.push(BranchReport {
                lambda0: crossing.lambda0,
                n: crossing.n,
                m: crossing.m,
                branch: None,
                alternative: None,
                error: Some("degenerate crossing: excluded from continuation".into()),
            });
            continue;
        }
        match branch_from_crossing(model, crossing, amplitude, window, cfg) {
            Ok(branch) => {
                let alternative = alternative_label(&branch.termination).to_string();
                branches.push(BranchReport {
                    lambda0: crossing.lambda0,
                    n: crossing.n,
                    m: crossing.m,
                    branch: Some(branch),
                    alternative: Some(alternative),
                    error: None,
                });
            }
            Err(e) => branches.push(BranchReport {
                lambda0: crossing.lambda0,
                n: crossing.n,
                m: crossing.m,
                branch: None,
                alternative: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let mut lambda_min = None;
    let mut lambda_max = None;
    for b in branches.iter().filter_map(|r| r.branch.as_ref()) {
        for p in &b.points {
            lambda_min = Some(lambda_min.map_or(p.lambda, |m: f64| m.min(p.lambda)));
            lambda_max = Some(lambda_max.map_or(p.lambda, |m: f64| m.max(p.lambda)));
        }
    }
    Ok(GlobalReport {
        window: *window,
        crossings,
        branches,
        lambda_min,
        lambda_max,
        scope_note:
            "equilibrium branches only; connecting orbits are covered by the heteroclinic probe"
                .into(),
    })
}

/// One probed orbit of the heteroclinic structure around the trivial
/// solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeOrbit {
    /// Mode index and sign of the seeding eigendirection.
    pub mode: usize,
    pub sign: i8,
    /// Forward orbits seeded along unstable directions (alpha limit at 0)
    /// or time-reversed orbits along stable directions (omega limit at 0).
    pub kind: ProbeKind,
    pub limit: ProbeLimit,
    /// Lyapunov value at the trivial end of the connection.
    pub j_at_zero: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeKind {
    SigmaMinus,
    SigmaPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProbeLimit {
    Converged { point: Vec<f64>, j: f64 },
    Diverged { t: f64 },
    TimedOut,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeteroclinicProbe {
    pub lambda: f64,
    pub found: Vec<ProbeOrbit>,
    pub note: Option<String>,
    pub verdict: String,
}

/// Launches trajectories from `eps` times the unstable eigendirections of
/// the trivial solution (forward time) and the stable ones (reversed time),
/// recording limit points and Lyapunov values at both ends.
pub fn heteroclinic_probe(
    model: &SpectralModel,
    lambda: f64,
    n_directions: usize,
    t_max: f64,
) -> Result<HeteroclinicProbe> {
    if model.gradient_info.is_none() {
        return Err(Error::Unsupported(
            "heteroclinic probes need a gradient-capable model".into(),
        ));
    }
    const EPS: f64 = 1e-4;
    let unstable: Vec<usize> = (1..=model.dim())
        .filter(|&k| model.beta(k, lambda) < 0.0)
        .collect();
    if unstable.is_empty() {
        return Ok(HeteroclinicProbe {
            lambda,
            found: Vec::new(),
            note: Some("trivial solution has no unstable direction here; nothing to probe".into()),
            verdict: "no probe".into(),
        });
    }
    let stable: Vec<usize> = (1..=model.dim())
        .filter(|&k| model.beta(k, lambda) > 0.0)
        .collect();

    let mut found = Vec::new();
    let steady_tol = 1e-6;
    for (&k, kind) in unstable
        .iter()
        .take(n_directions)
        .map(|k| (k, ProbeKind::SigmaMinus))
        .chain(
            stable
                .iter()
                .take(n_directions)
                .map(|k| (k, ProbeKind::SigmaPlus)),
        )
    {
        for sign in [1i8, -1i8] {
            let mut seed = vec![0.0; model.dim()];
            seed[k - 1] = EPS * sign as f64;
            let reversed = kind == ProbeKind::SigmaPlus;
            let outcome = integrate_to_steady(model, lambda, &seed, t_max, steady_tol, reversed)?;
            let limit = match outcome {
                SteadyOutcome::Converged { a, .. } => {
                    let a = newton_fixed_lambda(model, lambda, &a, 1e-12, 10).unwrap_or(a);
                    let j = lyapunov_value(model, lambda, &a)?;
                    ProbeLimit::Converged { point: a, j }
                }
                SteadyOutcome::Diverged { t } => ProbeLimit::Diverged { t },
                SteadyOutcome::TimedOut { .. } => ProbeLimit::TimedOut,
            };
            found.push(ProbeOrbit {
                mode: k,
                sign,
                kind,
                limit,
                j_at_zero: 0.0,
            });
        }
    }

    let negatives = found
        .iter()
        .filter(|o| {
            o.kind == ProbeKind::SigmaMinus
                && matches!(&o.limit, ProbeLimit::Converged { j, .. } if *j < 0.0)
        })
        .count();
    let verdict =
        format!(
        "{negatives} of {} descending connections end at nontrivial equilibria with J below J(0)=0",
        found.iter().filter(|o| o.kind == ProbeKind::SigmaMinus).count()
    );
    Ok(HeteroclinicProbe {
        lambda,
        found,
        note: None,
        verdict,
    })
}
