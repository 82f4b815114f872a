//! Spectral Galerkin evolution models `u_t + L_lambda u = g_lambda(u)`.
//!
//! A model is a finite list of modes with eigenvalues `mu_k` of the base
//! diffusion operator, a lambda-dependent linear coefficient `beta_k(lambda)`
//! per mode, and symmetric quadratic/cubic interaction tensors. The built-in
//! instance is the 1D Cahn-Hilliard equation in the unnormalized cosine basis
//! `cos(k pi x / L)` on `(0, L)` with the mean mode projected out; arbitrary
//! diagonal models can be assembled with [`build_custom`] or loaded from a
//! JSON document (see [`ModelFile`]).
//!
//! Mode indices in the public API are 1-based throughout (`k = 1..=N`),
//! matching the eigenvalue numbering `mu_1 <= mu_2 <= ...`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Lambda-dependence of the linear coefficient `beta_k(lambda)`.
///
/// The affine form `beta_k = c0_k - lambda * c1_k` covers the Cahn-Hilliard
/// family; the polynomial form admits crafted linear parts such as
/// `beta(lambda) = (lambda - 1)(lambda - 2)` used to exercise branch
/// reconnection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LinearPart {
    /// `beta_k(lambda) = c0[k] - lambda * c1[k]`.
    Affine { c0: Vec<f64>, c1: Vec<f64> },
    /// Per-mode coefficients of powers of lambda, constant term first.
    Polynomial { coeffs: Vec<Vec<f64>> },
}

impl LinearPart {
    fn dim(&self) -> usize {
        match self {
            LinearPart::Affine { c0, .. } => c0.len(),
            LinearPart::Polynomial { coeffs } => coeffs.len(),
        }
    }

    /// `beta_k(lambda)` for 0-based mode index.
    fn beta_at(&self, idx: usize, lambda: f64) -> f64 {
        match self {
            LinearPart::Affine { c0, c1 } => c0[idx] - lambda * c1[idx],
            LinearPart::Polynomial { coeffs } => coeffs[idx]
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * lambda + c),
        }
    }

    /// `dbeta_k/dlambda` for 0-based mode index.
    fn dbeta_at(&self, idx: usize, lambda: f64) -> f64 {
        match self {
            LinearPart::Affine { c1, .. } => -c1[idx],
            LinearPart::Polynomial { coeffs } => {
                let cs = &coeffs[idx];
                cs.iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (p, &c)| acc * lambda + p as f64 * c)
            }
        }
    }

    /// Polynomial coefficients of `beta_k` (constant term first).
    pub fn poly_coeffs(&self, idx: usize) -> Vec<f64> {
        match self {
            LinearPart::Affine { c0, c1 } => vec![c0[idx], -c1[idx]],
            LinearPart::Polynomial { coeffs } => coeffs[idx].clone(),
        }
    }
}

/// Canonical sparse entry of the quadratic tensor: `i <= j`, both 1-based.
/// `value` is the coefficient of `a_i a_j` in mode `k`'s equation as it
/// appears in the full symmetric sum over ordered index pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadEntry {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Canonical sparse entry of the cubic tensor: `i <= j <= l`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicEntry {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub value: f64,
}

impl QuadEntry {
    /// Number of ordered pairs represented by this canonical entry.
    pub fn multiplicity(&self) -> f64 {
        if self.i == self.j {
            1.0
        } else {
            2.0
        }
    }
}

impl CubicEntry {
    /// Number of ordered triples represented by this canonical entry.
    pub fn multiplicity(&self) -> f64 {
        if self.i == self.j && self.j == self.l {
            1.0
        } else if self.i == self.j || self.j == self.l {
            3.0
        } else {
            6.0
        }
    }
}

/// Analytic form of the Lyapunov functional attached to a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialForm {
    /// Free energy `J(u) = 1/2 |grad u|^2 + int F_lambda(u) dx` with
    /// `F_lambda(s) = -lambda/2 s^2 + b2/3 s^3 + b3/4 s^4`, evaluated in the
    /// unnormalized cosine basis on `(0, length)`.
    CosineQuartic { length: f64, b2: f64, b3: f64 },
    /// Single-mode potential `V(a) = beta(lambda) a^2/2 - Q a^3/3 - C a^4/4`
    /// derived from the model's own coefficients, so that `da/dt = -V'(a)`.
    ScalarPolynomial,
}

/// Optional data enabling exact evaluation of the Lyapunov functional and
/// the eigenfunction cube integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientInfo {
    pub potential: PotentialForm,
    /// Declared `int e_k^3 dx` per mode. `None` means the cosine closed form
    /// (identically zero) applies.
    pub cube_integrals: Option<Vec<f64>>,
}

/// Finite spectral Galerkin model. Immutable after construction; all
/// operations on it are pure functions and safe to call concurrently.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralModel {
    pub label: String,
    dim: usize,
    mu: Vec<f64>,
    linear: LinearPart,
    quadratic: Vec<QuadEntry>,
    cubic: Vec<CubicEntry>,
    pub gradient_info: Option<GradientInfo>,
}

/// A point of phase space together with the parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub lambda: f64,
    pub a: Vec<f64>,
}

impl State {
    pub fn new(model: &SpectralModel, lambda: f64, a: Vec<f64>) -> Result<Self> {
        model.validate_state(&a)?;
        Ok(State { lambda, a })
    }
}

/// How a numerical integration ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IntegrationOutcome {
    Completed,
    /// The state norm exceeded the blow-up bound at time `t`. This is a
    /// reported outcome, not an error.
    Diverged {
        t: f64,
        norm: f64,
    },
}

/// Sampled solution of the Galerkin ODE at a fixed parameter value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub lambda: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub outcome: IntegrationOutcome,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }
}

/// Norm bound beyond which a trajectory is declared divergent.
pub const BLOWUP_BOUND: f64 = 1e6;

impl SpectralModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvalue `mu_k` of the base diffusion operator, 1-based `k`.
    pub fn mu(&self, k: usize) -> f64 {
        self.mu[k - 1]
    }

    pub fn mu_slice(&self) -> &[f64] {
        &self.mu
    }

    pub fn linear(&self) -> &LinearPart {
        &self.linear
    }

    pub fn quadratic_entries(&self) -> &[QuadEntry] {
        &self.quadratic
    }

    pub fn cubic_entries(&self) -> &[CubicEntry] {
        &self.cubic
    }

    /// `beta_k(lambda)`, 1-based `k`.
    pub fn beta(&self, k: usize, lambda: f64) -> f64 {
        self.linear.beta_at(k - 1, lambda)
    }

    /// `dbeta_k/dlambda`, 1-based `k`.
    pub fn dbeta(&self, k: usize, lambda: f64) -> f64 {
        self.linear.dbeta_at(k - 1, lambda)
    }

    /// Quadratic tensor entry `Q[k][i][j]` (full symmetric value), 1-based.
    pub fn q_entry(&self, k: usize, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.quadratic
            .iter()
            .find(|e| e.k == k && e.i == i && e.j == j)
            .map(|e| e.value)
            .unwrap_or(0.0)
    }

    /// Cubic tensor entry `C[k][i][j][l]` (full symmetric value), 1-based.
    pub fn c_entry(&self, k: usize, i: usize, j: usize, l: usize) -> f64 {
        let mut s = [i, j, l];
        s.sort_unstable();
        self.cubic
            .iter()
            .find(|e| e.k == k && e.i == s[0] && e.j == s[1] && e.l == s[2])
            .map(|e| e.value)
            .unwrap_or(0.0)
    }

    pub fn validate_state(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.dim {
            return Err(Error::InvalidState(format!(
                "state has {} modes, model '{}' has {}",
                a.len(),
                self.label,
                self.dim
            )));
        }
        Ok(())
    }

    /// Weighted norm `(sum mu_k a_k^2)^(1/2)` used for reporting.
    pub fn v_norm(&self, a: &[f64]) -> f64 {
        a.iter()
            .zip(&self.mu)
            .map(|(&x, &m)| m * x * x)
            .sum::<f64>()
            .sqrt()
    }
}

fn validate_common(model: &SpectralModel) -> Result<()> {
    let n = model.dim;
    if n == 0 {
        return Err(Error::InvalidModel("model needs at least one mode".into()));
    }
    if model.mu.len() != n || model.linear.dim() != n {
        return Err(Error::InvalidModel(
            "mu and linear coefficient lists must match dim".into(),
        ));
    }
    if model.mu.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidModel(
            "mu entries must be positive and finite".into(),
        ));
    }
    if model.mu.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidModel(
            "mu must be sorted non-decreasing".into(),
        ));
    }
    for e in &model.quadratic {
        if e.k == 0 || e.k > n || e.i == 0 || e.j == 0 || e.i > n || e.j > n {
            return Err(Error::InvalidModel(format!(
                "quadratic entry ({},{},{}) out of range 1..={}",
                e.k, e.i, e.j, n
            )));
        }
        if e.i > e.j {
            return Err(Error::InvalidModel(format!(
                "quadratic entry ({},{},{}) is not canonical (need i <= j)",
                e.k, e.i, e.j
            )));
        }
        if !e.value.is_finite() {
            return Err(Error::InvalidModel(
                "non-finite quadratic tensor entry".into(),
            ));
        }
    }
    for e in &model.cubic {
        if e.k == 0 || e.k > n || [e.i, e.j, e.l].iter().any(|&x| x == 0 || x > n) {
            return Err(Error::InvalidModel(format!(
                "cubic entry ({},{},{},{}) out of range 1..={}",
                e.k, e.i, e.j, e.l, n
            )));
        }
        if !(e.i <= e.j && e.j <= e.l) {
            return Err(Error::InvalidModel(format!(
                "cubic entry ({},{},{},{}) is not canonical (need i <= j <= l)",
                e.k, e.i, e.j, e.l
            )));
        }
        if !e.value.is_finite() {
            return Err(Error::InvalidModel("non-finite cubic tensor entry".into()));
        }
    }
    let mut qkeys: Vec<(usize, usize, usize)> =
        model.quadratic.iter().map(|e| (e.k, e.i, e.j)).collect();
    qkeys.sort_unstable();
    if qkeys.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidModel(
            "duplicate quadratic tensor entry".into(),
        ));
    }
    let mut ckeys: Vec<(usize, usize, usize, usize)> =
        model.cubic.iter().map(|e| (e.k, e.i, e.j, e.l)).collect();
    ckeys.sort_unstable();
    if ckeys.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidModel("duplicate cubic tensor entry".into()));
    }
    if let Some(info) = &model.gradient_info {
        if let Some(cubes) = &info.cube_integrals {
            if cubes.len() != n {
                return Err(Error::InvalidModel(
                    "cube_integrals must list one value per mode".into(),
                ));
            }
        }
        if matches!(info.potential, PotentialForm::ScalarPolynomial) && n != 1 {
            return Err(Error::InvalidModel(
                "the scalar-polynomial potential applies to single-mode models only".into(),
            ));
        }
    }
    Ok(())
}

/// Builds the 1D Cahn-Hilliard Galerkin model
/// `u_t + Delta^2 u + lambda Delta u = Delta(b2 u^2 + b3 u^3)` on `(0, L)`
/// with Neumann conditions and zero mean, truncated to modes `1..=n_modes`.
///
/// Nonlinear tensors come from the exact cosine product-to-sum integrals;
/// the Laplacian on the right-hand side contributes the factor `-mu_k` in
/// front of each projection.
pub fn build_cahn_hilliard_1d(
    length: f64,
    b2: f64,
    b3: f64,
    n_modes: usize,
) -> Result<SpectralModel> {
    if !(length > 0.0) {
        return Err(Error::InvalidModel("domain length must be positive".into()));
    }
    if !(b3 > 0.0) {
        return Err(Error::InvalidModel("b3 must be positive".into()));
    }
    if n_modes < 3 {
        return Err(Error::InvalidModel(
            "need at least 3 modes (cubic slaving requires mode 3)".into(),
        ));
    }
    let n = n_modes;
    let mu: Vec<f64> = (1..=n)
        .map(|k| {
            let w = k as f64 * std::f64::consts::PI / length;
            w * w
        })
        .collect();
    let c0: Vec<f64> = mu.iter().map(|&m| m * m).collect();
    let c1: Vec<f64> = mu.clone();

    // <e_i e_j, e_k> / ||e_k||^2 = (delta_{k,i+j} + delta_{k,|i-j|}) / 2
    let mut quadratic = Vec::new();
    if b2 != 0.0 {
        for k in 1..=n {
            for i in 1..=n {
                for j in i..=n {
                    let mut t = 0.0;
                    if i + j == k {
                        t += 0.5;
                    }
                    if j - i == k {
                        t += 0.5;
                    }
                    if t != 0.0 {
                        quadratic.push(QuadEntry {
                            k,
                            i,
                            j,
                            value: -mu[k - 1] * b2 * t,
                        });
                    }
                }
            }
        }
    }

    // <e_i e_j e_l, e_k> / ||e_k||^2
    //   = (delta_{k,i+j+l} + delta_{k,|i+j-l|} + delta_{k,|i-j+l|} + delta_{k,|i-j-l|}) / 4
    let mut cubic = Vec::new();
    for k in 1..=n {
        for i in 1..=n {
            for j in i..=n {
                for l in j..=n {
                    let combos = [
                        (i + j + l) as i64,
                        (i + j) as i64 - l as i64,
                        i as i64 - j as i64 + l as i64,
                        i as i64 - j as i64 - l as i64,
                    ];
                    let mut s = 0.0;
                    for c in combos {
                        if c.unsigned_abs() as usize == k {
                            s += 0.25;
                        }
                    }
                    if s != 0.0 {
                        cubic.push(CubicEntry {
                            k,
                            i,
                            j,
                            l,
                            value: -mu[k - 1] * b3 * s,
                        });
                    }
                }
            }
        }
    }

    let model = SpectralModel {
        label: format!("cahn_hilliard_1d(L={length}, b2={b2}, b3={b3}, N={n})"),
        dim: n,
        mu,
        linear: LinearPart::Affine { c0, c1 },
        quadratic,
        cubic,
        gradient_info: Some(GradientInfo {
            potential: PotentialForm::CosineQuartic { length, b2, b3 },
            cube_integrals: None,
        }),
    };
    validate_common(&model)?;
    Ok(model)
}

/// Explicit description of a custom model, the in-code twin of the JSON
/// model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomModelSpec {
    pub label: String,
    pub mu: Vec<f64>,
    pub linear: LinearPart,
    #[serde(default)]
    pub quadratic: Vec<QuadEntry>,
    #[serde(default)]
    pub cubic: Vec<CubicEntry>,
    #[serde(default)]
    pub gradient_info: Option<GradientInfo>,
}

/// Builds a model from an explicit description, canonicalizing tensor
/// entries and rejecting conflicting duplicates within a symmetry class.
pub fn build_custom(spec: CustomModelSpec) -> Result<SpectralModel> {
    let mut quadratic: Vec<QuadEntry> = Vec::new();
    for e in &spec.quadratic {
        let (i, j) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
        let canon = QuadEntry {
            k: e.k,
            i,
            j,
            value: e.value,
        };
        if let Some(prev) = quadratic
            .iter()
            .find(|p| p.k == canon.k && p.i == i && p.j == j)
        {
            if prev.value != canon.value {
                return Err(Error::InvalidModel(format!(
                    "asymmetric quadratic tensor: Q[{}][{}][{}] declared twice with different values",
                    e.k, e.i, e.j
                )));
            }
            continue;
        }
        quadratic.push(canon);
    }
    let mut cubic: Vec<CubicEntry> = Vec::new();
    for e in &spec.cubic {
        let mut s = [e.i, e.j, e.l];
        s.sort_unstable();
        let canon = CubicEntry {
            k: e.k,
            i: s[0],
            j: s[1],
            l: s[2],
            value: e.value,
        };
        if let Some(prev) = cubic
            .iter()
            .find(|p| p.k == canon.k && p.i == s[0] && p.j == s[1] && p.l == s[2])
        {
            if prev.value != canon.value {
                return Err(Error::InvalidModel(format!(
                    "asymmetric cubic tensor: C[{}][{}][{}][{}] declared twice with different values",
                    e.k, e.i, e.j, e.l
                )));
            }
            continue;
        }
        cubic.push(canon);
    }
    quadratic.sort_by_key(|e| (e.k, e.i, e.j));
    cubic.sort_by_key(|e| (e.k, e.i, e.j, e.l));
    let model = SpectralModel {
        label: spec.label,
        dim: spec.mu.len(),
        mu: spec.mu,
        linear: spec.linear,
        quadratic,
        cubic,
        gradient_info: spec.gradient_info,
    };
    validate_common(&model)?;
    Ok(model)
}

/// Loads a model document from disk. See the README for the schema; sparse
/// tensor entries are listed once per symmetry class and symmetrized here.
pub fn load_model_file(path: &Path) -> Result<SpectralModel> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.dim != file.mu.len() {
        return Err(Error::InvalidModel(format!(
            "declared dim {} does not match mu length {}",
            file.dim,
            file.mu.len()
        )));
    }
    build_custom(CustomModelSpec {
        label: file.label,
        mu: file.mu,
        linear: file.linear,
        quadratic: file.q,
        cubic: file.c,
        gradient_info: file.gradient_info,
    })
}

/// On-disk model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub label: String,
    pub dim: usize,
    pub mu: Vec<f64>,
    pub linear: LinearPart,
    #[serde(default)]
    pub q: Vec<QuadEntry>,
    #[serde(default)]
    pub c: Vec<CubicEntry>,
    #[serde(default)]
    pub gradient_info: Option<GradientInfo>,
}

impl From<&SpectralModel> for ModelFile {
    fn from(m: &SpectralModel) -> Self {
        ModelFile {
            label: m.label.clone(),
            dim: m.dim,
            mu: m.mu.clone(),
            linear: m.linear.clone(),
            q: m.quadratic.clone(),
            c: m.cubic.clone(),
            gradient_info: m.gradient_info.clone(),
        }
    }
}

/// Right-hand side `da/dt` of the Galerkin ODE at `(lambda, a)`.
pub fn vector_field(model: &SpectralModel, lambda: f64, a: &[f64]) -> Result<Vec<f64>> {
    model.validate_state(a)?;
    let mut f: Vec<f64> = (0..model.dim)
        .map(|idx| -model.linear.beta_at(idx, lambda) * a[idx])
        .collect();
    for e in &model.quadratic {
        f[e.k - 1] += e.value * e.multiplicity() * a[e.i - 1] * a[e.j - 1];
    }
    for e in &model.cubic {
        f[e.k - 1] += e.value * e.multiplicity() * a[e.i - 1] * a[e.j - 1] * a[e.l - 1];
    }
    Ok(f)
}

/// Exact analytic Jacobian of [`vector_field`] with respect to `a`.
pub fn jacobian(model: &SpectralModel, lambda: f64, a: &[f64]) -> Result<Vec<Vec<f64>>> {
    model.validate_state(a)?;
    let n = model.dim;
    let mut jac = vec![vec![0.0; n]; n];
    for (idx, row) in jac.iter_mut().enumerate() {
        row[idx] = -model.linear.beta_at(idx, lambda);
    }
    for e in &model.quadratic {
        let m = e.value * e.multiplicity();
        let (k, i, j) = (e.k - 1, e.i - 1, e.j - 1);
        jac[k][i] += m * a[j];
        jac[k][j] += m * a[i];
    }
    for e in &model.cubic {
        let m = e.value * e.multiplicity();
        let (k, i, j, l) = (e.k - 1, e.i - 1, e.j - 1, e.l - 1);
        jac[k][i] += m * a[j] * a[l];
        jac[k][j] += m * a[i] * a[l];
        jac[k][l] += m * a[i] * a[j];
    }
    Ok(jac)
}

/// `int e_k^3 dx` for the mode-`k` eigenfunction. Whether this vanishes
/// decides which local classification hypothesis applies at a crossing.
pub fn check_cube_integral(model: &SpectralModel, k: usize) -> Result<f64> {
    if k == 0 || k > model.dim {
        return Err(Error::Validation(format!(
            "mode {k} out of range 1..={}",
            model.dim
        )));
    }
    let info = model.gradient_info.as_ref().ok_or_else(|| {
        Error::Unsupported("cube integrals need gradient_info on the model".into())
    })?;
    if let Some(cubes) = &info.cube_integrals {
        return Ok(cubes[k - 1]);
    }
    match info.potential {
        // int_0^L cos^3(k pi x / L) dx = 0 for every k >= 1.
        PotentialForm::CosineQuartic { .. } => Ok(0.0),
        PotentialForm::ScalarPolynomial => Err(Error::Unsupported(
            "no cube integrals declared for this model".into(),
        )),
    }
}

/// Trapezoid rule on a uniform grid. Exact (up to roundoff) for trigonometric
/// polynomials of frequency index below the panel count, which covers every
/// integrand assembled from products of up to four basis cosines.
fn trig_trapezoid<F: Fn(f64) -> f64>(f: F, length: f64, panels: usize) -> f64 {
    let h = length / panels as f64;
    let mut s = 0.5 * (f(0.0) + f(length));
    for i in 1..panels {
        s += f(i as f64 * h);
    }
    s * h
}

/// Lyapunov functional `J` at `(lambda, a)`.
pub fn lyapunov_value(model: &SpectralModel, lambda: f64, a: &[f64]) -> Result<f64> {
    model.validate_state(a)?;
    let info = model.gradient_info.as_ref().ok_or_else(|| {
        Error::Unsupported("Lyapunov evaluation needs gradient_info on the model".into())
    })?;
    match info.potential {
        PotentialForm::CosineQuartic { length, b2, b3 } => {
            // 1/2 |grad u|^2 = 1/2 sum mu_k ||e_k||^2 a_k^2 with ||e_k||^2 = L/2.
            let half_norms = 0.5 * length / 2.0;
            let quad: f64 = a
                .iter()
                .zip(model.mu_slice())
                .map(|(&x, &m)| half_norms * m * x * x)
                .sum();
            let u = |x: f64| -> f64 {
                a.iter()
                    .enumerate()
                    .map(|(idx, &ak)| {
                        ak * ((idx + 1) as f64 * std::f64::consts::PI * x / length).cos()
                    })
                    .sum()
            };
            let integrand = |x: f64| {
                let s = u(x);
                -0.5 * lambda * s * s + b2 / 3.0 * s * s * s + 0.25 * b3 * s * s * s * s
            };
            let panels = (4 * model.dim + 9).max(64);
            Ok(quad + trig_trapezoid(integrand, length, panels))
        }
        PotentialForm::ScalarPolynomial => {
            let beta = model.beta(1, lambda);
            let q = model.q_entry(1, 1, 1);
            let c = model.c_entry(1, 1, 1, 1);
            let x = a[0];
            Ok(0.5 * beta * x * x - q / 3.0 * x * x * x - 0.25 * c * x * x * x * x)
        }
    }
}

/// Step-size controls for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub max_steps: usize,
    pub min_step: f64,
    pub blowup_bound: f64,
    /// Record every `stride`-th accepted step (the final state is always kept).
    pub stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            max_steps: 50_000_000,
            min_step: 1e-13,
            blowup_bound: BLOWUP_BOUND,
            stride: 1,
        }
    }
}

/// Integrates the Galerkin ODE with the Dormand-Prince 5(4) embedded pair
/// and PI step control. Blow-up is detected against `blowup_bound` and
/// reported through the trajectory outcome.
pub fn integrate(
    model: &SpectralModel,
    lambda: f64,
    a0: &[f64],
    t_end: f64,
    tolerance: f64,
) -> Result<Trajectory> {
    integrate_with(
        model,
        lambda,
        a0,
        t_end,
        tolerance,
        IntegratorConfig::default(),
    )
}

pub fn integrate_with(
    model: &SpectralModel,
    lambda: f64,
    a0: &[f64],
    t_end: f64,
    tolerance: f64,
    cfg: IntegratorConfig,
) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Validation("t_end must be positive".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Validation("tolerance must be positive".into()));
    }
    model.validate_state(a0)?;

    let rhs = |a: &[f64]| vector_field(model, lambda, a).expect("dimension checked");

    // Dormand-Prince RK5(4)7M coefficients (stage times are not needed:
    // the field is autonomous).
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let n = model.dim;
    let mut t = 0.0;
    let mut y = a0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let mut outcome = IntegrationOutcome::Completed;

    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    // Initial step sized to the stiffest linear rate; the controller takes
    // over immediately after.
    let beta_scale = (1..=n)
        .map(|k| model.beta(k, lambda).abs())
        .fold(1.0f64, f64::max);
    let mut h = (0.5 / beta_scale).clamp(1e-10, (t_end / 10.0).min(0.1));
    let mut err_prev: f64 = 1.0;
    let mut accepted = 0usize;

    for _step in 0..cfg.max_steps {
        if t >= t_end {
            break;
        }
        if h > t_end - t {
            h = t_end - t;
        }

        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a_sj = A[s][j];
                if a_sj != 0.0 {
                    for i in 0..n {
                        ys[i] += h * a_sj * kj[i];
                    }
                }
            }
            k.push(rhs(&ys));
        }

        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for i in 0..n {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let sc = tolerance * (1.0 + y[i].abs().max(y5[i].abs()));
            let e = h * (d5 - d4) / sc;
            err += e * e;
        }
        err = (err / n as f64).sqrt();

        if !err.is_finite() || norm2(&y5) > cfg.blowup_bound {
            // reject the trial; true blow-up drives h to the floor as the
            // solution grows and is caught below
            h *= 0.25;
            if h < cfg.min_step {
                outcome = IntegrationOutcome::Diverged {
                    t,
                    norm: norm2(&y5).min(f64::MAX),
                };
                break;
            }
            continue;
        }

        if err <= 1.0 {
            t += h;
            y = y5;
            accepted += 1;
            let norm_acc = norm2(&y);
            if norm_acc > cfg.blowup_bound {
                times.push(t);
                states.push(y.clone());
                outcome = IntegrationOutcome::Diverged { t, norm: norm_acc };
                break;
            }
            if accepted.is_multiple_of(cfg.stride) || t >= t_end {
                times.push(t);
                states.push(y.clone());
            }
            // PI controller (0.7/0.4 exponents for a 5th-order pair).
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-10);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }

        if h < cfg.min_step {
            let norm = norm2(&y);
            if norm > cfg.blowup_bound.sqrt() {
                // forced to the floor while the state keeps growing
                outcome = IntegrationOutcome::Diverged { t, norm };
                break;
            }
            // Step floor reached: record the stiffness diagnostic and stop.
            log::warn!(
                "integrator hit the step floor {:.1e} at t={:.3e} (stiffness); returning partial trajectory",
                cfg.min_step,
                t
            );
            break;
        }
    }

    if *times.last().unwrap() < t {
        times.push(t);
        states.push(y.clone());
    }

    Ok(Trajectory {
        lambda,
        times,
        states,
        outcome,
    })
}

/// Outcome of running the flow until the field norm stays below `tol`.
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyOutcome {
    /// Steady state reached (field norm below tolerance at three consecutive
    /// checkpoints); the state and the time it was reached.
    Converged {
        a: Vec<f64>,
        t: f64,
    },
    Diverged {
        t: f64,
    },
    TimedOut {
        a: Vec<f64>,
    },
}

/// Integrates forward (or the time-reversed field, when `reversed`) until a
/// steady state is detected: field norm at or below `tol` at three
/// consecutive checkpoints spaced `check_dt` apart.
pub fn integrate_to_steady(
    model: &SpectralModel,
    lambda: f64,
    a0: &[f64],
    t_max: f64,
    tol: f64,
    reversed: bool,
) -> Result<SteadyOutcome> {
    model.validate_state(a0)?;
    let check_dt = (t_max / 400.0).clamp(1e-3, 1.0);
    let mut a = a0.to_vec();
    let mut t = 0.0;
    let mut hits = 0;
    let sign = if reversed { -1.0 } else { 1.0 };
    let signed = signed_model_field(model, lambda, sign);
    while t < t_max {
        let tr = integrate_generic(&signed, &a, check_dt, 1e-10)?;
        match tr {
            GenericOutcome::Diverged { t: dt } => return Ok(SteadyOutcome::Diverged { t: t + dt }),
            GenericOutcome::Final(next) => {
                a = next;
                t += check_dt;
            }
        }
        let f = vector_field(model, lambda, &a)?;
        let fnorm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        if fnorm <= tol {
            hits += 1;
            if hits >= 3 {
                return Ok(SteadyOutcome::Converged { a, t });
            }
        } else {
            hits = 0;
        }
    }
    Ok(SteadyOutcome::TimedOut { a })
}

// Internal helpers so the steady-state driver can reuse the stepper on the
// reversed field without duplicating the model.

struct SignedField<'m> {
    model: &'m SpectralModel,
    lambda: f64,
    sign: f64,
}

fn signed_model_field(model: &SpectralModel, lambda: f64, sign: f64) -> SignedField<'_> {
    SignedField {
        model,
        lambda,
        sign,
    }
}

enum GenericOutcome {
    Final(Vec<f64>),
    Diverged { t: f64 },
}

fn integrate_generic(
    field: &SignedField<'_>,
    a0: &[f64],
    t_end: f64,
    tol: f64,
) -> Result<GenericOutcome> {
    // Piggyback on `integrate_with` by flipping the sign afterwards is not
    // possible, so run the same stepper on the signed field directly.
    let model = field.model;
    let lambda = field.lambda;
    if field.sign > 0.0 {
        let tr = integrate_with(
            model,
            lambda,
            a0,
            t_end,
            tol,
            IntegratorConfig {
                stride: usize::MAX,
                ..IntegratorConfig::default()
            },
        )?;
        return Ok(match tr.outcome {
            IntegrationOutcome::Completed => {
                GenericOutcome::Final(tr.states.last().unwrap().clone())
            }
            IntegrationOutcome::Diverged { t, .. } => GenericOutcome::Diverged { t },
        });
    }
    // Reversed time: integrate the negated field with a small fixed-step RK4;
    // the reversed flow is only ever used for short probing runs.
    let n = model.dim;
    let rhs = |a: &[f64]| -> Vec<f64> {
        vector_field(model, lambda, a)
            .expect("dimension checked")
            .into_iter()
            .map(|v| -v)
            .collect()
    };
    let mut y = a0.to_vec();
    let mut t = 0.0;
    let beta_max = (1..=n)
        .map(|k| model.beta(k, lambda).abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let h = (0.1 / beta_max).min(t_end / 10.0);
    while t < t_end {
        let step = h.min(t_end - t);
        let k1 = rhs(&y);
        let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * step * k1[i]).collect();
        let k2 = rhs(&y2);
        let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * step * k2[i]).collect();
        let k3 = rhs(&y3);
        let y4: Vec<f64> = (0..n).map(|i| y[i] + step * k3[i]).collect();
        let k4 = rhs(&y4);
        for i in 0..n {
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += step;
        let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > BLOWUP_BOUND {
            return Ok(GenericOutcome::Diverged { t });
        }
    }
    Ok(GenericOutcome::Final(y))
}
