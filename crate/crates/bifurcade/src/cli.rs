//! Pipeline front end: configuration, subcommand orchestration, and report
//! emission.
//!
//! Every run writes a versioned `report.json` into the output directory
//! (schema 1, with the originating config embedded for reproducibility) and,
//! when the `csv` format is selected, plot-data CSV files. CSV uses '.' as
//! the decimal mark, ',' as the separator, LF line endings, and always
//! carries a header line. Runs are deterministic: identical configs produce
//! byte-identical reports apart from the timestamp field.

use crate::bifurcation::{
    bifurcating_set, classify_static_n1, classify_trivial, index_of_bifurcating_set_with_blocks,
    nontriviality_hypothesis_holds, trivial_index_at_crossing,
};
use crate::center_manifold::reduce;
use crate::conley::BoxRegion;
use crate::continuation::{
    branch_from_crossing, global_report, heteroclinic_probe, trace_trivial_branch, Branch,
    StepConfig, Window,
};
use crate::error::{Error, Result};
use crate::model::{
    build_cahn_hilliard_1d, integrate, load_model_file, vector_field, SpectralModel,
};
use crate::spectrum::{crossing_data, detect_bifurcation_values, linear_spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    CahnHilliard1d {
        length: f64,
        b2: f64,
        b3: f64,
        n_modes: usize,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Full configuration of one run. Embedded verbatim in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSource,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub v_norm_max: f64,
    /// Reduction order p.
    pub order: u32,
    /// Grid cells per axis for block construction.
    pub grid: usize,
    /// Half-width of the reduced-coordinate search box.
    pub box_half: f64,
    /// Branch-switching amplitude.
    pub amplitude: f64,
    /// Crossing selector for crossing-local subcommands.
    pub lambda0: Option<f64>,
    /// Evaluation parameter for spectrum/localbif/index/probe/simulate.
    pub lambda: Option<f64>,
    pub t_end: f64,
    pub tolerance: f64,
    /// Initial mode coefficients for `simulate`; a seeded perturbation is
    /// drawn when absent.
    pub initial: Option<Vec<f64>>,
    /// Eigendirections probed per stability class.
    pub directions: usize,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    /// Seed for stochastic sampling (simulate's default initial data).
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSource::CahnHilliard1d {
                length: std::f64::consts::PI,
                b2: 0.0,
                b3: 1.0,
                n_modes: 8,
            },
            lambda_lo: 0.0,
            lambda_hi: 10.0,
            v_norm_max: 50.0,
            order: 3,
            grid: 16,
            box_half: 1.0,
            amplitude: 0.05,
            lambda0: None,
            lambda: None,
            t_end: 50.0,
            tolerance: 1e-9,
            initial: None,
            directions: 4,
            out_dir: PathBuf::from("."),
            formats: vec![Format::Json],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Spectrum,
    Detect,
    Reduce,
    Classify,
    Localbif,
    Index,
    Branch,
    Global,
    Probe,
    Simulate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Detect => "detect",
            Subcommand::Reduce => "reduce",
            Subcommand::Classify => "classify",
            Subcommand::Localbif => "localbif",
            Subcommand::Index => "index",
            Subcommand::Branch => "branch",
            Subcommand::Global => "global",
            Subcommand::Probe => "probe",
            Subcommand::Simulate => "simulate",
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: u32,
    timestamp: String,
    command: &'a str,
    config: &'a RunConfig,
    result: Value,
    diagnostics: Vec<String>,
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}")
}

pub fn build_model(config: &RunConfig) -> Result<SpectralModel> {
    match &config.model {
        ModelSource::CahnHilliard1d {
            length,
            b2,
            b3,
            n_modes,
        } => build_cahn_hilliard_1d(*length, *b2, *b3, *n_modes),
        ModelSource::File { path } => load_model_file(path),
    }
}

/// Runs a subcommand and writes its artifacts. On success returns the paths
/// written; numerical failures still produce a `report.json` carrying the
/// diagnostics (the binary then exits with code 3).
pub fn run(command: Subcommand, config: &RunConfig) -> Result<Vec<PathBuf>> {
    validate(config)?;
    let model = build_model(config)?;
    match execute(command, config, &model) {
        Ok(Artifacts {
            result,
            csv_files,
            diagnostics,
        }) => {
            let mut written = Vec::new();
            std::fs::create_dir_all(&config.out_dir)?;
            for (name, content) in csv_files {
                if config.formats.contains(&Format::Csv) {
                    let path = config.out_dir.join(name);
                    std::fs::write(&path, content)?;
                    written.push(path);
                }
            }
            let path = write_report(command, config, result, diagnostics)?;
            written.push(path);
            Ok(written)
        }
        Err(e) if e.is_numerical() => {
            std::fs::create_dir_all(&config.out_dir)?;
            let result = json!({ "error": e.to_string() });
            let path = write_report(command, config, result, vec![e.to_string()])?;
            log::error!("numerical failure: {e}");
            let _ = path;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn write_report(
    command: Subcommand,
    config: &RunConfig,
    result: Value,
    diagnostics: Vec<String>,
) -> Result<PathBuf> {
    let report = Report {
        schema: 1,
        timestamp: timestamp(),
        command: command.name(),
        config,
        result,
        diagnostics,
    };
    let path = config.out_dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

fn validate(config: &RunConfig) -> Result<()> {
    if !(config.lambda_lo < config.lambda_hi) {
        return Err(Error::Validation("need lambda_lo < lambda_hi".into()));
    }
    if !(config.v_norm_max > 0.0) || !(config.box_half > 0.0) || config.grid == 0 {
        return Err(Error::Validation(
            "window, box and grid must be positive".into(),
        ));
    }
    if let ModelSource::File { path } = &config.model {
        if !path.exists() {
            return Err(Error::Validation(format!(
                "model file {} does not exist",
                path.display()
            )));
        }
    }
    Ok(())
}

struct Artifacts {
    result: Value,
    csv_files: Vec<(String, String)>,
    diagnostics: Vec<String>,
}

fn execute(command: Subcommand, config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    match command {
        Subcommand::Spectrum => spectrum_cmd(config, model),
        Subcommand::Detect => detect_cmd(config, model),
        Subcommand::Reduce => reduce_cmd(config, model),
        Subcommand::Classify => classify_cmd(config, model),
        Subcommand::Localbif => localbif_cmd(config, model),
        Subcommand::Index => index_cmd(config, model),
        Subcommand::Branch => branch_cmd(config, model),
        Subcommand::Global => global_cmd(config, model),
        Subcommand::Probe => probe_cmd(config, model),
        Subcommand::Simulate => simulate_cmd(config, model),
    }
}

/// Picks the crossing addressed by `lambda0` (or the only one in the window).
fn select_crossing(
    config: &RunConfig,
    model: &SpectralModel,
) -> Result<crate::spectrum::CrossingData> {
    match config.lambda0 {
        Some(l0) => crossing_data(model, l0, 1e-7),
        None => {
            let all = detect_bifurcation_values(model, config.lambda_lo, config.lambda_hi, 1e-9)?;
            match all.len() {
                0 => Err(Error::Validation("no crossing in the window".into())),
                1 => Ok(all.into_iter().next().unwrap()),
                n => Err(Error::Validation(format!(
                    "{n} crossings in the window; pick one with --lambda0"
                ))),
            }
        }
    }
}

fn fmt_csv_row(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s.push('\n');
    s
}

fn spectrum_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let lambda = config
        .lambda
        .unwrap_or(0.5 * (config.lambda_lo + config.lambda_hi));
    let rows = linear_spectrum(model, lambda);
    let mut csv = String::from("mode,mu,beta\n");
    for &(k, beta) in &rows {
        csv.push_str(&fmt_csv_row(&[k as f64, model.mu(k), beta]));
    }
    Ok(Artifacts {
        result: json!({
            "lambda": lambda,
            "modes": rows.iter().map(|&(k, beta)| json!({
                "mode": k, "mu": model.mu(k), "beta": beta,
            })).collect::<Vec<_>>(),
        }),
        csv_files: vec![("spectrum.csv".into(), csv)],
        diagnostics: Vec::new(),
    })
}

fn detect_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let crossings = detect_bifurcation_values(model, config.lambda_lo, config.lambda_hi, 1e-9)?;
    let mut csv = String::from(
        "lambda0,n,m,center_modes,alpha1,alpha2,alpha3,alpha4,orientation,degenerate\n",
    );
    for c in &crossings {
        let modes = c
            .center_modes
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            c.lambda0,
            c.n,
            c.m,
            modes,
            c.gaps.0,
            c.gaps.1,
            c.gaps.2,
            c.gaps.3,
            c.h4_orientation,
            c.degenerate
        );
    }
    Ok(Artifacts {
        result: serde_json::to_value(&crossings)?,
        csv_files: vec![("crossings.csv".into(), csv)],
        diagnostics: Vec::new(),
    })
}

fn reduce_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let crossing = select_crossing(config, model)?;
    let reduced = reduce(model, &crossing, config.order)?;
    Ok(Artifacts {
        result: json!({
            "crossing": serde_json::to_value(&crossing)?,
            "reduced": serde_json::to_value(&reduced)?,
        }),
        csv_files: Vec::new(),
        diagnostics: Vec::new(),
    })
}

fn classify_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let crossing = select_crossing(config, model)?;
    let reduced = reduce(model, &crossing, config.order)?;
    let class = classify_trivial(&reduced, 1e-9);
    let static_alt = if crossing.n == 1 {
        let (alt, caveat) = classify_static_n1(&crossing, &reduced)?;
        json!({ "alternative": alt, "caveat": caveat })
    } else {
        Value::Null
    };
    Ok(Artifacts {
        result: json!({
            "crossing": serde_json::to_value(&crossing)?,
            "classification": serde_json::to_value(&class)?,
            "static_n1": static_alt,
        }),
        csv_files: Vec::new(),
        diagnostics: Vec::new(),
    })
}

fn localbif_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let crossing = select_crossing(config, model)?;
    let reduced = reduce(model, &crossing, config.order)?;
    let lambda = config
        .lambda
        .ok_or_else(|| Error::Validation("localbif needs --lambda".into()))?;
    let search = BoxRegion::new(
        vec![-config.box_half; crossing.n],
        vec![config.box_half; crossing.n],
    )?;
    let report = bifurcating_set(model, &crossing, &reduced, lambda, &search)?;
    // sphere samples as (angle, radius) plot data
    let mut csv = String::from("angle,radius\n");
    for s in &report.sphere_samples {
        let (angle, radius) = match s.len() {
            1 => (
                if s[0] >= 0.0 {
                    0.0
                } else {
                    std::f64::consts::PI
                },
                s[0].abs(),
            ),
            _ => (s[1].atan2(s[0]), (s[0] * s[0] + s[1] * s[1]).sqrt()),
        };
        csv.push_str(&fmt_csv_row(&[angle, radius]));
    }
    Ok(Artifacts {
        result: serde_json::to_value(&report)?,
        csv_files: vec![("sphere.csv".into(), csv)],
        diagnostics: Vec::new(),
    })
}

fn index_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let crossing = select_crossing(config, model)?;
    let reduced = reduce(model, &crossing, config.order)?;
    let lambda = config
        .lambda
        .ok_or_else(|| Error::Validation("index needs --lambda".into()))?;
    let search = BoxRegion::new(
        vec![-config.box_half; crossing.n],
        vec![config.box_half; crossing.n],
    )?;
    let (index, nontrivial, blocks) =
        index_of_bifurcating_set_with_blocks(model, &crossing, &reduced, lambda, &search)?;
    let trivial_at = trivial_index_at_crossing(&crossing, &reduced, 0.25 * config.box_half)?;
    let hypothesis = nontriviality_hypothesis_holds(&crossing, &reduced, lambda, &trivial_at);
    Ok(Artifacts {
        result: json!({
            "lambda": lambda,
            "index": serde_json::to_value(&index)?,
            "nontrivial": nontrivial,
            "trivial_index_at_crossing": serde_json::to_value(&trivial_at)?,
            "nontriviality_hypothesis_holds": hypothesis,
            "blocks": serde_json::to_value(&blocks)?,
        }),
        csv_files: Vec::new(),
        diagnostics: Vec::new(),
    })
}

fn branch_csv(model: &SpectralModel, branch: &Branch) -> String {
    let mut header = String::from("lambda,arclength,v_norm");
    for k in 1..=model.dim() {
        let _ = write!(header, ",a{k}");
    }
    header.push_str(",n_unstable\n");
    let mut csv = header;
    for p in &branch.points {
        let mut row = vec![p.lambda, p.arclength, p.v_norm];
        row.extend(&p.a);
        row.push(p.n_unstable as f64);
        csv.push_str(&fmt_csv_row(&row));
    }
    csv
}

fn branch_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let crossing = select_crossing(config, model)?;
    let window = Window {
        lambda_lo: config.lambda_lo,
        lambda_hi: config.lambda_hi,
        v_norm_max: config.v_norm_max,
    };
    let branch = branch_from_crossing(
        model,
        &crossing,
        config.amplitude,
        &window,
        &StepConfig::default(),
    )?;
    let csv = branch_csv(model, &branch);
    Ok(Artifacts {
        result: serde_json::to_value(&branch)?,
        csv_files: vec![("branch_1.csv".into(), csv)],
        diagnostics: Vec::new(),
    })
}

/// Writes one CSV per branch plus the combined diagram file.
pub fn emit_diagram(model: &SpectralModel, branches: &[&Branch]) -> Result<Vec<(String, String)>> {
    if branches.is_empty() {
        return Err(Error::Validation(
            "emit_diagram needs at least one branch".into(),
        ));
    }
    let mut files = Vec::new();
    let mut combined = String::from("lambda,v_norm,n_unstable,branch_id\n");
    for (i, branch) in branches.iter().enumerate() {
        files.push((format!("branch_{}.csv", i + 1), branch_csv(model, branch)));
        for p in &branch.points {
            combined.push_str(&fmt_csv_row(&[
                p.lambda,
                p.v_norm,
                p.n_unstable as f64,
                (i + 1) as f64,
            ]));
        }
    }
    files.push(("diagram.csv".into(), combined));
    Ok(files)
}

fn global_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let window = Window {
        lambda_lo: config.lambda_lo,
        lambda_hi: config.lambda_hi,
        v_norm_max: config.v_norm_max,
    };
    let report = global_report(model, &window, config.amplitude, &StepConfig::default())?;
    let trivial = trace_trivial_branch(model, config.lambda_lo, config.lambda_hi)?;
    let branches: Vec<&Branch> = report
        .branches
        .iter()
        .filter_map(|b| b.branch.as_ref())
        .collect();
    let csv_files = if branches.is_empty() {
        Vec::new()
    } else {
        emit_diagram(model, &branches)?
    };
    let diagnostics: Vec<String> = report
        .branches
        .iter()
        .filter_map(|b| {
            b.error
                .as_ref()
                .map(|e| format!("lambda0={}: {e}", b.lambda0))
        })
        .collect();
    Ok(Artifacts {
        result: json!({
            "global": serde_json::to_value(&report)?,
            "trivial_branch": serde_json::to_value(&trivial)?,
        }),
        csv_files,
        diagnostics,
    })
}

fn probe_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let lambda = config
        .lambda
        .ok_or_else(|| Error::Validation("probe needs --lambda".into()))?;
    let probe = heteroclinic_probe(model, lambda, config.directions, config.t_end)?;
    Ok(Artifacts {
        result: serde_json::to_value(&probe)?,
        csv_files: Vec::new(),
        diagnostics: Vec::new(),
    })
}

fn simulate_cmd(config: &RunConfig, model: &SpectralModel) -> Result<Artifacts> {
    let lambda = config
        .lambda
        .unwrap_or(0.5 * (config.lambda_lo + config.lambda_hi));
    let a0 = match &config.initial {
        Some(a) => {
            model.validate_state(a)?;
            a.clone()
        }
        None => {
            // seeded random perturbation of the trivial solution
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            (0..model.dim())
                .map(|_| rng.gen_range(-0.01..0.01))
                .collect()
        }
    };
    let trajectory = integrate(model, lambda, &a0, config.t_end, config.tolerance)?;
    let mut csv = String::from("t");
    for k in 1..=model.dim() {
        let _ = write!(csv, ",a{k}");
    }
    csv.push('\n');
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let mut row = vec![*t];
        row.extend(state);
        csv.push_str(&fmt_csv_row(&row));
    }
    let final_state = trajectory.final_state().to_vec();
    let residual = vector_field(model, lambda, &final_state)?
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    Ok(Artifacts {
        result: json!({
            "lambda": lambda,
            "initial": a0,
            "outcome": serde_json::to_value(&trajectory.outcome)?,
            "final_state": final_state,
            "final_residual": residual,
            "samples": trajectory.times.len(),
        }),
        csv_files: vec![("trajectory.csv".into(), csv)],
        diagnostics: Vec::new(),
    })
}

/// Maps an error to the process exit code contract: 2 for validation
/// failures, 3 for numerical failures.
pub fn exit_code_for(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}
