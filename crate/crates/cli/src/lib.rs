//! Command-line pipeline: parse, Legendre transform, consistency loop,
//! classification, gauge fixing, Dirac brackets, and the verifier suites.

pub mod report;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirac_engine::dirac::{
    add_gauge_fixing, classify, commutator_report, consistency_closure_with, fix_gauge_multipliers,
    ClosureOptions, ConstraintSet, DiracError,
};
use dirac_engine::frontend::{preset_model, GaugeSpec, ModelError, ModelIR, PRESET_NAMES};
use dirac_engine::legendre::{legendre, Legendre};
use dirac_engine::symkernel::ParamRat;
use dirac_engine::verifier::{
    self, default_bindings, delta_oracle, dirac_oracle, evolve_lattice, gradient_check,
    project_constraints, verify_ansatz, CheckRecord, EvolveConfig, LatticeState, LatticeSystem,
    PlaneWaveConfig, SampleGrid, VerifyError, CONSTRAINT_DRIFT_TOLERANCE, CURRENT_TOLERANCE,
    ENERGY_DRIFT_TOLERANCE, GRADIENT_TOLERANCE, HALVING_FACTOR,
};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use report::AnalysisReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("bad parameter binding '{0}': expected NAME=RATIONAL")]
    BadParam(String),
    #[error("model has no parameter '{0}'")]
    UnknownParam(String),
    #[error("{0}")]
    Analysis(#[from] DiracError),
    #[error("{0}")]
    Verify(#[from] VerifyError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for input errors, 2 for analysis obstructions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 2,
            CliError::Verify(VerifyError::Dirac(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "dirac",
    version,
    about = "Dirac-Bergmann constraint analysis of quadratic 1+1 dimensional field theories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the constraint analysis on a preset or a .lag model file.
    Analyze(AnalyzeArgs),
    /// Run a numerical verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Preset name or path to a model file.
    pub model: String,
    /// File with one gauge condition per line.
    #[arg(long)]
    pub gauge: Option<String>,
    /// Specialize a parameter, e.g. `--param a=2`.
    #[arg(long = "param", value_name = "NAME=RAT")]
    pub params: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Keep multipliers that only appear differentiated unresolved.
    #[arg(long)]
    pub no_spatially_constant: bool,
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Plane-wave check of the field equations and the mass formula.
    Ansatz(AnsatzArgs),
    /// Smeared-bracket oracle for every bracket matrix entry and Dirac bracket.
    Oracle(OracleArgs),
    /// Lattice integration with drift monitoring.
    Lattice(LatticeArgs),
}

#[derive(Debug, Args)]
pub struct AnsatzArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub e: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amp_sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub amp_h: f64,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Preset name or path to a model file.
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub gauge: Option<String>,
    /// Numeric parameter value, e.g. `--param a=5/2`.
    #[arg(long = "param", value_name = "NAME=RAT")]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    /// Grid size for the Dirac bracket oracle.
    #[arg(long, default_value_t = 64)]
    pub dirac_n: usize,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fourier modes in the random initial data.
    #[arg(long, default_value_t = 4)]
    pub modes: usize,
    /// Value given to multipliers the analysis leaves free.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub free_multiplier: f64,
    /// Monitor the divergence of the unit-charge current (always on for jr-wz).
    #[arg(long)]
    pub current: bool,
    /// Repeat with dt/2 and require the energy drift to drop by 8x.
    #[arg(long)]
    pub halving: bool,
}

/// A model ready for analysis.
#[derive(Clone, Debug)]
pub struct Target {
    pub name: String,
    pub model: ModelIR,
    pub gauge: Option<GaugeSpec>,
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_string(),
        message: e.to_string(),
    })
}

/// Preset name or model file, with an optional gauge file overriding any
/// preset gauge.
pub fn load_target(spec: &str, gauge: Option<&str>) -> Result<Target, CliError> {
    let (name, model, preset_gauge) = if PRESET_NAMES.contains(&spec) {
        let p = preset_model(spec)?;
        (p.name.to_string(), p.model, p.gauge)
    } else if Path::new(spec).exists() {
        let model = dirac_engine::frontend::parse_model(&read(spec)?)?;
        let stem = Path::new(spec)
            .file_stem()
            .map_or(spec.to_string(), |s| s.to_string_lossy().into_owned());
        (stem, model, None)
    } else {
        return Err(CliError::Usage(format!(
            "'{spec}' is neither a preset ({}) nor a readable file",
            PRESET_NAMES.join(", ")
        )));
    };
    let gauge = match gauge {
        Some(path) => Some(GaugeSpec::parse(&read(path)?, &model)?),
        None => preset_gauge,
    };
    Ok(Target { name, model, gauge })
}

pub fn parse_bindings(
    model: &ModelIR,
    raw: &[String],
) -> Result<BTreeMap<String, BigRational>, CliError> {
    let mut out = BTreeMap::new();
    for b in raw {
        let (name, value) = b
            .split_once('=')
            .ok_or_else(|| CliError::BadParam(b.clone()))?;
        let name = name.trim();
        let q = value
            .trim()
            .parse::<ParamRat>()
            .ok()
            .and_then(|p| p.as_rational())
            .ok_or_else(|| CliError::BadParam(b.clone()))?;
        if !model.params().iter().any(|p| p == name) {
            return Err(CliError::UnknownParam(name.to_string()));
        }
        out.insert(name.to_string(), q);
    }
    Ok(out)
}

fn to_f64(q: &BigRational) -> f64 {
    ParamRat::from_rational(q.clone())
        .eval_f64(&HashMap::new())
        .expect("constant")
}

/// Legendre transform, consistency loop, classification and gauge fixing.
pub fn run_pipeline(
    model: &ModelIR,
    gauge: Option<&GaugeSpec>,
    opts: ClosureOptions,
) -> Result<(Legendre, ConstraintSet), CliError> {
    let leg = legendre(model).map_err(DiracError::from)?;
    let cs = consistency_closure_with(&leg, opts)?;
    let cs = match gauge {
        Some(g) => fix_gauge_multipliers(&leg, &add_gauge_fixing(&cs, g)?),
        None => classify(&cs)?,
    };
    Ok((leg, cs))
}

pub fn analyze(args: &AnalyzeArgs) -> Result<AnalysisReport, CliError> {
    let t = load_target(&args.model, args.gauge.as_deref())?;
    let bindings = parse_bindings(&t.model, &args.params)?;
    let mut model = t.model.clone();
    for (k, v) in &bindings {
        model = model.substitute(k, v).map_err(DiracError::from)?;
    }
    // Gauge conditions are re-read against the specialized model.
    let gauge = match &t.gauge {
        Some(g) => Some(GaugeSpec::parse(&g.sources().join("\n"), &model)?),
        None => None,
    };
    let opts = ClosureOptions {
        spatially_constant_rule: !args.no_spatially_constant,
    };
    let (leg, cs) = run_pipeline(&model, gauge.as_ref(), opts)?;
    let sources = gauge
        .as_ref()
        .map(|g| g.sources().to_vec())
        .unwrap_or_default();
    Ok(AnalysisReport::build(
        &t.name,
        model.params().to_vec(),
        bindings
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect(),
        &leg,
        &cs,
        &sources,
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub suite: String,
    pub model: String,
    pub pass: bool,
    pub summary: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub records: Vec<CheckRecord>,
}

impl VerifyReport {
    fn new(
        suite: &str,
        model: &str,
        summary: BTreeMap<String, f64>,
        warnings: Vec<String>,
        records: Vec<CheckRecord>,
    ) -> Self {
        VerifyReport {
            schema: report::SCHEMA,
            suite: suite.into(),
            model: model.into(),
            pass: verifier::all_pass(&records),
            summary,
            warnings,
            records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn verify_ansatz_suite(a: &AnsatzArgs) -> Result<VerifyReport, CliError> {
    let cfg = PlaneWaveConfig {
        a: a.a,
        e: a.e,
        k: a.k,
        amp_sigma: a.amp_sigma,
        amp_h: a.amp_h,
    };
    let r = verify_ansatz(&cfg, &SampleGrid::default())?;
    let summary = [("m2".to_string(), r.m2), ("omega".to_string(), r.omega)].into();
    Ok(VerifyReport::new(
        "ansatz",
        "plane-wave",
        summary,
        Vec::new(),
        r.records,
    ))
}

fn numeric_target(t: &TargetArgs) -> Result<(Target, HashMap<String, f64>), CliError> {
    let target = load_target(&t.preset, t.gauge.as_deref())?;
    let explicit: BTreeMap<String, f64> = parse_bindings(&target.model, &t.params)?
        .iter()
        .map(|(k, v)| (k.clone(), to_f64(v)))
        .collect();
    let b = default_bindings(&target.model, &explicit);
    Ok((target, b))
}

pub fn verify_oracle_suite(a: &OracleArgs) -> Result<VerifyReport, CliError> {
    let (t, b) = numeric_target(&a.target)?;
    let (_, cs) = run_pipeline(&t.model, t.gauge.as_ref(), ClosureOptions::default())?;
    let mut records = delta_oracle(&cs, &t.name, &b, a.n, &a.seeds)?;
    if cs.delta_inverse().is_some() {
        let rep = commutator_report(&cs)?;
        for &seed in &a.seeds {
            records.extend(dirac_oracle(&cs, &rep, &t.name, &b, a.dirac_n, seed)?);
        }
    }
    let worst = records.iter().map(|r| r.value).fold(0.0, f64::max);
    let summary = [
        ("checks".to_string(), records.len() as f64),
        ("worst_rel_error".to_string(), worst),
    ]
    .into();
    Ok(VerifyReport::new(
        "oracle",
        &t.name,
        summary,
        Vec::new(),
        records,
    ))
}

pub fn verify_lattice_suite(a: &LatticeArgs) -> Result<VerifyReport, CliError> {
    let (t, b) = numeric_target(&a.target)?;
    let (_, cs) = run_pipeline(&t.model, t.gauge.as_ref(), ClosureOptions::default())?;
    let sys = LatticeSystem::new(
        &t.model,
        &cs,
        &b,
        a.n,
        2.0 * std::f64::consts::PI,
        a.free_multiplier,
    )?;
    let init = project_constraints(
        &sys,
        &LatticeState::random_smooth(&sys.space, a.n, a.seed, a.modes)?,
    )?;
    let steps = (a.t_end / a.dt).round() as usize;
    let cfg = EvolveConfig {
        dt: a.dt,
        steps,
        current_check: a.current || t.name == "jr-wz",
    };
    let r = evolve_lattice(&sys, &init, &cfg)?;
    let params = verifier::sorted_bindings(&b);
    let rec = |check: &str, value: f64, tol: f64| {
        CheckRecord::new(check, t.name.clone(), params.clone(), value, tol)
    };
    let mut records = vec![rec(
        "gradient-check",
        gradient_check(&sys, &init, 1e-4)?,
        GRADIENT_TOLERANCE,
    )];
    if !cs.is_empty() {
        records.push(rec(
            "constraint-drift",
            r.constraint_drift,
            CONSTRAINT_DRIFT_TOLERANCE,
        ));
    }
    records.push(rec("energy-drift", r.energy_drift, ENERGY_DRIFT_TOLERANCE));
    if let Some(c) = r.current_divergence {
        records.push(rec("current-divergence", c, CURRENT_TOLERANCE));
    }
    let mut summary: BTreeMap<String, f64> = [
        ("energy_initial".to_string(), r.energy_initial),
        ("energy_drift".to_string(), r.energy_drift),
        ("constraint_drift".to_string(), r.constraint_drift),
        ("field_scale".to_string(), r.field_scale),
        ("t_end".to_string(), r.t_end),
    ]
    .into();
    let mut warnings = r.warnings.clone();
    if a.halving {
        let half = evolve_lattice(
            &sys,
            &init,
            &EvolveConfig {
                dt: a.dt / 2.0,
                steps: 2 * steps,
                current_check: false,
            },
        )?;
        let ratio = half.energy_drift / r.energy_drift;
        summary.insert("energy_drift_half_dt".into(), half.energy_drift);
        warnings.extend(half.warnings);
        records.push(rec(
            "energy-drift-halving-ratio",
            ratio,
            1.0 / HALVING_FACTOR,
        ));
    }
    Ok(VerifyReport::new(
        "lattice", &t.name, summary, warnings, records,
    ))
}

/// Exit status plus what goes to stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn fail(e: CliError) -> Outcome {
    Outcome {
        code: e.exit_code(),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match cli.command {
        Command::Analyze(a) => match analyze(&a) {
            Ok(r) => Outcome {
                code: 0,
                stdout: match a.format {
                    Format::Text => r.to_text(),
                    Format::Json => r.to_json() + "\n",
                },
                stderr: String::new(),
            },
            Err(e) => fail(e),
        },
        Command::Verify { suite } => {
            let r = match &suite {
                Suite::Ansatz(a) => verify_ansatz_suite(a),
                Suite::Oracle(a) => verify_oracle_suite(a),
                Suite::Lattice(a) => verify_lattice_suite(a),
            };
            match r {
                Ok(r) => Outcome {
                    code: if r.pass { 0 } else { 2 },
                    stdout: r.to_json() + "\n",
                    stderr: String::new(),
                },
                Err(e) => fail(e),
            }
        }
    }
}
