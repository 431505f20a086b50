//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid domain or input, 2 numerical failure,
//! 3 violated bound or identity, 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::asymptotics::{asymptotics_report, AsymptoticsError};
use crate::dtn::{solve_mixed_steklov, MixedProblem, SolverError, SolverParams};
use crate::experiments::{evaluate_bound, schedule, sweep_family, BoundId, BoundSpec, ExperimentError};
use crate::geometry::{io, make_family, BlobSymmetry, BoundaryData, FamilySpec, GeometryError, PlanarDomain, ReflectionAxis, Vec2};
use crate::model_spectra::{model_spectrum, recover_boundary_data, ModelError, ProblemKind, Spectrum};
use crate::symmetry::{reflection_split_check, reflection_split_check_with_estimate, SymmetryError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Steklov and mixed Steklov eigenvalues of planar domains")]
struct Cli {
    /// Seed for randomly generated domains.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Key-value file with solver settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct SolverFlags {
    /// Nodes per unit length (domain rescaled to diameter 2).
    #[arg(long)]
    nodes: Option<f64>,
    /// Grading exponent at corners.
    #[arg(long)]
    grading: Option<f64>,
    /// Dyadic refinement levels at singular corners.
    #[arg(long)]
    refine_levels: Option<usize>,
    /// Eigenpair residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Symmetry {
    None,
    Reflect,
    Square,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of a domain.
    Solve {
        /// Domain JSON file or family shorthand such as `gp_chain(2,0.1)`.
        #[arg(long)]
        domain: String,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<ProblemKind>,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// Evaluates one bound of the catalog.
    Check {
        #[arg(long)]
        bound: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Rotation order for the Bandle-type bounds.
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        domain: String,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Evaluates a bound along a family parameter schedule.
    Sweep {
        /// Family template such as `gp_chain(2)`.
        #[arg(long, required_unless_present = "manifest")]
        family: Option<String>,
        /// Comma separated parameter values.
        #[arg(long, required_unless_present = "manifest")]
        schedule: Option<String>,
        #[arg(long, required_unless_present = "manifest")]
        bound: Option<String>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        p: Option<usize>,
        /// Named sweep from the bundled manifest.
        #[arg(long, conflicts_with_all = ["family", "schedule", "bound"])]
        manifest: Option<String>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compares the Steklov spectrum with the merged quotient spectra.
    SplitCheck {
        #[arg(long)]
        domain: String,
        /// Axis as "px,py,dx,dy".
        #[arg(long)]
        axis: String,
        #[arg(long, default_value_t = 12)]
        k: usize,
        /// Largest acceptable relative mismatch.
        #[arg(long, default_value_t = 1e-4)]
        max_mismatch: f64,
        /// Also require agreement within 10 times the error estimate.
        #[arg(long)]
        estimate: bool,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Residuals against the model spectrum of the boundary data.
    Asymptotics {
        #[arg(long)]
        domain: String,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<ProblemKind>,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Boundary data class from a spectrum tail.
    Recover {
        /// JSON spectrum file: an object with `values` or a bare array.
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: ProblemKind,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Writes a constructor domain as JSON.
    MakeDomain {
        /// Family name or full shorthand such as `gp_chain(2,0.1)`.
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
        /// Half-disk diameter condition.
        #[arg(long)]
        condition: Option<String>,
        /// Fourier modes of a random blob.
        #[arg(long, default_value_t = 6)]
        modes: usize,
        #[arg(long, default_value_t = 0.2)]
        amplitude: f64,
        #[arg(long, value_enum, default_value = "none")]
        symmetry: Symmetry,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model spectrum of given boundary data.
    ModelSpectrum {
        /// BoundaryData JSON file.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Steklov circle lengths, comma separated.
        #[arg(long)]
        ls: Option<String>,
        #[arg(long)]
        ln: Option<String>,
        #[arg(long)]
        ld: Option<String>,
        #[arg(long)]
        ldn: Option<String>,
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    s.parse()
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::IllConditioned(_) | SolverError::EigensolveFailed(_) => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Solver(s) => s.into(),
            e => Failure::input(e.to_string()),
        }
    }
}

impl From<SymmetryError> for Failure {
    fn from(e: SymmetryError) -> Self {
        match e {
            SymmetryError::Solver(s) => s.into(),
            e => Failure::input(e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for Failure {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::Solver(s) => s.into(),
            e => Failure::input(e.to_string()),
        }
    }
}

/// Rounds every float to 15 significant digits.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.14e}").parse().unwrap_or(x);
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        v => v,
    }
}

fn json_text<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("output serializes");
    serde_json::to_string_pretty(&round_json(value)).expect("output serializes")
}

/// Settings from a `key = value` file. Keys are the solver parameter names.
fn read_config(path: &Path) -> Result<SolverParams, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let mut map = serde_json::Map::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let parsed: Value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
        map.insert(key.to_string(), parsed);
    }
    let defaults = serde_json::to_value(SolverParams::default()).expect("params serialize");
    if let Some(unknown) = map.keys().find(|k| defaults.get(k.as_str()).is_none()) {
        return Err(Failure::input(format!("{}: unknown key {unknown:?}", path.display())));
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn solver_params(base: &SolverParams, flags: &SolverFlags) -> Result<SolverParams, Failure> {
    let mut p = base.clone();
    if let Some(x) = flags.nodes {
        p.nodes_per_unit_length = x;
    }
    if let Some(x) = flags.grading {
        p.grading = x;
    }
    if let Some(x) = flags.refine_levels {
        p.refine_levels = x;
    }
    if let Some(x) = flags.tol {
        p.tol = x;
    }
    p.validate()?;
    Ok(p)
}

/// A domain file path, or a family shorthand when no such file exists.
fn load_domain(arg: &str, seed: u64) -> Result<PlanarDomain, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(io::read_domain(path)?);
    }
    let spec = if arg.trim() == "smooth_blob" {
        FamilySpec::random_blob(seed, 6, 0.2, BlobSymmetry::None)
    } else {
        FamilySpec::parse(arg).map_err(|e| Failure::input(format!("{arg:?} is neither a file nor a family: {e}")))?
    };
    Ok(make_family(&spec)?)
}

fn default_kind(domain: &PlanarDomain) -> ProblemKind {
    if domain.is_full_steklov() {
        ProblemKind::Steklov
    } else {
        ProblemKind::Mixed
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Failure::input(format!("not a number: {t:?}"))))
        .collect()
}

fn parse_axis(s: &str) -> Result<ReflectionAxis, Failure> {
    let v = parse_list(s)?;
    match v.as_slice() {
        [px, py, dx, dy] if dx.hypot(*dy) > 0.0 => Ok(ReflectionAxis::new(Vec2::new(*px, *py), Vec2::new(*dx, *dy))),
        _ => Err(Failure::input(format!("axis must be \"px,py,dx,dy\" with a nonzero direction, got {s:?}"))),
    }
}

fn make_domain_spec(cmd: &Command, seed: u64) -> Result<FamilySpec, Failure> {
    let Command::MakeDomain { family, k, eps, p, m, w, h, radius, condition, modes, amplitude, symmetry, .. } = cmd else {
        unreachable!("called with make-domain only")
    };
    if family.contains('(') {
        return Ok(FamilySpec::parse(family)?);
    }
    let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Failure::input(format!("{family} needs --{name}")));
    let eps = eps.unwrap_or(0.1);
    Ok(match family.as_str() {
        "gp_chain" => FamilySpec::GpChain { k: need(*k, "k")?, eps },
        "bandle_flower" => FamilySpec::BandleFlower { p: need(*p, "p")? },
        "bandle_chain" => FamilySpec::BandleChain { p: need(*p, "p")?, m: need(*m, "m")?, eps },
        "rot_cluster" => FamilySpec::RotCluster { p: need(*p, "p")?, m: need(*m, "m")?, eps },
        "strip" => FamilySpec::Strip { w: w.unwrap_or(1.0), h: h.unwrap_or(1.0) },
        "disk" => FamilySpec::Disk { radius: radius.unwrap_or(1.0) },
        "half_disk" => FamilySpec::HalfDisk {
            radius: radius.unwrap_or(1.0),
            condition: condition.clone().unwrap_or_else(|| "neumann".into()),
        },
        "quarter_disk" => FamilySpec::QuarterDisk { radius: radius.unwrap_or(1.0) },
        "smooth_blob" => {
            let sym = match symmetry {
                Symmetry::None => BlobSymmetry::None,
                Symmetry::Reflect => BlobSymmetry::Reflect,
                Symmetry::Square => BlobSymmetry::Square,
            };
            FamilySpec::random_blob(seed, *modes, *amplitude, sym)
        }
        other => return Err(Failure::input(format!("unknown family {other:?}"))),
    })
}

#[derive(Serialize)]
struct SolveOutput {
    spectrum: Vec<f64>,
    problem_kind: ProblemKind,
    diagnostics: crate::dtn::Diagnostics,
}

fn read_spectrum(path: &Path, kind: ProblemKind) -> Result<Spectrum, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let values = match &value {
        Value::Array(_) => value.clone(),
        Value::Object(o) => o
            .get("values")
            .or_else(|| o.get("spectrum"))
            .cloned()
            .ok_or_else(|| Failure::input("spectrum file has no \"values\" field"))?,
        _ => return Err(Failure::input("spectrum file must hold an array or an object")),
    };
    let values: Vec<f64> = serde_json::from_value(values).map_err(|e| Failure::input(e.to_string()))?;
    Ok(Spectrum::new(values, kind, path.display().to_string()))
}

fn execute(cli: &Cli, out: &mut String) -> Result<i32, Failure> {
    let base = match &cli.config {
        Some(path) => read_config(path)?,
        None => SolverParams::default(),
    };
    let mut status = EXIT_OK;
    match &cli.command {
        Command::Solve { domain, kind, k, solver, out: format } => {
            let d = load_domain(domain, cli.seed)?;
            let kind = kind.unwrap_or_else(|| default_kind(&d));
            let mut params = solver_params(&base, solver)?;
            if let Some(k) = k {
                params.k = *k;
            }
            let r = solve_mixed_steklov(&MixedProblem::new(d, kind)?, &params)?;
            match format {
                Format::Json => out.push_str(&json_text(&SolveOutput {
                    spectrum: r.spectrum.values.clone(),
                    problem_kind: kind,
                    diagnostics: r.diagnostics,
                })),
                Format::Csv => out.push_str(&r.spectrum.to_csv()),
            }
        }
        Command::Check { bound, k, p, domain, solver } => {
            let id: BoundId = bound.parse().map_err(Failure::input)?;
            let d = load_domain(domain, cli.seed)?;
            let kind = default_kind(&d);
            let spec = BoundSpec { id, k: *k, p: *p };
            let r = evaluate_bound(&MixedProblem::new(d, kind)?, &spec, &solver_params(&base, solver)?)?;
            if !r.satisfied {
                status = EXIT_VIOLATION;
            }
            out.push_str(&json_text(&r));
        }
        Command::Sweep { family, schedule: sched, bound, k, p, manifest, solver, format } => {
            let (template, values, spec) = match manifest {
                Some(name) => {
                    let e = schedule(name).ok_or_else(|| Failure::input(format!("no manifest entry {name:?}")))?;
                    (e.template, e.schedule, e.bound)
                }
                None => {
                    let family = family.as_deref().unwrap_or_default();
                    let template = match FamilySpec::parse(family) {
                        Ok(t) => t,
                        // templates may omit the swept parameter
                        Err(_) => FamilySpec::parse(&format!("{},1)", family.trim_end_matches(')')))?,
                    };
                    let id: BoundId = bound.as_deref().unwrap_or_default().parse().map_err(Failure::input)?;
                    (template, parse_list(sched.as_deref().unwrap_or_default())?, BoundSpec { id, k: *k, p: *p })
                }
            };
            let table = sweep_family(&template, &values, &spec, &solver_params(&base, solver)?)?;
            if !table.all_satisfied {
                status = EXIT_VIOLATION;
            }
            match format {
                Format::Json => out.push_str(&json_text(&table)),
                Format::Csv => out.push_str(&table.to_csv()),
            }
        }
        Command::SplitCheck { domain, axis, k, max_mismatch, estimate, solver } => {
            let d = load_domain(domain, cli.seed)?;
            let axis = parse_axis(axis)?;
            let params = solver_params(&base, solver)?;
            let r = if *estimate {
                reflection_split_check_with_estimate(&d, &axis, *k, &params)?
            } else {
                reflection_split_check(&d, &axis, *k, &params)?
            };
            if r.max_mismatch > *max_mismatch || r.within_estimate(10.0) == Some(false) {
                status = EXIT_VIOLATION;
            }
            out.push_str(&json_text(&r));
        }
        Command::Asymptotics { domain, kind, kmin, kmax, solver, format } => {
            let d = load_domain(domain, cli.seed)?;
            let kind = kind.unwrap_or_else(|| default_kind(&d));
            let r = asymptotics_report(&MixedProblem::new(d, kind)?, *kmin..=*kmax, &solver_params(&base, solver)?)?;
            if !r.verdict.decreasing {
                status = EXIT_VIOLATION;
            }
            match format {
                Format::Json => out.push_str(&json_text(&r)),
                Format::Csv => out.push_str(&r.to_csv()),
            }
        }
        Command::Recover { spectrum, kind, tol } => {
            let s = read_spectrum(spectrum, *kind)?;
            let r = recover_boundary_data(&s, *kind, *tol)?;
            out.push_str(&json_text(&r));
        }
        cmd @ Command::MakeDomain { out: path, .. } => {
            let spec = make_domain_spec(cmd, cli.seed)?;
            let d = make_family(&spec)?;
            match path {
                Some(p) => io::write_domain(p, &d).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
                None => out.push_str(&io::to_json(&d)),
            }
        }
        Command::ModelSpectrum { data, ls, ln, ld, ldn, k, format } => {
            let bd = match data {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
                    serde_json::from_str::<BoundaryData>(&text).map_err(|e| Failure::input(e.to_string()))?
                }
                None => {
                    let list = |s: &Option<String>| s.as_deref().map(parse_list).unwrap_or(Ok(vec![]));
                    BoundaryData { l_s: list(ls)?, l_n: list(ln)?, l_d: list(ld)?, l_dn: list(ldn)? }
                }
            };
            let s = model_spectrum(&bd, *k)?;
            match format {
                Format::Json => out.push_str(&json_text(&s)),
                Format::Csv => out.push_str(&s.to_csv()),
            }
        }
    }
    Ok(status)
}

/// Runs the command line `args` (program name first), writing results to
/// standard output and errors to standard error; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (code, stdout, stderr) = run_captured(args);
    print!("{stdout}");
    eprint!("{stderr}");
    code
}

/// As [`run`], returning the exit code with the text for standard output and
/// standard error.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK { (code, text, String::new()) } else { (code, String::new(), text) };
        }
    };
    let mut out = String::new();
    let outcome = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| execute(&cli, &mut out)),
            Err(e) => Err(Failure { code: EXIT_INPUT, message: e.to_string() }),
        },
        None => execute(&cli, &mut out),
    };
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    match outcome {
        Ok(code) => (code, out, String::new()),
        Err(f) => (f.code, out, format!("error: {}\n", f.message)),
    }
}
