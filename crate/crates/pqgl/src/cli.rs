//! Command-line front end.
//!
//! One thin binary exposes the library: `classify` for the exponent
//! regimes, `toolkit-selftest` for the scalar-inequality battery,
//! `check-integrand` for the structural assumptions of a configured
//! density, `solve` for single minimizations and regularization ladders,
//! `estimate` for refinement-stability verdicts of the fitted constants,
//! and `scan` for the batch CSV sweep.
//!
//! Exit codes: `0` success, `1` a mathematical check failed (a margin went
//! negative, a fitted constant drifted, a minimization did not converge),
//! `2` usage, configuration, or I/O trouble.
//!
//! Configuration files are INI-style: `[section]` headers, `key = value`
//! lines, `#`/`;` comments. Rational exponents are written exactly
//! (`5/2`, `2.2`, `3`). `PQGL_THREADS` caps the worker-thread count.

use crate::estimates::{
    caccioppoli_check, default_scan_points, epsilon_split, main_estimate_check, regime_scan,
    write_plot_data, write_scan_csv, Cutoff, EstimateError, MoserConstants, ScanConfig,
};
use crate::exponents::{classify, classify_permissive, g_eval, ExponentError, ExponentSet, GrowthCase};
use crate::integrand::{
    fit_approx_bounds, orlicz_norm_h, verify_ellipticity, verify_growth, verify_mixed_bound,
    Integrand, IntegrandError, Kind, MollifierSpec, Profile, SampleOpts,
};
use crate::orlicz::{
    eq_elem_check, fenchel_conjugate, ggp_sandwich_check, hat_inverse_bound,
    iteration_lemma_apply, l_inverse_asymptotics_check, phi_submultiplicative_check, HatWeight,
    OrliczError, OrliczWeight, PhiFunction,
};
use crate::quadrature::logspace;
use crate::rational::Rational;
use crate::solver::{
    minimize, minimize_from, solve_sequence, BoundaryData, Grid, GridField, SolverError,
    SolverOptions,
};
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const EXIT_OK: i32 = 0;
const EXIT_CHECK: i32 = 1;
const EXIT_USAGE: i32 = 2;

/// Internal error carrier distinguishing "a check failed" from "the
/// invocation was unusable".
#[derive(Debug)]
enum CliError {
    Check(String),
    Usage(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Check(_) => EXIT_CHECK,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Check(m) | CliError::Usage(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

impl From<ExponentError> for CliError {
    fn from(e: ExponentError) -> Self {
        match e {
            ExponentError::GapViolation { .. } | ExponentError::HypothesisNotMet(_) => {
                CliError::Check(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<IntegrandError> for CliError {
    fn from(e: IntegrandError) -> Self {
        match e {
            IntegrandError::EllipticityViolation(_)
            | IntegrandError::GrowthViolation(_)
            | IntegrandError::MixedBoundViolation(_)
            | IntegrandError::QuadratureWarning { .. } => CliError::Check(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NonConvergence { .. } => CliError::Check(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::StaleField
            | EstimateError::ProductDivergence(_)
            | EstimateError::SplitNotApplicable => CliError::Check(e.to_string()),
            EstimateError::Solver(s) => s.into(),
            EstimateError::Integrand(i) => i.into(),
            EstimateError::Exponent(x) => x.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<OrliczError> for CliError {
    fn from(e: OrliczError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "pqgl",
    about = "Numerical laboratory for unbalanced-growth gradient functionals",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an exponent set into its growth regime.
    Classify(ClassifyArgs),
    /// Run the deterministic scalar-toolkit battery.
    ToolkitSelftest(ToolkitArgs),
    /// Verify the structural assumptions of a configured density.
    CheckIntegrand(CheckArgs),
    /// Minimize the discrete energy (optionally along a ladder).
    Solve(SolveArgs),
    /// Fit constants on two nested grids and judge their stability.
    Estimate(EstimateArgs),
    /// Sweep the default regime roster into a CSV and plot files.
    Scan(ScanArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Spatial dimension n >= 2.
    #[arg(long, default_value = "3")]
    n: u32,
    /// Lower growth exponent (exact rational, e.g. "2" or "3/2").
    #[arg(long)]
    p: String,
    /// Upper growth exponent.
    #[arg(long)]
    q: String,
    /// Coefficient differentiability exponent.
    #[arg(long)]
    r: String,
    /// Logarithmic weight strength.
    #[arg(long)]
    alpha: String,
    /// Ellipticity shift in [0, 1].
    #[arg(long, default_value = "1.0")]
    mu: f64,
    /// Accept a log weight strictly inside the gap.
    #[arg(long)]
    permissive: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ToolkitArgs {
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// INI file with an [integrand] section.
    #[arg(long)]
    config: PathBuf,
    /// Sample count per verification battery.
    #[arg(long, default_value = "2000")]
    samples: usize,
    /// Seed of the sampling generator.
    #[arg(long, default_value = "7")]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// INI file ([integrand], [grid], [solver] sections).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset density from the scan roster
    /// (standard|strict|limit-a|limit-b|limit-c).
    #[arg(long)]
    integrand: Option<String>,
    /// Nodes per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Spatial dimension (2 or 3).
    #[arg(long)]
    dim: Option<usize>,
    /// Dirichlet trace: linear|harmonic|harmonic4|bump.
    #[arg(long)]
    boundary: Option<String>,
    /// Gradient-sup stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap before the solver reports non-convergence.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Comma-separated increasing truncation levels (turns on the ladder).
    #[arg(long)]
    k_list: Option<String>,
    /// Comma-separated decreasing mollification radii.
    #[arg(long)]
    eps_list: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset density from the scan roster.
    #[arg(long)]
    integrand: Option<String>,
    /// Coarse nodes per axis (the fine grid is 2m - 1).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Inner cutoff radius.
    #[arg(long)]
    rho: Option<f64>,
    /// Outer cutoff radius.
    #[arg(long, name = "R")]
    radius: Option<f64>,
    /// Comma-separated stabilization exponents.
    #[arg(long)]
    gamma_list: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    /// INI file with an optional [scan] section.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated grid resolutions.
    #[arg(long)]
    m_list: Option<String>,
    /// Recorded provenance seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Entry point used by the binary: parses `std::env::args`, runs, and
/// returns the process exit code.
pub fn run() -> i32 {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here with a zero-status error kind.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Command::Classify(a) => cmd_classify(a),
        Command::ToolkitSelftest(a) => cmd_toolkit(a),
        Command::CheckIntegrand(a) => cmd_check_integrand(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Scan(a) => cmd_scan(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("pqgl: {}", e.message());
            e.code()
        }
    }
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("PQGL_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

// ---------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------

type Ini = BTreeMap<String, BTreeMap<String, String>>;

/// Minimal INI reader: sections, `key = value`, `#`/`;` comments.
fn parse_ini(text: &str) -> Result<Ini, CliError> {
    let mut out: Ini = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(CliError::Usage(format!(
                    "config line {}: unterminated section header '{raw}'",
                    lineno + 1
                )));
            };
            section = name.trim().to_ascii_lowercase();
            out.entry(section.clone()).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected 'key = value', got '{raw}'",
                lineno + 1
            )));
        };
        out.entry(section.clone())
            .or_default()
            .insert(key.trim().to_ascii_lowercase(), value.trim().to_string());
    }
    Ok(out)
}

fn load_ini(path: &Path) -> Result<Ini, CliError> {
    let mut text = String::new();
    std::fs::File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open config {}: {e}", path.display())))?
        .read_to_string(&mut text)?;
    parse_ini(&text)
}

fn ini_get<'a>(ini: &'a Ini, section: &str, key: &str) -> Option<&'a str> {
    ini.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
}

fn parse_key<T: std::str::FromStr>(raw: &str, what: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| CliError::Usage(format!("cannot parse {what} from '{raw}': {e}")))
}

fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| parse_key::<f64>(s.trim(), what))
        .collect()
}

fn parse_usize_list(raw: &str, what: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|s| parse_key::<usize>(s.trim(), what))
        .collect()
}

/// Builds the density from an `[integrand]` section (plus the grid
/// dimension, which doubles as the exponent dimension).
fn integrand_from_ini(ini: &Ini, dim: usize) -> Result<Integrand, CliError> {
    let sec = "integrand";
    if !ini.contains_key(sec) {
        return Err(CliError::Usage("config has no [integrand] section".into()));
    }
    let kind = match ini_get(ini, sec, "kind").unwrap_or("K3").to_ascii_uppercase().as_str() {
        "K1" => Kind::K1,
        "K2" => Kind::K2,
        "K3" => Kind::K3,
        other => return Err(CliError::Usage(format!("unknown integrand kind '{other}'"))),
    };
    let rat = |key: &str, default: &str| -> Result<Rational, CliError> {
        parse_key(ini_get(ini, sec, key).unwrap_or(default), key)
    };
    let p: Rational = rat("p", "2")?;
    let q: Rational = rat("q", "2")?;
    let r: Rational = rat("r", "4")?;
    let alpha: Rational = rat("alpha", "0")?;
    let mu: f64 = parse_key(ini_get(ini, sec, "mu").unwrap_or("1"), "mu")?;
    let e = ExponentSet::new(dim as u32, p, q, r, alpha)?.with_mu(mu)?;

    let a_min: f64 = parse_key(ini_get(ini, sec, "a_min").unwrap_or("1"), "a_min")?;
    let a_max: f64 = parse_key(ini_get(ini, sec, "a_max").unwrap_or("1"), "a_max")?;
    let profile = match ini_get(ini, sec, "a_profile").unwrap_or("const").to_ascii_lowercase().as_str()
    {
        "const" => {
            if a_min != a_max {
                return Err(CliError::Usage(format!(
                    "constant profile needs a_min = a_max, got {a_min} and {a_max}"
                )));
            }
            Profile::Const { value: a_min }
        }
        "sine" => Profile::Sine { mid: 0.5 * (a_min + a_max), amp: 0.5 * (a_max - a_min) },
        "bump" => {
            let width: f64 =
                parse_key(ini_get(ini, sec, "a_width").unwrap_or("0.35"), "a_width")?;
            Profile::Bump { base: a_min, height: a_max - a_min, width }
        }
        other => return Err(CliError::Usage(format!("unknown a_profile '{other}'"))),
    };
    let i = match kind {
        Kind::K1 => Integrand::k1(e, dim)?,
        Kind::K2 => Integrand::k2(e, dim, profile)?,
        Kind::K3 => Integrand::k3(e, dim, profile)?,
    };
    match ini_get(ini, sec, "h_offset") {
        Some(raw) => Ok(i.with_h_offset(parse_key(raw, "h_offset")?)?),
        None => Ok(i),
    }
}

fn boundary_from_name(name: &str, slope: Option<&str>) -> Result<BoundaryData, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "linear" => {
            let b = match slope {
                Some(raw) => {
                    let v = parse_f64_list(raw, "slope")?;
                    if v.len() > 3 {
                        return Err(CliError::Usage("slope takes at most 3 components".into()));
                    }
                    let mut b = [0.0; 3];
                    b[..v.len()].copy_from_slice(&v);
                    b
                }
                None => [1.0, 0.0, 0.0],
            };
            Ok(BoundaryData::Linear { b })
        }
        "harmonic" | "harmonic2" => Ok(BoundaryData::HarmonicQuadratic),
        "harmonic4" | "quartic" => Ok(BoundaryData::HarmonicQuartic),
        "bump" => Ok(BoundaryData::Bump),
        other => Err(CliError::Usage(format!(
            "unknown boundary '{other}' (expected linear|harmonic|harmonic4|bump)"
        ))),
    }
}

/// Everything `solve` and `estimate` need, resolved from config + flags
/// (flags win).
struct Problem {
    integrand: Integrand,
    dim: usize,
    m: usize,
    extent: f64,
    boundary: BoundaryData,
    opts: SolverOptions,
    ini: Ini,
}

#[allow(clippy::too_many_arguments)]
fn resolve_problem(
    config: Option<&Path>,
    preset: Option<&str>,
    grid_flag: Option<usize>,
    dim_flag: Option<usize>,
    boundary_flag: Option<&str>,
    tol_flag: Option<f64>,
    max_iter_flag: Option<usize>,
) -> Result<Problem, CliError> {
    let ini = match config {
        Some(path) => load_ini(path)?,
        None => Ini::new(),
    };
    let dim = match dim_flag {
        Some(d) => d,
        None => parse_key(ini_get(&ini, "grid", "dim").unwrap_or("2"), "dim")?,
    };
    let (integrand, preset_boundary) = match preset {
        Some(name) => {
            let roster = default_scan_points();
            let point = roster
                .iter()
                .find(|pt| pt.name == name)
                .ok_or_else(|| {
                    let names: Vec<&str> = roster.iter().map(|p| p.name.as_str()).collect();
                    CliError::Usage(format!(
                        "unknown preset '{name}' (available: {})",
                        names.join(", ")
                    ))
                })?;
            if dim != point.dim && dim_flag.is_some() {
                return Err(CliError::Usage(format!(
                    "preset '{name}' is {}-dimensional",
                    point.dim
                )));
            }
            let (_, _, integrand) = point.build().map_err(CliError::from)?;
            (integrand, Some(point.boundary.clone()))
        }
        None => {
            if !ini.contains_key("integrand") {
                return Err(CliError::Usage(
                    "provide --config with an [integrand] section or --integrand <preset>".into(),
                ));
            }
            (integrand_from_ini(&ini, dim)?, None)
        }
    };
    let dim = integrand.dim;
    let m = match grid_flag {
        Some(m) => m,
        None => parse_key(ini_get(&ini, "grid", "m").unwrap_or("17"), "m")?,
    };
    let extent: f64 = parse_key(ini_get(&ini, "grid", "extent").unwrap_or("1"), "extent")?;
    let boundary = match boundary_flag {
        Some(name) => boundary_from_name(name, ini_get(&ini, "solver", "slope"))?,
        None => match ini_get(&ini, "solver", "boundary") {
            Some(name) => boundary_from_name(name, ini_get(&ini, "solver", "slope"))?,
            None => preset_boundary.unwrap_or(BoundaryData::HarmonicQuadratic),
        },
    };
    let tol = match tol_flag {
        Some(t) => t,
        None => parse_key(ini_get(&ini, "solver", "tol").unwrap_or("1e-6"), "tol")?,
    };
    let max_iter = match max_iter_flag {
        Some(v) => v,
        None => parse_key(ini_get(&ini, "solver", "max_iter").unwrap_or("50000"), "max_iter")?,
    };
    Ok(Problem {
        integrand,
        dim,
        m,
        extent,
        boundary,
        opts: SolverOptions { tol, max_iter, precondition: true },
        ini,
    })
}

// ---------------------------------------------------------------------
// Field binary format
// ---------------------------------------------------------------------

/// Writes a field as one text header line
/// (`pqgl-field dim=<d> m=<m> extent=<e>`) followed by the nodal values as
/// little-endian f64 in row-major node order.
pub fn write_field_binary(path: &Path, field: &GridField) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        "pqgl-field dim={} m={} extent={}",
        field.grid.dim, field.grid.m, field.grid.extent
    )?;
    let mut bytes = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&bytes)
}

/// Reads the format written by [`write_field_binary`].
pub fn read_field_binary(path: &Path) -> std::io::Result<(usize, usize, f64, Vec<f64>)> {
    let bytes = std::fs::read(path)?;
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidData, "missing header"))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let mut dim = 0usize;
    let mut m = 0usize;
    let mut extent = 0.0f64;
    for part in header.split_whitespace().skip(1) {
        let Some((key, value)) = part.split_once('=') else { continue };
        match key {
            "dim" => dim = value.parse().map_err(io_data)?,
            "m" => m = value.parse().map_err(io_data)?,
            "extent" => extent = value.parse().map_err(io_data)?,
            _ => {}
        }
    }
    let body = &bytes[header_end + 1..];
    if dim == 0 || m == 0 || body.len() != m.pow(dim as u32) * 8 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("body has {} bytes, header says dim={dim} m={m}", body.len()),
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dim, m, extent, values))
}

fn io_data<E: std::fmt::Display>(e: E) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------

fn regime_name(case: GrowthCase) -> &'static str {
    match case {
        GrowthCase::StandardGrowth => "standard-growth",
        GrowthCase::StrictGap => "strict-gap",
        GrowthCase::LimitGap => "limit-gap",
    }
}

fn cmd_classify(a: ClassifyArgs) -> Result<(), CliError> {
    let p: Rational = parse_key(&a.p, "p")?;
    let q: Rational = parse_key(&a.q, "q")?;
    let r: Rational = parse_key(&a.r, "r")?;
    let alpha: Rational = parse_key(&a.alpha, "alpha")?;
    let e = ExponentSet::new(a.n, p, q, r, alpha)?.with_mu(a.mu)?;
    let case = if a.permissive { classify_permissive(&e)? } else { classify(&e)? };
    let g1 = g_eval(&e, case, 1.0).map_err(|err| CliError::Usage(err.to_string()))?;
    let g2 = g_eval(&e, case, 2.0).map_err(|err| CliError::Usage(err.to_string()))?;
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "regime": regime_name(case),
                "q_over_p": e.q_over_p().to_string(),
                "gap_bound": e.gap_bound().to_string(),
                "mu": e.mu,
                "gain_at_1": g1,
                "gain_at_2": g2,
            }))
            .map_err(|err| CliError::Usage(err.to_string()))?
        );
    } else {
        println!("regime: {}", regime_name(case));
        println!("q/p = {} against gap bound {}", e.q_over_p(), e.gap_bound());
        println!("gain function: G(1) = {g1:.12}, G(2) = {g2:.12}");
    }
    Ok(())
}

// ---------------------------------------------------------------------
// toolkit-selftest
// ---------------------------------------------------------------------

struct CheckOutcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, r: Result<String, String>) -> CheckOutcome {
    match r {
        Ok(detail) => CheckOutcome { name, pass: true, detail },
        Err(detail) => CheckOutcome { name, pass: false, detail },
    }
}

fn selftest_inversion() -> Result<String, String> {
    let w = OrliczWeight::new(6.0, 3.0, 2.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for tau in logspace(1e-3, 1e9, 200) {
        let t = w.inverse(tau).map_err(|e| e.to_string())?;
        let resid = (w.eval(t) - tau).abs() / tau.max(1.0);
        worst = worst.max(resid);
    }
    if worst <= 1e-12 {
        Ok(format!("max relative inversion residual {worst:.3e}"))
    } else {
        Err(format!("inversion residual {worst:.3e} exceeds 1e-12"))
    }
}

fn selftest_asymptotics() -> Result<String, String> {
    // Borderline weight (r = n): exponential bound.
    let border = OrliczWeight::new(3.0, 3.0, 5.0).map_err(|e| e.to_string())?;
    let lo = (std::f64::consts::E + 1.0).ln().powf(5.0) * 1.0001;
    let rep1 = l_inverse_asymptotics_check(&border, &logspace(lo, 1e6, 60))
        .map_err(|e| e.to_string())?;
    // Differentiable weight (r > n): identity-form bound.
    let above = OrliczWeight::new(6.0, 3.0, 2.0).map_err(|e| e.to_string())?;
    let lo2 = (std::f64::consts::E + 1.0).ln().powf(2.0) * 1.0001;
    let rep2 = l_inverse_asymptotics_check(&above, &logspace(lo2, 1e8, 60))
        .map_err(|e| e.to_string())?;
    let worst = rep1.worst_margin.min(rep2.worst_margin);
    if worst >= -1e-10 {
        Ok(format!("worst asymptotic margin {worst:.3e}"))
    } else {
        Err(format!("asymptotic margin {worst:.3e} below -1e-10"))
    }
}

fn selftest_submultiplicative() -> Result<String, String> {
    let phi = PhiFunction::new(3.0, 2.0).map_err(|e| e.to_string())?;
    let grid = logspace(1.001, 1e4, 40);
    let mut worst = f64::INFINITY;
    for &s in &grid {
        for &t in &grid {
            let m = phi_submultiplicative_check(&phi, s, t).map_err(|e| e.to_string())?;
            worst = worst.min(m);
        }
    }
    // Diagonal identity: margin(s, s) = (2^alpha - 1) phi(s^2).
    for &s in &grid {
        let m = phi_submultiplicative_check(&phi, s, s).map_err(|e| e.to_string())?;
        let want = (2.0f64.powf(2.0) - 1.0) * phi.eval(s * s).map_err(|e| e.to_string())?;
        if (m - want).abs() > 1e-12 * want.max(1.0) {
            return Err(format!("diagonal margin {m} deviates from {want} at s = {s}"));
        }
    }
    if worst >= 0.0 {
        Ok(format!("minimum margin {worst:.3e} over a 40x40 log grid"))
    } else {
        Err(format!("submultiplicativity margin {worst:.3e} negative"))
    }
}

fn selftest_fenchel() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    for beta in [2.0, 3.0, 1.5] {
        let phi = move |t: f64| t.powf(beta);
        for _ in 0..2000 {
            let s = rng.gen_range(0.01..10.0f64);
            let t = rng.gen_range(0.01..40.0f64);
            let star = fenchel_conjugate(phi, s, 1e4).map_err(|e| e.to_string())?;
            worst = worst.min(phi(t) + star - s * t);
        }
    }
    if worst >= -1e-10 {
        Ok(format!("worst Young-inequality margin {worst:.3e}"))
    } else {
        Err(format!("Young-inequality margin {worst:.3e} below -1e-10"))
    }
}

fn selftest_sandwich() -> Result<String, String> {
    let grid = logspace(1.0, 100.0, 40);
    let rep_lin = ggp_sandwich_check(|s| s, &grid).map_err(|e| e.to_string())?;
    if rep_lin.s0 != grid[0] {
        return Err(format!("linear phi should hold from the first point, s0 = {}", rep_lin.s0));
    }
    let rep_sq = ggp_sandwich_check(|s| s * s, &grid).map_err(|e| e.to_string())?;
    if rep_sq.s0 != 100.0 {
        return Err(format!("quadratic phi should pin s0 = 100, got {}", rep_sq.s0));
    }
    let mut worst = f64::INFINITY;
    for rep in [&rep_lin, &rep_sq] {
        for row in &rep.rows {
            if row.s >= rep.s0 {
                worst = worst.min(row.lower_margin.min(row.upper_margin));
            }
        }
    }
    if worst >= -1e-10 {
        Ok(format!("sandwich margins beyond s0 bottom out at {worst:.3e}"))
    } else {
        Err(format!("sandwich margin {worst:.3e} below -1e-10 beyond s0"))
    }
}

fn selftest_hat_bound() -> Result<String, String> {
    let e = ExponentSet::new(
        3,
        Rational::from_int(2),
        "7/3".parse().unwrap(),
        Rational::from_int(6),
        Rational::from_int(2),
    )
    .map_err(|e| e.to_string())?;
    let hat = HatWeight::from_exponents(&e).map_err(|e| e.to_string())?;
    let frozen = hat_inverse_bound(&hat, 1.0).map_err(|e| e.to_string())?;
    if (frozen - 4.481689070338065).abs() > 1e-12 {
        return Err(format!("closed-form bound at sigma = 1 drifted to {frozen:.15}"));
    }
    // Above sigma ~ 15 the numeric inverse leaves f64 range, so stop at 12.
    let mut worst = f64::INFINITY;
    for sigma in logspace(1.0, 12.0, 100) {
        let bound = hat_inverse_bound(&hat, sigma).map_err(|e| e.to_string())?;
        let numeric = hat.inverse(sigma).map_err(|e| e.to_string())?;
        worst = worst.min((bound - numeric) / bound.max(1.0));
    }
    if worst >= -1e-9 {
        Ok(format!("closed form dominates the numeric inverse (margin {worst:.3e})"))
    } else {
        Err(format!("closed-form bound undercuts the numeric inverse by {worst:.3e}"))
    }
}

fn selftest_iteration_lemma() -> Result<String, String> {
    let bound = iteration_lemma_apply(|_| 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 0.5)
        .map_err(|e| e.to_string())?;
    if !bound.bound.is_finite() || bound.kappa <= 0.0 || bound.kappa >= 1.0 {
        return Err(format!("degenerate absorption: bound {}, kappa {}", bound.bound, bound.kappa));
    }
    match iteration_lemma_apply(|_| 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0) {
        Err(OrliczError::ConstantBlowup(_)) => Ok(format!(
            "absorption constant c_A = {:.6}, kappa = {:.6}; theta = 1 rejected",
            bound.c_a, bound.kappa
        )),
        other => Err(format!("theta = 1 should blow up, got {other:?}")),
    }
}

fn selftest_eq_elem() -> Result<String, String> {
    let w = OrliczWeight::new(6.0, 3.0, 2.0).map_err(|e| e.to_string())?;
    let ints: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    let c1 = eq_elem_check(&w, 2.0, &ints).map_err(|e| e.to_string())?;
    let logs: Vec<f64> = (-60..=60).map(|k| 10f64.powf(k as f64 / 20.0)).collect();
    let c2 = eq_elem_check(&w, 2.0, &logs).map_err(|e| e.to_string())?;
    if (c1 - 1.6828081415781875).abs() > 1e-9 || (c2 - 1.6888492246658011).abs() > 1e-9 {
        return Err(format!("fitted constants drifted: {c1:.16}, {c2:.16}"));
    }
    Ok(format!("fitted constants {c1:.12} (integers), {c2:.12} (log grid)"))
}

fn selftest_split_level() -> Result<String, String> {
    let e = ExponentSet::new(
        3,
        Rational::from_int(2),
        "7/3".parse().unwrap(),
        Rational::from_int(6),
        Rational::zero(),
    )
    .map_err(|e| e.to_string())?;
    let moser = MoserConstants::from_value(3, 1.0).map_err(|e| e.to_string())?;
    let eps = epsilon_split(&e, &moser, 0.0, 1.0).map_err(|e| e.to_string())?;
    if (eps - 2.0).abs() > 1e-10 {
        return Err(format!("cubic-weight split level drifted to {eps:.15}"));
    }
    Ok(format!("split level {eps:.12} for the cubic weight (exact value 2)"))
}

fn cmd_toolkit(a: ToolkitArgs) -> Result<(), CliError> {
    let outcomes = vec![
        outcome("weight-inversion", selftest_inversion()),
        outcome("inverse-asymptotics", selftest_asymptotics()),
        outcome("submultiplicativity", selftest_submultiplicative()),
        outcome("fenchel-inequality", selftest_fenchel()),
        outcome("polar-sandwich", selftest_sandwich()),
        outcome("hat-inverse-bound", selftest_hat_bound()),
        outcome("iteration-lemma", selftest_iteration_lemma()),
        outcome("elementary-inequality", selftest_eq_elem()),
        outcome("split-level", selftest_split_level()),
    ];
    let all_pass = outcomes.iter().all(|o| o.pass);
    if a.json {
        let rows: Vec<serde_json::Value> = outcomes
            .iter()
            .map(|o| json!({"name": o.name, "pass": o.pass, "detail": o.detail}))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({"checks": rows, "pass": all_pass}))
                .map_err(|e| CliError::Usage(e.to_string()))?
        );
    } else {
        for o in &outcomes {
            println!("{} {:<24} {}", if o.pass { "ok  " } else { "FAIL" }, o.name, o.detail);
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Check("toolkit selftest failed".into()))
    }
}

// ---------------------------------------------------------------------
// check-integrand
// ---------------------------------------------------------------------

fn cmd_check_integrand(a: CheckArgs) -> Result<(), CliError> {
    let ini = load_ini(&a.config)?;
    let dim: usize = parse_key(ini_get(&ini, "grid", "dim").unwrap_or("2"), "dim")?;
    let integrand = integrand_from_ini(&ini, dim)?;
    let opts = SampleOpts { count: a.samples, seed: a.seed };

    let mut checks = Vec::new();
    let mut pass = true;
    let mut push = |name: &str, result: Result<serde_json::Value, String>, pass: &mut bool| {
        match result {
            Ok(detail) => checks.push(json!({"name": name, "pass": true, "detail": detail})),
            Err(msg) => {
                *pass = false;
                checks.push(json!({"name": name, "pass": false, "detail": msg}));
            }
        }
    };

    let ellipticity = verify_ellipticity(&integrand, &opts);
    push(
        "ellipticity",
        ellipticity
            .map(|(low, high)| json!({"ratio_low": low, "ratio_high": high}))
            .map_err(|e| e.to_string()),
        &mut pass,
    );
    let growth = verify_growth(&integrand, &opts);
    let (growth_low, growth_up) = growth.as_ref().copied().unwrap_or((f64::NAN, f64::NAN));
    push(
        "growth-envelope",
        growth
            .map(|(lo, up)| json!({"lower_margin": lo, "upper_margin": up}))
            .map_err(|e| e.to_string()),
        &mut pass,
    );
    let mixed = verify_mixed_bound(&integrand, &opts);
    let mixed_margin = mixed.as_ref().copied().unwrap_or(f64::NAN);
    push(
        "mixed-derivative-bound",
        mixed.map(|m| json!({"margin": m})).map_err(|e| e.to_string()),
        &mut pass,
    );
    push(
        "approximation-bounds",
        fit_approx_bounds(&integrand, &opts)
            .map(|b| serde_json::to_value(&b).unwrap_or(serde_json::Value::Null))
            .map_err(|e| e.to_string()),
        &mut pass,
    );
    let radius = integrand.extent / 2.0;
    let norm = orlicz_norm_h(&integrand, [0.0; 3], radius);
    let h_squared = norm.as_ref().map(|n| n.h_squared).unwrap_or(f64::NAN);
    push(
        "coefficient-norm",
        norm.map(|n| serde_json::to_value(&n).unwrap_or(serde_json::Value::Null))
            .map_err(|e| e.to_string()),
        &mut pass,
    );

    let report = json!({
        "checks": checks,
        "margins": {
            "growth_lower": growth_low,
            "growth_upper": growth_up,
            "mixed": mixed_margin,
        },
        "H_squared": h_squared,
        "pass": pass,
    });
    match &a.out {
        Some(path) => {
            write_json(path, &report)?;
            println!("wrote {}", path.display());
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?
        ),
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Check("integrand verification failed".into()))
    }
}

// ---------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------

fn cmd_solve(a: SolveArgs) -> Result<(), CliError> {
    let prob = resolve_problem(
        a.config.as_deref(),
        a.integrand.as_deref(),
        a.grid,
        a.dim,
        a.boundary.as_deref(),
        a.tol,
        a.max_iter,
    )?;
    let grid = Grid::new(prob.dim, prob.extent, prob.m)?;
    std::fs::create_dir_all(&a.out)?;

    let k_list_raw = a
        .k_list
        .as_deref()
        .or_else(|| ini_get(&prob.ini, "solver", "k_list"))
        .map(str::to_string);
    let eps_list_raw = a
        .eps_list
        .as_deref()
        .or_else(|| ini_get(&prob.ini, "solver", "eps_list"))
        .map(str::to_string);

    match (k_list_raw, eps_list_raw) {
        (Some(kraw), Some(eraw)) => {
            let k_list = parse_f64_list(&kraw, "k_list")?;
            let eps_list = parse_f64_list(&eraw, "eps_list")?;
            let spec = MollifierSpec::default();
            let rungs = solve_sequence(
                grid,
                &prob.integrand,
                &prob.boundary,
                &k_list,
                &eps_list,
                &spec,
                &prob.opts,
            )?;
            let mut entries = Vec::new();
            for (idx, rung) in rungs.iter().enumerate() {
                let field_path = a.out.join(format!("rung_{idx:03}_field.bin"));
                write_field_binary(&field_path, &rung.field)?;
                entries.push(json!({
                    "k": rung.k,
                    "eps": rung.eps,
                    "field": field_path.file_name().unwrap().to_string_lossy(),
                    "report": serde_json::to_value(&rung.report).unwrap_or(serde_json::Value::Null),
                    "minimality_lhs": rung.minimality_lhs,
                    "minimality_rhs": rung.minimality_rhs,
                    "sup_v_inner": rung.sup_v_inner,
                }));
                println!(
                    "rung {idx}: k = {}, eps = {}, energy = {:.9e}, sup V (inner) = {:.6}",
                    rung.k, rung.eps, rung.report.energy, rung.sup_v_inner
                );
            }
            let ladder_path = a.out.join("ladder.json");
            write_json(&ladder_path, &json!({"rungs": entries}))?;
            println!("wrote {}", ladder_path.display());
            Ok(())
        }
        (None, None) => {
            let (field, report) = match minimize(grid, &prob.integrand, &prob.boundary, &prob.opts)
            {
                Ok(pair) => pair,
                Err(SolverError::NonConvergence { field, report, iterations, grad_sup, tol }) => {
                    // Persist the partial state, then report the failure.
                    write_field_binary(&a.out.join("field.bin"), &field)?;
                    write_json(
                        &a.out.join("report.json"),
                        &serde_json::to_value(&*report).unwrap_or(serde_json::Value::Null),
                    )?;
                    return Err(CliError::Check(format!(
                        "no convergence after {iterations} iterations \
                         (gradient sup {grad_sup:.3e} above tolerance {tol:.3e}); \
                         partial field written"
                    )));
                }
                Err(other) => return Err(other.into()),
            };
            let field_path = a.out.join("field.bin");
            write_field_binary(&field_path, &field)?;
            let report_path = a.out.join("report.json");
            write_json(
                &report_path,
                &serde_json::to_value(&report).unwrap_or(serde_json::Value::Null),
            )?;
            println!(
                "energy = {:.12e}, iterations = {}, gradient sup = {:.3e}",
                report.energy, report.iterations, report.grad_sup
            );
            println!("wrote {} and {}", field_path.display(), report_path.display());
            Ok(())
        }
        _ => Err(CliError::Usage(
            "ladder solves need both k_list and eps_list (flags or [solver] keys)".into(),
        )),
    }
}

// ---------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------

fn stability_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        1.0
    } else if x <= 0.0 || y <= 0.0 {
        f64::INFINITY
    } else {
        (x / y).max(y / x)
    }
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), CliError> {
    let prob = resolve_problem(
        a.config.as_deref(),
        a.integrand.as_deref(),
        a.grid,
        a.dim,
        a.boundary.as_deref(),
        a.tol,
        None,
    )?;
    let rho = match a.rho {
        Some(v) => v,
        None => parse_key(ini_get(&prob.ini, "estimate", "rho").unwrap_or("0.25"), "rho")?,
    };
    let radius = match a.radius {
        Some(v) => v,
        None => parse_key(ini_get(&prob.ini, "estimate", "r").unwrap_or("0.5"), "R")?,
    };
    let gammas = match &a.gamma_list {
        Some(raw) => parse_f64_list(raw, "gamma_list")?,
        None => match ini_get(&prob.ini, "estimate", "gamma_list") {
            Some(raw) => parse_f64_list(raw, "gamma_list")?,
            None => vec![0.0, 2.0, 4.0],
        },
    };
    let cutoff = Cutoff::new(rho, radius)?;
    std::fs::create_dir_all(&a.out)?;

    let m_coarse = prob.m;
    let m_fine = 2 * prob.m - 1;
    let mut levels = Vec::new();
    let mut previous: Option<GridField> = None;
    for m in [m_coarse, m_fine] {
        let grid = Grid::new(prob.dim, prob.extent, m)?;
        // The fine level starts from the prolonged coarse minimizer,
        // which cuts its iteration count by an order of magnitude.
        let (field, report) = match &previous {
            Some(coarse) => {
                let init = coarse.prolong(grid)?;
                minimize_from(grid, &prob.integrand, &prob.boundary, init, &prob.opts)?
            }
            None => minimize(grid, &prob.integrand, &prob.boundary, &prob.opts)?,
        };
        previous = Some(field.clone());
        let mut caccs = Vec::new();
        for &gamma in &gammas {
            caccs.push(caccioppoli_check(&field, &prob.integrand, &cutoff, gamma)?);
        }
        let main = main_estimate_check(&field, &prob.integrand, rho, radius)?;
        println!(
            "m = {m}: energy = {:.9e}, sup|Du| (inner) = {:.6}, C' = {:.6e}",
            report.energy, main.lhs_sup, main.c_prime
        );
        levels.push((m, report, caccs, main));
    }
    let (_, _, coarse_caccs, coarse_main) = &levels[0];
    let (_, _, fine_caccs, fine_main) = &levels[1];

    let mut pass = true;
    let mut cacc_rows = Vec::new();
    for (c, f) in coarse_caccs.iter().zip(fine_caccs) {
        let ratio = stability_ratio(c.fitted_c, f.fitted_c);
        let ok = ratio <= 4.0;
        pass &= ok;
        println!(
            "caccioppoli gamma = {}: fitted C {:.6e} -> {:.6e} (ratio {:.3}) {}",
            c.gamma,
            c.fitted_c,
            f.fitted_c,
            ratio,
            if ok { "ok" } else { "UNSTABLE" }
        );
        cacc_rows.push(json!({
            "gamma": c.gamma, "coarse": c.fitted_c, "fine": f.fitted_c,
            "ratio": ratio, "pass": ok,
        }));
    }
    let main_ratio = stability_ratio(coarse_main.c_prime, fine_main.c_prime);
    let main_ok = main_ratio <= 2.0;
    pass &= main_ok;
    println!(
        "gradient bound: C' {:.6e} -> {:.6e} (ratio {:.3}) {}",
        coarse_main.c_prime,
        fine_main.c_prime,
        main_ratio,
        if main_ok { "ok" } else { "UNSTABLE" }
    );

    let report = json!({
        "levels": levels.iter().map(|(m, report, caccs, main)| json!({
            "m": m,
            "solve": serde_json::to_value(report).unwrap_or(serde_json::Value::Null),
            "caccioppoli": serde_json::to_value(caccs).unwrap_or(serde_json::Value::Null),
            "main_estimate": serde_json::to_value(main).unwrap_or(serde_json::Value::Null),
        })).collect::<Vec<_>>(),
        "stability": {
            "caccioppoli": cacc_rows,
            "main": {"ratio": main_ratio, "pass": main_ok},
        },
        "pass": pass,
    });
    let path = a.out.join("estimate.json");
    write_json(&path, &report)?;
    println!("wrote {}", path.display());
    if pass {
        Ok(())
    } else {
        Err(CliError::Check("fitted constants are not refinement-stable".into()))
    }
}

// ---------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------

fn cmd_scan(a: ScanArgs) -> Result<(), CliError> {
    let ini = match &a.config {
        Some(path) => load_ini(path)?,
        None => Ini::new(),
    };
    let mut cfg = ScanConfig::default();
    if let Some(raw) = ini_get(&ini, "scan", "m_list") {
        cfg.m_list = parse_usize_list(raw, "m_list")?;
    }
    if let Some(raw) = ini_get(&ini, "scan", "tol") {
        cfg.tol = parse_key(raw, "tol")?;
    }
    if let Some(raw) = ini_get(&ini, "scan", "seed") {
        cfg.seed = parse_key(raw, "seed")?;
    }
    if let Some(raw) = &a.m_list {
        cfg.m_list = parse_usize_list(raw, "m_list")?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let points = default_scan_points();
    let scan = regime_scan(&points, &cfg)?;
    std::fs::create_dir_all(&a.out)?;
    let csv_path = a.out.join("scan.csv");
    let mut f = std::fs::File::create(&csv_path)?;
    write_scan_csv(&scan, &mut f)?;
    println!("wrote {} ({} rows)", csv_path.display(), scan.rows.len());
    let written = write_plot_data(&scan, &a.out)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ini_parser_handles_sections_comments_and_errors() {
        let text = "\n# comment\n[Integrand]\nkind = K3\np = 5/2\n; another\n[grid]\nm=33\n";
        let ini = parse_ini(text).unwrap();
        assert_eq!(ini_get(&ini, "integrand", "kind"), Some("K3"));
        assert_eq!(ini_get(&ini, "integrand", "p"), Some("5/2"));
        assert_eq!(ini_get(&ini, "grid", "m"), Some("33"));
        assert!(parse_ini("[broken\nk = v").is_err());
        assert!(parse_ini("keyonly\n").is_err());
    }

    #[test]
    fn integrand_section_builds_all_kinds() {
        let text = "[integrand]\nkind = K3\np = 2\nq = 5/2\nr = 4\nalpha = 1\nmu = 1\n\
                    a_profile = sine\na_min = 1\na_max = 2\n";
        let ini = parse_ini(text).unwrap();
        let i = integrand_from_ini(&ini, 2).unwrap();
        assert_eq!(i.kind, Kind::K3);
        assert_eq!(i.a_bounds(), (1.0, 2.0));
        let bad = parse_ini("[integrand]\nkind = K9\n").unwrap();
        assert!(integrand_from_ini(&bad, 2).is_err());
        let gap = parse_ini("[integrand]\nkind = K3\np = 2\nq = 3\nr = 4\nalpha = 1\n").unwrap();
        assert!(integrand_from_ini(&gap, 2).is_err());
    }

    #[test]
    fn field_binary_round_trips() {
        let grid = Grid::new(2, 1.0, 5).unwrap();
        let field = GridField::from_boundary(grid, &BoundaryData::HarmonicQuadratic);
        let dir = std::env::temp_dir().join(format!("pqgl_cli_test_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.bin");
        write_field_binary(&path, &field).unwrap();
        let (dim, m, extent, values) = read_field_binary(&path).unwrap();
        assert_eq!((dim, m, extent), (2, 5, 1.0));
        assert_eq!(values, field.values);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn boundary_names_resolve() {
        assert_eq!(
            boundary_from_name("harmonic", None).unwrap(),
            BoundaryData::HarmonicQuadratic
        );
        assert_eq!(
            boundary_from_name("harmonic4", None).unwrap(),
            BoundaryData::HarmonicQuartic
        );
        assert!(matches!(
            boundary_from_name("linear", Some("1,-0.5")).unwrap(),
            BoundaryData::Linear { b } if b == [1.0, -0.5, 0.0]
        ));
        assert!(boundary_from_name("spiral", None).is_err());
    }

    #[test]
    fn toolkit_selftest_checks_all_pass() {
        for (name, result) in [
            ("inversion", selftest_inversion()),
            ("asymptotics", selftest_asymptotics()),
            ("submultiplicative", selftest_submultiplicative()),
            ("fenchel", selftest_fenchel()),
            ("sandwich", selftest_sandwich()),
            ("hat", selftest_hat_bound()),
            ("iteration", selftest_iteration_lemma()),
            ("eq-elem", selftest_eq_elem()),
            ("split", selftest_split_level()),
        ] {
            assert!(result.is_ok(), "{name}: {:?}", result.err());
        }
    }
}
