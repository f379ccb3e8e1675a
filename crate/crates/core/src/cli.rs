//! Command-line entry point.
//!
//! Three commands mirror the pipeline: `coeffs` regenerates the sonic-point
//! series, `verify` runs the exact induction and barrier checks, and `shoot`
//! (alias `profile`) finds `κ*` and assembles the global profile. Settings
//! come from an optional TOML file (unknown keys are rejected) overridden by
//! flags; every run writes `manifest.json` next to its outputs and prints it
//! on stdout. Human diagnostics go to stderr (silenced by `--quiet`).
//!
//! Exit codes: `0` success, `1` a check or pipeline stage failed, `2`
//! configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::barrier::{build_far_barriers, certify_limit_lemma, certify_prop_bar_f, BarrierCertificate};
use crate::induction::{mutation_suite, required_order, verify_all, InductionOutcome, InductionParams, MutationOutcome};
use crate::kernel::decimal::to_sig_digits;
use crate::kernel::{Field, QSqrt15};
use crate::manifest::Manifest;
use crate::params::{derive_exact_limit, resolve_float, Config, GammaMode, DEFAULT_C_KAPPA};
use crate::profile::{build_profile, ProfileConfig, DEFAULT_ZMAX};
use crate::series::{compute_exact_limit, compute_series_float, write_csv_exact, write_csv_float, SeriesCoeffs};
use crate::shooting::{
    find_kappa_with_retry, fmt_float, tolerance_halving_shift, BracketStep, ExitClass, GlueDiagnostics,
    ShootConfig, ShootResult, DEFAULT_PREC,
};

/// Table format of `coeffs` and of the profile rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which exact checks `verify` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Induction,
    Barriers,
    All,
}

#[derive(Parser, Debug)]
#[command(name = "implode", version, about = "Sonic-point series, exact certificates, shooting and profiles")]
pub struct Cli {
    /// TOML configuration file (flags override its values).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Format of the coefficient and profile tables.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Suppress human diagnostics on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regenerate the sonic-point series coefficients.
    Coeffs(CoeffsArgs),
    /// Run the exact induction and/or barrier checks.
    Verify(VerifyArgs),
    /// Find κ* for odd n and assemble the global profile.
    #[command(alias = "profile")]
    Shoot(ShootArgs),
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    /// Highest order.
    #[arg(long = "N", value_name = "N")]
    pub n_max: Option<usize>,
    /// Exact coefficients at the limit exponent.
    #[arg(long, conflicts_with = "kappa")]
    pub limit_gamma: bool,
    /// Float coefficients at the exponent with eigenvalue ratio κ.
    #[arg(long)]
    pub kappa: Option<String>,
    /// Significant digits of the decimal columns.
    #[arg(long)]
    pub digits: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub which: Which,
    /// Number of random single-coefficient mutations that must be detected.
    #[arg(long)]
    pub mutations: Option<usize>,
    /// Flip the sign of the stored coefficient `Û_k` before verifying.
    #[arg(long, value_name = "K")]
    pub corrupt: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ShootArgs {
    /// Odd order n; κ* is sought in (n, n+1), retrying at n+2 and n+4.
    #[arg(long = "n", value_name = "n")]
    pub n: Option<u32>,
    /// Outer end of the far-field leg.
    #[arg(long)]
    pub zmax: Option<f64>,
    /// Tolerance of the double-precision legs and quadratures.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also re-run the refinement with the Taylor tolerance halved.
    #[arg(long)]
    pub check_tolerance: bool,
}

/// Resolved run configuration; the TOML file uses the same keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub d: u32,
    pub p: u32,
    pub c_kappa: f64,
    /// Float-mode exponent by eigenvalue ratio (`None`: limit exponent).
    pub kappa: Option<String>,
    /// Highest series order of `coeffs`.
    #[serde(rename = "N")]
    pub n_max: usize,
    pub digits: usize,
    pub n: u32,
    pub zmax: f64,
    pub tol: f64,
    /// MPFR precision (bits) of float-mode computations.
    pub prec: u32,
    pub mutations: usize,
    pub check_tolerance: bool,
    pub format: Format,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 4,
            p: 7,
            c_kappa: DEFAULT_C_KAPPA,
            kappa: None,
            n_max: 500,
            digits: 40,
            n: 101,
            zmax: DEFAULT_ZMAX,
            tol: crate::profile::DEFAULT_RK_TOL,
            prec: DEFAULT_PREC,
            mutations: 20,
            check_tolerance: false,
            format: Format::Csv,
            out: PathBuf::from("out"),
            workers: None,
        }
    }
}

/// Configuration problems (exit code 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    /// Parses a TOML file, rejecting unknown keys.
    pub fn from_toml(text: &str) -> std::result::Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("configuration file: {e}")))
    }

    pub fn problem(&self) -> Config {
        let gamma = match &self.kappa {
            Some(k) => GammaMode::KappaTarget(k.clone()),
            None => GammaMode::ExactLimit,
        };
        Config { d: self.d, p: self.p, gamma, c_kappa: self.c_kappa }
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1)
    }

    fn validate(&self) -> std::result::Result<(), ConfigError> {
        self.problem().validate().map_err(|e| ConfigError(e.to_string()))?;
        if !(self.zmax.is_finite() && self.zmax > 1.0) {
            return Err(ConfigError(format!("zmax must be > 1, got {}", self.zmax)));
        }
        if !(self.tol > 0.0 && self.tol < 1e-3) {
            return Err(ConfigError(format!("tol must lie in (0, 1e-3), got {}", self.tol)));
        }
        if self.prec < 64 {
            return Err(ConfigError(format!("prec must be at least 64 bits, got {}", self.prec)));
        }
        Ok(())
    }
}

/// Merges the configuration file and the command-line overrides.
pub fn resolve_config(cli: &Cli) -> std::result::Result<RunConfig, ConfigError> {
    let mut rc = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        rc.out = o.clone();
    }
    if let Some(f) = cli.format {
        rc.format = f;
    }
    if cli.workers.is_some() {
        rc.workers = cli.workers;
    }
    match &cli.command {
        Command::Coeffs(a) => {
            if let Some(n) = a.n_max {
                rc.n_max = n;
            }
            if a.limit_gamma {
                rc.kappa = None;
            }
            if a.kappa.is_some() {
                rc.kappa = a.kappa.clone();
            }
            if let Some(d) = a.digits {
                rc.digits = d;
            }
        }
        Command::Verify(a) => {
            if let Some(m) = a.mutations {
                rc.mutations = m;
            }
            if rc.kappa.is_some() {
                return Err(ConfigError("verify runs in exact mode at the limit exponent; remove `kappa`".into()));
            }
        }
        Command::Shoot(a) => {
            if let Some(n) = a.n {
                rc.n = n;
            }
            if let Some(z) = a.zmax {
                rc.zmax = z;
            }
            if let Some(t) = a.tol {
                rc.tol = t;
            }
            rc.check_tolerance |= a.check_tolerance;
            if rc.n % 2 == 0 {
                return Err(ConfigError(format!("n must be odd, got {}", rc.n)));
            }
        }
    }
    rc.validate()?;
    Ok(rc)
}

/// Human diagnostics on stderr.
struct Log {
    quiet: bool,
}

impl Log {
    fn line(&self, s: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", s.as_ref());
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Coeffs(_) => "coeffs",
        Command::Verify(_) => "verify",
        Command::Shoot(_) => "shoot",
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli))
}

/// Runs a parsed command line; returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let log = Log { quiet: cli.quiet };
    let rc = match resolve_config(cli) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&rc.out) {
        eprintln!("error: cannot create {}: {e}", rc.out.display());
        return 2;
    }
    let start = Instant::now();
    let mut manifest = Manifest::new(command_name(&cli.command), rc.clone(), rc.workers());
    let outcome = match &cli.command {
        Command::Coeffs(_) => cmd_coeffs(&rc, &mut manifest, &log),
        Command::Verify(a) => cmd_verify(&rc, a, &mut manifest, &log),
        Command::Shoot(_) => cmd_shoot(&rc, &mut manifest, &log),
    };
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let code = match outcome {
        Ok(None) => {
            manifest.success = true;
            0
        }
        Ok(Some(failure)) => {
            log.line(format!("FAILED: {failure}"));
            manifest.failure = Some(failure);
            1
        }
        Err(e) => {
            let code = if is_config_error(&e) { 2 } else { 1 };
            eprintln!("error: {e:#}");
            manifest.failure = Some(format!("{e:#}"));
            code
        }
    };
    if let Err(e) = manifest.save(&rc.out) {
        eprintln!("error: cannot write manifest: {e}");
        return 1;
    }
    if let Ok(json) = serde_json::to_string_pretty(&manifest) {
        println!("{json}");
    }
    code
}

fn is_config_error(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<ConfigError>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<crate::Error>(),
        Some(
            crate::Error::Config(_)
                | crate::Error::ConstraintViolation(_)
                | crate::Error::OutOfMonotoneRange { .. }
                | crate::Error::ResonantOrder { .. }
        )
    )
}

/// `Ok(None)` on success, `Ok(Some(reason))` when a check failed.
type Outcome = Result<Option<String>>;

#[derive(Serialize)]
struct ExactRow {
    n: usize,
    #[serde(rename = "U_n")]
    u: String,
    #[serde(rename = "U_hat_n")]
    u_hat: String,
    catalan_n: String,
}

fn exact_table(s: &SeriesCoeffs<QSqrt15>, digits: usize, format: Format) -> Result<Vec<u8>> {
    let mut buf = vec![];
    match format {
        Format::Csv => write_csv_exact(s, digits, &mut buf)?,
        Format::Json => {
            let rows: Vec<ExactRow> = (0..s.u.len())
                .map(|n| ExactRow {
                    n,
                    u: s.u[n].exact_string(),
                    u_hat: to_sig_digits(&s.u_hat[n], digits),
                    catalan_n: s.catalan[n].to_string(),
                })
                .collect();
            buf = to_json(&rows)?;
        }
    }
    Ok(buf)
}

fn cmd_coeffs(rc: &RunConfig, m: &mut Manifest<RunConfig>, log: &Log) -> Outcome {
    let cfg = rc.problem();
    let ext = match rc.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match &rc.kappa {
        None => {
            let ep = derive_exact_limit(&cfg)?;
            let (s, path) = compute_exact_limit(&ep, rc.n_max)?;
            let table = exact_table(&s, rc.digits, rc.format)?;
            let p = m.write_output(&rc.out, &format!("coeffs_limit.{ext}"), &table)?;
            log.line(format!("{} exact coefficients ({path:?}) -> {}", s.u.len(), p.display()));
        }
        Some(k) => {
            let fp = resolve_float(&cfg, rc.prec)?;
            let s = compute_series_float(&fp, rc.n_max)?;
            let mut buf = vec![];
            write_csv_float(&s, rc.digits, &mut buf)?;
            if rc.format == Format::Json {
                let mut rd = csv::Reader::from_reader(buf.as_slice());
                let rows: Vec<std::collections::BTreeMap<String, String>> =
                    rd.deserialize().collect::<std::result::Result<_, _>>()?;
                buf = to_json(&rows)?;
            }
            let p = m.write_output(&rc.out, &format!("coeffs_kappa.{ext}"), &buf)?;
            log.line(format!("{} float coefficients at κ = {k} -> {}", s.u.len(), p.display()));
            if !s.near_resonant.is_empty() {
                log.line(format!("warning: near-resonant orders {:?}", s.near_resonant));
            }
        }
    }
    Ok(None)
}

#[derive(Serialize)]
struct InductionReport<'a> {
    outcome: &'a InductionOutcome,
    corrupted: Option<usize>,
    mutation_seed: u64,
    mutations: &'a [MutationOutcome],
    mutations_detected: bool,
}

#[derive(Serialize)]
struct BarrierReport<'a> {
    passed: bool,
    certificates: &'a [BarrierCertificate],
    wall_time_s: f64,
}

fn cmd_verify(rc: &RunConfig, a: &VerifyArgs, m: &mut Manifest<RunConfig>, log: &Log) -> Outcome {
    let ep = derive_exact_limit(&rc.problem())?;
    let ip = InductionParams::default();
    let workers = rc.workers();
    let mut failures = vec![];
    if matches!(a.which, Which::Induction | Which::All) {
        let (clean, _) = compute_exact_limit(&ep, required_order(&ip))?;
        let mut series = clean.clone();
        if let Some(k) = a.corrupt {
            if k >= series.u.len() {
                return Err(ConfigError(format!("--corrupt {k} beyond the computed order {}", series.order())).into());
            }
            series.u_hat[k] = series.u_hat[k].fneg();
            series.u[k] = series.u[k].fneg();
        }
        let out = verify_all(&series, &ep, &ip, workers);
        let seed = crate::induction::cert_seed();
        let muts = mutation_suite(&clean, &ep.c_star, &ip, rc.mutations, seed, workers);
        let detected = muts.iter().all(MutationOutcome::detected);
        for c in out.base_case.checks.iter().chain(&out.growth.checks).chain(&out.closing.report.checks) {
            let w = c.witness.as_deref().map(|w| format!(" witness {w}")).unwrap_or_default();
            log.line(format!("{} {}{w}", if c.passed { "PASS" } else { "FAIL" }, c.name));
            if !c.passed {
                failures.push(format!("induction {}{w}", c.name));
            }
        }
        for row in &out.closing.inequalities {
            log.line(format!("  {}: {} < {}", row.label, row.lhs, row.rhs));
        }
        log.line(format!("{}/{} mutations detected (seed {seed})", muts.iter().filter(|o| o.detected()).count(), muts.len()));
        if !detected {
            failures.push("induction mutation test".into());
        }
        let report = InductionReport {
            outcome: &out,
            corrupted: a.corrupt,
            mutation_seed: seed,
            mutations: &muts,
            mutations_detected: detected,
        };
        m.write_output(&rc.out, "induction_report.json", &to_json(&report)?)?;
    }
    if matches!(a.which, Which::Barriers | Which::All) {
        let t = Instant::now();
        let fb = build_far_barriers(&ep);
        let (s, _) = compute_exact_limit(&ep, 3)?;
        let mut certs = certify_prop_bar_f(&fb, &ep, &s.u[2]);
        certs.push(certify_limit_lemma(&fb, &ep));
        let wall = t.elapsed().as_secs_f64();
        for c in &certs {
            log.line(format!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.condition));
            if let Some(f) = &c.failure {
                failures.push(format!("barrier {}: {f}", c.condition));
            }
        }
        let report = BarrierReport { passed: certs.iter().all(|c| c.passed), certificates: &certs, wall_time_s: wall };
        m.write_output(&rc.out, "barrier_report.json", &to_json(&report)?)?;
    }
    Ok((!failures.is_empty()).then(|| failures.join("; ")))
}

/// Serialisable view of a [`ShootResult`].
#[derive(Serialize)]
struct ShootReport<'a> {
    n: u32,
    kappa_star: String,
    gamma_star: String,
    delta_y: f64,
    g_star: f64,
    exit_class: ExitClass,
    history: &'a [BracketStep],
    scan: &'a [(f64, ExitClass, f64)],
    glue: &'a GlueDiagnostics,
    tolerance_halving_shift: Option<f64>,
    wall_time_s: f64,
}

fn shoot_config(rc: &RunConfig) -> ShootConfig {
    let mut sc = ShootConfig::new(rc.problem());
    sc.cfg.gamma = GammaMode::ExactLimit;
    sc.prec = rc.prec;
    sc.taylor = crate::ode::TaylorOptions::for_prec(rc.prec);
    sc.workers = rc.workers();
    sc
}

fn cmd_shoot(rc: &RunConfig, m: &mut Manifest<RunConfig>, log: &Log) -> Outcome {
    let sc = shoot_config(rc);
    let res: ShootResult = find_kappa_with_retry(rc.n, &sc).context("stage shoot")?;
    log.line(format!(
        "n = {}: κ* = {} (δ_Y = {}, g = {:e}, {:.1} s)",
        res.n,
        fmt_float(&res.kappa_star),
        res.delta_y,
        res.g_star,
        res.wall_time_s
    ));
    let shift = if rc.check_tolerance {
        let s = tolerance_halving_shift(&res, &sc).context("stage tolerance check")?;
        log.line(format!("κ* shift under halved tolerance: {s:e}"));
        Some(s)
    } else {
        None
    };
    let report = ShootReport {
        n: res.n,
        kappa_star: fmt_float(&res.kappa_star),
        gamma_star: fmt_float(&res.matched.gamma),
        delta_y: res.delta_y,
        g_star: res.g_star,
        exit_class: res.matched.class,
        history: &res.history,
        scan: &res.scan,
        glue: &res.glue,
        tolerance_halving_shift: shift,
        wall_time_s: res.wall_time_s,
    };
    m.write_output(&rc.out, "shoot.json", &to_json(&report)?)?;
    let mut failures = vec![];
    if res.g_star.abs() >= sc.g_tol {
        failures.push(format!("shoot: |g(κ*)| = {:e}", res.g_star.abs()));
    }
    if !res.glue.passes() {
        failures.push("shoot: glued trajectory diagnostics".into());
    }
    if shift.is_some_and(|s| s >= 1e-8) {
        failures.push("shoot: tolerance halving moved κ*".into());
    }

    let pc = ProfileConfig { zmax: rc.zmax, rk_tol: rc.tol, g_order: res.n as usize };
    let profile = build_profile(&res, &sc, &pc).context("stage profile")?;
    let table = match rc.format {
        Format::Csv => {
            let mut buf = vec![];
            profile.write_csv(&mut buf)?;
            ("profile.csv", buf)
        }
        Format::Json => ("profile.json", to_json(&profile.rows)?),
    };
    m.write_output(&rc.out, table.0, &table.1)?;
    let summary = profile.summary(&res);
    m.write_output(&rc.out, "profile_summary.json", &to_json(&summary)?)?;
    let c = &profile.checks;
    log.line(format!(
        "profile: ξ = ({:.6}, {:.6}, {:.6}), (Z₂, V₂) = ({:.6}, {:.6}), V∞ = {:.8} ± {:.1e}, W∞ = {:.6e}, drift {:.1e}",
        profile.desing.xi1, profile.desing.xi2, profile.desing.xi3, c.z2, c.v2, c.v_inf, c.v_inf_error, c.w_inf, c.w_drift
    ));
    if !c.passes() || !(c.w_inf > 0.0) {
        failures.push("profile: asymptotic checks".into());
    }
    Ok((!failures.is_empty()).then(|| failures.join("; ")))
}

/// Reads a configuration file for tests and tools.
pub fn load_config(path: &Path) -> std::result::Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("d = 4\nflux = 3\n").is_err());
        let rc = RunConfig::from_toml("d = 4\nN = 12\nformat = \"json\"\n").unwrap();
        assert_eq!(rc.n_max, 12);
        assert_eq!(rc.format, Format::Json);
    }

    #[test]
    fn even_n_is_a_configuration_error() {
        let cli = Cli::try_parse_from(["implode", "shoot", "--n", "4"]).unwrap();
        let e = resolve_config(&cli).unwrap_err();
        assert!(e.to_string().contains("n must be odd"));
    }

    #[test]
    fn flags_override_the_file_defaults() {
        let cli = Cli::try_parse_from(["implode", "--workers", "3", "coeffs", "--N", "7", "--kappa", "101.5"]).unwrap();
        let rc = resolve_config(&cli).unwrap();
        assert_eq!(rc.n_max, 7);
        assert_eq!(rc.kappa.as_deref(), Some("101.5"));
        assert_eq!(rc.workers(), 3);
    }
}
