//! Command-line front end: run configs, the built-in catalog, suite
//! execution and report emission.
//!
//! Exit codes: 0 when every report passes, 2 when any report fails, 1 on
//! configuration, parse or integration errors.

mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{Format, IntegratorSettings, RunConfig};
pub use output::{ReportFile, REPORT_SCHEMA, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::group_core::catalog::{self, GROUP_NAMES};
use crate::verify::{applicable_checks, chain_catalog, run_jobs, Chain, ChainConfig, ChainInfo, Check, LieChain};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Finite groups available to finite chains.
pub const FINITE_GROUP_NAMES: &[&str] = &["S4", "A4", "D4", "Q8", "Z/n"];

#[derive(Debug, Parser)]
#[command(name = "haarpush", version, about = "Haar measures, modular functions and pushforwards along quotient maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List built-in groups and chains.
    Catalog(CatalogArgs),
    /// Run checks on chains and write a report.
    Verify(VerifyArgs),
    /// Print the modular function of a built-in group at an element.
    Modular(ModularArgs),
    /// Print the quotient Haar normalization of a chain.
    Weil(WeilArgs),
    /// Convert a JSON report to another format.
    ReportConvert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Keep entries whose name or group contains this text.
    pub filter: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in chain; repeatable.
    #[arg(long = "chain")]
    pub chains: Vec<String>,
    /// Comma-separated checks, or `all`.
    #[arg(long)]
    pub checks: Option<String>,
    /// Gauss–Legendre order for integrals below the high-dimension threshold.
    #[arg(long)]
    pub quad_order: Option<usize>,
    #[arg(long)]
    pub panels: Option<usize>,
    /// Use Monte Carlo with this many samples for high-dimensional integrals.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Seed; falls back to the config, then to HAARPUSH_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative tolerance for every check.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the effective config as TOML and exit.
    #[arg(long)]
    pub dump_config: bool,
}

#[derive(Debug, Args)]
pub struct ModularArgs {
    #[arg(long)]
    pub group: String,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub element: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct WeilArgs {
    /// Built-in Lie chain.
    #[arg(long)]
    pub chain: Option<String>,
    /// Group, with `--normal`, instead of a chain.
    #[arg(long, requires = "normal")]
    pub group: Option<String>,
    /// Comma-separated coordinate positions of the normal subgroup.
    #[arg(long)]
    pub normal: Option<String>,
    /// Fresh bumps to check independence on.
    #[arg(long, default_value_t = 3)]
    pub fresh: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_PASS;
        }
    };
    let result = match cli.command {
        Command::Catalog(a) => cmd_catalog(&a, out),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Modular(a) => cmd_modular(&a, out),
        Command::Weil(a) => cmd_weil(&a, out),
        Command::ReportConvert(a) => cmd_report_convert(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Serialize)]
struct CatalogListing {
    groups: Vec<String>,
    finite_groups: Vec<String>,
    chains: Vec<ChainInfo>,
}

pub fn cmd_catalog(a: &CatalogArgs, out: &mut dyn Write) -> Result<i32> {
    let f = a.filter.as_deref();
    let keep = |s: &&&str| f.is_none_or(|f| s.contains(f));
    let listing = CatalogListing {
        groups: GROUP_NAMES.iter().filter(keep).map(|s| s.to_string()).collect(),
        finite_groups: FINITE_GROUP_NAMES.iter().filter(keep).map(|s| s.to_string()).collect(),
        chains: chain_catalog(f),
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&listing).expect("listing serializes")).map_err(io)?;
        return Ok(EXIT_PASS);
    }
    if !listing.groups.is_empty() || !listing.finite_groups.is_empty() {
        writeln!(out, "groups: {}", listing.groups.join(", ")).map_err(io)?;
        writeln!(out, "finite groups: {}", listing.finite_groups.join(", ")).map_err(io)?;
    }
    for c in &listing.chains {
        let checks: Vec<&str> = c.checks.iter().map(|k| k.id()).collect();
        writeln!(out, "{:<18} {:<8} {}\n{:<27} checks: {}", c.name, c.group, c.description, "", checks.join(", ")).map_err(io)?;
    }
    Ok(EXIT_PASS)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("HAARPUSH_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config { path: "HAARPUSH_SEED".into(), message: format!("not an unsigned integer: {s:?}") }),
        Err(_) => Ok(None),
    }
}

/// The run config after applying command-line overrides.
pub fn effective_config(a: &VerifyArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for c in &a.chains {
        if !cfg.chains.contains(c) {
            cfg.chains.push(c.clone());
        }
    }
    if let Some(list) = &a.checks {
        cfg.checks = Check::parse_list(list)?;
    }
    if let Some(v) = a.quad_order {
        cfg.integrator.quad_order = v;
    }
    if let Some(v) = a.panels {
        cfg.integrator.panels = v;
    }
    if a.mc_samples.is_some() {
        cfg.integrator.mc_samples = a.mc_samples;
    }
    if a.tol.is_some() {
        cfg.rel_tol = a.tol;
    }
    if let Some(f) = a.format {
        cfg.format = f;
    }
    if let Some(o) = &a.out {
        cfg.out = Some(o.display().to_string());
    }
    cfg.seed = Some(a.seed.or(cfg.seed).or(env_seed()?).unwrap_or(0));
    cfg.validate()?;
    if cfg.chains.is_empty() && cfg.inline_chains.is_empty() {
        return Err(Error::Config { path: "chains".into(), message: "no chains selected; use --chain or --config".into() });
    }
    Ok(cfg)
}

/// Runs a config and collects the reports.
pub fn execute(cfg: &RunConfig) -> Result<ReportFile> {
    let seed = cfg.seed.unwrap_or(0);
    let settings = cfg.settings(seed);
    let registry = cfg.registry()?;
    let chain_cfgs = cfg.resolved_chains()?;
    let chains = chain_cfgs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            Chain::build(c, &registry, &settings).map_err(|e| match e {
                Error::Config { path, message } => {
                    let at = if k < cfg.inline_chains.len() { format!("chain[{k}]") } else { format!("chain {:?}", c.name) };
                    Error::Config { path: format!("{at}: {path}"), message }
                }
                other => other,
            })
        })
        .collect::<Result<Vec<Chain>>>()?;
    let mut jobs = Vec::new();
    for (chain, c) in chains.iter().zip(&chain_cfgs) {
        let checks = if cfg.checks.is_empty() { applicable_checks(c) } else { cfg.checks.clone() };
        jobs.extend(checks.into_iter().map(|k| (chain, k)));
    }
    Ok(ReportFile::new(seed, run_jobs(&jobs, &settings)?))
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = effective_config(a)?;
    if a.dump_config {
        write!(out, "{}", cfg.to_toml()).map_err(io)?;
        return Ok(EXIT_PASS);
    }
    let file = execute(&cfg)?;
    let text = file.render(cfg.format)?;
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{p}: {e}")))?,
        None => write!(out, "{text}").map_err(io)?,
    }
    for r in &file.reports {
        writeln!(
            err,
            "{} {:<18} {:<28} rel {:.2e} abs {:.2e}",
            if r.pass { "pass" } else { "FAIL" },
            r.chain,
            r.check_id,
            r.rel_error,
            r.abs_error
        )
        .map_err(io)?;
    }
    Ok(if file.all_pass() { EXIT_PASS } else { EXIT_FAIL })
}

fn parse_list<T: std::str::FromStr>(src: &str, what: &str) -> Result<Vec<T>> {
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad {what} {s:?}"))))
        .collect()
}

#[derive(Serialize)]
struct ModularValue {
    group: String,
    element: Vec<f64>,
    modular: f64,
    det_right: f64,
    det_left: f64,
}

pub fn cmd_modular(a: &ModularArgs, out: &mut dyn Write) -> Result<i32> {
    let g = catalog::group(&a.group)?;
    let x: Vec<f64> = parse_list(&a.element, "coordinate")?;
    if x.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: x.len() });
    }
    let modular = g.modular(&x)?;
    let (det_right, det_left) = g.modular_parts(&x);
    let v = ModularValue { group: a.group.clone(), element: x, modular, det_right, det_left };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializes")).map_err(io)?;
    } else {
        writeln!(out, "Δ = {:.15}", v.modular).map_err(io)?;
        writeln!(out, "|det d(R_h)_e| = {:.15}", v.det_right).map_err(io)?;
        writeln!(out, "|det d(L_h)_e| = {:.15}", v.det_left).map_err(io)?;
    }
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct WeilValue {
    chain: String,
    chart_factor: f64,
    normalized: Vec<f64>,
    spread: f64,
}

pub fn cmd_weil(a: &WeilArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = match (&a.chain, &a.group, &a.normal) {
        (Some(name), None, _) => crate::verify::catalog_chain(name)?,
        (None, Some(g), Some(n)) => {
            let positions: Vec<usize> = parse_list(n, "position")?;
            let name = format!("{g}/{positions:?}");
            let text = format!("name = {name:?}\ngroup = {g:?}\nh_positions = {positions:?}\nn_positions = {positions:?}\n");
            toml::from_str::<ChainConfig>(&text).map_err(|e| Error::Parse(e.to_string()))?
        }
        _ => return Err(Error::Config { path: "weil".into(), message: "give --chain, or --group with --normal".into() }),
    };
    if cfg.is_finite() {
        return Err(Error::Unsupported("finite chains have counting measures, with scale 1".into()));
    }
    let seed = a.seed.or(env_seed()?).unwrap_or(0);
    let settings = crate::verify::RunSettings { seed, ..Default::default() };
    let chain = LieChain::build(&cfg, &crate::verify::GroupRegistry::new(), &settings)?;
    let normalized = chain.weil_normalizations(&settings.policy, a.fresh)?;
    let c0 = normalized[0];
    let spread = normalized.iter().map(|c| (c - c0).abs() / c0).fold(0.0, f64::max);
    let v = WeilValue {
        chain: cfg.name.clone(),
        chart_factor: chain.quotient().map_or(1.0, |q| q.weil_scale()),
        normalized,
        spread,
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializes")).map_err(io)?;
    } else {
        writeln!(out, "chain {}: chart factor c = {:.12}", v.chain, v.chart_factor).map_err(io)?;
        for (i, c) in v.normalized.iter().enumerate() {
            writeln!(out, "  β{i}: c = {c:.12}").map_err(io)?;
        }
        writeln!(out, "  relative spread {:.3e}", v.spread).map_err(io)?;
    }
    Ok(EXIT_PASS)
}

pub fn cmd_report_convert(a: &ConvertArgs, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
    let file = ReportFile::from_json(&text)?;
    let rendered = file.render(a.format)?;
    match &a.out {
        Some(p) => std::fs::write(p, rendered).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => write!(out, "{rendered}").map_err(io)?,
    }
    Ok(EXIT_PASS)
}
