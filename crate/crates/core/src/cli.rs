//! Command-line front end.
//!
//! Every run resolves its inputs (flags over config file over defaults) into an
//! [`Inputs`] record before computing anything. That record is echoed in the
//! output, and `casimir replay <record.json>` re-runs it to reproduce the
//! results bit for bit.
//!
//! Lengths are given in an arbitrary unit ℓ (β as βħc, α in ℓ³). Energies are
//! computed in ħc/ℓ and reported multiplied by `hbar_c/length_unit`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::kernels::{oracle_inverse_transform, r_space_kernels, ImagWavenumber, KernelComponent, ThetaParameter};
use crate::matsubara::{oscillator_sum_closed, ThermalState, DEFAULT_MAX_INDEX};
use crate::numerics::Tolerance;
use crate::pair_energy::{
    kspace_pair_energy, kspace_pair_energy_extrapolated, pair_energy_t0, pair_energy_t0_numeric, pair_free_energy,
    Medium, PairEnergy,
};
use crate::sphere_energy::{
    default_lambda_grid, default_rmin_grid, epsilon_relation, exponential_sweep, finite_part_prediction,
    hardcore_coefficients, hardcore_sweep, self_energy, sphere_energy_exponential, sphere_energy_kspace,
    sphere_energy_rspace, sphere_energy_rspace_thermal, Cutoff, EnergyBreakdown, ExponentialBasis,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest number of grid points a sweep may request.
pub const MAX_SWEEP_POINTS: usize = 10_000;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "CASIMIR_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Retarded van der Waals pair energies and dilute-sphere Casimir energies")]
pub struct Cli {
    /// Flat key=value config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Numerical value of ħc in the caller's units (energy × length).
    #[arg(long, global = true)]
    pub hbar_c: Option<f64>,
    /// Size of the input length unit ℓ in the same length units as --hbar-c.
    #[arg(long, global = true)]
    pub length_unit: Option<f64>,
    /// Relative tolerance for sums and 1D quadrature.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance floor for quadrature.
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Relative tolerance for quadratures that feed divergence fits.
    #[arg(long, global = true)]
    pub fit_rel_tol: Option<f64>,
    /// Relative tolerance for the k-space sphere cubature.
    #[arg(long, global = true)]
    pub cubature_rel_tol: Option<f64>,
    /// Largest Matsubara index before a sum is declared non-convergent.
    #[arg(long, global = true)]
    pub max_index: Option<u64>,
    /// Worker threads (also CASIMIR_WORKERS).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Include quadrature and summation diagnostics in the output.
    #[arg(long, global = true)]
    pub diagnostics: bool,
    /// Write the output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free energy of two identical particles.
    Pair(PairArgs),
    /// Casimir energy of a dilute sphere.
    Sphere(SphereArgs),
    /// First-order self-energy (reported separately, never part of the sphere energy).
    SelfEnergy(SelfEnergyArgs),
    /// Dielectric constant from (4π/3)ρα and Θ.
    Dielectric(DielectricArgs),
    /// Grid over one or two parameters, written as CSV.
    Sweep(SweepArgs),
    /// Run the built-in oracle and invariant checks.
    Verify(VerifyArgs),
    /// Re-run the inputs block of an earlier JSON record.
    Replay { record: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PairRouteArg {
    /// Matsubara sum at --beta, or the T = 0 κ-integral without it.
    Rspace,
    /// Damped k-space integral at --lambda, or extrapolated to λ → 0 without it.
    Kspace,
    /// −23α²/(4πr⁷).
    Closed,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PairArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// βħc; omit for T = 0.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub route: Option<PairRouteArg>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SphereRouteArg {
    Rspace,
    Kspace,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SphereArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long = "eps-minus-1")]
    pub eps_minus_1: Option<f64>,
    /// Polarizability; only ρα enters at T = 0.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// hardcore:<r_min> or exp:<lambda>.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Cutoff grid for --fit, as lo:hi:n[:log|lin] or a comma list.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Decompose into divergent and finite parts by fitting a cutoff sweep.
    #[arg(long)]
    pub fit: bool,
    #[arg(long, value_enum)]
    pub route: Option<SphereRouteArg>,
    /// Powers of λ/a in the exponential fit, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub basis: Option<String>,
    /// βħc for the (unvalidated) finite-temperature hard-core energy.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SelfEnergyArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub volume: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DielectricArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub rho_alpha: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    /// name=grid, with name one of r, beta, a, r_min, lambda, eps_minus_1
    /// and grid lo:hi:n[:log|lin] or a comma list. At most two.
    #[arg(long = "vary", required = true)]
    pub vary: Vec<String>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub route: Option<PairRouteArg>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long = "eps-minus-1")]
    pub eps_minus_1: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub basis: Option<String>,
    /// Also fit the swept cutoff (r_min or lambda) and write the JSON record here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Kernels,
    Matsubara,
    Pair,
    Sphere,
    SelfEnergy,
    Dielectric,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    pub suite: Suite,
    /// Write the kernel oracle comparison grid as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

/// Resolved numerical settings, echoed in every record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub hbar_c: f64,
    pub length_unit: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub fit_rel_tol: f64,
    pub cubature_rel_tol: f64,
    pub max_index: u64,
    pub diagnostics: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            hbar_c: 1.0,
            length_unit: 1.0,
            rel_tol: 1e-10,
            abs_tol: 0.0,
            fit_rel_tol: 1e-14,
            cubature_rel_tol: 1e-5,
            max_index: DEFAULT_MAX_INDEX,
            diagnostics: false,
        }
    }
}

impl Settings {
    fn energy_scale(&self) -> f64 {
        self.hbar_c / self.length_unit
    }

    fn tol(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.rel_tol)
    }

    fn fit_tol(&self) -> Tolerance {
        Tolerance::new(0.0, self.fit_rel_tol)
    }

    fn cubature_tol(&self) -> Tolerance {
        Tolerance::new(0.0, self.cubature_rel_tol)
    }

    fn thermal(&self, beta: f64) -> crate::Result<ThermalState> {
        Ok(ThermalState::new(beta)?
            .with_max_index(self.max_index)
            .with_relative_tolerance(self.rel_tol))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// A fully resolved job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Pair {
        r: f64,
        alpha: f64,
        beta: Option<f64>,
        route: PairRouteArg,
        lambda: Option<f64>,
    },
    Sphere {
        a: f64,
        eps_minus_1: f64,
        alpha: f64,
        cutoff: Cutoff,
        route: SphereRouteArg,
        fit: bool,
        sweep: Option<Vec<f64>>,
        basis: ExponentialBasis,
        beta: Option<f64>,
    },
    SelfEnergy {
        gamma: f64,
        volume: f64,
        lambda: f64,
    },
    Dielectric {
        theta: f64,
        rho_alpha: f64,
    },
    Sweep {
        axes: Vec<Axis>,
        r: Option<f64>,
        alpha: f64,
        beta: Option<f64>,
        route: PairRouteArg,
        a: Option<f64>,
        eps_minus_1: Option<f64>,
        cutoff: Option<Cutoff>,
        basis: ExponentialBasis,
    },
    Verify {
        suite: Suite,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub job: Job,
    pub settings: Settings,
}

/// Failure of a run, with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(Error::InvalidInput(_)) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numeric(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

const KNOWN_KEYS: &[&str] = &[
    "hbar_c",
    "length_unit",
    "rel_tol",
    "abs_tol",
    "fit_rel_tol",
    "cubature_rel_tol",
    "max_index",
    "workers",
    "diagnostics",
    "r",
    "alpha",
    "beta",
    "route",
    "lambda",
    "a",
    "eps_minus_1",
    "cutoff",
    "sweep",
    "fit",
    "basis",
    "gamma",
    "volume",
    "theta",
    "rho_alpha",
];

/// Parses a flat `key = value` file. `#` starts a comment; `-` in keys is read as `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key '{key}'", i + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: duplicate key '{key}'", i + 1)));
        }
    }
    Ok(map)
}

struct Resolver {
    config: BTreeMap<String, String>,
}

impl Resolver {
    fn raw(&self, key: &str) -> Option<&str> {
        self.config.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|s| s.parse::<T>().map_err(|_| usage(format!("config value '{s}' for '{key}' is invalid"))))
            .transpose()
    }

    fn f64_opt(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.parsed::<f64>(key)?,
        };
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(usage(format!("{key} must be finite")));
            }
        }
        Ok(v)
    }

    fn f64_req(&self, key: &str, flag: Option<f64>) -> Result<f64, CliError> {
        self.f64_opt(key, flag)?
            .ok_or_else(|| usage(format!("missing required value --{}", key.replace('_', "-"))))
    }

    fn string_opt(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.raw(key).map(str::to_string))
    }

    fn bool_flag(&self, key: &str, flag: bool) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        Ok(self.parsed::<bool>(key)?.unwrap_or(false))
    }

    fn enum_opt<T: ValueEnum>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|s| T::from_str(s, true).map_err(|_| usage(format!("config value '{s}' for '{key}' is invalid"))))
            .transpose()
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{key} must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{key} must be non-negative, got {v}")))
    }
}

/// Parses `lo:hi:n[:log|lin]` or `v1,v2,...`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || usage(format!("grid '{spec}' is not lo:hi:n[:log|lin] or a comma list"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let n: usize = parts[2].parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(usage(format!("grid '{spec}' is empty")));
        }
        if n > MAX_SWEEP_POINTS {
            return Err(usage(format!("grid '{spec}' has {n} points; the limit is {MAX_SWEEP_POINTS}")));
        }
        match parts.get(3).copied().unwrap_or("log") {
            "log" => {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(usage(format!("log grid '{spec}' needs positive bounds")));
                }
                crate::sphere_energy::log_grid(lo, hi, n)
            }
            "lin" => crate::sphere_energy::linear_grid(lo, hi, n),
            _ => return Err(bad()),
        }
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(usage(format!("grid '{spec}' is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

fn parse_cutoff(s: &str) -> Result<Cutoff, CliError> {
    s.parse::<Cutoff>().map_err(|e| usage(e.to_string()))
}

fn parse_basis(s: Option<String>) -> Result<ExponentialBasis, CliError> {
    match s {
        Some(s) => s.parse::<ExponentialBasis>().map_err(|e| usage(e.to_string())),
        None => Ok(ExponentialBasis::default()),
    }
}

fn resolve_settings(cli: &Cli, res: &Resolver) -> Result<Settings, CliError> {
    let d = Settings::default();
    let s = Settings {
        hbar_c: positive("hbar_c", res.f64_opt("hbar_c", cli.hbar_c)?.unwrap_or(d.hbar_c))?,
        length_unit: positive("length_unit", res.f64_opt("length_unit", cli.length_unit)?.unwrap_or(d.length_unit))?,
        rel_tol: positive("rel_tol", res.f64_opt("rel_tol", cli.rel_tol)?.unwrap_or(d.rel_tol))?,
        abs_tol: non_negative("abs_tol", res.f64_opt("abs_tol", cli.abs_tol)?.unwrap_or(d.abs_tol))?,
        fit_rel_tol: positive("fit_rel_tol", res.f64_opt("fit_rel_tol", cli.fit_rel_tol)?.unwrap_or(d.fit_rel_tol))?,
        cubature_rel_tol: positive(
            "cubature_rel_tol",
            res.f64_opt("cubature_rel_tol", cli.cubature_rel_tol)?.unwrap_or(d.cubature_rel_tol),
        )?,
        max_index: match cli.max_index {
            Some(v) => v,
            None => res.parsed::<u64>("max_index")?.unwrap_or(d.max_index),
        },
        diagnostics: res.bool_flag("diagnostics", cli.diagnostics)?,
    };
    if s.max_index == 0 {
        return Err(usage("max_index must be at least 1"));
    }
    Ok(s)
}

fn resolve_job(command: Command, res: &Resolver) -> Result<Job, CliError> {
    Ok(match command {
        Command::Pair(p) => {
            let route = res.enum_opt("route", p.route)?.unwrap_or(PairRouteArg::Rspace);
            let lambda = res.f64_opt("lambda", p.lambda)?.map(|l| positive("lambda", l)).transpose()?;
            if lambda.is_some() && route != PairRouteArg::Kspace {
                return Err(usage("--lambda only applies to --route kspace"));
            }
            let beta = res.f64_opt("beta", p.beta)?.map(|b| positive("beta", b)).transpose()?;
            if beta.is_some() && route != PairRouteArg::Rspace {
                return Err(usage("--beta only applies to --route rspace (the other routes are T = 0)"));
            }
            Job::Pair {
                r: positive("r", res.f64_req("r", p.r)?)?,
                alpha: non_negative("alpha", res.f64_req("alpha", p.alpha)?)?,
                beta,
                route,
                lambda,
            }
        }
        Command::Sphere(s) => {
            let cutoff = parse_cutoff(
                &res.string_opt("cutoff", s.cutoff)
                    .ok_or_else(|| usage("missing required value --cutoff"))?,
            )?;
            let route = res.enum_opt("route", s.route)?.unwrap_or(SphereRouteArg::Rspace);
            let a = positive("a", res.f64_req("a", s.a)?)?;
            let fit = res.bool_flag("fit", s.fit)?;
            let sweep = res.string_opt("sweep", s.sweep).map(|g| parse_grid(&g)).transpose()?;
            if sweep.is_some() && !fit {
                return Err(usage("--sweep requires --fit"));
            }
            let beta = res.f64_opt("beta", s.beta)?.map(|b| positive("beta", b)).transpose()?;
            match cutoff {
                Cutoff::HardCore { r_min } => {
                    if route == SphereRouteArg::Kspace {
                        return Err(usage("the k-space route needs an exponential cutoff"));
                    }
                    if r_min >= 2.0 * a {
                        return Err(usage("r_min must be below the sphere diameter 2a"));
                    }
                }
                Cutoff::Exponential { .. } => {
                    if beta.is_some() {
                        return Err(usage("--beta is only supported with a hard-core cutoff"));
                    }
                }
            }
            if beta.is_some() && fit {
                return Err(usage("--fit is not available at finite temperature"));
            }
            Job::Sphere {
                a,
                eps_minus_1: non_negative("eps_minus_1", res.f64_req("eps_minus_1", s.eps_minus_1)?)?,
                alpha: positive("alpha", res.f64_opt("alpha", s.alpha)?.unwrap_or(1.0))?,
                cutoff,
                route,
                fit,
                sweep,
                basis: parse_basis(res.string_opt("basis", s.basis))?,
                beta,
            }
        }
        Command::SelfEnergy(s) => Job::SelfEnergy {
            gamma: non_negative("gamma", res.f64_req("gamma", s.gamma)?)?,
            volume: non_negative("volume", res.f64_req("volume", s.volume)?)?,
            lambda: positive("lambda", res.f64_req("lambda", s.lambda)?)?,
        },
        Command::Dielectric(d) => Job::Dielectric {
            theta: res.f64_opt("theta", d.theta)?.unwrap_or(-2.0),
            rho_alpha: non_negative("rho_alpha", res.f64_req("rho_alpha", d.rho_alpha)?)?,
        },
        Command::Sweep(s) => resolve_sweep(s, res)?,
        Command::Verify(v) => Job::Verify { suite: v.suite },
        Command::Replay { .. } => unreachable!("replay is handled before resolution"),
    })
}

const PAIR_AXES: &[&str] = &["r", "beta"];
const SPHERE_AXES: &[&str] = &["a", "r_min", "lambda", "eps_minus_1"];

fn resolve_sweep(s: SweepArgs, res: &Resolver) -> Result<Job, CliError> {
    if s.vary.len() > 2 {
        return Err(usage("a sweep varies at most two parameters"));
    }
    let mut axes = Vec::new();
    for v in &s.vary {
        let (name, grid) = v
            .split_once('=')
            .ok_or_else(|| usage(format!("--vary '{v}' is not name=grid")))?;
        let name = name.trim().replace('-', "_");
        if !PAIR_AXES.contains(&name.as_str()) && !SPHERE_AXES.contains(&name.as_str()) {
            return Err(usage(format!("cannot sweep '{name}'")));
        }
        if axes.iter().any(|a: &Axis| a.name == name) {
            return Err(usage(format!("'{name}' is swept twice")));
        }
        let values = parse_grid(grid)?;
        if values.iter().any(|&x| !(x > 0.0)) && name != "eps_minus_1" {
            return Err(usage(format!("sweep values for '{name}' must be positive")));
        }
        axes.push(Axis { name, values });
    }
    let points: usize = axes.iter().map(|a| a.values.len()).product();
    if points > MAX_SWEEP_POINTS {
        return Err(usage(format!("sweep has {points} points; the limit is {MAX_SWEEP_POINTS}")));
    }
    let pair = axes.iter().all(|a| PAIR_AXES.contains(&a.name.as_str()));
    let sphere = axes.iter().all(|a| SPHERE_AXES.contains(&a.name.as_str()));
    if !pair && !sphere {
        return Err(usage("cannot mix pair (r, beta) and sphere parameters in one sweep"));
    }
    let has = |n: &str| axes.iter().any(|a| a.name == n);
    let route = res.enum_opt("route", s.route)?.unwrap_or(PairRouteArg::Rspace);
    let mut job = Job::Sweep {
        axes: axes.clone(),
        r: res.f64_opt("r", s.r)?,
        alpha: non_negative("alpha", res.f64_opt("alpha", s.alpha)?.unwrap_or(1.0))?,
        beta: res.f64_opt("beta", s.beta)?,
        route,
        a: res.f64_opt("a", s.a)?,
        eps_minus_1: res.f64_opt("eps_minus_1", s.eps_minus_1)?,
        cutoff: res.string_opt("cutoff", s.cutoff).map(|c| parse_cutoff(&c)).transpose()?,
        basis: parse_basis(res.string_opt("basis", s.basis))?,
    };
    if let Job::Sweep {
        r,
        beta,
        a,
        eps_minus_1,
        cutoff,
        ..
    } = &mut job
    {
        if pair {
            if !has("r") {
                positive("r", r.ok_or_else(|| usage("missing required value --r"))?)?;
            }
            if has("beta") && route != PairRouteArg::Rspace {
                return Err(usage("sweeping beta needs --route rspace"));
            }
            if let Some(b) = beta {
                positive("beta", *b)?;
            }
        } else {
            if has("r_min") && has("lambda") {
                return Err(usage("r_min and lambda belong to different cutoff schemes"));
            }
            if !has("a") {
                positive("a", a.ok_or_else(|| usage("missing required value --a"))?)?;
            }
            if !has("eps_minus_1") {
                non_negative("eps_minus_1", eps_minus_1.ok_or_else(|| usage("missing required value --eps-minus-1"))?)?;
            }
            if has("r_min") {
                *cutoff = Some(Cutoff::HardCore { r_min: f64::NAN });
            } else if has("lambda") {
                *cutoff = Some(Cutoff::Exponential { lambda: f64::NAN });
            } else if cutoff.is_none() {
                return Err(usage("missing required value --cutoff"));
            }
        }
    }
    Ok(job)
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn resolve_workers(cli: &Cli, res: &Resolver) -> Result<Option<usize>, CliError> {
    if let Some(w) = cli.workers {
        return Ok(Some(w));
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| usage(format!("{WORKERS_ENV}='{v}' is not a worker count")));
    }
    res.parsed::<usize>("workers")
}

/// Output of a job: a JSON record, or a CSV table with an optional JSON summary.
pub enum Output {
    Record(Value),
    /// A report that is written like a record but ends the run with exit code 1.
    Failed(Value),
    Table { csv: String, summary: Option<Value> },
}

/// Runs the CLI on `args` (including the program name), writing the primary
/// output to `stdout` or `--output` and error text to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let output_path = cli.output.clone();
    match execute(cli) {
        Ok((out, summary_path)) => {
            let code = if matches!(out, Output::Failed(_)) { 1 } else { 0 };
            match emit(out, output_path.as_deref(), summary_path.as_deref(), stdout) {
                Ok(()) => code,
                Err(e) => report(e, stdout, stderr),
            }
        }
        Err(e) => report(e, stdout, stderr),
    }
}

fn report(e: CliError, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let record = json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": e.kind(), "message": e.message(), "exit_code": e.exit_code() },
    });
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&record).expect("serializable"));
    let _ = writeln!(stderr, "error: {}", e.message());
    e.exit_code()
}

fn emit(out: Output, path: Option<&Path>, summary_path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = match out {
        Output::Record(v) | Output::Failed(v) => serde_json::to_string_pretty(&v).expect("serializable") + "\n",
        Output::Table { csv, summary } => {
            if let (Some(s), Some(p)) = (summary, summary_path) {
                let body = serde_json::to_string_pretty(&s).expect("serializable") + "\n";
                std::fs::write(p, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            }
            csv
        }
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write output: {e}"))),
    }
}

fn execute(cli: Cli) -> Result<(Output, Option<PathBuf>), CliError> {
    let config = match &cli.config {
        Some(p) => parse_config(&read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    let res = Resolver { config };
    let workers = resolve_workers(&cli, &res)?;
    let (inputs, summary_path, table_path) = match cli.command {
        Command::Replay { ref record } => {
            let v: Value = serde_json::from_str(&read_to_string(record)?)
                .map_err(|e| usage(format!("{} is not JSON: {e}", record.display())))?;
            let version = v.get("schema_version").and_then(Value::as_u64);
            if version != Some(u64::from(SCHEMA_VERSION)) {
                return Err(usage(format!("record schema_version {version:?} is not {SCHEMA_VERSION}")));
            }
            let inputs: Inputs = serde_json::from_value(v.get("inputs").cloned().unwrap_or(Value::Null))
                .map_err(|e| usage(format!("record has no usable inputs block: {e}")))?;
            (inputs, None, None)
        }
        _ => {
            let settings = resolve_settings(&cli, &res)?;
            let (summary, table) = match &cli.command {
                Command::Sweep(s) => (s.summary.clone(), None),
                Command::Verify(v) => (None, v.table.clone()),
                _ => (None, None),
            };
            let job = resolve_job(cli.command, &res)?;
            (Inputs { job, settings }, summary, table)
        }
    };
    let run = || run_inputs(&inputs, summary_path.is_some(), table_path.as_deref());
    let out = match workers {
        Some(0) => return Err(usage("worker count must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok((out, summary_path))
}

fn record(inputs: &Inputs, results: Value, diagnostics: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "inputs": inputs,
        "results": results,
        "diagnostics": if inputs.settings.diagnostics { diagnostics } else { json!({}) },
    })
}

/// Executes resolved inputs. Public so embedders can skip argument parsing.
pub fn run_inputs(inputs: &Inputs, want_summary: bool, table: Option<&Path>) -> Result<Output, CliError> {
    let s = &inputs.settings;
    let scale = s.energy_scale();
    match &inputs.job {
        Job::Pair {
            r,
            alpha,
            beta,
            route,
            lambda,
        } => {
            let (e, diag) = compute_pair(*r, *alpha, *beta, *route, *lambda, s)?;
            Ok(Output::Record(record(
                inputs,
                json!({ "value": e.value * scale, "route": e.route, "error_estimate": e.error_estimate * scale }),
                diag,
            )))
        }
        Job::Sphere {
            a,
            eps_minus_1,
            alpha,
            cutoff,
            route,
            fit,
            sweep,
            basis,
            beta,
        } => {
            let medium = Medium::dilute(*eps_minus_1, *alpha)?;
            let (results, diag) = compute_sphere(*a, &medium, *cutoff, *route, *fit, sweep.as_deref(), basis, *beta, s)?;
            Ok(Output::Record(record(inputs, results, diag)))
        }
        Job::SelfEnergy { gamma, volume, lambda } => {
            let se = self_energy(*volume, *gamma, *lambda, s.tol())?;
            Ok(Output::Record(record(
                inputs,
                json!({
                    "value": se.closed * scale,
                    "numeric": se.numeric * scale,
                    "numeric_error": se.numeric_error * scale,
                    "relative_difference": if se.closed == 0.0 { 0.0 } else { (se.numeric - se.closed).abs() / se.closed.abs() },
                    "included_in_sphere_energy": false,
                }),
                json!({ "kernel_sum_over_beta": se.kernel_sum }),
            )))
        }
        Job::Dielectric { theta, rho_alpha } => {
            let medium = Medium::new(1.0, *rho_alpha)?.with_theta(ThetaParameter(*theta));
            let d = epsilon_relation(&medium)?;
            Ok(Output::Record(record(
                inputs,
                json!({ "epsilon": d.epsilon, "n_refr": d.n_refr, "gamma": d.gamma, "gamma_from_epsilon": (d.epsilon - 1.0) / d.epsilon }),
                json!({}),
            )))
        }
        Job::Sweep { .. } => run_sweep(inputs, want_summary),
        Job::Verify { suite } => {
            let checks = run_verify(*suite, table)?;
            let passed = checks.iter().all(|c| c.passed);
            let rec = record(inputs, json!({ "passed": passed, "checks": checks }), json!({}));
            Ok(if passed { Output::Record(rec) } else { Output::Failed(rec) })
        }
    }
}

fn compute_pair(
    r: f64,
    alpha: f64,
    beta: Option<f64>,
    route: PairRouteArg,
    lambda: Option<f64>,
    s: &Settings,
) -> crate::Result<(PairEnergy, Value)> {
    Ok(match route {
        PairRouteArg::Closed => (pair_energy_t0(r, alpha)?, json!({})),
        PairRouteArg::Rspace => match beta {
            Some(b) => {
                let e = pair_free_energy(r, &Medium::new(alpha, 0.0)?, &s.thermal(b)?)?;
                let diag = json!({ "sum": e.sum });
                (e, diag)
            }
            None => (pair_energy_t0_numeric(r, alpha, s.tol())?, json!({})),
        },
        PairRouteArg::Kspace => match lambda {
            Some(l) => (kspace_pair_energy(r, alpha, l, s.tol())?, json!({})),
            None => {
                let lambdas = [0.1 * r, 0.05 * r, 0.025 * r];
                let (e, ex) = kspace_pair_energy_extrapolated(r, alpha, &lambdas, s.tol())?;
                (e, json!({ "lambdas": lambdas, "extrapolation": ex }))
            }
        },
    })
}

fn scale_breakdown(b: &EnergyBreakdown, scale: f64) -> Value {
    json!({
        "total": b.total * scale,
        "total_error": b.total_error * scale,
        "c_vol": b.c_vol * scale,
        "c_surf": b.c_surf * scale,
        "c_lin": b.c_lin * scale,
        "finite_1_over_a": b.finite_1_over_a * scale,
        "residual": b.residual,
        "extra": b.extra.iter().map(|c| json!({ "name": c.name, "value": c.value * scale })).collect::<Vec<_>>(),
        "condition_number": b.condition_number,
    })
}

#[allow(clippy::too_many_arguments)]
fn compute_sphere(
    a: f64,
    medium: &Medium,
    cutoff: Cutoff,
    route: SphereRouteArg,
    fit: bool,
    sweep: Option<&[f64]>,
    basis: &ExponentialBasis,
    beta: Option<f64>,
    s: &Settings,
) -> crate::Result<(Value, Value)> {
    let scale = s.energy_scale();
    let theory = finite_part_prediction(a, medium) * scale;
    let prediction = json!({ "finite_theory": theory });
    match cutoff {
        Cutoff::HardCore { r_min } => {
            if let Some(b) = beta {
                let q = sphere_energy_rspace_thermal(a, medium, r_min, &s.thermal(b)?, s.tol())?;
                return Ok((
                    json!({
                        "total": q.value * scale,
                        "total_error": q.error_estimate * scale,
                        "breakdown": Value::Null,
                        "prediction": prediction,
                        "validated": false,
                    }),
                    json!({ "cells": q.cells_evaluated }),
                ));
            }
            let single = sphere_energy_rspace(a, medium, r_min, s.fit_tol())?;
            let mut results = json!({
                "total": single.total * scale,
                "total_error": single.total_error * scale,
                "breakdown": scale_breakdown(&single, scale),
                "prediction": prediction,
                "validated": true,
            });
            if fit {
                let grid = sweep.map_or_else(|| default_rmin_grid(a), <[f64]>::to_vec);
                let sw = hardcore_sweep(a, medium, &grid, s.fit_tol())?;
                results["fit"] = json!({
                    "r_min": grid,
                    "fitted": scale_breakdown(&sw.fitted, scale),
                    "finite_relative_disagreement": sw.finite_relative_disagreement,
                });
            }
            Ok((results, json!({ "analytic_residual": single.residual })))
        }
        Cutoff::Exponential { lambda } => {
            let q = match route {
                SphereRouteArg::Rspace => sphere_energy_exponential(a, medium, lambda, s.fit_tol())?,
                SphereRouteArg::Kspace => sphere_energy_kspace(a, medium, lambda, s.cubature_tol())?,
            };
            let mut results = json!({
                "total": q.value * scale,
                "total_error": q.error_estimate * scale,
                "breakdown": Value::Null,
                "prediction": prediction,
                "validated": true,
            });
            if fit {
                let grid = sweep.map_or_else(|| default_lambda_grid(a), <[f64]>::to_vec);
                let sw = exponential_sweep(a, medium, &grid, basis, s.fit_tol())?;
                results["breakdown"] = scale_breakdown(&sw.fitted, scale);
                results["fit"] = json!({
                    "lambda": grid,
                    "basis": basis.powers,
                    "finite_relative_difference": (sw.fitted.finite_1_over_a * scale - theory).abs() / theory.abs(),
                });
            }
            Ok((results, json!({ "cells": q.cells_evaluated })))
        }
    }
}

fn grid_points(axes: &[Axis]) -> Vec<Vec<(String, f64)>> {
    let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.name.clone(), v));
                    q
                })
            })
            .collect();
    }
    points
}

fn csv_number(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:e}"),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

fn run_sweep(inputs: &Inputs, want_summary: bool) -> Result<Output, CliError> {
    let Job::Sweep {
        axes,
        r,
        alpha,
        beta,
        route,
        a,
        eps_minus_1,
        cutoff,
        basis,
    } = &inputs.job
    else {
        unreachable!("run_sweep only receives sweep jobs");
    };
    let s = &inputs.settings;
    let scale = s.energy_scale();
    let points = grid_points(axes);
    let get = |p: &[(String, f64)], name: &str, base: Option<f64>| {
        p.iter().find(|(n, _)| n == name).map(|(_, v)| *v).or(base)
    };
    let pair = axes.iter().all(|ax| PAIR_AXES.contains(&ax.name.as_str()));
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    if pair {
        let rows = points
            .par_iter()
            .map(|p| {
                let rr = get(p, "r", *r).expect("validated");
                let bb = get(p, "beta", *beta);
                compute_pair(rr, *alpha, bb, *route, None, s).map(|(e, _)| (rr, bb, e))
            })
            .collect::<crate::Result<Vec<_>>>()?;
        writer
            .write_record(["r", "beta", "alpha", "route", "value", "error_estimate"])
            .map_err(io)?;
        for (rr, bb, e) in rows {
            let route = serde_json::to_value(e.route).expect("serializable");
            writer
                .write_record([
                    csv_number(Some(rr)),
                    csv_number(bb),
                    csv_number(Some(*alpha)),
                    route.as_str().unwrap_or_default().to_string(),
                    csv_number(Some(e.value * scale)),
                    csv_number(Some(e.error_estimate * scale)),
                ])
                .map_err(io)?;
        }
        let csv = String::from_utf8(writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?)
            .expect("csv output is UTF-8");
        return Ok(Output::Table { csv, summary: None });
    }

    let cutoff = cutoff.expect("validated");
    let swept_cutoff = axes.iter().any(|ax| ax.name == "r_min" || ax.name == "lambda");
    struct Row {
        a: f64,
        eps: f64,
        cutoff: f64,
        b: EnergyBreakdown,
        fitted: Option<f64>,
        theory: f64,
    }
    let rows = points
        .par_iter()
        .map(|p| -> crate::Result<Row> {
            let aa = get(p, "a", *a).expect("validated");
            let eps = get(p, "eps_minus_1", *eps_minus_1).expect("validated");
            let medium = Medium::dilute(eps, (*alpha).max(f64::MIN_POSITIVE))?;
            let theory = finite_part_prediction(aa, &medium);
            match cutoff {
                Cutoff::HardCore { r_min } => {
                    let rm = get(p, "r_min", Some(r_min)).expect("validated");
                    let b = sphere_energy_rspace(aa, &medium, rm, s.fit_tol())?;
                    let fitted = if swept_cutoff {
                        None
                    } else {
                        Some(hardcore_sweep(aa, &medium, &default_rmin_grid(aa), s.fit_tol())?.fitted.finite_1_over_a)
                    };
                    Ok(Row { a: aa, eps, cutoff: rm, b, fitted, theory })
                }
                Cutoff::Exponential { lambda } => {
                    let l = get(p, "lambda", Some(lambda)).expect("validated");
                    let q = sphere_energy_exponential(aa, &medium, l, s.fit_tol())?;
                    let b = EnergyBreakdown {
                        total: q.value,
                        total_error: q.error_estimate,
                        c_vol: f64::NAN,
                        c_surf: f64::NAN,
                        c_lin: f64::NAN,
                        finite_1_over_a: f64::NAN,
                        residual: f64::NAN,
                        extra: Vec::new(),
                        condition_number: None,
                    };
                    let fitted = if swept_cutoff {
                        None
                    } else {
                        Some(exponential_sweep(aa, &medium, &default_lambda_grid(aa), basis, s.fit_tol())?.fitted.finite_1_over_a)
                    };
                    Ok(Row { a: aa, eps, cutoff: l, b, fitted, theory })
                }
            }
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let cutoff_name = match cutoff {
        Cutoff::HardCore { .. } => "r_min",
        Cutoff::Exponential { .. } => "lambda",
    };
    writer
        .write_record([
            "a",
            "eps_minus_1",
            cutoff_name,
            "total",
            "total_error",
            "c_vol",
            "c_surf",
            "c_lin",
            "finite_1_over_a",
            "residual",
            "finite_fitted",
            "finite_theory",
        ])
        .map_err(io)?;
    let opt = |v: f64| if v.is_nan() { None } else { Some(v * scale) };
    for row in &rows {
        writer
            .write_record([
                csv_number(Some(row.a)),
                csv_number(Some(row.eps)),
                csv_number(Some(row.cutoff)),
                csv_number(Some(row.b.total * scale)),
                csv_number(Some(row.b.total_error * scale)),
                csv_number(opt(row.b.c_vol)),
                csv_number(opt(row.b.c_surf)),
                csv_number(opt(row.b.c_lin)),
                csv_number(opt(row.b.finite_1_over_a)),
                csv_number(if row.b.residual.is_nan() { None } else { Some(row.b.residual) }),
                csv_number(row.fitted.map(|f| f * scale)),
                csv_number(Some(row.theory * scale)),
            ])
            .map_err(io)?;
    }
    let csv = String::from_utf8(writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?)
        .expect("csv output is UTF-8");

    let summary = if want_summary {
        if !(swept_cutoff && axes.len() == 1) {
            return Err(usage("--summary needs a sweep over r_min or lambda alone"));
        }
        let aa = a.expect("validated");
        let medium = Medium::dilute(eps_minus_1.expect("validated"), (*alpha).max(f64::MIN_POSITIVE))?;
        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.cutoff, r.b.total)).collect();
        let fitted = match cutoff {
            Cutoff::HardCore { .. } => crate::sphere_energy::decompose_fit(&samples, aa)?,
            Cutoff::Exponential { .. } => crate::sphere_energy::decompose_exponential_fit(&samples, aa, basis)?,
        };
        let theory = finite_part_prediction(aa, &medium) * scale;
        let analytic = match cutoff {
            Cutoff::HardCore { .. } => scale_breakdown(&hardcore_coefficients(aa, &medium), scale),
            Cutoff::Exponential { .. } => Value::Null,
        };
        Some(record(
            inputs,
            json!({
                "fitted": scale_breakdown(&fitted, scale),
                "analytic": analytic,
                "prediction": { "finite_theory": theory },
                "finite_relative_difference": (fitted.finite_1_over_a * scale - theory).abs() / theory.abs(),
            }),
            json!({}),
        ))
    } else {
        None
    };
    Ok(Output::Table { csv, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
}

fn check(name: &str, measured: f64, expected: f64, rel_tol: f64) -> Check {
    let err = if expected == 0.0 {
        measured.abs()
    } else {
        (measured - expected).abs() / expected.abs()
    };
    Check {
        name: name.to_string(),
        passed: err <= rel_tol,
        measured,
        expected,
        tolerance: rel_tol,
    }
}

fn failed(name: &str, e: &Error) -> Check {
    Check {
        name: format!("{name} ({e})"),
        passed: false,
        measured: f64::NAN,
        expected: f64::NAN,
        tolerance: f64::NAN,
    }
}

fn kernel_grid() -> (Vec<f64>, Vec<f64>) {
    (
        crate::sphere_energy::log_grid(0.05, 5.0, 10),
        crate::sphere_energy::log_grid(0.2, 2.0, 10),
    )
}

/// One row of the kernel oracle table.
#[derive(Debug, Clone, Serialize)]
pub struct KernelOracleRow {
    pub kappa: f64,
    pub r: f64,
    pub psi_d_closed: f64,
    pub psi_d_oracle: f64,
    pub psi_delta_closed: f64,
    pub psi_delta_oracle: f64,
    pub max_relative_error: f64,
}

/// Closed-form r-space kernels against their numerical inverse transform on a
/// 10×10 grid with κr up to 10.
pub fn kernel_oracle_table() -> crate::Result<Vec<KernelOracleRow>> {
    let (kappas, rs) = kernel_grid();
    let pts: Vec<(f64, f64)> = kappas.iter().flat_map(|&k| rs.iter().map(move |&r| (k, r))).collect();
    pts.par_iter()
        .map(|&(k, r)| {
            let kap = ImagWavenumber::new(k)?;
            let closed = r_space_kernels(r, kap)?;
            let d = oracle_inverse_transform(kap, r, KernelComponent::D, 1e-12)?;
            let dl = oracle_inverse_transform(kap, r, KernelComponent::Delta, 1e-12)?;
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs();
            Ok(KernelOracleRow {
                kappa: k,
                r,
                psi_d_closed: closed.psi_d,
                psi_d_oracle: d.value,
                psi_delta_closed: closed.psi_delta,
                psi_delta_oracle: dl.value,
                max_relative_error: rel(closed.psi_d, d.value).max(rel(closed.psi_delta, dl.value)),
            })
        })
        .collect()
}

fn run_verify(suite: Suite, table: Option<&Path>) -> Result<Vec<Check>, CliError> {
    let all = suite == Suite::All;
    let mut checks = Vec::new();
    let tol = Tolerance::new(0.0, 1e-11);
    if all || suite == Suite::Kernels || table.is_some() {
        match kernel_oracle_table() {
            Ok(rows) => {
                let worst = rows.iter().map(|r| r.max_relative_error).fold(0.0, f64::max);
                checks.push(check("kernel oracle, 10x10 grid, worst relative error", worst, 0.0, 1e-4));
                if let Some(p) = table {
                    let mut w = csv::Writer::from_path(p).map_err(|e| CliError::Io(e.to_string()))?;
                    for r in &rows {
                        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
                    }
                    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
            Err(e) => checks.push(failed("kernel oracle", &e)),
        }
    }
    if all || suite == Suite::Matsubara {
        for &y in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            let closed = oscillator_sum_closed(1.0, y).map_err(CliError::from)?;
            let c = y / (2.0 * PI);
            // direct sum up to |n| = N plus the midpoint estimate of the remainder
            let n_max = 1_000_000u64;
            let mut acc = crate::numerics::NeumaierSum::default();
            acc.add(1.0);
            for n in (1..=n_max).rev() {
                let nn = n as f64;
                acc.add(2.0 * c * c / (c * c + nn * nn));
            }
            let tail = 2.0 * c * (c / (n_max as f64 + 0.5)).atan();
            let brute = acc.value() + tail;
            checks.push(check(&format!("oscillator identity at beta*hbar*omega0 = {y}"), brute, closed, 1e-10));
        }
    }
    if all || suite == Suite::Pair {
        for &r in &[0.5, 1.0, 2.0, 5.0] {
            let exact = pair_energy_t0(r, 1.0).map_err(CliError::from)?.value;
            match pair_free_energy(r, &Medium::new(1.0, 0.0)?, &ThermalState::new(1e6 * r)?) {
                Ok(e) => checks.push(check(&format!("pair law at beta/r = 1e6, r = {r}"), e.value, exact, 1e-4)),
                Err(e) => checks.push(failed("pair law", &e)),
            }
            match pair_energy_t0_numeric(r, 1.0, tol) {
                Ok(e) => checks.push(check(&format!("T=0 kappa integral, r = {r}"), e.value, exact, 1e-8)),
                Err(e) => checks.push(failed("T=0 kappa integral", &e)),
            }
            let beta = 1e-3 * r;
            match pair_free_energy(r, &Medium::new(1.0, 0.0)?, &ThermalState::new(beta)?) {
                Ok(e) => checks.push(check(
                    &format!("classical limit at beta/r = 1e-3, r = {r}"),
                    e.value,
                    -3.0 / (beta * r.powi(6)),
                    1e-4,
                )),
                Err(e) => checks.push(failed("classical limit", &e)),
            }
        }
        match kspace_pair_energy_extrapolated(1.0, 1.0, &[0.1, 0.05, 0.025], Tolerance::new(0.0, 1e-9)) {
            Ok((e, _)) => checks.push(check(
                "k-space pair route extrapolated to lambda = 0",
                e.value,
                -23.0 / (4.0 * PI),
                1e-3,
            )),
            Err(e) => checks.push(failed("k-space pair route", &e)),
        }
    }
    if all || suite == Suite::Sphere {
        let m = Medium::dilute(0.1, 1.0)?;
        let theory = finite_part_prediction(1.0, &m);
        match hardcore_sweep(1.0, &m, &default_rmin_grid(1.0), Tolerance::new(0.0, 1e-15)) {
            Ok(sw) => {
                checks.push(check("hard-core fitted finite part", sw.fitted.finite_1_over_a, theory, 1e-2));
                checks.push(check("hard-core analytic finite part", sw.analytic.finite_1_over_a, theory, 1e-6));
                let c = 23.0 / (4.0 * PI) * m.alpha * m.alpha;
                let v = 4.0 * PI / 3.0;
                checks.push(check(
                    "hard-core volume coefficient",
                    sw.analytic.c_vol,
                    -PI / 2.0 * m.rho * m.rho * c * v,
                    1e-6,
                ));
            }
            Err(e) => checks.push(failed("hard-core sweep", &e)),
        }
        match exponential_sweep(1.0, &m, &default_lambda_grid(1.0), &ExponentialBasis::default(), Tolerance::new(0.0, 1e-14)) {
            Ok(sw) => checks.push(check("exponential-cutoff fitted finite part", sw.fitted.finite_1_over_a, theory, 5e-2)),
            Err(e) => checks.push(failed("exponential sweep", &e)),
        }
        let smeared = sphere_energy_exponential(1.0, &m, 0.3, Tolerance::new(0.0, 1e-12));
        let kspace = sphere_energy_kspace(1.0, &m, 0.3, Tolerance::new(0.0, 1e-5));
        match (smeared, kspace) {
            (Ok(r), Ok(k)) => checks.push(check("k-space sphere route at lambda = 0.3", k.value, r.value, 1e-2)),
            (Err(e), _) | (_, Err(e)) => checks.push(failed("sphere route equivalence", &e)),
        }
    }
    if all || suite == Suite::SelfEnergy {
        match self_energy(1.0, 0.1, 1.0, Tolerance::new(0.0, 1e-12)) {
            Ok(se) => {
                checks.push(check("self-energy numeric vs closed", se.numeric, se.closed, 1e-8));
                checks.push(check("self-energy closed form", se.closed, -0.3 / (2.0 * PI * PI), 1e-12));
            }
            Err(e) => checks.push(failed("self-energy", &e)),
        }
    }
    if all || suite == Suite::Dielectric {
        let m = Medium::new(1.0, 0.1 / (4.0 * PI))?;
        let d = epsilon_relation(&m)?;
        checks.push(check("Theta = -2 gives (eps-1)/eps = 4 pi rho alpha", (d.epsilon - 1.0) / d.epsilon, 0.1, 1e-12));
        let m = Medium::new(1.0, 0.3 / (4.0 * PI))?.with_theta(ThetaParameter(0.0));
        checks.push(check("Theta = 0 Clausius-Mossotti", epsilon_relation(&m)?.epsilon, 1.2 / 0.9, 1e-12));
        checks.push(check("rho alpha = 0 gives eps = 1", epsilon_relation(&Medium::new(1.0, 0.0)?)?.epsilon, 1.0, 0.0));
    }
    Ok(checks)
}
