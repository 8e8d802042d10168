//! Command-line front end.
//!
//! Every invocation is reduced to a [`RunConfig`] (flags layered over an
//! optional `--config` file, then `DAMPEDQ_SEED`), validated into a typed
//! [`Request`], and executed into a single artifact. Exit codes: 0 on
//! success, 1 on usage errors, 2 on domain errors with
//! `{"error": <variant>, "message": ...}` on standard error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::checks::{run_checks, ChecksConfig};
use crate::classical::{analytic_velocity, integrate_doubled, PhaseState};
use crate::error::Error;
use crate::ode::IntegratorOptions;
use crate::params::exact::{
    chiral_to_physical_exact, physical_to_chiral_exact, RationalChiral, RationalDho,
};
use crate::params::{
    chiral_to_physical, classify, frequencies, physical_to_chiral, ChiralParams, DhoParams,
};
use crate::pseudoq::{oscillator_spectrum, write_spectrum_csv, DEFAULT_DIM};
use crate::scalar::parse_rational;
use crate::solder::{
    chiral_lagrangian, chiral_lagrangian_exact, solder_auxiliary, solder_direct, Chirality,
    SolderReport,
};
use crate::wire::pair;

/// Seed used by `checks` when neither the config, `--seed` nor
/// `DAMPEDQ_SEED` provides one.
pub const DEFAULT_SEED: u64 = 0;
/// Largest truncation dimension accepted on the command line.
pub const MAX_CLI_DIM: usize = 512;
/// Largest number of output samples for `simulate`.
pub const MAX_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Classify,
    Map,
    Simulate,
    Solder,
    Diagonalize,
    Spectrum,
    Checks,
}

impl CommandKind {
    fn name(self) -> &'static str {
        match self {
            CommandKind::Classify => "classify",
            CommandKind::Map => "map",
            CommandKind::Simulate => "simulate",
            CommandKind::Solder => "solder",
            CommandKind::Diagonalize => "diagonalize",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Checks => "checks",
        }
    }

    fn default_format(self) -> Format {
        match self {
            CommandKind::Simulate | CommandKind::Spectrum => Format::Csv,
            _ => Format::Json,
        }
    }

    fn supports(self, f: Format) -> bool {
        f == Format::Json || matches!(self, CommandKind::Simulate | CommandKind::Spectrum)
    }
}

/// Serializable description of one run. Parameter values are JSON numbers
/// or strings; strings may be fractions such as `"1/3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            params: BTreeMap::new(),
            output_path: None,
            format: None,
            seed: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Usage(format!("invalid run config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.command.default_format())
    }

    fn text(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.params.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(v) => Err(CliError::Usage(format!(
                "parameter {key} must be a number or string, got {v}"
            ))),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.text(key)?
            .map(|s| {
                parse_number(&s).filter(|x| x.is_finite()).ok_or_else(|| {
                    CliError::Usage(format!("parameter {key}: '{s}' is not a finite number"))
                })
            })
            .transpose()
    }

    fn rational(&self, key: &str) -> Result<Option<BigRational>, CliError> {
        self.text(key)?
            .map(|s| {
                parse_rational(&s).ok_or_else(|| {
                    CliError::Usage(format!("parameter {key}: '{s}' is not rational"))
                })
            })
            .transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.text(key)?
            .map(|s| {
                s.trim().parse::<usize>().map_err(|_| {
                    CliError::Usage(format!(
                        "parameter {key}: '{s}' is not a non-negative integer"
                    ))
                })
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.params.get(key) {
            None | Some(Value::Null) => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(v) => Err(CliError::Usage(format!(
                "parameter {key} must be a boolean, got {v}"
            ))),
        }
    }

    fn require<T>(&self, key: &str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| {
            CliError::Usage(format!(
                "{} requires --{}",
                self.command.name(),
                key.replace('_', "-")
            ))
        })
    }

    fn physical_keys(&self) -> bool {
        ["m", "gamma", "k"]
            .iter()
            .any(|k| self.params.contains_key(*k))
    }

    fn chiral_keys(&self) -> bool {
        ["Gamma", "k_plus", "k_minus"]
            .iter()
            .any(|k| self.params.contains_key(*k))
    }

    fn physical(&self) -> Result<DhoParams, CliError> {
        let m = self.require("m", self.real("m")?)?;
        let gamma = self.require("gamma", self.real("gamma")?)?;
        let k = self.require("k", self.real("k")?)?;
        Ok(DhoParams::new(m, gamma, k)?)
    }

    fn physical_exact(&self) -> Result<RationalDho, CliError> {
        let m = self.require("m", self.rational("m")?)?;
        let gamma = self.require("gamma", self.rational("gamma")?)?;
        let k = self.require("k", self.rational("k")?)?;
        Ok(RationalDho::new(m, gamma, k)?)
    }

    fn chiral_exact(&self) -> Result<RationalChiral, CliError> {
        Ok(RationalChiral {
            gamma: self.require("Gamma", self.rational("Gamma")?)?,
            k_plus: self.require("k_plus", self.rational("k_plus")?)?,
            k_minus: self.require("k_minus", self.rational("k_minus")?)?,
        })
    }

    fn chiral(&self) -> Result<ChiralParams, CliError> {
        let gamma = self.require("Gamma", self.real("Gamma")?)?;
        let kp = self.require("k_plus", self.real("k_plus")?)?;
        let km = self.require("k_minus", self.real("k_minus")?)?;
        Ok(ChiralParams::real(gamma, kp, km)?)
    }

    fn dim(&self) -> Result<usize, CliError> {
        let d = self.count("dim")?.unwrap_or(DEFAULT_DIM);
        if !(4..=MAX_CLI_DIM).contains(&d) {
            return Err(CliError::Usage(format!(
                "--dim must lie in 4..={MAX_CLI_DIM}, got {d}"
            )));
        }
        Ok(d)
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!(
                "{} does not accept parameter {k}",
                self.command.name()
            ))),
            None => Ok(()),
        }
    }

    /// Checks required keys and value domains without running anything.
    pub fn validate(&self) -> Result<Request, CliError> {
        let fmt = self.format();
        if !self.command.supports(fmt) {
            return Err(CliError::Usage(format!(
                "{} only writes json",
                self.command.name()
            )));
        }
        let physical = ["m", "gamma", "k"];
        let chiral = ["Gamma", "k_plus", "k_minus"];
        let req = match self.command {
            CommandKind::Classify => {
                self.reject_unknown(&physical)?;
                Request::Classify(self.physical()?)
            }
            CommandKind::Map => {
                self.reject_unknown(&["m", "gamma", "k", "Gamma", "k_plus", "k_minus", "exact"])?;
                let exact = self.flag("exact")?;
                match (self.physical_keys(), self.chiral_keys()) {
                    (true, true) => {
                        return Err(CliError::Usage(
                            "map takes either physical or chiral parameters".into(),
                        ))
                    }
                    (false, false) => {
                        return Err(CliError::Usage(
                            "map requires --m/--gamma/--k or --Gamma/--k-plus/--k-minus".into(),
                        ))
                    }
                    (true, false) if exact => Request::MapToChiralExact(self.physical_exact()?),
                    (true, false) => Request::MapToChiral(self.physical()?),
                    (false, true) if exact => Request::MapToPhysicalExact(self.chiral_exact()?),
                    (false, true) => Request::MapToPhysical(self.chiral()?),
                }
            }
            CommandKind::Simulate => {
                self.reject_unknown(&[
                    "m",
                    "gamma",
                    "k",
                    "x0",
                    "y0",
                    "vx0",
                    "vy0",
                    "t_end",
                    "dt",
                    "step",
                    "tolerance",
                ])?;
                let p = self.physical()?;
                let t_end = self.real("t_end")?.unwrap_or(10.0);
                let dt = self.real("dt")?.unwrap_or(0.01);
                if !(t_end > 0.0 && dt > 0.0) {
                    return Err(CliError::Usage("--t-end and --dt must be positive".into()));
                }
                let steps = (t_end / dt).round();
                if !(1.0..=MAX_SAMPLES as f64).contains(&steps) {
                    return Err(CliError::Usage(format!(
                        "t_end / dt must lie in 1..={MAX_SAMPLES}"
                    )));
                }
                let defaults = IntegratorOptions::default();
                let opts = IntegratorOptions {
                    step: self.real("step")?.unwrap_or(defaults.step),
                    tolerance: self.real("tolerance")?.unwrap_or(defaults.tolerance),
                };
                opts.validate()?;
                let velocity = match (self.real("vx0")?, self.real("vy0")?) {
                    (Some(vx), Some(vy)) => Some((vx, vy)),
                    (None, None) => None,
                    _ => return Err(CliError::Usage("--vx0 and --vy0 go together".into())),
                };
                Request::Simulate {
                    params: p,
                    x0: self.real("x0")?.unwrap_or(1.0),
                    y0: self.real("y0")?.unwrap_or(1.0),
                    velocity,
                    t_end,
                    samples: steps as usize,
                    opts,
                }
            }
            CommandKind::Solder => {
                self.reject_unknown(&chiral)?;
                // decimal and fractional inputs are rational, so the exact route applies
                Request::Solder(self.chiral_exact()?)
            }
            CommandKind::Diagonalize | CommandKind::Spectrum => {
                self.reject_unknown(&["m", "gamma", "k", "dim"])?;
                let p = self.physical()?;
                let dim = self.dim()?;
                if self.command == CommandKind::Spectrum {
                    Request::Spectrum { params: p, dim }
                } else {
                    Request::Diagonalize { params: p, dim }
                }
            }
            CommandKind::Checks => {
                self.reject_unknown(&["dim", "algebraic_draws", "integration_draws"])?;
                let base = ChecksConfig::default();
                Request::Checks(ChecksConfig {
                    seed: self.seed.unwrap_or(DEFAULT_SEED),
                    algebraic_draws: self
                        .count("algebraic_draws")?
                        .unwrap_or(base.algebraic_draws),
                    integration_draws: self
                        .count("integration_draws")?
                        .unwrap_or(base.integration_draws),
                    dim: self.dim()?,
                })
            }
        };
        Ok(req)
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    s.parse::<f64>().ok().or_else(|| {
        let q = parse_rational(s)?;
        num_traits::ToPrimitive::to_f64(&q)
    })
}

/// A validated run.
#[derive(Debug, Clone)]
pub enum Request {
    Classify(DhoParams),
    MapToChiral(DhoParams),
    MapToChiralExact(RationalDho),
    MapToPhysical(ChiralParams),
    MapToPhysicalExact(RationalChiral),
    Simulate {
        params: DhoParams,
        x0: f64,
        y0: f64,
        velocity: Option<(f64, f64)>,
        t_end: f64,
        samples: usize,
        opts: IntegratorOptions,
    },
    Solder(RationalChiral),
    Diagonalize {
        params: DhoParams,
        dim: usize,
    },
    Spectrum {
        params: DhoParams,
        dim: usize,
    },
    Checks(ChecksConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
        }
    }

    /// Machine-readable form written to standard error for domain errors.
    pub fn to_json(&self) -> String {
        let name = match self {
            CliError::Usage(_) => "Usage",
            CliError::Domain(e) => e.name(),
        };
        json!({"error": name, "message": self.to_string()}).to_string()
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "dampedq",
    version,
    about = "Damped oscillator quantization through doubled degrees of freedom"
)]
pub struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized suites (default 0, overridden by DAMPEDQ_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug, Default)]
pub struct PhysicalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct ChiralArgs {
    #[arg(long = "Gamma", allow_hyphen_values = true)]
    pub big_gamma: Option<String>,
    #[arg(long = "k-plus", allow_hyphen_values = true)]
    pub k_plus: Option<String>,
    #[arg(long = "k-minus", allow_hyphen_values = true)]
    pub k_minus: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Damping regime, R and the complex frequencies.
    Classify(PhysicalArgs),
    /// Physical ↔ chiral parameter maps.
    Map {
        #[command(flatten)]
        physical: PhysicalArgs,
        #[command(flatten)]
        chiral: ChiralArgs,
        /// Rational arithmetic; inputs may be fractions such as 1/3.
        #[arg(long)]
        exact: bool,
    },
    /// Integrates the doubled system and writes the trajectory.
    Simulate {
        #[command(flatten)]
        physical: PhysicalArgs,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y0: Option<String>,
        /// Initial velocities; the closed-form ones are used when absent.
        #[arg(long, allow_hyphen_values = true)]
        vx0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        vy0: Option<String>,
        #[arg(long = "t-end")]
        t_end: Option<String>,
        /// Output sampling interval.
        #[arg(long)]
        dt: Option<String>,
        /// RK4 step.
        #[arg(long)]
        step: Option<String>,
        #[arg(long)]
        tolerance: Option<String>,
    },
    /// Solders the chiral doublet by both routes, in exact arithmetic.
    Solder(ChiralArgs),
    /// Biorthogonal eigensystem of the truncated Fock-space Hamiltonian.
    Diagonalize {
        #[command(flatten)]
        physical: PhysicalArgs,
        #[arg(long)]
        dim: Option<String>,
    },
    /// Lowest D/4 levels as CSV rows.
    Spectrum {
        #[command(flatten)]
        physical: PhysicalArgs,
        #[arg(long)]
        dim: Option<String>,
    },
    /// Runs the randomized invariant suites and writes a JSON report.
    Checks {
        #[arg(long)]
        dim: Option<String>,
        #[arg(long = "algebraic-draws")]
        algebraic_draws: Option<String>,
        #[arg(long = "integration-draws")]
        integration_draws: Option<String>,
    },
}

fn put(params: &mut BTreeMap<String, Value>, key: &str, v: Option<String>) {
    if let Some(v) = v {
        params.insert(key.to_string(), Value::String(v));
    }
}

fn put_physical(params: &mut BTreeMap<String, Value>, a: PhysicalArgs) {
    put(params, "m", a.m);
    put(params, "gamma", a.gamma);
    put(params, "k", a.k);
}

fn put_chiral(params: &mut BTreeMap<String, Value>, a: ChiralArgs) {
    put(params, "Gamma", a.big_gamma);
    put(params, "k_plus", a.k_plus);
    put(params, "k_minus", a.k_minus);
}

impl Command {
    fn kind_and_params(self) -> (CommandKind, BTreeMap<String, Value>) {
        let mut p = BTreeMap::new();
        let kind = match self {
            Command::Classify(a) => {
                put_physical(&mut p, a);
                CommandKind::Classify
            }
            Command::Map {
                physical,
                chiral,
                exact,
            } => {
                put_physical(&mut p, physical);
                put_chiral(&mut p, chiral);
                if exact {
                    p.insert("exact".into(), Value::Bool(true));
                }
                CommandKind::Map
            }
            Command::Simulate {
                physical,
                x0,
                y0,
                vx0,
                vy0,
                t_end,
                dt,
                step,
                tolerance,
            } => {
                put_physical(&mut p, physical);
                for (k, v) in [
                    ("x0", x0),
                    ("y0", y0),
                    ("vx0", vx0),
                    ("vy0", vy0),
                    ("t_end", t_end),
                    ("dt", dt),
                    ("step", step),
                    ("tolerance", tolerance),
                ] {
                    put(&mut p, k, v);
                }
                CommandKind::Simulate
            }
            Command::Solder(a) => {
                put_chiral(&mut p, a);
                CommandKind::Solder
            }
            Command::Diagonalize { physical, dim } => {
                put_physical(&mut p, physical);
                put(&mut p, "dim", dim);
                CommandKind::Diagonalize
            }
            Command::Spectrum { physical, dim } => {
                put_physical(&mut p, physical);
                put(&mut p, "dim", dim);
                CommandKind::Spectrum
            }
            Command::Checks {
                dim,
                algebraic_draws,
                integration_draws,
            } => {
                put(&mut p, "dim", dim);
                put(&mut p, "algebraic_draws", algebraic_draws);
                put(&mut p, "integration_draws", integration_draws);
                CommandKind::Checks
            }
        };
        (kind, p)
    }
}

/// Builds the effective configuration. `config_text` is the content of the
/// `--config` file, if any; `env_seed` is the value of `DAMPEDQ_SEED`.
pub fn merge_config(
    cli: Cli,
    config_text: Option<&str>,
    env_seed: Option<&str>,
) -> Result<RunConfig, CliError> {
    let base = config_text.map(RunConfig::from_json).transpose()?;
    let mut cfg = match (base, cli.command) {
        (None, None) => {
            return Err(CliError::Usage(
                "a subcommand or --config is required".into(),
            ))
        }
        (Some(base), None) => base,
        (base, Some(cmd)) => {
            let (kind, params) = cmd.kind_and_params();
            let mut cfg = match base {
                Some(b) if b.command == kind => b,
                Some(b) => {
                    return Err(CliError::Usage(format!(
                        "subcommand {} conflicts with config command {}",
                        kind.name(),
                        b.command.name()
                    )))
                }
                None => RunConfig::new(kind),
            };
            cfg.params.extend(params);
            cfg
        }
    };
    if cli.output.is_some() {
        cfg.output_path = cli.output;
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(s) = env_seed {
        let seed = s.trim().parse::<u64>().map_err(|_| {
            CliError::Usage(format!("DAMPEDQ_SEED: '{s}' is not an unsigned integer"))
        })?;
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

/// Parses arguments into a configuration, reading `--config` from disk.
pub fn parse_args<I, T>(args: I, env_seed: Option<&str>) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    let text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            ParseOutcome::Error(CliError::Usage(format!(
                "cannot read {}: {e}",
                path.display()
            )))
        })?),
        None => None,
    };
    merge_config(cli, text.as_deref(), env_seed).map_err(ParseOutcome::Error)
}

#[derive(Debug)]
pub enum ParseOutcome {
    /// Help, version or a malformed command line, as rendered by clap.
    Clap(clap::Error),
    Error(CliError),
}

fn complex(c: Complex64) -> Value {
    json!(pair(c))
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s.into_bytes()
}

fn classify_json(p: &DhoParams) -> Value {
    let r = classify(p);
    let (omega, plus, minus) = match frequencies(p) {
        Ok(f) => (
            json!(f.omega),
            complex(f.omega_plus),
            complex(f.omega_minus),
        ),
        Err(_) => (Value::Null, Value::Null, Value::Null),
    };
    json!({
        "R": finite_or_null(r.ratio),
        "kind": r.kind,
        "Omega": omega,
        "omega_plus": plus,
        "omega_minus": minus,
    })
}

fn solder_json(c: &RationalChiral) -> Result<Value, CliError> {
    let lp = chiral_lagrangian_exact(Chirality::Plus, c);
    let lm = chiral_lagrangian_exact(Chirality::Minus, c);
    let aux = solder_auxiliary(&lp, &lm)?;
    let direct = solder_direct(&lp, &lm)?;
    let agree = aux.residual == direct.residual;
    let id = &aux.identified;
    let physical = RationalDho::new(id.m.clone(), id.gamma.clone(), id.k.clone())?;
    let approx = physical.to_f64()?;
    // the floating-point doublet must land on the same oscillator
    let cf = ChiralParams::real(
        num_traits::ToPrimitive::to_f64(&c.gamma).unwrap_or(f64::NAN),
        num_traits::ToPrimitive::to_f64(&c.k_plus).unwrap_or(f64::NAN),
        num_traits::ToPrimitive::to_f64(&c.k_minus).unwrap_or(f64::NAN),
    )?;
    let float: SolderReport = solder_auxiliary(
        &chiral_lagrangian(Chirality::Plus, &cf),
        &chiral_lagrangian(Chirality::Minus, &cf),
    )?;
    let deviation = aux
        .max_coefficient_deviation
        .max(direct.max_coefficient_deviation);
    Ok(json!({
        "identified": {"m": approx.m(), "gamma": approx.gamma(), "k": approx.k()},
        "identified_exact": {"m": id.m.to_string(), "gamma": id.gamma.to_string(), "k": id.k.to_string()},
        "deviation": deviation,
        "routes_agree": agree,
        "float_deviation": float.max_coefficient_deviation,
        "kind": physical.regime(),
    }))
}

fn rational_json(q: &BigRational) -> Value {
    Value::String(q.to_string())
}

/// Runs a validated request and returns the artifact bytes.
pub fn execute(req: &Request, format: Format) -> Result<Vec<u8>, CliError> {
    match req {
        Request::Classify(p) => Ok(pretty(&classify_json(p))),
        Request::MapToChiral(p) => {
            let c = physical_to_chiral(p)?;
            Ok(pretty(&json!({
                "Gamma": complex(c.gamma),
                "k_plus": complex(c.k_plus),
                "k_minus": complex(c.k_minus),
                "regime": c.regime,
            })))
        }
        Request::MapToChiralExact(p) => {
            let c = physical_to_chiral_exact(p)?;
            Ok(pretty(&json!({
                "Gamma": rational_json(&c.gamma),
                "k_plus": rational_json(&c.k_plus),
                "k_minus": rational_json(&c.k_minus),
            })))
        }
        Request::MapToPhysical(c) => {
            let p = chiral_to_physical(c)?;
            let mut v = json!({"m": p.m(), "gamma": p.gamma(), "k": p.k()});
            v["regime"] = classify_json(&p);
            Ok(pretty(&v))
        }
        Request::MapToPhysicalExact(c) => {
            let p = chiral_to_physical_exact(c)?;
            Ok(pretty(&json!({
                "m": rational_json(&p.m),
                "gamma": rational_json(&p.gamma),
                "k": rational_json(&p.k),
                "kind": p.regime(),
            })))
        }
        Request::Simulate {
            params,
            x0,
            y0,
            velocity,
            t_end,
            samples,
            opts,
        } => {
            let (x0, y0) = (Complex64::from(*x0), Complex64::from(*y0));
            let (vx, vy) = match velocity {
                Some((vx, vy)) => (Complex64::from(*vx), Complex64::from(*vy)),
                None => (
                    analytic_velocity(params, x0, 0.0)?.0,
                    analytic_velocity(params, y0, 0.0)?.1,
                ),
            };
            let grid: Vec<f64> = (0..=*samples)
                .map(|i| t_end * i as f64 / *samples as f64)
                .collect();
            let traj = integrate_doubled(
                params,
                &PhaseState::from_physical(x0, y0, vx, vy),
                &grid,
                opts,
            )?;
            match format {
                Format::Csv => Ok(traj.to_csv().into_bytes()),
                Format::Json => {
                    let rows: Vec<Value> = traj
                        .times()
                        .iter()
                        .zip(traj.states())
                        .map(|(t, s)| {
                            let (x, y) = s.physical();
                            json!({"t": t, "x1": complex(s.x1), "x2": complex(s.x2), "x": complex(x), "y": complex(y)})
                        })
                        .collect();
                    Ok(pretty(&Value::Array(rows)))
                }
            }
        }
        Request::Solder(c) => Ok(pretty(&solder_json(c)?)),
        Request::Diagonalize { params, dim } => {
            let f = frequencies(params)?;
            let spec = oscillator_spectrum(f.omega_plus, *dim)?;
            let mut s = spec.levels.to_json();
            s.push('\n');
            Ok(s.into_bytes())
        }
        Request::Spectrum { params, dim } => {
            let f = frequencies(params)?;
            let spec = oscillator_spectrum(f.omega_plus, *dim)?;
            match format {
                Format::Csv => {
                    let mut out = Vec::new();
                    write_spectrum_csv(&spec.rows, &mut out)?;
                    Ok(out)
                }
                Format::Json => {
                    let rows: Vec<Value> = spec
                        .rows
                        .iter()
                        .map(|r| json!({"n": r.n, "eigenvalue": complex(r.eigenvalue), "biorth_residual": r.biorth_residual}))
                        .collect();
                    Ok(pretty(&Value::Array(rows)))
                }
            }
        }
        Request::Checks(cfg) => Ok(run_checks(cfg).to_json().into_bytes()),
    }
}

/// Validates, executes and writes the artifact.
pub fn run(config: &RunConfig) -> Result<Vec<u8>, CliError> {
    let req = config.validate()?;
    let bytes = execute(&req, config.format())?;
    if let Some(path) = &config.output_path {
        std::fs::write(path, &bytes)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(bytes)
}

fn checks_summary(bytes: &[u8]) -> Option<String> {
    let v: Value = serde_json::from_slice(bytes).ok()?;
    let mut out = String::new();
    for suite in v["suites"].as_array()? {
        for inv in suite["invariants"].as_array()? {
            let status = if inv["passed"].as_bool()? {
                "PASS"
            } else {
                "FAIL"
            };
            out.push_str(&format!(
                "{status} {}/{} max_residual={} tolerance={}\n",
                suite["name"].as_str()?,
                inv["name"].as_str()?,
                inv["max_residual"],
                inv["tolerance"]
            ));
        }
    }
    Some(out)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with<I, T>(
    args: I,
    env_seed: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(args, env_seed) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Clap(e)) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
        Err(ParseOutcome::Error(e)) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            return e.exit_code();
        }
    };
    match run(&cfg) {
        Ok(bytes) => {
            if cfg.command == CommandKind::Checks {
                if let Some(summary) = checks_summary(&bytes) {
                    let _ = stderr.write_all(summary.as_bytes());
                }
            }
            if cfg.output_path.is_none() && stdout.write_all(&bytes).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["dampedq"];
        full.extend_from_slice(args);
        let code = main_with(full, None, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn classify_anchor() {
        let (code, out, _) = run_args(&["classify", "--m", "0.5", "--gamma", "1", "--k", "1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["R"], json!(2.0));
        assert_eq!(v["kind"], json!("Underdamped"));
        assert_eq!(v["Omega"], json!(1.0));
        assert_eq!(v["omega_plus"], json!([1.0, 1.0]));
    }

    #[test]
    fn undamped_ratio_is_null() {
        let (code, out, _) = run_args(&["classify", "--m", "1", "--gamma", "0", "--k", "1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["R"].is_null());
    }

    #[test]
    fn solder_anchor_with_negative_flag_value() {
        let (code, out, _) =
            run_args(&["solder", "--Gamma", "1", "--k-plus", "-2", "--k-minus", "1"]);
        assert_eq!(code, 0, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["identified"], json!({"m": 1.0, "gamma": 3.0, "k": 2.0}));
        assert_eq!(v["deviation"], json!(0.0));
        assert_eq!(v["routes_agree"], json!(true));
    }

    #[test]
    fn exit_codes() {
        let (code, _, err) = run_args(&["classify", "--m", "0.5"]);
        assert_eq!(code, 1, "{err}");
        let (code, _, _) = run_args(&["frobnicate"]);
        assert_eq!(code, 1);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("classify"));

        let (code, _, err) =
            run_args(&["solder", "--Gamma", "1", "--k-plus", "1", "--k-minus", "-1"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], json!("DegenerateSum"));

        let (code, _, err) = run_args(&["spectrum", "--m", "1", "--gamma", "3", "--k", "1"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], json!("NotOscillatory"));
    }

    #[test]
    fn config_and_env_seed_precedence() {
        let text = r#"{"command": "checks", "params": {"dim": 16}, "seed": 5}"#;
        let cli = Cli::try_parse_from(["dampedq", "--seed", "6"]).unwrap();
        let cfg = merge_config(cli, Some(text), None).unwrap();
        assert_eq!(cfg.seed, Some(6));
        let cli = Cli::try_parse_from(["dampedq", "--seed", "6"]).unwrap();
        let cfg = merge_config(cli, Some(text), Some("9")).unwrap();
        assert_eq!(cfg.seed, Some(9));
        match cfg.validate().unwrap() {
            Request::Checks(c) => assert_eq!((c.seed, c.dim), (9, 16)),
            other => panic!("{other:?}"),
        }
        let cli = Cli::try_parse_from(["dampedq", "classify", "--m", "1"]).unwrap();
        assert!(merge_config(cli, Some(text), None).is_err());
    }

    #[test]
    fn config_round_trip_and_validation() {
        let mut cfg = RunConfig::new(CommandKind::Map);
        cfg.params.insert("Gamma".into(), json!("1/2"));
        cfg.params.insert("k_plus".into(), json!(-2));
        cfg.params.insert("k_minus".into(), json!(1));
        cfg.params.insert("exact".into(), json!(true));
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let out = String::from_utf8(run(&cfg).unwrap()).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["m"], json!("1/4"));
        assert_eq!(v["gamma"], json!("3/2"));

        cfg.format = Some(Format::Csv);
        assert!(matches!(cfg.validate(), Err(CliError::Usage(_))));
        let mut bad = RunConfig::new(CommandKind::Classify);
        bad.params.insert("mass".into(), json!(1));
        assert!(matches!(bad.validate(), Err(CliError::Usage(_))));
    }

    #[test]
    fn spectrum_csv_first_row() {
        let (code, out, _) = run_args(&[
            "spectrum", "--m", "0.5", "--gamma", "1", "--k", "1", "--dim", "32",
        ]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("n,re,im,biorth_residual"));
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(row[0], 0.0);
        assert!((row[1] - 0.5).abs() < 1e-9 && (row[2] - 0.5).abs() < 1e-9);
        assert_eq!(out.lines().count(), 1 + 8);
    }
}
