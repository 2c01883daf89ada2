//! Argument parsing into a validated [`RunSpec`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gi_core::optimizer::{linear_grid, log_grid, Family};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Amplifier gain used when `--r2` is not given.
pub const DEFAULT_R2: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Qfi,
    Sensitivity,
    Sweep,
    Optimize,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ConfigArg {
    #[value(name = "pp")]
    #[serde(rename = "pp")]
    PassivePassive,
    #[value(name = "pa")]
    #[serde(rename = "pa")]
    PassiveActive,
    #[value(name = "ap")]
    #[serde(rename = "ap")]
    ActivePassive,
    #[value(name = "aa")]
    #[serde(rename = "aa")]
    ActiveActive,
    #[value(name = "qfi-passive")]
    #[serde(rename = "qfi-passive")]
    QfiPassive,
    #[value(name = "qfi-active")]
    #[serde(rename = "qfi-active")]
    QfiActive,
}

impl ConfigArg {
    pub fn family(self, r2: f64) -> Family {
        match self {
            ConfigArg::PassivePassive => Family::PassivePassive,
            ConfigArg::PassiveActive => Family::PassiveActive { r2 },
            ConfigArg::ActivePassive => Family::ActivePassive,
            ConfigArg::ActiveActive => Family::ActiveActive { r2 },
            ConfigArg::QfiPassive => Family::QfiPassive,
            ConfigArg::QfiActive => Family::QfiActive,
        }
    }

    pub fn is_qfi(self) -> bool {
        matches!(self, ConfigArg::QfiPassive | ConfigArg::QfiActive)
    }

    pub fn has_amplifier(self) -> bool {
        matches!(self, ConfigArg::PassiveActive | ConfigArg::ActiveActive)
    }

    /// Physical input parameters accepted by `qfi` in place of the fractions.
    pub fn physical_names(self) -> &'static [&'static str] {
        match self {
            ConfigArg::QfiPassive => &["alpha", "gamma", "xi", "r", "theta"],
            ConfigArg::QfiActive => &["alpha", "gamma", "r", "theta"],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    #[default]
    All,
    SeAct,
    Qfi,
    Williamson,
    Loss,
    Pp,
    Ap,
    Aa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Log,
    Linear,
}

/// `N_tot` values: a single number, or `lo:hi:count:scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub scale: Scale,
}

impl NGrid {
    pub fn single(n: f64) -> Self {
        Self {
            lo: n,
            hi: n,
            count: 1,
            scale: Scale::Linear,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log => log_grid(self.lo, self.hi, self.count),
            Scale::Linear => linear_grid(self.lo, self.hi, self.count),
        }
    }

    pub fn as_single(&self) -> Option<f64> {
        (self.count == 1).then_some(self.lo)
    }
}

impl FromStr for NGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |t: &str| -> Result<f64, String> {
            match t.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                _ => Err(format!("invalid N_tot `{t}` in `{s}`: expected a positive number")),
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [n] => Ok(NGrid::single(number(n)?)),
            [lo, hi, count, scale] => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                let count = count
                    .parse::<usize>()
                    .ok()
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| format!("invalid count `{count}` in `{s}`"))?;
                let scale = match *scale {
                    "log" => Scale::Log,
                    "linear" => Scale::Linear,
                    other => return Err(format!("invalid scale `{other}` in `{s}`: expected log or linear")),
                };
                if hi < lo {
                    return Err(format!("grid `{s}` has hi < lo"));
                }
                Ok(NGrid { lo, hi, count, scale })
            }
            _ => Err(format!("invalid grid `{s}`: expected N or lo:hi:count:log|linear")),
        }
    }
}

impl fmt::Display for NGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_single() {
            Some(n) => write!(f, "{n}"),
            None => {
                let scale = match self.scale {
                    Scale::Log => "log",
                    Scale::Linear => "linear",
                };
                write!(f, "{}:{}:{}:{scale}", self.lo, self.hi, self.count)
            }
        }
    }
}

/// Everything that determines a run's output. Thread count is excluded: results do not
/// depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: Command,
    pub config: Option<ConfigArg>,
    pub params: BTreeMap<String, f64>,
    pub eta: f64,
    pub ntot: Option<NGrid>,
    pub r2: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub grid_points: Option<usize>,
    pub working_point: bool,
    pub suite: Option<Suite>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(name = "gi", version, about = "Gaussian-state interferometry: QFI, sensitivity, sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Quantum Fisher information of one input state.
    #[command(allow_negative_numbers = true)]
    Qfi(RunArgs),
    /// Phase sensitivity of one configuration at one working point.
    #[command(allow_negative_numbers = true)]
    Sensitivity(RunArgs),
    /// Optimize at each N_tot of a grid.
    #[command(allow_negative_numbers = true)]
    Sweep(RunArgs),
    /// Optimize at a single N_tot.
    #[command(allow_negative_numbers = true)]
    Optimize(RunArgs),
    /// Check closed forms and exact identities against the numerical pipeline.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    config: ConfigArg,
    /// Detector efficiency in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// N_tot, or a grid lo:hi:count:log|linear.
    #[arg(long)]
    ntot: Option<NGrid>,
    /// Measurement amplifier gain (pa, aa).
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "beta-tot", alias = "beta_tot")]
    beta_tot: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long = "xi-phase", alias = "xi_phase")]
    xi_phase: Option<f64>,
    /// Start from the closed-form working point (phases fixed).
    #[arg(long)]
    working_point: bool,
    /// Grid-scan points per free dimension.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn assignments(&self) -> Vec<(&'static str, &'static str, Option<f64>)> {
        vec![
            ("alpha", "--alpha", self.alpha),
            ("gamma", "--gamma", self.gamma),
            ("xi", "--xi", self.xi),
            ("r", "--r", self.r),
            ("theta", "--theta", self.theta),
            ("delta", "--delta", self.delta),
            ("beta_tot", "--beta-tot", self.beta_tot),
            ("beta", "--beta", self.beta),
            ("phi", "--phi", self.phi),
            ("xi_phase", "--xi-phase", self.xi_phase),
        ]
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(format!("error: {msg}\n"))
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("GI_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(usage(format!("GI_THREADS=`{v}` is not a positive integer"))),
        },
    }
}

/// Parses and validates a full argument vector, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<RunSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            CliError::Info(e.render().to_string())
        }
        _ => CliError::Usage(e.render().to_string()),
    })?;
    let threads = threads_from_env()?;
    match cli.command {
        Sub::Verify(v) => Ok(RunSpec {
            command: Command::Verify,
            config: None,
            params: BTreeMap::new(),
            eta: 1.0,
            ntot: None,
            r2: None,
            format: Format::Csv,
            out: None,
            seed: v.seed,
            grid_points: None,
            working_point: false,
            suite: Some(v.suite),
            threads,
        }),
        Sub::Qfi(a) => build(Command::Qfi, a, threads),
        Sub::Sensitivity(a) => build(Command::Sensitivity, a, threads),
        Sub::Sweep(a) => build(Command::Sweep, a, threads),
        Sub::Optimize(a) => build(Command::Optimize, a, threads),
    }
}

fn build(command: Command, a: RunArgs, threads: Option<usize>) -> Result<RunSpec, CliError> {
    let config = a.config;
    let family_names = config.family(DEFAULT_R2).param_names();
    let physical = config.physical_names();
    let mut params = BTreeMap::new();
    for (name, flag, value) in a.assignments() {
        let Some(v) = value else { continue };
        if !family_names.contains(&name) && !physical.contains(&name) {
            return Err(usage(format!("`{flag}` is not a parameter of configuration `{}`", config_name(config))));
        }
        if !v.is_finite() {
            return Err(usage(format!("`{flag}` must be finite, got {v}")));
        }
        params.insert(name.to_string(), v);
    }
    if !(a.eta > 0.0 && a.eta <= 1.0) {
        return Err(usage(format!("`--eta {}` outside (0, 1]", a.eta)));
    }
    match a.r2 {
        Some(_) if !config.has_amplifier() => {
            return Err(usage(format!("`--r2` does not apply to configuration `{}`", config_name(config))))
        }
        Some(r2) if !(r2 >= 0.0 && r2.is_finite()) => return Err(usage(format!("`--r2 {r2}` must be >= 0"))),
        _ => {}
    }
    if a.grid_points == Some(0) {
        return Err(usage("`--grid-points` must be at least 1".into()));
    }
    let uses_physical = params.keys().any(|k| physical.contains(&k.as_str()) && !family_names.contains(&k.as_str()));
    match command {
        Command::Qfi => {
            if !config.is_qfi() {
                return Err(usage(format!("`qfi` needs --config qfi-passive or qfi-active, got `{}`", config_name(config))));
            }
            if uses_physical {
                if let Some(missing) = physical.iter().find(|n| !params.contains_key(**n)) {
                    return Err(usage(format!("`qfi` with physical parameters needs `--{}`", missing.replace('_', "-"))));
                }
                if let Some(extra) = params.keys().find(|k| !physical.contains(&k.as_str())) {
                    return Err(usage(format!("`--{}` cannot be combined with physical parameters", extra.replace('_', "-"))));
                }
                if a.ntot.is_some() {
                    return Err(usage("`--ntot` cannot be combined with physical parameters".into()));
                }
            } else {
                require_single(&a.ntot, "qfi")?;
                require_all(&params, family_names, "qfi")?;
            }
        }
        Command::Sensitivity => {
            if config.is_qfi() {
                return Err(usage(format!("`sensitivity` needs a detection configuration, got `{}`", config_name(config))));
            }
            require_single(&a.ntot, "sensitivity")?;
            require_all(&params, family_names, "sensitivity")?;
        }
        Command::Optimize | Command::Sweep => {
            if uses_physical {
                let name = params.keys().find(|k| !family_names.contains(&k.as_str())).cloned().unwrap_or_default();
                return Err(usage(format!("`--{}` is not an optimization parameter", name.replace('_', "-"))));
            }
            match (command, &a.ntot) {
                (_, None) => return Err(usage("missing `--ntot`".into())),
                (Command::Optimize, Some(g)) if g.as_single().is_none() => {
                    return Err(usage(format!("`optimize` takes a single N_tot, got `{g}`")))
                }
                _ => {}
            }
        }
        Command::Verify => unreachable!("handled by the caller"),
    }
    Ok(RunSpec {
        command,
        config: Some(config),
        params,
        eta: a.eta,
        ntot: a.ntot,
        r2: config.has_amplifier().then(|| a.r2.unwrap_or(DEFAULT_R2)),
        format: a.format,
        out: a.out,
        seed: a.seed,
        grid_points: a.grid_points,
        working_point: a.working_point,
        suite: None,
        threads,
    })
}

fn require_single(ntot: &Option<NGrid>, cmd: &str) -> Result<(), CliError> {
    match ntot {
        None => Err(usage(format!("`{cmd}` needs `--ntot`"))),
        Some(g) if g.as_single().is_none() => Err(usage(format!("`{cmd}` takes a single N_tot, got `{g}`"))),
        _ => Ok(()),
    }
}

fn require_all(params: &BTreeMap<String, f64>, names: &[&str], cmd: &str) -> Result<(), CliError> {
    match names.iter().find(|n| !params.contains_key(**n)) {
        Some(n) => Err(usage(format!("`{cmd}` needs `--{}`", n.replace('_', "-")))),
        None => Ok(()),
    }
}

pub fn config_name(c: ConfigArg) -> &'static str {
    c.family(DEFAULT_R2).label()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunSpec, CliError> {
        parse_args(std::iter::once("gi").chain(s.split_whitespace()))
    }

    #[test]
    fn grid_syntax() {
        let g: NGrid = "0.1:100:40:log".parse().unwrap();
        assert_eq!((g.lo, g.hi, g.count, g.scale), (0.1, 100.0, 40, Scale::Log));
        assert_eq!(g.values().len(), 40);
        assert_eq!("5".parse::<NGrid>().unwrap().as_single(), Some(5.0));
        assert_eq!(g.to_string().parse::<NGrid>().unwrap(), g);
        for bad in ["0:1:3:log", "1:2:0:log", "1:2:3:cubic", "2:1:3:log", "1:2:3", "x"] {
            assert!(bad.parse::<NGrid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_example() {
        let s = parse("sweep --config pp --eta 1.0 --ntot 0.1:100:40:log --out pp.csv").unwrap();
        assert_eq!(s.command, Command::Sweep);
        assert_eq!(s.config, Some(ConfigArg::PassivePassive));
        assert_eq!(s.ntot.unwrap().count, 40);
        assert_eq!(s.out, Some(PathBuf::from("pp.csv")));
    }

    #[test]
    fn physical_qfi_example() {
        let s = parse("qfi --config qfi-passive --alpha 1 --gamma 1 --xi 0.3 --r 0.3 --theta 0").unwrap();
        assert_eq!(s.params.len(), 5);
        assert_eq!(s.params["xi"], 0.3);
    }

    #[test]
    fn negative_values_are_numbers() {
        let s = parse("sensitivity --config ap --ntot 10 --delta 0.5 --beta 0.1 --theta -3.1 --phi 1.5").unwrap();
        assert_eq!(s.params["theta"], -3.1);
    }

    fn usage_text(r: Result<RunSpec, CliError>) -> String {
        match r {
            Err(CliError::Usage(m)) => m,
            other => panic!("expected a usage error, got {other:?}"),
        }
    }

    #[test]
    fn offending_tokens_are_named() {
        assert!(usage_text(parse("sweep --config pp --foo 1 --ntot 1:2:3:log")).contains("--foo"));
        assert!(usage_text(parse("sensitivity --config aa --xi 0.3 --ntot 1")).contains("--xi"));
        assert!(usage_text(parse("sweep --config pp --ntot 1:2:3:cubic")).contains("cubic"));
        assert!(usage_text(parse("sweep --config pp --r2 3 --ntot 1")).contains("--r2"));
        assert!(usage_text(parse("sweep --config zz --ntot 1")).contains("zz"));
        assert!(usage_text(parse("sensitivity --config pp --ntot 1 --delta 0")).contains("--beta-tot"));
        assert!(usage_text(parse("optimize --config pp --ntot 1:2:3:log")).contains("1:2:3:log"));
    }

    #[test]
    fn amplifier_gain_defaults() {
        assert_eq!(parse("sweep --config aa --ntot 1:10:3:log").unwrap().r2, Some(DEFAULT_R2));
        assert_eq!(parse("sweep --config ap --ntot 1:10:3:log").unwrap().r2, None);
    }

    #[test]
    fn help_is_not_an_error() {
        assert!(matches!(parse("--help"), Err(CliError::Info(_))));
    }
}
