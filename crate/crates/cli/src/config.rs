//! Command-line and config-file parsing into a validated [`RunConfig`].
//!
//! Config files are flat `key=value` text (`#` starts a comment). Keys are the
//! long flag names; `_` and `-` are interchangeable. Flags override the file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chj_core::chernoff::{Dyadic, DEFAULT_LAMBDA_RESOLUTION};
use chj_core::hamiltonian::SampledTable;
use chj_core::kernel::DEFAULT_TRUNCATION;
use chj_core::{GridFunction64, GridSpec64, Hamiltonian64};
use clap::{Args, Parser, Subcommand};

use crate::CliError;

pub const DEFAULT_HALF_WIDTH: f64 = 10.0;
pub const DEFAULT_INTERVALS: usize = 2048;
pub const DEFAULT_CAUCHY_TOL: f64 = 1e-4;
pub const DEFAULT_LEVEL: u32 = 8;

#[derive(Debug, Parser)]
#[command(name = "chj", version, about = "Chernoff-iteration solver for viscous Hamilton-Jacobi equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Iterate to the finest level and write the solution field as CSV.
    Solve(RunArgs),
    /// Refine over levels until successive iterates agree; write the trace CSV.
    Convergence(RunArgs),
    /// Trace CSV with sup-errors against the Cole-Hopf solution (quadratic H).
    OracleCompare(RunArgs),
    /// Run the invariant suite on the configured instance.
    Properties(RunArgs),
    /// Luxemburg norms of the initial data.
    Norms(RunArgs),
    /// A-priori bound diagnostics along the trajectory.
    Report(RunArgs),
}

impl CommandArgs {
    fn split(self) -> (Command, RunArgs) {
        match self {
            CommandArgs::Solve(a) => (Command::Solve, a),
            CommandArgs::Convergence(a) => (Command::Convergence, a),
            CommandArgs::OracleCompare(a) => (Command::OracleCompare, a),
            CommandArgs::Properties(a) => (Command::Properties, a),
            CommandArgs::Norms(a) => (Command::Norms, a),
            CommandArgs::Report(a) => (Command::Report, a),
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// zero | quadratic:C | power:A:Q | sampled:PATH  [default: quadratic:1]
    #[arg(long = "H")]
    pub hamiltonian: Option<String>,
    /// gaussian-bump:SIGMA | log-bump | hat:W | indicator:A:B | file:PATH  [default: log-bump]
    #[arg(long = "f")]
    pub initial: Option<String>,
    /// Final time, dyadic k/2^n  [default: 1/2]
    #[arg(long)]
    pub t: Option<String>,
    /// Finest level (time step t/2^n granularity is 2^-n)  [default: 8]
    #[arg(long)]
    pub n: Option<u32>,
    /// Coarsest level of the refinement schedule
    #[arg(long)]
    pub n_min: Option<u32>,
    /// 1 or 2  [default: 1]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Box is [-W, W]^dim  [default: 10]
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Intervals per axis, a power of two  [default: 2048]
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Gaussian stencils are cut at this many standard deviations  [default: 8]
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Convergence threshold on successive sup-differences  [default: 1e-4]
    #[arg(long)]
    pub cauchy_tol: Option<f64>,
    /// Target spacing of the shift lattice  [default: 0.02]
    #[arg(long)]
    pub lambda_resolution: Option<f64>,
    /// Hard cap on |lambda|
    #[arg(long)]
    pub lambda_window: Option<f64>,
    /// Comma-separated R values for `norms`  [default: 1]
    #[arg(long = "R")]
    pub norm_r: Option<String>,
    /// Young parameter b  [default: 8K+1 from the growth constant of H]
    #[arg(long)]
    pub b: Option<f64>,
    /// Last sampled time for `report`, dyadic  [default: 1]
    #[arg(long)]
    pub horizon: Option<String>,
    /// Fill the runtime_ms column (output is then not reproducible)
    #[arg(long)]
    pub timing: bool,
    /// Run every level even after convergence
    #[arg(long)]
    pub all_levels: bool,
    /// Output path  [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    OracleCompare,
    Properties,
    Norms,
    Report,
}

/// Initial-data presets, evaluated on the configured grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// `exp(−|x|²/(2σ²))`.
    GaussianBump { sigma: f64 },
    /// `log(1 + exp(−|x|²/2))`.
    LogBump,
    /// `max(0, 1 − |x|/w)`.
    Hat { w: f64 },
    /// Indicator of `[a, b]` (of `[a, b]²` in 2D).
    Indicator { a: f64, b: f64 },
    /// A grid function CSV; its grid replaces the configured one.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub grid: GridSpec64,
    pub hamiltonian_spec: String,
    pub hamiltonian: Hamiltonian64,
    pub initial: Preset,
    pub t: Dyadic,
    pub n: u32,
    pub n_min: u32,
    pub truncation: f64,
    pub cauchy_tol: f64,
    pub lambda_resolution: f64,
    pub lambda_window: Option<f64>,
    pub norm_r: Vec<f64>,
    pub b: Option<f64>,
    pub horizon: Dyadic,
    pub timing: bool,
    pub all_levels: bool,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "H",
    "f",
    "t",
    "n",
    "n-min",
    "dim",
    "half-width",
    "intervals",
    "truncation",
    "cauchy-tol",
    "lambda-resolution",
    "lambda-window",
    "R",
    "b",
    "horizon",
    "timing",
    "all-levels",
    "out",
];

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Parses `key=value` lines, rejecting unknown and duplicate keys.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(invalid(format!("config line {}: unknown key `{}`", i + 1, k.trim())));
        }
        if map.insert(key, v.trim().to_string()).is_some() {
            return Err(invalid(format!("config line {}: duplicate key `{}`", i + 1, k.trim())));
        }
    }
    Ok(map)
}

struct Layer<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    /// Flag value if given, else the file value parsed, else `None`.
    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| invalid(format!("config key `{key}`: {e}"))))
            .transpose()
    }

    fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

/// Splits `name:a:b` or `name(a,b)` into the name and its arguments.
fn split_spec(s: &str) -> (String, Vec<String>) {
    let s = s.trim();
    if let Some((name, rest)) = s.split_once('(') {
        let args = rest.trim_end_matches(')').split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty());
        return (name.trim().to_string(), args.collect());
    }
    let mut parts = s.split(':');
    let name = parts.next().unwrap_or("").to_string();
    (name, parts.map(str::to_string).collect())
}

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| invalid(format!("{what}: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(format!("{what} must be finite")));
    }
    Ok(v)
}

fn arity(name: &str, args: &[String], n: usize) -> Result<(), CliError> {
    if args.len() != n {
        return Err(invalid(format!("`{name}` takes {n} parameter(s), got {}", args.len())));
    }
    Ok(())
}

pub fn parse_preset(s: &str) -> Result<Preset, CliError> {
    let (name, args) = split_spec(s);
    let positive = |v: f64, what: &str| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(format!("{what} must be positive")))
        }
    };
    match name.as_str() {
        "gaussian-bump" => {
            arity(&name, &args, 1)?;
            Ok(Preset::GaussianBump { sigma: positive(number(&args[0], "sigma")?, "sigma")? })
        }
        "log-bump" => {
            arity(&name, &args, 0)?;
            Ok(Preset::LogBump)
        }
        "hat" => {
            arity(&name, &args, 1)?;
            Ok(Preset::Hat { w: positive(number(&args[0], "hat width")?, "hat width")? })
        }
        "indicator" => {
            arity(&name, &args, 2)?;
            let (a, b) = (number(&args[0], "indicator a")?, number(&args[1], "indicator b")?);
            positive(b - a, "indicator width b - a")?;
            Ok(Preset::Indicator { a, b })
        }
        "file" => {
            // Paths may contain ':'; take everything after the prefix.
            let path = s.trim().strip_prefix("file:").unwrap_or("").trim();
            if path.is_empty() {
                return Err(invalid("`file` needs a path: file:PATH"));
            }
            Ok(Preset::File(PathBuf::from(path)))
        }
        other => Err(invalid(format!("unknown preset `{other}`"))),
    }
}

pub fn parse_hamiltonian(s: &str) -> Result<Hamiltonian64, CliError> {
    let (name, args) = split_spec(s);
    let h = match name.as_str() {
        "zero" => {
            arity(&name, &args, 0)?;
            Hamiltonian64::zero()
        }
        "quadratic" => {
            arity(&name, &args, 1)?;
            Hamiltonian64::quadratic(number(&args[0], "quadratic coefficient")?)?
        }
        "power" => {
            arity(&name, &args, 2)?;
            Hamiltonian64::power(number(&args[0], "power coefficient")?, number(&args[1], "power exponent")?)?
        }
        "sampled" => {
            let path = s.trim().strip_prefix("sampled:").unwrap_or("").trim();
            if path.is_empty() {
                return Err(invalid("`sampled` needs a path: sampled:PATH"));
            }
            let file = fs::File::open(path).map_err(|e| invalid(format!("{path}: {e}")))?;
            Hamiltonian64::sampled(SampledTable::read_csv(std::io::BufReader::new(file))?)?
        }
        other => return Err(invalid(format!("unknown hamiltonian `{other}`"))),
    };
    Ok(h)
}

fn parse_dyadic(s: &str) -> Result<Dyadic, CliError> {
    Ok(s.trim().parse::<Dyadic>()?)
}

fn parse_r_list(s: &str) -> Result<Vec<f64>, CliError> {
    let rs = s.split(',').map(|v| number(v, "R")).collect::<Result<Vec<_>, _>>()?;
    if rs.is_empty() || rs.iter().any(|&r| r < 1.0) {
        return Err(invalid("R values must be >= 1"));
    }
    Ok(rs)
}

/// Builds the validated configuration from parsed arguments.
pub fn parse_config(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, args) = cli.command.split();
    let file = match &args.config {
        Some(p) => parse_config_file(&read_text(p)?)?,
        None => BTreeMap::new(),
    };
    let l = Layer { file: &file };
    let hamiltonian_spec = l.pick(args.hamiltonian, "H")?.unwrap_or_else(|| "quadratic:1".into());
    let hamiltonian = parse_hamiltonian(&hamiltonian_spec)?;
    let initial = parse_preset(&l.pick(args.initial, "f")?.unwrap_or_else(|| "log-bump".into()))?;
    let t = parse_dyadic(&l.pick(args.t, "t")?.unwrap_or_else(|| "1/2".into()))?;
    let n = l.pick(args.n, "n")?.unwrap_or(DEFAULT_LEVEL);
    let default_min = match command {
        Command::Convergence | Command::OracleCompare => t.log2_den().max(1).min(n),
        _ => n,
    };
    let n_min = l.pick(args.n_min, "n-min")?.unwrap_or(default_min);
    if n_min > n {
        return Err(invalid(format!("n-min = {n_min} exceeds n = {n}")));
    }
    t.steps_at(n_min)?;
    let dim = l.pick(args.dim, "dim")?.unwrap_or(1);
    let half_width = l.pick(args.half_width, "half-width")?.unwrap_or(DEFAULT_HALF_WIDTH);
    let intervals = l.pick(args.intervals, "intervals")?.unwrap_or(DEFAULT_INTERVALS);
    let mut grid = GridSpec64::new(dim, half_width, intervals)?;
    if let Preset::File(p) = &initial {
        grid = *load_initial_file(p)?.spec();
    }
    if !hamiltonian.supports_dim(grid.dim()) {
        return Err(invalid(format!("hamiltonian `{hamiltonian_spec}` is one-dimensional only")));
    }
    let truncation = l.pick(args.truncation, "truncation")?.unwrap_or(DEFAULT_TRUNCATION);
    if !(truncation >= 6.0) {
        return Err(invalid("truncation must be at least 6 standard deviations"));
    }
    let cauchy_tol = l.pick(args.cauchy_tol, "cauchy-tol")?.unwrap_or(DEFAULT_CAUCHY_TOL);
    if !(cauchy_tol > 0.0) {
        return Err(invalid("cauchy-tol must be positive"));
    }
    let lambda_resolution = l.pick(args.lambda_resolution, "lambda-resolution")?.unwrap_or(DEFAULT_LAMBDA_RESOLUTION);
    if !(lambda_resolution > 0.0) {
        return Err(invalid("lambda-resolution must be positive"));
    }
    let lambda_window = l.pick(args.lambda_window, "lambda-window")?;
    if lambda_window.is_some_and(|w| !(w > 0.0)) {
        return Err(invalid("lambda-window must be positive"));
    }
    let norm_r = parse_r_list(&l.pick(args.norm_r, "R")?.unwrap_or_else(|| "1".into()))?;
    let b = l.pick(args.b, "b")?;
    if b.is_some_and(|b| !(b > 0.0)) {
        return Err(invalid("b must be positive"));
    }
    let horizon = parse_dyadic(&l.pick(args.horizon, "horizon")?.unwrap_or_else(|| "1".into()))?;
    if horizon.is_zero() {
        return Err(invalid("horizon must be positive"));
    }
    Ok(RunConfig {
        command,
        grid,
        hamiltonian_spec,
        hamiltonian,
        initial,
        t,
        n,
        n_min,
        truncation,
        cauchy_tol,
        lambda_resolution,
        lambda_window,
        norm_r,
        b,
        horizon,
        timing: l.switch(args.timing, "timing")?,
        all_levels: l.switch(args.all_levels, "all-levels")?,
        out: l.pick(args.out, "out")?,
    })
}

fn read_text(p: &Path) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))
}

fn load_initial_file(p: &Path) -> Result<GridFunction64, CliError> {
    let file = fs::File::open(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
    Ok(GridFunction64::read_csv(std::io::BufReader::new(file))?)
}

impl RunConfig {
    /// Samples the initial data on the grid.
    pub fn initial_data(&self) -> Result<GridFunction64, CliError> {
        let d = self.grid.dim();
        let r2 = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let f = match &self.initial {
            Preset::File(p) => return load_initial_file(p),
            Preset::GaussianBump { sigma } => {
                let s2 = 2.0 * sigma * sigma;
                GridFunction64::from_fn(self.grid, |x| (-r2(x) / s2).exp())
            }
            Preset::LogBump => GridFunction64::from_fn(self.grid, |x| (-r2(x) / 2.0).exp().ln_1p()),
            Preset::Hat { w } => GridFunction64::from_fn(self.grid, |x| (1.0 - r2(x).sqrt() / w).max(0.0)),
            Preset::Indicator { a, b } => GridFunction64::from_fn(self.grid, |x| {
                if x[..d].iter().all(|v| (*a..=*b).contains(v)) {
                    1.0
                } else {
                    0.0
                }
            }),
        };
        Ok(f?)
    }

    /// Coarse-to-fine levels `n_min..=n`.
    pub fn levels(&self) -> Vec<u32> {
        (self.n_min..=self.n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> Result<RunConfig, CliError> {
        let mut full = vec!["chj"];
        full.extend_from_slice(args);
        parse_config(Cli::try_parse_from(full).map_err(|e| invalid(e.to_string()))?)
    }

    #[test]
    fn happy_path() {
        let c = cfg(&["solve", "--H", "quadratic:1", "--f", "log-bump", "--t", "1/2", "--n", "8"]).unwrap();
        assert_eq!(c.command, Command::Solve);
        assert_eq!(c.t, Dyadic::new(1, 1));
        assert_eq!((c.n, c.n_min), (8, 8));
        assert_eq!(c.grid, GridSpec64::line(10.0, 2048).unwrap());
        assert_eq!(c.truncation, 8.0);
        assert_eq!(c.cauchy_tol, 1e-4);
        assert_eq!(cfg(&["convergence"]).unwrap().n_min, 1);
    }

    #[test]
    fn non_dyadic_time() {
        let e = cfg(&["solve", "--t", "0.3"]).unwrap_err();
        assert!(e.to_string().contains("t must be dyadic k/2^n"), "{e}");
    }

    #[test]
    fn presets() {
        assert_eq!(parse_preset("gaussian-bump:0.5").unwrap(), Preset::GaussianBump { sigma: 0.5 });
        assert_eq!(parse_preset("gaussian-bump(0.5)").unwrap(), Preset::GaussianBump { sigma: 0.5 });
        assert_eq!(parse_preset("indicator:-1:2").unwrap(), Preset::Indicator { a: -1.0, b: 2.0 });
        assert!(parse_preset("hat:-1").is_err());
        assert!(parse_preset("indicator:1:1").is_err());
        assert!(parse_preset("triangle").is_err());
        assert!(parse_hamiltonian("cubic:1").is_err());
        assert!(parse_hamiltonian("power:1:3").is_err());
    }

    #[test]
    fn config_file_and_precedence() {
        let dir = std::env::temp_dir().join(format!("chj-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.cfg");
        fs::write(&p, "# grid\nintervals = 4096\nhalf_width=8\nt=1/4\n").unwrap();
        let ps = p.to_str().unwrap();
        let c = cfg(&["solve", "--config", ps]).unwrap();
        assert_eq!(c.grid, GridSpec64::line(8.0, 4096).unwrap());
        assert_eq!(c.t, Dyadic::new(1, 2));
        let c = cfg(&["solve", "--config", ps, "--intervals", "512"]).unwrap();
        assert_eq!(c.grid.intervals(), 512);
        fs::write(&p, "intervals=4096\nspeed=3\n").unwrap();
        assert!(cfg(&["solve", "--config", ps]).unwrap_err().to_string().contains("unknown key"));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn preset_sampling() {
        let c = cfg(&["solve", "--f", "hat:2", "--intervals", "64"]).unwrap();
        let f = c.initial_data().unwrap();
        assert_eq!(f.get(c.grid.mid()), 1.0);
        assert_eq!(f.get(0), 0.0);
        let c = cfg(&["solve", "--dim", "2", "--intervals", "32", "--f", "indicator:0:1"]).unwrap();
        let f = c.initial_data().unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(f.integral() > 0.0);
    }
}
