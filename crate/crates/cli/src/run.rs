//! Dispatch of a validated [`RunConfig`] to the solver modules.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use chj_core::chernoff::{solve_with, Dyadic, DyadicSchedule, SolveOptions, SolverConfig};
use chj_core::dominating::{domination_check, DominatingParams};
use chj_core::hamiltonian::HamiltonianKind;
use chj_core::oracle::exact_solution_with;
use chj_core::orlicz::{norm_equivalence_check, quadrature_slack, YoungFunction};
use chj_core::regularity::apriori_bound_report;
use chj_core::scalar::fmt17;
use chj_core::{heat_step, GridFunction64};

use crate::config::{Command, RunConfig};
use crate::CliError;

/// How a successful run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Output was written but a checked property failed.
    Violation(String),
}

/// Runs the command, writing to `--out` or stdout.
pub fn run(cfg: &RunConfig) -> Result<Status, CliError> {
    match &cfg.out {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            let s = run_to(cfg, &mut w)?;
            w.flush()?;
            Ok(s)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            let s = run_to(cfg, &mut w)?;
            w.flush()?;
            Ok(s)
        }
    }
}

pub fn run_to<W: Write>(cfg: &RunConfig, w: &mut W) -> Result<Status, CliError> {
    let f = cfg.initial_data()?;
    let steps_at_n = !matches!(cfg.command, Command::Properties | Command::Norms);
    if let Some(msg) = resolution_warning(cfg, f.spec().spacing()).filter(|_| steps_at_n) {
        eprintln!("warning: {msg}");
    }
    match cfg.command {
        Command::Solve => solve_cmd(cfg, &f, w),
        Command::Convergence => convergence_cmd(cfg, &f, w),
        Command::OracleCompare => oracle_cmd(cfg, &f, w),
        Command::Properties => properties_cmd(cfg, &f, w),
        Command::Norms => norms_cmd(cfg, &f, w),
        Command::Report => report_cmd(cfg, &f, w),
    }
}

/// Below `√dt ≈ h` the lattice Gaussian loses its variance and further time
/// refinement stops converging.
pub fn resolution_warning(cfg: &RunConfig, spacing: f64) -> Option<String> {
    let dt = 0.5f64.powi(cfg.n as i32);
    (dt.sqrt() < spacing).then(|| {
        format!(
            "finest step 2^-{} resolves less than one grid cell (sqrt(dt) = {:.3e} < h = {spacing:.3e}); \
             refine the grid or lower --n",
            cfg.n,
            dt.sqrt()
        )
    })
}

fn solver_config(cfg: &RunConfig, t: Dyadic, levels: Vec<u32>) -> Result<SolverConfig<f64>, CliError> {
    let mut s = SolverConfig::new(cfg.grid, cfg.hamiltonian.clone(), DyadicSchedule::new(t, levels)?);
    s.truncation_multiple = cfg.truncation;
    s.cauchy_tol = cfg.cauchy_tol;
    s.lambda_resolution = cfg.lambda_resolution;
    s.lambda_window = cfg.lambda_window;
    Ok(s)
}

fn solve_cmd<W: Write>(cfg: &RunConfig, f: &GridFunction64, w: &mut W) -> Result<Status, CliError> {
    let sc = solver_config(cfg, cfg.t, cfg.levels())?;
    let opts = SolveOptions { reference: None, timing: cfg.timing, all_levels: cfg.all_levels };
    let (u, _) = solve_with(f, &sc, opts)?;
    u.write_csv(w)?;
    Ok(Status::Ok)
}

fn convergence_cmd<W: Write>(cfg: &RunConfig, f: &GridFunction64, w: &mut W) -> Result<Status, CliError> {
    let sc = solver_config(cfg, cfg.t, cfg.levels())?;
    let opts = SolveOptions { reference: None, timing: cfg.timing, all_levels: cfg.all_levels };
    let (_, trace) = solve_with(f, &sc, opts)?;
    trace.write_csv(w)?;
    Ok(Status::Ok)
}

/// Levels from which the error against the oracle must not grow.
const MONOTONE_FROM_LEVEL: u32 = 4;

fn oracle_cmd<W: Write>(cfg: &RunConfig, f: &GridFunction64, w: &mut W) -> Result<Status, CliError> {
    let HamiltonianKind::Quadratic { c } = *cfg.hamiltonian.kind() else {
        return Err(CliError::Invalid(format!(
            "oracle-compare needs a quadratic hamiltonian, got `{}`",
            cfg.hamiltonian_spec
        )));
    };
    let reference = exact_solution_with(f, cfg.t.value(), c, cfg.truncation)?;
    let sc = solver_config(cfg, cfg.t, cfg.levels())?;
    let opts = SolveOptions { reference: Some(&reference), timing: cfg.timing, all_levels: true };
    let (_, trace) = solve_with(f, &sc, opts)?;
    trace.write_csv(&mut *w)?;
    let errs: Vec<(u32, f64)> = trace
        .rows
        .iter()
        .filter(|r| r.level >= MONOTONE_FROM_LEVEL)
        .filter_map(|r| r.oracle_sup_error.map(|e| (r.level, e)))
        .collect();
    for p in errs.windows(2) {
        if p[1].1 > p[0].1 {
            return Ok(Status::Violation(format!(
                "oracle error grew from {:e} at level {} to {:e} at level {}",
                p[0].1, p[0].0, p[1].1, p[1].0
            )));
        }
    }
    Ok(Status::Ok)
}

struct Checks {
    rows: Vec<(&'static str, f64, f64)>,
}

impl Checks {
    fn push(&mut self, name: &'static str, value: f64, tol: f64) {
        self.rows.push((name, value, tol));
    }

    fn write<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "property,value,tolerance,status")?;
        for &(name, v, tol) in &self.rows {
            let status = if v <= tol { "pass" } else { "fail" };
            writeln!(w, "{name},{},{},{status}", fmt17(v), fmt17(tol))?;
        }
        Ok(())
    }

    fn status(&self) -> Status {
        let failed: Vec<&str> = self.rows.iter().filter(|r| !(r.1 <= r.2)).map(|r| r.0).collect();
        if failed.is_empty() {
            Status::Ok
        } else {
            Status::Violation(format!("failed: {}", failed.join(", ")))
        }
    }
}

/// Iterates are checked at this level at most, to bound the cost on big grids.
const PROPERTY_LEVEL_CAP: u32 = 6;

fn properties_cmd<W: Write>(cfg: &RunConfig, f: &GridFunction64, w: &mut W) -> Result<Status, CliError> {
    let t = cfg.t;
    let tv: f64 = t.value();
    let level = cfg.n.min(PROPERTY_LEVEL_CAP).max(t.log2_den());
    let sc = solver_config(cfg, t, vec![level])?;
    let op = sc.operator()?;
    let spec = cfg.grid;
    let d = spec.dim();
    let offset = GridFunction64::from_fn(spec, |x| {
        0.25 * (-(x[0] - 1.0).powi(2) - x[..d].iter().skip(1).map(|v| v * v).sum::<f64>()).exp()
    })?;
    let others = [f.lincomb(0.5, &offset, 1.0)?, f.scale(-1.0)];
    let mut c = Checks { rows: Vec::new() };

    let zero = op.one_step(&GridFunction64::zeros(spec), tv)?;
    c.push("one_step_zero", zero.sup_norm(), 0.0);
    let sf = op.one_step(f, tv)?;
    let it_f = op.iterate(f, t, level)?;
    let (mut contr, mut mono, mut conv, mut it_contr) = (f64::NEG_INFINITY, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for g in &others {
        let sg = op.one_step(g, tv)?;
        let gap = (f - g).sup_norm();
        contr = contr.max((&sf - &sg).sup_norm() - gap);
        let up = op.one_step(&f.zip_with(g, f64::max)?, tv)?;
        mono = mono.max(sf.max_excess_over(&up)).max(sg.max_excess_over(&up));
        let mix = op.one_step(&f.lincomb(0.3, g, 0.7)?, tv)?;
        conv = conv.max(mix.max_excess_over(&sf.lincomb(0.3, &sg, 0.7)?));
        it_contr = it_contr.max((&it_f - &op.iterate(g, t, level)?).sup_norm() - gap);
    }
    c.push("one_step_contraction", contr, 1e-12);
    c.push("one_step_monotone", mono, 0.0);
    c.push("one_step_convexity", conv, 1e-12);
    c.push("iterate_contraction", it_contr, 1e-12);
    c.push(
        "one_step_gradient_growth",
        sf.discrete_gradient_sup() - f.discrete_gradient_sup(),
        10.0 * spec.spacing(),
    );

    let params = dominating_params(cfg)?;
    c.push("domination", domination_check(f, &sc, &params)?.max_violation(), 1e-6);
    let half = tv / 2.0;
    c.push("dominating_semigroup", params.semigroup_sub_check(&f.abs(), half, half)?, 1e-5);
    let mut equiv = f64::NEG_INFINITY;
    for r in [1.0, 2.0, 10.0] {
        let e = norm_equivalence_check(f, r, &params.gauge)?;
        equiv = equiv.max(e.norm_r - e.norm_1).max(e.norm_1 - r * e.norm_r);
    }
    c.push("norm_equivalence", equiv, 1e-8);
    if let HamiltonianKind::Quadratic { c: k } = *cfg.hamiltonian.kind() {
        let u = exact_solution_with(f, tv, k, cfg.truncation)?;
        c.push("oracle_above_heat", heat_step(f, tv)?.max_excess_over(&u), 1e-10);
    }
    c.write(w)?;
    Ok(c.status())
}

fn dominating_params(cfg: &RunConfig) -> Result<DominatingParams<f64>, CliError> {
    let k = cfg.hamiltonian.growth_constant();
    let p = match cfg.b {
        Some(b) => DominatingParams::new(k * k, b)?,
        None => DominatingParams::from_growth_constant(k)?,
    };
    Ok(p)
}

fn norms_cmd<W: Write>(cfg: &RunConfig, f: &GridFunction64, w: &mut W) -> Result<Status, CliError> {
    let b = match cfg.b {
        Some(b) => b,
        None => 8.0 * cfg.hamiltonian.growth_constant() + 1.0,
    };
    let y = YoungFunction::new(b)?;
    let slack = quadrature_slack(f);
    writeln!(w, "R,b,norm_R,norm_1,quadrature_slack,status")?;
    let mut status = Status::Ok;
    for &r in &cfg.norm_r {
        let e = norm_equivalence_check(f, r, &y)?;
        let ok = e.lhs_ok && e.rhs_ok;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt17(r),
            fmt17(b),
            fmt17(e.norm_r),
            fmt17(e.norm_1),
            fmt17(slack),
            if ok { "pass" } else { "fail" }
        )?;
        if !ok {
            status = Status::Violation(format!("norm equivalence fails at R = {r}"));
        }
    }
    Ok(status)
}

/// Report samples are spaced `2^-REPORT_SAMPLE_LEVEL` apart (finer if the horizon needs it).
const REPORT_SAMPLE_LEVEL: u32 = 3;

fn report_cmd<W: Write>(cfg: &RunConfig, f: &GridFunction64, w: &mut W) -> Result<Status, CliError> {
    let s = REPORT_SAMPLE_LEVEL.max(cfg.horizon.log2_den());
    let count = cfg.horizon.steps_at(s)?;
    let times: Vec<Dyadic> = (1..=count).map(|j| Dyadic::new(j, s)).collect();
    let sc = solver_config(cfg, cfg.horizon, vec![cfg.n.max(s)])?;
    let rep = apriori_bound_report(f, &sc, &times)?;
    rep.write_kv(&mut *w)?;
    if rep.gradient_nonincrease {
        Ok(Status::Ok)
    } else {
        Ok(Status::Violation("discrete gradient grew along the trajectory".into()))
    }
}
