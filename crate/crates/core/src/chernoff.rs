//! Chernoff iteration of the one-step operator
//! `I(t)f(x) = sup_λ (E[f(x + W_t + λt)] − t L(λ))`.
//!
//! The expectation is evaluated on a refined lattice of offsets `x + k h / M`
//! with one exact, renormalized Gaussian stencil per offset, and the sup runs
//! over shifts `λ t ∈ (h / M)·ℤ`. Each candidate is a nonnegative-weight
//! average of `f` minus a constant, so the discrete operator keeps the exact
//! monotonicity, contraction and convexity of the continuous one, while the
//! λ resolution `h / (M t)` stays fixed as `t → 0`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::hamiltonian::Hamiltonian;
use crate::kernel::{padded, Stencil, DEFAULT_TRUNCATION};
use crate::scalar::{fmt17, Real};

/// Nonnegative dyadic rational `num / 2^log2_den`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u64,
    log2_den: u32,
}

impl Dyadic {
    pub fn new(num: u64, log2_den: u32) -> Self {
        let (mut num, mut log2_den) = (num, log2_den);
        while log2_den > 0 && num % 2 == 0 {
            num /= 2;
            log2_den -= 1;
        }
        if num == 0 {
            log2_den = 0;
        }
        Self { num, log2_den }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn log2_den(&self) -> u32 {
        self.log2_den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn value<T: Real>(&self) -> T {
        T::lit(self.num as f64 * 0.5f64.powi(self.log2_den as i32))
    }

    /// Number of steps of size `2^{-level}`, i.e. `2^level · t`.
    pub fn steps_at(&self, level: u32) -> Result<u64> {
        if level < self.log2_den {
            return Err(Error::LevelTooCoarse { level, t: self.to_string() });
        }
        let shift = level - self.log2_den;
        self.num
            .checked_shl(shift)
            .filter(|v| v >> shift == self.num)
            .ok_or_else(|| Error::InvalidParameter(format!("level {level} overflows the step count")))
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let d = self.log2_den.max(other.log2_den);
        let a = self.num.checked_shl(d - self.log2_den)?;
        let b = other.num.checked_shl(d - other.log2_den)?;
        Some(Self::new(a.checked_add(b)?, d))
    }

    /// Halves the value.
    pub fn half(&self) -> Self {
        Self::new(self.num, self.log2_den + 1)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log2_den == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.log2_den)
        }
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `k`, `k/N` with `N` a power of two, and `k/2^n`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::NonDyadic(s.to_string());
        let s_trim = s.trim();
        let (num, den) = match s_trim.split_once('/') {
            None => (s_trim, None),
            Some((a, b)) => (a.trim(), Some(b.trim())),
        };
        let num: u64 = num.parse().map_err(|_| bad())?;
        let log2_den = match den {
            None => 0,
            Some(d) => {
                if let Some(e) = d.strip_prefix("2^") {
                    let e: u32 = e.parse().map_err(|_| bad())?;
                    if e > 62 {
                        return Err(bad());
                    }
                    e
                } else {
                    let d: u64 = d.parse().map_err(|_| bad())?;
                    if d == 0 || !d.is_power_of_two() {
                        return Err(bad());
                    }
                    d.trailing_zeros()
                }
            }
        };
        Ok(Self::new(num, log2_den))
    }
}

/// Target time plus the increasing list of refinement levels to run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicSchedule {
    t: Dyadic,
    levels: Vec<u32>,
}

impl DyadicSchedule {
    pub fn new(t: Dyadic, mut levels: Vec<u32>) -> Result<Self> {
        levels.sort_unstable();
        levels.dedup();
        if levels.is_empty() {
            return Err(Error::InvalidParameter("schedule needs at least one level".into()));
        }
        for &n in &levels {
            t.steps_at(n)?;
        }
        Ok(Self { t, levels })
    }

    /// Consecutive levels `lo..=hi`.
    pub fn range(t: Dyadic, lo: u32, hi: u32) -> Result<Self> {
        Self::new(t, (lo..=hi).collect())
    }

    pub fn t(&self) -> Dyadic {
        self.t
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn finest(&self) -> u32 {
        *self.levels.last().unwrap()
    }
}

/// Default target λ spacing of the shift lattice.
pub const DEFAULT_LAMBDA_RESOLUTION: f64 = 0.02;
/// Caps on the sub-grid refinement factor `M`.
pub const MAX_REFINEMENT_1D: usize = 1024;
pub const MAX_REFINEMENT_2D: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub grid: GridSpec<T>,
    pub hamiltonian: Hamiltonian<T>,
    pub schedule: DyadicSchedule,
    /// Optional hard cap on `|λ|`; the coercivity cutoff applies regardless.
    pub lambda_window: Option<T>,
    pub truncation_multiple: T,
    pub cauchy_tol: T,
    /// Target spacing of the λ lattice; sets the sub-grid refinement.
    pub lambda_resolution: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(grid: GridSpec<T>, hamiltonian: Hamiltonian<T>, schedule: DyadicSchedule) -> Self {
        Self {
            grid,
            hamiltonian,
            schedule,
            lambda_window: None,
            truncation_multiple: T::lit(DEFAULT_TRUNCATION),
            cauchy_tol: T::lit(1e-4),
            lambda_resolution: T::lit(DEFAULT_LAMBDA_RESOLUTION),
        }
    }

    pub fn operator(&self) -> Result<ChernoffOperator<T>> {
        if !self.hamiltonian.supports_dim(self.grid.dim()) {
            return Err(Error::InvalidHamiltonian(format!(
                "hamiltonian cannot be used in dimension {}",
                self.grid.dim()
            )));
        }
        if !(self.cauchy_tol > T::zero()) {
            return Err(Error::InvalidParameter("cauchy_tol must be positive".into()));
        }
        let mut op = ChernoffOperator::new(self.hamiltonian.clone())
            .with_truncation(self.truncation_multiple)?
            .with_lambda_resolution(self.lambda_resolution)?;
        if let Some(w) = self.lambda_window {
            op = op.with_lambda_window(w)?;
        }
        Ok(op)
    }
}

/// Precomputed data for one step size on one grid.
#[derive(Debug, Clone)]
struct StepPlan<T> {
    refine: usize,
    /// One Gaussian stencil per sub-grid offset `r h / M`, `r = 0..M`.
    stencils: Vec<Stencil<T>>,
    /// Admissible shifts in refined units, as runs along the last axis.
    rows: Vec<ShiftRow<T>>,
    pad: usize,
}

/// Shifts `(a, lo), (a, lo + 1), …` with penalties `t L(λ)`; in 1D only the
/// run itself matters and `a` is 0.
#[derive(Debug, Clone)]
struct ShiftRow<T> {
    a: isize,
    lo: isize,
    pens: Vec<T>,
}

/// The one-step operator `I(t)` for a fixed Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffOperator<T> {
    hamiltonian: Hamiltonian<T>,
    truncation_multiple: T,
    lambda_resolution: T,
    lambda_window: Option<T>,
}

impl<T: Real> ChernoffOperator<T> {
    pub fn new(hamiltonian: Hamiltonian<T>) -> Self {
        Self {
            hamiltonian,
            truncation_multiple: T::lit(DEFAULT_TRUNCATION),
            lambda_resolution: T::lit(DEFAULT_LAMBDA_RESOLUTION),
            lambda_window: None,
        }
    }

    pub fn with_truncation(mut self, multiple: T) -> Result<Self> {
        if !(multiple >= T::lit(6.0)) {
            return Err(Error::InvalidParameter(format!("truncation multiple {multiple} must be at least 6")));
        }
        self.truncation_multiple = multiple;
        Ok(self)
    }

    pub fn with_lambda_resolution(mut self, res: T) -> Result<Self> {
        if !(res > T::zero()) || !res.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda resolution {res} must be positive")));
        }
        self.lambda_resolution = res;
        Ok(self)
    }

    pub fn with_lambda_window(mut self, window: T) -> Result<Self> {
        if !(window > T::zero()) {
            return Err(Error::InvalidParameter(format!("lambda window {window} must be positive")));
        }
        self.lambda_window = Some(window);
        Ok(self)
    }

    pub fn hamiltonian(&self) -> &Hamiltonian<T> {
        &self.hamiltonian
    }

    /// Sub-grid refinement factor used for step `dt` on spacing `h`.
    pub fn refinement(&self, spec: &GridSpec<T>, dt: T) -> usize {
        let cap = if spec.dim() == 1 { MAX_REFINEMENT_1D } else { MAX_REFINEMENT_2D };
        let m = (spec.spacing() / (dt * self.lambda_resolution)).ceil();
        m.to_usize().unwrap_or(cap).clamp(1, cap)
    }

    fn plan(&self, spec: &GridSpec<T>, dt: T, sup: T) -> Result<StepPlan<T>> {
        let h = spec.spacing();
        let refine = self.refinement(spec, dt);
        let sub = h / T::from_usize_lossy(refine);
        let stencils = (0..refine)
            .map(|r| Stencil::gaussian(h, dt, self.truncation_multiple, T::from_usize_lossy(r) * sub))
            .collect();

        // Shifts whose penalty exceeds 2‖f‖ + 1 can never win the sup, and by
        // coercivity of L they all lie beyond max(2K, √(16K(2‖f‖+1)/t)).
        let thr = sup + sup + T::one();
        let k = self.hamiltonian.growth_constant();
        let mut bound = if k > T::zero() {
            (k + k).max((T::lit(16.0) * k * thr / dt).sqrt())
        } else {
            T::zero()
        };
        if let Some(w) = self.lambda_window {
            bound = bound.min(w);
        }
        let lam_step = sub / dt;
        let jmax = (bound / lam_step).floor().to_isize().unwrap_or(0).max(0);
        let dim = spec.dim();
        let pen_at = |a: isize, b: isize| -> T {
            let lam = [T::from_isize(a).unwrap() * lam_step, T::from_isize(b).unwrap() * lam_step];
            if crate::scalar::norm(&lam[..dim]) > bound {
                return T::infinity();
            }
            let pen = dt * self.hamiltonian.conjugate(&lam[..dim]);
            if pen <= thr {
                pen
            } else {
                T::infinity()
            }
        };
        // Sublevel sets of a convex penalty are convex, so each row is one run.
        let run = |a: isize| -> Option<ShiftRow<T>> {
            let pens: Vec<T> = (-jmax..=jmax)
                .map(|j| if dim == 1 { pen_at(j, 0) } else { pen_at(a, j) })
                .collect();
            let first = pens.iter().position(|p| p.is_finite())?;
            let last = pens.iter().rposition(|p| p.is_finite())?;
            Some(ShiftRow { a, lo: first as isize - jmax, pens: pens[first..=last].to_vec() })
        };
        let rows: Vec<ShiftRow<T>> = if dim == 1 {
            run(0).into_iter().collect()
        } else {
            (-jmax..=jmax).filter_map(run).collect()
        };
        if rows.is_empty() {
            let window = self.lambda_window.unwrap_or(bound).to_f64_lossy();
            return Err(Error::EmptyAdmissibleSet { window });
        }
        Ok(StepPlan { refine, stencils, rows, pad: jmax as usize })
    }

    /// `I(dt) f`.
    pub fn one_step(&self, f: &GridFunction<T>, dt: T) -> Result<GridFunction<T>> {
        if !(dt > T::zero()) {
            return Err(Error::NonPositiveTime(dt.to_f64_lossy()));
        }
        let plan = self.plan(f.spec(), dt, f.sup_norm())?;
        Ok(apply(&plan, f))
    }

    /// `I(2^{-level})^{2^level t} f`.
    pub fn iterate(&self, f: &GridFunction<T>, t: Dyadic, level: u32) -> Result<GridFunction<T>> {
        let steps = t.steps_at(level)?;
        if steps == 0 {
            return Ok(f.clone());
        }
        let dt = T::lit(0.5f64.powi(level as i32));
        // ‖I(t)f‖ ≤ ‖f‖, so one plan built from the initial data serves every step.
        let plan = self.plan(f.spec(), dt, f.sup_norm())?;
        let mut u = f.clone();
        for _ in 0..steps {
            u = apply(&plan, &u);
        }
        Ok(u)
    }

    /// Like [`iterate`](Self::iterate) but also returns the field after every
    /// step (index `k` holds `I(dt)^k f`).
    pub fn trajectory(&self, f: &GridFunction<T>, t: Dyadic, level: u32) -> Result<Vec<GridFunction<T>>> {
        let steps = t.steps_at(level)?;
        let mut out = Vec::with_capacity(steps as usize + 1);
        out.push(f.clone());
        if steps == 0 {
            return Ok(out);
        }
        let dt = T::lit(0.5f64.powi(level as i32));
        let plan = self.plan(f.spec(), dt, f.sup_norm())?;
        for _ in 0..steps {
            let next = apply(&plan, out.last().unwrap());
            out.push(next);
        }
        Ok(out)
    }
}

fn apply<T: Real>(plan: &StepPlan<T>, f: &GridFunction<T>) -> GridFunction<T> {
    let spec = *f.spec();
    let values = if spec.dim() == 1 { apply_1d(plan, f) } else { apply_2d(plan, f) };
    GridFunction::new(spec, values).expect("one_step keeps values finite")
}

/// Max of `g[start + j] − pens[j]`, four lanes (max is exact, so lane order
/// does not affect the result).
#[inline]
fn sup_minus<T: Real>(g: &[T], pens: &[T]) -> T {
    let mut acc = [T::neg_infinity(); 4];
    let head = pens.len() - pens.len() % 4;
    for (x, p) in g[..head].chunks_exact(4).zip(pens[..head].chunks_exact(4)) {
        for k in 0..4 {
            acc[k] = acc[k].max(x[k] - p[k]);
        }
    }
    let mut best = acc[0].max(acc[1]).max(acc[2].max(acc[3]));
    for k in head..pens.len() {
        best = best.max(g[k] - pens[k]);
    }
    best
}

/// Refined expectations along one line: `out[i M + r] = E f(x_i + r h/M + W)`.
fn refine_line<T: Real>(plan: &StepPlan<T>, line: &[T], kpad: usize, n: usize, out: &mut [T]) {
    let m = plan.refine;
    for (p, o) in out.iter_mut().enumerate() {
        *o = plan.stencils[p % m].apply_padded(line, kpad, p / m);
    }
    debug_assert_eq!(out.len(), (n - 1) * m + 1);
}

fn apply_1d<T: Real>(plan: &StepPlan<T>, f: &GridFunction<T>) -> Vec<T> {
    let n = f.spec().nodes_per_axis();
    let m = plan.refine;
    let fine = (n - 1) * m + 1;
    let pad = plan.pad;
    let kpad = plan.stencils.iter().map(Stencil::reach).max().unwrap_or(0) + 1;
    let line = padded(f.values().iter().copied(), n, kpad);
    // Padded refined expectation field; zero beyond the grid.
    let mut g = vec![T::zero(); fine + 2 * pad];
    g[pad..pad + fine].par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
        let m = plan.refine;
        for (q, o) in chunk.iter_mut().enumerate() {
            let p = c * 4096 + q;
            *o = plan.stencils[p % m].apply_padded(&line, kpad, p / m);
        }
    });
    let row = &plan.rows[0];
    (0..n)
        .into_par_iter()
        .map(|i| {
            let start = ((pad + i * m) as isize + row.lo) as usize;
            sup_minus(&g[start..start + row.pens.len()], &row.pens)
        })
        .collect()
}

fn apply_2d<T: Real>(plan: &StepPlan<T>, f: &GridFunction<T>) -> Vec<T> {
    let n = f.spec().nodes_per_axis();
    let m = plan.refine;
    let fine = (n - 1) * m + 1;
    let pad = plan.pad;
    let kpad = plan.stencils.iter().map(Stencil::reach).max().unwrap_or(0) + 1;
    // Pass along x (columns), stored transposed: gx[iy][px].
    let mut gx = vec![T::zero(); n * fine];
    gx.par_chunks_mut(fine).enumerate().for_each(|(iy, out)| {
        let line = padded((0..n).map(|ix| f.get(ix * n + iy)), n, kpad);
        refine_line(plan, &line, kpad, n, out);
    });
    // Pass along y into a padded fine × fine field g[px][py].
    let w = fine + 2 * pad;
    let mut g = vec![T::zero(); w * w];
    g[pad * w..(pad + fine) * w].par_chunks_mut(w).enumerate().for_each(|(px, row)| {
        let line = padded((0..n).map(|iy| gx[iy * fine + px]), n, kpad);
        refine_line(plan, &line, kpad, n, &mut row[pad..pad + fine]);
    });
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = (idx / n, idx % n);
            let bx = pad + ix * m;
            let by = pad + iy * m;
            let mut best = T::neg_infinity();
            for row in &plan.rows {
                let start = ((bx as isize + row.a) as usize) * w + (by as isize + row.lo) as usize;
                best = best.max(sup_minus(&g[start..start + row.pens.len()], &row.pens));
            }
            best
        })
        .collect()
}

/// `I(t) f` with a default-configured operator.
pub fn one_step<T: Real>(f: &GridFunction<T>, t: T, h: &Hamiltonian<T>) -> Result<GridFunction<T>> {
    ChernoffOperator::new(h.clone()).one_step(f, t)
}

/// One row of a [`ConvergenceTrace`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub level: u32,
    pub steps: u64,
    pub dt: T,
    /// `‖iterate(level) − iterate(previous level)‖_∞`; absent on the first row.
    pub delta_sup: Option<T>,
    pub oracle_sup_error: Option<T>,
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace<T> {
    pub rows: Vec<TraceRow<T>>,
    /// The last delta fell below `cauchy_tol`.
    pub converged: bool,
    /// Some delta exceeded its predecessor.
    pub non_monotone: bool,
}

impl<T: Real> ConvergenceTrace<T> {
    pub fn deltas(&self) -> Vec<T> {
        self.rows.iter().filter_map(|r| r.delta_sup).collect()
    }

    pub fn oracle_errors(&self) -> Vec<T> {
        self.rows.iter().filter_map(|r| r.oracle_sup_error).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "level,steps,dt,delta_sup,oracle_sup_error,runtime_ms")?;
        let opt = |v: Option<T>| v.map(fmt17).unwrap_or_default();
        for r in &self.rows {
            let rt = r.runtime_ms.map(|v| format!("{v:.3}")).unwrap_or_default();
            writeln!(w, "{},{},{},{},{},{}", r.level, r.steps, fmt17(r.dt), opt(r.delta_sup), opt(r.oracle_sup_error), rt)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Options for [`solve_with`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<'a, T> {
    /// Reference field for the `oracle_sup_error` column.
    pub reference: Option<&'a GridFunction<T>>,
    /// Fill the `runtime_ms` column (makes the trace non-reproducible).
    pub timing: bool,
    /// Keep running every level instead of stopping at the Cauchy criterion.
    pub all_levels: bool,
}

impl<T> Default for SolveOptions<'_, T> {
    fn default() -> Self {
        Self { reference: None, timing: false, all_levels: false }
    }
}

/// Iterates over increasing levels until successive iterates are within
/// `cauchy_tol`, returning the last iterate and the trace.
pub fn solve<T: Real>(f: &GridFunction<T>, config: &SolverConfig<T>) -> Result<(GridFunction<T>, ConvergenceTrace<T>)> {
    solve_with(f, config, SolveOptions::default())
}

pub fn solve_with<T: Real>(
    f: &GridFunction<T>,
    config: &SolverConfig<T>,
    opts: SolveOptions<'_, T>,
) -> Result<(GridFunction<T>, ConvergenceTrace<T>)> {
    if *f.spec() != config.grid {
        return Err(Error::GridMismatch);
    }
    let op = config.operator()?;
    let mut trace = ConvergenceTrace { rows: Vec::new(), converged: false, non_monotone: false };
    if f.sup_norm() == T::zero() {
        trace.converged = true;
        return Ok((f.clone(), trace));
    }
    let t = config.schedule.t();
    let mut prev: Option<GridFunction<T>> = None;
    let mut last_delta: Option<T> = None;
    for &level in config.schedule.levels() {
        let start = Instant::now();
        let u = op.iterate(f, t, level)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let delta = prev.as_ref().map(|p| (&u - p).sup_norm());
        if let (Some(d), Some(ld)) = (delta, last_delta) {
            if d > ld {
                trace.non_monotone = true;
            }
        }
        let oracle = opts.reference.map(|r| (&u - r).sup_norm());
        trace.rows.push(TraceRow {
            level,
            steps: t.steps_at(level)?,
            dt: T::lit(0.5f64.powi(level as i32)),
            delta_sup: delta,
            oracle_sup_error: oracle,
            runtime_ms: opts.timing.then_some(elapsed),
        });
        prev = Some(u);
        if let Some(d) = delta {
            last_delta = Some(d);
            if d < config.cauchy_tol {
                trace.converged = true;
                if !opts.all_levels {
                    break;
                }
            } else {
                trace.converged = false;
            }
        }
    }
    Ok((prev.expect("schedule is never empty"), trace))
}

/// `(I(t)f − f)/t`, the discrete generator quotient at every node.
pub fn generator_quotient<T: Real>(op: &ChernoffOperator<T>, f: &GridFunction<T>, t: T) -> Result<GridFunction<T>> {
    let u = op.one_step(f, t)?;
    Ok(&(&u - f) * (T::one() / t))
}

/// `½Δf + H(∇f)` from central differences.
pub fn discrete_generator<T: Real>(f: &GridFunction<T>, h: &Hamiltonian<T>) -> GridFunction<T> {
    let d = f.spec().dim();
    let half = T::lit(0.5);
    let v = (0..f.len())
        .map(|i| {
            let g = f.gradient_at(i);
            half * f.laplacian_at(i) + h.eval(&g[..d])
        })
        .collect();
    GridFunction::new(*f.spec(), v).expect("finite derivatives")
}

/// Sup over interior nodes of `|(I(t)f − f)/t − (½Δf + H(∇f))|`.
pub fn generator_residual<T: Real>(f: &GridFunction<T>, t: T, h: &Hamiltonian<T>) -> Result<T> {
    generator_residual_with(&ChernoffOperator::new(h.clone()), f, t)
}

pub fn generator_residual_with<T: Real>(op: &ChernoffOperator<T>, f: &GridFunction<T>, t: T) -> Result<T> {
    let q = generator_quotient(op, f, t)?;
    let a = discrete_generator(f, op.hamiltonian());
    let spec = f.spec();
    Ok((0..f.len())
        .filter(|&i| spec.is_interior(i))
        .fold(T::zero(), |m, i| m.max((q.get(i) - a.get(i)).abs())))
}
