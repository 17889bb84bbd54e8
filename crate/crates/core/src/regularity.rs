//! Time-regularity diagnostics along solved trajectories: empirical
//! time-Lipschitz constants, the a-priori bound on `∂ₜu`, `Δu`, `∇u`, and
//! PDE residuals.

use std::io::Write;

use crate::chernoff::{discrete_generator, Dyadic, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scalar::{fmt17, Real};

/// `u(k·2^{-level})` for `k = 0..=steps`.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    level: u32,
    states: Vec<GridFunction<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Solves up to `horizon` (inclusive) at `level`.
    pub fn compute(f: &GridFunction<T>, config: &SolverConfig<T>, horizon: Dyadic, level: u32) -> Result<Self> {
        let op = config.operator()?;
        let states = op.trajectory(f, horizon, level)?;
        Ok(Self { level, states })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dt(&self) -> T {
        Dyadic::new(1, self.level).value()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[GridFunction<T>] {
        &self.states
    }

    pub fn at(&self, t: Dyadic) -> Result<&GridFunction<T>> {
        let k = t.steps_at(self.level)? as usize;
        self.states.get(k).ok_or_else(|| {
            Error::InvalidParameter(format!("time {t} lies beyond the computed horizon"))
        })
    }
}

fn latest(times: &[Dyadic]) -> Dyadic {
    times.iter().copied().fold(Dyadic::zero(), |m, t| if t.value::<f64>() > m.value::<f64>() { t } else { m })
}

/// Empirical `γ` with the data it is expected to depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate<T> {
    pub gamma: T,
    pub laplacian_sup_f: T,
    pub gradient_sup_f: T,
}

/// `max ‖u(s) − u(t)‖_∞ / |s − t|` over all pairs from `{0} ∪ times`, solved at
/// the schedule's finest level.
pub fn time_lipschitz_estimate<T: Real>(
    f: &GridFunction<T>,
    config: &SolverConfig<T>,
    times: &[Dyadic],
) -> Result<LipschitzEstimate<T>> {
    let level = config.schedule.finest();
    let traj = Trajectory::compute(f, config, latest(times), level)?;
    let mut samples = vec![Dyadic::zero()];
    samples.extend_from_slice(times);
    let mut gamma = T::zero();
    for (i, &s) in samples.iter().enumerate() {
        for &t in &samples[i + 1..] {
            let gap = (s.value::<T>() - t.value::<T>()).abs();
            if gap > T::zero() {
                gamma = gamma.max((traj.at(s)? - traj.at(t)?).sup_norm() / gap);
            }
        }
    }
    Ok(LipschitzEstimate {
        gamma,
        laplacian_sup_f: f.discrete_laplacian_sup(),
        gradient_sup_f: f.discrete_gradient_sup(),
    })
}

/// Suprema along a trajectory, witnessing the a-priori bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport<T> {
    pub gamma_estimate: T,
    pub sup_dt_u: T,
    pub sup_laplacian_u: T,
    pub sup_gradient_u: T,
    /// Max over the horizon of `‖∂ₜu‖ + ‖Δu‖ + ‖∇u‖`.
    pub witness_c: T,
    pub gradient_sup_f: T,
    pub laplacian_sup_f: T,
    /// `‖∇u(t)‖_∞ ≤ ‖∇f‖_∞ + 10h` at every sampled time.
    pub gradient_nonincrease: bool,
    pub level: u32,
    pub horizon_points: usize,
    pub spacing: T,
}

impl<T: Real> DiagnosticsReport<T> {
    /// `name=value` lines, floats at 17 significant digits.
    pub fn write_kv<W: Write>(&self, mut w: W) -> Result<()> {
        let rows: [(&str, String); 11] = [
            ("gamma_estimate", fmt17(self.gamma_estimate)),
            ("sup_dt_u", fmt17(self.sup_dt_u)),
            ("sup_laplacian_u", fmt17(self.sup_laplacian_u)),
            ("sup_gradient_u", fmt17(self.sup_gradient_u)),
            ("witness_C", fmt17(self.witness_c)),
            ("gradient_sup_f", fmt17(self.gradient_sup_f)),
            ("laplacian_sup_f", fmt17(self.laplacian_sup_f)),
            ("gradient_nonincrease", self.gradient_nonincrease.to_string()),
            ("level", self.level.to_string()),
            ("horizon_points", self.horizon_points.to_string()),
            ("spacing", fmt17(self.spacing)),
        ];
        for (k, v) in rows {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn to_kv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_kv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Computes the three suprema along the horizon; `∂ₜu` is the forward
/// difference over the finest step.
pub fn apriori_bound_report<T: Real>(
    f: &GridFunction<T>,
    config: &SolverConfig<T>,
    horizon: &[Dyadic],
) -> Result<DiagnosticsReport<T>> {
    let level = config.schedule.finest();
    let step = Dyadic::new(1, level);
    let last = latest(horizon).checked_add(&step).ok_or_else(|| Error::InvalidParameter("horizon overflow".into()))?;
    let traj = Trajectory::compute(f, config, last, level)?;
    let dt = traj.dt();
    let gradient_sup_f = f.discrete_gradient_sup();
    let tol = T::lit(10.0) * f.spec().spacing();
    let mut rep = DiagnosticsReport {
        gamma_estimate: T::zero(),
        sup_dt_u: T::zero(),
        sup_laplacian_u: T::zero(),
        sup_gradient_u: T::zero(),
        witness_c: T::zero(),
        gradient_sup_f,
        laplacian_sup_f: f.discrete_laplacian_sup(),
        gradient_nonincrease: true,
        level,
        horizon_points: horizon.len(),
        spacing: f.spec().spacing(),
    };
    for &t in horizon {
        let u = traj.at(t)?;
        let next = traj.at(t.checked_add(&step).unwrap())?;
        let dtu = (next - u).sup_norm() / dt;
        let lap = u.discrete_laplacian_sup();
        let grad = u.discrete_gradient_sup();
        rep.sup_dt_u = rep.sup_dt_u.max(dtu);
        rep.sup_laplacian_u = rep.sup_laplacian_u.max(lap);
        rep.sup_gradient_u = rep.sup_gradient_u.max(grad);
        rep.witness_c = rep.witness_c.max(dtu + lap + grad);
        if grad > gradient_sup_f + tol {
            rep.gradient_nonincrease = false;
        }
    }
    rep.gamma_estimate = time_lipschitz_estimate(f, config, horizon)?.gamma;
    Ok(rep)
}

/// At each sampled `t`: sup over interior nodes of
/// `|(u(t+δ) − u(t))/δ − ½Δu(t) − H(∇u(t))|`, `δ` the finest schedule step.
pub fn pde_residual_along_trajectory<T: Real>(
    f: &GridFunction<T>,
    config: &SolverConfig<T>,
    times: &[Dyadic],
) -> Result<Vec<T>> {
    let level = config.schedule.finest();
    let step = Dyadic::new(1, level);
    let last = latest(times).checked_add(&step).ok_or_else(|| Error::InvalidParameter("horizon overflow".into()))?;
    let traj = Trajectory::compute(f, config, last, level)?;
    let inv_dt = T::one() / traj.dt();
    let spec = f.spec();
    times
        .iter()
        .map(|&t| {
            let u = traj.at(t)?;
            let next = traj.at(t.checked_add(&step).unwrap())?;
            let gen = discrete_generator(u, &config.hamiltonian);
            Ok((0..u.len()).filter(|&i| spec.is_interior(i)).fold(T::zero(), |m, i| {
                m.max(((next.get(i) - u.get(i)) * inv_dt - gen.get(i)).abs())
            }))
        })
        .collect()
}
