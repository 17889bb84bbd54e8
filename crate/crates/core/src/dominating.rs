//! The dominating family `T(t)f = φ⁻¹(E[φ(e^{at} f(x + W_t))])` and the
//! comparison inequalities around it.

use std::io::BufRead;

use crate::chernoff::{ChernoffOperator, Dyadic, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::{convolve_axis, lse_convolve_axis, GaussKernel};
use crate::orlicz::{luxemburg_norm, Gauge, YoungFunction};
use crate::scalar::Real;

/// Above this, `E φ(·)` is accumulated in the log domain.
const LINEAR_DOMAIN_LIMIT: f64 = 1e250;

/// `(a, φ)` for `T(t)`; the default gauge is the Young function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominatingParams<T, G = YoungFunction<T>> {
    pub a: T,
    pub gauge: G,
}

impl<T: Real> DominatingParams<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        Self::with_gauge(a, YoungFunction::new(b)?)
    }

    /// `a = K²`, `b = 8K + 1`.
    pub fn from_growth_constant(k: T) -> Result<Self> {
        Self::with_gauge(k * k, YoungFunction::from_growth_constant(k)?)
    }

    pub fn young(&self) -> &YoungFunction<T> {
        &self.gauge
    }
}

impl<T: Real, G: Gauge<T>> DominatingParams<T, G> {
    pub fn with_gauge(a: T, gauge: G) -> Result<Self> {
        if !(a >= T::zero()) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("growth rate a = {a} must be nonnegative")));
        }
        Ok(Self { a, gauge })
    }

    /// `T(t) f` for `f ≥ 0`.
    pub fn t_op(&self, f: &GridFunction<T>, t: T) -> Result<GridFunction<T>> {
        check_nonnegative(f)?;
        if t < T::zero() || !t.is_finite() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        if t == T::zero() {
            return Ok(f.clone());
        }
        let spec = *f.spec();
        let kernel = GaussKernel::with_default_truncation(t, spec.dim())?;
        let st = kernel.stencil(spec.spacing(), T::zero());
        let lift = (self.a * t).exp();
        let phis: Vec<T> = f.values().iter().map(|&v| self.gauge.phi(lift * v)).collect();
        let linear = phis.iter().all(|p| p.is_finite() && *p < T::lit(LINEAR_DOMAIN_LIMIT));
        let out: Vec<T> = if linear {
            let mut e = convolve_axis(&phis, &spec, 0, &st);
            if spec.dim() == 2 {
                e = convolve_axis(&e, &spec, 1, &st);
            }
            e.into_iter().map(|y| self.gauge.phi_inverse(y.max(T::zero()))).collect::<Result<_>>()?
        } else {
            let lns: Vec<T> = f.values().iter().map(|&v| self.gauge.ln_phi(lift * v)).collect();
            let ninf = T::neg_infinity();
            let mut e = lse_convolve_axis(&lns, &spec, 0, &st, ninf);
            if spec.dim() == 2 {
                e = lse_convolve_axis(&e, &spec, 1, &st, ninf);
            }
            e.into_iter().map(|ly| self.gauge.ln_phi_inverse(ly)).collect()
        };
        GridFunction::new(spec, out)
    }

    /// Max node-wise `T(s)T(t)f − T(s+t)f`.
    pub fn semigroup_sub_check(&self, f: &GridFunction<T>, s: T, t: T) -> Result<T> {
        let lhs = self.t_op(&self.t_op(f, t)?, s)?;
        let rhs = self.t_op(f, s + t)?;
        Ok(lhs.max_excess_over(&rhs).max(T::zero()))
    }

    /// `(‖T(t)f‖_{Φ,R}, e^{at}‖f‖_{Φ,R})` for `f` in the ball `B_R(e^{−at})`.
    pub fn norm_bound_check(&self, f: &GridFunction<T>, t: T, r: T) -> Result<(T, T)> {
        check_nonnegative(f)?;
        let radius = (-self.a * t).exp();
        let n = luxemburg_norm(f, r, &self.gauge)?;
        ensure_in_ball(n, r, radius)?;
        let lhs = luxemburg_norm(&self.t_op(f, t)?, r, &self.gauge)?;
        Ok((lhs, (self.a * t).exp() * n))
    }

    /// Scales `f` so that `‖f‖_{Φ,R} = fraction · radius`.
    pub fn rescale_into_ball(&self, f: &GridFunction<T>, r: T, radius: T, fraction: T) -> Result<GridFunction<T>> {
        let n = luxemburg_norm(f, r, &self.gauge)?;
        if n == T::zero() {
            return Ok(f.clone());
        }
        Ok(f.scale(fraction * radius / n))
    }

    /// Rescales into `B_R(e^{−at})`, the ball of the norm bound.
    pub fn rescale_for_norm_bound(&self, f: &GridFunction<T>, t: T, r: T, fraction: T) -> Result<GridFunction<T>> {
        self.rescale_into_ball(f, r, (-self.a * t).exp(), fraction)
    }

    /// Rescales into `B_R(e^{−at}/3)`, the ball of the Lipschitz bound.
    pub fn rescale_for_lipschitz(&self, f: &GridFunction<T>, t: T, r: T, fraction: T) -> Result<GridFunction<T>> {
        self.rescale_into_ball(f, r, (-self.a * t).exp() / T::lit(3.0), fraction)
    }
}

fn check_nonnegative<T: Real>(f: &GridFunction<T>) -> Result<()> {
    match f.values().iter().position(|&v| v < T::zero()) {
        Some(index) => Err(Error::NegativeInput { index, value: f.get(index).to_f64_lossy() }),
        None => Ok(()),
    }
}

fn ensure_in_ball<T: Real>(norm: T, r: T, radius: T) -> Result<()> {
    // Relative slack for the bisection tolerance of the norm itself.
    if norm > radius * (T::one() + T::lit(1e-12)) {
        return Err(Error::OutsideBall { r: r.to_f64_lossy(), radius: radius.to_f64_lossy(), norm: norm.to_f64_lossy() });
    }
    Ok(())
}

/// `T(t) f` with Young-function parameters.
pub fn t_op<T: Real>(f: &GridFunction<T>, t: T, params: &DominatingParams<T>) -> Result<GridFunction<T>> {
    params.t_op(f, t)
}

/// Largest violations of `|I(t)f| ≤ T(t)|f|` (single step of size `t`) and of
/// `|I(π_n^t)f| ≤ T(t)|f|` over the schedule levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport<T> {
    pub one_step: T,
    pub iterated: Vec<(u32, T)>,
}

impl<T: Real> DominationReport<T> {
    pub fn max_violation(&self) -> T {
        self.iterated.iter().fold(self.one_step, |m, &(_, v)| m.max(v))
    }
}

pub fn domination_check<T: Real>(
    f: &GridFunction<T>,
    config: &SolverConfig<T>,
    params: &DominatingParams<T>,
) -> Result<DominationReport<T>> {
    let t = config.schedule.t();
    let tv: T = t.value();
    let op = config.operator()?;
    let bound = params.t_op(&f.abs(), tv)?;
    let excess = |u: &GridFunction<T>| u.abs().max_excess_over(&bound).max(T::zero());
    let one_step = if t.is_zero() { T::zero() } else { excess(&op.one_step(f, tv)?) };
    let iterated = config
        .schedule
        .levels()
        .iter()
        .map(|&n| Ok((n, excess(&op.iterate(f, t, n)?))))
        .collect::<Result<_>>()?;
    Ok(DominationReport { one_step, iterated })
}

/// `(‖S(t)f − S(t)g‖_{Φ,R}, 4e^{at}‖f − g‖_{Φ,R})` with `S(t)` taken at the
/// schedule's finest level, for `f, g ∈ B_R(e^{−at}/3)`.
pub fn s_lipschitz_orlicz_check<T: Real>(
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    r: T,
    config: &SolverConfig<T>,
    params: &DominatingParams<T>,
) -> Result<(T, T)> {
    let t = config.schedule.t();
    let tv: T = t.value();
    let young = &params.gauge;
    let radius = (-params.a * tv).exp() / T::lit(3.0);
    for h in [f, g] {
        ensure_in_ball(luxemburg_norm(h, r, young)?, r, radius)?;
    }
    let op = config.operator()?;
    let n = config.schedule.finest();
    let sf = op.iterate(f, t, n)?;
    let sg = op.iterate(g, t, n)?;
    let lhs = luxemburg_norm(&(&sf - &sg), r, young)?;
    let rhs = T::lit(4.0) * (params.a * tv).exp() * luxemburg_norm(&(f - g), r, young)?;
    Ok((lhs, rhs))
}

/// A strictly increasing utility with derivatives, for certainty equivalents
/// `u⁻¹(E u(X))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Utility<T> {
    Linear,
    /// `x^p` on `x > 0`.
    Power(T),
    /// `e^{cx}`, `c > 0`.
    Exp(T),
    /// `φ_b(c x)` for the Young function with parameter `b`.
    Young { b: T, c: T },
}

impl<T: Real> Utility<T> {
    pub fn value(&self, x: T) -> T {
        match *self {
            Utility::Linear => x,
            Utility::Power(p) => x.powf(p),
            Utility::Exp(c) => (c * x).exp(),
            Utility::Young { b, c } => {
                let u = b * c * x;
                (u - T::one()) * u.exp() + T::one()
            }
        }
    }

    pub fn d1(&self, x: T) -> T {
        match *self {
            Utility::Linear => T::one(),
            Utility::Power(p) => p * x.powf(p - T::one()),
            Utility::Exp(c) => c * (c * x).exp(),
            Utility::Young { b, c } => {
                let k = b * c;
                k * k * x * (k * x).exp()
            }
        }
    }

    pub fn d2(&self, x: T) -> T {
        match *self {
            Utility::Linear => T::zero(),
            Utility::Power(p) => p * (p - T::one()) * x.powf(p - T::lit(2.0)),
            Utility::Exp(c) => c * c * (c * x).exp(),
            Utility::Young { b, c } => {
                let k = b * c;
                k * k * (k * x).exp() * (T::one() + k * x)
            }
        }
    }

    /// Inverse on the range of `value` over `[lo, hi]`, by bisection.
    pub fn inverse(&self, y: T, lo: T, hi: T) -> T {
        match *self {
            Utility::Linear => return y,
            Utility::Power(p) if y >= T::zero() => return y.powf(T::one() / p),
            Utility::Exp(c) if y > T::zero() => return y.ln() / c,
            _ => {}
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = (a + b) / T::lit(2.0);
            if !(m > a && m < b) {
                break;
            }
            if self.value(m) < y {
                a = m;
            } else {
                b = m;
            }
        }
        (a + b) / T::lit(2.0)
    }
}

/// Finite distribution `P(X = atom_i) = p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<T> {
    atoms: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> DiscreteDistribution<T> {
    pub fn new(atoms: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(Error::InvalidDistribution("need equally many atoms and probabilities, at least one".into()));
        }
        if atoms.iter().chain(&probs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite entry".into()));
        }
        if probs.iter().any(|&p| p < T::zero()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total = probs.iter().fold(T::zero(), |a, &p| a + p);
        if (total - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { atoms, probs })
    }

    pub fn uniform(atoms: Vec<T>) -> Result<Self> {
        let p = T::one() / T::from_usize_lossy(atoms.len().max(1));
        let probs = vec![p; atoms.len()];
        Self::new(atoms, probs)
    }

    pub fn point_mass(x: T) -> Self {
        Self { atoms: vec![x], probs: vec![T::one()] }
    }

    /// `atom,probability` rows; a header line is optional.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (mut atoms, mut probs) = (Vec::new(), Vec::new());
        for (no, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (no == 0 && line.starts_with("atom")) {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: expected `atom,probability`, got `{line}`", no + 1));
            let (a, p) = line.split_once(',').ok_or_else(bad)?;
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            atoms.push(T::lit(a));
            probs.push(T::lit(p));
        }
        Self::new(atoms, probs)
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn expect<F: Fn(T) -> T>(&self, g: F) -> T {
        self.atoms.iter().zip(&self.probs).fold(T::zero(), |acc, (&x, &p)| acc + p * g(x))
    }

    pub fn min(&self) -> T {
        self.atoms.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.atoms.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Certainty equivalents `(u⁻¹(E u(X)), v⁻¹(E v(X)))` after checking
/// `u''/u' ≤ v''/v'` and `u', v' > 0` on the hull of the support.
pub fn arrow_pratt_check<T: Real>(u: &Utility<T>, v: &Utility<T>, x: &DiscreteDistribution<T>) -> Result<(T, T)> {
    let (lo, hi) = (x.min(), x.max());
    let samples = 257;
    for i in 0..samples {
        let s = if hi > lo { lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(samples - 1) } else { lo };
        let (du, dv) = (u.d1(s), v.d1(s));
        if !(du > T::zero() && dv > T::zero()) {
            return Err(Error::Hypothesis(format!("utilities must be strictly increasing on [{lo}, {hi}] (fails at {s})")));
        }
        let (ru, rv) = (u.d2(s) / du, v.d2(s) / dv);
        if ru > rv + T::lit(1e-8) {
            return Err(Error::Hypothesis(format!("u''/u' = {ru} exceeds v''/v' = {rv} at {s}")));
        }
    }
    let lhs = u.inverse(x.expect(|a| u.value(a)), lo, hi);
    let rhs = v.inverse(x.expect(|a| v.value(a)), lo, hi);
    Ok((lhs, rhs))
}

/// `(c φ⁻¹(E φ(X)), φ⁻¹(E φ(cX)))` for `X ≥ 0` and `c ≥ 1`.
pub fn scaling_corollary_check<T: Real, G: Gauge<T>>(x: &DiscreteDistribution<T>, c: T, gauge: &G) -> Result<(T, T)> {
    if !(c >= T::one()) {
        return Err(Error::InvalidParameter(format!("scaling factor c = {c} must be >= 1")));
    }
    if x.min() < T::zero() {
        return Err(Error::InvalidDistribution("atoms must be nonnegative".into()));
    }
    let lhs = c * gauge.phi_inverse(x.expect(|a| gauge.phi(a)))?;
    let rhs = gauge.phi_inverse(x.expect(|a| gauge.phi(c * a)))?;
    Ok((lhs, rhs))
}

/// Below this a value counts as zero when detecting the support.
const SUPPORT_FLOOR: f64 = 1e-300;

/// Radius of the smallest centred ball holding the support of `f`; fails if
/// the support touches the grid boundary.
pub fn support_radius<T: Real>(f: &GridFunction<T>) -> Result<T> {
    let spec = f.spec();
    let d = spec.dim();
    let mut r = T::zero();
    for (i, &v) in f.values().iter().enumerate() {
        if v.abs() > T::lit(SUPPORT_FLOOR) {
            if !spec.is_interior(i) {
                return Err(Error::SupportNotCompact);
            }
            r = r.max(crate::scalar::norm(&spec.coords(i)[..d]));
        }
    }
    Ok(r)
}

/// Tightness radius `max(c, r₀)` with `c = max(λ(B(r₀)), e^a ‖f‖_∞ / m)`.
pub fn tightness_radius<T: Real>(f: &GridFunction<T>, m: T, a: T) -> Result<T> {
    let r0 = support_radius(f)?;
    let c = f.spec().ball_volume(r0).max(a.exp() * f.sup_norm() / m);
    Ok(c.max(r0))
}

/// `∫_{|x| ≥ r} Φ(T(t)f / (m t))` on the grid, for each `t` in `times`.
pub fn tightness_diagnostic<T: Real>(
    f: &GridFunction<T>,
    m: T,
    r: T,
    times: &[T],
    params: &DominatingParams<T>,
) -> Result<Vec<T>> {
    check_nonnegative(f)?;
    if !(m > T::zero() && m <= T::one()) {
        return Err(Error::InvalidParameter(format!("m = {m} must lie in (0, 1]")));
    }
    support_radius(f)?;
    let spec = *f.spec();
    let d = spec.dim();
    times
        .iter()
        .map(|&t| {
            let g = params.t_op(f, t)?;
            let terms: Vec<T> = (0..g.len())
                .filter(|&i| crate::scalar::norm(&spec.coords(i)[..d]) >= r && g.get(i) > T::zero())
                .map(|i| spec.trapezoid_weight(i).ln() + params.gauge.ln_phi(g.get(i) / (m * t)))
                .collect();
            Ok(crate::orlicz::log_sum_exp(&terms).exp())
        })
        .collect()
}

/// `t = 2^{-k}` for each `k`.
pub fn dyadic_times<T: Real>(ks: impl IntoIterator<Item = u32>) -> Vec<T> {
    ks.into_iter().map(|k| Dyadic::new(1, k).value()).collect()
}

/// Largest node-wise excess of `I(t)f` over `T(t)|f|` for a bare operator;
/// handy for sweeps without a full [`SolverConfig`].
pub fn one_step_domination<T: Real>(
    op: &ChernoffOperator<T>,
    f: &GridFunction<T>,
    t: T,
    params: &DominatingParams<T>,
) -> Result<T> {
    let bound = params.t_op(&f.abs(), t)?;
    Ok(op.one_step(f, t)?.abs().max_excess_over(&bound).max(T::zero()))
}
