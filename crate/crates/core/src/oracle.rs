//! Cole–Hopf reference solution for `H(p) = c|p|²/2`:
//! `u(t, x) = (1/c) log E[exp(c f(x + W_t))]`.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::{lse_convolve_axis, Stencil, DEFAULT_TRUNCATION};
use crate::scalar::Real;

/// Exact solution for `H(p) = |p|²/2` at time `t`.
pub fn exact_solution<T: Real>(f: &GridFunction<T>, t: T) -> Result<GridFunction<T>> {
    exact_solution_with(f, t, T::one(), T::lit(DEFAULT_TRUNCATION))
}

/// Exact solution for `H(p) = c|p|²/2`, i.e. the `c`-rescaled Cole–Hopf lift.
pub fn exact_solution_scaled<T: Real>(f: &GridFunction<T>, t: T, c: T) -> Result<GridFunction<T>> {
    exact_solution_with(f, t, c, T::lit(DEFAULT_TRUNCATION))
}

/// Full-control variant. `truncation_multiple` is not bounded below here so
/// that truncation studies can push it under the kernel's usual floor.
pub fn exact_solution_with<T: Real>(
    f: &GridFunction<T>,
    t: T,
    c: T,
    truncation_multiple: T,
) -> Result<GridFunction<T>> {
    if !(t > T::zero()) {
        return Err(Error::NonPositiveTime(t.to_f64_lossy()));
    }
    if !(c > T::zero()) || !(truncation_multiple > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "scale {c} and truncation multiple {truncation_multiple} must be positive"
        )));
    }
    let spec = *f.spec();
    let st = Stencil::gaussian(spec.spacing(), t, truncation_multiple, T::zero());
    let lifted: Vec<T> = f.values().iter().map(|&v| c * v).collect();
    let mut v = lse_convolve_axis(&lifted, &spec, 0, &st, T::zero());
    if spec.dim() == 2 {
        v = lse_convolve_axis(&v, &spec, 1, &st, T::zero());
    }
    let inv = T::one() / c;
    GridFunction::new(spec, v.into_iter().map(|x| x * inv).collect())
}

/// `‖u(s+t) − u(t)∘u(s)‖_∞`, i.e. how far the discrete oracle is from
/// composing as a flow.
pub fn oracle_semigroup_defect<T: Real>(f: &GridFunction<T>, s: T, t: T) -> Result<T> {
    oracle_semigroup_defect_with(f, s, t, T::lit(DEFAULT_TRUNCATION))
}

pub fn oracle_semigroup_defect_with<T: Real>(
    f: &GridFunction<T>,
    s: T,
    t: T,
    truncation_multiple: T,
) -> Result<T> {
    let one = T::one();
    let two_step = exact_solution_with(&exact_solution_with(f, s, one, truncation_multiple)?, t, one, truncation_multiple)?;
    let direct = exact_solution_with(f, s + t, one, truncation_multiple)?;
    Ok((&two_step - &direct).sup_norm())
}
