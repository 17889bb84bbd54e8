//! Exponential Orlicz machinery: the Young function `φ(x) = (bx−1)e^{bx}+1`,
//! Luxemburg norms `‖f‖_{Φ,R} = inf{m > 0 : ∫Φ(f/m) ≤ R}`, Orlicz balls and
//! mollification.
//!
//! Integrals use the grid trapezoid rule. Everything that can overflow is
//! evaluated in the log domain.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::kernel::{convolve_axis, Stencil};
use crate::scalar::Real;

/// A gauge `φ: [0,∞) → [0,∞)`, increasing with `φ(0) = 0`; `Φ(x) = φ(|x|)`.
pub trait Gauge<T: Real>: Send + Sync {
    fn phi(&self, x: T) -> T;

    /// `ln φ(x)`, finite wherever `φ(x) > 0` even if `φ(x)` overflows.
    fn ln_phi(&self, x: T) -> T {
        self.phi(x).ln()
    }

    /// `φ⁻¹(e^{ln_y})`.
    fn ln_phi_inverse(&self, ln_y: T) -> T;

    fn phi_inverse(&self, y: T) -> Result<T> {
        if y < T::zero() || y.is_nan() {
            return Err(Error::InvalidParameter(format!("phi_inverse needs y >= 0, got {y}")));
        }
        if y == T::zero() {
            return Ok(T::zero());
        }
        Ok(self.ln_phi_inverse(y.ln()))
    }

    #[inline]
    fn big_phi(&self, x: T) -> T {
        self.phi(x.abs())
    }
}

/// `φ(x) = (bx − 1)e^{bx} + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoungFunction<T> {
    b: T,
}

impl<T: Real> YoungFunction<T> {
    pub fn new(b: T) -> Result<Self> {
        if !(b > T::zero()) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("Young parameter b = {b} must be positive")));
        }
        Ok(Self { b })
    }

    /// `b = 8K + 1`.
    pub fn from_growth_constant(k: T) -> Result<Self> {
        Self::new(T::lit(8.0) * k + T::one())
    }

    pub fn b(&self) -> T {
        self.b
    }
}

/// `(u−1)e^u + 1 = Σ_{k≥2} (k−1)u^k/k!`, summed directly for small `u`.
fn young_unit<T: Real>(u: T) -> T {
    if u < T::lit(0.5) {
        let mut term = u * u / T::lit(2.0); // u^k / k! at k = 2
        let mut acc = term;
        for k in 3..24 {
            let kf = T::from_usize_lossy(k);
            term = term * u / kf;
            acc = acc + term * (kf - T::one());
        }
        acc
    } else {
        (u - T::one()) * u.exp() + T::one()
    }
}

fn ln_young_unit<T: Real>(u: T) -> T {
    if u <= T::zero() {
        T::neg_infinity()
    } else if u < T::lit(30.0) {
        young_unit(u).ln()
    } else {
        u + (u - T::one()).ln() + ((-u).exp() / (u - T::one())).ln_1p()
    }
}

/// Derivative of `ln young_unit` at `u > 0`.
fn dln_young_unit<T: Real>(u: T, ln_val: T) -> T {
    (u.ln() + u - ln_val).exp()
}

impl<T: Real> Gauge<T> for YoungFunction<T> {
    fn phi(&self, x: T) -> T {
        young_unit(self.b * x)
    }

    fn ln_phi(&self, x: T) -> T {
        ln_young_unit(self.b * x)
    }

    fn ln_phi_inverse(&self, ln_y: T) -> T {
        if ln_y == T::neg_infinity() {
            return T::zero();
        }
        if ln_y == T::infinity() {
            return T::infinity();
        }
        // Initial guess from the two asymptotic regimes.
        let u0 = if ln_y < T::lit(-2.0) {
            (T::lit(2.0) * ln_y.exp()).sqrt()
        } else if ln_y > T::lit(4.0) {
            ln_y - (ln_y - T::one()).ln()
        } else {
            T::one()
        };
        let f = |u: T| ln_young_unit(u) - ln_y;
        let (mut lo, mut hi) = (u0, u0);
        while f(lo) > T::zero() {
            lo = lo / T::lit(2.0);
        }
        while f(hi) < T::zero() {
            hi = hi * T::lit(2.0);
        }
        let mut u = u0.max(lo).min(hi);
        for _ in 0..200 {
            let lv = ln_young_unit(u);
            let fu = lv - ln_y;
            if fu == T::zero() {
                break;
            }
            if fu < T::zero() {
                lo = u;
            } else {
                hi = u;
            }
            let mut next = u - fu / dln_young_unit(u, lv);
            if !(next > lo && next < hi) {
                next = (lo + hi) / T::lit(2.0);
            }
            let done = (next - u).abs() <= T::epsilon() * T::lit(4.0) * u;
            u = next;
            if done || hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        u / self.b
    }
}

/// `φ(x) = x^p`, `p ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerGauge<T> {
    p: T,
}

impl<T: Real> PowerGauge<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("power gauge needs p >= 1, got {p}")));
        }
        Ok(Self { p })
    }
}

impl<T: Real> Gauge<T> for PowerGauge<T> {
    fn phi(&self, x: T) -> T {
        x.powf(self.p)
    }

    fn ln_phi(&self, x: T) -> T {
        self.p * x.ln()
    }

    fn ln_phi_inverse(&self, ln_y: T) -> T {
        (ln_y / self.p).exp()
    }
}

/// `φ(x) = eˣ − 1`; `φ⁻¹(E φ(f)) = log E e^f`, the entropic certainty equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropicGauge;

impl<T: Real> Gauge<T> for EntropicGauge {
    fn phi(&self, x: T) -> T {
        x.exp_m1()
    }

    fn ln_phi(&self, x: T) -> T {
        if x > T::lit(30.0) {
            x + (-(-x).exp()).ln_1p()
        } else {
            x.exp_m1().ln()
        }
    }

    fn ln_phi_inverse(&self, ln_y: T) -> T {
        if ln_y > T::lit(30.0) {
            ln_y + (-ln_y).exp().ln_1p()
        } else {
            ln_y.exp().ln_1p()
        }
    }
}

/// Free-function form of the Young inverse with parameter `b`.
pub fn phi_inverse<T: Real>(y: T, b: T) -> Result<T> {
    YoungFunction::new(b)?.phi_inverse(y)
}

/// `ln ∫Φ(f/m)` by the trapezoid rule, `-∞` for `f ≡ 0`.
pub fn ln_modular<T: Real, G: Gauge<T>>(f: &GridFunction<T>, m: T, gauge: &G) -> T {
    let spec = f.spec();
    let terms: Vec<T> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != T::zero())
        .map(|(i, &v)| spec.trapezoid_weight(i).ln() + gauge.ln_phi(v.abs() / m))
        .collect();
    log_sum_exp(&terms)
}

/// `∫Φ(f/m)` by the trapezoid rule.
pub fn modular<T: Real, G: Gauge<T>>(f: &GridFunction<T>, m: T, gauge: &G) -> T {
    ln_modular(f, m, gauge).exp()
}

pub(crate) fn log_sum_exp<T: Real>(terms: &[T]) -> T {
    let m = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() || m == T::infinity() {
        return m;
    }
    m + terms.iter().fold(T::zero(), |acc, &t| acc + (t - m).exp()).ln()
}

fn check_r<T: Real>(r: T) -> Result<()> {
    if !(r >= T::one()) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("Orlicz index R = {r} must be >= 1")));
    }
    Ok(())
}

/// `‖f‖_{Φ,R}`: the `m` with `∫Φ(f/m) = R`, by bisection in `ln m`.
pub fn luxemburg_norm<T: Real, G: Gauge<T>>(f: &GridFunction<T>, r: T, gauge: &G) -> Result<T> {
    check_r(r)?;
    let sup = f.sup_norm();
    if sup == T::zero() {
        return Ok(T::zero());
    }
    let spec = f.spec();
    let (argmax, _) = f
        .values()
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    let vol = (0..f.len()).fold(T::zero(), |a, i| a + spec.trapezoid_weight(i));
    let ln_r = r.ln();
    // ∫Φ(f/m) lies between w*·Φ(sup/m) and vol·Φ(sup/m).
    let mut hi = sup / gauge.ln_phi_inverse(ln_r - vol.ln());
    let mut lo = sup / gauge.ln_phi_inverse(ln_r - spec.trapezoid_weight(argmax).ln());
    let g = |m: T| ln_modular(f, m, gauge) - ln_r;
    // Guard against rounding at the bracket ends.
    while g(hi) > T::zero() {
        hi = hi * T::lit(1.5);
    }
    while g(lo) < T::zero() {
        lo = lo / T::lit(1.5);
    }
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if g(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::lit(1e-15).max(T::epsilon()) * hi {
            break;
        }
    }
    Ok(hi)
}

/// Convenience: `‖f‖_{Φ,R}` for the Young function with parameter `b`.
pub fn luxemburg_norm_b<T: Real>(f: &GridFunction<T>, r: T, b: T) -> Result<T> {
    luxemburg_norm(f, r, &YoungFunction::new(b)?)
}

/// Trapezoid-rule slack `2h · TV(f)` used to loosen Orlicz inequalities.
pub fn quadrature_slack<T: Real>(f: &GridFunction<T>) -> T {
    let spec = f.spec();
    let n = spec.nodes_per_axis() as isize;
    let h = spec.spacing();
    let mut tv = T::zero();
    if spec.dim() == 1 {
        for i in 0..n - 1 {
            tv = tv + (f.at(i + 1, 0) - f.at(i, 0)).abs();
        }
    } else {
        for ix in 0..n {
            for iy in 0..n {
                let v = f.at(ix, iy);
                tv = tv + ((f.at(ix + 1, iy) - v).abs() + (f.at(ix, iy + 1) - v).abs()) * h;
            }
        }
    }
    T::lit(2.0) * h * tv
}

/// Both sides of `‖f‖_{Φ,R} ≤ ‖f‖_Φ ≤ R‖f‖_{Φ,R}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEquivalence<T> {
    pub norm_r: T,
    pub norm_1: T,
    pub lhs_ok: bool,
    pub rhs_ok: bool,
}

pub fn norm_equivalence_check<T: Real, G: Gauge<T>>(f: &GridFunction<T>, r: T, gauge: &G) -> Result<NormEquivalence<T>> {
    let norm_r = luxemburg_norm(f, r, gauge)?;
    let norm_1 = luxemburg_norm(f, T::one(), gauge)?;
    let tol = T::lit(1e-8);
    Ok(NormEquivalence { norm_r, norm_1, lhs_ok: norm_r <= norm_1 + tol, rhs_ok: norm_1 <= r * norm_r + tol })
}

/// `B_R(center, radius) = {g : ‖g − center‖_{Φ,R} ≤ radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczBall<T> {
    r: T,
    radius: T,
    center: GridFunction<T>,
}

impl<T: Real> OrliczBall<T> {
    pub fn new(r: T, radius: T, center: GridFunction<T>) -> Result<Self> {
        check_r(r)?;
        if !(radius >= T::zero()) {
            return Err(Error::InvalidParameter(format!("ball radius {radius} must be nonnegative")));
        }
        Ok(Self { r, radius, center })
    }

    /// Ball around the zero function.
    pub fn centered(r: T, radius: T, spec: GridSpec<T>) -> Result<Self> {
        Self::new(r, radius, GridFunction::zeros(spec))
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn center(&self) -> &GridFunction<T> {
        &self.center
    }

    /// `‖f − center‖_{Φ,R}`.
    pub fn distance<G: Gauge<T>>(&self, f: &GridFunction<T>, gauge: &G) -> Result<T> {
        luxemburg_norm(&f.zip_with(&self.center, |a, b| a - b)?, self.r, gauge)
    }

    pub fn contains<G: Gauge<T>>(&self, f: &GridFunction<T>, gauge: &G) -> Result<bool> {
        Ok(self.distance(f, gauge)? <= self.radius)
    }
}

/// `R = 1 + ∫Φ((f − center)/r)`: the index with `f ∈ B_R(center, r)`.
pub fn witness_r<T: Real, G: Gauge<T>>(f: &GridFunction<T>, center: &GridFunction<T>, r: T, gauge: &G) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter(format!("witness radius {r} must be positive")));
    }
    let d = f.zip_with(center, |a, b| a - b)?;
    Ok(T::one() + modular(&d, r, gauge))
}

/// Renormalized samples of `exp(−1/(1 − (x/w)²))` on `|x| < w`.
pub fn mollifier_stencil<T: Real>(spacing: T, width: T) -> Stencil<T> {
    let k = (width / spacing).ceil().to_isize().unwrap_or(0);
    let raw: Vec<T> = (-k..=k)
        .map(|j| {
            let s = T::from_isize(j).unwrap() * spacing / width;
            if s.abs() < T::one() {
                (-T::one() / (T::one() - s * s)).exp()
            } else {
                T::zero()
            }
        })
        .collect();
    let total = raw.iter().fold(T::zero(), |a, &w| a + w);
    if total == T::zero() {
        return Stencil::identity();
    }
    Stencil { lo: -k, weights: raw.into_iter().map(|w| w / total).collect() }
}

/// `f ∗ η_w` with a tensor-product bump mollifier of half-width `w`.
pub fn mollify<T: Real>(f: &GridFunction<T>, width: T) -> Result<GridFunction<T>> {
    if !(width > T::zero()) {
        return Err(Error::InvalidParameter(format!("mollifier width {width} must be positive")));
    }
    let spec = *f.spec();
    let st = mollifier_stencil(spec.spacing(), width);
    let mut v = convolve_axis(f.values(), &spec, 0, &st);
    if spec.dim() == 2 {
        v = convolve_axis(&v, &spec, 1, &st);
    }
    GridFunction::new(spec, v)
}

/// `(‖f ∗ η‖_{Φ,R}, ‖f‖_{Φ,R})`.
pub fn mollify_contract_check<T: Real, G: Gauge<T>>(f: &GridFunction<T>, width: T, r: T, gauge: &G) -> Result<(T, T)> {
    let g = mollify(f, width)?;
    Ok((luxemburg_norm(&g, r, gauge)?, luxemburg_norm(f, r, gauge)?))
}

/// Test-data generator: `mollify(f · 1_{|x| ≤ ρ_k}, w_k)` along a schedule of
/// `(ρ_k, w_k)`; smooth, compactly supported approximants of `f`.
pub fn density_approximants<T: Real>(f: &GridFunction<T>, schedule: &[(T, T)]) -> Result<Vec<GridFunction<T>>> {
    let spec = *f.spec();
    schedule
        .iter()
        .map(|&(rho, w)| {
            let cut: Vec<T> = (0..f.len())
                .map(|i| {
                    let c = spec.coords(i);
                    if crate::scalar::norm(&c[..spec.dim()]) <= rho {
                        f.get(i)
                    } else {
                        T::zero()
                    }
                })
                .collect();
            mollify(&GridFunction::new(spec, cut)?, w)
        })
        .collect()
}
