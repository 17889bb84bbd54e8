//! Heat-kernel expectations `E[g(x + W_t)]` by renormalized discrete Gaussian
//! quadrature, plus the Brownian tail and Hölder shift estimates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::scalar::{norm, Real};

/// Default quadrature window, in standard deviations.
pub const DEFAULT_TRUNCATION: f64 = 8.0;

/// Gaussian kernel of variance `t` per coordinate, truncated at
/// `truncation_multiple · √t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussKernel<T> {
    t: T,
    truncation_multiple: T,
    dim: usize,
}

impl<T: Real> GaussKernel<T> {
    pub fn new(t: T, truncation_multiple: T, dim: usize) -> Result<Self> {
        if t < T::zero() || !t.is_finite() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        if !(truncation_multiple >= T::lit(6.0)) {
            return Err(Error::InvalidParameter(format!(
                "truncation multiple {truncation_multiple} must be at least 6"
            )));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in {{1, 2}}")));
        }
        Ok(Self { t, truncation_multiple, dim })
    }

    pub fn with_default_truncation(t: T, dim: usize) -> Result<Self> {
        Self::new(t, T::lit(DEFAULT_TRUNCATION), dim)
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn truncation_multiple(&self) -> T {
        self.truncation_multiple
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 1D lattice stencil for a kernel centred `shift` to the right of a node.
    pub fn stencil(&self, spacing: T, shift: T) -> Stencil<T> {
        Stencil::gaussian(spacing, self.t, self.truncation_multiple, shift)
    }
}

/// Nonnegative weights on consecutive lattice offsets `lo, lo + 1, …`
/// (relative to a base node), summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil<T> {
    pub lo: isize,
    pub weights: Vec<T>,
}

impl<T: Real> Stencil<T> {
    pub fn identity() -> Self {
        Self { lo: 0, weights: vec![T::one()] }
    }

    /// Renormalized samples of `exp(-(k h - shift)² / 2t)` over every lattice
    /// offset `k` with `|k h - shift| ≤ max(multiple·√t, h)`.
    ///
    /// Offsets beyond the grid still take part in the normalization; the
    /// function being integrated is zero there.
    pub fn gaussian(spacing: T, t: T, multiple: T, shift: T) -> Self {
        if t == T::zero() && shift == T::zero() {
            return Self::identity();
        }
        let window = (multiple * t.sqrt()).max(spacing);
        let lo = ((shift - window) / spacing).ceil().to_isize().unwrap();
        let hi = ((shift + window) / spacing).floor().to_isize().unwrap();
        let dist = |k: isize| T::from_isize(k).unwrap() * spacing - shift;
        let dmin2 = (lo..=hi).map(|k| dist(k) * dist(k)).fold(T::infinity(), T::min);
        let two_t = t + t;
        let raw: Vec<T> = (lo..=hi)
            .map(|k| {
                let d2 = dist(k) * dist(k);
                if t == T::zero() {
                    if d2 == dmin2 {
                        T::one()
                    } else {
                        T::zero()
                    }
                } else {
                    (-(d2 - dmin2) / two_t).exp()
                }
            })
            .collect();
        let total = raw.iter().fold(T::zero(), |a, &w| a + w);
        Self { lo, weights: raw.into_iter().map(|w| w / total).collect() }
    }

    /// Largest distance (in nodes) from the base node to a weighted offset.
    pub fn reach(&self) -> usize {
        let hi = self.lo + self.weights.len() as isize - 1;
        self.lo.unsigned_abs().max(hi.unsigned_abs())
    }

    /// `Σ_j w_j · line[pad + base + lo + j]` for a zero-padded line with
    /// `pad ≥ reach()`.
    #[inline]
    pub fn apply_padded(&self, line: &[T], pad: usize, base: usize) -> T {
        let start = (pad + base) as isize + self.lo;
        let start = start as usize;
        dot4(&self.weights, &line[start..start + self.weights.len()])
    }

    /// `Σ_j w_j · src(base + lo + j)` with `src` zero outside `0..n`.
    #[inline]
    pub fn apply_at<F: Fn(usize) -> T>(&self, base: isize, n: usize, src: F) -> T {
        let mut acc = T::zero();
        for (j, &w) in self.weights.iter().enumerate() {
            let k = base + self.lo + j as isize;
            if k >= 0 && (k as usize) < n {
                acc = acc + w * src(k as usize);
            }
        }
        acc
    }
}

/// Convolves `values` (laid out on `spec`) with a stencil along one axis.
pub(crate) fn convolve_axis<T: Real>(values: &[T], spec: &GridSpec<T>, axis: usize, stencil: &Stencil<T>) -> Vec<T> {
    let n = spec.nodes_per_axis();
    let pad = stencil.reach();
    let mut out = vec![T::zero(); values.len()];
    if spec.dim() == 1 {
        let line = padded(values.iter().copied(), n, pad);
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = stencil.apply_padded(&line, pad, i);
        });
        return out;
    }
    let mut lines = vec![T::zero(); n * (n + 2 * pad)];
    lines.par_chunks_mut(n + 2 * pad).enumerate().for_each(|(l, line)| {
        for k in 0..n {
            line[pad + k] = if axis == 0 { values[k * n + l] } else { values[l * n + k] };
        }
    });
    let w = n + 2 * pad;
    if axis == 1 {
        out.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
            let line = &lines[ix * w..(ix + 1) * w];
            for (iy, o) in row.iter_mut().enumerate() {
                *o = stencil.apply_padded(line, pad, iy);
            }
        });
    } else {
        out.par_chunks_mut(n).enumerate().for_each(|(ix, row)| {
            for (iy, o) in row.iter_mut().enumerate() {
                *o = stencil.apply_padded(&lines[iy * w..(iy + 1) * w], pad, ix);
            }
        });
    }
    out
}

/// Copies `n` values into a buffer with `pad` zeros on each side.
pub(crate) fn padded<T: Real, I: Iterator<Item = T>>(src: I, n: usize, pad: usize) -> Vec<T> {
    let mut line = vec![T::zero(); n + 2 * pad];
    for (o, v) in line[pad..pad + n].iter_mut().zip(src) {
        *o = v;
    }
    line
}

/// Dot product in four interleaved partial sums (fixed order, so the result
/// does not depend on scheduling).
#[inline]
pub(crate) fn dot4<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let (ca, ra) = (a.chunks_exact(4), a.len() % 4);
    let head = a.len() - ra;
    for (x, y) in ca.zip(b.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for k in head..a.len() {
        tail = tail + a[k] * b[k];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail
}

/// `log Σ_k w_k exp(a[i + lo + k])` along one axis, with `a = outside` off the grid.
pub(crate) fn lse_convolve_axis<T: Real>(a: &[T], spec: &GridSpec<T>, axis: usize, st: &Stencil<T>, outside: T) -> Vec<T> {
    let n = spec.nodes_per_axis();
    let stride = if spec.dim() == 2 && axis == 0 { n } else { 1 };
    let mut out = vec![T::zero(); a.len()];
    out.par_iter_mut().enumerate().for_each(|(idx, o)| {
        let (pos, base) = if stride == 1 { (idx % n, idx - idx % n) } else { (idx / n, idx % n) };
        let at = |k: isize| -> T {
            if k < 0 || k as usize >= n {
                outside
            } else {
                a[base + k as usize * stride]
            }
        };
        let first = pos as isize + st.lo;
        let mut m = T::neg_infinity();
        for j in 0..st.weights.len() {
            m = m.max(at(first + j as isize));
        }
        let mut s = T::zero();
        for (j, &w) in st.weights.iter().enumerate() {
            s = s + w * (at(first + j as isize) - m).exp();
        }
        *o = if m == T::neg_infinity() { m } else { m + s.ln() };
    });
    out
}

/// Discrete heat flow `E[f(x + W_t)]` with the given kernel; `t = 0` is the identity.
pub fn heat_step_with<T: Real>(f: &GridFunction<T>, kernel: &GaussKernel<T>) -> Result<GridFunction<T>> {
    let spec = *f.spec();
    if kernel.t() == T::zero() {
        return Ok(f.clone());
    }
    let st = kernel.stencil(spec.spacing(), T::zero());
    let mut v = convolve_axis(f.values(), &spec, 0, &st);
    if spec.dim() == 2 {
        v = convolve_axis(&v, &spec, 1, &st);
    }
    GridFunction::new(spec, v)
}

/// [`heat_step_with`] using the default truncation window.
pub fn heat_step<T: Real>(f: &GridFunction<T>, t: T) -> Result<GridFunction<T>> {
    let kernel = GaussKernel::with_default_truncation(t, f.spec().dim())?;
    heat_step_with(f, &kernel)
}

/// Quadrature nodes per standard deviation used by [`gauss_expectation`].
const NODES_PER_SIGMA: f64 = 16.0;

/// `E[g(x + W_t)]` for a scalar function handle, by renormalized Gaussian
/// quadrature on a lattice of spacing `√t / 16` (tensor product in 2D).
pub fn gauss_expectation<T, G>(g: G, x: &[T], kernel: &GaussKernel<T>) -> Result<T>
where
    T: Real,
    G: Fn(&[T]) -> T,
{
    let d = x.len();
    let t = kernel.t();
    if t == T::zero() {
        let v = g(x);
        return finite(v, 0);
    }
    let delta = t.sqrt() / T::lit(NODES_PER_SIGMA);
    let st = Stencil::gaussian(delta, t, kernel.truncation_multiple(), T::zero());
    let off = |k: usize| T::from_isize(st.lo + k as isize).unwrap() * delta;
    let mut acc = T::zero();
    let mut y = [T::zero(); 2];
    for (a, &wa) in st.weights.iter().enumerate() {
        y[0] = x[0] + off(a);
        if d == 1 {
            acc = acc + wa * finite(g(&y[..1]), a)?;
        } else {
            for (b, &wb) in st.weights.iter().enumerate() {
                y[1] = x[1] + off(b);
                acc = acc + wa * wb * finite(g(&y[..2]), a)?;
            }
        }
    }
    Ok(acc)
}

fn finite<T: Real>(v: T, index: usize) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { index, value: v.to_f64_lossy() })
    }
}

/// `E[ψ(f(c + W_t))]` for a grid function at an arbitrary centre `c`, using
/// renormalized weights on the grid lattice (zero extension).
pub fn grid_expectation<T, P>(f: &GridFunction<T>, center: &[T], kernel: &GaussKernel<T>, psi: P) -> T
where
    T: Real,
    P: Fn(T) -> T,
{
    let spec = f.spec();
    let h = spec.spacing();
    let n = spec.nodes_per_axis();
    let locate = |c: T| {
        let pos = (c + spec.half_width()) / h;
        let base = pos.floor();
        (base.to_isize().unwrap(), (pos - base) * h)
    };
    let (bx, sx) = locate(center[0]);
    let stx = kernel.stencil(h, sx);
    if spec.dim() == 1 {
        return stx.apply_at(bx, n, |k| psi(f.get(k)));
    }
    let (by, sy) = locate(center[1]);
    let sty = kernel.stencil(h, sy);
    stx.apply_at(bx, n, |ix| sty.apply_at(by, n, |iy| psi(f.get(ix * n + iy))))
}

/// `P(|W_t| ≥ r)` for a `dim`-dimensional Brownian motion.
pub fn brownian_tail<T: Real>(r: T, t: T, dim: usize) -> T {
    let ln = ln_brownian_tail(r, t, dim);
    let v = ln.exp();
    if v < T::lit(1e-300) {
        T::zero()
    } else {
        v
    }
}

/// `ln P(|W_t| ≥ r)`, finite far into the tail.
pub fn ln_brownian_tail<T: Real>(r: T, t: T, dim: usize) -> T {
    if r <= T::zero() {
        return T::zero();
    }
    if t <= T::zero() {
        return T::neg_infinity();
    }
    match dim {
        1 => {
            let z = (r / (t + t).sqrt()).to_f64_lossy();
            T::lit(ln_erfc(z))
        }
        _ => -(r * r) / (t + t),
    }
}

/// `ln erfc(z)` for `z ≥ 0`, switching to the asymptotic series in the far tail.
pub fn ln_erfc(z: f64) -> f64 {
    if z < 20.0 {
        return statrs::function::erf::erfc(z).ln();
    }
    let z2 = z * z;
    let inv = 1.0 / (2.0 * z2);
    let series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv.powi(3) + 105.0 * inv.powi(4);
    -z2 - (z * std::f64::consts::PI.sqrt()).ln() + series.ln()
}

/// Whether `P(|W_t| ≥ r) ≤ t·e^{-r/t}`, compared in log space.
pub fn tail_bound_holds<T: Real>(r: T, t: T, dim: usize) -> bool {
    ln_brownian_tail(r, t, dim) <= t.ln() - r / t
}

/// `ln(P(|W_t| ≥ r) · Φ(c/t))` along `t = 2^{-k}` with `r = max(r₀, 2bc)`.
///
/// `ln_young` evaluates `ln Φ`. A decreasing sequence that heads to `-∞`
/// witnesses `P(|W_t| ≥ r) Φ(c/t) → 0`.
pub fn tail_young_witness<T, F>(c: T, b: T, r0: T, ks: &[u32], dim: usize, ln_young: F) -> Vec<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let r = r0.max(T::lit(2.0) * b * c);
    ks.iter()
        .map(|&k| {
            let t = T::lit(0.5f64.powi(k as i32));
            ln_brownian_tail(r, t, dim) + ln_young(c / t)
        })
        .collect()
}

/// Both sides of `E|f(x+W_t+λt)| ≤ e^{(q−1)|λ|²t/2} E[|f|^p(x+W_t)]^{1/p}`.
pub fn holder_shift_check<T: Real>(
    f: &GridFunction<T>,
    x: &[T],
    lambda: &[T],
    t: T,
    p: T,
) -> Result<(T, T)> {
    if !(p > T::one()) {
        return Err(Error::InvalidParameter(format!("Hölder exponent p = {p} must exceed 1")));
    }
    let kernel = GaussKernel::with_default_truncation(t, f.spec().dim())?;
    let q = p / (p - T::one());
    let d = f.spec().dim();
    let mut shifted = [T::zero(); 2];
    for k in 0..d {
        shifted[k] = x[k] + lambda[k] * t;
    }
    let lhs = grid_expectation(f, &shifted[..d], &kernel, |v| v.abs());
    let moment = grid_expectation(f, &x[..d], &kernel, |v| v.abs().powf(p));
    let lam = norm(&lambda[..d]);
    let rhs = ((q - T::one()) * lam * lam * t / T::lit(2.0)).exp() * moment.powf(T::one() / p);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> GridSpec<f64> {
        GridSpec::line(10.0, 1024).unwrap()
    }

    #[test]
    fn stencil_normalized() {
        for &(t, shift) in &[(1.0, 0.0), (0.01, 0.003), (1e-6, 0.004), (0.25, 0.0099)] {
            let s = Stencil::gaussian(0.01, t, 8.0, shift);
            let total: f64 = s.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            assert!(s.weights.iter().all(|&w| w >= 0.0));
        }
        assert_eq!(Stencil::<f64>::gaussian(0.1, 0.0, 8.0, 0.0), Stencil::identity());
    }

    #[test]
    fn heat_step_examples() {
        let s = line();
        let z = GridFunction::zeros(s);
        assert_eq!(heat_step(&z, 0.7).unwrap(), z);
        let f = GridFunction::from_fn(s, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        assert_eq!(heat_step(&f, 0.0).unwrap(), f);
        let g = heat_step(&f, 1.0).unwrap();
        let mid = s.mid();
        assert!((g.get(mid) - 0.5f64.sqrt()).abs() < 1e-6);
        for i in (0..s.len()).step_by(37) {
            let x = s.coords(i)[0];
            let exact = (-x * x / 4.0).exp() / 2f64.sqrt();
            assert!((g.get(i) - exact).abs() < 1e-6, "x = {x}");
        }
        assert!(matches!(heat_step(&f, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn heat_step_2d_matches_product() {
        let s = GridSpec::<f64>::square(6.0, 64).unwrap();
        let f = GridFunction::from_fn(s, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()).unwrap();
        let g = heat_step(&f, 0.5).unwrap();
        let c = s.flatten(s.mid(), s.mid());
        // Convolution of N(0,1) density shape with N(0,0.5): scale (1/1.5) per axis.
        assert!((g.get(c) - 1.0 / 1.5).abs() < 1e-6);
    }

    #[test]
    fn gauss_expectation_examples() {
        let k = GaussKernel::with_default_truncation(0.25, 1).unwrap();
        assert!((gauss_expectation(|_| 1.0, &[0.3], &k).unwrap() - 1.0_f64).abs() < 1e-15);
        assert!(gauss_expectation(|y| y[0], &[0.0], &k).unwrap().abs() < 1e-12);
        assert!((gauss_expectation(|y| y[0] * y[0], &[0.0], &k).unwrap() - 0.25).abs() < 1e-6);
        assert!(gauss_expectation(|_| f64::NAN, &[0.0], &k).is_err());
        let k2 = GaussKernel::with_default_truncation(0.5, 2).unwrap();
        let v: f64 = gauss_expectation(|y| y[0] * y[0] + y[1] * y[1], &[0.0, 0.0], &k2).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kernel_validation() {
        assert!(GaussKernel::new(1.0, 5.0, 1).is_err());
        assert!(GaussKernel::new(-1.0, 8.0, 1).is_err());
        assert!(GaussKernel::new(1.0, 8.0, 3).is_err());
    }

    #[test]
    fn tail_examples() {
        assert_eq!(brownian_tail(0.0, 0.3, 1), 1.0);
        assert_eq!(brownian_tail(0.0, 0.3, 2), 1.0);
        assert_eq!(brownian_tail(1.0, 1e-4, 1), 0.0);
        assert_eq!(brownian_tail(1.0, 1e-4, 2), 0.0);
        let v = brownian_tail(8.0, 0.1, 1);
        assert!(v <= 0.1 * (-80.0f64).exp());
        let exact = statrs::function::erf::erfc(8.0 / 0.2f64.sqrt());
        assert!((v - exact).abs() <= 1e-12 * exact);
        // Continuity of the log tail across the asymptotic switch.
        let a = ln_erfc(19.999_999);
        let b = ln_erfc(20.0);
        assert!((a - b).abs() < 1e-4);
    }

    #[test]
    fn holder_examples() {
        let s = GridSpec::line(8.0, 4096).unwrap();
        let z = GridFunction::zeros(s);
        assert_eq!(holder_shift_check(&z, &[0.0], &[1.0], 1.0, 2.0).unwrap(), (0.0, 0.0));
        assert!(holder_shift_check(&z, &[0.0], &[1.0], 1.0, 1.0).is_err());
    }
}
