//! Convex Hamiltonians with at most quadratic growth and their convex conjugates.
//!
//! The conjugate `L(λ) = sup_x (⟨λ,x⟩ − H(x))` takes values in `[0, +∞]`;
//! `+∞` is represented by `T::infinity()`.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Real};

/// Piecewise-linear convex Hamiltonian in one variable, extended linearly
/// beyond the first and last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable<T> {
    p: Vec<T>,
    h: Vec<T>,
}

impl<T: Real> SampledTable<T> {
    pub fn new(p: Vec<T>, h: Vec<T>) -> Result<Self> {
        if p.len() != h.len() || p.len() < 3 {
            return Err(Error::InvalidHamiltonian(
                "sampled table needs at least three (p, value) pairs".into(),
            ));
        }
        if p.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidHamiltonian("p must be strictly increasing".into()));
        }
        if p.iter().chain(&h).any(|v| !v.is_finite()) {
            return Err(Error::InvalidHamiltonian("non-finite sample".into()));
        }
        if !(p[0] <= T::zero() && *p.last().unwrap() >= T::zero()) {
            return Err(Error::InvalidHamiltonian("samples must bracket p = 0".into()));
        }
        let table = Self { p, h };
        let slopes = table.slopes();
        let tol = T::lit(1e-10);
        for (k, w) in slopes.windows(2).enumerate() {
            if w[1] < w[0] - tol * (T::one() + w[0].abs()) {
                return Err(Error::NotConvex(table.p[k + 1].to_f64_lossy()));
            }
        }
        Ok(table)
    }

    /// Reads `p,value` rows (header optional).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut p = Vec::new();
        let mut h = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('p')) {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<T> {
                let s = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: expected p,value", lineno + 1)))?;
                s.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            p.push(next()?);
            h.push(next()?);
        }
        Self::new(p, h)
    }

    fn slopes(&self) -> Vec<T> {
        self.p
            .windows(2)
            .zip(self.h.windows(2))
            .map(|(p, h)| (h[1] - h[0]) / (p[1] - p[0]))
            .collect()
    }

    pub fn points(&self) -> &[T] {
        &self.p
    }

    pub fn values(&self) -> &[T] {
        &self.h
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.p.len();
        let k = match self.p.iter().position(|&p| p > x) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => n - 2,
        };
        let (p0, p1) = (self.p[k], self.p[k + 1]);
        let (h0, h1) = (self.h[k], self.h[k + 1]);
        h0 + (h1 - h0) * (x - p0) / (p1 - p0)
    }

    /// Exact conjugate by a vertex scan; infinite outside the range of slopes.
    pub fn conjugate(&self, lambda: T) -> T {
        let s = self.slopes();
        if lambda < s[0] || lambda > *s.last().unwrap() {
            return T::infinity();
        }
        self.p
            .iter()
            .zip(&self.h)
            .map(|(&p, &h)| lambda * p - h)
            .fold(T::neg_infinity(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianKind<T> {
    /// `H ≡ 0`; the conjugate is `0` at the origin and `+∞` elsewhere.
    Zero,
    /// `H(p) = c|p|²/2`.
    Quadratic { c: T },
    /// `H(p) = a|p|^q` with `1 ≤ q ≤ 2`.
    Power { a: T, q: T },
    /// Convex piecewise-linear interpolation of user samples (one dimension only).
    Sampled(SampledTable<T>),
}

/// Value of the convex conjugate together with whether the defining
/// supremum was attained strictly inside the search box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateValue<T> {
    pub value: T,
    pub attained: bool,
}

/// A convex Hamiltonian `H` with `|H(x)| ≤ K(|x| + |x|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian<T> {
    kind: HamiltonianKind<T>,
    growth_constant: T,
}

impl<T: Real> Hamiltonian<T> {
    pub fn zero() -> Self {
        Self { kind: HamiltonianKind::Zero, growth_constant: T::zero() }
    }

    pub fn quadratic(c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidHamiltonian(format!("quadratic coefficient {c} must be positive")));
        }
        Ok(Self { kind: HamiltonianKind::Quadratic { c }, growth_constant: c / T::lit(2.0) })
    }

    pub fn power(a: T, q: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidHamiltonian(format!("power coefficient {a} must be positive")));
        }
        if !(q >= T::one() && q <= T::lit(2.0)) {
            return Err(Error::InvalidHamiltonian(format!("exponent {q} outside [1, 2]")));
        }
        // |p|^q ≤ |p| + |p|² for q ∈ [1, 2].
        Ok(Self { kind: HamiltonianKind::Power { a, q }, growth_constant: a })
    }

    pub fn sampled(table: SampledTable<T>) -> Result<Self> {
        let at_zero = table.eval(T::zero());
        let scale = table.values().iter().fold(T::one(), |m, v| m.max(v.abs()));
        if at_zero.abs() > T::lit(1e-12) * scale {
            return Err(Error::InvalidHamiltonian(format!("H(0) = {at_zero}, must vanish")));
        }
        let mut h = Self { kind: HamiltonianKind::Sampled(table), growth_constant: T::zero() };
        h.growth_constant = h
            .growth_check_points()
            .into_iter()
            .filter(|x| *x != T::zero())
            .map(|x| h.eval(&[x]).abs() / (x.abs() + x * x))
            .fold(T::zero(), T::max);
        Ok(h)
    }

    /// Replaces the growth constant after checking the bound on the check points.
    pub fn with_growth_constant(mut self, k: T) -> Result<Self> {
        if !(k >= T::zero()) {
            return Err(Error::InvalidHamiltonian(format!("growth constant {k} must be nonnegative")));
        }
        let slack = T::lit(1e-12);
        for x in self.growth_check_points() {
            let bound = k * (x.abs() + x * x);
            if self.eval(&[x]).abs() > bound * (T::one() + slack) + slack {
                return Err(Error::GrowthBound { x: x.to_f64_lossy(), k: k.to_f64_lossy() });
            }
        }
        self.growth_constant = k;
        Ok(self)
    }

    fn growth_check_points(&self) -> Vec<T> {
        let mut pts: Vec<T> = (-60..=40)
            .map(|k| T::lit(10f64.powf(k as f64 / 20.0)))
            .flat_map(|x| [x, -x])
            .collect();
        if let HamiltonianKind::Sampled(t) = &self.kind {
            for w in t.points().windows(2) {
                for j in 0..8 {
                    let s = T::from_usize_lossy(j) / T::lit(8.0);
                    pts.push(w[0] + (w[1] - w[0]) * s);
                }
            }
            pts.push(*t.points().last().unwrap());
        }
        pts
    }

    pub fn kind(&self) -> &HamiltonianKind<T> {
        &self.kind
    }

    /// The constant `K` of the growth bound.
    pub fn growth_constant(&self) -> T {
        self.growth_constant
    }

    pub fn supports_dim(&self, dim: usize) -> bool {
        !matches!(self.kind, HamiltonianKind::Sampled(_)) || dim == 1
    }

    /// `H(p)`; sampled Hamiltonians read only `p[0]`.
    pub fn eval(&self, p: &[T]) -> T {
        match &self.kind {
            HamiltonianKind::Zero => T::zero(),
            HamiltonianKind::Quadratic { c } => {
                let r = norm(p);
                *c * r * r / T::lit(2.0)
            }
            HamiltonianKind::Power { a, q } => *a * norm(p).powf(*q),
            HamiltonianKind::Sampled(t) => {
                debug_assert_eq!(p.len(), 1);
                t.eval(p[0])
            }
        }
    }

    /// Exact conjugate `L(λ)`: closed form, or a vertex scan for sampled tables.
    pub fn conjugate(&self, lambda: &[T]) -> T {
        let r = norm(lambda);
        match &self.kind {
            HamiltonianKind::Zero => {
                if r == T::zero() {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
            HamiltonianKind::Quadratic { c } => r * r / (*c + *c),
            HamiltonianKind::Power { a, q } => {
                if *q == T::one() {
                    if r <= *a {
                        T::zero()
                    } else {
                        T::infinity()
                    }
                } else {
                    let q1 = *q - T::one();
                    (q1 / *q) * r.powf(*q / q1) * (*a * *q).powf(-T::one() / q1)
                }
            }
            HamiltonianKind::Sampled(t) => t.conjugate(lambda[0]),
        }
    }

    /// Default x-search radius `4(|λ| + K) + 1` for brute-force conjugates.
    pub fn default_search_radius(&self, lambda: &[T]) -> T {
        T::lit(4.0) * (norm(lambda) + self.growth_constant) + T::one()
    }

    /// Convex conjugate at `λ`, searching `x` in `[-radius, radius]^d`.
    ///
    /// Closed-form kinds return the analytic value. Sampled kinds scan an
    /// x-grid plus the table vertices inside the box; a maximizer on the box
    /// boundary with positive outward slope yields `+∞`.
    pub fn legendre_conjugate(&self, lambda: &[T], radius: T, samples: usize) -> Result<ConjugateValue<T>> {
        validate_search(radius, samples)?;
        match &self.kind {
            HamiltonianKind::Sampled(_) => brute_force_conjugate(|x| self.eval(x), lambda, radius, samples, self.vertices()),
            _ => {
                let value = self.conjugate(lambda);
                Ok(ConjugateValue { value, attained: value.is_finite() })
            }
        }
    }

    fn vertices(&self) -> &[T] {
        match &self.kind {
            HamiltonianKind::Sampled(t) => t.points(),
            _ => &[],
        }
    }
}

fn validate_search<T: Real>(radius: T, samples: usize) -> Result<()> {
    if !(radius > T::zero()) || samples < 64 {
        return Err(Error::InvalidSearch { min: 64 });
    }
    Ok(())
}

/// Brute-force `sup_x (⟨λ,x⟩ − H(x))` over a uniform grid of the box
/// `[-radius, radius]^d` (`samples` nodes per axis, forced odd so that the
/// origin is a node) plus optional extra 1D candidate points.
pub fn brute_force_conjugate<T, H>(
    h: H,
    lambda: &[T],
    radius: T,
    samples: usize,
    extra: &[T],
) -> Result<ConjugateValue<T>>
where
    T: Real,
    H: Fn(&[T]) -> T,
{
    validate_search(radius, samples)?;
    let n = samples | 1;
    let step = (radius + radius) / T::from_usize_lossy(n - 1);
    let mid = (n / 2) as i64;
    let coord = |i: usize| T::from_i64(i as i64 - mid).unwrap() * step;
    let d = lambda.len();
    let mut best = T::neg_infinity();
    let mut arg = [T::zero(); 2];
    let mut consider = |x: [T; 2]| {
        let v = dot(lambda, &x[..d]) - h(&x[..d]);
        if v > best {
            best = v;
            arg = x;
        }
    };
    if d == 1 {
        for i in 0..n {
            consider([coord(i), T::zero()]);
        }
        for &x in extra.iter().filter(|x| x.abs() <= radius) {
            consider([x, T::zero()]);
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                consider([coord(i), coord(j)]);
            }
        }
    }
    let on_boundary = arg[..d].iter().any(|c| c.abs() >= radius - step * T::lit(1e-9));
    if on_boundary {
        let r = norm(&arg[..d]);
        let mut u = [T::zero(); 2];
        for k in 0..d {
            u[k] = arg[k] / r;
        }
        let delta = radius * T::lit(1e-6);
        let mut out = arg;
        for k in 0..d {
            out[k] = arg[k] + delta * u[k];
        }
        let slope = dot(lambda, &u[..d]) - (h(&out[..d]) - h(&arg[..d])) / delta;
        if slope > T::lit(1e-9) * (T::one() + norm(lambda)) {
            return Ok(ConjugateValue { value: T::infinity(), attained: false });
        }
    }
    Ok(ConjugateValue { value: best, attained: !on_boundary })
}

/// The conjugate tabulated on a uniform λ-grid of `[-box, box]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateTable<T> {
    dim: usize,
    lambda_box: T,
    samples: usize,
    values: Vec<T>,
    attained: Vec<bool>,
    argmin: usize,
}

impl<T: Real> ConjugateTable<T> {
    /// One-dimensional table with `samples` nodes (odd, so that λ = 0 is a node).
    pub fn build(h: &Hamiltonian<T>, lambda_box: T, samples: usize) -> Result<Self> {
        Self::build_in(h, 1, lambda_box, samples)
    }

    pub fn build_in(h: &Hamiltonian<T>, dim: usize, lambda_box: T, samples: usize) -> Result<Self> {
        if samples < 64 {
            return Err(Error::InvalidSearch { min: 64 });
        }
        if samples % 2 == 0 || !(lambda_box > T::zero()) {
            return Err(Error::InvalidParameter(
                "lambda grid must be symmetric with an odd sample count so that λ = 0 is a node".into(),
            ));
        }
        if !h.supports_dim(dim) {
            return Err(Error::InvalidParameter(format!("hamiltonian does not support dimension {dim}")));
        }
        let mut table = Self {
            dim,
            lambda_box,
            samples,
            values: Vec::new(),
            attained: Vec::new(),
            argmin: 0,
        };
        let total = samples.pow(dim as u32);
        for i in 0..total {
            let lam = table.lambda(i);
            let lam = &lam[..dim];
            let cv = h.legendre_conjugate(lam, h.default_search_radius(lam), 257)?;
            table.values.push(cv.value);
            table.attained.push(cv.attained);
        }
        table.argmin = (0..total)
            .min_by(|&a, &b| table.values[a].partial_cmp(&table.values[b]).unwrap())
            .unwrap();
        table.check_invariants(h.growth_constant())?;
        Ok(table)
    }

    fn check_invariants(&self, k: T) -> Result<()> {
        let tol = T::lit(1e-8);
        let min = self.values[self.argmin];
        if min.abs() > tol {
            return Err(Error::ConjugateInvariant(format!("min L = {min}, expected 0")));
        }
        for (i, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            if v < -tol {
                return Err(Error::ConjugateInvariant(format!("L = {v} < 0 at node {i}")));
            }
            let lam = self.lambda(i);
            let r = norm(&lam[..self.dim]);
            if k > T::zero() && r >= k + k && v < r * r / (T::lit(16.0) * k) - tol {
                return Err(Error::ConjugateInvariant(format!(
                    "L({}) = {v} below the coercivity bound |λ|²/(16K)",
                    r
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> T {
        (self.lambda_box + self.lambda_box) / T::from_usize_lossy(self.samples - 1)
    }

    /// λ-coordinates of node `i` (lexicographic order for `d = 2`).
    pub fn lambda(&self, i: usize) -> [T; 2] {
        let mid = (self.samples / 2) as i64;
        let c = |k: usize| T::from_i64(k as i64 - mid).unwrap() * self.spacing();
        if self.dim == 1 {
            [c(i), T::zero()]
        } else {
            [c(i / self.samples), c(i % self.samples)]
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn attained_flags(&self) -> &[bool] {
        &self.attained
    }

    /// A minimizer `λ₀` of `L` among the nodes.
    pub fn lambda0(&self) -> [T; 2] {
        self.lambda(self.argmin)
    }

    pub fn min_value(&self) -> T {
        self.values[self.argmin]
    }

    /// `sup_λ (⟨x,λ⟩ − L(λ))` over the finite table entries.
    pub fn biconjugate(&self, x: &[T]) -> T {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| dot(x, &self.lambda(i)[..self.dim]) - v)
            .fold(T::neg_infinity(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled_abs_plus_quadratic() -> Hamiltonian<f64> {
        let p: Vec<f64> = (-1000..=1000).map(|k| k as f64 / 100.0).collect();
        let h = p.iter().map(|x| x * x / 2.0 + x.abs()).collect();
        Hamiltonian::sampled(SampledTable::new(p, h).unwrap()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let q = Hamiltonian::quadratic(1.0_f64).unwrap();
        assert_eq!(q.eval(&[0.0]), 0.0);
        assert_eq!(q.eval(&[2.0]), 2.0);
        let p = Hamiltonian::power(1.0_f64, 1.0).unwrap();
        assert_eq!(p.eval(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn conjugate_examples() {
        let q = Hamiltonian::quadratic(1.0_f64).unwrap();
        let v = q.legendre_conjugate(&[3.0], 20.0, 64).unwrap();
        assert_eq!(v, ConjugateValue { value: 4.5, attained: true });

        let p = Hamiltonian::power(1.0_f64, 1.0).unwrap();
        assert_eq!(p.legendre_conjugate(&[0.5], 10.0, 64).unwrap().value, 0.0);
        let far = p.legendre_conjugate(&[2.0], 10.0, 64).unwrap();
        assert!(far.value.is_infinite() && !far.attained);

        let s = sampled_abs_plus_quadratic();
        let lam = [3.0];
        let v = s.legendre_conjugate(&lam, s.default_search_radius(&lam), 801).unwrap();
        assert!(v.attained);
        assert!((v.value - 2.0).abs() < 1e-10, "{}", v.value);
    }

    #[test]
    fn brute_force_matches_closed_forms() {
        let p = Hamiltonian::power(1.0_f64, 1.0).unwrap();
        for lam in [0.0, 0.25, 0.5, 0.99] {
            let bf = brute_force_conjugate(|x| p.eval(x), &[lam], 10.0, 2001, &[]).unwrap();
            assert!(bf.value.abs() < 1e-12 && bf.attained);
        }
        for lam in [1.5, 2.0, -3.0] {
            let bf = brute_force_conjugate(|x| p.eval(x), &[lam], 10.0, 2001, &[]).unwrap();
            assert!(bf.value.is_infinite());
        }
        let q = Hamiltonian::power(0.7_f64, 1.5).unwrap();
        for lam in [-2.0, -0.3, 0.4, 1.7] {
            let bf = brute_force_conjugate(|x| q.eval(x), &[lam], 40.0, 400_001, &[]).unwrap();
            assert!((bf.value - q.conjugate(&[lam])).abs() < 1e-6, "λ={lam}");
        }
        let q2 = Hamiltonian::quadratic(2.0_f64).unwrap();
        let bf = brute_force_conjugate(|x| q2.eval(x), &[1.0, -2.0], 8.0, 801, &[]).unwrap();
        assert!((bf.value - 5.0 / 4.0).abs() < 1e-3);
    }

    #[test]
    fn search_validation() {
        let q = Hamiltonian::quadratic(1.0_f64).unwrap();
        assert!(q.legendre_conjugate(&[1.0], 0.0, 64).is_err());
        assert!(q.legendre_conjugate(&[1.0], 1.0, 63).is_err());
    }

    #[test]
    fn tables() {
        let q = Hamiltonian::quadratic(1.0_f64).unwrap();
        let t = ConjugateTable::build(&q, 8.0, 257).unwrap();
        assert_eq!(t.lambda0()[0], 0.0);
        assert_eq!(t.min_value(), 0.0);

        let p = Hamiltonian::power(1.0_f64, 1.0).unwrap();
        let t = ConjugateTable::build(&p, 4.0, 257).unwrap();
        for (i, &v) in t.values().iter().enumerate() {
            let lam = t.lambda(i)[0];
            if lam.abs() <= 1.0 {
                assert_eq!(v, 0.0);
            } else {
                assert!(v.is_infinite());
            }
        }

        let q2 = Hamiltonian::quadratic(2.0_f64).unwrap();
        let t = ConjugateTable::build(&q2, 8.0, 257).unwrap();
        for (i, &v) in t.values().iter().enumerate() {
            let lam = t.lambda(i)[0];
            assert!((v - lam * lam / 4.0).abs() < 1e-10);
        }
        assert!(ConjugateTable::build(&q2, 8.0, 256).is_err());
    }

    #[test]
    fn growth_constant_checks() {
        let q = Hamiltonian::quadratic(1.0_f64).unwrap();
        assert_eq!(q.growth_constant(), 0.5);
        assert!(q.clone().with_growth_constant(1.0).is_ok());
        assert!(matches!(q.with_growth_constant(0.4), Err(Error::GrowthBound { .. })));
        let s = sampled_abs_plus_quadratic();
        assert!((s.growth_constant() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn sampled_validation() {
        assert!(matches!(
            SampledTable::new(vec![-1.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]),
            Err(Error::NotConvex(_))
        ));
        assert!(SampledTable::new(vec![-1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]).is_err());
        let t = SampledTable::new(vec![-1.0, 0.0, 1.0], vec![1.0, 0.5, 1.0]).unwrap();
        assert!(Hamiltonian::sampled(t).is_err());
        let csv = "p,value\n-2,2\n-1,0.5\n0,0\n1,0.5\n2,2\n";
        let t = SampledTable::<f64>::read_csv(csv.as_bytes()).unwrap();
        let h = Hamiltonian::sampled(t).unwrap();
        assert_eq!(h.eval(&[1.5]), 1.25);
        assert_eq!(h.eval(&[3.0]), 3.5);
        assert!(h.conjugate(&[1.6]).is_infinite());
        assert!(!h.supports_dim(2));
    }
}
