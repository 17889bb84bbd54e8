//! Uniform grids on `[-X, X]^d` and sampled functions that vanish outside them.
//!
//! A [`GridSpec`] counts *intervals* per axis (a power of two), so every axis
//! carries an odd number of nodes and the origin is always a node. Values
//! outside the grid are taken to be zero.

use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{fmt17, Real};

/// Uniform tensor grid on `[-half_width, half_width]^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    half_width: T,
    intervals: usize,
}

impl<T: Real> GridSpec<T> {
    pub const MIN_INTERVALS: usize = 16;

    pub fn new(dim: usize, half_width: T, intervals: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        if intervals < Self::MIN_INTERVALS {
            return Err(Error::GridTooSmall {
                points: intervals + 1,
                required: Self::MIN_INTERVALS + 1,
            });
        }
        if !intervals.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("{intervals} intervals is not a power of two")));
        }
        Ok(Self { dim, half_width, intervals })
    }

    pub fn line(half_width: T, intervals: usize) -> Result<Self> {
        Self::new(1, half_width, intervals)
    }

    pub fn square(half_width: T, intervals: usize) -> Result<Self> {
        Self::new(2, half_width, intervals)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }

    #[inline]
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Nodes per axis (`intervals + 1`, always odd).
    #[inline]
    pub fn nodes_per_axis(&self) -> usize {
        self.intervals + 1
    }

    /// Total node count.
    #[inline]
    pub fn len(&self) -> usize {
        self.nodes_per_axis().pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> T {
        (self.half_width + self.half_width) / T::from_usize_lossy(self.intervals)
    }

    /// Index of the node at the origin along one axis.
    #[inline]
    pub fn mid(&self) -> usize {
        self.intervals / 2
    }

    /// Coordinate of node `i` along an axis; the middle node is exactly zero.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> T {
        let offset = i as i64 - self.mid() as i64;
        T::from_i64(offset).expect("small integer") * self.spacing()
    }

    /// Per-axis indices of a flat node index (x is the slow axis).
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        let n = self.nodes_per_axis();
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / n, idx % n]
        }
    }

    #[inline]
    pub fn flatten(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            ix * self.nodes_per_axis() + iy
        }
    }

    /// Coordinates of a node; only the first `dim` entries are meaningful.
    #[inline]
    pub fn coords(&self, idx: usize) -> [T; 2] {
        let [ix, iy] = self.unflatten(idx);
        if self.dim == 1 {
            [self.axis_coord(ix), T::zero()]
        } else {
            [self.axis_coord(ix), self.axis_coord(iy)]
        }
    }

    #[inline]
    pub fn is_interior(&self, idx: usize) -> bool {
        let last = self.intervals;
        let [ix, iy] = self.unflatten(idx);
        let ok = |i: usize| i > 0 && i < last;
        if self.dim == 1 {
            ok(ix)
        } else {
            ok(ix) && ok(iy)
        }
    }

    /// Trapezoid weight of a node (cell volume with halves on the boundary).
    #[inline]
    pub fn trapezoid_weight(&self, idx: usize) -> T {
        let h = self.spacing();
        let half = T::lit(0.5);
        let last = self.intervals;
        let axis = |i: usize| if i == 0 || i == last { half * h } else { h };
        let [ix, iy] = self.unflatten(idx);
        if self.dim == 1 {
            axis(ix)
        } else {
            axis(ix) * axis(iy)
        }
    }

    /// Lebesgue measure of the closed ball of radius `r` in this dimension.
    pub fn ball_volume(&self, r: T) -> T {
        if self.dim == 1 {
            r + r
        } else {
            T::PI() * r * r
        }
    }
}

/// A real function sampled at every node of a [`GridSpec`], zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    spec: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(spec: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::LengthMismatch { expected: spec.len(), got: values.len() });
        }
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value: v.to_f64_lossy() });
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec<T>) -> Self {
        Self { spec, values: vec![T::zero(); spec.len()] }
    }

    /// Samples `f` at every node; `f` receives a slice of `dim` coordinates.
    pub fn from_fn<F>(spec: GridSpec<T>, f: F) -> Result<Self>
    where
        F: Fn(&[T]) -> T,
    {
        let values = (0..spec.len())
            .map(|i| {
                let c = spec.coords(i);
                f(&c[..spec.dim()])
            })
            .collect();
        Self::new(spec, values)
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, idx: usize) -> T {
        self.values[idx]
    }

    /// Value at per-axis indices, zero outside the grid.
    #[inline]
    pub fn at(&self, ix: isize, iy: isize) -> T {
        let n = self.spec.nodes_per_axis() as isize;
        if ix < 0 || ix >= n {
            return T::zero();
        }
        if self.spec.dim() == 1 {
            return self.values[ix as usize];
        }
        if iy < 0 || iy >= n {
            return T::zero();
        }
        self.values[ix as usize * n as usize + iy as usize]
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Result<Self> {
        Self::new(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(T, T) -> T>(&self, other: &Self, f: F) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.spec, values)
    }

    pub fn abs(&self) -> Self {
        Self { spec: self.spec, values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { spec: self.spec, values: self.values.iter().map(|&v| c * v).collect() }
    }

    /// `alpha * self + beta * other`.
    pub fn lincomb(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        self.zip_with(other, |a, b| alpha * a + beta * b)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= T::zero())
    }

    /// Largest node-wise amount by which `self` exceeds `other`.
    pub fn max_excess_over(&self, other: &Self) -> T {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::neg_infinity(), |m, (&a, &b)| m.max(a - b))
    }

    /// `max |f|` over all nodes.
    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Central-difference gradient at a node (zero extension at the boundary).
    pub fn gradient_at(&self, idx: usize) -> [T; 2] {
        let [ix, iy] = self.spec.unflatten(idx);
        let (ix, iy) = (ix as isize, iy as isize);
        let two_h = self.spec.spacing() + self.spec.spacing();
        let gx = (self.at(ix + 1, iy) - self.at(ix - 1, iy)) / two_h;
        if self.spec.dim() == 1 {
            [gx, T::zero()]
        } else {
            [gx, (self.at(ix, iy + 1) - self.at(ix, iy - 1)) / two_h]
        }
    }

    /// Second-order central-difference Laplacian at a node.
    pub fn laplacian_at(&self, idx: usize) -> T {
        let [ix, iy] = self.spec.unflatten(idx);
        let (ix, iy) = (ix as isize, iy as isize);
        let h = self.spec.spacing();
        let c = self.values[idx];
        let two = T::lit(2.0);
        let mut lap = self.at(ix + 1, iy) - two * c + self.at(ix - 1, iy);
        if self.spec.dim() == 2 {
            lap = lap + self.at(ix, iy + 1) - two * c + self.at(ix, iy - 1);
        }
        lap / (h * h)
    }

    /// Max over interior nodes of the Euclidean norm of the central-difference gradient.
    pub fn discrete_gradient_sup(&self) -> T {
        let d = self.spec.dim();
        (0..self.len())
            .filter(|&i| self.spec.is_interior(i))
            .map(|i| crate::scalar::norm(&self.gradient_at(i)[..d]))
            .fold(T::zero(), T::max)
    }

    /// Max over interior nodes of the absolute discrete Laplacian.
    pub fn discrete_laplacian_sup(&self) -> T {
        (0..self.len())
            .filter(|&i| self.spec.is_interior(i))
            .map(|i| self.laplacian_at(i).abs())
            .fold(T::zero(), T::max)
    }

    /// Trapezoid rule over the grid.
    pub fn integral(&self) -> T {
        self.weighted_sum(|_, v| v)
    }

    /// Trapezoid rule of `g(idx, f(idx))`, summed in node order.
    pub fn weighted_sum<F: Fn(usize, T) -> T>(&self, g: F) -> T {
        self.values
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &v)| acc + self.spec.trapezoid_weight(i) * g(i, v))
    }

    /// Writes the `x[,y],value` CSV form, one node per row in lexicographic order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.spec.dim();
        writeln!(w, "{}", if d == 1 { "x,value" } else { "x,y,value" })?;
        for (i, &v) in self.values.iter().enumerate() {
            let c = self.spec.coords(i);
            if d == 1 {
                writeln!(w, "{},{}", fmt17(c[0]), fmt17(v))?;
            } else {
                writeln!(w, "{},{},{}", fmt17(c[0]), fmt17(c[1]), fmt17(v))?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Reads the CSV form written by [`GridFunction::write_csv`], recovering the grid.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))??;
        let dim = match header.trim() {
            "x,value" => 1,
            "x,y,value" => 2,
            other => return Err(Error::Parse(format!("unexpected header `{other}`"))),
        };
        let mut coords: Vec<[f64; 2]> = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if fields.len() != dim + 1 {
                return Err(Error::Parse(format!("line {}: expected {} fields", lineno + 2, dim + 1)));
            }
            coords.push([fields[0], if dim == 2 { fields[1] } else { 0.0 }]);
            values.push(T::lit(fields[dim]));
        }
        let n = match dim {
            1 => coords.len(),
            _ => (coords.len() as f64).sqrt().round() as usize,
        };
        if n < 2 || n.pow(dim as u32) != coords.len() {
            return Err(Error::Parse(format!("{} rows do not form a square grid", coords.len())));
        }
        let half_width = coords.last().map(|c| c[0]).unwrap_or(0.0);
        let spec = GridSpec::new(dim, T::lit(half_width), n - 1)?;
        let tol = 1e-9 * half_width.max(1.0);
        for (i, c) in coords.iter().enumerate() {
            let e = spec.coords(i);
            for a in 0..dim {
                if (c[a] - e[a].to_f64_lossy()).abs() > tol {
                    return Err(Error::Parse(format!("row {} is not on a uniform symmetric grid", i + 2)));
                }
            }
        }
        Self::new(spec, values)
    }
}

impl<'a, T: Real> Sub for &'a GridFunction<T> {
    type Output = GridFunction<T>;
    fn sub(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a - b).expect("matching grids")
    }
}

impl<'a, T: Real> Add for &'a GridFunction<T> {
    type Output = GridFunction<T>;
    fn add(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a + b).expect("matching grids")
    }
}

impl<'a, T: Real> Mul<T> for &'a GridFunction<T> {
    type Output = GridFunction<T>;
    fn mul(self, c: T) -> GridFunction<T> {
        self.scale(c)
    }
}

impl<'a, T: Real> Neg for &'a GridFunction<T> {
    type Output = GridFunction<T>;
    fn neg(self) -> GridFunction<T> {
        self.scale(-T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(x: f64, n: usize) -> GridSpec<f64> {
        GridSpec::line(x, n).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::<f64>::new(3, 1.0, 16).is_err());
        assert!(GridSpec::<f64>::new(1, 0.0, 16).is_err());
        assert!(matches!(GridSpec::<f64>::new(1, 1.0, 8), Err(Error::GridTooSmall { .. })));
        assert!(GridSpec::<f64>::new(1, 1.0, 24).is_err());
        let s = line(10.0, 2048);
        assert_eq!(s.nodes_per_axis(), 2049);
        assert_eq!(s.axis_coord(s.mid()), 0.0);
        assert_eq!(s.axis_coord(0), -10.0);
        assert_eq!(s.axis_coord(2048), 10.0);
    }

    #[test]
    fn sup_norm_examples() {
        let s = line(1.0, 16);
        assert_eq!(GridFunction::zeros(s).sup_norm(), 0.0);
        let mut v = vec![0.0; 17];
        v[0] = -3.0;
        v[5] = 1.0;
        v[9] = 2.0;
        assert_eq!(GridFunction::new(s, v).unwrap().sup_norm(), 3.0);
        let g = GridFunction::from_fn(line(10.0, 1024), |x| (-x[0] * x[0]).exp()).unwrap();
        assert!((g.sup_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let s = line(1.0, 64);
        assert_eq!(GridFunction::zeros(s).discrete_gradient_sup(), 0.0);
        let f = GridFunction::from_fn(s, |x| x[0]).unwrap();
        assert!((f.discrete_gradient_sup() - 1.0).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        let g = GridFunction::from_fn(line(pi, 512), |x| x[0].sin()).unwrap();
        assert!((g.discrete_gradient_sup() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn laplacian_examples() {
        let s = line(1.0, 64);
        assert_eq!(GridFunction::zeros(s).discrete_laplacian_sup(), 0.0);
        let f = GridFunction::from_fn(s, |x| x[0] * x[0]).unwrap();
        assert!((f.discrete_laplacian_sup() - 2.0).abs() < 1e-8);
        let g = GridFunction::from_fn(line(10.0, 1024), |x| (-x[0] * x[0]).exp()).unwrap();
        assert!((g.discrete_laplacian_sup() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn integral_examples() {
        let s = line(10.0, 1024);
        assert_eq!(GridFunction::zeros(s).integral(), 0.0);
        let h = s.spacing();
        // 0 and 1 are nodes: 1 / h = 51.2 is not integral, so use a grid where it is.
        let s2 = line(8.0, 1024);
        let ind = GridFunction::from_fn(s2, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        assert!((ind.integral() - 1.0).abs() <= 2.0 * s2.spacing());
        let g = GridFunction::from_fn(s, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        assert!((g.integral() - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-6);
        assert!(h > 0.0);
    }

    #[test]
    fn two_dimensional_layout() {
        let s = GridSpec::<f64>::square(1.0, 16).unwrap();
        assert_eq!(s.len(), 17 * 17);
        let f = GridFunction::from_fn(s, |x| x[0] + 2.0 * x[1]).unwrap();
        let idx = s.flatten(10, 3);
        let c = s.coords(idx);
        assert_eq!(f.get(idx), c[0] + 2.0 * c[1]);
        let g = f.gradient_at(s.flatten(8, 8));
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 2.0).abs() < 1e-12);
        let q = GridFunction::from_fn(s, |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        assert!((q.laplacian_at(s.flatten(5, 9)) - 4.0).abs() < 1e-9);
        let one = GridFunction::from_fn(s, |_| 1.0).unwrap();
        assert!((one.integral() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let s = GridSpec::<f64>::square(2.0, 16).unwrap();
        let f = GridFunction::from_fn(s, |x| (x[0] - 0.3 * x[1]).sin() / 3.0).unwrap();
        let text = f.to_csv_string();
        assert!(text.starts_with("x,y,value\n"));
        let g = GridFunction::<f64>::read_csv(text.as_bytes()).unwrap();
        assert_eq!(f, g);
        assert!(GridFunction::<f64>::read_csv("x,value\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let s = line(1.0, 16);
        let mut v = vec![0.0; 17];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(s, v), Err(Error::NonFinite { index: 3, .. })));
    }

    #[test]
    fn single_precision() {
        let s = GridSpec::<f32>::line(10.0, 1024).unwrap();
        let g = GridFunction::from_fn(s, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        assert!((g.integral() - 2.506_628).abs() < 1e-4);
    }
}
