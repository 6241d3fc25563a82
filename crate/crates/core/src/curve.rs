//! Periodic grids on the torus [-pi, pi) and the fields sampled on them.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation by a quarter turn.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    #[inline]
    pub fn from_complex(z: Complex64) -> Self {
        Vec2::new(z.re, z.im)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// Uniform grid of `n` nodes `gamma_i = -pi + 2 pi i / n` on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing 2 pi / n.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        -PI + 2.0 * PI * i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Parameter offset of grid shift `j`, as the representative in (-pi, pi].
    #[inline]
    pub fn offset(&self, j: usize) -> f64 {
        let j = j % self.n;
        if j <= self.n / 2 {
            self.spacing() * j as f64
        } else {
            -self.spacing() * (self.n - j) as f64
        }
    }

    /// Index of node `i - j` modulo `n`.
    #[inline]
    pub fn shifted(&self, i: usize, j: usize) -> usize {
        (i + self.n - j % self.n) % self.n
    }

    /// Signed wavenumber stored at FFT slot `slot`, in -n/2..n/2-1.
    #[inline]
    pub fn wavenumber(&self, slot: usize) -> i64 {
        let n = self.n as i64;
        let k = slot as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }
}

/// Periodic distance on the torus, using the representative in (-pi, pi].
#[inline]
pub fn periodic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// A field sampled on a [`Grid`] that can be packed into complex samples.
///
/// Planar curves pack `x1 + i x2`; scalar fields use a zero imaginary part.
/// Every Fourier multiplier used in this crate is real and even in `k`, so it
/// commutes with the packing.
pub trait PeriodicField: Sized {
    type Value: Copy + Send + Sync;

    fn grid(&self) -> Grid;
    fn to_complex(&self) -> Vec<Complex64>;
    /// Rebuild a field of the same kind (time and other metadata from `self`).
    fn with_complex(&self, samples: &[Complex64]) -> Self;
    fn value_from_complex(z: Complex64) -> Self::Value;
    fn value_distance(a: Self::Value, b: Self::Value) -> f64;
    fn values(&self) -> Vec<Self::Value>;
}

/// Real scalar samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

impl PeriodicField for ScalarField {
    type Value = f64;

    fn grid(&self) -> Grid {
        self.grid
    }

    fn to_complex(&self) -> Vec<Complex64> {
        self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    fn with_complex(&self, samples: &[Complex64]) -> Self {
        Self {
            grid: self.grid,
            values: samples.iter().map(|z| z.re).collect(),
        }
    }

    fn value_from_complex(z: Complex64) -> f64 {
        z.re
    }

    fn value_distance(a: f64, b: f64) -> f64 {
        (a - b).abs()
    }

    fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

/// A closed planar curve sampled at the grid nodes; the state of the simulator.
///
/// Periodicity is implicit: node `n` is node `0` and is not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    pub grid: Grid,
    pub points: Vec<Vec2>,
    pub time: f64,
}

impl ClosedCurve {
    pub fn new(grid: Grid, points: Vec<Vec2>) -> Result<Self> {
        if points.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: points.len(),
            });
        }
        Ok(Self {
            grid,
            points,
            time: 0.0,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Vec2) -> Self {
        let points = grid.nodes().into_iter().map(f).collect();
        Self {
            grid,
            points,
            time: 0.0,
        }
    }

    /// Circle of radius `r`, `x = r (cos g, sin g)`.
    pub fn circle(grid: Grid, r: f64) -> Self {
        Self::from_fn(grid, |g| Vec2::new(r * g.cos(), r * g.sin()))
    }

    /// Ellipse `(a cos g, b sin g)` in its angular parametrization.
    pub fn ellipse(grid: Grid, a: f64, b: f64) -> Self {
        Self::from_fn(grid, |g| Vec2::new(a * g.cos(), b * g.sin()))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        Self {
            grid: self.grid,
            points: self.points.iter().map(|&p| f(p)).collect(),
            time: self.time,
        }
    }

    pub fn translated(&self, c: Vec2) -> Self {
        self.map(|p| p + c)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|p| p * c)
    }

    pub fn rotated(&self, angle: f64) -> Self {
        self.map(|p| p.rotate(angle))
    }

    /// Reflection `(x1, x2) -> (x1, -x2)` combined with `gamma -> -gamma`,
    /// which keeps the orientation of the parametrization.
    pub fn reflected(&self) -> Self {
        let n = self.n();
        let points = (0..n)
            .map(|i| {
                let p = self.points[(n - i) % n];
                Vec2::new(p.x, -p.y)
            })
            .collect();
        Self {
            grid: self.grid,
            points,
            time: self.time,
        }
    }

    /// Pointwise difference `self - other`; both curves must share a grid.
    pub fn difference(&self, other: &ClosedCurve) -> Self {
        assert_eq!(self.grid, other.grid, "curves live on different grids");
        Self {
            grid: self.grid,
            points: self
                .points
                .iter()
                .zip(&other.points)
                .map(|(&a, &b)| a - b)
                .collect(),
            time: self.time,
        }
    }

    /// Largest node-wise Euclidean distance to `other`.
    pub fn max_distance(&self, other: &ClosedCurve) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .fold(0.0_f64, |m, (&a, &b)| m.max((a - b).norm()))
    }

    pub fn sup_norm(&self) -> f64 {
        self.points.iter().fold(0.0_f64, |m, p| m.max(p.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.x.is_finite() && p.y.is_finite())
    }
}

impl PeriodicField for ClosedCurve {
    type Value = Vec2;

    fn grid(&self) -> Grid {
        self.grid
    }

    fn to_complex(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.to_complex()).collect()
    }

    fn with_complex(&self, samples: &[Complex64]) -> Self {
        Self {
            grid: self.grid,
            points: samples.iter().map(|&z| Vec2::from_complex(z)).collect(),
            time: self.time,
        }
    }

    fn value_from_complex(z: Complex64) -> Vec2 {
        Vec2::from_complex(z)
    }

    fn value_distance(a: Vec2, b: Vec2) -> f64 {
        (a - b).norm()
    }

    fn values(&self) -> Vec<Vec2> {
        self.points.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(Grid::new(7).is_err());
        assert!(Grid::new(6).is_err());
        assert!(Grid::new(13).is_err());
        assert!(Grid::new(8).is_ok());
    }

    #[test]
    fn nodes_are_uniform() {
        let g = Grid::new(64).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes[0], -PI);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-15);
        }
    }

    #[test]
    fn offsets_use_half_open_representative() {
        let g = Grid::new(8).unwrap();
        assert_eq!(g.offset(4), PI);
        assert!((g.offset(5) + 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(g.shifted(0, 1), 7);
        assert_eq!(g.wavenumber(4), -4);
        assert_eq!(g.wavenumber(3), 3);
    }

    #[test]
    fn periodic_distance_wraps() {
        assert!((periodic_distance(-PI + 0.1, PI - 0.1) - 0.2).abs() < 1e-12);
        assert!((periodic_distance(0.0, PI) - PI).abs() < 1e-15);
    }

    #[test]
    fn reflection_is_an_involution() {
        let g = Grid::new(16).unwrap();
        let c = ClosedCurve::ellipse(g, 1.2, 0.8).translated(Vec2::new(0.3, -0.1));
        assert_eq!(c.reflected().reflected(), c);
    }
}
