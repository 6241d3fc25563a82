//! Fourier transforms on the periodic grid and the multipliers built on them.
//!
//! Coefficients follow `f_k = (1/2pi) int f(g) e^{-ikg} dg`, discretized on
//! nodes starting at `g = -pi`. Norms carry the matching Parseval factor
//! `2pi`. The Nyquist mode `k = -n/2` is kept by the transform and by even
//! derivatives, and zeroed by odd derivatives and by `Lambda^s`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::curve::{Grid, PeriodicField, ScalarField};
use crate::sum::Kahan;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

#[inline]
fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Complex Fourier amplitudes for wavenumbers `-n/2 ..= n/2 - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    grid: Grid,
    /// `coeffs[k + n/2]` holds the amplitude of wavenumber `k`.
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    /// Transform complex samples on `grid`.
    pub fn from_samples(grid: Grid, samples: &[Complex64]) -> Self {
        let n = grid.n();
        assert_eq!(samples.len(), n);
        let mut buf = samples.to_vec();
        forward_plan(n).process(&mut buf);
        let half = (n / 2) as i64;
        let inv_n = 1.0 / n as f64;
        let coeffs = (-half..half)
            .map(|k| buf[k.rem_euclid(n as i64) as usize] * (parity(k) * inv_n))
            .collect();
        Self { grid, coeffs }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Complex samples at the grid nodes.
    pub fn to_samples(&self) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in self.iter() {
            buf[k.rem_euclid(n as i64) as usize] = c * parity(k);
        }
        inverse_plan(n).process(&mut buf);
        buf
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Amplitude of wavenumber `k`; zero outside the stored band.
    pub fn get(&self, k: i64) -> Complex64 {
        let half = (self.grid.n() / 2) as i64;
        if k < -half || k >= half {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + half) as usize]
        }
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        let half = (self.grid.n() / 2) as i64;
        assert!(k >= -half && k < half, "wavenumber {k} outside band");
        self.coeffs[(k + half) as usize] = value;
    }

    #[inline]
    pub fn nyquist(&self) -> i64 {
        -((self.grid.n() / 2) as i64)
    }

    /// `(k, amplitude)` pairs in ascending `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let half = (self.grid.n() / 2) as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - half, c))
    }

    /// Multiply every amplitude by `m(k)`.
    pub fn apply(&mut self, m: impl Fn(i64) -> Complex64) {
        let half = (self.grid.n() / 2) as i64;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(i as i64 - half);
        }
    }

    /// Evaluate the trigonometric interpolant at an arbitrary parameter.
    ///
    /// The Nyquist amplitude enters as `cos(n g / 2)` so the interpolant of
    /// real data stays real and reproduces every node value.
    pub fn eval(&self, g: f64) -> Complex64 {
        let half = (self.grid.n() / 2) as i64;
        let base = Complex64::from_polar(1.0, g);
        let mut acc = self.get(0);
        let mut pos = Complex64::new(1.0, 0.0);
        let mut neg = Complex64::new(1.0, 0.0);
        for k in 1..half {
            // Re-anchor the recurrence periodically to bound phase drift.
            if k % 16 == 0 {
                pos = Complex64::from_polar(1.0, k as f64 * g);
                neg = pos.conj();
            } else {
                pos *= base;
                neg *= base.conj();
            }
            acc += self.get(k) * pos + self.get(-k) * neg;
        }
        acc + self.get(-half) * (half as f64 * g).cos()
    }

    /// Antiderivative `int_{-pi}^{g} f` of the interpolant (real part of the
    /// packed signal only matters for scalar fields).
    pub fn eval_antiderivative(&self, g: f64) -> Complex64 {
        let half = (self.grid.n() / 2) as i64;
        let mut acc = self.get(0) * (g + PI);
        for k in 1..half {
            let kf = k as f64;
            // int_{-pi}^{g} e^{ikt} dt = (e^{ikg} - e^{-ik pi}) / (ik)
            let ep = Complex64::from_polar(1.0, kf * g);
            let em = ep.conj();
            let sign = parity(k);
            let i_k = Complex64::new(0.0, kf);
            acc += self.get(k) * (ep - sign) / i_k;
            acc += self.get(-k) * (em - sign) / (-i_k);
        }
        let h = half as f64;
        acc + self.get(-half) * ((h * g).sin() - (-h * PI).sin()) / h
    }
}

/// Fourier coefficients of any periodic field.
pub fn to_spectral<F: PeriodicField>(field: &F) -> SpectralCoeffs {
    SpectralCoeffs::from_samples(field.grid(), &field.to_complex())
}

/// Inverse transform into a field shaped like `template`.
pub fn from_spectral<F: PeriodicField>(template: &F, coeffs: &SpectralCoeffs) -> F {
    template.with_complex(&coeffs.to_samples())
}

/// Apply a real, even multiplier `m(k)` to a field.
pub fn apply_multiplier<F: PeriodicField>(field: &F, m: impl Fn(i64) -> f64) -> F {
    let mut c = to_spectral(field);
    c.apply(|k| Complex64::new(m(k), 0.0));
    from_spectral(field, &c)
}

/// Spectral derivative of order 1, 2 or 3.
pub fn derivative<F: PeriodicField>(field: &F, order: u32) -> F {
    assert!((1..=3).contains(&order), "derivative order must be 1, 2 or 3");
    let mut c = to_spectral(field);
    let nyq = c.nyquist();
    c.apply(|k| {
        if k == nyq && order % 2 == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k as f64).powu(order)
        }
    });
    from_spectral(field, &c)
}

/// `Lambda^s`: the multiplier `|k|^s`, annihilating the mean and the Nyquist mode.
pub fn fractional_laplacian<F: PeriodicField>(field: &F, s: f64) -> F {
    assert!(s >= 0.0, "fractional order must be non-negative");
    let nyq = -((field.grid().n() / 2) as i64);
    apply_multiplier(field, |k| {
        if k == 0 || k == nyq {
            0.0
        } else {
            (k.unsigned_abs() as f64).powf(s)
        }
    })
}

/// Weighted Parseval sum `2pi sum_k w(k) |f_k|^2`, accumulated in ascending `k`.
fn weighted_energy(c: &SpectralCoeffs, w: impl Fn(i64) -> f64) -> f64 {
    let mut acc = Kahan::new();
    for (k, a) in c.iter() {
        acc.add(w(k) * a.norm_sqr());
    }
    2.0 * PI * acc.value()
}

/// Sobolev norm of order `r`.
///
/// Inhomogeneous: `sqrt(2pi sum (1+k^2)^r |f_k|^2)`. Homogeneous:
/// `sqrt(2pi sum |k|^{2r} |f_k|^2)`. Vector fields sum both components.
pub fn sobolev_norm<F: PeriodicField>(field: &F, r: f64, homogeneous: bool) -> f64 {
    assert!(r >= 0.0, "Sobolev order must be non-negative");
    sobolev_norm_of(&to_spectral(field), r, homogeneous)
}

/// [`sobolev_norm`] on precomputed coefficients.
pub fn sobolev_norm_of(c: &SpectralCoeffs, r: f64, homogeneous: bool) -> f64 {
    let e = if homogeneous {
        weighted_energy(c, |k| {
            if k == 0 {
                0.0
            } else {
                (k.unsigned_abs() as f64).powf(2.0 * r)
            }
        })
    } else {
        weighted_energy(c, |k| (1.0 + (k * k) as f64).powf(r))
    };
    e.sqrt()
}

/// Discrete `L^2` norm `sqrt((2pi/n) sum |f_i|^2)` straight from the samples.
pub fn l2_norm_samples<F: PeriodicField>(field: &F) -> f64 {
    let mut acc = Kahan::new();
    for z in field.to_complex() {
        acc.add(z.norm_sqr());
    }
    (field.grid().spacing() * acc.value()).sqrt()
}

/// Evaluate the trigonometric interpolant of `field` at arbitrary parameters.
pub fn interp_at<F: PeriodicField>(field: &F, points: &[f64]) -> Vec<F::Value> {
    let c = to_spectral(field);
    points
        .par_iter()
        .map(|&g| F::value_from_complex(c.eval(g)))
        .collect()
}

/// Resample `field` onto a grid of `m` nodes through its interpolant.
pub fn resample<F: PeriodicField>(field: &F, m: usize) -> Vec<F::Value> {
    let target = Grid::new(m).expect("resample target grid");
    interp_at(field, &target.nodes())
}

/// Pairwise estimator of the Hölder seminorm of exponent `alpha`:
/// `max_{i != j} |f_i - f_j| / d(g_i, g_j)^alpha`, with `d` the periodic distance.
///
/// This is a lower bound for the continuum seminorm and is non-decreasing
/// under grid refinement for fields sampled exactly.
pub fn holder_seminorm<F: PeriodicField>(field: &F, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "Hölder exponent must lie in (0,1)");
    let grid = field.grid();
    let n = grid.n();
    let vals = field.values();
    let h = grid.spacing();
    // Node separation depends only on the index offset.
    let weights: Vec<f64> = (0..n)
        .map(|j| {
            let m = j.min(n - j) as f64;
            (m * h).powf(-alpha)
        })
        .collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0_f64;
            for j in (i + 1)..n {
                let d = F::value_distance(vals[i], vals[j]);
                best = best.max(d * weights[j - i]);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Real Fourier coefficients of each component of a packed planar signal.
pub fn component_spectra(c: &SpectralCoeffs) -> (SpectralCoeffs, SpectralCoeffs) {
    let grid = c.grid();
    let mut a = SpectralCoeffs::zeros(grid);
    let mut b = SpectralCoeffs::zeros(grid);
    let nyq = c.nyquist();
    for (k, z) in c.iter() {
        // The Nyquist slot is its own mirror.
        let mirror = if k == nyq { z } else { c.get(-k) };
        a.set(k, (z + mirror.conj()) * 0.5);
        b.set(k, (z - mirror.conj()) * Complex64::new(0.0, -0.5));
    }
    (a, b)
}

/// Recombine two real component spectra into the packed `a + i b` form.
pub fn pack_components(a: &SpectralCoeffs, b: &SpectralCoeffs) -> SpectralCoeffs {
    let mut c = SpectralCoeffs::zeros(a.grid());
    for (k, za) in a.iter() {
        c.set(k, za + Complex64::new(0.0, 1.0) * b.get(k));
    }
    c
}

/// Mean of a scalar field as its zeroth Fourier amplitude.
pub fn mean(field: &ScalarField) -> f64 {
    to_spectral(field).get(0).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{ClosedCurve, Vec2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn random_trig(grid: Grid, degree: i64, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefs: Vec<(f64, f64)> = (0..=degree)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ScalarField::from_fn(grid, |t| {
            coefs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * (k as f64 * t).cos() + b * (k as f64 * t).sin())
                .sum()
        })
    }

    #[test]
    fn single_mode_coefficients() {
        let f = ScalarField::from_fn(g(64), |t| (3.0 * t).cos());
        let c = to_spectral(&f);
        for (k, a) in c.iter() {
            let expect = if k.abs() == 3 { 0.5 } else { 0.0 };
            assert!((a - Complex64::new(expect, 0.0)).norm() < 1e-14, "k={k}: {a}");
        }
    }

    #[test]
    fn constant_coefficients() {
        let f = ScalarField::from_fn(g(64), |_| 5.0);
        let c = to_spectral(&f);
        for (k, a) in c.iter() {
            let expect = if k == 0 { 5.0 } else { 0.0 };
            assert!((a - Complex64::new(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn real_fields_have_hermitian_spectra() {
        let f = random_trig(g(64), 10, 3);
        let c = to_spectral(&f);
        for k in 1..32 {
            assert!((c.get(-k) - c.get(k).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_degree_ten() {
        let f = random_trig(g(64), 10, 11);
        let back: ScalarField = from_spectral(&f, &to_spectral(&f));
        let err = f
            .values
            .iter()
            .zip(&back.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-13, "round trip error {err}");
    }

    #[test]
    fn circle_derivatives() {
        let c = ClosedCurve::circle(g(64), 1.0);
        let d1 = derivative(&c, 1);
        let d2 = derivative(&c, 2);
        for (i, t) in c.grid.nodes().into_iter().enumerate() {
            assert!((d1.points[i] - Vec2::new(-t.sin(), t.cos())).norm() < 1e-12);
            assert!((d2.points[i] + c.points[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn ellipse_third_derivative() {
        // Third derivatives amplify transform roundoff by k^3, so keep n modest.
        let c = ClosedCurve::ellipse(g(32), 1.2, 0.8);
        let d3 = derivative(&c, 3);
        for (i, t) in c.grid.nodes().into_iter().enumerate() {
            let expect = Vec2::new(1.2 * t.sin(), -0.8 * t.cos());
            let err = (d3.points[i] - expect).norm();
            assert!(err < 1e-12, "node {i}: {err:e}");
        }
    }

    #[test]
    fn derivative_exact_on_degree_ten() {
        // f = sum a_k cos + b_k sin; compare against the analytic derivative.
        let grid = g(64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coefs: Vec<(f64, f64)> = (0..=10)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = ScalarField::from_fn(grid, |t| {
            coefs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * (k as f64 * t).cos() + b * (k as f64 * t).sin())
                .sum()
        });
        let df = derivative(&f, 1);
        for (i, t) in grid.nodes().into_iter().enumerate() {
            let exact: f64 = coefs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let k = k as f64;
                    -a * k * (k * t).sin() + b * k * (k * t).cos()
                })
                .sum();
            assert!((df.values[i] - exact).abs() <= 1e-11);
        }
    }

    #[test]
    fn odd_derivative_zeroes_nyquist() {
        let grid = g(16);
        let f = ScalarField::from_fn(grid, |t| (8.0 * t).cos());
        assert!(derivative(&f, 1).sup_norm() < 1e-14);
        let d2 = derivative(&f, 2);
        assert!((d2.values[3] + 64.0 * f.values[3]).abs() < 1e-10);
    }

    #[test]
    fn fractional_laplacian_single_and_sum() {
        let grid = g(64);
        let f = ScalarField::from_fn(grid, |t| (3.0 * t).cos());
        let lf = fractional_laplacian(&f, 0.25);
        for (i, t) in grid.nodes().into_iter().enumerate() {
            assert!((lf.values[i] - 3f64.powf(0.25) * (3.0 * t).cos()).abs() < 1e-12);
        }
        let c = ScalarField::from_fn(grid, |_| 2.5);
        assert!(fractional_laplacian(&c, 0.7).sup_norm() < 1e-14);
        let f = ScalarField::from_fn(grid, |t| t.cos() + (4.0 * t).cos());
        let lf = fractional_laplacian(&f, 0.5);
        for (i, t) in grid.nodes().into_iter().enumerate() {
            assert!((lf.values[i] - (t.cos() + 2.0 * (4.0 * t).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_laplacian_composes() {
        let grid = g(64);
        let mut f = random_trig(grid, 20, 9);
        let m = mean(&f);
        f.values.iter_mut().for_each(|v| *v -= m);
        let lhs = fractional_laplacian(&fractional_laplacian(&f, 0.3), 0.45);
        let rhs = fractional_laplacian(&f, 0.75);
        let scale = rhs.sup_norm();
        for (a, b) in lhs.values.iter().zip(&rhs.values) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn sobolev_single_mode_and_constant() {
        let grid = g(64);
        let f = ScalarField::from_fn(grid, |t| (3.0 * t).cos());
        assert!((sobolev_norm(&f, 1.0, true) - 3.0 * PI.sqrt()).abs() < 1e-12);
        let one = ScalarField::from_fn(grid, |_| 1.0);
        assert!(sobolev_norm(&one, 0.8, true) < 1e-14);
    }

    #[test]
    fn sobolev_zero_is_discrete_l2() {
        let f = random_trig(g(64), 12, 21);
        let a = sobolev_norm(&f, 0.0, false);
        let b = l2_norm_samples(&f);
        assert!((a - b).abs() <= 1e-12 * b);
        let c = ClosedCurve::ellipse(g(64), 1.2, 0.8);
        let a = sobolev_norm(&c, 0.0, false);
        let b = l2_norm_samples(&c);
        assert!((a - b).abs() <= 1e-12 * b);
    }

    /// Brute-force double integral of |f(g)-f(g-xi)|^2 against the periodized
    /// kernel sum_{|m|<=50} 1/|xi + 2pi m|^2.
    fn double_integral_h_half(k: f64) -> f64 {
        let m_g = 256;
        let m_xi = 4096;
        let hg = 2.0 * PI / m_g as f64;
        let hx = 2.0 * PI / m_xi as f64;
        let f = |t: f64| (k * t).cos();
        let mut total = 0.0;
        for a in 0..m_g {
            let gam = -PI + a as f64 * hg;
            for b in 0..m_xi {
                let xi = -PI + (b as f64 + 0.5) * hx;
                let kern: f64 = (-50..=50)
                    .map(|m| 1.0 / (xi + 2.0 * PI * m as f64).powi(2))
                    .sum();
                let d = f(gam) - f(gam - xi);
                total += d * d * kern;
            }
        }
        total * hg * hx
    }

    #[test]
    fn h_half_multiplier_matches_double_integral_up_to_constant() {
        let grid = g(64);
        let ratio = |k: f64| {
            let f = ScalarField::from_fn(grid, |t| (k * t).cos());
            let mult = sobolev_norm(&f, 0.5, true);
            double_integral_h_half(k) / (mult * mult)
        };
        let r1 = ratio(1.0);
        let r5 = ratio(5.0);
        assert!((r1 / r5 - 1.0).abs() < 0.01, "ratios {r1} vs {r5}");
    }

    #[test]
    fn interpolation_at_points_and_nodes() {
        let grid = g(32);
        let f = ScalarField::from_fn(grid, |t| (2.0 * t).cos());
        let v = interp_at(&f, &[0.3]);
        assert!((v[0] - 0.6f64.cos()).abs() < 1e-13);
        let rough = random_trig(grid, 16, 4);
        let at_nodes = interp_at(&rough, &grid.nodes());
        for (a, b) in at_nodes.iter().zip(&rough.values) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn ellipse_interpolation_matches_closed_form() {
        let grid = g(128);
        let c = ClosedCurve::ellipse(grid, 1.2, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts: Vec<f64> = (0..3 * 128).map(|_| rng.gen_range(-PI..PI)).collect();
        let vals = interp_at(&c, &pts);
        for (p, v) in pts.iter().zip(vals) {
            let exact = Vec2::new(1.2 * p.cos(), 0.8 * p.sin());
            assert!((v - exact).norm() <= 1e-10);
        }
    }

    #[test]
    fn antiderivative_of_cosine() {
        let f = ScalarField::from_fn(g(32), |t| 1.0 + (3.0 * t).cos());
        let c = to_spectral(&f);
        for &t in &[-PI, -1.0, 0.2, 2.9] {
            let exact = (t + PI) + ((3.0 * t).sin() - (-3.0 * PI).sin()) / 3.0;
            assert!((c.eval_antiderivative(t).re - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn holder_of_constant_and_scaling() {
        let grid = g(64);
        let c = ScalarField::from_fn(grid, |_| 3.0);
        assert_eq!(holder_seminorm(&c, 0.4), 0.0);
        let f = ScalarField::from_fn(grid, |t| t.sin() + 0.2 * (3.0 * t).cos());
        let a = holder_seminorm(&f, 0.4);
        // Power-of-two scale factors commute exactly with rounding.
        assert_eq!(holder_seminorm(&f.scaled(-4.0), 0.4), 4.0 * a);
        let b = holder_seminorm(&f.scaled(-2.5), 0.4);
        assert!((b - 2.5 * a).abs() <= 4.0 * f64::EPSILON * b);
    }

    #[test]
    fn holder_matches_fine_grid_brute_force() {
        let f = ScalarField::from_fn(g(512), |t| t.cos());
        let est = holder_seminorm(&f, 0.5);
        // Oracle: exhaustive pair scan on a 4096-node grid.
        let m = 4096;
        let h = 2.0 * PI / m as f64;
        let vals: Vec<f64> = (0..m).map(|i| (-PI + i as f64 * h).cos()).collect();
        let mut best = 0.0_f64;
        for i in 0..m {
            for j in (i + 1)..m {
                let sep = (j - i).min(m - (j - i)) as f64 * h;
                best = best.max((vals[i] - vals[j]).abs() / sep.sqrt());
            }
        }
        assert!((est / best - 1.0).abs() < 0.02, "{est} vs {best}");
    }

    #[test]
    fn holder_monotone_under_refinement() {
        let f = |t: f64| Vec2::new(t.cos() + 0.1 * (5.0 * t).sin(), 0.7 * t.sin());
        let mut prev = 0.0;
        for n in [32, 64, 128, 256] {
            let c = ClosedCurve::from_fn(g(n), f);
            let h = holder_seminorm(&c, 0.75);
            assert!(h >= prev - 1e-12);
            prev = h;
        }
    }

    #[test]
    fn component_split_round_trips() {
        let c = ClosedCurve::ellipse(g(32), 1.2, 0.8).translated(Vec2::new(0.1, 0.4));
        let spec = to_spectral(&c);
        let (a, b) = component_spectra(&spec);
        let xs = ScalarField::from_fn(c.grid, |t| 1.2 * t.cos() + 0.1);
        let ax = to_spectral(&xs);
        for k in -16..16 {
            assert!((a.get(k) - ax.get(k)).norm() < 1e-15);
        }
        let back = pack_components(&a, &b);
        for k in -16..16 {
            assert!((back.get(k) - spec.get(k)).norm() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn curve_round_trip_is_tight(seed in 0u64..1000, scale in 0.1f64..100.0) {
            let grid = g(64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec2> = (0..64)
                .map(|_| Vec2::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
                .collect();
            let c = ClosedCurve::new(grid, pts).unwrap();
            let back: ClosedCurve = from_spectral(&c, &to_spectral(&c));
            let sup = c.sup_norm();
            prop_assert!(c.max_distance(&back) <= 10.0 * f64::EPSILON * sup);
        }
    }
}
