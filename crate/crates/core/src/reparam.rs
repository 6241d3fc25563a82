//! Mollification and projection onto the constant-speed parametrization.
//!
//! The projection builds `phi(xi) = -pi + (2pi/L) int_{-pi}^{xi} |x'|` from
//! the spectral antiderivative of the speed, inverts it node by node with a
//! bracketed Newton iteration and resamples the curve through its
//! trigonometric interpolant at `phi^{-1}(gamma_i)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::curve::{ClosedCurve, ScalarField};
use crate::error::{Error, Result};
use crate::spectral::{apply_multiplier, derivative, interp_at, to_spectral, SpectralCoeffs};

/// Node speeds below this fraction of the mean speed count as degenerate.
pub const MIN_SPEED_FRACTION: f64 = 1e-9;
/// Convergence tolerance of the inverse map, in parameter units.
pub const INVERSE_TOL: f64 = 1e-13;
pub const MAX_NEWTON_ITERATIONS: usize = 100;

/// The reparametrization map of one projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ReparamMap {
    /// `phi` at the nodes.
    pub phi: ScalarField,
    /// `phi^{-1}(gamma_i)`: the old parameter values of the new nodes.
    pub phi_inverse_at_nodes: ScalarField,
    /// Total arc length `L`.
    pub total_length: f64,
}

/// Gaussian Fourier mollifier `f_k -> exp(-(eps k)^2 / 2) f_k`.
///
/// `eps = 0` is the identity.
pub fn mollify(curve: &ClosedCurve, eps: f64) -> Result<ClosedCurve> {
    if !(eps >= 0.0) {
        return Err(Error::param("eps", "mollifier width must be non-negative"));
    }
    if eps == 0.0 {
        return Ok(curve.clone());
    }
    Ok(apply_multiplier(curve, |k| {
        let a = eps * k as f64;
        (-0.5 * a * a).exp()
    }))
}

/// Relative speed defect `max_i | |x'_i|^2 - A | / A` with `A` the node mean.
pub fn speed_variation(curve: &ClosedCurve) -> f64 {
    let d1 = derivative(curve, 1);
    let sq: Vec<f64> = d1.points.iter().map(|v| v.norm_sq()).collect();
    let a = crate::sum::kahan_sum(&sq) / sq.len() as f64;
    sq.iter().fold(0.0_f64, |m, s| m.max((s - a).abs())) / a
}

struct SpeedInterpolant {
    coeffs: SpectralCoeffs,
    length: f64,
}

impl SpeedInterpolant {
    fn phi(&self, xi: f64) -> f64 {
        -PI + 2.0 * PI * self.coeffs.eval_antiderivative(xi).re / self.length
    }

    fn dphi(&self, xi: f64) -> f64 {
        2.0 * PI * self.coeffs.eval(xi).re / self.length
    }

    /// Solve `phi(xi) = target` inside `[lo, hi]`, where `phi(lo) <= target <= phi(hi)`.
    fn invert(&self, target: f64, mut lo: f64, mut hi: f64, node: usize) -> Result<f64> {
        // Start from the secant through the bracket.
        let (flo, fhi) = (self.phi(lo) - target, self.phi(hi) - target);
        let mut xi = if fhi > flo {
            lo - flo * (hi - lo) / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let f = self.phi(xi) - target;
            if f == 0.0 {
                return Ok(xi);
            }
            if f < 0.0 {
                lo = xi;
            } else {
                hi = xi;
            }
            let d = self.dphi(xi);
            let mut next = xi - f / d;
            if !(d > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - xi).abs() <= INVERSE_TOL || hi - lo <= INVERSE_TOL {
                return Ok(next);
            }
            xi = next;
        }
        Err(Error::NewtonFailed { node })
    }
}

/// Project `curve` onto the constant-speed parametrization of the same image.
///
/// Returns the resampled curve and the map used. Fails on a vanishing speed
/// or if the inverse map does not converge.
pub fn enforce_constant_speed(curve: &ClosedCurve) -> Result<(ClosedCurve, ReparamMap)> {
    let grid = curve.grid;
    let n = grid.n();
    let d1 = derivative(curve, 1);
    let speed = ScalarField::new(grid, d1.points.iter().map(|v| v.norm()).collect())?;
    let mean_speed = crate::sum::kahan_sum(&speed.values) / n as f64;
    if let Some((node, &s)) = speed
        .values
        .iter()
        .enumerate()
        .find(|(_, &s)| !(s > MIN_SPEED_FRACTION * mean_speed))
    {
        return Err(Error::SpeedDegenerate { node, speed: s });
    }

    let coeffs = to_spectral(&speed);
    let length = 2.0 * PI * coeffs.get(0).re;
    let interp = SpeedInterpolant { coeffs, length };

    let nodes = grid.nodes();
    let phi_nodes: Vec<f64> = nodes.par_iter().map(|&xi| interp.phi(xi)).collect();
    for i in 1..n {
        if !(phi_nodes[i] > phi_nodes[i - 1]) {
            return Err(Error::SpeedDegenerate {
                node: i,
                speed: speed.values[i],
            });
        }
    }

    let inverse: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return Ok(-PI);
            }
            let target = nodes[i];
            // phi is increasing, so the bracket is found on the node values.
            let b = phi_nodes.partition_point(|&p| p <= target);
            let lo = nodes[b - 1];
            let hi = if b < n { nodes[b] } else { PI };
            if phi_nodes[b - 1] == target {
                return Ok(lo);
            }
            interp.invert(target, lo, hi, i)
        })
        .collect::<Result<Vec<f64>>>()?;

    let points = interp_at(curve, &inverse);
    let out = ClosedCurve {
        grid,
        points,
        time: curve.time,
    };
    let map = ReparamMap {
        phi: ScalarField::new(grid, phi_nodes)?,
        phi_inverse_at_nodes: ScalarField::new(grid, inverse)?,
        total_length: length,
    };
    Ok((out, map))
}

/// Repeat the projection until the speed defect drops below `tol`.
///
/// A single pass is exact only for band-limited input; rough curves pick up
/// aliasing in the resampling, which further passes remove geometrically.
pub fn project_to_constant_speed(
    curve: &ClosedCurve,
    tol: f64,
    max_passes: usize,
) -> Result<ClosedCurve> {
    let mut current = enforce_constant_speed(curve)?.0;
    for _ in 1..max_passes {
        if speed_variation(&current) <= tol {
            break;
        }
        current = enforce_constant_speed(&current)?.0;
    }
    Ok(current)
}
