//! Tangential speed `lambda` that keeps `|dx/dgamma|^2` independent of `gamma`.
//!
//! Two routes are provided. [`lambda_direct`] integrates the explicit formula
//! `lambda(g) = ((pi+g)/2pi) W - int_{-pi}^{g} w`, where `w` is the tangential
//! component of the gamma-derivative of the velocity integrand. The
//! production route [`lambda_from_decomposition`] integrates
//! `d_gamma lambda = G1 + G2 + G3`. They agree up to quadrature error on
//! constant-speed curves and serve as oracles for one another.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::curve::{ClosedCurve, ScalarField};
use crate::error::Result;
use crate::kernel::KernelWorkspace;
use crate::sum::{kahan_sum, Kahan, Kahan2};

/// Tangential speed, its derivative, and the constants used to build them.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaField {
    pub lambda: ScalarField,
    pub dlambda: ScalarField,
    /// The gamma-independent part of `d_gamma lambda`.
    pub gamma3: f64,
    /// `A`: node mean of `|dx/dgamma|^2`.
    pub a: f64,
}

impl LambdaField {
    /// `max |lambda|`.
    pub fn sup(&self) -> f64 {
        self.lambda.sup_norm()
    }

    /// `max |d_gamma lambda|`.
    pub fn dsup(&self) -> f64 {
        self.dlambda.sup_norm()
    }
}

/// The three terms of `d_gamma lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct DlambdaTerms {
    pub gamma1: ScalarField,
    pub gamma2: ScalarField,
    pub gamma3: f64,
    pub a: f64,
}

impl DlambdaTerms {
    pub fn total(&self) -> ScalarField {
        ScalarField {
            grid: self.gamma1.grid,
            values: self
                .gamma1
                .values
                .iter()
                .zip(&self.gamma2.values)
                .map(|(g1, g2)| g1 + g2 + self.gamma3)
                .collect(),
        }
    }
}

/// Trapezoidal cumulative integral from `-pi`, one value per node; the last
/// entry of the returned vector is the integral over the full period.
fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Kahan::new();
    out.push(0.0);
    for i in 0..n {
        acc.add(0.5 * h * (values[i] + values[(i + 1) % n]));
        out.push(acc.value());
    }
    out
}

/// `lambda` from the explicit double-integral formula; O(n^2).
///
/// The gamma-derivative of `x'_- / |x_-|` is expanded analytically as
/// `x''_- g + x'_- d_gamma g`, and the tangential projection divides by the
/// local `|x'(xi)|^2`, so the result is periodic even off constant speed.
pub fn lambda_direct(ws: &KernelWorkspace) -> LambdaField {
    let grid = ws.grid();
    let n = grid.n();
    let h = grid.spacing();
    let (d1, d2) = (ws.d1(), ws.d2());

    let w: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Kahan2::default();
            for j in 1..n {
                let k = grid.shifted(i, j);
                let term = (d2[i] - d2[k]) * ws.g(i, j) + (d1[i] - d1[k]) * ws.dgamma_g(i, j);
                acc.add(term);
            }
            h * acc.value().dot(d1[i]) / d1[i].norm_sq()
        })
        .collect();

    let total = h * kahan_sum(&w);
    let cum = cumulative_trapezoid(&w, h);
    let lambda = (0..n)
        .map(|i| (i as f64 / n as f64) * total - cum[i])
        .collect();
    let mean_w = total / (2.0 * PI);
    let dlambda = w.iter().map(|wi| mean_w - wi).collect();
    LambdaField {
        lambda: ScalarField { grid, values: lambda },
        dlambda: ScalarField {
            grid,
            values: dlambda,
        },
        gamma3: mean_w,
        a: ws.mean_speed_sq(),
    }
}

/// `d_gamma lambda = G1 + G2 + G3` with
/// `G1 = (1/A) int g x'_- . x''(g - eta)`,
/// `G2 = (1/2A) int |x'_-|^2 (x_- . x'_-) g^3` and the constant
/// `G3 = -(1/2pi A) int int g x'_- . x''(g)`.
pub fn dlambda_decomposition(ws: &KernelWorkspace) -> DlambdaTerms {
    let grid = ws.grid();
    let n = grid.n();
    let h = grid.spacing();
    let (d1, d2) = (ws.d1(), ws.d2());
    let a = ws.mean_speed_sq();

    let rows: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (mut s1, mut s2, mut s3) = (Kahan::new(), Kahan::new(), Kahan::new());
            for j in 1..n {
                let k = grid.shifted(i, j);
                let g = ws.g(i, j);
                let xm = ws.x_minus(i, j);
                let dxm = d1[i] - d1[k];
                s1.add(g * dxm.dot(d2[k]));
                s2.add(dxm.norm_sq() * xm.dot(dxm) * g * g * g);
                s3.add(g * dxm.dot(d2[i]));
            }
            (h * s1.value(), h * s2.value(), h * s3.value())
        })
        .collect();

    let gamma1 = rows.iter().map(|r| r.0 / a).collect();
    let gamma2 = rows.iter().map(|r| 0.5 * r.1 / a).collect();
    let inner: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let gamma3 = -h * kahan_sum(&inner) / (2.0 * PI * a);
    DlambdaTerms {
        gamma1: ScalarField {
            grid,
            values: gamma1,
        },
        gamma2: ScalarField {
            grid,
            values: gamma2,
        },
        gamma3,
        a,
    }
}

/// `lambda` by integrating [`dlambda_decomposition`] from `lambda(-pi) = 0`.
///
/// The decomposition uses identities that hold only at exactly constant
/// speed, so the discrete integral over a period leaves a small residual.
/// It is removed as a constant shift of `d_gamma lambda` (a correction to
/// the constant term `G3`), which keeps `lambda` periodic.
pub fn lambda_from_decomposition(ws: &KernelWorkspace) -> LambdaField {
    let terms = dlambda_decomposition(ws);
    let grid = ws.grid();
    let n = grid.n();
    let h = grid.spacing();
    let raw = terms.total();
    let cum = cumulative_trapezoid(&raw.values, h);
    let residual = cum[n];
    let shift = residual / (2.0 * PI);
    let lambda = (0..n)
        .map(|i| cum[i] - (i as f64 / n as f64) * residual)
        .collect();
    let dlambda = raw.values.iter().map(|v| v - shift).collect();
    LambdaField {
        lambda: ScalarField { grid, values: lambda },
        dlambda: ScalarField {
            grid,
            values: dlambda,
        },
        gamma3: terms.gamma3 - shift,
        a: terms.a,
    }
}

/// Convenience wrapper building the workspace for `curve`.
pub fn tangential_speed(curve: &ClosedCurve) -> Result<LambdaField> {
    Ok(lambda_from_decomposition(&KernelWorkspace::new(curve)?))
}
