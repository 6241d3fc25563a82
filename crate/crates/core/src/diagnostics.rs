//! Monitored quantities of a contour, packaged one record per time sample.

use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{ClosedCurve, ScalarField};
use crate::error::{Error, Result};
use crate::kernel::KernelWorkspace;
use crate::lambda::{lambda_from_decomposition, LambdaField};
use crate::reparam::{speed_variation, MIN_SPEED_FRACTION};
use crate::spectral::{derivative, holder_seminorm, sobolev_norm};
use crate::sum::kahan_sum;

/// Relative slack of the soft check `1/A <= F_max^2`.
pub const SPEED_ARC_CHORD_SLACK: f64 = 1e-6;

/// One sample of every monitored quantity. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub f_max: f64,
    pub a_mean: f64,
    pub speed_variation: f64,
    pub l2_norm: f64,
    pub h2s_norm: f64,
    /// `sup |x'| + [x']_{C^{1/2+s}}`.
    pub holder: f64,
    pub lambda_sup: f64,
    pub dlambda_sup: f64,
    pub dlambda_h_half: f64,
    pub curvature_max: f64,
    pub area: f64,
    pub perimeter: f64,
}

/// CSV header, one name per [`DiagnosticsRecord`] field.
pub const CSV_COLUMNS: [&str; 13] = [
    "time",
    "F_max",
    "A_mean",
    "speed_variation",
    "l2_norm",
    "h2s_norm",
    "holder",
    "lambda_sup",
    "dlambda_sup",
    "dlambda_h_half",
    "curvature_max",
    "area",
    "perimeter",
];

impl DiagnosticsRecord {
    pub fn fields(&self) -> [f64; 13] {
        [
            self.time,
            self.f_max,
            self.a_mean,
            self.speed_variation,
            self.l2_norm,
            self.h2s_norm,
            self.holder,
            self.lambda_sup,
            self.dlambda_sup,
            self.dlambda_h_half,
            self.curvature_max,
            self.area,
            self.perimeter,
        ]
    }

    pub fn from_fields(v: [f64; 13]) -> Self {
        Self {
            time: v[0],
            f_max: v[1],
            a_mean: v[2],
            speed_variation: v[3],
            l2_norm: v[4],
            h2s_norm: v[5],
            holder: v[6],
            lambda_sup: v[7],
            dlambda_sup: v[8],
            dlambda_h_half: v[9],
            curvature_max: v[10],
            area: v[11],
            perimeter: v[12],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|v| v.is_finite())
    }

    /// Whether `1/A <= F_max^2` holds up to [`SPEED_ARC_CHORD_SLACK`].
    pub fn speed_bound_holds(&self) -> bool {
        1.0 / self.a_mean <= self.f_max * self.f_max * (1.0 + SPEED_ARC_CHORD_SLACK)
    }
}

/// Discrete arc-chord sup over grid-aligned offsets.
pub fn arc_chord(curve: &ClosedCurve) -> Result<f64> {
    Ok(KernelWorkspace::new(curve)?.f_max())
}

/// Full arc-chord table `|eta_j| / |x(gamma_i) - x(gamma_i - eta_j)|`, rows over
/// nodes, columns over offsets `j = 1..n`.
pub fn arc_chord_table(curve: &ClosedCurve) -> Result<Vec<Vec<f64>>> {
    let ws = KernelWorkspace::new(curve)?;
    let grid = curve.grid;
    Ok(ws
        .g_rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, g)| grid.offset(j + 1).abs() * g)
                .collect()
        })
        .collect())
}

/// Signed curvature `(x1' x2'' - x2' x1'') / |x'|^3`.
pub fn curvature(curve: &ClosedCurve) -> Result<ScalarField> {
    let d1 = derivative(curve, 1).points;
    let d2 = derivative(curve, 2).points;
    let mean_speed = kahan_sum(&d1.iter().map(|v| v.norm()).collect::<Vec<_>>()) / d1.len() as f64;
    let values = d1
        .iter()
        .zip(&d2)
        .enumerate()
        .map(|(node, (a, b))| {
            let speed = a.norm();
            if !(speed > MIN_SPEED_FRACTION * mean_speed) {
                return Err(Error::SpeedDegenerate { node, speed });
            }
            Ok(a.cross(*b) / (speed * speed * speed))
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(curve.grid, values)
}

/// Shoelace area `(1/2) int x ^ x'` and perimeter `int |x'|`, spectrally differentiated.
pub fn area_perimeter(curve: &ClosedCurve) -> (f64, f64) {
    let d1 = derivative(curve, 1).points;
    let h = curve.grid.spacing();
    let cross: Vec<f64> = curve.points.iter().zip(&d1).map(|(p, d)| p.cross(*d)).collect();
    let speed: Vec<f64> = d1.iter().map(|d| d.norm()).collect();
    (0.5 * h * kahan_sum(&cross), h * kahan_sum(&speed))
}

/// Homogeneous `H^{1/2}` norm of `d_gamma lambda`.
pub fn dlambda_sobolev_half(dlambda: &ScalarField) -> f64 {
    sobolev_norm(dlambda, 0.5, true)
}

/// Every monitored quantity of `curve`; `s` selects the `H^{2+s}` and
/// `C^{1/2+s}` norms.
pub fn record(curve: &ClosedCurve, s: f64) -> Result<DiagnosticsRecord> {
    let ws = KernelWorkspace::new(curve)?;
    let lambda = lambda_from_decomposition(&ws);
    record_with(curve, &ws, &lambda, s)
}

/// [`record`] reusing an existing workspace and tangential speed of `curve`.
pub fn record_with(
    curve: &ClosedCurve,
    ws: &KernelWorkspace,
    lambda: &LambdaField,
    s: f64,
) -> Result<DiagnosticsRecord> {
    let kappa = curvature(curve)?;
    let (area, perimeter) = area_perimeter(curve);
    let d1 = derivative(curve, 1);
    let speed_sup = d1.points.par_iter().map(|v| v.norm()).reduce(|| 0.0, f64::max);
    let rec = DiagnosticsRecord {
        time: curve.time,
        f_max: ws.f_max(),
        a_mean: ws.mean_speed_sq(),
        speed_variation: speed_variation(curve),
        l2_norm: sobolev_norm(curve, 0.0, false),
        h2s_norm: sobolev_norm(curve, 2.0 + s, false),
        holder: speed_sup + holder_seminorm(&d1, 0.5 + s),
        lambda_sup: lambda.sup(),
        dlambda_sup: lambda.dsup(),
        dlambda_h_half: dlambda_sobolev_half(&lambda.dlambda),
        curvature_max: kappa.sup_norm(),
        area,
        perimeter,
    };
    if !rec.speed_bound_holds() {
        log::warn!(
            "t = {}: 1/A = {:e} exceeds F_max^2 = {:e}",
            rec.time,
            1.0 / rec.a_mean,
            rec.f_max * rec.f_max
        );
    }
    Ok(rec)
}
