//! Twin-run stability experiment, self-convergence and regularization studies.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimConfig;
use crate::curve::{ClosedCurve, Vec2};
use crate::error::{Error, Result};
use crate::evolve::{cfl_dt, integrate, schedule, schedule_time, Halt, StepperState, Termination};
use crate::reparam::{enforce_constant_speed, mollify, project_to_constant_speed, speed_variation};
use crate::scenario::{make_scenario, INITIAL_SPEED_TOL};
use crate::spectral::{derivative, sobolev_norm, to_spectral};
use crate::sum::kahan_sum;

/// Distance series of a twin run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwinRunReport {
    pub times: Vec<f64>,
    /// `||x - y||_{H^1}` on the common grid.
    pub d_h1: Vec<f64>,
    /// `|A_x^{1/2} - A_y^{1/2}|`.
    pub d_speed: Vec<f64>,
    /// `sqrt(d_h1^2 + d_speed^2)`.
    pub d_total: Vec<f64>,
    /// Least-squares slope of `ln d_total` against time.
    pub fitted_c: f64,
    pub fit_intercept: f64,
    /// Largest absolute residual of the fit, in natural-log units.
    pub fit_residual: f64,
    pub termination: Termination,
    pub dt: f64,
}

/// `curve + delta cos(mode gamma) nu`, with `nu` the unit normal
/// `(x2', -x1') / |x'|`, projected back to constant speed.
pub fn perturb_normal(curve: &ClosedCurve, delta: f64, mode: u32) -> Result<ClosedCurve> {
    let d1 = derivative(curve, 1).points;
    let nodes = curve.grid.nodes();
    let points = curve
        .points
        .iter()
        .zip(&d1)
        .zip(&nodes)
        .map(|((&p, &t), &g)| {
            let normal = Vec2::new(t.y, -t.x) * (1.0 / t.norm());
            p + normal * (delta * (mode as f64 * g).cos())
        })
        .collect();
    let moved = ClosedCurve {
        grid: curve.grid,
        points,
        time: curve.time,
    };
    project_to_constant_speed(&moved, INITIAL_SPEED_TOL, 12)
}

fn mean_speed(curve: &ClosedCurve) -> f64 {
    let sq: Vec<f64> = derivative(curve, 1).points.iter().map(|v| v.norm_sq()).collect();
    (kahan_sum(&sq) / sq.len() as f64).sqrt()
}

/// `(d_h1, d_speed, d_total)` between two curves on the same grid.
pub fn twin_distance(x: &ClosedCurve, y: &ClosedCurve) -> (f64, f64, f64) {
    let h1 = sobolev_norm(&x.difference(y), 1.0, false);
    let sp = (mean_speed(x) - mean_speed(y)).abs();
    (h1, sp, h1.hypot(sp))
}

/// Least-squares line `ln d = b + C t` through the positive samples:
/// `(C, b, max |residual|)`. Fewer than two positive samples give zeros.
pub fn fit_log_linear(times: &[f64], d: &[f64]) -> (f64, f64, f64) {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(d)
        .filter(|&(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return (0.0, 0.0, 0.0);
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = ym - c * tm;
    let resid = pts.iter().fold(0.0_f64, |r, p| r.max((p.1 - b - c * p.0).abs()));
    (c, b, resid)
}

/// Twin run of the scenario of `cfg` against its perturbation by
/// `cfg.delta` in Fourier mode `cfg.twin_mode`.
pub fn twin_run(cfg: &SimConfig) -> Result<TwinRunReport> {
    cfg.validate()?;
    let x0 = make_scenario(cfg)?;
    let y0 = if cfg.delta == 0.0 {
        x0.clone()
    } else {
        perturb_normal(&x0, cfg.delta, cfg.twin_mode)?
    };
    twin_from(x0, y0, cfg)
}

/// Evolve `x0` and `y0` in lockstep and record their distance.
///
/// Both runs share the step size and project onto constant speed at the same
/// steps (whenever either exceeds the trigger), so the distance stays
/// symmetric in its arguments.
pub fn twin_from(x0: ClosedCurve, y0: ClosedCurve, cfg: &SimConfig) -> Result<TwinRunReport> {
    if x0.grid != y0.grid {
        return Err(Error::param("twin", "curves must share a grid"));
    }
    let dt = if cfg.dt > 0.0 {
        cfg.dt
    } else {
        cfl_dt(&x0, cfg.c_cfl)?.min(cfl_dt(&y0, cfg.c_cfl)?)
    };
    let (steps, dt) = schedule(cfg.t_end, dt);
    let t0 = x0.time;
    let mut sx = StepperState::new(x0, dt, cfg)?;
    let mut sy = StepperState::new(y0, dt, cfg)?;

    let mut report = TwinRunReport {
        times: Vec::new(),
        d_h1: Vec::new(),
        d_speed: Vec::new(),
        d_total: Vec::new(),
        fitted_c: 0.0,
        fit_intercept: 0.0,
        fit_residual: 0.0,
        termination: Termination::Completed,
        dt,
    };
    let push = |r: &mut TwinRunReport, x: &ClosedCurve, y: &ClosedCurve| {
        let (h1, sp, tot) = twin_distance(x, y);
        r.times.push(x.time);
        r.d_h1.push(h1);
        r.d_speed.push(sp);
        r.d_total.push(tot);
    };
    push(&mut report, &sx.curve, &sy.curve);

    let mut last_recorded = 0;
    for step in 1..=steps {
        if cfg.max_steps > 0 && step > cfg.max_steps as u64 {
            report.termination = Termination::UserLimit;
            break;
        }
        let joint = (|| -> std::result::Result<(ClosedCurve, ClosedCurve), Halt> {
            let mut x = sx.advance()?;
            let mut y = sy.advance()?;
            if speed_variation(&x).max(speed_variation(&y)) > cfg.reparam_trigger {
                x = enforce_constant_speed(&x)?.0;
                y = enforce_constant_speed(&y)?.0;
            }
            sx.check_arc_chord(&x)?;
            sy.check_arc_chord(&y)?;
            Ok((x, y))
        })();
        match joint {
            Ok((mut x, mut y)) => {
                let t = schedule_time(t0, cfg.t_end, step, steps);
                x.time = t;
                y.time = t;
                sx = sx.accept(x);
                sy = sy.accept(y);
            }
            Err(halt) => {
                log::warn!("twin step {step}: {}", halt.message);
                report.termination = halt.reason;
                break;
            }
        }
        if step % cfg.record_interval as u64 == 0 || step == steps {
            push(&mut report, &sx.curve, &sy.curve);
            last_recorded = step;
        }
    }
    if last_recorded != sx.step_count {
        push(&mut report, &sx.curve, &sy.curve);
    }
    let (c, b, r) = fit_log_linear(&report.times, &report.d_total);
    report.fitted_c = c;
    report.fit_intercept = b;
    report.fit_residual = r;
    Ok(report)
}

/// Error of one resolution against the reference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelError {
    pub n: usize,
    pub dt: f64,
    /// Largest node distance to the reference at shared parameter values.
    pub node_error: f64,
    /// Largest distance from a node to the reference curve, whatever the
    /// parametrization.
    pub shape_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub t_end: f64,
    pub reference_n: usize,
    pub reference_dt: f64,
    pub spatial: Vec<LevelError>,
    /// `log2(e_i / e_{i+1})` between consecutive spatial levels.
    pub spatial_orders: Vec<f64>,
    pub temporal: Vec<LevelError>,
    /// `log(e_i / e_{i+1}) / log(dt_i / dt_{i+1})` between consecutive temporal levels.
    pub temporal_orders: Vec<f64>,
}

/// Largest distance from the nodes of `curve` to the trigonometric
/// interpolant of `reference`, by Newton iteration on
/// `(x(t) - p) . x'(t) = 0` from the nearest reference node.
pub fn shape_distance(reference: &ClosedCurve, curve: &ClosedCurve) -> f64 {
    let c0 = to_spectral(reference);
    let c1 = to_spectral(&derivative(reference, 1));
    let c2 = to_spectral(&derivative(reference, 2));
    let nodes = reference.grid.nodes();
    let h = reference.grid.spacing();
    curve
        .points
        .par_iter()
        .map(|&p| {
            let (i0, _) = reference
                .points
                .iter()
                .enumerate()
                .map(|(i, &q)| (i, (q - p).norm_sq()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            let mut t = nodes[i0];
            for _ in 0..30 {
                let x = Vec2::from_complex(c0.eval(t)) - p;
                let d1 = Vec2::from_complex(c1.eval(t));
                let d2 = Vec2::from_complex(c2.eval(t));
                let f = x.dot(d1);
                let df = d1.norm_sq() + x.dot(d2);
                if !(df > 0.0) {
                    break;
                }
                let step = (f / df).clamp(-h, h);
                t -= step;
                if step.abs() <= 1e-15 {
                    break;
                }
            }
            (Vec2::from_complex(c0.eval(t)) - p).norm()
        })
        .reduce(|| 0.0, f64::max)
}

fn node_error(reference: &ClosedCurve, curve: &ClosedCurve) -> f64 {
    let stride = reference.n() / curve.n();
    curve
        .points
        .iter()
        .enumerate()
        .fold(0.0_f64, |m, (i, &p)| m.max((p - reference.points[stride * i]).norm()))
}

/// Settings of the convergence runs: no filtering and no in-flight
/// projection, both of which would act differently at each resolution.
fn study_config(cfg: &SimConfig, n: usize, dt: f64) -> SimConfig {
    SimConfig {
        n,
        dt,
        filter_level: 0.0,
        reparam_trigger: f64::INFINITY,
        record_interval: usize::MAX,
        snapshot_interval: 0,
        ..cfg.clone()
    }
}

fn terminal_state(cfg: &SimConfig) -> Result<ClosedCurve> {
    let out = integrate(make_scenario(cfg)?, cfg)?;
    if out.termination != Termination::Completed {
        return Err(Error::param(
            "convergence_study",
            format!("run at n = {} stopped early: {}", cfg.n, out.termination.as_str()),
        ));
    }
    Ok(out.final_curve)
}

fn orders(errors: &[f64], ratios: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(ratios)
        .map(|(e, r)| (e[0] / e[1]).ln() / r.ln())
        .collect()
}

/// Self-convergence of the scenario of `cfg` to `t_end`.
///
/// Spatial levels run at the smallest step in `dt_list` and are compared with
/// the largest `n`; temporal levels run at the smallest `n` and are compared
/// with the smallest step. Every `n` must divide the reference size.
pub fn convergence_study(cfg: &SimConfig, n_list: &[usize], dt_list: &[f64]) -> Result<ConvergenceReport> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n_list", "need at least two ascending sizes"));
    }
    if dt_list.len() < 2 || dt_list.windows(2).any(|w| w[0] <= w[1]) || !(dt_list[dt_list.len() - 1] > 0.0) {
        return Err(Error::param("dt_list", "need at least two descending positive steps"));
    }
    let n_ref = *n_list.last().unwrap();
    if n_list.iter().any(|&n| n_ref % n != 0) {
        return Err(Error::param("n_list", "every size must divide the finest"));
    }
    let dt_ref = *dt_list.last().unwrap();
    let n_time = n_list[0];

    let spatial_runs: Vec<ClosedCurve> = n_list
        .par_iter()
        .map(|&n| terminal_state(&study_config(cfg, n, dt_ref)))
        .collect::<Result<_>>()?;
    let temporal_runs: Vec<ClosedCurve> = dt_list[..dt_list.len() - 1]
        .par_iter()
        .map(|&dt| terminal_state(&study_config(cfg, n_time, dt)))
        .collect::<Result<_>>()?;

    let space_ref = spatial_runs.last().unwrap();
    let spatial: Vec<LevelError> = n_list[..n_list.len() - 1]
        .iter()
        .zip(&spatial_runs)
        .map(|(&n, c)| LevelError {
            n,
            dt: dt_ref,
            node_error: node_error(space_ref, c),
            shape_error: shape_distance(space_ref, c),
        })
        .collect();
    // The coarsest spatial run doubles as the temporal reference.
    let time_ref = &spatial_runs[0];
    let temporal: Vec<LevelError> = dt_list[..dt_list.len() - 1]
        .iter()
        .zip(&temporal_runs)
        .map(|(&dt, c)| LevelError {
            n: n_time,
            dt,
            node_error: node_error(time_ref, c),
            shape_error: shape_distance(time_ref, c),
        })
        .collect();

    let n_ratios: Vec<f64> = n_list.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let dt_ratios: Vec<f64> = dt_list.windows(2).map(|w| w[0] / w[1]).collect();
    let spatial_orders = orders(&spatial.iter().map(|l| l.node_error).collect::<Vec<_>>(), &n_ratios);
    let temporal_orders = orders(&temporal.iter().map(|l| l.node_error).collect::<Vec<_>>(), &dt_ratios);
    Ok(ConvergenceReport {
        scenario: cfg.scenario.clone(),
        t_end: cfg.t_end,
        reference_n: n_ref,
        reference_dt: dt_ref,
        spatial,
        spatial_orders,
        temporal,
        temporal_orders,
    })
}

/// Mollify by `eps`, then project onto constant speed. `eps = 0` returns the
/// input unchanged.
pub fn regularize(curve: &ClosedCurve, eps: f64) -> Result<ClosedCurve> {
    if eps == 0.0 {
        return Ok(curve.clone());
    }
    Ok(enforce_constant_speed(&mollify(curve, eps)?)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularizationReport {
    pub s: f64,
    pub eps: Vec<f64>,
    /// `||regularize(x, eps) - x||_{H^{2+s}}` per entry of `eps`.
    pub errors: Vec<f64>,
    /// Whether the errors decrease along the supplied list.
    pub monotone: bool,
}

/// Distance of the regularized curves to `curve` in `H^{2+s}`.
pub fn regularization_study(curve: &ClosedCurve, eps_list: &[f64], s: f64) -> Result<RegularizationReport> {
    if eps_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::param("eps_list", "must be strictly descending"));
    }
    let errors = eps_list
        .iter()
        .map(|&eps| Ok(sobolev_norm(&regularize(curve, eps)?.difference(curve), 2.0 + s, false)))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    Ok(RegularizationReport {
        s,
        eps: eps_list.to_vec(),
        errors,
        monotone,
    })
}
