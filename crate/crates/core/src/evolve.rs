//! Time integration of the contour: right-hand side, RK4 steps, Krasny
//! filtering and constant-speed projection on demand.
//!
//! Running the projection during the evolution, rather than only on the
//! initial data, is a numerical safeguard of this implementation.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::SimConfig;
use crate::curve::{ClosedCurve, Vec2};
use crate::diagnostics::{record, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::kernel::{KernelWorkspace, VelocityField};
use crate::lambda::lambda_from_decomposition;
use crate::reparam::{enforce_constant_speed, speed_variation};
use crate::scenario::make_scenario;
use crate::spectral::{from_spectral, to_spectral, SpectralCoeffs};

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    ArcChordBlowup,
    SpeedDegenerate,
    UserLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::ArcChordBlowup => "arc_chord_blowup",
            Termination::SpeedDegenerate => "speed_degenerate",
            Termination::UserLimit => "user_limit",
        }
    }

    /// Whether the run stopped on a suspected singularity.
    pub fn is_singular(self) -> bool {
        matches!(self, Termination::ArcChordBlowup | Termination::SpeedDegenerate)
    }
}

/// A step that could not be accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct Halt {
    pub reason: Termination,
    pub message: String,
}

impl Halt {
    fn arc_chord(message: impl Into<String>) -> Self {
        Self {
            reason: Termination::ArcChordBlowup,
            message: message.into(),
        }
    }
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        let reason = match e {
            Error::SpeedDegenerate { .. } | Error::NewtonFailed { .. } => Termination::SpeedDegenerate,
            _ => Termination::ArcChordBlowup,
        };
        Self {
            reason,
            message: e.to_string(),
        }
    }
}

/// Nontangential velocity plus `lambda dx/dgamma`, on a prebuilt workspace.
pub fn rhs_on(ws: &KernelWorkspace) -> VelocityField {
    let mut v = ws.velocity();
    let lambda = lambda_from_decomposition(ws);
    for ((vi, &li), &di) in v.values.iter_mut().zip(&lambda.lambda.values).zip(ws.d1()) {
        *vi += di * li;
    }
    v
}

/// Full right-hand side of the contour equation.
pub fn rhs(curve: &ClosedCurve) -> Result<VelocityField> {
    Ok(rhs_on(&KernelWorkspace::new(curve)?))
}

fn offset(curve: &ClosedCurve, k: &VelocityField, a: f64) -> ClosedCurve {
    ClosedCurve {
        grid: curve.grid,
        points: curve.points.iter().zip(&k.values).map(|(&p, &v)| p + v * a).collect(),
        time: curve.time,
    }
}

/// One classical RK4 step of size `dt` (any sign) without post-processing.
pub fn rk4_step(curve: &ClosedCurve, dt: f64) -> Result<ClosedCurve> {
    let k1 = rhs(curve)?;
    let k2 = rhs(&offset(curve, &k1, 0.5 * dt))?;
    let k3 = rhs(&offset(curve, &k2, 0.5 * dt))?;
    let k4 = rhs(&offset(curve, &k3, dt))?;
    let w = dt / 6.0;
    let points = (0..curve.n())
        .map(|i| {
            let incr = k1.values[i] + (k2.values[i] + k3.values[i]) * 2.0 + k4.values[i];
            curve.points[i] + incr * w
        })
        .collect();
    Ok(ClosedCurve {
        grid: curve.grid,
        points,
        time: curve.time + dt,
    })
}

/// Krasny filter on the packed coefficients `x1 + i x2`: every mode `k != 0`
/// with `|c_k| < level * max_{k != 0} |c_k|` is removed.
///
/// The removed part is subtracted in physical space, so a curve with nothing
/// to remove comes back bit-identical. Acting on moduli of the packed
/// coefficients makes the filter commute with rotations and translations.
pub fn krasny_filter(curve: &ClosedCurve, level: f64) -> ClosedCurve {
    if level <= 0.0 {
        return curve.clone();
    }
    let c = to_spectral(curve);
    let peak = c.iter().filter(|&(k, _)| k != 0).fold(0.0_f64, |m, (_, z)| m.max(z.norm()));
    let cut = level * peak;
    let mut removed = SpectralCoeffs::zeros(c.grid());
    let mut any = false;
    for (k, z) in c.iter() {
        if k != 0 && z.norm() < cut && z != Complex64::new(0.0, 0.0) {
            removed.set(k, z);
            any = true;
        }
    }
    if !any {
        return curve.clone();
    }
    let noise = from_spectral(curve, &removed);
    ClosedCurve {
        grid: curve.grid,
        points: curve.points.iter().zip(&noise.points).map(|(&p, &q)| p - q).collect(),
        time: curve.time,
    }
}

/// Stepper state: the current curve and the knobs applied after each step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepperState {
    pub curve: ClosedCurve,
    pub step_count: u64,
    pub dt: f64,
    pub filter_level: f64,
    pub reparam_trigger: f64,
    /// Arc-chord level at which a step is rejected as a suspected singularity.
    pub f_max_limit: f64,
    /// A step is also rejected once the arc-chord quantity implies a pair of
    /// distant nodes closer than this many node spacings.
    pub min_gap_cells: f64,
}

impl StepperState {
    /// State with the stepping knobs of `cfg`.
    pub fn new(curve: ClosedCurve, dt: f64, cfg: &SimConfig) -> Result<Self> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", "must be finite and non-negative"));
        }
        Ok(Self {
            curve,
            step_count: 0,
            dt,
            filter_level: cfg.filter_level,
            reparam_trigger: cfg.reparam_trigger,
            f_max_limit: cfg.f_max_limit,
            min_gap_cells: cfg.min_gap_cells,
        })
    }

    /// RK4 followed by the Krasny filter.
    pub fn advance(&self) -> std::result::Result<ClosedCurve, Halt> {
        let next = rk4_step(&self.curve, self.dt)?;
        let next = krasny_filter(&next, self.filter_level);
        if !next.is_finite() {
            return Err(Halt::arc_chord("non-finite node after RK4 step"));
        }
        Ok(next)
    }

    /// Reject `curve` if its arc-chord quantity has reached the configured
    /// limit or the resolution limit `pi / (min_gap_cells sqrt(A) h)`.
    ///
    /// Since `|eta| <= pi`, exceeding the resolution limit means some chord
    /// spans fewer than `min_gap_cells` node spacings `sqrt(A) h`.
    pub fn check_arc_chord(&self, curve: &ClosedCurve) -> std::result::Result<f64, Halt> {
        let ws = KernelWorkspace::new(curve)?;
        let f = ws.f_max();
        if !(f < self.f_max_limit) {
            return Err(Halt::arc_chord(format!(
                "arc-chord quantity {f:e} reached the limit {:e}",
                self.f_max_limit
            )));
        }
        let cell = ws.mean_speed_sq().sqrt() * curve.grid.spacing();
        let resolved = std::f64::consts::PI / (self.min_gap_cells * cell);
        if !(f < resolved) {
            return Err(Halt::arc_chord(format!(
                "arc-chord quantity {f:e} leaves a gap under {} node spacings",
                self.min_gap_cells
            )));
        }
        Ok(f)
    }

    /// Accept `curve` as the next state.
    pub fn accept(&self, curve: ClosedCurve) -> Self {
        Self {
            curve,
            step_count: self.step_count + 1,
            ..self.clone()
        }
    }

    /// One full step: RK4, filter, projection if the speed defect exceeds
    /// the trigger, then the arc-chord check. `dt = 0` returns the state
    /// unchanged.
    pub fn step(&self) -> std::result::Result<StepperState, Halt> {
        if self.dt == 0.0 {
            return Ok(self.clone());
        }
        let mut next = self.advance()?;
        if speed_variation(&next) > self.reparam_trigger {
            next = enforce_constant_speed(&next)?.0;
        }
        self.check_arc_chord(&next)?;
        Ok(self.accept(next))
    }
}

/// Time step from the CFL heuristic `c_cfl h / max |rhs|`.
pub fn cfl_dt(curve: &ClosedCurve, c_cfl: f64) -> Result<f64> {
    let vmax = rhs(curve)?.sup_norm();
    if !(vmax > 0.0) || !vmax.is_finite() {
        return Err(Error::param("dt", "cannot derive a CFL step from a vanishing velocity"));
    }
    Ok(c_cfl * curve.grid.spacing() / vmax)
}

/// Uniform schedule reaching `t_end` exactly: the step count and step size.
pub fn schedule(t_end: f64, dt: f64) -> (u64, f64) {
    let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    (steps, t_end / steps as f64)
}

/// Time after `step` of `steps` uniform steps ending at `t_end`.
pub fn schedule_time(t0: f64, t_end: f64, step: u64, steps: u64) -> f64 {
    if step == steps {
        t0 + t_end
    } else {
        t0 + t_end * (step as f64 / steps as f64)
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<ClosedCurve>,
    pub termination: Termination,
    /// Detail of a non-completed termination.
    pub message: Option<String>,
    /// Last accepted state.
    pub final_curve: ClosedCurve,
    pub steps_taken: u64,
    pub dt: f64,
}

/// Evolve the scenario of `cfg`.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    integrate(make_scenario(cfg)?, cfg)
}

/// Evolve `initial` under the stepping, recording and snapshot settings of `cfg`.
pub fn integrate(initial: ClosedCurve, cfg: &SimConfig) -> Result<RunOutput> {
    let dt = if cfg.dt > 0.0 { cfg.dt } else { cfl_dt(&initial, cfg.c_cfl)? };
    let (steps, dt) = schedule(cfg.t_end, dt);
    let t0 = initial.time;
    let mut state = StepperState::new(initial, dt, cfg)?;

    let mut records = vec![record(&state.curve, cfg.s)?];
    let mut snapshots = vec![state.curve.clone()];
    let mut last_recorded = 0;
    let mut last_snapshot = 0;
    let mut termination = Termination::Completed;
    let mut message = None;

    for step in 1..=steps {
        if cfg.max_steps > 0 && step > cfg.max_steps as u64 {
            termination = Termination::UserLimit;
            message = Some(format!("stopped after max_steps = {}", cfg.max_steps));
            break;
        }
        match state.step() {
            Ok(mut next) => {
                next.curve.time = schedule_time(t0, cfg.t_end, step, steps);
                state = next;
            }
            Err(halt) => {
                log::warn!("step {step}: {}", halt.message);
                termination = halt.reason;
                message = Some(halt.message);
                break;
            }
        }
        if step % cfg.record_interval as u64 == 0 || step == steps {
            records.push(record(&state.curve, cfg.s)?);
            last_recorded = step;
        }
        if (cfg.snapshot_interval > 0 && step % cfg.snapshot_interval as u64 == 0) || step == steps {
            snapshots.push(state.curve.clone());
            last_snapshot = step;
        }
    }

    let taken = state.step_count;
    if last_recorded != taken {
        records.push(record(&state.curve, cfg.s)?);
    }
    if last_snapshot != taken {
        snapshots.push(state.curve.clone());
    }
    Ok(RunOutput {
        records,
        snapshots,
        termination,
        message,
        final_curve: state.curve,
        steps_taken: taken,
        dt,
    })
}

/// Largest distance of any node from the circle of radius `r` about `center`.
pub fn radial_deviation(curve: &ClosedCurve, center: Vec2, r: f64) -> f64 {
    curve
        .points
        .iter()
        .fold(0.0_f64, |m, &p| m.max(((p - center).norm() - r).abs()))
}
