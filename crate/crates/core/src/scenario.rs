//! Canned initial contours.
//!
//! Every generator returns a constant-speed curve whose arc-chord quantity is
//! finite and below the configured limit, and whose polygon is simple.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ScenarioParams, SimConfig};
use crate::curve::{ClosedCurve, Grid, Vec2};
use crate::diagnostics::arc_chord;
use crate::error::{Error, Result};
use crate::reparam::project_to_constant_speed;

/// Speed defect the generators drive their output below.
pub const INITIAL_SPEED_TOL: f64 = 1e-12;
const MAX_PROJECTION_PASSES: usize = 12;
/// Margin added to `5/2 + s` in the rough-data decay exponent.
pub const ROUGH_DECAY_MARGIN: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Circle,
    Ellipse,
    PerturbedCircle,
    RoughH2s,
    FilamentProbe,
}

/// Suggested resolution and horizon of a scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioDefaults {
    pub n: usize,
    /// `0` selects the CFL step.
    pub dt: f64,
    pub t_end: f64,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Circle,
        Scenario::Ellipse,
        Scenario::PerturbedCircle,
        Scenario::RoughH2s,
        Scenario::FilamentProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Circle => "circle",
            Scenario::Ellipse => "ellipse",
            Scenario::PerturbedCircle => "perturbed_circle",
            Scenario::RoughH2s => "rough_h2s",
            Scenario::FilamentProbe => "filament_probe",
        }
    }

    pub fn defaults(self) -> ScenarioDefaults {
        match self {
            Scenario::Circle | Scenario::Ellipse => ScenarioDefaults { n: 256, dt: 0.0, t_end: 1.0 },
            Scenario::PerturbedCircle => ScenarioDefaults { n: 256, dt: 5e-4, t_end: 0.5 },
            Scenario::RoughH2s => ScenarioDefaults { n: 256, dt: 0.0, t_end: 0.05 },
            // The neck needs 512 nodes before the projection reaches roundoff.
            Scenario::FilamentProbe => ScenarioDefaults { n: 512, dt: 0.0, t_end: 1.0 },
        }
    }

    /// Generate the initial curve on `grid`.
    pub fn generate(self, grid: Grid, p: &ScenarioParams, s: f64, seed: u64) -> Result<ClosedCurve> {
        let raw = match self {
            Scenario::Circle => {
                positive("radius", p.radius)?;
                return Ok(ClosedCurve::circle(grid, p.radius));
            }
            Scenario::Ellipse => {
                positive("semi_major", p.semi_major)?;
                positive("semi_minor", p.semi_minor)?;
                ClosedCurve::ellipse(grid, p.semi_major, p.semi_minor)
            }
            Scenario::PerturbedCircle => {
                positive("radius", p.radius)?;
                if p.mode == 0 {
                    return Err(Error::param("mode", "must be at least 1"));
                }
                let (a, m) = (p.amplitude, p.mode as f64);
                radial_graph(grid, |g| p.radius * (1.0 + a * (m * g).cos()))
            }
            Scenario::RoughH2s => {
                let modes = rough_modes(grid.n(), s, p.roughness, seed);
                radial_graph(grid, |g| {
                    1.0 + modes
                        .iter()
                        .map(|&(k, a, theta)| a * (k as f64 * g + theta).cos())
                        .sum::<f64>()
                })
            }
            Scenario::FilamentProbe => {
                let d = p.gap;
                if !(d > 0.0 && d < 1.0) {
                    return Err(Error::param("gap", "must lie in (0, 1)"));
                }
                ClosedCurve::from_fn(grid, |t| {
                    let c = t.cos();
                    Vec2::new(c, t.sin() * (0.5 * d + (1.0 - 0.5 * d) * c * c))
                })
            }
        };
        if !raw.is_finite() {
            return Err(Error::param(self.name(), "parameters produce non-finite nodes"));
        }
        if let Some(i) = first_self_crossing(&raw) {
            return Err(Error::param(self.name(), format!("curve self-intersects at segment {i}")));
        }
        project_to_constant_speed(&raw, INITIAL_SPEED_TOL, MAX_PROJECTION_PASSES)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, "must be positive"))
    }
}

fn radial_graph(grid: Grid, r: impl Fn(f64) -> f64) -> ClosedCurve {
    ClosedCurve::from_fn(grid, |g| {
        let rho = r(g);
        Vec2::new(rho * g.cos(), rho * g.sin())
    })
}

/// `(k, a_k, theta_k)` for `k = 2..=n/4`, with
/// `a_k = c k^{-(5/2 + s + margin)} u_k`, `u_k ~ U[-1, 1]`, `theta_k ~ U[0, 2pi)`.
///
/// Draws are taken in ascending `k`, `u` before `theta`, so a finer grid
/// extends the spectrum of a coarser one with the same seed.
pub fn rough_modes(n: usize, s: f64, c: f64, seed: u64) -> Vec<(usize, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decay = 2.5 + s + ROUGH_DECAY_MARGIN;
    (2..=n / 4)
        .map(|k| {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            let theta: f64 = rng.gen_range(0.0..2.0 * PI);
            (k, c * (k as f64).powf(-decay) * u, theta)
        })
        .collect()
}

/// Index of the first polygon edge that crosses a non-adjacent edge.
pub fn first_self_crossing(curve: &ClosedCurve) -> Option<usize> {
    let p = &curve.points;
    let n = p.len();
    let seg = |i: usize| (p[i], p[(i + 1) % n]);
    let orient = |a: Vec2, b: Vec2, c: Vec2| (b - a).cross(c - a);
    (0..n).find(|&i| {
        let (a, b) = seg(i);
        (i + 2..n).any(|j| {
            if (j + 1) % n == i {
                return false;
            }
            let (c, d) = seg(j);
            let o1 = orient(a, b, c);
            let o2 = orient(a, b, d);
            let o3 = orient(c, d, a);
            let o4 = orient(c, d, b);
            o1 * o2 <= 0.0 && o3 * o4 <= 0.0
        })
    })
}

/// Initial curve of `cfg`, checked against its arc-chord limit.
pub fn make_scenario(cfg: &SimConfig) -> Result<ClosedCurve> {
    let scenario: Scenario = cfg.scenario.parse()?;
    let curve = scenario.generate(Grid::new(cfg.n)?, &cfg.params, cfg.s, cfg.seed)?;
    let f = arc_chord(&curve)?;
    if !(f <= cfg.f_max_limit) {
        return Err(Error::param(
            scenario.name(),
            format!("initial arc-chord quantity {f:e} exceeds f_max_limit {:e}", cfg.f_max_limit),
        ));
    }
    Ok(curve)
}
