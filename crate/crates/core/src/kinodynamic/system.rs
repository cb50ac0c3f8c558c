//! Dynamical systems integrated forward under piecewise-constant controls.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{AaBox, Scenario};
use crate::planning::Checker;
use crate::sampling::SampleStream;

pub trait DynamicalSystem: Send + Sync {
    fn name(&self) -> &'static str;
    fn state_dim(&self) -> usize;
    fn control_lo(&self) -> &[f64];
    fn control_hi(&self) -> &[f64];
    /// `[t_min, t_max]` with `0 < t_min <= t_max`.
    fn duration_bounds(&self) -> (f64, f64);
    /// Euler integration step.
    fn step_size(&self) -> f64;
    fn derivative(&self, state: &[f64], control: &[f64], out: &mut [f64]);
    /// Upper bound on workspace speed (for admissible time heuristics).
    fn max_speed(&self) -> f64;

    /// Workspace position of a state (what collision checks see).
    fn position<'a>(&self, state: &'a [f64]) -> &'a [f64] {
        &state[..2]
    }

    /// Euclidean embedding used for nearest-neighbor and witness queries.
    fn embed(&self, state: &[f64]) -> Vec<f64> {
        state.to_vec()
    }

    /// Bring a state back to canonical form after integration.
    fn normalize(&self, _state: &mut [f64]) {}

    fn start_state(&self, scenario: &Scenario) -> Vec<f64>;

    fn sample_state(&self, stream: &mut SampleStream, domain: &AaBox) -> Vec<f64>;

    /// States visited every `h` (plus a final partial step), starting with `state`.
    fn propagate(&self, state: &[f64], control: &[f64], duration: f64) -> Vec<Vec<f64>> {
        let h = self.step_size();
        let mut out = vec![state.to_vec()];
        let mut x = state.to_vec();
        let mut dx = vec![0.0; x.len()];
        let mut elapsed = 0.0;
        while duration - elapsed > 1e-12 {
            let dt = h.min(duration - elapsed);
            self.derivative(&x, control, &mut dx);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += dt * di;
            }
            self.normalize(&mut x);
            elapsed += dt;
            out.push(x.clone());
        }
        out
    }
}

/// `x' = u` with the control clipped to the unit Euclidean disc, so the
/// workspace speed never exceeds 1.
#[derive(Clone, Debug)]
pub struct SingleIntegrator2d {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub durations: (f64, f64),
    pub h: f64,
}

impl Default for SingleIntegrator2d {
    fn default() -> Self {
        SingleIntegrator2d {
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
            durations: (0.02, 0.2),
            h: 0.02,
        }
    }
}

impl DynamicalSystem for SingleIntegrator2d {
    fn name(&self) -> &'static str {
        "integrator2d"
    }
    fn state_dim(&self) -> usize {
        2
    }
    fn control_lo(&self) -> &[f64] {
        &self.lo
    }
    fn control_hi(&self) -> &[f64] {
        &self.hi
    }
    fn duration_bounds(&self) -> (f64, f64) {
        self.durations
    }
    fn step_size(&self) -> f64 {
        self.h
    }
    fn max_speed(&self) -> f64 {
        1.0
    }
    fn derivative(&self, _state: &[f64], control: &[f64], out: &mut [f64]) {
        let norm = (control[0] * control[0] + control[1] * control[1]).sqrt();
        let s = if norm > 1.0 { 1.0 / norm } else { 1.0 };
        out[0] = control[0] * s;
        out[1] = control[1] * s;
    }
    fn start_state(&self, scenario: &Scenario) -> Vec<f64> {
        scenario.start.0.clone()
    }
    fn sample_state(&self, stream: &mut SampleStream, domain: &AaBox) -> Vec<f64> {
        stream.next_sample(domain).0
    }
}

/// Kinematic car: `x' = v cos psi, y' = v sin psi, psi' = omega`.
#[derive(Clone, Debug)]
pub struct KinematicCar {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub durations: (f64, f64),
    pub h: f64,
    /// Weight of the heading in the metric embedding.
    pub heading_weight: f64,
}

impl Default for KinematicCar {
    fn default() -> Self {
        KinematicCar {
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
            durations: (0.05, 0.3),
            h: 0.02,
            heading_weight: 0.1,
        }
    }
}

impl DynamicalSystem for KinematicCar {
    fn name(&self) -> &'static str {
        "car"
    }
    fn state_dim(&self) -> usize {
        3
    }
    fn control_lo(&self) -> &[f64] {
        &self.lo
    }
    fn control_hi(&self) -> &[f64] {
        &self.hi
    }
    fn duration_bounds(&self) -> (f64, f64) {
        self.durations
    }
    fn step_size(&self) -> f64 {
        self.h
    }
    fn max_speed(&self) -> f64 {
        self.lo[0].abs().max(self.hi[0].abs())
    }
    fn derivative(&self, state: &[f64], control: &[f64], out: &mut [f64]) {
        out[0] = control[0] * state[2].cos();
        out[1] = control[0] * state[2].sin();
        out[2] = control[1];
    }
    fn embed(&self, state: &[f64]) -> Vec<f64> {
        vec![
            state[0],
            state[1],
            self.heading_weight * state[2].cos(),
            self.heading_weight * state[2].sin(),
        ]
    }
    fn normalize(&self, state: &mut [f64]) {
        state[2] = (state[2] + PI).rem_euclid(2.0 * PI) - PI;
    }
    fn start_state(&self, scenario: &Scenario) -> Vec<f64> {
        vec![scenario.start[0], scenario.start[1], 0.0]
    }
    fn sample_state(&self, stream: &mut SampleStream, domain: &AaBox) -> Vec<f64> {
        let p = stream.next_sample(domain);
        let psi = stream.aux_uniform(-PI, PI);
        vec![p[0], p[1], psi]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Integrator2d,
    Car,
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integrator2d" | "integrator" => Ok(SystemKind::Integrator2d),
            "car" => Ok(SystemKind::Car),
            other => Err(Error::usage(format!("unknown system `{other}`"))),
        }
    }
}

impl SystemKind {
    pub fn build(self) -> Box<dyn DynamicalSystem> {
        match self {
            SystemKind::Integrator2d => Box::new(SingleIntegrator2d::default()),
            SystemKind::Car => Box::new(KinematicCar::default()),
        }
    }
}

/// One Monte Carlo propagation: a random control held for a random duration.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    pub trajectory: Vec<Vec<f64>>,
    pub control: Vec<f64>,
    pub duration: f64,
}

/// Draws a control uniformly from the control box and a duration uniformly
/// from the duration bounds, then integrates. Validity is left to the caller.
pub fn monte_carlo_propagate(system: &dyn DynamicalSystem, from: &[f64], stream: &mut SampleStream) -> Propagation {
    let control: Vec<f64> = system
        .control_lo()
        .iter()
        .zip(system.control_hi())
        .map(|(lo, hi)| stream.aux_uniform(*lo, *hi))
        .collect();
    let (t_min, t_max) = system.duration_bounds();
    let duration = stream.aux_uniform(t_min, t_max);
    Propagation {
        trajectory: system.propagate(from, &control, duration),
        control,
        duration,
    }
}

/// Every integration state after the first lies in free space.
pub(crate) fn trajectory_valid(checker: &Checker<'_>, system: &dyn DynamicalSystem, trajectory: &[Vec<f64>]) -> bool {
    trajectory[1..].iter().all(|s| checker.point(system.position(s)))
}

pub(crate) fn check_system(system: &dyn DynamicalSystem, scenario: &Scenario) -> Result<()> {
    if scenario.dimension != 2 {
        return Err(Error::usage("bundled systems move in a 2-D workspace"));
    }
    let (t_min, t_max) = system.duration_bounds();
    if !(t_min > 0.0 && t_min <= t_max) {
        return Err(Error::usage("duration bounds must satisfy 0 < t_min <= t_max"));
    }
    if !(system.step_size() > 0.0) {
        return Err(Error::usage("integration step must be positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_constant_field() {
        let sys = SingleIntegrator2d {
            h: 0.1,
            ..Default::default()
        };
        let traj = sys.propagate(&[0.0, 0.0], &[1.0, 0.0], 0.5);
        let end = traj.last().unwrap();
        assert!((end[0] - 0.5).abs() < 1e-12 && end[1].abs() < 1e-12);
        assert_eq!(traj[0], vec![0.0, 0.0]);
        let still = sys.propagate(&[0.3, 0.4], &[0.0, 0.0], 0.5);
        assert_eq!(still.last().unwrap(), &vec![0.3, 0.4]);
    }

    #[test]
    fn integrator_speed_is_clipped() {
        let sys = SingleIntegrator2d::default();
        let traj = sys.propagate(&[0.0, 0.0], &[1.0, 1.0], 1.0);
        let end = traj.last().unwrap();
        assert!(((end[0] * end[0] + end[1] * end[1]).sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_duration_interval() {
        let sys = SingleIntegrator2d {
            durations: (0.1, 0.1),
            ..Default::default()
        };
        let mut stream = SampleStream::uniform(2, 3);
        for _ in 0..20 {
            let p = monte_carlo_propagate(&sys, &[0.5, 0.5], &mut stream);
            assert_eq!(p.duration, 0.1);
        }
    }

    #[test]
    fn car_drives_straight_and_wraps_heading() {
        let car = KinematicCar::default();
        let traj = car.propagate(&[0.0, 0.0, 0.0], &[1.0, 0.0], 0.4);
        let end = traj.last().unwrap();
        assert!((end[0] - 0.4).abs() < 1e-12 && end[1].abs() < 1e-12);
        let spun = car.propagate(&[0.0, 0.0, 3.0], &[0.0, 1.0], 1.0);
        let psi = spun.last().unwrap()[2];
        assert!((-PI..PI).contains(&psi));
        assert!((psi - (4.0 - 2.0 * PI)).abs() < 1e-9);
    }
}
