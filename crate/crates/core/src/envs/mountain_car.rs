use rand::Rng as _;

use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::Result;
use crate::rng::{self, Rng};

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
pub const MAX_STEPS: usize = 200;

/// Classic-control mountain car: observation `(position, velocity)`, actions
/// push left / coast / push right, reward -1 per step.
#[derive(Debug, Clone)]
pub struct MountainCar {
    spec: EnvSpec,
    position: f64,
    velocity: f64,
    clock: EpisodeClock,
    rng: Rng,
}

impl MountainCar {
    pub fn new(seed: u64) -> Self {
        Self::with_max_steps(MAX_STEPS, seed)
    }

    pub fn with_max_steps(max_steps: usize, seed: u64) -> Self {
        Self {
            spec: EnvSpec {
                name: "mountain-car".into(),
                state_dim: 2,
                action_count: 3,
                lows: vec![MIN_POSITION, -MAX_SPEED],
                highs: vec![MAX_POSITION, MAX_SPEED],
                max_steps: max_steps.max(1),
                bins: vec![40, 40],
            },
            position: -0.5,
            velocity: 0.0,
            clock: EpisodeClock::default(),
            rng: rng::stream(seed, rng::streams::ENV),
        }
    }

    /// Places the car at an arbitrary state, starting a fresh episode.
    pub fn reset_to(&mut self, position: f64, velocity: f64) -> Vec<f64> {
        self.clock.reset();
        self.position = position;
        self.velocity = velocity;
        vec![position, velocity]
    }

    /// One application of the dynamics, without episode bookkeeping.
    pub fn dynamics(position: f64, velocity: f64, action: usize) -> (f64, f64) {
        let mut v = velocity + (action as f64 - 1.0) * FORCE - GRAVITY * (3.0 * position).cos();
        v = v.clamp(-MAX_SPEED, MAX_SPEED);
        let x = (position + v).clamp(MIN_POSITION, MAX_POSITION);
        if x <= MIN_POSITION && v < 0.0 {
            v = 0.0;
        }
        (x, v)
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        let x = self.rng.random_range(-0.6..-0.4);
        self.reset_to(x, 0.0)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.begin_step(&self.spec, action)?;
        let (x, v) = Self::dynamics(self.position, self.velocity, action);
        self.position = x;
        self.velocity = v;
        let (done, truncated) = self.clock.finish_step(self.spec.max_steps, x >= GOAL_POSITION);
        Ok(StepResult {
            next_state: vec![x, v],
            reward: -1.0,
            done,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_matches_formula() {
        let mut env = MountainCar::new(0);
        env.reset_to(-0.5, 0.0);
        let r = env.step(2).unwrap();
        let v = 0.001 - 0.0025 * (-1.5f64).cos();
        assert!((r.next_state[1] - v).abs() < 1e-15);
        assert!((r.next_state[0] - (-0.5 + v)).abs() < 1e-15);
        assert_eq!(r.reward, -1.0);
    }

    #[test]
    fn full_throttle_needs_momentum() {
        // oracle: iterate the closed-form update directly
        let (mut x, mut v) = (-0.5f64, 0.0f64);
        let mut reached = false;
        for _ in 0..200 {
            v = (v + 0.001 - 0.0025 * (3.0 * x).cos()).clamp(-0.07, 0.07);
            x = (x + v).clamp(-1.2, 0.6);
            reached |= x >= 0.5;
        }
        assert!(!reached);

        let mut env = MountainCar::new(0);
        env.reset_to(-0.5, 0.0);
        for step in 0..200 {
            let r = env.step(2).unwrap();
            assert!(!r.terminated(), "reached goal at step {step}");
        }
    }

    #[test]
    fn left_wall_stops_the_car() {
        let (x, v) = MountainCar::dynamics(-1.19, -0.05, 0);
        assert_eq!(x, MIN_POSITION);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn speed_is_clipped() {
        let (_, v) = MountainCar::dynamics(0.0, 0.0699, 2);
        assert!(v <= MAX_SPEED);
    }

    #[test]
    fn reaching_goal_terminates() {
        let mut env = MountainCar::new(0);
        env.reset_to(0.49, 0.05);
        let r = env.step(2).unwrap();
        assert!(r.terminated());
    }

    #[test]
    fn start_is_seeded_and_in_range() {
        let mut a = MountainCar::new(3);
        let mut b = MountainCar::new(3);
        for _ in 0..20 {
            let s = a.reset();
            assert_eq!(s, b.reset());
            assert!((-0.6..-0.4).contains(&s[0]));
            assert_eq!(s[1], 0.0);
        }
    }

    #[test]
    fn episode_is_capped() {
        let mut env = MountainCar::new(1);
        env.reset();
        let mut steps = 0;
        loop {
            steps += 1;
            if env.step(1).unwrap().done {
                break;
            }
        }
        assert_eq!(steps, MAX_STEPS);
    }
}
