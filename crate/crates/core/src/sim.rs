//! Full-model run: advantage set plus ancestral weight vector, with `U_n`
//! and `V_n` maintained incrementally.

use rand::Rng;

use crate::error::Result;
use crate::model::{Horizon, PopulationState, RunConfig, StepEvent};
use crate::weights::{observe, TrajectoryPoint, WeightVector};

#[derive(Debug, Clone)]
pub struct Simulation {
    state: PopulationState,
    weights: WeightVector<f64>,
    u_total: f64,
    v_total: f64,
}

/// How a [`Simulation::run`] ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    /// Steps taken during this call.
    pub steps: u64,
    /// The horizon's stopping condition was met (always true for
    /// [`Horizon::Steps`]).
    pub reached: bool,
    /// `Y` at the end of the run.
    pub final_count: usize,
}

impl RunOutcome {
    pub fn censored(&self) -> bool {
        !self.reached
    }
}

impl Simulation {
    /// Starts from `state`, with weight 1 on every currently advantaged site.
    pub fn new(state: PopulationState) -> Self {
        let weights = WeightVector::from_flags(state.advantage_flags());
        let u_total = state.advantaged_count() as f64;
        Simulation {
            state,
            weights,
            u_total,
            v_total: 0.0,
        }
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Ok(Self::new(cfg.initial_state()?))
    }

    pub fn state(&self) -> &PopulationState {
        &self.state
    }

    pub fn weights(&self) -> &WeightVector<f64> {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.state.n()
    }

    /// Current `Z_n` from the incremental totals.
    pub fn point(&self) -> TrajectoryPoint {
        let n = self.state.n() as f64;
        TrajectoryPoint {
            step: self.state.step_index(),
            y: self.state.advantaged_count() as f64 / n,
            u: self.u_total / n,
            v: self.v_total / n,
        }
    }

    /// `(U_n, V_n)` unscaled.
    pub fn totals(&self) -> (f64, f64) {
        (self.u_total, self.v_total)
    }

    /// Recomputes the totals from the weight vector.
    pub fn resync(&mut self) {
        let z = observe(&self.state, &self.weights);
        let n = self.state.n() as f64;
        self.u_total = z.u * n;
        self.v_total = z.v * n;
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepEvent {
        let ev = self.state.sample_event(rng);
        self.apply(&ev);
        ev
    }

    /// Applies a given event, e.g. when replaying a recorded pedigree.
    pub fn apply(&mut self, ev: &StepEvent) {
        let k = ev.killed;
        let old = *self.weights.get(k);
        if self.state.is_advantaged(k) {
            self.u_total -= old;
        } else {
            self.v_total -= old;
        }
        self.state.apply_advantage_update(ev);
        self.weights.update(ev);
        let new = *self.weights.get(k);
        if self.state.is_advantaged(k) {
            self.u_total += new;
        } else {
            self.v_total += new;
        }
        // each weight is <= 1, so a stratum total is bounded by its size;
        // this also pins an emptied stratum to exactly 0
        let y = self.state.advantaged_count() as f64;
        let rest = (self.state.n() - self.state.advantaged_count()) as f64;
        self.u_total = self.u_total.clamp(0.0, y);
        self.v_total = self.v_total.clamp(0.0, rest);
    }

    /// Steps until the horizon is met. `observer` sees every event and the
    /// point reached after it. A [`Horizon::HitLevel`] run also stops,
    /// unreached, once `Y` is absorbed at another level.
    pub fn run<R, F>(&mut self, horizon: Horizon, rng: &mut R, mut observer: F) -> RunOutcome
    where
        R: Rng + ?Sized,
        F: FnMut(&StepEvent, &TrajectoryPoint),
    {
        let mut steps = 0u64;
        let max_steps = match horizon {
            Horizon::Steps(n) => n,
            Horizon::HitLevel { max_steps, .. } | Horizon::Fixation { max_steps } => max_steps,
        };
        let done = |st: &PopulationState| match horizon {
            Horizon::Steps(_) => false,
            Horizon::HitLevel { level, .. } => st.advantaged_count() == level,
            Horizon::Fixation { .. } => st.is_absorbed(),
        };
        // absorbed away from the target level: it can never be hit
        let stuck = |st: &PopulationState| {
            matches!(horizon, Horizon::HitLevel { .. }) && st.is_absorbed()
        };
        let mut reached = done(&self.state);
        while !reached && steps < max_steps && !stuck(&self.state) {
            let ev = self.step(rng);
            steps += 1;
            observer(&ev, &self.point());
            reached = done(&self.state);
        }
        if let Horizon::Steps(_) = horizon {
            reached = true;
        }
        RunOutcome {
            steps,
            reached,
            final_count: self.state.advantaged_count(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn incremental_totals_match_scratch() {
        let mut r = rng::from_seed(42);
        let mut sim = Simulation::new(PopulationState::new(50, 1.0, 10).unwrap());
        for _ in 0..5000 {
            sim.step(&mut r);
            let scratch = observe(sim.state(), sim.weights());
            let p = sim.point();
            assert!((scratch.u - p.u).abs() < 1e-12);
            assert!((scratch.v - p.v).abs() < 1e-12);
        }
    }

    #[test]
    fn hit_level_stops_on_level() {
        let mut r = rng::from_seed(1);
        let mut sim = Simulation::new(PopulationState::new(40, 1.0, 4).unwrap());
        let out = sim.run(
            Horizon::HitLevel {
                level: 20,
                max_steps: 1_000_000,
            },
            &mut r,
            |_, _| {},
        );
        assert!(out.reached);
        assert_eq!(sim.state().advantaged_count(), 20);
        assert_eq!(out.steps, sim.state().step_index());
    }

    #[test]
    fn zero_step_horizons() {
        let mut r = rng::from_seed(1);
        let mut sim = Simulation::new(PopulationState::new(10, 1.0, 5).unwrap());
        let out = sim.run(
            Horizon::HitLevel {
                level: 5,
                max_steps: 10,
            },
            &mut r,
            |_, _| {},
        );
        assert_eq!(out.steps, 0);
        assert!(out.reached);
        let out = sim.run(Horizon::Steps(0), &mut r, |_, _| {});
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn censoring_is_flagged() {
        let mut r = rng::from_seed(9);
        let mut sim = Simulation::new(PopulationState::new(100, 1.0, 1).unwrap());
        let out = sim.run(
            Horizon::HitLevel {
                level: 90,
                max_steps: 5,
            },
            &mut r,
            |_, _| {},
        );
        assert!(out.censored());
        assert_eq!(out.steps, 5);
    }
}
