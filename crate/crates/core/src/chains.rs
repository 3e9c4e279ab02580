//! The advantaged-count chain `Y`, its skeleton walk `H`, hitting times and
//! gambler's-ruin probabilities.
//!
//! From `Y = k` the chain moves to `k + 1` with probability
//! `p_k (1+s)/(2+s)`, to `k - 1` with probability `p_k / (2+s)` and stays
//! otherwise, where
//!
//! ```text
//! p_k = (2+s) k (N-k) / (N (k + (1+s)(N-k)))
//! ```
//!
//! Its jump chain is therefore a simple random walk with up-probability
//! `(1+s)/(2+s)` regardless of `k`.

use rand::Rng;

use crate::error::{Error, Result};

/// One-step law of `Y` from a given state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub down: f64,
    pub stay: f64,
    pub up: f64,
}

/// `p_k`, the probability that `Y` changes at the next step.
pub fn jump_probability(n: usize, s: f64, k: usize) -> f64 {
    if k == 0 || k >= n {
        return 0.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    (2.0 + s) * kf * rest / (nf * (kf + (1.0 + s) * rest))
}

/// Up-probability of the skeleton walk.
pub fn skeleton_up_probability(s: f64) -> f64 {
    (1.0 + s) / (2.0 + s)
}

pub fn y_transition(n: usize, s: f64, k: usize) -> Transition {
    let p = jump_probability(n, s, k);
    let up = p * skeleton_up_probability(s);
    let down = p / (2.0 + s);
    Transition {
        down,
        stay: 1.0 - p,
        up,
    }
}

/// Marginal chain of the number of advantaged individuals.
#[derive(Debug, Clone, PartialEq)]
pub struct YChain {
    n: usize,
    selection: f64,
    current: usize,
}

impl YChain {
    pub fn new(n: usize, selection: f64, start: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("N", n, "must be >= 2"));
        }
        if !(selection >= 0.0 && selection.is_finite()) {
            return Err(Error::invalid("s", selection, "must be finite and >= 0"));
        }
        if start > n {
            return Err(Error::invalid("start", start, "must lie in 0..=N"));
        }
        Ok(YChain {
            n,
            selection,
            current: start,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn selection(&self) -> f64 {
        self.selection
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn is_absorbed(&self) -> bool {
        self.current == 0 || self.current == self.n
    }

    pub fn transition(&self) -> Transition {
        y_transition(self.n, self.selection, self.current)
    }

    /// One step; returns the signed move (-1, 0 or +1).
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> i8 {
        if self.is_absorbed() {
            return 0;
        }
        let t = self.transition();
        let x: f64 = rng.random();
        if x < t.up {
            self.current += 1;
            1
        } else if x < t.up + t.down {
            self.current -= 1;
            -1
        } else {
            0
        }
    }
}

/// Skeleton walk `H`, absorbed at `0` and `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonWalk {
    n: usize,
    selection: f64,
    current: usize,
}

impl SkeletonWalk {
    pub fn new(n: usize, selection: f64, start: usize) -> Result<Self> {
        let chain = YChain::new(n, selection, start)?;
        Ok(SkeletonWalk {
            n: chain.n,
            selection: chain.selection,
            current: chain.current,
        })
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn is_absorbed(&self) -> bool {
        self.current == 0 || self.current == self.n
    }

    /// One jump; returns +1 or -1, or 0 once absorbed.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> i8 {
        if self.is_absorbed() {
            return 0;
        }
        if rng.random::<f64>() < skeleton_up_probability(self.selection) {
            self.current += 1;
            1
        } else {
            self.current -= 1;
            -1
        }
    }
}

/// Probability that a walk with up-probability `(1+s)/(2+s)` started at
/// `start` reaches `high` before `low`:
///
/// ```text
/// ((1+s)^(low-start) - 1) / ((1+s)^(low-high) - 1)
/// ```
///
/// Both powers have negative exponents and are evaluated as
/// `expm1(m * ln1p(s))`, so large `high - low` cannot overflow.
pub fn ruin_probability(s: f64, start: i64, low: i64, high: i64) -> Result<f64> {
    check_bracket(start, low, high)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(
            "s",
            s,
            "must be > 0 (use symmetric_ruin_probability for s = 0)",
        ));
    }
    let log_ratio = s.ln_1p();
    let num = ((low - start) as f64 * log_ratio).exp_m1();
    let den = ((low - high) as f64 * log_ratio).exp_m1();
    Ok((num / den).clamp(0.0, 1.0))
}

/// Same as [`ruin_probability`] for the symmetric walk (`s = 0`).
pub fn symmetric_ruin_probability(start: i64, low: i64, high: i64) -> Result<f64> {
    check_bracket(start, low, high)?;
    Ok((start - low) as f64 / (high - low) as f64)
}

fn check_bracket(start: i64, low: i64, high: i64) -> Result<()> {
    if !(low < start && start < high) {
        return Err(Error::invalid(
            "start",
            start,
            "need low < start < high",
        ));
    }
    Ok(())
}

/// Outcome of waiting for a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HittingRecord {
    pub target: usize,
    /// Steps taken until the target was hit, or until the run stopped.
    pub steps: u64,
    pub hit: bool,
    /// Boundary the chain got absorbed at without hitting the target.
    pub absorbed_at: Option<usize>,
}

impl HittingRecord {
    pub fn horizon_exceeded(&self) -> bool {
        !self.hit && self.absorbed_at.is_none()
    }
}

/// Default step budget for hitting-time runs, `100 N^2`.
pub fn default_horizon(n: usize) -> u64 {
    100 * (n as u64) * (n as u64)
}

/// Steps of `chain` until it first sits at `target`, censored at `horizon`
/// steps or at absorption on another boundary.
pub fn hitting_time<R: Rng + ?Sized>(
    chain: &mut YChain,
    target: usize,
    horizon: u64,
    rng: &mut R,
) -> HittingRecord {
    let mut steps = 0u64;
    loop {
        if chain.current == target {
            return HittingRecord {
                target,
                steps,
                hit: true,
                absorbed_at: None,
            };
        }
        if chain.is_absorbed() {
            return HittingRecord {
                target,
                steps,
                hit: false,
                absorbed_at: Some(chain.current),
            };
        }
        if steps >= horizon {
            return HittingRecord {
                target,
                steps,
                hit: false,
                absorbed_at: None,
            };
        }
        chain.step(rng);
        steps += 1;
    }
}

/// Jumps of `walk` until it first sits at `target` (the skeleton time
/// `S_target`), with the same censoring rules as [`hitting_time`].
pub fn skeleton_hitting_time<R: Rng + ?Sized>(
    walk: &mut SkeletonWalk,
    target: usize,
    horizon: u64,
    rng: &mut R,
) -> HittingRecord {
    let mut steps = 0u64;
    loop {
        if walk.current == target {
            return HittingRecord {
                target,
                steps,
                hit: true,
                absorbed_at: None,
            };
        }
        if walk.is_absorbed() || steps >= horizon {
            return HittingRecord {
                target,
                steps,
                hit: false,
                absorbed_at: walk.is_absorbed().then_some(walk.current),
            };
        }
        walk.step(rng);
        steps += 1;
    }
}
