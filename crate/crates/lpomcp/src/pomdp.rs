//! Generic POMDP abstractions: action spaces, the generative model
//! interface the solver samples from, and discounted returns.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PomdpError {
    #[error("action grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error("action grid bounds must satisfy lo < hi")]
    BadGridBounds,
    #[error("action space must be nonempty and strictly increasing")]
    BadActionSpace,
}

/// An ordered, strictly increasing set of scalar actions
/// (accelerations in m/s^2 for the driving model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    actions: Vec<f64>,
}

impl ActionSpace {
    pub fn new(actions: Vec<f64>) -> Result<Self, PomdpError> {
        if actions.is_empty() || actions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PomdpError::BadActionSpace);
        }
        Ok(Self { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.actions
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.actions[idx]
    }

    /// Grid spacing; 0 for a single-action space.
    pub fn spacing(&self) -> f64 {
        if self.actions.len() < 2 {
            0.0
        } else {
            (self.actions[self.actions.len() - 1] - self.actions[0])
                / (self.actions.len() - 1) as f64
        }
    }
}

/// `count` equidistant actions covering `[lo, hi]` inclusive.
pub fn action_grid(lo: f64, hi: f64, count: usize) -> Result<ActionSpace, PomdpError> {
    if count < 2 {
        return Err(PomdpError::GridTooSmall(count));
    }
    if lo >= hi {
        return Err(PomdpError::BadGridBounds);
    }
    let step = (hi - lo) / (count - 1) as f64;
    let mut actions: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    // Pin the last point to hi exactly.
    actions[count - 1] = hi;
    ActionSpace::new(actions)
}

/// One generative step: the sampled successor state, the observation
/// emitted on the way, the immediate reward and whether the successor
/// is terminal.
#[derive(Debug, Clone)]
pub struct Step<S> {
    pub next_state: S,
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
}

/// A generative POMDP model: given a state, an action and an RNG it
/// samples the next state, an observation and a reward.
///
/// Implementations must be immutable after construction so independent
/// solver instances can share them across threads; all sampling noise
/// must come from the passed RNG. Stepping a terminal state is a
/// contract violation.
pub trait GenerativeModel {
    type State: Clone;

    fn step(&self, state: &Self::State, action: f64, rng: &mut dyn RngCore) -> Step<Self::State>;

    fn is_terminal(&self, state: &Self::State) -> bool;
}

/// Discounted return of a reward sequence: `sum_i gamma^i r_i`.
/// An empty sequence yields 0.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    debug_assert!(gamma > 0.0 && gamma <= 1.0);
    let mut total = 0.0;
    let mut weight = 1.0;
    for &r in rewards {
        total += weight * r;
        weight *= gamma;
    }
    total
}
