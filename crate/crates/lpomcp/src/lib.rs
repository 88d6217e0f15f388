//! POMCP planning with Lipschitz multi-armed bandit action selection.
//!
//! The crate bundles four pieces:
//!
//! * [`bandit`] — UCB, UCB-V, POSLB and POSLB-V selection policies over
//!   per-arm return statistics;
//! * [`solver`] — a POMCP planner with polynomial-learning-rate
//!   incremental backups, max-over-actions node values, constant
//!   velocity rollouts and stream-clustered observations;
//! * [`driving`] / [`scenario`] — a longitudinal driving POMDP
//!   (IDM-driven traffic, noisy Cartesian observations, a four-term
//!   reward with collision checking) and the benchmark scenes;
//! * [`eval`] — root Q-value profiling, Gaussian-process ground-truth
//!   extraction, Lipschitz-constant estimation and mean-absolute-error
//!   convergence benchmarks.

pub mod bandit;
pub mod driving;
pub mod eval;
pub mod pomdp;
pub mod scenario;
pub mod solver;

pub use bandit::{ArmSet, ArmStatistics, BanditKind, BanditParams};
pub use pomdp::{action_grid, discounted_return, ActionSpace, GenerativeModel, Step};
pub use solver::{plan, Planner, SolverConfig};
