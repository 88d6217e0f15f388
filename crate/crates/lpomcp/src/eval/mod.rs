//! Evaluation pipeline: dense root Q-value profiling, ground-truth
//! extraction by GP regression, MAE convergence benchmarks across
//! bandits and wall-time comparison.

mod gp;

pub use gp::{estimate_lipschitz, gp_fit, gp_fit_with_hypers, optimal_action, GpError, GpFit, HyperSearch};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bandit::{ArmSet, ArmStatistics, BanditKind, BanditParams};
use crate::pomdp::{action_grid, ActionSpace};
use crate::scenario::ScenarioConfig;
use crate::solver::{Planner, SolverConfig, SolverError};

/// Fraction of the collision penalty below which an episode return is
/// counted as collision-dominated.
const COLLISION_RETURN_FRACTION: f64 = 0.5;

/// Dense root-node Q-value estimates: per action the batch mean,
/// variance and count of the episode returns, plus the fraction of
/// returns dominated by the collision penalty.
#[derive(Debug, Clone, Serialize)]
pub struct QProfile {
    pub actions: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub count: Vec<u64>,
    pub collision_rate: Vec<f64>,
}

impl QProfile {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn max_mean(&self) -> f64 {
        self.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest jump between adjacent action means.
    pub fn max_adjacent_jump(&self) -> f64 {
        self.mean
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with schema `action,mean,variance,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("action,mean,variance,n\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.actions[i], self.mean[i], self.variance[i], self.count[i]
            ));
        }
        out
    }
}

/// Profiles the root Q-values of a scenario: for every action of
/// `grid`, runs `particles_per_action` POMCP episodes with the root
/// action pinned and UCB over `inner_actions` actions below the root,
/// and records batch statistics of the root returns.
///
/// Each action runs on its own deterministic RNG stream derived from
/// `seed`; actions are profiled in parallel.
pub fn q_profile(
    scenario: &ScenarioConfig,
    grid: &ActionSpace,
    particles_per_action: usize,
    inner_actions: usize,
    base: &SolverConfig,
    seed: u64,
) -> Result<QProfile, SolverError> {
    assert!(particles_per_action >= 1);
    let model = scenario.build_model();
    let inner = action_grid(-3.0, 1.0, inner_actions).expect("inner grid");
    let collision_threshold =
        COLLISION_RETURN_FRACTION * scenario.params.reward_collision;

    let results: Vec<(f64, f64, u64, f64)> = grid
        .values()
        .par_iter()
        .enumerate()
        .map(|(idx, &action)| {
            let mut config = base.clone();
            config.bandit = BanditKind::Ucb;
            config.actions = inner.clone();
            config.root_actions =
                Some(ActionSpace::new(vec![action]).expect("single action"));
            let mut planner = Planner::new(&model, config).expect("validated");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            let mut sampler = |r: &mut dyn rand::RngCore| scenario.sample_initial_state(r);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut collisions = 0u64;
            for _ in 0..particles_per_action {
                let ret = planner.run_episode(&mut sampler, &mut rng);
                sum += ret;
                sum_sq += ret * ret;
                if ret <= collision_threshold {
                    collisions += 1;
                }
            }
            let n = particles_per_action as f64;
            let mean = sum / n;
            let variance = (sum_sq / n - mean * mean).max(0.0);
            (mean, variance, particles_per_action as u64, collisions as f64 / n)
        })
        .collect();

    Ok(QProfile {
        actions: grid.values().to_vec(),
        mean: results.iter().map(|r| r.0).collect(),
        variance: results.iter().map(|r| r.1).collect(),
        count: results.iter().map(|r| r.2).collect(),
        collision_rate: results.iter().map(|r| r.3).collect(),
    })
}

/// Profiles the scenario on `grid`, fits a GP and evaluates its mean at
/// the grid actions: the desk-scale ground-truth pipeline. Returns the
/// fit and the optimal action.
pub fn ground_truth_action(
    scenario: &ScenarioConfig,
    grid: &ActionSpace,
    particles_per_action: usize,
    inner_actions: usize,
    base: &SolverConfig,
    seed: u64,
) -> Result<(GpFit, f64), SolverError> {
    let profile = q_profile(scenario, grid, particles_per_action, inner_actions, base, seed)?;
    let fit = gp_fit(&profile.actions, &profile.mean, &HyperSearch::default())
        .expect("profile actions are distinct");
    let best = optimal_action(&fit, grid);
    Ok((fit, best))
}

/// Episode checkpoints: powers of ten and twice-powers of ten up to the
/// budget, plus the budget itself.
pub fn checkpoint_schedule(budget: usize) -> Vec<usize> {
    let mut points = Vec::new();
    let mut base = 1usize;
    loop {
        if base > budget {
            break;
        }
        points.push(base);
        if 2 * base <= budget {
            points.push(2 * base);
        }
        match base.checked_mul(10) {
            Some(next) => base = next,
            None => break,
        }
    }
    if points.last() != Some(&budget) {
        points.push(budget);
    }
    points
}

/// Convergence of the root best action toward the ground truth: MAE
/// and its per-run standard deviation at every checkpoint, plus the
/// per-run traces.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceResult {
    pub scenario: String,
    pub bandit: BanditKind,
    pub n_actions: usize,
    pub a_star: f64,
    pub checkpoints: Vec<usize>,
    pub mae: Vec<f64>,
    pub sigma_mae: Vec<f64>,
    /// Best root action per run and checkpoint.
    pub traces: Vec<Vec<f64>>,
}

impl ConvergenceResult {
    pub fn final_mae(&self) -> f64 {
        *self.mae.last().expect("nonempty checkpoints")
    }

    /// Per-run absolute errors at the final checkpoint.
    pub fn final_errors(&self) -> Vec<f64> {
        self.traces
            .iter()
            .map(|t| (t.last().expect("nonempty trace") - self.a_star).abs())
            .collect()
    }

    /// Most frequent final best action (ties to the smallest value).
    pub fn modal_final_action(&self) -> f64 {
        let mut finals: Vec<f64> = self
            .traces
            .iter()
            .map(|t| *t.last().expect("nonempty trace"))
            .collect();
        finals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mut best_value = finals[0];
        let mut best_count = 0usize;
        let mut i = 0;
        while i < finals.len() {
            let mut j = i;
            while j < finals.len() && (finals[j] - finals[i]).abs() < 1e-12 {
                j += 1;
            }
            if j - i > best_count {
                best_count = j - i;
                best_value = finals[i];
            }
            i = j;
        }
        best_value
    }

    /// CSV with schema `checkpoint,mae,sigma_mae,bandit,scenario,n_actions`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("checkpoint,mae,sigma_mae,bandit,scenario,n_actions\n");
        for (i, &cp) in self.checkpoints.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                cp,
                self.mae[i],
                self.sigma_mae[i],
                self.bandit.label(),
                self.scenario,
                self.n_actions
            ));
        }
        out
    }
}

/// Runs `runs` independent seeded plans of `episodes` episodes and
/// records the best root action at every checkpoint. `a_star` is the
/// ground-truth optimal action the errors are measured against.
pub fn mae_benchmark(
    scenario: &ScenarioConfig,
    bandit: BanditKind,
    n_actions: usize,
    runs: usize,
    episodes: usize,
    a_star: f64,
    base: &SolverConfig,
    seed: u64,
) -> Result<ConvergenceResult, SolverError> {
    assert!(runs >= 1 && episodes >= 1);
    let model = scenario.build_model();
    let actions = action_grid(-3.0, 1.0, n_actions).expect("action grid");
    let checkpoints = checkpoint_schedule(episodes);

    let traces: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut config = base.clone();
            config.bandit = bandit;
            config.actions = actions.clone();
            config.root_actions = None;
            config.episodes = episodes;
            let mut planner = Planner::new(&model, config).expect("validated");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64);
            let mut sampler = |r: &mut dyn rand::RngCore| scenario.sample_initial_state(r);
            let mut trace = Vec::with_capacity(checkpoints.len());
            let mut next_checkpoint = 0usize;
            for episode in 1..=episodes {
                planner.run_episode(&mut sampler, &mut rng);
                if next_checkpoint < checkpoints.len() && episode == checkpoints[next_checkpoint]
                {
                    let (_, action, _) =
                        planner.best_action().expect("at least one arm visited");
                    trace.push(action);
                    next_checkpoint += 1;
                }
            }
            trace
        })
        .collect();

    let mut mae = Vec::with_capacity(checkpoints.len());
    let mut sigma = Vec::with_capacity(checkpoints.len());
    for i in 0..checkpoints.len() {
        let errors: Vec<f64> = traces.iter().map(|t| (t[i] - a_star).abs()).collect();
        let m = errors.iter().sum::<f64>() / errors.len() as f64;
        let var = errors.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / errors.len() as f64;
        mae.push(m);
        sigma.push(var.sqrt());
    }

    Ok(ConvergenceResult {
        scenario: scenario.name.clone(),
        bandit,
        n_actions,
        a_star,
        checkpoints,
        mae,
        sigma_mae: sigma,
        traces,
    })
}

/// Wall time of one full planning run per bandit under identical seeds
/// and budgets, with the ratio to the first entry.
#[derive(Debug, Clone, Serialize)]
pub struct RuntimeReport {
    pub bandit: BanditKind,
    pub seconds: f64,
    pub ratio_to_first: f64,
}

pub fn runtime_compare(
    scenario: &ScenarioConfig,
    bandits: &[BanditKind],
    n_actions: usize,
    episodes: usize,
    base: &SolverConfig,
    seed: u64,
) -> Result<Vec<RuntimeReport>, SolverError> {
    let model = scenario.build_model();
    let actions = action_grid(-3.0, 1.0, n_actions).expect("action grid");
    let mut reports = Vec::with_capacity(bandits.len());
    for &bandit in bandits {
        let mut config = base.clone();
        config.bandit = bandit;
        config.actions = actions.clone();
        config.root_actions = None;
        let mut planner = Planner::new(&model, config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sampler = |r: &mut dyn rand::RngCore| scenario.sample_initial_state(r);
        let start = std::time::Instant::now();
        for _ in 0..episodes {
            planner.run_episode(&mut sampler, &mut rng);
        }
        let seconds = start.elapsed().as_secs_f64();
        reports.push(RuntimeReport {
            bandit,
            seconds,
            ratio_to_first: 0.0,
        });
    }
    let first = reports[0].seconds.max(1e-12);
    for r in &mut reports {
        r.ratio_to_first = r.seconds / first;
    }
    Ok(reports)
}

/// Time per selection call of a policy on a synthetic arm set of size
/// `k`, for complexity scaling checks.
pub fn selection_microbenchmark(kind: BanditKind, k: usize, iterations: usize) -> f64 {
    let values: Vec<f64> = (0..k).map(|i| i as f64 * 0.125 - 3.0).collect();
    let stats: Vec<ArmStatistics> = (0..k)
        .map(|i| ArmStatistics::new(5 + (i as u64 % 7), -(i as f64) * 0.3, 1.0 + i as f64 * 0.1))
        .collect();
    let arms = ArmSet::with_stats(values, stats).expect("valid arm set");
    let params = BanditParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = std::time::Instant::now();
    let mut sink = 0usize;
    for t in 0..iterations {
        sink ^= crate::bandit::select_arm(kind, &arms, 100 + t as u64, &params, &mut rng)
            .expect("valid arms");
    }
    std::hint::black_box(sink);
    start.elapsed().as_secs_f64() / iterations as f64
}

/// Output file name `<scenario>_<bandit>_<K>actions_<seed>.<ext>`.
pub fn result_file_name(scenario: &str, bandit: &str, k: usize, seed: u64, ext: &str) -> String {
    format!("{scenario}_{bandit}_{k}actions_{seed}.{ext}")
}
