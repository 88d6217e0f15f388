//! POMCP over a history tree with bandit-driven action selection.
//!
//! The solver differs from textbook POMCP in four ways: actions inside
//! the tree are chosen by any of the policies in [`crate::bandit`],
//! leaf evaluation uses constant-velocity rollouts (action 0), backups
//! maintain incremental mean and variance with a polynomial learning
//! rate, and node values are the maximum of the per-action means.
//! Continuous observations are discretized by stream clustering: each
//! (node, action) edge keeps an ordered list of cluster centers and an
//! observation joins the first center within the distance threshold.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::bandit::{select_arm, ArmSet, BanditError, BanditKind, BanditParams};
use crate::pomdp::{ActionSpace, GenerativeModel};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Bandit(#[from] BanditError),
}

/// Polynomial learning rate `1 / n^omega`.
pub fn learning_rate(n: u64, omega: f64) -> f64 {
    assert!(n >= 1, "learning rate undefined for n = 0");
    debug_assert!(omega > 0.0 && omega <= 1.0);
    1.0 / (n as f64).powf(omega)
}

/// One step of the incremental mean/variance recursion.
///
/// `n` is the index of the incoming sample (1-based). With `omega = 1`
/// this reproduces batch mean and population variance; `omega < 1`
/// weighs recent samples more strongly.
pub fn incremental_update(
    mean_prev: f64,
    var_prev: f64,
    n: u64,
    sample: f64,
    omega: f64,
) -> (f64, f64) {
    let eta = learning_rate(n, omega);
    let delta = sample - mean_prev;
    let mean = mean_prev + eta * delta;
    let var = (1.0 - eta) * (var_prev + eta * delta * delta);
    (mean, var)
}

/// Ordered list of observation cluster centers with a Euclidean
/// assignment threshold. Centers are only ever appended.
#[derive(Debug, Clone, Serialize)]
pub struct ObservationClusterList {
    centers: Vec<Vec<f64>>,
    threshold: f64,
}

impl ObservationClusterList {
    pub fn new(threshold: f64) -> Self {
        Self {
            centers: Vec::new(),
            threshold,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// Returns the id of the first center within the threshold, or
    /// appends `obs` as a new center and returns its id.
    pub fn discretize(&mut self, obs: &[f64]) -> usize {
        let thresh_sq = self.threshold * self.threshold;
        for (i, center) in self.centers.iter().enumerate() {
            debug_assert_eq!(center.len(), obs.len());
            let dist_sq: f64 = center
                .iter()
                .zip(obs)
                .map(|(c, o)| (c - o) * (c - o))
                .sum();
            if dist_sq <= thresh_sq {
                return i;
            }
        }
        self.centers.push(obs.to_vec());
        self.centers.len() - 1
    }
}

/// Stand-alone form of [`ObservationClusterList::discretize`].
pub fn discretize_observation(obs: &[f64], clusters: &mut ObservationClusterList) -> usize {
    clusters.discretize(obs)
}

/// Solver parameters. Defaults follow the evaluation setup: polynomial
/// learning rate 0.77, discount 0.95, rollout depth 20, observation
/// clustering threshold 1 m.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub bandit: BanditKind,
    pub params: BanditParams,
    /// Learning-rate exponent in (0, 1].
    pub omega: f64,
    pub gamma: f64,
    /// Maximum rollout length in steps.
    pub rollout_depth: usize,
    /// Episode budget used by [`plan`].
    pub episodes: usize,
    /// Observation clustering threshold (meters).
    pub obs_threshold: f64,
    /// Action grid used at every tree node.
    pub actions: ActionSpace,
    /// Optional override for the root node only; used to pin the root
    /// action when profiling Q-values.
    pub root_actions: Option<ActionSpace>,
}

impl SolverConfig {
    pub fn new(bandit: BanditKind, actions: ActionSpace) -> Self {
        Self {
            bandit,
            params: BanditParams::default(),
            omega: 0.77,
            gamma: 0.95,
            rollout_depth: 20,
            episodes: 1000,
            obs_threshold: 1.0,
            actions,
            root_actions: None,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "omega must lie in (0, 1], got {}",
                self.omega
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.rollout_depth < 1 {
            return Err(SolverError::InvalidConfig(
                "rollout depth must be at least 1".into(),
            ));
        }
        if self.obs_threshold < 0.0 {
            return Err(SolverError::InvalidConfig(
                "observation threshold must be nonnegative".into(),
            ));
        }
        if self.params.exploration_constant <= 0.0 {
            return Err(SolverError::InvalidConfig(
                "exploration constant must be positive".into(),
            ));
        }
        if self.params.lipschitz_constant < 0.0 {
            return Err(SolverError::InvalidConfig(
                "lipschitz constant must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Index of a node in the tree arena.
pub type NodeId = usize;

pub const ROOT: NodeId = 0;

#[derive(Debug, Clone)]
struct ActionEdge {
    clusters: ObservationClusterList,
    /// observation cluster id -> child node.
    children: BTreeMap<usize, NodeId>,
}

/// One history node: visit count, max-backup value, per-action
/// statistics and the particles that reached this history.
#[derive(Debug, Clone)]
pub struct BeliefNode<S> {
    pub depth: u32,
    pub visits: u64,
    pub value: f64,
    pub arms: ArmSet,
    edges: Vec<ActionEdge>,
    pub particles: Vec<S>,
}

impl<S> BeliefNode<S> {
    fn new(depth: u32, arms: ArmSet, obs_threshold: f64) -> Self {
        let edges = (0..arms.len())
            .map(|_| ActionEdge {
                clusters: ObservationClusterList::new(obs_threshold),
                children: BTreeMap::new(),
            })
            .collect();
        Self {
            depth,
            visits: 0,
            value: 0.0,
            arms,
            edges,
            particles: Vec::new(),
        }
    }

    pub fn child(&self, action_idx: usize, cluster_id: usize) -> Option<NodeId> {
        self.edges[action_idx].children.get(&cluster_id).copied()
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.edges
            .iter()
            .flat_map(|e| e.children.values().copied())
    }

    pub fn is_leaf(&self) -> bool {
        self.edges.iter().all(|e| e.children.is_empty())
    }

    pub fn observation_clusters(&self, action_idx: usize) -> &ObservationClusterList {
        &self.edges[action_idx].clusters
    }
}

/// Arena-allocated belief tree. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct BeliefTree<S> {
    nodes: Vec<BeliefNode<S>>,
    inner_values: Arc<[f64]>,
    obs_threshold: f64,
}

impl<S> BeliefTree<S> {
    fn new(root_actions: &ActionSpace, inner_actions: &ActionSpace, obs_threshold: f64) -> Self {
        let root_arms = ArmSet::new(root_actions.values().to_vec()).expect("validated");
        let inner_values: Arc<[f64]> = inner_actions.values().to_vec().into();
        Self {
            nodes: vec![BeliefNode::new(0, root_arms, obs_threshold)],
            inner_values,
            obs_threshold,
        }
    }

    fn add_node(&mut self, depth: u32) -> NodeId {
        let arms = ArmSet::new(Arc::clone(&self.inner_values)).expect("validated");
        self.nodes.push(BeliefNode::new(depth, arms, self.obs_threshold));
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &BeliefNode<S> {
        &self.nodes[id]
    }

    pub fn root(&self) -> &BeliefNode<S> {
        &self.nodes[ROOT]
    }

    pub fn nodes(&self) -> &[BeliefNode<S>] {
        &self.nodes
    }

    /// Per-depth (node count, summed visit counts), level 0 = root.
    pub fn depth_stats(&self) -> Vec<(usize, u64)> {
        let max_depth = self.nodes.iter().map(|n| n.depth).max().unwrap_or(0) as usize;
        let mut out = vec![(0usize, 0u64); max_depth + 1];
        for n in &self.nodes {
            let d = n.depth as usize;
            out[d].0 += 1;
            out[d].1 += n.visits;
        }
        out
    }

    /// Mean depth over nodes without children.
    pub fn mean_leaf_depth(&self) -> f64 {
        let mut count = 0usize;
        let mut total = 0u64;
        for n in &self.nodes {
            if n.is_leaf() {
                count += 1;
                total += n.depth as u64;
            }
        }
        if count == 0 {
            0.0
        } else {
            total as f64 / count as f64
        }
    }

    /// JSON-lines dump: one node per line in creation order with depth,
    /// visits, value and per-arm statistics.
    pub fn dump_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct ArmRecord {
            action: f64,
            n: u64,
            mean: f64,
            variance: f64,
        }
        #[derive(Serialize)]
        struct NodeRecord {
            depth: u32,
            visits: u64,
            value: f64,
            arms: Vec<ArmRecord>,
        }
        let mut out = String::new();
        for n in &self.nodes {
            let rec = NodeRecord {
                depth: n.depth,
                visits: n.visits,
                value: n.value,
                arms: n
                    .arms
                    .stats()
                    .iter()
                    .enumerate()
                    .map(|(i, s)| ArmRecord {
                        action: n.arms.value(i),
                        n: s.count,
                        mean: s.mean,
                        variance: s.variance,
                    })
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("serializable"));
            out.push('\n');
        }
        out
    }
}

/// Discounted return of a constant-velocity rollout (ego action 0)
/// from `state`, truncated after `depth` steps or at a terminal state.
pub fn rollout<M: GenerativeModel>(
    model: &M,
    state: &M::State,
    depth: usize,
    gamma: f64,
    rng: &mut dyn RngCore,
) -> f64 {
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut current = state.clone();
    for _ in 0..depth {
        if model.is_terminal(&current) {
            break;
        }
        let step = model.step(&current, 0.0, rng);
        total += weight * step.reward;
        weight *= gamma;
        if step.terminal {
            break;
        }
        current = step.next_state;
    }
    total
}

/// Incremental POMCP planner: owns the belief tree and advances it one
/// simulated episode at a time so callers can checkpoint statistics at
/// arbitrary budgets. A single planner must not be driven from two
/// threads; run independent planners for parallel experiments.
pub struct Planner<'m, M: GenerativeModel> {
    model: &'m M,
    config: SolverConfig,
    tree: BeliefTree<M::State>,
    episodes_run: usize,
}

impl<'m, M: GenerativeModel> Planner<'m, M> {
    pub fn new(model: &'m M, config: SolverConfig) -> Result<Self, SolverError> {
        config.validate()?;
        let root_actions = config.root_actions.as_ref().unwrap_or(&config.actions);
        let tree = BeliefTree::new(root_actions, &config.actions, config.obs_threshold);
        Ok(Self {
            model,
            config,
            tree,
            episodes_run: 0,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn tree(&self) -> &BeliefTree<M::State> {
        &self.tree
    }

    pub fn into_tree(self) -> BeliefTree<M::State> {
        self.tree
    }

    pub fn episodes_run(&self) -> usize {
        self.episodes_run
    }

    pub fn root_arms(&self) -> &ArmSet {
        &self.tree.root().arms
    }

    /// Root argmax over visited arms (index, action value, mean);
    /// `None` before the first episode.
    pub fn best_action(&self) -> Option<(usize, f64, f64)> {
        let arms = self.root_arms();
        arms.best_visited_mean()
            .map(|i| (i, arms.value(i), arms.stat(i).mean))
    }

    /// Runs one POMCP episode: sample a root particle, descend with
    /// bandit action selection and observation clustering, expand at
    /// most one node, evaluate it by rollout, then back up the sampled
    /// discounted return along the path. Returns the episode's
    /// discounted return from the root.
    pub fn run_episode<F>(&mut self, sample_root: &mut F, rng: &mut dyn RngCore) -> f64
    where
        F: FnMut(&mut dyn RngCore) -> M::State,
    {
        let mut state = sample_root(rng);
        debug_assert!(
            !self.model.is_terminal(&state),
            "initial belief must not produce terminal states"
        );
        self.episodes_run += 1;
        if self.model.is_terminal(&state) {
            return 0.0;
        }
        self.tree.nodes[ROOT].particles.push(state.clone());

        // Descend until a terminal transition or an expansion.
        let mut path: Vec<(NodeId, usize, f64)> = Vec::new();
        let mut node_id = ROOT;
        let mut tail = 0.0;
        loop {
            let node = &self.tree.nodes[node_id];
            let t = node.arms.total_count() + node.arms.len() as u64;
            let arm_idx = select_arm(self.config.bandit, &node.arms, t, &self.config.params, rng)
                .expect("nonempty arm set");
            let action = node.arms.value(arm_idx);
            let step = self.model.step(&state, action, rng);
            path.push((node_id, arm_idx, step.reward));
            if step.terminal {
                break;
            }
            let depth = node.depth;
            let edge = &mut self.tree.nodes[node_id].edges[arm_idx];
            let cluster = edge.clusters.discretize(&step.observation);
            match edge.children.get(&cluster).copied() {
                Some(child) => {
                    self.tree.nodes[child].particles.push(step.next_state.clone());
                    node_id = child;
                    state = step.next_state;
                }
                None => {
                    let child = self.tree.add_node(depth + 1);
                    self.tree.nodes[node_id].edges[arm_idx]
                        .children
                        .insert(cluster, child);
                    self.tree.nodes[child].particles.push(step.next_state.clone());
                    tail = rollout(
                        self.model,
                        &step.next_state,
                        self.config.rollout_depth,
                        self.config.gamma,
                        rng,
                    );
                    break;
                }
            }
        }

        // Backup bottom-up: compose the sampled discounted return and
        // refresh the incremental statistics at every visited level.
        let mut ret = tail;
        for &(nid, arm_idx, reward) in path.iter().rev() {
            ret = reward + self.config.gamma * ret;
            let node = &mut self.tree.nodes[nid];
            let stat = node.arms.stat_mut(arm_idx);
            stat.count += 1;
            let (mean, var) = incremental_update(
                stat.mean,
                stat.variance,
                stat.count,
                ret,
                self.config.omega,
            );
            stat.mean = mean;
            stat.variance = var.max(0.0);
            node.visits += 1;
            if let Some(best) = node.arms.best_visited_mean() {
                node.value = node.arms.stat(best).mean;
            }
        }
        ret
    }
}

/// Result of a full planning run.
pub struct PlanResult<S> {
    /// Index into the root action set, `None` if no episode ran.
    pub best_index: Option<usize>,
    /// Action value of the best root arm.
    pub best_action: Option<f64>,
    pub root_arms: ArmSet,
    pub tree: BeliefTree<S>,
    pub episodes: usize,
}

/// Runs `config.episodes` POMCP episodes and returns the root argmax
/// (ties to the lowest index, unvisited arms excluded) together with
/// the root statistics and the full tree.
pub fn plan<M, F>(
    model: &M,
    sample_root: &mut F,
    config: SolverConfig,
    rng: &mut dyn RngCore,
) -> Result<PlanResult<M::State>, SolverError>
where
    M: GenerativeModel,
    F: FnMut(&mut dyn RngCore) -> M::State,
{
    let episodes = config.episodes;
    let mut planner = Planner::new(model, config)?;
    for _ in 0..episodes {
        planner.run_episode(sample_root, rng);
    }
    let best = planner.best_action();
    let root_arms = planner.root_arms().clone();
    let episodes = planner.episodes_run();
    Ok(PlanResult {
        best_index: best.map(|(i, _, _)| i),
        best_action: best.map(|(_, a, _)| a),
        root_arms,
        tree: planner.into_tree(),
        episodes,
    })
}
