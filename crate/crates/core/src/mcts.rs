//! Tree search over the staged iteration environment.
//!
//! UCT selection with progressive widening on the continuous parameter
//! stages, baseline rollouts for leaf evaluation, and Bellman max-backups.
//! Discrete (iteration-choice) nodes widen over the coupling-legal action
//! set in registry order; continuous nodes widen as `c(s) < C_pw n(s)^a`,
//! drawing uniformly for the first `E + 1` children and then jittering
//! around the best child's parameter with a logarithmically decaying
//! window.
//!
//! The result is the best root trajectory found (`bestpath`) concatenated
//! with the rollout that completed it (`bestrollout`), flattened into
//! `(iteration, parameters)` steps and replayed once for its modeled cost
//! and final loss.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::baselines::{rollout_baseline, BaselineId};
use crate::costmodel::{CostContext, CostTable};
use crate::env::{
    self, ActionToken, EnvConfig, EnvState, LegalActions, TermStatus,
};
use crate::fm;
use crate::iterations::{apply_spectral, iteration, IterationId, MatrixFunction};
use crate::rng::Rng;
use crate::spectra::{DistributionSpec, Spectrum};

/// Search hyperparameters.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    /// Progressive-widening coefficient.
    pub c_pw: f64,
    /// Progressive-widening exponent.
    pub alpha_pw: f64,
    /// UCT exploration constant.
    pub c_ucb: f64,
    /// Children drawn uniformly before jittered expansion kicks in.
    pub expand_uniform: usize,
    /// Search iterations.
    pub iterations: usize,
    /// Rollout baselines (sampled uniformly).
    pub rollout_list: Vec<BaselineId>,
    pub seed: u64,
    /// Value charged to rollouts that fail to solve.
    pub rollout_penalty: f64,
}

impl SearchConfig {
    pub fn new(function: MatrixFunction, iterations: usize, seed: u64) -> Self {
        SearchConfig {
            c_pw: 2.0,
            alpha_pw: 0.3,
            c_ucb: 5.0,
            expand_uniform: 5,
            iterations,
            rollout_list: crate::baselines::default_rollout_list(function),
            seed,
            rollout_penalty: 1e9,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.c_pw <= 0.0
            || self.alpha_pw <= 0.0
            || self.c_ucb <= 0.0
            || self.expand_uniform == 0
            || self.iterations == 0
            || self.rollout_list.is_empty()
            || self.rollout_penalty <= 0.0
        {
            return Err(SearchError::InvalidConfig);
        }
        if !self.rollout_list.iter().all(|b| b.rollout_eligible()) {
            return Err(SearchError::InvalidConfig);
        }
        Ok(())
    }
}

/// One discovered step: a registry iteration with concrete parameters.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlgorithmStep {
    pub iter: IterationId,
    pub params: Vec<f64>,
}

/// How the iterate pair is initialized before the steps run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InitExpr {
    /// The input matrix.
    A,
    /// The identity.
    Identity,
    /// `A / ||A||_F^2` (inverse-iteration contraction start).
    AOverFroSq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitDescriptor {
    pub x0: InitExpr,
    pub y0: InitExpr,
}

impl InitDescriptor {
    pub fn for_function(function: MatrixFunction) -> Self {
        match function {
            MatrixFunction::Sqrt | MatrixFunction::Sign => InitDescriptor {
                x0: InitExpr::A,
                y0: InitExpr::Identity,
            },
            MatrixFunction::Proot => InitDescriptor {
                x0: InitExpr::Identity,
                y0: InitExpr::A,
            },
            MatrixFunction::Inverse => InitDescriptor {
                x0: InitExpr::AOverFroSq,
                y0: InitExpr::Identity,
            },
        }
    }
}

/// Where the algorithm came from.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub seed: u64,
    pub dist: DistributionSpec,
    pub cost_context: CostContext,
}

/// The search's primary output: an ordered step list with its modeled cost
/// and replayed final loss.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscoveredAlgorithm {
    pub function: MatrixFunction,
    pub init: InitDescriptor,
    pub steps: Vec<AlgorithmStep>,
    pub eps_tol: f64,
    pub modeled_cost: f64,
    pub final_loss: f64,
    pub provenance: Provenance,
}

/// Per-iteration progress record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub best_value: f64,
    pub tree_nodes: usize,
}

/// Search statistics alongside the result.
#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub trace: Vec<TracePoint>,
    pub tree_nodes: usize,
    pub solved_rollouts: usize,
}

#[derive(Clone, Debug)]
pub enum SearchError {
    InvalidConfig,
    /// No rollout or terminal state ever solved; carries the best value seen.
    Unsolved { best_value: f64, tree_nodes: usize },
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::InvalidConfig => f.write_str("invalid search configuration"),
            SearchError::Unsolved {
                best_value,
                tree_nodes,
            } => write!(
                f,
                "search found no solving trajectory (best value {best_value}, {tree_nodes} nodes)"
            ),
        }
    }
}

#[derive(Clone, Debug)]
struct RolloutRecord {
    value: f64,
    steps: Vec<AlgorithmStep>,
    solved: bool,
}

#[derive(Clone, Debug)]
struct Node {
    state: EnvState,
    status: TermStatus,
    value: f64,
    visits: u64,
    /// Iterations whose traversal ended here (creation included).
    ended_here: u64,
    parent: Option<usize>,
    /// Action that produced this node, its reward, and the completed
    /// iteration application if the edge applied one.
    edge: Option<(ActionToken, f64, Option<AlgorithmStep>)>,
    children: Vec<usize>,
    rollout: Option<RolloutRecord>,
}

/// The search tree (arena-indexed, root at 0).
pub struct Tree {
    nodes: Vec<Node>,
    env_config: EnvConfig,
}

impl Tree {
    fn new(root_state: EnvState, env_config: &EnvConfig) -> Self {
        let status = env::is_terminal(&root_state, env_config);
        Tree {
            nodes: alloc::vec![Node {
                state: root_state,
                status,
                value: f64::NEG_INFINITY,
                visits: 1,
                ended_here: 1,
                parent: None,
                edge: None,
                children: Vec::new(),
                rollout: None,
            }],
            env_config: env_config.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    /// Progressive-widening test.
    fn expandable(&self, id: usize, config: &SearchConfig) -> bool {
        let node = self.node(id);
        if node.status != TermStatus::Nonterminal {
            return false;
        }
        let child_count = node.children.len();
        if node.state.is_transitionable() {
            let eligible =
                env::eligible_iterations(self.env_config.function, node.state.is_coupled);
            child_count < eligible.len()
        } else {
            (child_count as f64) < config.c_pw * fm::powf(node.visits as f64, config.alpha_pw)
        }
    }

    /// UCT child choice; ties break toward the lowest index.
    fn best_ucb(&self, id: usize, config: &SearchConfig) -> usize {
        let node = self.node(id);
        debug_assert!(!node.children.is_empty());
        let log_term = fm::ln(node.visits as f64) + 1.0;
        let mut best = node.children[0];
        let mut best_score = f64::NEG_INFINITY;
        for &child_id in &node.children {
            let child = self.node(child_id);
            let score = child.value + config.c_ucb * fm::sqrt(log_term / child.visits as f64);
            if score > best_score {
                best_score = score;
                best = child_id;
            }
        }
        best
    }

    /// Add one child per the expansion policy. Returns its id.
    fn expand(
        &mut self,
        id: usize,
        config: &SearchConfig,
        cost_table: &CostTable,
        rng: &mut Rng,
    ) -> usize {
        let action = if self.node(id).state.is_transitionable() {
            let eligible =
                env::eligible_iterations(self.env_config.function, self.node(id).state.is_coupled);
            let taken: Vec<IterationId> = self
                .node(id)
                .children
                .iter()
                .map(|&c| match self.node(c).edge {
                    Some((ActionToken::ChooseIteration(it), _, _)) => it,
                    _ => unreachable!("discrete children carry iteration edges"),
                })
                .collect();
            let next_id = eligible
                .into_iter()
                .find(|cand| !taken.contains(cand))
                .expect("expandable implies an unexpanded iteration");
            ActionToken::ChooseIteration(next_id)
        } else {
            let (lo, hi) = match env::legal_actions(&self.node(id).state, &self.env_config) {
                LegalActions::Continuous { lo, hi } => (lo, hi),
                LegalActions::Discrete(_) => unreachable!("non-transitionable is continuous"),
            };
            let child_count = self.node(id).children.len();
            let value = if child_count <= config.expand_uniform {
                rng.uniform(lo, hi)
            } else if rng.bernoulli(0.05) {
                rng.uniform(lo, hi)
            } else {
                let node = self.node(id);
                let mut best_child = node.children[0];
                let mut best_value = f64::NEG_INFINITY;
                for &c in &node.children {
                    if self.node(c).value > best_value {
                        best_value = self.node(c).value;
                        best_child = c;
                    }
                }
                let center = match self.node(best_child).edge {
                    Some((ActionToken::ChooseParam(v), _, _)) => v,
                    _ => unreachable!("continuous children carry parameter edges"),
                };
                let width = (hi - lo) / 2.0;
                let scale = jitter_scale(node.visits as f64);
                let jlo = lo.max(center - scale * width);
                let jhi = hi.min(center + scale * width);
                rng.uniform(jlo, jhi)
            };
            ActionToken::ChooseParam(value)
        };

        let parent_state = self.node(id).state.clone();
        let (next_state, reward) = env::transition(&parent_state, action, &self.env_config, cost_table)
            .expect("expansion actions are legal by construction");
        let applied = if next_state.depth > parent_state.depth {
            let step = match action {
                ActionToken::ChooseIteration(it) => AlgorithmStep {
                    iter: it,
                    params: Vec::new(),
                },
                ActionToken::ChooseParam(v) => {
                    let it = parent_state
                        .pending_iteration
                        .expect("completing a pending iteration");
                    let mut params = parent_state.pending_params.clone();
                    params.push(v);
                    AlgorithmStep { iter: it, params }
                }
            };
            Some(step)
        } else {
            None
        };
        let status = env::is_terminal(&next_state, &self.env_config);
        let child = Node {
            state: next_state,
            status,
            value: f64::NEG_INFINITY,
            visits: 1,
            ended_here: 1,
            parent: Some(id),
            edge: Some((action, reward, applied)),
            children: Vec::new(),
            rollout: None,
        };
        self.nodes.push(child);
        let child_id = self.nodes.len() - 1;
        self.nodes[id].children.push(child_id);
        child_id
    }

    /// Bellman max-backup from `leaf`; returns true when the root value
    /// strictly improved.
    fn backpropagate(&mut self, leaf: usize, leaf_value: f64) -> bool {
        let root_before = self.nodes[0].value;
        let mut current = leaf;
        let mut value = leaf_value;
        if value > self.nodes[current].value {
            self.nodes[current].value = value;
        } else {
            value = self.nodes[current].value;
        }
        while let Some(parent) = self.nodes[current].parent {
            let reward = self.nodes[current]
                .edge
                .as_ref()
                .map(|(_, r, _)| *r)
                .unwrap_or(0.0);
            self.nodes[parent].visits += 1;
            let candidate = value + reward;
            if candidate > self.nodes[parent].value {
                self.nodes[parent].value = candidate;
            }
            value = self.nodes[parent].value;
            current = parent;
        }
        self.nodes[0].value > root_before
    }

    /// Actions from the root to `node`, plus completed steps along the way.
    fn path_steps(&self, node: usize) -> Vec<AlgorithmStep> {
        let mut rev = Vec::new();
        let mut current = node;
        while let Some((_, _, ref applied)) = self.node(current).edge {
            if let Some(step) = applied {
                rev.push(step.clone());
            }
            current = self.node(current).parent.expect("non-root has a parent");
        }
        rev.reverse();
        rev
    }
}

/// Jitter window decay `1 / ln(2 + n)`.
pub(crate) fn jitter_scale(visits: f64) -> f64 {
    1.0 / fm::ln(2.0 + visits)
}

/// Replay flattened steps on a spectrum; returns (modeled cost, final
/// termination loss, solved).
fn replay_steps(
    steps: &[AlgorithmStep],
    env_config: &EnvConfig,
    spectrum: &Spectrum,
    cost_table: &CostTable,
) -> (f64, f64, bool) {
    let init = env::init_state(env_config, spectrum);
    let mut x = init.s1;
    let mut y = init.s2;
    let lam = init.lam;
    let mut cost = 0.0;
    let mut setup_paid = false;
    for step in steps {
        let spec = iteration(step.iter);
        cost += cost_table.cost(step.iter).unwrap_or(0.0);
        if spec.setup_cost.is_some() && !setup_paid {
            cost += cost_table.setup_cost(step.iter);
            setup_paid = true;
        }
        match apply_spectral(spec, &x, &y, &lam, &step.params) {
            Ok((nx, ny)) => {
                x = nx;
                y = ny;
            }
            Err(_) => return (cost, f64::INFINITY, false),
        }
    }
    let loss = env::termination_loss(&x, &lam, env_config.function);
    (cost, loss, loss <= env_config.eps_tol)
}

/// Run the search. Returns the discovered algorithm and statistics, or an
/// unsolved report when no trajectory ever reached `eps_tol`.
pub fn search(
    env_config: &EnvConfig,
    spectrum: &Spectrum,
    search_config: &SearchConfig,
    cost_table: &CostTable,
    dist: &DistributionSpec,
) -> Result<(DiscoveredAlgorithm, SearchStats), SearchError> {
    drive(env_config, spectrum, search_config, cost_table, dist).0
}

/// Test-visible view of the finished tree for invariant checks.
#[derive(Clone, Debug)]
pub struct NodeView {
    pub value: f64,
    pub visits: u64,
    pub ended_here: u64,
    pub is_terminal: bool,
    pub edge_reward: Option<f64>,
    pub rollout_value: Option<f64>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Run the search and also return the final tree's node table (for
/// property tests over the Bellman/visit invariants).
pub fn search_with_tree(
    env_config: &EnvConfig,
    spectrum: &Spectrum,
    search_config: &SearchConfig,
    cost_table: &CostTable,
    dist: &DistributionSpec,
) -> (
    Result<(DiscoveredAlgorithm, SearchStats), SearchError>,
    Vec<NodeView>,
) {
    drive(env_config, spectrum, search_config, cost_table, dist)
}

fn drive(
    env_config: &EnvConfig,
    spectrum: &Spectrum,
    search_config: &SearchConfig,
    cost_table: &CostTable,
    dist: &DistributionSpec,
) -> (
    Result<(DiscoveredAlgorithm, SearchStats), SearchError>,
    Vec<NodeView>,
) {
    if let Err(e) = search_config.validate() {
        return (Err(e), Vec::new());
    }
    let mut rng = Rng::stream(search_config.seed, 0x6d63_7473);
    let root_state = env::init_state(env_config, spectrum);
    let mut tree = Tree::new(root_state, env_config);
    let mut stats = SearchStats::default();
    let mut best: Option<(Vec<AlgorithmStep>, Vec<AlgorithmStep>)> = None;

    for iter_idx in 1..=search_config.iterations {
        // selection
        let mut current = 0usize;
        while !tree.expandable(current, search_config)
            && tree.node(current).status == TermStatus::Nonterminal
        {
            current = tree.best_ucb(current, search_config);
        }
        // expansion; terminal states evaluate in place
        let leaf = if tree.node(current).status == TermStatus::Nonterminal {
            tree.expand(current, search_config, cost_table, &mut rng)
        } else {
            tree.nodes[current].visits += 1;
            tree.nodes[current].ended_here += 1;
            current
        };
        // evaluation: terminal value or a sampled baseline rollout
        let leaf_value = match tree.node(leaf).status {
            TermStatus::Solved => {
                stats.solved_rollouts += 1;
                if tree.node(leaf).rollout.is_none() {
                    tree.nodes[leaf].rollout = Some(RolloutRecord {
                        value: 0.0,
                        steps: Vec::new(),
                        solved: true,
                    });
                }
                0.0
            }
            TermStatus::Failed => -search_config.rollout_penalty,
            TermStatus::Nonterminal => {
                let pick = (rng.next_u64() % search_config.rollout_list.len() as u64) as usize;
                let baseline = search_config.rollout_list[pick];
                let outcome = rollout_baseline(
                    baseline,
                    &tree.node(leaf).state,
                    env_config,
                    cost_table,
                    search_config.rollout_penalty,
                );
                if outcome.solved {
                    stats.solved_rollouts += 1;
                }
                let record = RolloutRecord {
                    value: outcome.value,
                    steps: outcome
                        .steps
                        .into_iter()
                        .map(|(iter, params)| AlgorithmStep { iter, params })
                        .collect(),
                    solved: outcome.solved,
                };
                let value = record.value;
                let keep = match &tree.node(leaf).rollout {
                    Some(existing) => record.value > existing.value,
                    None => true,
                };
                if keep {
                    tree.nodes[leaf].rollout = Some(record);
                }
                value
            }
        };
        // backup; record the new best trajectory on root improvement
        let improved = tree.backpropagate(leaf, leaf_value);
        if improved {
            let rollout_solved = tree
                .node(leaf)
                .rollout
                .as_ref()
                .map(|r| r.solved)
                .unwrap_or(false);
            if rollout_solved {
                let path = tree.path_steps(leaf);
                let suffix = tree
                    .node(leaf)
                    .rollout
                    .as_ref()
                    .map(|r| r.steps.clone())
                    .unwrap_or_default();
                best = Some((path, suffix));
            }
        }
        stats.trace.push(TracePoint {
            iteration: iter_idx,
            best_value: tree.node(0).value,
            tree_nodes: tree.len(),
        });
    }
    stats.tree_nodes = tree.len();

    let views: Vec<NodeView> = tree
        .nodes
        .iter()
        .map(|n| NodeView {
            value: n.value,
            visits: n.visits,
            ended_here: n.ended_here,
            is_terminal: n.status != TermStatus::Nonterminal,
            edge_reward: n.edge.as_ref().map(|(_, r, _)| *r),
            rollout_value: n.rollout.as_ref().map(|r| r.value),
            parent: n.parent,
            children: n.children.clone(),
        })
        .collect();

    let result = match best {
        Some((path, suffix)) => {
            let mut steps = path;
            steps.extend(suffix);
            let (modeled_cost, final_loss, solved) =
                replay_steps(&steps, env_config, spectrum, cost_table);
            if solved {
                Ok((
                    DiscoveredAlgorithm {
                        function: env_config.function,
                        init: InitDescriptor::for_function(env_config.function),
                        steps,
                        eps_tol: env_config.eps_tol,
                        modeled_cost,
                        final_loss,
                        provenance: Provenance {
                            seed: search_config.seed,
                            dist: dist.clone(),
                            cost_context: cost_table.context.clone(),
                        },
                    },
                    stats,
                ))
            } else {
                Err(SearchError::Unsolved {
                    best_value: tree.node(0).value,
                    tree_nodes: tree.len(),
                })
            }
        }
        None => Err(SearchError::Unsolved {
            best_value: tree.node(0).value,
            tree_nodes: tree.len(),
        }),
    };
    (result, views)
}

impl DiscoveredAlgorithm {
    /// Human-readable step summary (`Sqrt_Visser[2.09,1.98] -> ...`).
    pub fn describe(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for (i, step) in self.steps.iter().enumerate() {
            if i > 0 {
                out.push_str(" -> ");
            }
            let _ = write!(out, "{}", step.iter);
            if !step.params.is_empty() {
                out.push('[');
                for (j, p) in step.params.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{p:.3}");
                }
                out.push(']');
            }
        }
        out
    }
}
