//! Search tree stored as an arena; nodes refer to each other by index.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::space::SearchSpace;
use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;
use crate::rng::Rng;

pub type NodeId = usize;
pub const ROOT: NodeId = 0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmafStat {
    pub count: u64,
    pub reward_sum: f64,
}

impl AmafStat {
    pub fn mean(&self) -> f64 {
        self.reward_sum / self.count as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// Number of decisions fixed on the path from the root (0 at the root).
    pub level: usize,
    /// Option index chosen at decision `level - 1`; `None` at the root.
    pub option: Option<usize>,
    pub parent: Option<NodeId>,
    pub visit_count: u64,
    pub total_reward: f64,
    pub children: Vec<NodeId>,
    /// All-moves-as-first statistics keyed by `(decision index, option)`.
    pub amaf: BTreeMap<(usize, usize), AmafStat>,
}

impl TreeNode {
    fn new(level: usize, option: Option<usize>, parent: Option<NodeId>) -> Self {
        Self {
            level,
            option,
            parent,
            visit_count: 0,
            total_reward: 0.0,
            children: Vec::new(),
            amaf: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTree {
    nodes: Vec<TreeNode>,
}

impl Default for SearchTree {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchTree {
    pub fn new() -> Self {
        Self {
            nodes: vec![TreeNode::new(0, None, None)],
        }
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes.iter().enumerate()
    }

    /// Option indices on the path from the root to `id`.
    pub fn prefix(&self, id: NodeId) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes[id].level);
        let mut cur = id;
        while let Some(opt) = self.nodes[cur].option {
            out.push(opt);
            cur = self.nodes[cur].parent.expect("non-root nodes have a parent");
        }
        out.reverse();
        out
    }

    fn add_child(&mut self, parent: NodeId, option: usize) -> NodeId {
        let id = self.nodes.len();
        let level = self.nodes[parent].level + 1;
        self.nodes.push(TreeNode::new(level, Some(option), Some(parent)));
        self.nodes[parent].children.push(id);
        id
    }

    /// Nearest AMAF record for `key`, searching from `id` toward the root.
    fn amaf_prior(&self, id: NodeId, key: (usize, usize)) -> Option<AmafStat> {
        let mut cur = Some(id);
        while let Some(n) = cur {
            if let Some(s) = self.nodes[n].amaf.get(&key).filter(|s| s.count > 0) {
                return Some(*s);
            }
            cur = self.nodes[n].parent;
        }
        None
    }
}

/// `Q/N + c sqrt(ln N_parent / N)`; unvisited children score `+inf`.
pub fn uct_score(total_reward: f64, visits: u64, parent_visits: u64, c_uct: f64) -> f64 {
    if visits == 0 {
        return f64::INFINITY;
    }
    let n = visits as f64;
    total_reward / n + c_uct * ((parent_visits as f64).ln() / n).sqrt()
}

/// Child of `node` maximizing the UCT score; exact ties are broken uniformly.
pub fn select(tree: &SearchTree, node: NodeId, c_uct: f64, rng: &mut Rng) -> Result<NodeId> {
    let n = tree.node(node);
    if n.children.is_empty() {
        return Err(Error::InvalidState(format!("node {node} has no children to select")));
    }
    let scores: Vec<f64> = n
        .children
        .iter()
        .map(|&c| {
            let child = tree.node(c);
            uct_score(child.total_reward, child.visit_count, n.visit_count, c_uct)
        })
        .collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<NodeId> = n
        .children
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == best)
        .map(|(&c, _)| c)
        .collect();
    Ok(if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    })
}

/// `⌈n^κ⌉`, robust to `powf` landing a hair above an integer.
pub fn widening_limit(visits: u64, kappa: f64) -> u64 {
    if visits == 0 {
        return 0;
    }
    ((visits as f64).powf(kappa) - 1e-9).ceil() as u64
}

/// Whether the next visit of a node with `visits` visits may add a child.
pub fn widening_allows(visits: u64, kappa: f64) -> bool {
    widening_limit(visits + 1, kappa) > widening_limit(visits, kappa)
}

/// Adds a child to `node` when progressive widening allows it and untried
/// options remain. Untried options are ranked by the AMAF mean found at the
/// node or its nearest ancestor holding a record; options with no record
/// score the node's own mean reward (`+inf` while unvisited). Ties fall to a
/// seeded random order.
pub fn maybe_expand(tree: &mut SearchTree, node: NodeId, space: &SearchSpace, rng: &mut Rng) -> Option<NodeId> {
    let n = tree.node(node);
    if n.level >= space.depth() || !widening_allows(n.visit_count, space.kappa) {
        return None;
    }
    let decision = n.level;
    let tried: Vec<usize> = n.children.iter().filter_map(|&c| tree.node(c).option).collect();
    let mut untried: Vec<usize> = (0..space.options_at(decision))
        .filter(|o| !tried.contains(o))
        .collect();
    if untried.is_empty() {
        return None;
    }
    untried.shuffle(rng);
    let unseen = if n.visit_count == 0 {
        f64::INFINITY
    } else {
        n.total_reward / n.visit_count as f64
    };
    let choice = untried
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let score = |o| {
                tree.amaf_prior(node, (decision, o))
                    .map_or(unseen, |s| s.mean())
            };
            // ties resolve to the earlier (shuffled) position
            score(a).total_cmp(&score(b)).then(std::cmp::Ordering::Greater)
        })
        .expect("untried is non-empty");
    Some(tree.add_child(node, choice))
}

/// Completes `prefix` with uniformly random options.
pub fn rollout(prefix: &[usize], space: &SearchSpace, rng: &mut Rng) -> Result<PipelineConfig> {
    if prefix.len() > space.depth() {
        return Err(Error::invalid("prefix is longer than the search depth"));
    }
    let mut choices = prefix.to_vec();
    for level in prefix.len()..space.depth() {
        choices.push(rng.random_range(0..space.options_at(level)));
    }
    space.resolve(&choices)
}

/// Adds one visit and `reward` to every node of `path`, and records `config`'s
/// options at each node's deeper decisions in its AMAF table.
pub fn backpropagate(tree: &mut SearchTree, path: &[NodeId], reward: f64, config: &PipelineConfig) -> Result<()> {
    if !reward.is_finite() {
        return Err(Error::invalid(format!("reward must be finite, got {reward}")));
    }
    if path.first() != Some(&ROOT) {
        return Err(Error::invalid("back-propagation path must start at the root"));
    }
    for &id in path {
        let node = &mut tree.nodes[id];
        node.visit_count += 1;
        node.total_reward += reward;
        for (decision, &option) in config.choices.iter().enumerate().skip(node.level) {
            let s = node.amaf.entry((decision, option)).or_default();
            s.count += 1;
            s.reward_sum += reward;
        }
    }
    Ok(())
}

/// `1 / (1 + mse)`; a failed evaluation (`None`) earns 0.
pub fn reward_from_mse(mse: Option<f64>) -> Result<f64> {
    match mse {
        None => Ok(0.0),
        Some(m) if m.is_nan() || m < 0.0 => Err(Error::invalid(format!("mse must be non-negative, got {m}"))),
        Some(m) => Ok(1.0 / (1.0 + m)),
    }
}
