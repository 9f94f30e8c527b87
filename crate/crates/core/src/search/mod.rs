//! Monte Carlo tree search over pipeline configurations.

mod mcts;
mod space;
mod tree;

pub use mcts::{search, Evaluator, PipelineEvaluator, SearchOutcome, SearchTrajectory};
pub use space::{lr_grid, Level, SearchSpace, DEFAULT_C_UCT, DEFAULT_GRID_RESOLUTION, DEFAULT_KAPPA, WIDTH_OPTIONS};
pub use tree::{
    backpropagate, maybe_expand, reward_from_mse, rollout, select, uct_score, widening_allows, widening_limit,
    AmafStat, NodeId, SearchTree, TreeNode, ROOT,
};
