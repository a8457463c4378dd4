//! Problem builders: OR, st-connectivity, decision-tree compilation and the
//! power-law advice distribution.

pub mod advice;
pub mod graph;
pub mod or;
pub mod tree;

pub use advice::{
    classical_baseline_queries, log_log_slope, verify_sum_bounds, AdviceDistribution, SearchMode, SumBoundsReport,
    SumRow,
};
pub use graph::{build_st_connectivity, four_cycle, Graph};
pub use or::build_or_program;
pub use tree::{
    build_or_tree, build_search_tree, tree_readout, tree_to_cvs, Color, DecisionTree, PositionVerifier, SearchTree,
    TreeEdge, TreeVertex,
};
