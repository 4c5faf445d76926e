//! Graph-cut solvers: max-flow, alpha-expansion on grid energies, and the
//! correlation estimate built on them.

mod correlation;
mod expansion;
mod maxflow;

pub use correlation::{
    depth_unary_table, motion_unary_table, solve_correlation, solve_multiview, DepthEstimate, DepthMrf, Estimate, Mode,
    MotionEstimate, MotionMrf, UnaryTable,
};
pub use expansion::{alpha_expansion, brute_force_minimum, energy, is_metric, Expansion, Mrf, TableMrf};
pub use maxflow::{Capacity, FlowNetwork, Graph, MinCut};
