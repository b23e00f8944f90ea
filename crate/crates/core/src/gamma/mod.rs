//! Γ-calculus in two separate flavors: exact algebra on weighted graphs, and
//! finite differences of the smooth calculus on warped products. Chain and
//! Leibniz rules hold only in the second.

pub mod graph;
pub mod grid;
pub mod warped;

pub use graph::{
    be_check, be_slack, curvature_dimension, gamma, gamma2, gamma2_pair, BeReport, BeStrategy, CurvatureResult,
    Dimension, Kappa, WeightedGraph,
};
pub use grid::{Axis, Direction, GridFunction, Stencil, TrigPoly, GHOST_MARGIN};
pub use warped::{
    bochner_slack, cone_gamma, cone_gamma2, cone_generator, converse_deduction_check, equality_member, fiber_generator,
    random_family, sharp_gamma2_estimate_check, warp_cross_term, warped_gamma2_identity_check, warped_gamma2_rhs,
    ConverseReport, EstimateReport, FiberCalculus, FiberGeometry, IdentityReport, SeparableFunction, WarpedCone, Window,
};
