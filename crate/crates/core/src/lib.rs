//! Calculus on regular time scales.
//!
//! The crate models closed subsets of the real line assembled from
//! intervals and grids, and provides delta, nabla and diamond-alpha
//! derivatives and integrals, generalized exponential functions, and a
//! transition-matrix solver for first-order diamond-alpha boundary value
//! problems.

pub mod calculus;
pub mod error;
pub mod exponentials;
pub mod function;
pub mod quadrature;
pub mod solver;
pub mod timescale;

pub use calculus::{delta_derivative, delta_integral, diamond_derivative, diamond_integral, nabla_derivative, nabla_integral};
pub use error::{Error, Result};
pub use exponentials::{
    check_regressivity, combined_E, combined_e, cylinder, delta_exp, delta_to_nabla_param, diamond_derivative_of_delta_exp,
    diamond_derivative_of_nabla_exp, nabla_exp, nabla_to_delta_param, nu_cylinder, rho_shift_delta_exp,
    rho_shift_nabla_exp, ExpValue, RegressivityReport, SampleBudget,
};
pub use function::{Alpha, Continuity, TsFunction};
pub use solver::{
    apply_l, diamond_exponential, propagate_dense, propagate_forward, propagate_from_accumulation, sandwich_value, solve,
    solve_nonhomogeneous, to_second_order_delta, transition_matrix, transition_product, AccumulationResult, DiamondBvp, Mat2,
    Sample, SecondOrderDelta, SolutionTrace, SolverConfig, StateRow, TransitionMatrix,
};
pub use timescale::{Local, Orientation, Partition, Piece, Point, PointClass, Regularity, Segment, Side, TimeScale};
