//! Stochastic chemical kinetics on truncated state spaces.
//!
//! The chemical master equation of a mass-action network is the linear ODE
//! `P' = A P` over the box `0 <= x_i <= cap_i`. This crate assembles `A`
//! and its splittings ([`operator`]), evolves densities exactly and with
//! product-of-exponential approximations ([`propagator`]), and samples
//! trajectories with SSA and tau-leap variants ([`samplers`]).

pub mod analysis;
pub mod error;
pub mod model;
pub mod modelfile;
pub mod operator;
pub mod propagator;
pub mod rng;
pub mod samplers;
pub mod statespace;

pub use error::{Error, Result};
pub use model::{
    builtin, builtin_isomer, builtin_schlogl, InitialCondition, PropensitySpec, ReactionModel,
    Scenario,
};
pub use modelfile::{parse_model, serialize_model};
pub use operator::{
    assemble_channels, assemble_frozen, assemble_generator, assemble_reaction_generators,
    column_piece, ColumnPiece, Generator,
};
pub use propagator::{
    column_split_solution, exact_solution, expmv, frozen_sum_solution, lie_product_solution,
    reaction_product_density, reaction_product_solution, strang_solution, ProbabilityVector,
    StepPlan, StrangCenter,
};
pub use rng::{sample_poisson, RngStream};
pub use samplers::{
    accelerated_half_split_step, accelerated_step, run_ensemble, ssa_run,
    symmetric_accelerated_step, tau_leap_run, EnsembleResult, SamplerMethod, TrajectoryResult,
};
pub use statespace::{ReactionOffset, StateSpace};
