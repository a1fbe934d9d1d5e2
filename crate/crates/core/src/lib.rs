//! Markov moves for bounded and incomplete contingency tables.
//!
//! - [`table`]: tables, cell bounds, design matrices, fibers.
//! - [`moves`]: basic, loop, circuit and df-1 moves; filtering; application.
//! - [`lattice`]: kernels, Lawrence liftings, Graver bases, circuits of
//!   general matrices, universal Markov bases of partially bounded tables.
//! - [`fiber`]: exhaustive fibers, connectivity, subbasis verification.
//! - [`sampler`]: Metropolis chains on fibers and exact-test statistics.
//! - [`json`]: file formats.

pub mod error;
pub mod fiber;
pub mod json;
pub mod lattice;
pub mod moves;
pub mod sampler;
pub mod table;

pub use error::{Error, Result};
pub use fiber::{connectivity, enumerate_fiber, verify_subbasis, ConnectivityReport, Fiber, VerifyOptions, VerifyStatus};
pub use lattice::{graver_basis, universal_markov_basis, IntMatrix, LiftSpec, TermOrder, UniversalOptions};
pub use moves::{apply_move, basic_moves, circuit_moves, df1_loops, filter_structural_zeros, loop_move, Move, MoveSet, Sign};
pub use sampler::{run_chain, ChainConfig, ChainResult, TargetDistribution};
pub use table::{
    margins, quasi_independence_design, satisfies_bounds, two_way_design, BoundsGrid, Cell, CellBound, DesignMatrix,
    FiberSpec, Shape, Table,
};
