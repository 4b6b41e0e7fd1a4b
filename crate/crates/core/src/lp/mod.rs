//! Linear-programming engines and the transport problems built on them.
//!
//! Two engines live here. [`network`](self) simplex handles the pure
//! transportation structure (primal, partial, restricted problems); the
//! dense revised simplex in [`LinearProgram`] handles everything else and
//! doubles as an independent cross-check of the network results.

mod config;
mod dense;
mod network;
mod transport;

pub use config::{Arithmetic, PivotRule, SolverConfig};
pub use dense::{LinearProgram, LpSolution, Relation, Sense};
pub use transport::{
    dual_sequence, estimate_p_rel, estimate_relaxed_dual_limit, extrapolate_to_zero, solve_dual,
    solve_partial, solve_primal, solve_relaxed_dual, solve_restricted_primal, transport_lp, EpsilonSweep,
    SweepDirection,
};
