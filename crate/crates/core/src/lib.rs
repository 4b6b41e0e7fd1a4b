//! Finite-space Monge–Kantorovich duality.
//!
//! The crate models transport problems between two finite probability spaces
//! with costs in `[0, ∞]` and solves them exactly (up to `f64` tolerances):
//!
//! | Problem | Entry point | Engine |
//! |---------|-------------|--------|
//! | primal `min ⟨c, π⟩` over couplings | [`lp::solve_primal`] | network simplex |
//! | dual `max Σφμ + Σψν`, `φ ⊕ ψ ≤ c` | [`lp::solve_dual`] | dense revised simplex |
//! | partial transport (mass `≥ 1 − ε`) | [`lp::solve_partial`] | network simplex |
//! | primal restricted to `supp(π₀)` | [`lp::solve_restricted_primal`] | network simplex |
//! | dual with `∫(φ⊕ψ − c)₊ dπ₀ ≤ ε` | [`lp::solve_relaxed_dual`] | dense revised simplex |
//!
//! [`rotation`] builds the cyclic-group models of the rotation counterexamples
//! (cost tables on `Γ_k`, Birkhoff sums, the skew product) and [`diagnostics`]
//! checks cyclic monotonicity, dual attainment and sequence behaviour.
//!
//! Infinite costs and `−∞` potentials are tagged values ([`Cost`],
//! [`ExtReal`]), never sentinel floats. Forbidden cells are removed from the
//! linear programs rather than priced with a large constant.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod diagnostics;
mod error;
mod extended;
pub mod linalg;
pub mod lp;
mod marginal;
pub mod matching;
mod matrix;
mod plan;
mod potential;
mod report;
pub mod rotation;

pub use error::{CoreError, Result};
pub use extended::{Cost, ExtReal};
pub use marginal::Marginal;
pub use matrix::{CostMatrix, ValueMatrix};
pub use plan::{mixture_plan, plan_dominates, transport_cost, Dominance, PlanKind, TransportPlan};
pub use potential::{j_c, PotentialPair};
pub use report::{DualityReport, SolverStats};

/// Largest supported side of a cost matrix or plan.
pub const MAX_DIMENSION: usize = 2000;

/// Tolerance on `Σ weights = 1` for user-supplied marginals.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Tolerance on marginal constraints for solver-produced plans.
pub const SOLVER_MARGINAL_TOL: f64 = 1e-9;
