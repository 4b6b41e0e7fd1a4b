use crate::{ExtReal, PotentialPair, TransportPlan};

/// Pivoting statistics of a solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    /// Simplex iterations over all phases (pivots plus bound flips).
    pub iterations: usize,
    /// Basis changes.
    pub pivots: usize,
    /// Pivots with a zero step.
    pub degenerate_pivots: usize,
    /// Pivots taken under Bland's rule.
    pub bland_pivots: usize,
}

/// Output of every solver entry point.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub primal_value: ExtReal,
    pub dual_value: ExtReal,
    pub optimal_plan: Option<TransportPlan>,
    pub optimal_potentials: Option<PotentialPair>,
    /// `primal_value − dual_value`; `+∞` unless both are finite.
    pub gap: f64,
    pub stats: SolverStats,
}

impl DualityReport {
    pub(crate) fn new(
        primal_value: ExtReal,
        dual_value: ExtReal,
        optimal_plan: Option<TransportPlan>,
        optimal_potentials: Option<PotentialPair>,
        stats: SolverStats,
    ) -> Self {
        let gap = match (primal_value, dual_value) {
            (ExtReal::Finite(p), ExtReal::Finite(d)) => p - d,
            _ => f64::INFINITY,
        };
        Self { primal_value, dual_value, optimal_plan, optimal_potentials, gap, stats }
    }

    /// Primal value as a float (`±∞` for non-finite values).
    pub fn primal(&self) -> f64 {
        self.primal_value.to_f64()
    }

    pub fn dual(&self) -> f64 {
        self.dual_value.to_f64()
    }
}
