use crate::error::bail;
use crate::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PivotRule {
    /// Most negative reduced cost; Bland's rule after a run of
    /// `10 · (rows + cols)` consecutive degenerate pivots, until the next
    /// nondegenerate pivot.
    #[default]
    DantzigWithBlandFallback,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Arithmetic {
    #[default]
    Float64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iterations: usize,
    pub pivot_rule: PivotRule,
    pub arithmetic: Arithmetic,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            max_iterations: 1_000_000,
            pivot_rule: PivotRule::default(),
            arithmetic: Arithmetic::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0 && self.feasibility_tol.is_finite()) {
            bail!(InvalidArgument, "feasibility_tol must be positive, got {}", self.feasibility_tol);
        }
        if !(self.optimality_tol > 0.0 && self.optimality_tol.is_finite()) {
            bail!(InvalidArgument, "optimality_tol must be positive, got {}", self.optimality_tol);
        }
        if self.max_iterations == 0 {
            bail!(InvalidArgument, "max_iterations must be positive");
        }
        Ok(())
    }

    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub(crate) fn bland_threshold(&self, dimension: usize) -> usize {
        10 * dimension.max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.max_iterations, 1_000_000);
        assert!(SolverConfig { feasibility_tol: 0.0, ..cfg }.validate().is_err());
        assert!(SolverConfig { optimality_tol: -1.0, ..cfg }.validate().is_err());
        assert!(SolverConfig { max_iterations: 0, ..cfg }.validate().is_err());
    }
}
