use alloc::vec::Vec;

use crate::error::bail;
use crate::matrix::expect_shape;
use crate::{CostMatrix, CoreError, ExtReal, Marginal, Result, MAX_DIMENSION, SOLVER_MARGINAL_TOL};

/// Whether a plan has exactly the prescribed marginals or is only dominated by them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanKind {
    ExactCoupling,
    SubCoupling,
}

/// Nonnegative mass on `X × Y`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
    kind: PlanKind,
}

impl TransportPlan {
    /// Coupling of `mu` and `nu`; marginals must match within [`SOLVER_MARGINAL_TOL`].
    pub fn exact_coupling(mass: Vec<f64>, mu: &Marginal, nu: &Marginal) -> Result<Self> {
        let plan = Self::checked(mu.len(), nu.len(), mass, PlanKind::ExactCoupling)?;
        let tol = SOLVER_MARGINAL_TOL;
        for (i, (&r, &m)) in plan.row_sums().iter().zip(mu.weights()).enumerate() {
            if (r - m).abs() > tol {
                bail!(InvalidPlan, "row {i} carries {r}, marginal is {m}");
            }
        }
        for (j, (&c, &n)) in plan.col_sums().iter().zip(nu.weights()).enumerate() {
            if (c - n).abs() > tol {
                bail!(InvalidPlan, "column {j} carries {c}, marginal is {n}");
            }
        }
        Ok(plan)
    }

    /// Sub-coupling: row sums `≤ μ`, column sums `≤ ν`.
    pub fn sub_coupling(mass: Vec<f64>, mu: &Marginal, nu: &Marginal) -> Result<Self> {
        let plan = Self::checked(mu.len(), nu.len(), mass, PlanKind::SubCoupling)?;
        let tol = SOLVER_MARGINAL_TOL;
        for (i, (&r, &m)) in plan.row_sums().iter().zip(mu.weights()).enumerate() {
            if r > m + tol {
                bail!(InvalidPlan, "row {i} carries {r} > {m}");
            }
        }
        for (j, (&c, &n)) in plan.col_sums().iter().zip(nu.weights()).enumerate() {
            if c > n + tol {
                bail!(InvalidPlan, "column {j} carries {c} > {n}");
            }
        }
        Ok(plan)
    }

    /// The zero sub-coupling.
    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        Self::checked(rows, cols, alloc::vec![0.0; rows.saturating_mul(cols)], PlanKind::SubCoupling)
    }

    fn checked(rows: usize, cols: usize, mass: Vec<f64>, kind: PlanKind) -> Result<Self> {
        if rows == 0 || cols == 0 {
            bail!(InvalidPlan, "empty plan");
        }
        if rows > MAX_DIMENSION || cols > MAX_DIMENSION {
            return Err(CoreError::TooLarge(rows.max(cols)));
        }
        if mass.len() != rows * cols {
            bail!(InvalidPlan, "expected {} entries, got {}", rows * cols, mass.len());
        }
        if let Some((idx, m)) = mass.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            bail!(InvalidPlan, "cell ({}, {}) has mass {m}", idx / cols, idx % cols);
        }
        let total: f64 = mass.iter().sum();
        if total > 1.0 + SOLVER_MARGINAL_TOL {
            bail!(InvalidPlan, "total mass {total} exceeds 1");
        }
        Ok(Self { rows, cols, mass, kind })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> PlanKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mass.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.cols];
        for row in self.mass.chunks(self.cols) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m;
            }
        }
        out
    }

    /// `(row, col, mass)` over cells with strictly positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.cols;
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(move |(idx, &m)| (idx / cols, idx % cols, m))
    }

    /// Marginals of an exact coupling, validated at [`SOLVER_MARGINAL_TOL`].
    pub fn marginals(&self) -> Result<(Marginal, Marginal)> {
        Ok((
            Marginal::with_tolerance(self.row_sums(), SOLVER_MARGINAL_TOL)?,
            Marginal::with_tolerance(self.col_sums(), SOLVER_MARGINAL_TOL)?,
        ))
    }
}

/// `⟨c, π⟩ = Σ c[x,y] π[x,y]` with `0 · ∞ = 0`.
pub fn transport_cost(c: &CostMatrix, pi: &TransportPlan) -> Result<ExtReal> {
    expect_shape(c.rows(), c.cols(), pi.rows(), pi.cols())?;
    let mut total = 0.0;
    for (cost, &m) in c.entries().iter().zip(&pi.mass) {
        if m == 0.0 {
            continue;
        }
        match cost.finite() {
            Some(v) => total += v * m,
            None => return Ok(ExtReal::Infinity),
        }
    }
    Ok(ExtReal::Finite(total))
}

/// Convex combination `Σ w_i π_i` of exact couplings with common marginals.
pub fn mixture_plan(plans: &[TransportPlan], weights: &[f64]) -> Result<TransportPlan> {
    let Some(first) = plans.first() else {
        bail!(InvalidArgument, "mixture of an empty list of plans");
    };
    if plans.len() != weights.len() {
        bail!(InvalidArgument, "{} plans but {} weights", plans.len(), weights.len());
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        bail!(InvalidArgument, "mixture weights must be nonnegative");
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > crate::PROBABILITY_TOL {
        bail!(InvalidArgument, "mixture weights sum to {total}, not 1");
    }
    for p in plans {
        expect_shape(first.rows, first.cols, p.rows, p.cols)?;
        if p.kind != PlanKind::ExactCoupling {
            bail!(InvalidArgument, "mixtures are formed from exact couplings only");
        }
    }
    let mut mass = alloc::vec![0.0; first.mass.len()];
    for (p, &w) in plans.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, m) in mass.iter_mut().zip(&p.mass) {
            *o += w * m;
        }
    }
    let (mu, nu) = first.marginals()?;
    TransportPlan::exact_coupling(mass, &mu, &nu)
}

/// Outcome of the order check `π₁ ⪯ π₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dominance {
    /// `supp(π₁) ⊆ supp(π₂)`.
    pub dominated: bool,
    /// `max π₁/π₂` over `supp(π₁)` when dominated.
    pub density_bound: Option<f64>,
}

pub fn plan_dominates(pi1: &TransportPlan, pi2: &TransportPlan) -> Result<Dominance> {
    expect_shape(pi2.rows, pi2.cols, pi1.rows, pi1.cols)?;
    let mut bound: f64 = 0.0;
    for (&a, &b) in pi1.mass.iter().zip(&pi2.mass) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(Dominance { dominated: false, density_bound: None });
            }
            bound = bound.max(a / b);
        }
    }
    Ok(Dominance { dominated: true, density_bound: Some(bound) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cost;

    fn half_identity() -> (TransportPlan, Marginal) {
        let mu = Marginal::uniform(2).unwrap();
        let p = TransportPlan::exact_coupling(alloc::vec![0.5, 0.0, 0.0, 0.5], &mu, &mu).unwrap();
        (p, mu)
    }

    #[test]
    fn cost_skips_infinite_cells_without_mass() {
        let c = CostMatrix::new(2, 2, alloc::vec![Cost::Finite(1.0), Cost::Infinite, Cost::Infinite, Cost::Finite(1.0)])
            .unwrap();
        let (p, _) = half_identity();
        assert_eq!(transport_cost(&c, &p).unwrap(), ExtReal::Finite(1.0));
        let zero = TransportPlan::zero(2, 2).unwrap();
        assert_eq!(transport_cost(&c, &zero).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn cost_is_infinite_on_forbidden_mass() {
        let c = CostMatrix::new(2, 2, alloc::vec![Cost::Infinite, Cost::Finite(0.0), Cost::Finite(0.0), Cost::Finite(0.0)])
            .unwrap();
        let (p, _) = half_identity();
        assert_eq!(transport_cost(&c, &p).unwrap(), ExtReal::Infinity);
    }

    #[test]
    fn cost_shape_mismatch() {
        let c = CostMatrix::from_finite(1, 2, &[0.0, 0.0]).unwrap();
        let (p, _) = half_identity();
        assert!(matches!(transport_cost(&c, &p), Err(CoreError::ShapeMismatch { .. })));
    }

    #[test]
    fn exact_coupling_checks_marginals() {
        let mu = Marginal::uniform(2).unwrap();
        assert!(TransportPlan::exact_coupling(alloc::vec![0.5, 0.0, 0.5, 0.0], &mu, &mu).is_err());
        assert!(TransportPlan::sub_coupling(alloc::vec![0.25, 0.0, 0.25, 0.0], &mu, &mu).is_ok());
        assert!(TransportPlan::sub_coupling(alloc::vec![0.5, 0.0, 0.5, 0.0], &mu, &mu).is_err());
        assert!(TransportPlan::exact_coupling(alloc::vec![0.5, -0.0, 0.0, 0.5], &mu, &mu).is_ok());
        assert!(TransportPlan::exact_coupling(alloc::vec![0.6, -0.1, -0.1, 0.6], &mu, &mu).is_err());
    }

    #[test]
    fn mixture_weights_validated() {
        let (p, _) = half_identity();
        assert!(mixture_plan(&[], &[]).is_err());
        assert!(mixture_plan(core::slice::from_ref(&p), &[0.5]).is_err());
        assert_eq!(mixture_plan(core::slice::from_ref(&p), &[1.0]).unwrap(), p);
    }

    #[test]
    fn dominance_examples() {
        let mu = Marginal::uniform(2).unwrap();
        let p0 = TransportPlan::exact_coupling(alloc::vec![0.5, 0.0, 0.0, 0.5], &mu, &mu).unwrap();
        let p1 = TransportPlan::exact_coupling(alloc::vec![0.0, 0.5, 0.5, 0.0], &mu, &mu).unwrap();
        let half = mixture_plan(&[p0.clone(), p1], &[0.5, 0.5]).unwrap();
        let d = plan_dominates(&p0, &p0).unwrap();
        assert!(d.dominated);
        assert_eq!(d.density_bound, Some(1.0));
        let d = plan_dominates(&p0, &half).unwrap();
        assert_eq!(d.density_bound, Some(2.0));
        assert!(!plan_dominates(&half, &p0).unwrap().dominated);
    }
}
