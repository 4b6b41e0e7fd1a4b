use alloc::format;
use alloc::vec::Vec;

use super::dense::{LinearProgram, Relation, Sense};
use super::network::{self, Network};
use super::SolverConfig;
use crate::error::bail;
use crate::matrix::expect_shape;
use crate::{
    transport_cost, Cost, CostMatrix, CoreError, DualityReport, ExtReal, Marginal, PlanKind, PotentialPair, Result,
    TransportPlan, SOLVER_MARGINAL_TOL,
};

fn check_shapes(c: &CostMatrix, mu: &Marginal, nu: &Marginal) -> Result<()> {
    expect_shape(c.rows(), c.cols(), mu.len(), nu.len())
}

fn internal(context: &str) -> impl Fn(CoreError) -> CoreError + '_ {
    move |e| CoreError::Internal(format!("{context}: {e}"))
}

/// Solver flows at or below this level are treated as zero mass.
fn flow_floor(cfg: &SolverConfig) -> f64 {
    cfg.feasibility_tol * 1e-3
}

fn scatter(rows: usize, cols: usize, cells: &[(usize, usize)], flow: &[f64], floor: f64) -> Vec<f64> {
    let mut mass = alloc::vec![0.0; rows * cols];
    for (&(i, j), &f) in cells.iter().zip(flow) {
        if f > floor {
            mass[i * cols + j] = f;
        }
    }
    mass
}

/// Minimum-cost exact coupling via network simplex, with its optimal potentials.
///
/// Forbidden cells are not arcs of the network. The potentials satisfy
/// `φ ⊕ ψ ≤ c + optimality_tol` on finite cells, equality on the plan's
/// support, and are gauged to `Σ φ μ = 0`.
pub fn solve_primal(c: &CostMatrix, mu: &Marginal, nu: &Marginal, cfg: &SolverConfig) -> Result<DualityReport> {
    check_shapes(c, mu, nu)?;
    let (rows, cols) = (mu.len(), nu.len());
    let mut cells = Vec::with_capacity(c.finite_count());
    let mut arcs = Vec::with_capacity(c.finite_count());
    for (i, j, v) in c.finite_cells() {
        cells.push((i, j));
        arcs.push((i, rows + j, v));
    }
    let mut supply: Vec<f64> = mu.weights().to_vec();
    supply.extend(nu.weights().iter().map(|w| -w));
    let out = network::solve(&Network { num_nodes: rows + cols, supply, arcs }, cfg)?;

    let mass = scatter(rows, cols, &cells, &out.flow, flow_floor(cfg));
    let plan = TransportPlan::exact_coupling(mass, mu, nu).map_err(internal("network simplex plan"))?;
    let phi: Vec<f64> = out.potential[..rows].iter().map(|p| -p).collect();
    let psi = &out.potential[rows..];
    let pp = PotentialPair::from_finite(&phi, psi)?.normalize_gauge(mu);
    let primal = transport_cost(c, &plan)?;
    let dual = pp.dual_objective(mu, nu)?;
    Ok(DualityReport::new(primal, dual, Some(plan), Some(pp), out.stats))
}

/// The exact-coupling problem as a dense LP: one variable per finite cell,
/// rows `0..m` fix the row sums and rows `m..m+n` the column sums.
pub fn transport_lp(c: &CostMatrix, mu: &Marginal, nu: &Marginal) -> Result<(LinearProgram, Vec<(usize, usize)>)> {
    check_shapes(c, mu, nu)?;
    let rows = mu.len();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut cells = Vec::new();
    let mut by_row: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); rows];
    let mut by_col: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); nu.len()];
    for (i, j, v) in c.finite_cells() {
        let var = lp.add_variable(v, 0.0, f64::INFINITY);
        cells.push((i, j));
        by_row[i].push((var, 1.0));
        by_col[j].push((var, 1.0));
    }
    for (coeffs, &w) in by_row.into_iter().zip(mu.weights()) {
        lp.add_constraint(coeffs, Relation::Eq, w);
    }
    for (coeffs, &w) in by_col.into_iter().zip(nu.weights()) {
        lp.add_constraint(coeffs, Relation::Eq, w);
    }
    Ok((lp, cells))
}

/// Maximizes `Σ φ μ + Σ ψ ν` subject to `φ[x] + ψ[y] ≤ c[x,y]` on finite cells.
///
/// Runs the dense revised simplex on the coupling LP and reads the optimal
/// potentials off its simplex multipliers, so it shares no code path with
/// [`solve_primal`]. The reported `primal_value` is the dense engine's plan cost.
pub fn solve_dual(c: &CostMatrix, mu: &Marginal, nu: &Marginal, cfg: &SolverConfig) -> Result<DualityReport> {
    let (lp, cells) = transport_lp(c, mu, nu)?;
    let rows = mu.len();
    let sol = lp.solve(cfg).map_err(|e| match e {
        CoreError::Unbounded => CoreError::Internal("coupling LP reported unbounded".into()),
        other => other,
    })?;
    let pp = PotentialPair::from_finite(&sol.duals[..rows], &sol.duals[rows..])?.normalize_gauge(mu);
    if let Some(v) = pp.max_violation(c)? {
        if v > 1e3 * cfg.optimality_tol {
            bail!(Internal, "dual potentials violate the cost by {v}");
        }
    }
    let mass = scatter(rows, nu.len(), &cells, &sol.x, flow_floor(cfg));
    let plan = TransportPlan::exact_coupling(mass, mu, nu).map_err(internal("dense simplex plan"))?;
    let primal = transport_cost(c, &plan)?;
    let dual = pp.dual_objective(mu, nu)?;
    Ok(DualityReport::new(primal, dual, Some(plan), Some(pp), sol.stats))
}

/// Partial transport: minimum cost over sub-couplings with total mass `≥ 1 − ε`.
///
/// Solved as a balanced transportation problem with a dummy source and sink of
/// capacity `ε` each: mass a row does not ship goes to the dummy sink, demand
/// a column does not receive comes from the dummy source, and the dummy pair
/// absorbs the rest at zero cost.
pub fn solve_partial(c: &CostMatrix, mu: &Marginal, nu: &Marginal, eps: f64, cfg: &SolverConfig) -> Result<DualityReport> {
    check_shapes(c, mu, nu)?;
    if !(0.0..=1.0).contains(&eps) {
        bail!(InvalidArgument, "epsilon must lie in [0, 1], got {eps}");
    }
    let (rows, cols) = (mu.len(), nu.len());
    let dummy_source = rows;
    let first_sink = rows + 1;
    let dummy_sink = first_sink + cols;

    let mut cells = Vec::with_capacity(c.finite_count());
    let mut arcs = Vec::with_capacity(c.finite_count() + rows + cols + 1);
    for (i, j, v) in c.finite_cells() {
        cells.push((i, j));
        arcs.push((i, first_sink + j, v));
    }
    for i in 0..rows {
        arcs.push((i, dummy_sink, 0.0));
    }
    for j in 0..cols {
        arcs.push((dummy_source, first_sink + j, 0.0));
    }
    arcs.push((dummy_source, dummy_sink, 0.0));

    let mut supply: Vec<f64> = mu.weights().to_vec();
    supply.push(eps);
    supply.extend(nu.weights().iter().map(|w| -w));
    supply.push(-eps);
    let out = network::solve(&Network { num_nodes: dummy_sink + 1, supply, arcs }, cfg)?;

    let mass = scatter(rows, cols, &cells, &out.flow[..cells.len()], flow_floor(cfg));
    let plan = TransportPlan::sub_coupling(mass, mu, nu).map_err(internal("partial plan"))?;
    if plan.total_mass() < 1.0 - eps - SOLVER_MARGINAL_TOL {
        bail!(Internal, "partial plan carries {} < 1 - {eps}", plan.total_mass());
    }
    let pot = &out.potential;
    let phi: Vec<f64> = pot[..rows].iter().map(|p| -p).collect();
    let psi = &pot[first_sink..dummy_sink];
    let pp = PotentialPair::from_finite(&phi, psi)?;
    let dual = pp.dual_objective(mu, nu)? + ExtReal::Finite(eps * (pot[dummy_sink] - pot[dummy_source]));
    let primal = transport_cost(c, &plan)?;
    Ok(DualityReport::new(primal, dual, Some(plan), Some(pp), out.stats))
}

/// Minimum cost over exact couplings of `π₀`'s marginals supported inside `supp(π₀)`.
pub fn solve_restricted_primal(c: &CostMatrix, pi0: &TransportPlan, cfg: &SolverConfig) -> Result<DualityReport> {
    expect_shape(c.rows(), c.cols(), pi0.rows(), pi0.cols())?;
    check_reference(c, pi0)?;
    let (mu, nu) = pi0.marginals()?;
    let restricted = CostMatrix::from_fn(c.rows(), c.cols(), |i, j| if pi0.get(i, j) > 0.0 { c.get(i, j) } else { Cost::Infinite })?;
    solve_primal(&restricted, &mu, &nu, cfg).map_err(|e| match e {
        CoreError::Infeasible => CoreError::Internal("restricted problem infeasible although π₀ is feasible".into()),
        other => other,
    })
}

fn check_reference(c: &CostMatrix, pi0: &TransportPlan) -> Result<()> {
    if pi0.kind() != PlanKind::ExactCoupling {
        bail!(InvalidArgument, "reference plan must be an exact coupling");
    }
    if !transport_cost(c, pi0)?.is_finite() {
        bail!(InvalidArgument, "reference plan has infinite cost");
    }
    Ok(())
}

/// Relaxed dual `D^(π₀,ε)`: maximize `Σ φ μ + Σ ψ ν` over finite potentials
/// with `Σ_{supp π₀} (φ[x] + ψ[y] − c[x,y])₊ π₀[x,y] ≤ ε`.
///
/// The positive part is linearized with one slack per support cell. The
/// multipliers of the cell rows form an exact coupling `π ≪ π₀` and the budget
/// multiplier `λ` bounds its density, so `primal_value = ⟨c, π⟩ + ελ` is the
/// value of the LP dual.
pub fn solve_relaxed_dual(
    c: &CostMatrix,
    mu: &Marginal,
    nu: &Marginal,
    pi0: &TransportPlan,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<DualityReport> {
    check_shapes(c, mu, nu)?;
    expect_shape(c.rows(), c.cols(), pi0.rows(), pi0.cols())?;
    if !(eps > 0.0 && eps.is_finite()) {
        bail!(InvalidArgument, "epsilon must be positive, got {eps}");
    }
    check_reference(c, pi0)?;
    for (i, (r, m)) in pi0.row_sums().iter().zip(mu.weights()).enumerate() {
        if (r - m).abs() > SOLVER_MARGINAL_TOL {
            bail!(InvalidArgument, "reference plan row {i} carries {r}, marginal is {m}");
        }
    }
    for (j, (s, n)) in pi0.col_sums().iter().zip(nu.weights()).enumerate() {
        if (s - n).abs() > SOLVER_MARGINAL_TOL {
            bail!(InvalidArgument, "reference plan column {j} carries {s}, marginal is {n}");
        }
    }

    let (rows, cols) = (mu.len(), nu.len());
    let mut lp = LinearProgram::new(Sense::Maximize);
    for &w in mu.weights() {
        lp.add_variable(w, f64::NEG_INFINITY, f64::INFINITY);
    }
    for &w in nu.weights() {
        lp.add_variable(w, f64::NEG_INFINITY, f64::INFINITY);
    }
    let support: Vec<(usize, usize, f64)> = pi0.support().collect();
    let mut budget = Vec::with_capacity(support.len());
    for &(i, j, m) in &support {
        let slack = lp.add_variable(0.0, 0.0, f64::INFINITY);
        let cost = c.get(i, j).finite().expect("finite on support");
        lp.add_constraint([(i, 1.0), (rows + j, 1.0), (slack, -1.0)], Relation::Le, cost);
        budget.push((slack, m));
    }
    lp.add_constraint(budget, Relation::Le, eps);

    let sol = lp.solve(cfg)?;
    let pp = PotentialPair::from_finite(&sol.x[..rows], &sol.x[rows..rows + cols])?.normalize_gauge(mu);
    let dual = pp.dual_objective(mu, nu)?;

    let mut mass = alloc::vec![0.0; rows * cols];
    let floor = flow_floor(cfg);
    let mut primal = 0.0;
    for (k, &(i, j, _)) in support.iter().enumerate() {
        let p = sol.duals[k];
        primal += p * c.get(i, j).finite().unwrap_or(0.0);
        if p > floor {
            mass[i * cols + j] = p;
        }
    }
    primal += eps * sol.duals[support.len()];
    let plan = TransportPlan::exact_coupling(mass, mu, nu).map_err(internal("relaxed dual multipliers"))?;
    Ok(DualityReport::new(ExtReal::Finite(primal), dual, Some(plan), Some(pp), sol.stats))
}

fn check_grid(grid: &[f64], allow_one: bool) -> Result<()> {
    if grid.is_empty() {
        bail!(InvalidArgument, "empty epsilon grid");
    }
    for &e in grid {
        let upper_ok = if allow_one { e <= 1.0 } else { e.is_finite() };
        if !(e > 0.0 && upper_ok) {
            bail!(InvalidArgument, "epsilon {e} out of range");
        }
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        bail!(InvalidArgument, "epsilon grid must be strictly decreasing");
    }
    Ok(())
}

/// Optimal potentials of [`solve_relaxed_dual`] for each ε, gauged to `Σ φ μ = 0`.
pub fn dual_sequence(
    c: &CostMatrix,
    mu: &Marginal,
    nu: &Marginal,
    pi0: &TransportPlan,
    eps_list: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<PotentialPair>> {
    check_grid(eps_list, false)?;
    eps_list
        .iter()
        .map(|&eps| {
            let report = solve_relaxed_dual(c, mu, nu, pi0, eps, cfg)?;
            Ok(report.optimal_potentials.expect("relaxed dual returns potentials"))
        })
        .collect()
}

/// Monotonicity of a value sequence as ε decreases along the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepDirection {
    /// Partial transport: the feasible set shrinks with ε.
    NondecreasingAsEpsilonShrinks,
    /// Relaxed dual: the feasible set shrinks with ε.
    NonincreasingAsEpsilonShrinks,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSweep {
    /// Strictly decreasing, in `(0, 1]` for partial transport.
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    /// Simplex iterations per grid point.
    pub iterations: Vec<usize>,
    /// Value of the last linear piece (through the two smallest ε) at ε = 0.
    pub extrapolated_limit: f64,
    pub direction: SweepDirection,
}

impl EpsilonSweep {
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| match self.direction {
            SweepDirection::NondecreasingAsEpsilonShrinks => w[1] >= w[0] - tol,
            SweepDirection::NonincreasingAsEpsilonShrinks => w[1] <= w[0] + tol,
        })
    }

    /// Value at the smallest ε.
    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("sweeps are nonempty")
    }
}

/// Extends the line through the last two `(ε, value)` points to ε = 0.
pub fn extrapolate_to_zero(epsilons: &[f64], values: &[f64]) -> f64 {
    match (epsilons, values) {
        ([.., e1, e2], [.., v1, v2]) => {
            let slope = (v1 - v2) / (e1 - e2);
            v2 - e2 * slope
        }
        (_, [v]) => *v,
        _ => f64::NAN,
    }
}

fn finish_sweep(epsilons: &[f64], reports: Vec<DualityReport>, direction: SweepDirection, dual: bool) -> Result<EpsilonSweep> {
    let values: Vec<f64> = reports.iter().map(|r| if dual { r.dual() } else { r.primal() }).collect();
    let sweep = EpsilonSweep {
        epsilons: epsilons.to_vec(),
        extrapolated_limit: extrapolate_to_zero(epsilons, &values),
        iterations: reports.iter().map(|r| r.stats.iterations).collect(),
        values,
        direction,
    };
    if !sweep.is_monotone(1e-7) {
        bail!(Internal, "sweep values violate monotonicity in epsilon: {:?}", sweep.values);
    }
    Ok(sweep)
}

/// Estimates `P^rel = lim_{ε→0} P^ε` from partial-transport solves on a
/// strictly decreasing grid in `(0, 1]`.
pub fn estimate_p_rel(c: &CostMatrix, mu: &Marginal, nu: &Marginal, eps_grid: &[f64], cfg: &SolverConfig) -> Result<EpsilonSweep> {
    check_grid(eps_grid, true)?;
    let reports = eps_grid.iter().map(|&e| solve_partial(c, mu, nu, e, cfg)).collect::<Result<Vec<_>>>()?;
    finish_sweep(eps_grid, reports, SweepDirection::NondecreasingAsEpsilonShrinks, false)
}

/// Estimates `D^(π₀) = lim_{ε→0} D^(π₀,ε)` from relaxed-dual solves.
pub fn estimate_relaxed_dual_limit(
    c: &CostMatrix,
    mu: &Marginal,
    nu: &Marginal,
    pi0: &TransportPlan,
    eps_grid: &[f64],
    cfg: &SolverConfig,
) -> Result<EpsilonSweep> {
    check_grid(eps_grid, false)?;
    let reports =
        eps_grid.iter().map(|&e| solve_relaxed_dual(c, mu, nu, pi0, e, cfg)).collect::<Result<Vec<_>>>()?;
    finish_sweep(eps_grid, reports, SweepDirection::NonincreasingAsEpsilonShrinks, true)
}
