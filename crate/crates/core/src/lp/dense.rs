//! Bounded-variable revised simplex with an explicit dense basis inverse.
//!
//! Columns are stored sparsely; only `B⁻¹` is dense. Each inequality row gets
//! a slack, rows whose initial residual the slack cannot absorb get an
//! artificial, and a two-phase method runs on top. Variables may be free,
//! boxed or one-sided.

use alloc::vec::Vec;

use super::SolverConfig;
use crate::error::bail;
use crate::{CoreError, Result, SolverStats};

const NONE: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-11;
const TIE_TOL: f64 = 1e-12;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
struct Constraint {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// A linear program `opt cᵀx` subject to row relations and variable bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    sense: Sense,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// Shadow prices `∂objective/∂rhs`, one per constraint.
    pub duals: Vec<f64>,
    pub stats: SolverStats,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self { sense, cost: Vec::new(), lower: Vec::new(), upper: Vec::new(), rows: Vec::new() }
    }

    /// Adds a variable with bounds `lower ≤ x ≤ upper` (either may be infinite).
    pub fn add_variable(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: impl IntoIterator<Item = (usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Constraint { coeffs: coeffs.into_iter().collect(), relation, rhs });
        self.rows.len() - 1
    }

    pub fn num_variables(&self) -> usize {
        self.cost.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.cost.len();
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !self.cost[j].is_finite() {
                bail!(InvalidArgument, "variable {j} has non-finite cost");
            }
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                bail!(InvalidArgument, "variable {j} has invalid bounds [{l}, {u}]");
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                bail!(InvalidArgument, "constraint {i} has non-finite right-hand side");
            }
            for &(j, v) in &row.coeffs {
                if j >= n || !v.is_finite() {
                    bail!(InvalidArgument, "constraint {i} has invalid coefficient ({j}, {v})");
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, cfg: &SolverConfig) -> Result<LpSolution> {
        cfg.validate()?;
        self.validate()?;
        let n = self.cost.len();
        let m = self.rows.len();

        let mut cols: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                if v != 0.0 {
                    cols[j].push((i, v));
                }
            }
        }
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        let mut x: Vec<f64> = (0..n)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();

        let mut residual: Vec<f64> = self.rows.iter().map(|r| r.rhs).collect();
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                residual[i] -= v * x[j];
            }
        }

        let mut basis = alloc::vec![NONE; m];
        let mut basis_coef = alloc::vec![0.0; m];
        for (i, row) in self.rows.iter().enumerate() {
            let sign = match row.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => continue,
            };
            let j = cols.len();
            cols.push(alloc::vec![(i, sign)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            let value = residual[i] * sign;
            if value >= 0.0 {
                x.push(value);
                basis[i] = j;
                basis_coef[i] = sign;
            } else {
                x.push(0.0);
            }
        }
        let first_artificial = cols.len();
        for i in 0..m {
            if basis[i] != NONE {
                continue;
            }
            // residual excludes slacks, which all sit at zero unless basic
            let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
            let j = cols.len();
            cols.push(alloc::vec![(i, sign)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(residual[i].abs());
            basis[i] = j;
            basis_coef[i] = sign;
        }
        let total = cols.len();
        let mut position = alloc::vec![NONE; total];
        for (i, &j) in basis.iter().enumerate() {
            position[j] = i;
        }
        let mut binv = alloc::vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0 / basis_coef[i];
        }

        let mut s = Revised {
            m,
            cols,
            lower,
            upper,
            x,
            basis,
            position,
            binv,
            rhs: self.rows.iter().map(|r| r.rhs).collect(),
            cfg,
            stats: SolverStats::default(),
            since_refactor: 0,
            refactor_every: m.max(64),
            dimension: m + n,
        };

        if first_artificial < total {
            let mut phase1 = alloc::vec![0.0; total];
            phase1[first_artificial..].iter_mut().for_each(|c| *c = 1.0);
            s.optimize(&phase1)?;
            let infeasibility: f64 = (first_artificial..total).map(|j| s.x[j]).sum();
            let scale = s.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            if infeasibility > cfg.feasibility_tol * scale {
                return Err(CoreError::Infeasible);
            }
            s.drive_out_artificials(first_artificial)?;
        }

        let flip = if self.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut phase2 = alloc::vec![0.0; total];
        for j in 0..n {
            phase2[j] = flip * self.cost[j];
        }
        s.optimize(&phase2)?;
        s.refactor()?;

        let y = s.duals(&phase2);
        let xs: Vec<f64> = s.x[..n].to_vec();
        let objective = xs.iter().zip(&self.cost).map(|(a, c)| a * c).sum();
        Ok(LpSolution { objective, x: xs, duals: y.into_iter().map(|v| flip * v).collect(), stats: s.stats })
    }
}

struct Revised<'a> {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<usize>,
    binv: Vec<f64>,
    rhs: Vec<f64>,
    cfg: &'a SolverConfig,
    stats: SolverStats,
    since_refactor: usize,
    refactor_every: usize,
    dimension: usize,
}

impl Revised<'_> {
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = alloc::vec![0.0; m];
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            for (yi, b) in y.iter_mut().zip(row) {
                *yi += cb * b;
            }
        }
        y
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = alloc::vec![0.0; m];
        for &(i, v) in &self.cols[j] {
            for (r, wr) in w.iter_mut().enumerate() {
                *wr += self.binv[r * m + i] * v;
            }
        }
        w
    }

    fn pivot_inverse(&mut self, r: usize, w: &[f64]) {
        let m = self.m;
        let piv = w[r];
        for k in 0..m {
            self.binv[r * m + k] /= piv;
        }
        for (i, &wi) in w.iter().enumerate() {
            if i == r || wi == 0.0 {
                continue;
            }
            for k in 0..m {
                self.binv[i * m + k] -= wi * self.binv[r * m + k];
            }
        }
    }

    /// Rebuilds `B⁻¹` from scratch and recomputes the basic values.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let mut a = alloc::vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + r] += v;
            }
        }
        let mut inv = alloc::vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let (p, best) = (col..m)
                .map(|r| (r, a[r * m + col].abs()))
                .fold((col, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best < 1e-13 {
                bail!(Internal, "singular basis during refactorization");
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;

        let mut rhs = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.position[j] != NONE || self.x[j] == 0.0 {
                continue;
            }
            for &(i, v) in col {
                rhs[i] -= v * self.x[j];
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.basis[r]] = row.iter().zip(&rhs).map(|(b, v)| b * v).sum();
        }
        Ok(())
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        let threshold = self.cfg.bland_threshold(self.dimension);
        let tol = self.cfg.optimality_tol;
        let mut degenerate_run = 0usize;
        loop {
            if self.since_refactor >= self.refactor_every {
                self.refactor()?;
            }
            let bland = degenerate_run >= threshold;
            let y = self.duals(cost);

            let mut entering = NONE;
            let mut dir = 0.0;
            let mut best = 0.0;
            for j in 0..self.cols.len() {
                if self.position[j] != NONE {
                    continue;
                }
                let can_inc = self.x[j] < self.upper[j];
                let can_dec = self.x[j] > self.lower[j];
                if !can_inc && !can_dec {
                    continue;
                }
                let d = cost[j] - self.cols[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>();
                let (score, sgn) = if can_inc && d < -tol {
                    (-d, 1.0)
                } else if can_dec && d > tol {
                    (d, -1.0)
                } else {
                    continue;
                };
                if score > best {
                    best = score;
                    entering = j;
                    dir = sgn;
                    if bland {
                        break;
                    }
                }
            }
            if entering == NONE {
                return Ok(());
            }
            if self.stats.iterations >= self.cfg.max_iterations {
                return Err(CoreError::IterationLimit(self.stats.iterations));
            }
            self.stats.iterations += 1;
            let j = entering;
            let w = self.ftran(j);

            // ratio test: x_B[r] moves at rate -dir * w[r]
            let limit_of = |s: &Self, r: usize| -> Option<f64> {
                let wr = w[r];
                if wr.abs() <= PIVOT_TOL {
                    return None;
                }
                let rate = -dir * wr;
                let b = s.basis[r];
                let lim = if rate < 0.0 {
                    if !s.lower[b].is_finite() {
                        return None;
                    }
                    (s.x[b] - s.lower[b]) / -rate
                } else {
                    if !s.upper[b].is_finite() {
                        return None;
                    }
                    (s.upper[b] - s.x[b]) / rate
                };
                Some(lim.max(0.0))
            };
            let flip_limit = self.upper[j] - self.lower[j];
            let mut theta_min = flip_limit;
            for r in 0..self.m {
                if let Some(l) = limit_of(self, r) {
                    theta_min = theta_min.min(l);
                }
            }
            if theta_min == f64::INFINITY {
                return Err(CoreError::Unbounded);
            }
            let cutoff = theta_min + TIE_TOL * theta_min.max(1.0);
            let mut leave = NONE;
            let mut theta = theta_min;
            if flip_limit > cutoff {
                for r in 0..self.m {
                    let Some(l) = limit_of(self, r) else { continue };
                    if l > cutoff {
                        continue;
                    }
                    let better = match leave {
                        NONE => true,
                        cur if bland => self.basis[r] < self.basis[cur],
                        cur => w[r].abs() > w[cur].abs(),
                    };
                    if better {
                        leave = r;
                        theta = l;
                    }
                }
            } else {
                theta = flip_limit;
            }

            self.x[j] += dir * theta;
            for r in 0..self.m {
                let b = self.basis[r];
                self.x[b] -= dir * theta * w[r];
            }
            if leave == NONE {
                self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
            } else {
                let b = self.basis[leave];
                self.x[b] = if -dir * w[leave] < 0.0 { self.lower[b] } else { self.upper[b] };
                self.basis[leave] = j;
                self.position[j] = leave;
                self.position[b] = NONE;
                self.pivot_inverse(leave, &w);
                self.since_refactor += 1;
                self.stats.pivots += 1;
                if bland {
                    self.stats.bland_pivots += 1;
                }
            }
            if theta < DEGENERATE_STEP {
                self.stats.degenerate_pivots += 1;
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
    }

    /// Pivots zero-level artificials out of the basis where possible and fixes
    /// every artificial at zero.
    fn drive_out_artificials(&mut self, first_artificial: usize) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            if self.basis[r] < first_artificial {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            let mut best = (NONE, 1e-9);
            for j in 0..first_artificial {
                if self.position[j] != NONE {
                    continue;
                }
                let alpha: f64 = self.cols[j].iter().map(|&(i, v)| row[i] * v).sum();
                if alpha.abs() > best.1 {
                    best = (j, alpha.abs());
                }
            }
            if best.0 == NONE {
                // redundant row
                continue;
            }
            let j = best.0;
            let w = self.ftran(j);
            let art = self.basis[r];
            self.basis[r] = j;
            self.position[j] = r;
            self.position[art] = NONE;
            self.x[art] = 0.0;
            self.pivot_inverse(r, &w);
            self.stats.pivots += 1;
        }
        for j in first_artificial..self.cols.len() {
            self.upper[j] = 0.0;
            if self.position[j] == NONE {
                self.x[j] = 0.0;
            }
        }
        self.refactor()?;
        for j in first_artificial..self.cols.len() {
            if self.position[j] != NONE {
                self.x[j] = 0.0;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_variable(3.0, 0.0, f64::INFINITY);
        let y = lp.add_variable(5.0, 0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0)], Relation::Le, 4.0);
        lp.add_constraint([(y, 2.0)], Relation::Le, 12.0);
        lp.add_constraint([(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
        let sol = lp.solve(&cfg()).unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
        // shadow prices (0, 3/2, 1)
        assert!(sol.duals[0].abs() < 1e-9);
        assert!((sol.duals[1] - 1.5).abs() < 1e-9);
        assert!((sol.duals[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // min x + y, x + y = 2, x - y ≥ 1, → objective 2
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable(1.0, 0.0, f64::INFINITY);
        let y = lp.add_variable(1.0, 0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Eq, 2.0);
        lp.add_constraint([(x, 1.0), (y, -1.0)], Relation::Ge, 1.0);
        let sol = lp.solve(&cfg()).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!(sol.x[0] - sol.x[1] >= 1.0 - 1e-9);
    }

    #[test]
    fn free_variables_and_box_bounds() {
        // min -x - y, x free, -1 ≤ y ≤ 2, x + y ≤ 3, x - y ≤ 1 → x = 2, y = 1? x+y=3 is binding
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable(-1.0, f64::NEG_INFINITY, f64::INFINITY);
        let y = lp.add_variable(-1.0, -1.0, 2.0);
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Le, 3.0);
        lp.add_constraint([(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        let sol = lp.solve(&cfg()).unwrap();
        assert!((sol.objective + 3.0).abs() < 1e-9);
    }

    #[test]
    fn bound_flip_only() {
        // min -x, 0 ≤ x ≤ 5, no constraints reachable
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable(-1.0, 0.0, 5.0);
        lp.add_constraint([(x, 1.0)], Relation::Le, 10.0);
        let sol = lp.solve(&cfg()).unwrap();
        assert_eq!(sol.x[0], 5.0);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable(1.0, 0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0)], Relation::Le, -1.0);
        assert_eq!(lp.solve(&cfg()).unwrap_err(), CoreError::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_variable(1.0, 0.0, f64::INFINITY);
        let y = lp.add_variable(0.0, 0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.solve(&cfg()).unwrap_err(), CoreError::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        // transport 2x2 with all four marginal rows (rank 3)
        let mut lp = LinearProgram::new(Sense::Minimize);
        let v: Vec<usize> = [0.0, 1.0, 1.0, 0.0].iter().map(|&c| lp.add_variable(c, 0.0, f64::INFINITY)).collect();
        lp.add_constraint([(v[0], 1.0), (v[1], 1.0)], Relation::Eq, 0.5);
        lp.add_constraint([(v[2], 1.0), (v[3], 1.0)], Relation::Eq, 0.5);
        lp.add_constraint([(v[0], 1.0), (v[2], 1.0)], Relation::Eq, 0.5);
        lp.add_constraint([(v[1], 1.0), (v[3], 1.0)], Relation::Eq, 0.5);
        let sol = lp.solve(&cfg()).unwrap();
        assert!(sol.objective.abs() < 1e-12);
        // reduced costs are nonnegative under the returned prices
        let d = |j: usize, a: usize, b: usize| [0.0, 1.0, 1.0, 0.0][j] - sol.duals[a] - sol.duals[b];
        assert!(d(1, 0, 3) > -1e-9 && d(2, 1, 2) > -1e-9);
    }

    #[test]
    fn invalid_bounds_rejected() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_variable(1.0, 2.0, 1.0);
        assert!(matches!(lp.solve(&cfg()), Err(CoreError::InvalidArgument(_))));
    }
}
