//! Checks on solutions: cyclic monotonicity, attainment certificates, the
//! telescoping bound on the rotation model, and small-set mass profiles.

use alloc::vec::Vec;

use crate::error::bail;
use crate::matrix::expect_shape;
use crate::rotation::RotationInstance;
use crate::{j_c, transport_cost, CostMatrix, ExtReal, Marginal, PotentialPair, Result, TransportPlan, ValueMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `φ[x] + ψ[y] > c[x,y] + tol`.
    AboveCost,
    /// `|φ[x] + ψ[y] − c[x,y]| > tol` on a cell carrying mass.
    SlackOnSupport,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CcmViolation {
    pub row: usize,
    pub col: usize,
    pub kind: ViolationKind,
    /// Size of the violation; infinite when a side is infinite.
    pub excess: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CcmOutcome {
    Pass,
    Fail(CcmViolation),
}

impl CcmOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CcmOutcome::Pass)
    }
}

fn check_shapes(c: &CostMatrix, pi: &TransportPlan, pp: &PotentialPair) -> Result<()> {
    expect_shape(c.rows(), c.cols(), pi.rows(), pi.cols())?;
    expect_shape(c.rows(), c.cols(), pp.phi().len(), pp.psi().len())
}

/// `s − c` for a potential sum `s` and a cost `c`, as an extended real.
fn excess(s: ExtReal, c: ExtReal) -> f64 {
    match (s, c) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => a - b,
        (ExtReal::NegInfinity, ExtReal::Infinity) => f64::NAN,
        (ExtReal::NegInfinity, _) | (_, ExtReal::Infinity) => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    }
}

fn check_cells(
    c: &CostMatrix,
    pi: &TransportPlan,
    pp: &PotentialPair,
    tol: f64,
    mut upper_required: impl FnMut(usize, usize) -> bool,
) -> CcmOutcome {
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            let cost = ExtReal::from(c.get(i, j));
            let d = excess(pp.sum_at(i, j), cost);
            if cost.is_finite() && upper_required(i, j) && d > tol {
                return CcmOutcome::Fail(CcmViolation { row: i, col: j, kind: ViolationKind::AboveCost, excess: d });
            }
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if pi.get(i, j) > tol && !(d.abs() <= tol) {
                let excess = if d.is_nan() { f64::INFINITY } else { d.abs() };
                return CcmOutcome::Fail(CcmViolation { row: i, col: j, kind: ViolationKind::SlackOnSupport, excess });
            }
        }
    }
    CcmOutcome::Pass
}

/// `φ ⊕ ψ ≤ c + tol` on every finite cell and `|φ ⊕ ψ − c| ≤ tol` wherever
/// `π > tol`; reports the first violating cell in row-major order.
pub fn check_strong_ccm(c: &CostMatrix, pi: &TransportPlan, pp: &PotentialPair, tol: f64) -> Result<CcmOutcome> {
    check_shapes(c, pi, pp)?;
    Ok(check_cells(c, pi, pp, tol, |_, _| true))
}

/// As [`check_strong_ccm`], but the upper bound is only required on the union
/// of the supports of `plan_family`.
pub fn check_ccm_ae(
    c: &CostMatrix,
    pi: &TransportPlan,
    pp: &PotentialPair,
    plan_family: &[TransportPlan],
    tol: f64,
) -> Result<CcmOutcome> {
    check_shapes(c, pi, pp)?;
    let mut covered = alloc::vec![false; c.rows() * c.cols()];
    for p in plan_family {
        expect_shape(c.rows(), c.cols(), p.rows(), p.cols())?;
        for (i, j, _) in p.support() {
            covered[i * c.cols() + j] = true;
        }
    }
    let cols = c.cols();
    Ok(check_cells(c, pi, pp, tol, |i, j| covered[i * cols + j]))
}

/// `true` when no point with positive marginal mass has a `−∞` potential.
pub fn no_atoms_at_neg_infinity(pp: &PotentialPair, mu: &Marginal, nu: &Marginal) -> Result<bool> {
    expect_shape(mu.len(), nu.len(), pp.phi().len(), pp.psi().len())?;
    let clean = |values: &[ExtReal], weights: &[f64]| {
        values.iter().zip(weights).all(|(v, &w)| w == 0.0 || *v != ExtReal::NegInfinity)
    };
    Ok(clean(pp.phi(), mu.weights()) && clean(pp.psi(), nu.weights()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttainmentReport {
    pub j_c: ExtReal,
    pub cost: ExtReal,
    /// `⟨c, π⟩ − J_c(φ, ψ)`.
    pub gap: f64,
    pub ccm: CcmOutcome,
    /// Strong cyclic monotonicity holds and `|gap| ≤ (rows + cols) · tol`.
    pub certified: bool,
}

/// Certifies that `π` is optimal and `(φ, ψ)` attains the dual through `J_c`.
pub fn attainment_certificate(c: &CostMatrix, pi: &TransportPlan, pp: &PotentialPair, tol: f64) -> Result<AttainmentReport> {
    let ccm = check_strong_ccm(c, pi, pp, tol)?;
    let j = j_c(pp, pi)?;
    let cost = transport_cost(c, pi)?;
    let gap = match (cost, j) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => a - b,
        _ => f64::INFINITY,
    };
    let bound = (c.rows() + c.cols()) as f64 * tol;
    Ok(AttainmentReport { j_c: j, cost, gap, ccm, certified: ccm.passed() && gap.abs() <= bound })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    /// Index into the potential sequence.
    pub sequence_index: usize,
    pub k: usize,
    /// `‖h − φ ⊕ ψ‖_{L¹(π_k)}`.
    pub lhs: f64,
    /// `k · ‖c̃ − φ ⊕ ψ‖_{L¹(π₀ + π₁)}`.
    pub rhs: f64,
    pub pass: bool,
}

/// `Σ_i |m[i, i+ks] − φ[i] − ψ[i+ks]| / n`.
fn graph_residual(inst: &RotationInstance, m: impl Fn(usize, usize) -> ExtReal, phi: &[f64], psi: &[f64], k: usize) -> Result<f64> {
    let n = inst.n();
    let mut total = 0.0;
    for i in 0..n {
        let j = inst.target(i, k);
        let Some(v) = m(i, j).finite() else {
            bail!(InvalidArgument, "matrix is infinite on graph {k} at row {i}");
        };
        total += (v - phi[i] - psi[j]).abs();
    }
    Ok(total / n as f64)
}

/// The telescoping bound `‖h − φ⊕ψ‖_{L¹(π_k)} ≤ k ‖c̃ − φ⊕ψ‖_{L¹(π₀+π₁)}`
/// for every pair of the sequence and `1 ≤ k ≤ k_max`.
pub fn concrete_bound_check(
    inst: &RotationInstance,
    c_tilde: &CostMatrix,
    potentials: &[PotentialPair],
    h: &ValueMatrix,
    k_max: usize,
) -> Result<Vec<BoundRow>> {
    let n = inst.n();
    expect_shape(n, n, c_tilde.rows(), c_tilde.cols())?;
    expect_shape(n, n, h.rows(), h.cols())?;
    if k_max >= n {
        bail!(InvalidArgument, "k_max must be below n = {n}, got {k_max}");
    }
    let mut rows = Vec::with_capacity(potentials.len() * k_max);
    for (idx, pp) in potentials.iter().enumerate() {
        expect_shape(n, n, pp.phi().len(), pp.psi().len())?;
        let Some((phi, psi)) = pp.finite_parts() else {
            bail!(InvalidPotentials, "potential pair {idx} takes the value -inf");
        };
        let cost = |i, j| ExtReal::from(c_tilde.get(i, j));
        let base = graph_residual(inst, cost, &phi, &psi, 0)? + graph_residual(inst, cost, &phi, &psi, 1)?;
        for k in 1..=k_max {
            let lhs = graph_residual(inst, |i, j| h.get(i, j), &phi, &psi, k)?;
            let rhs = k as f64 * base;
            rows.push(BoundRow { sequence_index: idx, k, lhs, rhs, pass: lhs <= rhs + 1e-9 });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceDiagnostics {
    /// `‖φ_n ⊕ ψ_n − h‖_{L¹(π₀)}` per sequence element.
    pub l1_distances_to_limit: Vec<f64>,
    /// `‖(φ_n ⊕ ψ_n − h)₊‖_{L¹(π₀)}` per sequence element.
    pub positive_part_norms: Vec<f64>,
    /// `profile[d][n]`: largest `−∫_A φ_n ⊕ ψ_n dπ₀` over `π₀(A) ≤ δ_d`.
    pub profile: Vec<Vec<f64>>,
    /// The profile at the last sequence element, one value per δ.
    pub small_set_profile: Vec<f64>,
    /// The profile at the smallest δ and the last sequence element.
    pub singular_mass_estimate: f64,
}

/// Small-set profile of an optimizing sequence.
///
/// For each δ the negative mass `−∫_A φ ⊕ ψ dπ₀` is maximized over parts of
/// `π₀` of total mass at most δ. Cells enter in increasing order of
/// `φ ⊕ ψ`; the last one may enter fractionally, which makes the value exact
/// for this knapsack and nondecreasing in δ.
pub fn singular_mass_estimate(
    pi0: &TransportPlan,
    potentials: &[PotentialPair],
    h_ref: &ValueMatrix,
    delta_grid: &[f64],
) -> Result<SequenceDiagnostics> {
    if potentials.is_empty() {
        bail!(InvalidArgument, "empty potential sequence");
    }
    if delta_grid.is_empty() {
        bail!(InvalidArgument, "empty delta grid");
    }
    if delta_grid.iter().any(|d| !(*d > 0.0 && d.is_finite())) || delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        bail!(InvalidArgument, "delta grid must be positive and strictly decreasing");
    }
    expect_shape(pi0.rows(), pi0.cols(), h_ref.rows(), h_ref.cols())?;
    let support: Vec<(usize, usize, f64)> = pi0.support().collect();

    let mut l1 = Vec::with_capacity(potentials.len());
    let mut positive = Vec::with_capacity(potentials.len());
    let mut profile = alloc::vec![Vec::with_capacity(potentials.len()); delta_grid.len()];
    for (idx, pp) in potentials.iter().enumerate() {
        expect_shape(pi0.rows(), pi0.cols(), pp.phi().len(), pp.psi().len())?;
        let Some((phi, psi)) = pp.finite_parts() else {
            bail!(InvalidPotentials, "potential pair {idx} takes the value -inf");
        };
        let mut cells: Vec<(f64, f64)> = Vec::with_capacity(support.len());
        let (mut dist, mut pos) = (0.0, 0.0);
        for &(i, j, m) in &support {
            let s = phi[i] + psi[j];
            let Some(h) = h_ref.get(i, j).finite() else {
                bail!(InvalidArgument, "reference value is infinite at ({i}, {j}) inside the support");
            };
            dist += (s - h).abs() * m;
            pos += (s - h).max(0.0) * m;
            if s < 0.0 {
                cells.push((s, m));
            }
        }
        l1.push(dist);
        positive.push(pos);
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (d, &delta) in delta_grid.iter().enumerate() {
            let (mut budget, mut value) = (delta, 0.0);
            for &(s, m) in &cells {
                if budget <= 0.0 {
                    break;
                }
                let take = m.min(budget);
                value -= s * take;
                budget -= take;
            }
            profile[d].push(value);
        }
    }
    let small_set_profile: Vec<f64> = profile.iter().map(|row| *row.last().expect("nonempty")).collect();
    let singular_mass_estimate = *small_set_profile.last().expect("nonempty");
    Ok(SequenceDiagnostics {
        l1_distances_to_limit: l1,
        positive_part_norms: positive,
        profile,
        small_set_profile,
        singular_mass_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cost;

    fn unit() -> (CostMatrix, TransportPlan, Marginal) {
        let c = CostMatrix::from_finite(2, 2, &[1.0; 4]).unwrap();
        let mu = Marginal::uniform(2).unwrap();
        let pi = TransportPlan::exact_coupling(alloc::vec![0.5, 0.0, 0.0, 0.5], &mu, &mu).unwrap();
        (c, pi, mu)
    }

    #[test]
    fn zero_potentials_fail_on_support() {
        let (c, pi, _) = unit();
        let pp = PotentialPair::from_finite(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let out = check_strong_ccm(&c, &pi, &pp, 1e-9).unwrap();
        assert_eq!(
            out,
            CcmOutcome::Fail(CcmViolation { row: 0, col: 0, kind: ViolationKind::SlackOnSupport, excess: 1.0 })
        );
    }

    #[test]
    fn exact_potentials_pass_and_certify() {
        let (c, pi, mu) = unit();
        let pp = PotentialPair::from_finite(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(check_strong_ccm(&c, &pi, &pp, 1e-12).unwrap().passed());
        let cert = attainment_certificate(&c, &pi, &pp, 1e-12).unwrap();
        assert!(cert.certified);
        assert_eq!(cert.gap, 0.0);
        assert!(no_atoms_at_neg_infinity(&pp, &mu, &mu).unwrap());
    }

    #[test]
    fn ae_check_ignores_uncovered_cells() {
        let (c, pi, _) = unit();
        // off-diagonal sums exceed the cost
        let pp = PotentialPair::from_finite(&[0.0, 2.0], &[1.0, -1.0]).unwrap();
        assert!(!check_strong_ccm(&c, &pi, &pp, 1e-12).unwrap().passed());
        assert!(check_ccm_ae(&c, &pi, &pp, core::slice::from_ref(&pi), 1e-12).unwrap().passed());
    }

    #[test]
    fn neg_infinity_on_support_fails() {
        let c = CostMatrix::new(2, 2, alloc::vec![Cost::Finite(0.0), Cost::Infinite, Cost::Infinite, Cost::Finite(0.0)])
            .unwrap();
        let mu = Marginal::uniform(2).unwrap();
        let pi = TransportPlan::exact_coupling(alloc::vec![0.5, 0.0, 0.0, 0.5], &mu, &mu).unwrap();
        let pp = PotentialPair::new(alloc::vec![ExtReal::NegInfinity, ExtReal::ZERO], alloc::vec![ExtReal::ZERO; 2]).unwrap();
        let out = check_strong_ccm(&c, &pi, &pp, 1e-9).unwrap();
        assert!(matches!(out, CcmOutcome::Fail(CcmViolation { kind: ViolationKind::SlackOnSupport, .. })));
        assert!(!no_atoms_at_neg_infinity(&pp, &mu, &mu).unwrap());
    }

    #[test]
    fn profile_is_a_fractional_knapsack() {
        let mu = Marginal::uniform(2).unwrap();
        let pi0 = TransportPlan::exact_coupling(alloc::vec![0.5, 0.0, 0.0, 0.5], &mu, &mu).unwrap();
        let pp = PotentialPair::from_finite(&[-4.0, -1.0], &[0.0, 0.0]).unwrap();
        let h = ValueMatrix::filled(2, 2, ExtReal::ZERO).unwrap();
        let d = singular_mass_estimate(&pi0, &[pp], &h, &[0.75, 0.5, 0.25]).unwrap();
        assert_eq!(d.small_set_profile, alloc::vec![2.25, 2.0, 1.0]);
        assert_eq!(d.singular_mass_estimate, 1.0);
        assert_eq!(d.l1_distances_to_limit, alloc::vec![2.5]);
        assert_eq!(d.positive_part_norms, alloc::vec![0.0]);
    }
}
