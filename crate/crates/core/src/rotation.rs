//! Cyclic-group models of the rotation counterexamples.
//!
//! A point `i ∈ Z_n` stands for `x = i/n` and the rotation `x ↦ x ⊕ α` for
//! `i ↦ i + s mod n` with `gcd(s, n) = 1`, so the rotation has a single orbit.
//! `Γ_k` is the graph `{(i, i + ks)}` and `π_k` the uniform coupling on it.

use alloc::vec::Vec;

use crate::error::bail;
use crate::{
    matching, mixture_plan, Cost, CostMatrix, ExtReal, Marginal, PotentialPair, Result, TransportPlan, ValueMatrix,
    MAX_DIMENSION,
};

/// Fractional part of the golden ratio, `(√5 − 1)/2`.
pub const GOLDEN_CONJUGATE: f64 = 0.618_033_988_749_894_9;

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RotationInstance {
    n: usize,
    shift: usize,
}

impl RotationInstance {
    pub fn new(n: usize, shift: usize) -> Result<Self> {
        if n < 4 {
            bail!(InvalidArgument, "rotation instances need n >= 4, got {n}");
        }
        if n > MAX_DIMENSION {
            return Err(crate::CoreError::TooLarge(n));
        }
        if shift == 0 || shift >= n {
            bail!(InvalidArgument, "shift must lie in (0, {n}), got {shift}");
        }
        if gcd(shift, n) != 1 {
            bail!(InvalidArgument, "shift {shift} is not coprime to {n}");
        }
        Ok(Self { n, shift })
    }

    /// Shift nearest to `n · (√5 − 1)/2`, moved outward one step at a time
    /// (`t, t+1, t−1, t+2, …`) until it is coprime to `n`.
    pub fn golden(n: usize) -> Result<Self> {
        if n < 4 {
            bail!(InvalidArgument, "rotation instances need n >= 4, got {n}");
        }
        // truncation of a positive value is floor
        let target = (n as f64 * GOLDEN_CONJUGATE + 0.5) as usize;
        for step in 0..n {
            let candidates = [Some(target + step), target.checked_sub(step)];
            for t in candidates.into_iter().flatten() {
                if t > 0 && t < n && gcd(t, n) == 1 {
                    return Self::new(n, t);
                }
            }
        }
        bail!(Internal, "no shift coprime to {n}")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    /// `i ∈ H⁺`, i.e. `i/n < ½`.
    pub fn in_positive_half(&self, i: usize) -> bool {
        2 * i < self.n
    }

    /// `#H⁺ = ⌈n/2⌉`.
    pub fn positive_half_len(&self) -> usize {
        self.n.div_ceil(2)
    }

    pub fn marginal(&self) -> Marginal {
        Marginal::uniform(self.n).expect("n >= 4")
    }

    /// `i + k·s mod n`.
    pub fn target(&self, i: usize, k: usize) -> usize {
        ((i as u128 + k as u128 * self.shift as u128) % self.n as u128) as usize
    }

    /// `π_k`: mass `1/n` on each cell of `Γ_k`.
    pub fn graph_plan(&self, k: usize) -> TransportPlan {
        let n = self.n;
        let mut mass = alloc::vec![0.0; n * n];
        for i in 0..n {
            mass[i * n + self.target(i, k)] = 1.0 / n as f64;
        }
        let mu = self.marginal();
        TransportPlan::exact_coupling(mass, &mu, &mu).expect("graph of a permutation")
    }

    /// `½(π₀ + π₁)`, the reference plan for the two-graph cost.
    pub fn ap_reference_plan(&self) -> TransportPlan {
        mixture_plan(&[self.graph_plan(0), self.graph_plan(1)], &[0.5, 0.5]).expect("two couplings")
    }
}

/// A point of `Z_n × Z` for the skew product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitState {
    pub position: usize,
    pub level: i64,
}

/// `+1` on `H⁺`, `−1` on `H⁻`.
pub fn g_value(inst: &RotationInstance, i: usize) -> i64 {
    if inst.in_positive_half(i) {
        1
    } else {
        -1
    }
}

/// `ρ_k(i) = 1 + Σ_{j<k} g(i + js)`.
pub fn rho_k(inst: &RotationInstance, i: usize, k: usize) -> i64 {
    let mut rho = 1;
    let mut x = i % inst.n;
    for _ in 0..k {
        rho += g_value(inst, x);
        x = (x + inst.shift) % inst.n;
    }
    rho
}

/// `table[k][i] = ρ_k(i)` for `k ≤ k_max`, built with the recursion.
pub fn rho_table(inst: &RotationInstance, k_max: usize) -> Vec<Vec<i64>> {
    let mut table = Vec::with_capacity(k_max + 1);
    table.push(alloc::vec![1; inst.n]);
    for k in 0..k_max {
        let next = (0..inst.n).map(|i| table[k][i] + g_value(inst, inst.target(i, k))).collect();
        table.push(next);
    }
    table
}

/// Cost `1` on `Γ₀`, `2` on `Γ₁ ∩ (H⁺ × ·)`, `0` on `Γ₁ ∩ (H⁻ × ·)`, infinite elsewhere.
pub fn build_ap_cost(inst: &RotationInstance) -> Result<CostMatrix> {
    if inst.n % 2 != 0 {
        bail!(InvalidArgument, "the two-graph cost needs an even n, got {}", inst.n);
    }
    CostMatrix::from_fn(inst.n, inst.n, |i, j| {
        if j == i {
            Cost::Finite(1.0)
        } else if j == inst.target(i, 1) {
            Cost::Finite(if inst.in_positive_half(i) { 2.0 } else { 0.0 })
        } else {
            Cost::Infinite
        }
    })
}

/// `h = ρ_k` on `Γ_k` for `k ≤ k_max`, `+∞` elsewhere.
pub fn build_h(inst: &RotationInstance, k_max: usize) -> Result<ValueMatrix> {
    let n = inst.n;
    if k_max >= n {
        bail!(InvalidArgument, "k_max must be below n = {n}, got {k_max}");
    }
    let mut h = ValueMatrix::filled(n, n, ExtReal::Infinity)?;
    for (k, row) in rho_table(inst, k_max).iter().enumerate() {
        for (i, &rho) in row.iter().enumerate() {
            let j = inst.target(i, k);
            if h.get(i, j) != ExtReal::Infinity {
                bail!(Internal, "graphs {k} and an earlier one share cell ({i}, {j})");
            }
            h.set(i, j, ExtReal::Finite(rho as f64));
        }
    }
    Ok(h)
}

/// `c = h₊` on the finite cells of `h`.
pub fn build_ex33_cost(inst: &RotationInstance, k_max: usize) -> Result<CostMatrix> {
    let h = build_h(inst, k_max)?;
    CostMatrix::from_fn(inst.n, inst.n, |i, j| match h.get(i, j) {
        ExtReal::Finite(v) => Cost::Finite(v.max(0.0)),
        _ => Cost::Infinite,
    })
}

/// `S(i, m) = (i + s, m + g(i))`.
pub fn skew_step(inst: &RotationInstance, st: OrbitState) -> OrbitState {
    let i = st.position % inst.n;
    OrbitState { position: (i + inst.shift) % inst.n, level: st.level + g_value(inst, i) }
}

/// `S^k(st)`.
pub fn skew_iterate(inst: &RotationInstance, st: OrbitState, k: usize) -> OrbitState {
    (0..k).fold(st, |s, _| skew_step(inst, s))
}

/// Smallest `k ∈ [1, k_max]` with `ρ_k(i) ≤ 0`.
pub fn first_passage(inst: &RotationInstance, i: usize, k_max: usize) -> Option<usize> {
    let mut st = OrbitState { position: i % inst.n, level: 0 };
    for k in 1..=k_max {
        st = skew_step(inst, st);
        if st.level <= -1 {
            return Some(k);
        }
    }
    None
}

/// An exact coupling of uniform marginals supported on the zero set of
/// [`build_ex33_cost`] restricted to `k ≥ 1`, or `None` if none exists.
///
/// Sources are first matched greedily in order of first passage; a maximum
/// matching pass then completes the assignment when the greedy pass stalls.
pub fn build_zero_cost_plan(inst: &RotationInstance, k_max: usize) -> Option<TransportPlan> {
    let n = inst.n;
    let k_max = k_max.min(n - 1);
    let table = rho_table(inst, k_max);
    let adj: Vec<Vec<usize>> =
        (0..n).map(|i| (1..=k_max).filter(|&k| table[k][i] <= 0).map(|k| inst.target(i, k)).collect()).collect();

    let mut order: Vec<(usize, usize)> =
        (0..n).filter_map(|i| first_passage(inst, i, k_max).map(|k| (k, i))).collect();
    order.sort_unstable();
    let mut greedy = alloc::vec![None; n];
    let mut taken = alloc::vec![false; n];
    for (k, i) in order {
        let j = inst.target(i, k);
        if !taken[j] {
            taken[j] = true;
            greedy[i] = Some(j);
        }
    }
    let assignment = if greedy.iter().all(Option::is_some) {
        greedy
    } else {
        matching::maximum_matching(&adj, n, Some(&greedy))
    };

    let mut mass = alloc::vec![0.0; n * n];
    for (i, j) in assignment.into_iter().enumerate() {
        mass[i * n + j?] = 1.0 / n as f64;
    }
    let mu = inst.marginal();
    TransportPlan::exact_coupling(mass, &mu, &mu).ok()
}

/// `‖f‖_{L¹(π_k)}` for a matrix that must be finite on `Γ_k`.
pub fn graph_l1_norm(inst: &RotationInstance, m: &ValueMatrix, k: usize) -> Result<f64> {
    let n = inst.n;
    let mut total = 0.0;
    for i in 0..n {
        match m.get(i, inst.target(i, k)) {
            ExtReal::Finite(v) => total += v.abs(),
            other => bail!(InvalidArgument, "value {other} on graph {k} at row {i}"),
        }
    }
    Ok(total / n as f64)
}

/// Mixture weights `a_0..a_{k_max}` decaying fast enough for the series
/// `Σ a_k h π_k` and `Σ a_k (|φ_j| + |ψ_j|)`, `j ≤ k`, to converge.
///
/// Before normalization `a_k = 2^{−k} / max(1, ‖h‖_{L¹(π_k)}, max_{1≤j≤k} ‖φ_j‖₁ + ‖ψ_j‖₁)`,
/// where `potentials[j−1]` is the `j`-th pair; the result sums to one.
pub fn make_weights(
    inst: &RotationInstance,
    k_max: usize,
    h: &ValueMatrix,
    potentials: &[PotentialPair],
) -> Result<Vec<f64>> {
    let n = inst.n;
    if h.rows() != n || h.cols() != n {
        bail!(InvalidArgument, "h is {}x{}, instance has n = {n}", h.rows(), h.cols());
    }
    if k_max >= n {
        bail!(InvalidArgument, "k_max must be below n = {n}, got {k_max}");
    }
    let mut norms = Vec::with_capacity(potentials.len());
    for (idx, pp) in potentials.iter().enumerate() {
        let Some((phi, psi)) = pp.finite_parts() else {
            bail!(InvalidPotentials, "potential pair {idx} takes the value -inf");
        };
        if phi.len() != n || psi.len() != n {
            bail!(InvalidPotentials, "potential pair {idx} has the wrong length");
        }
        let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>() / n as f64;
        norms.push(l1(&phi) + l1(&psi));
    }

    let mut weights = Vec::with_capacity(k_max + 1);
    let mut decay = 1.0;
    let mut running = 0.0f64;
    for k in 0..=k_max {
        if k >= 1 {
            if let Some(&v) = norms.get(k - 1) {
                running = running.max(v);
            }
        }
        let denom = 1.0f64.max(graph_l1_norm(inst, h, k)?).max(running);
        weights.push(decay / denom);
        decay *= 0.5;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// `Σ_k a_k π_k` over `k < weights.len()`.
pub fn graph_mixture(inst: &RotationInstance, weights: &[f64]) -> Result<TransportPlan> {
    if weights.len() > inst.n {
        bail!(InvalidArgument, "{} weights but only {} distinct graphs", weights.len(), inst.n);
    }
    let plans: Vec<TransportPlan> = (0..weights.len()).map(|k| inst.graph_plan(k)).collect();
    mixture_plan(&plans, weights)
}

/// Dimension of the affine space of couplings supported on `Γ₀ ∪ Γ₁`,
/// from the rank of the `2n × 2n` marginal constraint matrix.
pub fn ap_coupling_space_dimension(inst: &RotationInstance) -> usize {
    let n = inst.n;
    let vars = 2 * n;
    // variable i: cell (i, i); variable n + i: cell (i, i + s)
    let mut a = alloc::vec![0.0; 2 * n * vars];
    for i in 0..n {
        a[i * vars + i] = 1.0;
        a[i * vars + n + i] = 1.0;
        a[(n + i) * vars + i] = 1.0;
        a[(n + inst.target(i, 1)) * vars + n + i] = 1.0;
    }
    vars - crate::linalg::rank(&a, 2 * n, vars, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_validation() {
        assert!(RotationInstance::new(3, 1).is_err());
        assert!(RotationInstance::new(8, 4).is_err());
        assert!(RotationInstance::new(8, 0).is_err());
        assert!(RotationInstance::new(8, 8).is_err());
        assert!(RotationInstance::new(8, 3).is_ok());
    }

    #[test]
    fn golden_shifts() {
        assert_eq!(RotationInstance::golden(8).unwrap().shift(), 5);
        assert_eq!(RotationInstance::golden(24).unwrap().shift(), 17);
        assert_eq!(RotationInstance::golden(144).unwrap().shift(), 89);
        for n in 4..200 {
            let inst = RotationInstance::golden(n).unwrap();
            assert_eq!(gcd(inst.shift(), n), 1);
        }
    }

    #[test]
    fn half_split() {
        let inst = RotationInstance::new(8, 3).unwrap();
        assert_eq!(g_value(&inst, 0), 1);
        assert_eq!(g_value(&inst, 4), -1);
        assert_eq!((0..8).map(|i| g_value(&inst, i)).sum::<i64>(), 0);
        let odd = RotationInstance::new(9, 2).unwrap();
        assert_eq!(odd.positive_half_len(), 5);
        assert_eq!((0..9).filter(|&i| odd.in_positive_half(i)).count(), 5);
    }

    #[test]
    fn rho_examples() {
        let inst = RotationInstance::new(8, 3).unwrap();
        assert_eq!(rho_k(&inst, 5, 0), 1);
        assert_eq!(rho_k(&inst, 0, 1), 2);
        assert_eq!(rho_k(&inst, 4, 1), 0);
        // orbit 0, 3, 6, 1 has g = +1, +1, -1, +1
        assert_eq!(rho_k(&inst, 0, 4), 3);
    }

    #[test]
    fn ap_cost_shape() {
        let inst = RotationInstance::new(8, 3).unwrap();
        assert_eq!(build_ap_cost(&inst).unwrap().finite_count(), 16);
        assert!(build_ap_cost(&RotationInstance::new(9, 2).unwrap()).is_err());
    }

    #[test]
    fn h_rejects_large_k() {
        let inst = RotationInstance::new(8, 3).unwrap();
        assert!(build_h(&inst, 8).is_err());
        let h = build_h(&inst, 7).unwrap();
        assert!(h.entries().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn skew_product_first_step() {
        let inst = RotationInstance::new(8, 3).unwrap();
        assert_eq!(skew_step(&inst, OrbitState { position: 0, level: 0 }), OrbitState { position: 3, level: 1 });
        assert_eq!(first_passage(&inst, 4, 7), Some(1));
        assert!(first_passage(&inst, 0, 7).map_or(true, |k| k > 1));
    }

    #[test]
    fn weights_without_potentials_halve() {
        let inst = RotationInstance::new(8, 3).unwrap();
        let ones = ValueMatrix::filled(8, 8, ExtReal::Finite(1.0)).unwrap();
        let w = make_weights(&inst, 3, &ones, &[]).unwrap();
        for pair in w.windows(2) {
            assert!((pair[1] / pair[0] - 0.5).abs() < 1e-15);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ap_space_is_a_segment() {
        assert_eq!(ap_coupling_space_dimension(&RotationInstance::new(8, 3).unwrap()), 1);
    }
}
