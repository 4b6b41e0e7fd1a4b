use alloc::vec::Vec;

use crate::error::bail;
use crate::matrix::expect_shape;
use crate::{CostMatrix, ExtReal, Marginal, Result, TransportPlan};

/// Dual potentials `(φ, ψ)` with values in `[−∞, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialPair {
    phi: Vec<ExtReal>,
    psi: Vec<ExtReal>,
}

impl PotentialPair {
    pub fn new(phi: Vec<ExtReal>, psi: Vec<ExtReal>) -> Result<Self> {
        for (name, v) in [("phi", &phi), ("psi", &psi)] {
            if v.is_empty() {
                bail!(InvalidPotentials, "{name} is empty");
            }
            for (i, e) in v.iter().enumerate() {
                match e {
                    ExtReal::Infinity => bail!(InvalidPotentials, "{name}[{i}] = +inf"),
                    ExtReal::Finite(x) if !x.is_finite() => bail!(InvalidPotentials, "{name}[{i}] = {x}"),
                    _ => {}
                }
            }
        }
        Ok(Self { phi, psi })
    }

    pub fn from_finite(phi: &[f64], psi: &[f64]) -> Result<Self> {
        Self::new(
            phi.iter().map(|&v| ExtReal::Finite(v)).collect(),
            psi.iter().map(|&v| ExtReal::Finite(v)).collect(),
        )
    }

    pub fn phi(&self) -> &[ExtReal] {
        &self.phi
    }

    pub fn psi(&self) -> &[ExtReal] {
        &self.psi
    }

    /// `φ[x] + ψ[y]` with absorbing `−∞`.
    pub fn sum_at(&self, x: usize, y: usize) -> ExtReal {
        self.phi[x] + self.psi[y]
    }

    /// Both vectors as plain floats when no entry is `−∞`.
    pub fn finite_parts(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let phi = self.phi.iter().map(|e| e.finite()).collect::<Option<Vec<_>>>()?;
        let psi = self.psi.iter().map(|e| e.finite()).collect::<Option<Vec<_>>>()?;
        Some((phi, psi))
    }

    /// `Σ φ μ + Σ ψ ν`, with `0 · (−∞) = 0`.
    pub fn dual_objective(&self, mu: &Marginal, nu: &Marginal) -> Result<ExtReal> {
        if mu.len() != self.phi.len() || nu.len() != self.psi.len() {
            bail!(InvalidArgument, "potentials have length {}/{}, marginals {}/{}", self.phi.len(), self.psi.len(), mu.len(), nu.len());
        }
        let mut total = ExtReal::ZERO;
        for (p, &w) in self.phi.iter().zip(mu.weights()) {
            total = total + p.scale(w);
        }
        for (p, &w) in self.psi.iter().zip(nu.weights()) {
            total = total + p.scale(w);
        }
        Ok(total)
    }

    /// Applies the shift `φ ← φ − m`, `ψ ← ψ + m` with `m = Σ φ μ`, leaving
    /// every `φ[x] + ψ[y]` unchanged. Pairs with `−∞` on the support of μ
    /// are returned unchanged.
    pub fn normalize_gauge(&self, mu: &Marginal) -> Self {
        let mut shift = 0.0;
        for (p, &w) in self.phi.iter().zip(mu.weights()) {
            match p.scale(w) {
                ExtReal::Finite(v) => shift += v,
                _ => return self.clone(),
            }
        }
        let mv = |e: &ExtReal, d: f64| match e {
            ExtReal::Finite(v) => ExtReal::Finite(v + d),
            other => *other,
        };
        Self {
            phi: self.phi.iter().map(|e| mv(e, -shift)).collect(),
            psi: self.psi.iter().map(|e| mv(e, shift)).collect(),
        }
    }

    /// Largest `φ[x] + ψ[y] − c[x,y]` over finite-cost cells (`None` if every
    /// finite cell has a `−∞` sum).
    pub fn max_violation(&self, c: &CostMatrix) -> Result<Option<f64>> {
        expect_shape(c.rows(), c.cols(), self.phi.len(), self.psi.len())?;
        let mut worst: Option<f64> = None;
        for (x, y, cost) in c.finite_cells() {
            if let ExtReal::Finite(s) = self.sum_at(x, y) {
                let v = s - cost;
                worst = Some(worst.map_or(v, |w| w.max(v)));
            }
        }
        Ok(worst)
    }
}

/// `J_c(φ, ψ) = Σ (φ[x] + ψ[y]) π[x,y]`; `−∞` if a cell with positive mass
/// has a `−∞` potential.
pub fn j_c(pp: &PotentialPair, pi: &TransportPlan) -> Result<ExtReal> {
    expect_shape(pp.phi.len(), pp.psi.len(), pi.rows(), pi.cols())?;
    let mut total = 0.0;
    for (x, y, m) in pi.support() {
        match pp.sum_at(x, y) {
            ExtReal::Finite(v) => total += v * m,
            _ => return Ok(ExtReal::NegInfinity),
        }
    }
    Ok(ExtReal::Finite(total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_plus_infinity() {
        assert!(PotentialPair::new(alloc::vec![ExtReal::Infinity], alloc::vec![ExtReal::ZERO]).is_err());
        assert!(PotentialPair::new(alloc::vec![ExtReal::NegInfinity], alloc::vec![ExtReal::ZERO]).is_ok());
        assert!(PotentialPair::from_finite(&[f64::NAN], &[0.0]).is_err());
    }

    #[test]
    fn j_c_zero_potentials() {
        let mu = Marginal::uniform(2).unwrap();
        let pi = TransportPlan::exact_coupling(alloc::vec![0.25; 4], &mu, &mu).unwrap();
        let pp = PotentialPair::from_finite(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(j_c(&pp, &pi).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn j_c_is_marginal_integral() {
        let mu = Marginal::new(alloc::vec![0.25, 0.75]).unwrap();
        let nu = Marginal::new(alloc::vec![0.5, 0.5]).unwrap();
        let pi = TransportPlan::exact_coupling(alloc::vec![0.25, 0.0, 0.25, 0.5], &mu, &nu).unwrap();
        let pp = PotentialPair::from_finite(&[1.0, 2.0], &[-3.0, 4.0]).unwrap();
        let expected = 0.25 * 1.0 + 0.75 * 2.0 + 0.5 * -3.0 + 0.5 * 4.0;
        let got = j_c(&pp, &pi).unwrap().finite().unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn j_c_negative_infinity_on_support() {
        let mu = Marginal::uniform(2).unwrap();
        let pi = TransportPlan::exact_coupling(alloc::vec![0.5, 0.0, 0.0, 0.5], &mu, &mu).unwrap();
        let pp = PotentialPair::new(alloc::vec![ExtReal::ZERO, ExtReal::ZERO], alloc::vec![ExtReal::ZERO, ExtReal::NegInfinity])
            .unwrap();
        assert_eq!(j_c(&pp, &pi).unwrap(), ExtReal::NegInfinity);
        // off the support a −∞ value does not matter
        let pp = PotentialPair::new(alloc::vec![ExtReal::ZERO, ExtReal::ZERO], alloc::vec![ExtReal::ZERO, ExtReal::ZERO]).unwrap();
        assert_eq!(j_c(&pp, &pi).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn gauge_normalization_preserves_sums() {
        let mu = Marginal::new(alloc::vec![0.25, 0.75]).unwrap();
        let pp = PotentialPair::from_finite(&[1.0, 2.0], &[-3.0, 4.0]).unwrap();
        let g = pp.normalize_gauge(&mu);
        let m: f64 = g.phi().iter().zip(mu.weights()).map(|(p, w)| p.finite().unwrap() * w).sum();
        assert!(m.abs() < 1e-15);
        for x in 0..2 {
            for y in 0..2 {
                let a = pp.sum_at(x, y).finite().unwrap();
                let b = g.sum_at(x, y).finite().unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
