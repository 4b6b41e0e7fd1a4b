#![allow(dead_code)]

use kdlab_core::{Cost, CostMatrix, Marginal, TransportPlan};
use proptest::prelude::*;

#[derive(Clone, Debug)]
pub struct Instance {
    pub c: CostMatrix,
    pub mu: Marginal,
    pub nu: Marginal,
}

pub fn normalize(raw: &[f64]) -> Marginal {
    let total: f64 = raw.iter().sum();
    Marginal::new(raw.iter().map(|w| w / total).collect()).unwrap()
}

/// Instances up to `max × max`; a cell is forbidden with probability `p_inf`.
pub fn instance(max: usize, p_inf: f64) -> impl Strategy<Value = Instance> {
    (1..=max, 1..=max).prop_flat_map(move |(m, n)| {
        (
            proptest::collection::vec((0.0..10.0f64, 0.0..1.0f64), m * n),
            proptest::collection::vec(0.05..1.0f64, m),
            proptest::collection::vec(0.05..1.0f64, n),
        )
            .prop_map(move |(cells, a, b)| {
                let entries = cells
                    .into_iter()
                    .map(|(v, u)| if u < p_inf { Cost::Infinite } else { Cost::Finite((v * 4.0).trunc() / 4.0) })
                    .collect();
                Instance { c: CostMatrix::new(m, n, entries).unwrap(), mu: normalize(&a), nu: normalize(&b) }
            })
    })
}

/// North-west corner coupling after permuting rows and columns.
pub fn corner_coupling(mu: &Marginal, nu: &Marginal, row_order: &[usize], col_order: &[usize]) -> TransportPlan {
    let (m, n) = (mu.len(), nu.len());
    let mut a: Vec<f64> = mu.weights().to_vec();
    let mut b: Vec<f64> = nu.weights().to_vec();
    let mut mass = vec![0.0; m * n];
    let (mut r, mut c) = (0, 0);
    while r < m && c < n {
        let (i, j) = (row_order[r], col_order[c]);
        let t = a[i].min(b[j]);
        mass[i * n + j] += t;
        a[i] -= t;
        b[j] -= t;
        if a[i] <= b[j] {
            r += 1;
        } else {
            c += 1;
        }
    }
    // the last cell absorbs rounding left in the marginals
    if let (Some(&i), Some(&j)) = (row_order.last(), col_order.last()) {
        mass[i * n + j] += a[i].max(0.0).min(b[j].max(0.0));
    }
    TransportPlan::exact_coupling(mass, mu, nu).unwrap()
}

pub fn product_coupling(mu: &Marginal, nu: &Marginal) -> TransportPlan {
    let mass = mu.weights().iter().flat_map(|a| nu.weights().iter().map(move |b| a * b)).collect();
    TransportPlan::exact_coupling(mass, mu, nu).unwrap()
}
