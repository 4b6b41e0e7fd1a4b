//! CSV tables for sweeps and diagnostics.

use std::io::Write;

use crate::commands::SweepOutcome;
use crate::error::Result;
use crate::result::{BoundRecord, CertificateRecord, SingularRecord};

fn num(v: f64) -> String {
    match v {
        f64::INFINITY => "inf".into(),
        f64::NEG_INFINITY => "-inf".into(),
        v => v.to_string(),
    }
}

/// `parameter,value,iterations,wall_ms`, then an ε = 0 row holding the
/// extrapolated limit for ε-sweeps.
pub fn write_sweep<W: Write>(out: W, sweep: &SweepOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "value", "iterations", "wall_ms"])?;
    for r in &sweep.rows {
        w.write_record([num(r.parameter), num(r.value), r.iterations.to_string(), format!("{:.3}", r.wall_ms)])?;
    }
    if let Some(limit) = sweep.extrapolated_limit {
        w.write_record(["0".to_string(), num(limit), String::new(), String::new()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_certificate<W: Write>(out: W, c: &CertificateRecord) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strong_ccm", "violation_row", "violation_col", "violation_kind", "excess", "j_c", "cost", "gap", "certified"])?;
    let (row, col, kind, excess) = match &c.violation {
        Some(v) => (v.row.to_string(), v.col.to_string(), v.kind.clone(), num(v.excess.0)),
        None => Default::default(),
    };
    w.write_record([
        c.strong_ccm.to_string(),
        row,
        col,
        kind,
        excess,
        num(c.j_c.0),
        num(c.cost.0),
        num(c.gap.0),
        c.certified.to_string(),
    ])?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_bound<W: Write>(out: W, rows: &[BoundRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "k", "lhs", "rhs", "pass"])?;
    for r in rows {
        w.write_record([num(r.epsilon), r.k.to_string(), num(r.lhs), num(r.rhs), r.pass.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Long format: `quantity,delta,epsilon,value`; `delta` is empty for the norms.
pub fn write_singular<W: Write>(out: W, s: &SingularRecord) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "delta", "epsilon", "value"])?;
    for (d, row) in s.deltas.iter().zip(&s.profile) {
        for (e, v) in s.epsilons.iter().zip(row) {
            w.write_record(["profile".to_string(), num(*d), num(*e), num(*v)])?;
        }
    }
    for (name, values) in [("l1_distance", &s.l1_distances_to_limit), ("positive_part", &s.positive_part_norms)] {
        for (e, v) in s.epsilons.iter().zip(values) {
            w.write_record([name.to_string(), String::new(), num(*e), num(*v)])?;
        }
    }
    w.write_record(["estimate".to_string(), String::new(), String::new(), num(s.singular_mass_estimate)])?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
