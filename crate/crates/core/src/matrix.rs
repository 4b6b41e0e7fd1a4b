use alloc::vec::Vec;

use crate::error::bail;
use crate::{CoreError, Cost, ExtReal, Result, MAX_DIMENSION};

fn check_dims(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        bail!(InvalidArgument, "matrix dimensions must be positive, got {rows}x{cols}");
    }
    if rows > MAX_DIMENSION {
        return Err(CoreError::TooLarge(rows));
    }
    if cols > MAX_DIMENSION {
        return Err(CoreError::TooLarge(cols));
    }
    if len != rows * cols {
        bail!(InvalidArgument, "expected {} entries for a {rows}x{cols} matrix, got {len}", rows * cols);
    }
    Ok(())
}

pub(crate) fn expect_shape(rows: usize, cols: usize, got_rows: usize, got_cols: usize) -> Result<()> {
    if rows != got_rows || cols != got_cols {
        return Err(CoreError::ShapeMismatch {
            expected_rows: rows,
            expected_cols: cols,
            rows: got_rows,
            cols: got_cols,
        });
    }
    Ok(())
}

/// Cost `c : X × Y → [0, ∞]` on finite spaces, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Cost>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Cost>) -> Result<Self> {
        check_dims(rows, cols, entries.len())?;
        for (idx, e) in entries.iter().enumerate() {
            if let Cost::Finite(v) = *e {
                if !v.is_finite() || v < 0.0 {
                    bail!(
                        InvalidCost,
                        "entry ({}, {}) = {v} is not a finite nonnegative real",
                        idx / cols,
                        idx % cols
                    );
                }
            }
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cost) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.saturating_mul(cols));
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// All-finite matrix from row-major floats.
    pub fn from_finite(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| Cost::Finite(v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Cost {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Cost] {
        &self.entries
    }

    /// `(row, col, cost)` for every finite cell in row-major order.
    pub fn finite_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.cols;
        self.entries
            .iter()
            .enumerate()
            .filter_map(move |(idx, c)| c.finite().map(|v| (idx / cols, idx % cols, v)))
    }

    pub fn finite_count(&self) -> usize {
        self.entries.iter().filter(|c| c.is_finite()).count()
    }
}

/// Matrix over the extended reals, used for functions such as `h` that may be
/// negative and are `+∞` off their natural domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<ExtReal>,
}

impl ValueMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<ExtReal>) -> Result<Self> {
        check_dims(rows, cols, entries.len())?;
        if entries.iter().any(|e| matches!(e, ExtReal::Finite(v) if v.is_nan())) {
            bail!(InvalidArgument, "matrix contains NaN");
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn filled(rows: usize, cols: usize, value: ExtReal) -> Result<Self> {
        Self::new(rows, cols, alloc::vec![value; rows.saturating_mul(cols)])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> ExtReal {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: ExtReal) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn entries(&self) -> &[ExtReal] {
        &self.entries
    }
}
