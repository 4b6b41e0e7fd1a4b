//! Small dense linear-algebra helpers.

/// Rank of a row-major `rows × cols` matrix by Gaussian elimination with
/// partial pivoting; pivots with magnitude `≤ tol` count as zero.
pub fn rank(matrix: &[f64], rows: usize, cols: usize, tol: f64) -> usize {
    assert_eq!(matrix.len(), rows * cols, "matrix has wrong length");
    let mut a = matrix.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (p, best) = (rank..rows)
            .map(|r| (r, a[r * cols + col].abs()))
            .fold((rank, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= tol {
            continue;
        }
        if p != rank {
            for k in 0..cols {
                a.swap(p * cols + k, rank * cols + k);
            }
        }
        let d = a[rank * cols + col];
        for r in rank + 1..rows {
            let f = a[r * cols + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..cols {
                a[r * cols + k] -= f * a[rank * cols + k];
            }
        }
        rank += 1;
    }
    rank
}
