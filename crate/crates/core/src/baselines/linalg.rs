//! Small dense linear solves for the baseline fitters.

use crate::{Error, Result};

/// Solve A x = b by Gaussian elimination with partial pivoting. A is n x n
/// row-major. Fails on (near-)singular systems so callers can ridge-retry.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1e-300);

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot_abs < 1e-12 * scale {
            return Err(Error::data("singular linear system"));
        }
        if pivot_row != col {
            for c in 0..n {
                m.swap(col * n + c, pivot_row * n + c);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[r * n + c] -= factor * m[col * n + c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = rhs[row];
        for c in row + 1..n {
            sum -= m[row * n + c] * x[c];
        }
        x[row] = sum / m[row * n + row];
    }
    Ok(x)
}

/// Least squares via normal equations: minimize ||y - X beta||^2 where X is
/// n x p (row-major rows). On a singular system, retries with `ridge` added
/// to the diagonal and reports that it did.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<(Vec<f64>, bool)> {
    let n = rows.len();
    assert_eq!(n, y.len());
    if n == 0 {
        return Err(Error::data("least squares needs at least one row"));
    }
    let p = rows[0].len();
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for (row, &yi) in rows.iter().zip(y) {
        debug_assert_eq!(row.len(), p);
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in i..p {
                xtx[i * p + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            xtx[i * p + j] = xtx[j * p + i];
        }
    }
    match solve(&xtx, &xty, p) {
        Ok(beta) => Ok((beta, false)),
        Err(_) => {
            let mut stabilized = xtx;
            for i in 0..p {
                stabilized[i * p + i] += ridge;
            }
            let beta = solve(&stabilized, &xty, p)
                .map_err(|_| Error::data("linear system singular even after ridge stabilization"))?;
            Ok((beta, true))
        }
    }
}
