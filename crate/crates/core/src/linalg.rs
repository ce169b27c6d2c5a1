//! Dense complex Gaussian elimination with partial pivoting.

use crate::Complex;

/// Pivots smaller than this are treated as exact zeros.
pub const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularMatrix {
    pub column: usize,
    pub pivot: f64,
}

/// Solves `m x = b`. Both inputs are consumed as scratch space.
pub fn solve<const N: usize>(
    mut m: [[Complex; N]; N],
    mut b: [Complex; N],
) -> Result<[Complex; N], SingularMatrix> {
    for col in 0..N {
        let (pivot_row, pivot) = (col..N)
            .map(|r| (r, m[r][col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot >= PIVOT_FLOOR) {
            return Err(SingularMatrix { column: col, pivot });
        }
        if pivot_row != col {
            m.swap(pivot_row, col);
            b.swap(pivot_row, col);
        }
        let inv = m[col][col].inv();
        for row in col + 1..N {
            let factor = m[row][col] * inv;
            if factor == Complex::new(0.0, 0.0) {
                continue;
            }
            m[row][col] = Complex::new(0.0, 0.0);
            for k in col + 1..N {
                let sub = factor * m[col][k];
                m[row][k] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }

    let mut x = [Complex::new(0.0, 0.0); N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Normwise relative residual ‖Mx − b‖∞ / (‖M‖∞‖x‖∞ + ‖b‖∞).
pub fn relative_residual<const N: usize>(
    m: &[[Complex; N]; N],
    x: &[Complex; N],
    b: &[Complex; N],
) -> f64 {
    let mut r_inf = 0.0_f64;
    let mut m_inf = 0.0_f64;
    for (row, rhs) in m.iter().zip(b) {
        let mut acc = -rhs;
        let mut row_sum = 0.0;
        for (a, xi) in row.iter().zip(x) {
            acc += a * xi;
            row_sum += a.norm();
        }
        r_inf = r_inf.max(acc.norm());
        m_inf = m_inf.max(row_sum);
    }
    let x_inf = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let b_inf = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = m_inf * x_inf + b_inf;
    if scale == 0.0 {
        0.0
    } else {
        r_inf / scale
    }
}
