//! Dense symmetric linear algebra: eigenvalues through nalgebra and
//! Sylvester inertia through a Bunch–Kaufman `LDLᵀ` factorization.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::Result;

/// Numbers of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    assert!(m.is_square(), "matrix must be square");
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Largest asymmetry `|m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Inertia of a symmetric matrix from the lower triangle.
///
/// Pivots (and eigenvalues of 2×2 pivot blocks) with magnitude at most
/// `zero_tol` are counted as zero.
pub fn inertia(m: &DMatrix<f64>, zero_tol: f64) -> Inertia {
    assert!(m.is_square(), "matrix must be square");
    let n = m.nrows();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            a[i * n + j] = m[(i, j)];
        }
    }
    inertia_lower(&mut a, n, zero_tol)
}

/// Inertia from a row-major buffer whose lower triangle holds the matrix.
/// The buffer is overwritten.
pub fn inertia_lower(a: &mut [f64], n: usize, zero_tol: f64) -> Inertia {
    assert_eq!(a.len(), n * n);
    let bk = (1.0 + 17f64.sqrt()) / 8.0;
    let idx = |i: usize, j: usize| if i >= j { i * n + j } else { j * n + i };
    let mut out = Inertia::default();
    let classify = |v: f64, out: &mut Inertia| {
        if v.abs() <= zero_tol {
            out.zero += 1;
        } else if v < 0.0 {
            out.negative += 1;
        } else {
            out.positive += 1;
        }
    };

    let mut k = 0;
    while k < n {
        let absakk = a[idx(k, k)].abs();
        let (mut imax, mut colmax) = (k, 0.0f64);
        for i in k + 1..n {
            let v = a[idx(i, k)].abs();
            if v > colmax {
                colmax = v;
                imax = i;
            }
        }
        if absakk.max(colmax) == 0.0 {
            classify(0.0, &mut out);
            k += 1;
            continue;
        }

        let (two_by_two, kp) = if absakk >= bk * colmax {
            (false, k)
        } else {
            let mut rowmax = 0.0f64;
            for j in k..n {
                if j != imax {
                    rowmax = rowmax.max(a[idx(imax, j)].abs());
                }
            }
            if absakk * rowmax >= bk * colmax * colmax {
                (false, k)
            } else if a[idx(imax, imax)].abs() >= bk * rowmax {
                (false, imax)
            } else {
                (true, imax)
            }
        };

        let kk = if two_by_two { k + 1 } else { k };
        if kp != kk {
            // symmetric swap of kk and kp within the trailing block
            for j in k..n {
                if j != kk && j != kp {
                    a.swap(idx(kk, j), idx(kp, j));
                }
            }
            a.swap(idx(kk, kk), idx(kp, kp));
        }

        if !two_by_two {
            let d = a[idx(k, k)];
            classify(d, &mut out);
            for i in k + 1..n {
                let lik = a[idx(i, k)] / d;
                if lik == 0.0 {
                    continue;
                }
                for j in k + 1..=i {
                    a[i * n + j] -= lik * a[idx(j, k)];
                }
            }
            k += 1;
        } else {
            let d11 = a[idx(k, k)];
            let d21 = a[idx(k + 1, k)];
            let d22 = a[idx(k + 1, k + 1)];
            let det = d11 * d22 - d21 * d21;
            let half_tr = 0.5 * (d11 + d22);
            let disc = (0.25 * (d11 - d22) * (d11 - d22) + d21 * d21).sqrt();
            classify(half_tr - disc, &mut out);
            classify(half_tr + disc, &mut out);
            // W = [a_ik a_i,k+1] D^{-1}
            for i in k + 2..n {
                let x1 = a[idx(i, k)];
                let x2 = a[idx(i, k + 1)];
                let w1 = (d22 * x1 - d21 * x2) / det;
                let w2 = (d11 * x2 - d21 * x1) / det;
                for j in k + 2..=i {
                    a[i * n + j] -= w1 * a[idx(j, k)] + w2 * a[idx(j, k + 1)];
                }
            }
            k += 2;
        }
    }
    out
}

/// Number of eigenvalues strictly below `-zero_tol`.
pub fn negative_count(m: &DMatrix<f64>, zero_tol: f64) -> usize {
    inertia(m, zero_tol).negative
}

/// Locates the jumps of a counting function `N(z)` (number of eigenvalues
/// below `z`) on `[lo, hi]` by recursive bisection, given `N(lo) = n_lo` and
/// `N(hi) = n_hi`. Eigenvalues with index `≥ limit` are skipped. Each jump is
/// reported once per unit of its size, located to `tol` (absolute, plus the
/// same amount relative to `|z|`).
#[allow(clippy::too_many_arguments)]
pub fn slice_eigenvalues<F>(
    count: &mut F,
    lo: f64,
    hi: f64,
    n_lo: usize,
    n_hi: usize,
    limit: usize,
    tol: f64,
    out: &mut Vec<f64>,
) -> Result<()>
where
    F: FnMut(f64) -> Result<usize>,
{
    if n_hi <= n_lo || n_lo >= limit {
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= tol * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
        for _ in n_lo..n_hi.min(limit) {
            out.push(mid);
        }
        return Ok(());
    }
    let n_mid = count(mid)?.clamp(n_lo, n_hi);
    slice_eigenvalues(count, lo, mid, n_lo, n_mid, limit, tol, out)?;
    slice_eigenvalues(count, mid, hi, n_mid, n_hi, limit, tol, out)
}
