//! Dense symmetric solves for the small systems the optimizer produces.

use alloc::vec::Vec;

/// In-place lower Cholesky factorization of a symmetric positive-definite
/// matrix in row-major order. Fails on a non-positive pivot.
pub(crate) fn cholesky(a: &mut [f64], d: usize) -> Result<(), ()> {
    // Pivot tolerance relative to the largest initial diagonal entry.
    let mut max_diag = 0.0f64;
    for k in 0..d {
        let v = a[k * d + k].abs();
        if v > max_diag {
            max_diag = v;
        }
    }
    let tol = 1e-12 * max_diag.max(f64::MIN_POSITIVE);

    for k in 0..d {
        let mut s = a[k * d + k];
        for m in 0..k {
            s -= a[k * d + m] * a[k * d + m];
        }
        if !(s > tol) {
            return Err(());
        }
        let lkk = libm::sqrt(s);
        a[k * d + k] = lkk;
        for i in (k + 1)..d {
            let mut s = a[i * d + k];
            for m in 0..k {
                s -= a[i * d + m] * a[k * d + m];
            }
            a[i * d + k] = s / lkk;
        }
    }
    Ok(())
}

/// Solve L L^T x = b given the factor from [`cholesky`]; overwrites `b`.
pub(crate) fn cholesky_solve(l: &[f64], d: usize, b: &mut [f64]) {
    // Forward substitution.
    for i in 0..d {
        let mut s = b[i];
        for m in 0..i {
            s -= l[i * d + m] * b[m];
        }
        b[i] = s / l[i * d + i];
    }
    // Back substitution with L^T.
    for i in (0..d).rev() {
        let mut s = b[i];
        for m in (i + 1)..d {
            s -= l[m * d + i] * b[m];
        }
        b[i] = s / l[i * d + i];
    }
}

/// Solve a symmetric positive-definite system, returning None when the
/// factorization fails.
pub(crate) fn solve_spd(a: &[f64], d: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l: Vec<f64> = a.to_vec();
    cholesky(&mut l, d).ok()?;
    let mut x: Vec<f64> = b.to_vec();
    cholesky_solve(&l, d, &mut x);
    Some(x)
}
