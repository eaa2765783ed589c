//! Cyclic Jacobi eigensolver for symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair (p, q) and applies a plane
//! rotation that zeroes `a_pq`. The off-diagonal Frobenius norm decreases
//! monotonically; iteration stops once it drops below [`OFF_DIAGONAL_TOL`].
//! Matrices here are small (selection sets, tens of rows), where Jacobi is
//! accurate and has no dependencies.

use super::MathError;

/// Convergence threshold on the off-diagonal Frobenius norm.
pub const OFF_DIAGONAL_TOL: f64 = 1e-10;
/// Hard cap on sweeps before reporting non-convergence.
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues (unsorted) of a symmetric `n x n` matrix in row-major order,
/// together with the final off-diagonal residual.
pub fn jacobi_eigenvalues(entries: &[f64], n: usize) -> Result<(Vec<f64>, f64), MathError> {
    assert_eq!(entries.len(), n * n, "entries must be n*n");
    if n == 1 {
        return Ok((vec![entries[0]], 0.0));
    }

    let mut a = entries.to_vec();
    let mut residual = off_diagonal_norm(&a, n);
    if residual <= OFF_DIAGONAL_TOL {
        return Ok((diagonal(&a, n), residual));
    }

    for _sweep in 0..MAX_SWEEPS {
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, n, p, q);
            }
        }
        residual = off_diagonal_norm(&a, n);
        if residual <= OFF_DIAGONAL_TOL {
            return Ok((diagonal(&a, n), residual));
        }
    }

    Err(MathError::Convergence {
        sweeps: MAX_SWEEPS,
        residual,
    })
}

/// Applies the Jacobi rotation that annihilates `a[p][q]`.
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];

    // tan of the rotation angle, smaller root for stability.
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        1.0 / (theta - (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_kp = akp - s * (akq + tau * akp);
        let new_kq = akq + s * (akp - tau * akq);
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp;
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq;
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..i {
            let v = a[i * n + j];
            sum += v * v;
        }
    }
    (2.0 * sum).sqrt()
}

fn diagonal(a: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_is_its_own_spectrum() {
        let m = vec![3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0];
        let (mut eig, residual) = jacobi_eigenvalues(&m, 3).unwrap();
        eig.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(eig, vec![3.0, 2.0, 1.0]);
        assert!(residual <= OFF_DIAGONAL_TOL);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let m = vec![2.0, 1.0, 1.0, 2.0];
        let (mut eig, _) = jacobi_eigenvalues(&m, 2).unwrap();
        eig.sort_by(|a, b| b.total_cmp(a));
        assert!((eig[0] - 3.0).abs() < 1e-12);
        assert!((eig[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_entry_matrix() {
        let (eig, residual) = jacobi_eigenvalues(&[7.5], 1).unwrap();
        assert_eq!(eig, vec![7.5]);
        assert_eq!(residual, 0.0);
    }

    #[test]
    fn trace_is_preserved() {
        // Rotations preserve the trace, so the eigenvalue sum must match it.
        let m = vec![
            1.0, 0.3, -0.2, 0.5, //
            0.3, 1.0, 0.1, -0.4, //
            -0.2, 0.1, 1.0, 0.2, //
            0.5, -0.4, 0.2, 1.0,
        ];
        let (eig, _) = jacobi_eigenvalues(&m, 4).unwrap();
        let sum: f64 = eig.iter().sum();
        assert!((sum - 4.0).abs() < 1e-10);
    }
}
