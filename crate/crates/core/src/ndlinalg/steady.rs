//! Fixed points of `dC/dt = A C + C A† + Q`, `A = -i H_eff`.

use nalgebra::{DMatrix, DVector};

use super::{eigenvalues, schur, CMatrix, LinalgError, C64};

/// Which operator index labels the rows of the evolved covariance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceLayout {
    /// Entry `(m, n)` holds `<c_n† c_m>`; the diagonal is the site occupation.
    AnnihilatorRow,
    /// Entry `(n, m)` holds `<c_n† c_m>`.
    CreatorRow,
}

/// Layout under which `dC/dt = A C + C A† + P^T` reproduces the exact master equation.
pub const COVARIANCE_LAYOUT: CovarianceLayout = CovarianceLayout::AnnihilatorRow;

/// Largest dimension solved through the vectorised dense system; Bartels-Stewart above.
pub const DENSE_LYAPUNOV_LIMIT: usize = 24;

/// `‖A C + C A† + Q‖_F` with `A = -i H_eff`.
pub fn lyapunov_residual(h_eff: &CMatrix, c: &CMatrix, source: &CMatrix) -> f64 {
    let a = h_eff.scale(C64::new(0.0, -1.0));
    let r = &(&(&a * c) + &(c * &a.adjoint())) + source;
    r.norm_fro()
}

/// Steady state for uniform pumping `Q = pump_rate * I`.
pub fn solve_steady_sylvester(h_eff: &CMatrix, pump_rate: f64) -> Result<CMatrix, LinalgError> {
    let n = h_eff.require_square()?;
    solve_steady_lyapunov(h_eff, &CMatrix::identity(n).scale(C64::new(pump_rate, 0.0)))
}

/// Solves `A C + C A† + Q = 0`.
pub fn solve_steady_lyapunov(h_eff: &CMatrix, source: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = h_eff.require_square()?;
    if source.rows() != n || source.cols() != n {
        return Err(LinalgError::DimensionMismatch("source must match H_eff".into()));
    }
    let top = eigenvalues(h_eff)?.iter().map(|e| e.im).fold(f64::NEG_INFINITY, f64::max);
    if top >= -1e-12 {
        return Err(LinalgError::UnstableModel(top));
    }
    if source.max_abs() == 0.0 {
        return Ok(CMatrix::zeros(n, n));
    }
    let c = if n <= DENSE_LYAPUNOV_LIMIT { dense(h_eff, source)? } else { bartels_stewart(h_eff, source)? };
    let c = c.hermitian_part();
    if !c.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok(c)
}

fn dense(h_eff: &CMatrix, source: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = h_eff.rows();
    let a = h_eff.scale(C64::new(0.0, -1.0));
    // Unknown index p = i*n + j for C[i][j].
    let mut k = DMatrix::<C64>::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let p = i * n + j;
            for l in 0..n {
                k[(p, l * n + j)] += a[(i, l)];
                k[(p, i * n + l)] += a[(j, l)].conj();
            }
        }
    }
    let rhs = DVector::from_iterator(n * n, source.as_slice().iter().map(|q| -q));
    let x = k.lu().solve(&rhs).ok_or(LinalgError::Singular)?;
    CMatrix::new(n, n, x.iter().copied().collect())
}

fn bartels_stewart(h_eff: &CMatrix, source: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = h_eff.rows();
    let a = h_eff.scale(C64::new(0.0, -1.0));
    let (q, t) = schur(&a)?;
    // T Y + Y T† = F with F = -Q† source Q; column j couples to columns k > j.
    let f = (&(&q.adjoint() * source) * &q).scale(C64::new(-1.0, 0.0));
    let mut y = CMatrix::zeros(n, n);
    for j in (0..n).rev() {
        let mut rhs: Vec<C64> = (0..n).map(|i| f[(i, j)]).collect();
        for k in j + 1..n {
            let tjk = t[(j, k)].conj();
            if tjk.norm() == 0.0 {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r -= tjk * y[(i, k)];
            }
        }
        let shift = t[(j, j)].conj();
        for i in (0..n).rev() {
            let s: C64 = (i + 1..n).map(|l| t[(i, l)] * y[(l, j)]).sum();
            let den = t[(i, i)] + shift;
            if den.norm() == 0.0 {
                return Err(LinalgError::Singular);
            }
            y[(i, j)] = (rhs[i] - s) / den;
        }
    }
    Ok(&(&q * &y) * &q.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_heff(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(0.1 * i as f64, -0.6 - 0.01 * i as f64)
            } else if i == j + 1 {
                C64::new(0.7, 0.0)
            } else if j == i + 1 {
                C64::new(0.2, 0.05)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn both_solvers_satisfy_equation() {
        for n in [1, 5, DENSE_LYAPUNOV_LIMIT + 6] {
            let h = sample_heff(n);
            let q = CMatrix::identity(n).scale(C64::new(0.3, 0.0));
            let c = solve_steady_lyapunov(&h, &q).unwrap();
            assert!(lyapunov_residual(&h, &c, &q) < 1e-12 * c.norm_fro() * h.norm_fro().max(1.0), "n={n}");
            assert!(c.hermiticity_defect() < 1e-13);
        }
        let h = sample_heff(9);
        let q = CMatrix::identity(9);
        let d = dense(&h, &q).unwrap();
        let b = bartels_stewart(&h, &q).unwrap();
        assert!((&d - &b).max_abs() < 1e-12 * d.max_abs());
    }

    #[test]
    fn no_pump_gives_zero() {
        let c = solve_steady_sylvester(&sample_heff(4), 0.0).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn unstable_rejected() {
        let h = CMatrix::from_diag(&[C64::new(1.0, 0.1), C64::new(0.0, -1.0)]);
        assert!(matches!(solve_steady_sylvester(&h, 1.0), Err(LinalgError::UnstableModel(_))));
    }
}
