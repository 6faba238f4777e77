//! Complex Schur decomposition and biorthogonal eigensystems.
//!
//! The Schur form comes from Householder reduction to Hessenberg form followed by
//! single-shift (Wilkinson) QR sweeps with Givens rotations. Eigenvectors are
//! obtained by back substitution on the triangular factor; left vectors are the
//! conjugated rows of the inverse right-vector matrix, which makes the pair
//! biorthonormal by construction.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{CMatrix, LinalgError, LogComplex, C64};

const MAX_DIM: usize = 1024;
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;
/// Above this `L/xi` the dense exponential prefactors are flagged as unrepresentable.
pub(crate) const SCALE_FLAG_LIMIT: f64 = 650.0;

/// Column vectors stored as `base[(j, a)] * exp(row_log_scale[j])`.
#[derive(Clone, Debug)]
pub struct ScaledVectors {
    base: CMatrix,
    row_log_scale: Vec<f64>,
}

impl ScaledVectors {
    pub fn unscaled(base: CMatrix) -> Self {
        let n = base.rows();
        Self { base, row_log_scale: vec![0.0; n] }
    }
    pub fn new(base: CMatrix, row_log_scale: Vec<f64>) -> Result<Self, LinalgError> {
        if row_log_scale.len() != base.rows() || row_log_scale.iter().any(|s| !s.is_finite()) {
            return Err(LinalgError::DimensionMismatch("row scale length".into()));
        }
        Ok(Self { base, row_log_scale })
    }
    pub fn dim(&self) -> usize {
        self.base.rows()
    }
    pub fn count(&self) -> usize {
        self.base.cols()
    }
    pub fn base(&self) -> &CMatrix {
        &self.base
    }
    pub fn row_log_scale(&self) -> &[f64] {
        &self.row_log_scale
    }
    pub fn entry(&self, row: usize, col: usize) -> LogComplex {
        LogComplex::from_complex(self.base[(row, col)]).scale_exp(self.row_log_scale[row])
    }
    /// Natural log of the Euclidean norm of column `col`.
    pub fn log_norm(&self, col: usize) -> f64 {
        let terms: Vec<f64> = (0..self.dim())
            .filter(|&j| self.base[(j, col)].norm() > 0.0)
            .map(|j| 2.0 * (self.base[(j, col)].norm().ln() + self.row_log_scale[j]))
            .collect();
        let Some(top) = terms.iter().copied().reduce(f64::max) else {
            return f64::NEG_INFINITY;
        };
        0.5 * (top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln())
    }
    pub fn to_dense(&self) -> Result<CMatrix, LinalgError> {
        if self.row_log_scale.iter().any(|s| s.abs() > 700.0) {
            return Err(LinalgError::ScaleOverflow);
        }
        let mut out = self.base.clone();
        for j in 0..self.dim() {
            let f = self.row_log_scale[j].exp();
            for a in 0..self.count() {
                out[(j, a)] *= f;
            }
        }
        if out.is_finite() {
            Ok(out)
        } else {
            Err(LinalgError::ScaleOverflow)
        }
    }
}

/// Eigenvalues with biorthonormal right/left eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub right: ScaledVectors,
    pub left: ScaledVectors,
    pub biorth_residual: f64,
    pub eig_residual: f64,
    /// Set when the exponential row scales exceed what a dense `f64` matrix can hold.
    pub scale_overflow: bool,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
    /// `max_a ln(|psi_r(a)| |psi_l(a)|)`, the log of the worst eigenvalue condition number.
    pub fn log_condition(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.right.log_norm(a) + self.left.log_norm(a))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn householder_hessenberg(h: &mut CMatrix, q: &mut CMatrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (tail + v[0].norm_sqr()).sqrt();
        let phase = if v[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);
        for j in k..n {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= 2.0 * vi * s;
            }
        }
        for m in [&mut *h, &mut *q] {
            for i in 0..n {
                let s: C64 = v.iter().enumerate().map(|(l, vl)| m[(i, k + 1 + l)] * vl).sum();
                for (l, vl) in v.iter().enumerate() {
                    m[(i, k + 1 + l)] -= 2.0 * s * vl.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    if y.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if x.norm() == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let r = x.norm().hypot(y.norm());
    (x.norm() / r, (x / x.norm()) * y.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (e1, e2) = (mid + disc, mid - disc);
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Complex Schur decomposition `M = Q T Q†` with `T` upper triangular.
pub fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix), LinalgError> {
    let n = m.require_square()?;
    if n > MAX_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut t = m.clone();
    let mut q = CMatrix::identity(n);
    householder_hessenberg(&mut t, &mut q);
    let scale = t.norm_fro().max(f64::MIN_POSITIVE);
    let zero = C64::new(0.0, 0.0);
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if sub <= f64::EPSILON * diag || sub <= 1e-300 * scale.max(1.0) || sub < f64::EPSILON * 1e-3 * scale {
                t[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(LinalgError::NonConvergence);
        }
        let mu = if iter % 11 == 0 {
            t[(hi, hi)] + C64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };
        for k in l..hi {
            let (x, y) = if k == l { (t[(l, l)] - mu, t[(l + 1, l)]) } else { (t[(k, k - 1)], t[(k + 1, k - 1)]) };
            let (c, s) = givens(x, y);
            let start = if k == l { l } else { k - 1 };
            for col in start..n {
                let (a, b) = (t[(k, col)], t[(k + 1, col)]);
                t[(k, col)] = a * c + s * b;
                t[(k + 1, col)] = -s.conj() * a + b * c;
            }
            let stop = (k + 2).min(hi);
            for row in 0..=stop {
                let (a, b) = (t[(row, k)], t[(row, k + 1)]);
                t[(row, k)] = a * c + s.conj() * b;
                t[(row, k + 1)] = -s * a + b * c;
            }
            for row in 0..n {
                let (a, b) = (q[(row, k)], q[(row, k + 1)]);
                q[(row, k)] = a * c + s.conj() * b;
                q[(row, k + 1)] = -s * a + b * c;
            }
            if k > l {
                t[(k + 1, k - 1)] = zero;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = zero;
        }
    }
    Ok((q, t))
}

/// Eigenvalues only, sorted by (real, imaginary).
///
/// Tridiagonal matrices with uniform diagonal and real positive off-diagonal products are
/// diagonalised through the symmetric similarity transform, which is immune to
/// non-normality; everything else goes through the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>, LinalgError> {
    let n = m.require_square()?;
    let mut ev = match symmetrizable_tridiagonal(m) {
        Some((d, off)) => {
            let k = DMatrix::from_fn(n, n, |i, j| {
                if i + 1 == j {
                    off[i]
                } else if j + 1 == i {
                    off[j]
                } else {
                    0.0
                }
            });
            SymmetricEigen::new(k).eigenvalues.iter().map(|&x| d + x).collect()
        }
        None => schur(m)?.1.diagonal(),
    };
    sort_complex(&mut ev);
    Ok(ev)
}

/// Uniform diagonal `d` and symmetric couplings `sqrt(a_i b_i)` if the matrix qualifies.
fn symmetrizable_tridiagonal(m: &CMatrix) -> Option<(C64, Vec<f64>)> {
    let n = m.rows();
    let d = m[(0, 0)];
    let tol = 1e-14 * m.max_abs().max(1.0);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            if i == j {
                if (z - d).norm() > tol {
                    return None;
                }
            } else if i.abs_diff(j) > 1 && z.norm() != 0.0 {
                return None;
            }
        }
        if i + 1 < n {
            let p = m[(i + 1, i)] * m[(i, i + 1)];
            if p.re <= 0.0 || p.im.abs() > 1e-14 * p.norm() {
                return None;
            }
            off.push(p.re.sqrt());
        }
    }
    Some((d, off))
}

fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn sort_permutation(ev: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ev.len()).collect();
    idx.sort_by(|&a, &b| ev[a].re.total_cmp(&ev[b].re).then(ev[a].im.total_cmp(&ev[b].im)));
    idx
}

fn check_simple(ev: &[C64], norm: f64) -> Result<(), LinalgError> {
    let tol = 1e-10 * norm;
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            if (ev[i] - ev[j]).norm() <= tol {
                return Err(LinalgError::DegenerateSpectrum(ev[i], ev[j]));
            }
        }
    }
    Ok(())
}

/// Eigenvectors of an upper-triangular matrix by back substitution.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.rows();
    let small = f64::EPSILON * t.norm_fro().max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[(j, k)]).sum();
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            y[(i, k)] = -s / den;
        }
    }
    y
}

/// Biorthonormal eigensystem of a general complex matrix.
pub fn eig_general(m: &CMatrix) -> Result<Spectrum, LinalgError> {
    let n = m.require_square()?;
    let (q, t) = schur(m)?;
    let mnorm = m.norm_fro().max(f64::MIN_POSITIVE);
    let raw = t.diagonal();
    check_simple(&raw, mnorm)?;
    let v = &q * &triangular_eigenvectors(&t);
    let order = sort_permutation(&raw);
    let eigenvalues: Vec<C64> = order.iter().map(|&a| raw[a]).collect();
    let mut right = CMatrix::from_fn(n, n, |i, a| v[(i, order[a])]);
    for a in 0..n {
        let nrm = (0..n).map(|i| right[(i, a)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            right[(i, a)] /= nrm;
        }
    }
    let left = right.inverse()?.adjoint();

    let mut eig_residual = 0.0f64;
    let mh = m.adjoint();
    for a in 0..n {
        let r = right.column(a);
        let l = left.column(a);
        let mr = m.matvec(&r);
        let ml = mh.matvec(&l);
        let res_r: f64 = mr.iter().zip(&r).map(|(x, y)| (x - eigenvalues[a] * y).norm_sqr()).sum::<f64>().sqrt();
        let lnorm: f64 = l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let res_l: f64 =
            ml.iter().zip(&l).map(|(x, y)| (x - eigenvalues[a].conj() * y).norm_sqr()).sum::<f64>().sqrt() / lnorm;
        eig_residual = eig_residual.max(res_r / mnorm).max(res_l / mnorm);
    }
    let overlap = &left.adjoint() * &right;
    let biorth_residual = (&overlap - &CMatrix::identity(n)).max_abs();
    if biorth_residual > 1e-8 || eig_residual > 1e-9 {
        return Err(LinalgError::IllConditioned(biorth_residual.max(eig_residual)));
    }
    Ok(Spectrum {
        eigenvalues,
        right: ScaledVectors::unscaled(right),
        left: ScaledVectors::unscaled(left),
        biorth_residual,
        eig_residual,
        scale_overflow: false,
    })
}

/// Spectrum of a Hatano-Nelson-type tridiagonal matrix through the gauge map
/// `M = S K S^-1 + d`, `S = diag(e^{j/xi})` (1-based `j`), `K` real symmetric.
pub fn eig_similarity_hn(m: &CMatrix, xi_loc: f64) -> Result<Spectrum, LinalgError> {
    let n = m.require_square()?;
    if !(xi_loc.is_finite() && xi_loc > 0.0) {
        return Err(LinalgError::InvalidLocalizationLength(xi_loc));
    }
    let d = m[(0, 0)];
    let tol = 1e-12 * m.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            let far = i.abs_diff(j) > 1 && m[(i, j)].norm() != 0.0;
            let diag_off = i == j && (m[(i, j)] - d).norm() > tol;
            if far || diag_off {
                return Err(LinalgError::NotTridiagonal);
            }
        }
    }
    let g = (1.0 / xi_loc).exp();
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let down = m[(i + 1, i)] / g;
        let up = m[(i, i + 1)] * g;
        if (down - up).norm() > 1e-8 * down.norm().max(up.norm()) || down.im.abs() > 1e-12 * down.norm() {
            return Err(LinalgError::NotTridiagonal);
        }
        off.push(0.5 * (down.re + up.re));
    }
    let k = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let se = SymmetricEigen::new(k.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let mut base = CMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eig_residual = 0.0f64;
    for (a, &src) in order.iter().enumerate() {
        let lam = se.eigenvalues[src];
        let col = se.eigenvectors.column(src);
        let sign = if col[0] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            base[(j, a)] = C64::new(sign * col[j], 0.0);
        }
        let res = (&k * col - col * lam).norm();
        eig_residual = eig_residual.max(res);
        eigenvalues.push(d + lam);
    }
    eig_residual /= m.norm_fro().max(f64::MIN_POSITIVE);
    let overlap = &base.transpose() * &base;
    let biorth_residual = (&overlap - &CMatrix::identity(n)).max_abs();
    let scales: Vec<f64> = (1..=n).map(|j| j as f64 / xi_loc).collect();
    let scale_overflow = n as f64 / xi_loc > SCALE_FLAG_LIMIT;
    Ok(Spectrum {
        eigenvalues,
        right: ScaledVectors { base: base.clone(), row_log_scale: scales.clone() },
        left: ScaledVectors { base, row_log_scale: scales.iter().map(|s| -s).collect() },
        biorth_residual,
        eig_residual,
        scale_overflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn schur_reconstructs_and_is_triangular() {
        for n in [1, 2, 3, 7, 30] {
            let m = pseudo_random(n, n as u64 + 3);
            let (q, t) = schur(&m).unwrap();
            let back = &(&q * &t) * &q.adjoint();
            assert!((&back - &m).max_abs() < 1e-12 * m.norm_fro(), "n={n}");
            assert!((&(&q.adjoint() * &q) - &CMatrix::identity(n)).max_abs() < 1e-13);
        }
    }

    #[test]
    fn identity_is_degenerate() {
        assert!(matches!(eig_general(&CMatrix::identity(2)), Err(LinalgError::DegenerateSpectrum(..))));
    }

    #[test]
    fn diagonal_gives_standard_basis() {
        let m = CMatrix::from_diag(&[C64::new(1.0, 0.0), C64::new(0.0, 2.0)]);
        let s = eig_general(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![C64::new(0.0, 2.0), C64::new(1.0, 0.0)]);
        let r = s.right.to_dense().unwrap();
        assert!((r[(1, 0)].norm() - 1.0).abs() < 1e-15 && r[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn random_matrix_biorthonormal() {
        let m = pseudo_random(40, 11);
        let s = eig_general(&m).unwrap();
        assert!(s.biorth_residual < 1e-10 && s.eig_residual < 1e-12);
        for w in s.eigenvalues.windows(2) {
            assert!(w[0].re <= w[1].re);
        }
    }
}
