//! Fixed-step classical Runge-Kutta integration of linear matrix ODEs.

use super::{CMatrix, LinalgError, C64};

pub const MAX_STEP: f64 = 0.01;
pub const NORM_OVERFLOW: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdeMode {
    /// `dX/dt = A X (+ source)`
    Linear,
    /// `dX/dt = A X + X A† (+ source)`
    Covariance,
}

/// Compressed sparse rows of a dense matrix; tight-binding matrices are banded.
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<C64>,
}

impl Banded {
    pub fn from_dense(a: &CMatrix) -> Self {
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if a[(i, j)].norm() != 0.0 {
                    col.push(j);
                    val.push(a[(i, j)]);
                }
            }
            row_ptr.push(col.len());
        }
        Self { n: a.rows(), row_ptr, col, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { val: self.val.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.val[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col[p], self.val[p]))
    }

    /// `y = A x`
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    /// `y = x A` for a row vector `x`.
    pub fn apply_left(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (i, &xi) in x.iter().enumerate() {
            for (j, a) in self.row(i) {
                y[j] += xi * a;
            }
        }
    }

    /// `Y = A X` (`X` row-major with `k` columns).
    pub fn apply_mat(&self, x: &[C64], k: usize, y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for i in 0..self.n {
            let yrow = &mut y[i * k..(i + 1) * k];
            for (j, a) in self.row(i) {
                for (o, &xv) in yrow.iter_mut().zip(&x[j * k..(j + 1) * k]) {
                    *o += a * xv;
                }
            }
        }
    }

    /// `Y += X A†` (`X` row-major with `k` rows and `n` columns).
    pub fn add_mat_adjoint(&self, x: &[C64], k: usize, y: &mut [C64]) {
        for r in 0..k {
            let xrow = &x[r * self.n..(r + 1) * self.n];
            let yrow = &mut y[r * self.n..(r + 1) * self.n];
            for (j, yj) in yrow.iter_mut().enumerate() {
                for (l, a) in self.row(j) {
                    *yj += xrow[l] * a.conj();
                }
            }
        }
    }
}

pub fn step_size(norm_inf: f64) -> f64 {
    if norm_inf > 0.0 {
        MAX_STEP.min(0.1 / norm_inf)
    } else {
        MAX_STEP
    }
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<(), LinalgError> {
    if t_grid.is_empty() || t_grid[0] != 0.0 || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(LinalgError::NonMonotonicGrid);
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LinalgError::NonMonotonicGrid);
    }
    Ok(())
}

/// One classical RK4 step of `x' = f(x)` in place.
pub fn rk4_step<F: FnMut(&[C64], &mut [C64])>(x: &mut [C64], h: f64, rhs: &mut F, work: &mut [Vec<C64>; 5]) {
    let [k1, k2, k3, k4, tmp] = work;
    rhs(x, k1);
    for i in 0..x.len() {
        tmp[i] = x[i] + k1[i] * (0.5 * h);
    }
    rhs(tmp, k2);
    for i in 0..x.len() {
        tmp[i] = x[i] + k2[i] * (0.5 * h);
    }
    rhs(tmp, k3);
    for i in 0..x.len() {
        tmp[i] = x[i] + k3[i] * h;
    }
    rhs(tmp, k4);
    for i in 0..x.len() {
        x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
}

/// Grid driver: sub-steps each interval uniformly with step at most `h_max`.
#[derive(Clone, Copy, Debug)]
pub struct Rk4Grid {
    pub h_max: f64,
}

impl Rk4Grid {
    pub fn new(h_max: f64) -> Self {
        Self { h_max }
    }

    /// Calls `observe(index, t, state)` at every grid point; stops early when it returns `false`.
    pub fn run<F, O>(&self, x0: Vec<C64>, t_grid: &[f64], mut rhs: F, mut observe: O) -> Result<Vec<C64>, LinalgError>
    where
        F: FnMut(&[C64], &mut [C64]),
        O: FnMut(usize, f64, &[C64]) -> bool,
    {
        check_grid(t_grid)?;
        let n = x0.len();
        let mut x = x0;
        let mut work: [Vec<C64>; 5] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]);
        if !observe(0, 0.0, &x) {
            return Ok(x);
        }
        for (idx, w) in t_grid.windows(2).enumerate() {
            let span = w[1] - w[0];
            let steps = (span / self.h_max - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rk4_step(&mut x, h, &mut rhs, &mut work);
            }
            if x.iter().any(|z| !(z.norm() <= NORM_OVERFLOW)) {
                return Err(LinalgError::StepOverflow(w[1]));
            }
            if !observe(idx + 1, w[1], &x) {
                break;
            }
        }
        Ok(x)
    }
}

/// Integrates `dX/dt = A X (+ X A†) (+ source)` and returns `X` at every grid point.
pub fn integrate_linear_ode(
    a: &CMatrix,
    x0: &CMatrix,
    t_grid: &[f64],
    mode: OdeMode,
    source: Option<&CMatrix>,
    verify: bool,
) -> Result<Vec<CMatrix>, LinalgError> {
    let n = a.require_square()?;
    if x0.rows() != n || (mode == OdeMode::Covariance && x0.cols() != n) {
        return Err(LinalgError::DimensionMismatch("initial state not conformable".into()));
    }
    if let Some(s) = source {
        if s.rows() != x0.rows() || s.cols() != x0.cols() {
            return Err(LinalgError::DimensionMismatch("source not conformable".into()));
        }
    }
    let banded = Banded::from_dense(a);
    let h = step_size(banded.norm_inf());
    let run = |h: f64, keep: bool| -> Result<(Vec<CMatrix>, Vec<C64>), LinalgError> {
        let k = x0.cols();
        let rhs = |x: &[C64], y: &mut [C64]| {
            banded.apply_mat(x, k, y);
            if mode == OdeMode::Covariance {
                banded.add_mat_adjoint(x, n, y);
            }
            if let Some(s) = source {
                for (v, q) in y.iter_mut().zip(s.as_slice()) {
                    *v += q;
                }
            }
        };
        let mut out = Vec::new();
        let last = Rk4Grid::new(h).run(x0.as_slice().to_vec(), t_grid, rhs, |_, _, x| {
            if keep {
                out.push(CMatrix::new(n, k, x.to_vec()).expect("finite state"));
            }
            true
        })?;
        Ok((out, last))
    };
    let (traj, last) = run(h, true)?;
    if verify {
        let (_, fine) = run(0.5 * h, false)?;
        let scale = fine.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let diff = fine.iter().zip(&last).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let rel = if scale > 0.0 { diff / scale } else { diff };
        if rel > 1e-8 {
            return Err(LinalgError::RichardsonMismatch(rel));
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay() {
        let a = CMatrix::from_real(1, 1, &[-1.0]).unwrap();
        let x0 = CMatrix::identity(1);
        let out = integrate_linear_ode(&a, &x0, &[0.0, 1.0], OdeMode::Linear, None, true).unwrap();
        assert!((out[1][(0, 0)].re - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn zero_generator_is_static() {
        let a = CMatrix::zeros(3, 3);
        let out = integrate_linear_ode(&a, &CMatrix::identity(3), &[0.0, 0.3, 7.0], OdeMode::Linear, None, false).unwrap();
        assert!(out.iter().all(|x| *x == CMatrix::identity(3)));
    }

    #[test]
    fn bad_grids() {
        let a = CMatrix::zeros(1, 1);
        for g in [vec![0.1, 0.2], vec![0.0, 0.2, 0.2], vec![]] {
            assert_eq!(
                integrate_linear_ode(&a, &a, &g, OdeMode::Linear, None, false).unwrap_err(),
                LinalgError::NonMonotonicGrid
            );
        }
    }

    #[test]
    fn overflow_detected() {
        let a = CMatrix::from_real(1, 1, &[50.0]).unwrap();
        let r = integrate_linear_ode(&a, &CMatrix::identity(1), &[0.0, 20.0], OdeMode::Linear, None, false);
        assert!(matches!(r, Err(LinalgError::StepOverflow(_))));
    }
}
