//! Dense complex least squares by Householder QR with column equilibration.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{param_err, Error, Result};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: alloc::vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Solves `min ‖A x - b‖` for each right-hand side in `rhs` (each of length
/// `A.rows()`). Columns are scaled to unit norm before factorization.
pub fn least_squares(a: &CMatrix, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let (m, n) = (a.rows, a.cols);
    if m < n || n == 0 {
        return Err(param_err!("least squares needs rows >= cols > 0, got {m} x {n}"));
    }
    if rhs.iter().any(|b| b.len() != m) {
        return Err(param_err!("right-hand side length differs from {m} rows"));
    }
    let mut r = a.clone();
    let mut scale = alloc::vec![1.0; n];
    for (c, sc) in scale.iter_mut().enumerate() {
        let norm = libm::sqrt((0..m).map(|i| r.get(i, c).norm_sqr()).sum::<f64>());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonConvergence(alloc::format!("column {c} of the design matrix is zero or non-finite")));
        }
        *sc = 1.0 / norm;
        for i in 0..m {
            let v = r.get(i, c) * *sc;
            r.set(i, c, v);
        }
    }
    let mut bs: Vec<Vec<Complex64>> = rhs.to_vec();
    for k in 0..n {
        let alpha_norm = libm::sqrt((k..m).map(|i| r.get(i, k).norm_sqr()).sum::<f64>());
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| r.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H = I - 2 v v* / (v* v)
        for c in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * r.get(k + i, c)).sum();
            let f = dot * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                let val = r.get(k + i, c) - vi * f;
                r.set(k + i, c, val);
            }
        }
        for b in bs.iter_mut() {
            let dot: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * b[k + i]).sum();
            let f = dot * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                b[k + i] -= vi * f;
            }
        }
    }
    let dmax = (0..n).map(|k| r.get(k, k).norm()).fold(0.0, f64::max);
    for k in 0..n {
        if r.get(k, k).norm() <= 1e-14 * dmax * n as f64 {
            return Err(Error::NonConvergence(alloc::format!(
                "design matrix is numerically rank deficient at column {k}"
            )));
        }
    }
    let mut out = Vec::with_capacity(bs.len());
    for b in &bs {
        let mut x = alloc::vec![Complex64::new(0.0, 0.0); n];
        for k in (0..n).rev() {
            let mut acc = b[k];
            for (c, xc) in x.iter().enumerate().skip(k + 1) {
                acc -= r.get(k, c) * xc;
            }
            x[k] = acc / r.get(k, k);
        }
        for (xi, s) in x.iter_mut().zip(&scale) {
            *xi *= *s;
        }
        out.push(x);
    }
    Ok(out)
}
