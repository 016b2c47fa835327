//! Perron-Frobenius data of a nonnegative matrix by power iteration.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)] // needed when std is absent from the build
use num_traits::Float;

use crate::error::{Error, Result};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// `M x^T`
    pub fn mul_col(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x M`
    pub fn mul_row(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            for (yj, &a) in y.iter_mut().zip(self.row(i)) {
                *yj += xi * a;
            }
        }
        y
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub const MAX_ITERATIONS: usize = 100_000;
const RHO_TOLERANCE: f64 = 1e-13;
const VECTOR_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub rho: f64,
    /// Right eigenvector, `M u^T = rho u^T`.
    pub u: Vec<f64>,
    /// Left eigenvector with `|v| = 1`, `v M = rho v`.
    pub v: Vec<f64>,
    /// Some coordinate of `u` or `v` vanishes (reducible mean matrix).
    pub reducible: bool,
    pub iterations: usize,
}

impl SpectralData {
    /// `(c u, v / c)`: the same eigen-pair under another normalization.
    pub fn rescaled(&self, c: f64) -> SpectralData {
        SpectralData {
            u: self.u.iter().map(|x| x * c).collect(),
            v: self.v.iter().map(|x| x / c).collect(),
            ..self.clone()
        }
    }

    pub fn right_residual(&self, m: &Matrix) -> f64 {
        residual(&m.mul_col(&self.u), &self.u, self.rho)
    }

    pub fn left_residual(&self, m: &Matrix) -> f64 {
        residual(&m.mul_row(&self.v), &self.v, self.rho)
    }
}

fn residual(mx: &[f64], x: &[f64], rho: f64) -> f64 {
    mx.iter()
        .zip(x)
        .map(|(a, b)| (a - rho * b).abs())
        .fold(0.0, f64::max)
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Power iteration on a nonnegative matrix, `L1`-normalized iterates.
fn dominant(m: &Matrix, left: bool) -> Result<(f64, Vec<f64>, usize)> {
    let n = m.dim();
    // slightly non-uniform start so that permutation-like matrices oscillate
    let mut x: Vec<f64> = (0..n)
        .map(|j| 1.0 + (j + 1) as f64 / (2 * n) as f64)
        .collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    let mut prev = f64::NAN;
    for it in 1..=MAX_ITERATIONS {
        let mut y = if left { m.mul_row(&x) } else { m.mul_col(&x) };
        let rho: f64 = y.iter().sum();
        if rho <= 0.0 || !rho.is_finite() {
            return Ok((0.0, x, it));
        }
        y.iter_mut().for_each(|v| *v /= rho);
        let dx = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = y;
        if (rho - prev).abs() <= RHO_TOLERANCE * rho && dx <= VECTOR_TOLERANCE {
            return Ok((rho, x, it));
        }
        prev = rho;
    }
    Err(Error::SpectralFailure {
        iterations: MAX_ITERATIONS,
    })
}

/// Dominant eigenvalue with nonnegative left and right eigenvectors,
/// normalized by `|v| = 1` and `v u^T = 1`. Fails unless `rho > 1`.
pub fn perron(m: &Matrix) -> Result<SpectralData> {
    if m.data.iter().any(|&a| !(a.is_finite() && a >= 0.0)) {
        return Err(Error::param("mean matrix must be finite and nonnegative"));
    }
    let (rho_r, mut u, it_r) = dominant(m, false)?;
    let (rho_l, mut v, it_l) = dominant(m, true)?;
    let rho = 0.5 * (rho_r + rho_l);
    if rho <= 1.0 + 1e-12 {
        return Err(Error::NotSupercritical { rho });
    }
    if (rho_r - rho_l).abs() > 1e-10 * rho {
        return Err(Error::Inconsistent(alloc::format!(
            "left and right power iterations disagree: {rho_r} vs {rho_l}"
        )));
    }
    let norm_v: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= norm_v);
    let vu: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
    if vu <= 1e-300 {
        return Err(Error::Degenerate(
            "left and right eigenvectors are orthogonal".into(),
        ));
    }
    u.iter_mut().for_each(|x| *x /= vu);
    let tiny = |x: &[f64]| x.iter().any(|&c| c <= 1e-14 * sup_norm(x));
    let reducible = tiny(&u) || tiny(&v);
    for c in u.iter_mut().chain(v.iter_mut()) {
        if *c < 0.0 {
            *c = 0.0;
        }
    }
    let out = SpectralData {
        rho,
        u,
        v,
        reducible,
        iterations: it_r.max(it_l),
    };
    let (rr, lr) = (out.right_residual(m), out.left_residual(m));
    if rr > 1e-10 * rho * sup_norm(&out.u) || lr > 1e-10 * rho * sup_norm(&out.v) {
        return Err(Error::SpectralFailure {
            iterations: out.iterations,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(m: &Matrix, s: &SpectralData) {
        assert!(s.right_residual(m) <= 1e-10 * s.rho * sup_norm(&s.u));
        assert!(s.left_residual(m) <= 1e-10 * s.rho * sup_norm(&s.v));
        let vu: f64 = s.v.iter().zip(&s.u).map(|(a, b)| a * b).sum();
        assert!((vu - 1.0).abs() < 1e-12);
        assert!(s.u.iter().chain(&s.v).all(|&c| c >= 0.0));
    }

    #[test]
    fn symmetric_gated_matrix() {
        let m = Matrix::from_rows(&[vec![10.0 / 9.0, 4.0 / 9.0], vec![2.0 / 3.0, 2.0 / 3.0]]);
        let s = perron(&m).unwrap();
        let sqrt7 = 7.0f64.sqrt();
        assert!((s.rho - (8.0 + 2.0 * sqrt7) / 9.0).abs() < 1e-10);
        check_invariants(&m, &s);
        // directions from the characteristic polynomial
        assert!((s.v[0] / s.v[1] - (1.0 + sqrt7) / 2.0).abs() < 1e-9);
        assert!((s.u[0] / s.u[1] - (1.0 + sqrt7) / 3.0).abs() < 1e-9);
        assert!(!s.reducible);
    }

    #[test]
    fn rank_one_all_ones() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let s = perron(&m).unwrap();
        assert!((s.rho - 2.0).abs() < 1e-12);
        assert!((s.u[0] - s.u[1]).abs() < 1e-12 && (s.v[0] - s.v[1]).abs() < 1e-12);
    }

    #[test]
    fn reducible_zero_column() {
        let m = Matrix::from_rows(&[vec![4.0, 0.0], vec![2.0, 0.0]]);
        let s = perron(&m).unwrap();
        assert!((s.rho - 4.0).abs() < 1e-12);
        assert_eq!(s.v[1], 0.0);
        assert!((s.u[0] / s.u[1] - 2.0).abs() < 1e-12);
        assert!(s.reducible);
        check_invariants(&m, &s);
    }

    #[test]
    fn identity_is_not_supercritical() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(perron(&m), Err(Error::NotSupercritical { .. })));
    }

    #[test]
    fn periodic_matrix_fails_to_converge() {
        let m = Matrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert!(matches!(perron(&m), Err(Error::SpectralFailure { .. })));
    }

    #[test]
    fn three_by_three_against_characteristic_root() {
        let m = Matrix::from_rows(&[
            vec![1.0, 2.0, 0.5],
            vec![0.3, 0.7, 1.1],
            vec![0.9, 0.2, 0.4],
        ]);
        let s = perron(&m).unwrap();
        check_invariants(&m, &s);
        // det(M - rho I) = 0 via cofactor expansion
        let r = s.rho;
        let a = |i: usize, j: usize| m[(i, j)] - if i == j { r } else { 0.0 };
        let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        assert!(det.abs() < 1e-10);
    }
}
