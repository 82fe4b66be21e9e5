//! Small dense complex linear algebra.
//!
//! Everything here is sized for the problem at hand: the transfer matrices are
//! 9x9, density matrices 5x5. The Hermitian eigensolver is a cyclic complex
//! Jacobi iteration, which is deterministic and converges to machine precision
//! in a handful of sweeps at these sizes.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default relative gap below which the dominant eigenvalue counts as degenerate.
pub const DOMINANT_TOL: f64 = 1e-13;
/// Default number of refinement steps for the dominant eigenpair.
pub const DOMINANT_MAX_SWEEPS: usize = 100;
/// Negative eigenvalues above `-PSD_CLIP_TOL` are treated as zero.
pub const PSD_CLIP_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Row vector times matrix, `u^T M` (no conjugation).
    pub fn vecmat(&self, u: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, u.len(), "vecmat dimension mismatch");
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| u[i] * self[(i, j)]).sum())
            .collect()
    }

    pub fn pow(&self, n: usize) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.matmul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-norm of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from `M = M^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        defect
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// True when every imaginary part is at most `tol` in magnitude.
    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `<u|v>` with the first argument conjugated.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Column `k` of `vectors` is the unit eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, Vec<C64>)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (v, self.vector(k)))
    }

    /// `sum_k f(lambda_k) v_k v_k^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * weights[k]).sum()
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Full spectrum of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn eig_hermitian(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }

    let n = m.rows();
    // symmetrize so the rotations see an exactly Hermitian input
    let mut a = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = CMatrix::identity(n);

    let norm_f = a.frobenius_norm();
    let mut converged = n == 1;
    let mut off = f64::INFINITY;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let prev = off;
        off = off_diagonal_norm(&a);
        // stop at the rounding floor, or once a sweep stops making progress near it
        if off <= 1e-2 * f64::EPSILON * norm_f || (off >= prev && off <= 1e3 * f64::EPSILON * norm_f) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        off = off_diagonal_norm(&a);
        // the last sweep may already have reached the rounding floor
        if off > 1e3 * f64::EPSILON * norm_f {
            return Err(Error::NotConverged { sweeps: JACOBI_MAX_SWEEPS, off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    for j in 0..n {
        fix_phase(&mut vectors, j);
    }
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let n = a.rows();
    let phase = apq / r;
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    let theta = (beta - alpha) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();

    // G = diag(1, e^{-i phi}) R, with R the real Jacobi rotation
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = ph_conj * (-s);
    let g_qq = ph_conj * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(alpha - t * r, 0.0);
    a[(q, q)] = C64::new(beta + t * r, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Rotates column `j` so its largest-modulus component is real and positive.
fn fix_phase(m: &mut CMatrix, j: usize) {
    let n = m.rows();
    let mut best = 0;
    for i in 0..n {
        if m[(i, j)].norm() > m[(best, j)].norm() + 1e-14 {
            best = i;
        }
    }
    let z = m[(best, j)];
    if z.norm() == 0.0 {
        return;
    }
    let rot = z.conj() / z.norm();
    let mut nrm = 0.0;
    for i in 0..n {
        m[(i, j)] *= rot;
        nrm += m[(i, j)].norm_sqr();
    }
    let nrm = nrm.sqrt();
    for i in 0..n {
        m[(i, j)] /= nrm;
    }
}

/// Dominant eigenvalue with its eigenvector.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
    /// `|lambda_2| / |lambda_1|`.
    pub gap_ratio: f64,
}

/// Eigenvalue of largest magnitude of a Hermitian matrix, required to be
/// unique and positive.
///
/// The Jacobi vector is polished by shifted power iteration; `max_sweeps`
/// bounds the number of power steps.
pub fn dominant_eigenpair(m: &CMatrix, tol: f64, max_sweeps: usize) -> Result<EigenPair> {
    let eig = eig_hermitian(m)?;
    let n = eig.len();
    let lead = (0..n)
        .max_by(|&i, &j| eig.values[i].abs().total_cmp(&eig.values[j].abs()))
        .expect("non-empty spectrum");
    let value = eig.values[lead];
    let second = (0..n)
        .filter(|&k| k != lead)
        .map(|k| eig.values[k].abs())
        .fold(0.0, f64::max);
    if value.abs() - second < tol * value.abs() {
        return Err(Error::DegenerateDominant { lambda1: value.abs(), lambda2: second });
    }
    if value <= 0.0 {
        return Err(Error::NonPositiveDominant(value));
    }

    let mut vector = eig.vector(lead);
    let others: Vec<f64> = (0..n).filter(|&k| k != lead).map(|k| eig.values[k]).collect();
    if !others.is_empty() {
        let lo = others.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = others.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = -(lo + hi) / 2.0;
        vector = refine_power(m, vector, value, shift, tol, max_sweeps);
    }
    let value = rayleigh(m, &vector);
    Ok(EigenPair { value, vector, gap_ratio: second / value.abs() })
}

fn rayleigh(m: &CMatrix, v: &[C64]) -> f64 {
    (inner(v, &m.matvec(v)) / inner(v, v)).re
}

fn residual(m: &CMatrix, v: &[C64], lambda: f64) -> f64 {
    m.matvec(v).iter().zip(v).map(|(mv, x)| (mv - x * lambda).norm_sqr()).sum::<f64>().sqrt()
}

fn refine_power(
    m: &CMatrix,
    start: Vec<C64>,
    value: f64,
    shift: f64,
    tol: f64,
    max_steps: usize,
) -> Vec<C64> {
    let target = tol * value.abs();
    let mut best_res = residual(m, &start, value);
    let mut best = start.clone();
    let mut v = start;
    for _ in 0..max_steps {
        if best_res <= target {
            break;
        }
        let mut w = m.matvec(&v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += vi * shift;
        }
        let nrm = norm(&w);
        if nrm == 0.0 {
            break;
        }
        for wi in w.iter_mut() {
            *wi /= nrm;
        }
        v = w;
        let lam = rayleigh(m, &v);
        let res = residual(m, &v, lam);
        if res < best_res {
            best_res = res;
            best = v.clone();
        }
    }
    // keep the Jacobi phase convention: largest component real positive
    let k = (0..best.len()).max_by(|&i, &j| best[i].norm().total_cmp(&best[j].norm())).unwrap_or(0);
    let rot = if best[k].norm() > 0.0 { best[k].conj() / best[k].norm() } else { ONE };
    let nrm = norm(&best);
    best.iter().map(|z| z * rot / nrm).collect()
}

/// Principal square root of a positive semi-definite Hermitian matrix.
pub fn sqrt_psd(rho: &CMatrix, clip_tol: f64) -> Result<CMatrix> {
    let eig = eig_hermitian(rho)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -clip_tol {
        return Err(Error::NotPsd(min));
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Eigenvalues of a PSD Hermitian matrix with small negatives clipped to zero.
pub fn psd_spectrum(rho: &CMatrix, clip_tol: f64) -> Result<Vec<f64>> {
    let eig = eig_hermitian(rho)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -clip_tol {
        return Err(Error::NotPsd(min));
    }
    Ok(eig.values.into_iter().map(|l| l.max(0.0)).collect())
}
