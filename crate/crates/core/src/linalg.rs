//! Dense complex matrix kernel.
//!
//! Everything in the crate is built on [`ComplexMatrix`], a square row-major
//! matrix of `Complex64`. The sizes involved are small (at most a few hundred
//! rows), so the kernel favours plain loops over blocking or sparsity.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Entrywise absolute tolerance for Hermiticity checks.
pub const TAU_HERM: f64 = 1e-10;
/// Relative tolerance for eigendecomposition residuals.
pub const TAU_EIG: f64 = 1e-9;
/// Eigenvalues above `-TAU_PSD` count as nonnegative.
pub const TAU_PSD: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "matrix side length must be positive",
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Row-major construction from real parts only.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    /// The rank-one projector `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// `self + s * other`, the workhorse of every linear combination.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        assert_eq!(self.dim, other.dim, "add_scaled: dimension mismatch");
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b * s)
                .collect(),
        }
    }

    pub fn add_scaled_assign(&mut self, other: &Self, s: f64) {
        assert_eq!(self.dim, other.dim, "add_scaled_assign: dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul: dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "mul_vec: dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }

    /// `<v| A |v>`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Complex64 {
        inner(v, &self.mul_vec(v))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.add_scaled(rhs, 1.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.add_scaled(rhs, -1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// A matrix verified to be Hermitian within [`TAU_HERM`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let max_deviation = matrix.hermiticity_defect();
        if max_deviation > TAU_HERM {
            return Err(Error::NotHermitian { max_deviation });
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is Hermitian by construction (e.g. a real
    /// combination of Hermitian operators).
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_hermitian(1e-8));
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr(rho A)` for a Hermitian `rho`; always real.
    pub fn expectation(&self, rho: &ComplexMatrix) -> Result<f64> {
        Ok(hs_inner(rho, &self.matrix)?.re)
    }

    /// `A + shift * 1`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            matrix: self
                .matrix
                .add_scaled(&ComplexMatrix::identity(self.dim()), shift),
        }
    }

    /// Real linear combination `s * A + t * B`.
    pub fn combine(&self, s: f64, other: &Self, t: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s).add_scaled(&other.matrix, t),
        }
    }
}

/// Kronecker product `a (x) b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn tensor_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Hilbert-Schmidt scalar product `Tr(a^dagger b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "hs_inner",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    // Tr(a^dagger b) = sum_ij conj(a_ij) b_ij
    Ok(a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<u|v>` with the first argument conjugated.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [Complex64]) -> f64 {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial transpose of a `d_a * d_b` square matrix on one tensor factor.
pub fn partial_transpose(
    rho: &ComplexMatrix,
    d_a: usize,
    d_b: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix> {
    if rho.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch {
            context: "partial_transpose",
            expected: d_a * d_b,
            found: rho.dim(),
        });
    }
    Ok(ComplexMatrix::from_fn(rho.dim(), |r, c| {
        let (i, k) = (r / d_b, r % d_b);
        let (j, l) = (c / d_b, c % d_b);
        match subsystem {
            Subsystem::B => rho[(i * d_b + l, j * d_b + k)],
            Subsystem::A => rho[(j * d_b + k, i * d_b + l)],
        }
    }))
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_vector(&self) -> Vec<Complex64> {
        self.vectors.column(0)
    }

    /// `V diag(w) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.vectors;
        let n = v.dim();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation is a diagonal phase that makes the pivot real followed by a
/// real Givens rotation, so the accumulated transform stays unitary to
/// machine precision.
pub fn eig_hermitian(a: &HermitianOperator) -> Result<HermitianEigen> {
    jacobi_eigen(a.matrix())
}

pub(crate) fn jacobi_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.dim();
    let mut m = a.clone();
    // Drop the anti-Hermitian noise so the iteration sees an exact Hermitian input.
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let h = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = h;
            m[(j, i)] = h.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = hs_norm(&m).max(f64::MIN_POSITIVE);
    let off_norm = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += m[(i, j)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= 1e-15 * scale {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let abs = apq.norm();
                if abs <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if abs < 1e-18 * (app.abs() + aqq.abs()) {
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    continue;
                }
                let phase = apq / abs;
                let theta = (aqq - app) / (2.0 * abs);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-i arg apq}, c e^{-i arg apq}]]
                let ph = phase.conj();
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = ph * (-s);
                let g_qq = ph * c;

                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * g_pp + akq * g_qp;
                    m[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    m[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_eigen(a)?.values)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// the R diagonal absorbed into Q.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| random_gaussian(rng)).collect())
        .collect();
    // Modified Gram-Schmidt; R_jj = <q_j, a_j> is real positive by construction,
    // which is exactly the phase-fixed QR.
    for j in 0..dim {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = inner(&done[k], &rest[0]);
            for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * q;
            }
        }
        normalize(&mut cols[j]);
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Standard complex normal sample (independent real and imaginary parts).
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniformly random unit vector in `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim).map(|_| random_gaussian(rng)).collect();
    normalize(&mut v);
    v
}
