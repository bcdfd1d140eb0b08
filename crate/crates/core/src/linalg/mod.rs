//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Plain row-major storage over `num_complex::Complex64`, sized for the joint
//! space of two N-level systems with N <= 8. All operations are pure; values
//! are immutable after construction and safe to share between threads.
//!
//! Basis convention: the one-based kets |1>..|N> map to zero-based indices
//! 0..N-1, and the joint ket |sigma sigma'> maps to flat index
//! `N*(sigma-1) + (sigma'-1)`. The first tensor factor belongs to player A,
//! the second to player B.

mod eig;

pub use eig::{eig_hermitian, eig_unitary};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Frobenius tolerance for exact algebraic identities.
pub const TOL_EXACT: f64 = 1e-10;
/// Tolerance for quantities that pass through an eigendecomposition.
pub const TOL_EIG: f64 = 1e-8;
/// Largest dimension a Kronecker product is allowed to produce.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Which tensor factor of a bipartite system an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        for (i, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
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

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Complex64]) {
        assert_eq!(col.len(), self.rows);
        for (i, &z) in col.iter().enumerate() {
            self.set(i, j, z);
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ||m^+ m - 1||_F, zero for unitary matrices.
    pub fn unitarity_residual(&self) -> f64 {
        assert!(self.is_square(), "unitarity of a non-square matrix");
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                // (m^+ m)[i][j] = sum_k conj(m[k][i]) m[k][j]
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += self[(k, i)].conj() * self[(k, j)];
                }
                if i == j {
                    s -= 1.0;
                }
                acc += s.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// True iff ||m^+ m - 1||_F <= tol.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// ||m - m^+||_F, zero for Hermitian matrices.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square(), "hermiticity of a non-square matrix");
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Strips the global phase by rotating the first entry of magnitude
    /// above 1e-12 onto the positive real axis.
    pub fn phase_normalized(&self) -> Self {
        match self.data.iter().find(|z| z.norm() > 1e-12) {
            Some(e) => self.scale(e.conj() / e.norm()),
            None => self.clone(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut s = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(v) {
                s += a * b;
            }
            *slot = s;
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn det(&self) -> Complex64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .norm()
                        .partial_cmp(&a[j * n + col].norm())
                        .unwrap()
                })
                .unwrap();
            if a[pivot * n + col].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for i in (col + 1)..n {
                let factor = a[i * n + col] / p;
                for j in col..n {
                    let t = a[col * n + j];
                    a[i * n + j] -= factor * t;
                }
            }
        }
        det
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product of two square matrices with block ordering such that
/// `(a (x) b)(x (x) y) = (a x) (x) (b y)` under flat index `n*i + j`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn kron_capped(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    assert!(a.is_square() && b.is_square(), "kron expects square factors");
    let (na, nb) = (a.rows, b.rows);
    let n = na * nb;
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for i1 in 0..na {
        for j1 in 0..na {
            let block = a[(i1, j1)];
            if block == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i2 in 0..nb {
                for j2 in 0..nb {
                    out.data[(i1 * nb + i2) * n + (j1 * nb + j2)] = block * b[(i2, j2)];
                }
            }
        }
    }
    Ok(out)
}

/// Commutator `a b - b a`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.matmul(b).sub(&b.matmul(a))
}

/// Frobenius distance between two matrices after stripping global phases.
pub fn phase_stripped_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.phase_normalized().dist(&b.phase_normalized())
}

/// Frobenius distance minimized over a global phase on `b`:
/// `min_theta ||a - e^{i theta} b||_F`. Continuous in both arguments, which
/// matters when it serves as an optimization objective. The optimal phase is
/// applied explicitly so the result stays accurate down to machine noise.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    let overlap: Complex64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Reduced density matrix: traces the named subsystem out of an (n*n)x(n*n)
/// density matrix over the joint space of two n-level systems.
pub fn partial_trace(rho: &ComplexMatrix, subsystem: Subsystem, n: usize) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(Error::NotSquare {
            rows: rho.rows,
            cols: rho.cols,
        });
    }
    if rho.rows != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: rho.rows,
        });
    }
    let herm = rho.hermiticity_residual();
    if herm > TOL_EXACT {
        return Err(Error::NotHermitian {
            residual: herm,
            tol: TOL_EXACT,
        });
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > TOL_EXACT {
        return Err(Error::InvalidParams(format!(
            "density matrix trace {} is not 1",
            tr
        )));
    }
    let out = match subsystem {
        // trace out B: rho_A[a][a'] = sum_b rho[a n + b][a' n + b]
        Subsystem::B => ComplexMatrix::from_fn(n, n, |a, ap| {
            (0..n).map(|b| rho[(a * n + b, ap * n + b)]).sum()
        }),
        // trace out A: rho_B[b][b'] = sum_a rho[a n + b][a n + b']
        Subsystem::A => ComplexMatrix::from_fn(n, n, |b, bp| {
            (0..n).map(|a| rho[(a * n + b, a * n + bp)]).sum()
        }),
    };
    Ok(out)
}

/// Normalized complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: Vec<Complex64>,
}

impl StateVector {
    /// Validates unit norm (within 1e-10) and finiteness.
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        for (i, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        let norm = data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL_EXACT {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { data })
    }

    pub(crate) fn new_unchecked(data: Vec<Complex64>) -> Self {
        debug_assert!(
            (data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs() < 1e-8,
            "state vector drifted off the unit sphere"
        );
        Self { data }
    }

    /// Computational basis state |index> in the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut data = vec![Complex64::new(0.0, 0.0); dim];
        data[index] = Complex64::new(1.0, 0.0);
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |self> (x) |other>.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        Self { data }
    }

    /// |psi><psi|.
    pub fn density_matrix(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| self.data[i] * self.data[j].conj())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Applies a square matrix, asserting dimension agreement. The result is
    /// only re-normalized in debug builds; callers must pass near-unitary
    /// matrices.
    pub fn evolved(&self, m: &ComplexMatrix) -> Self {
        Self::new_unchecked(m.apply(&self.data))
    }
}
