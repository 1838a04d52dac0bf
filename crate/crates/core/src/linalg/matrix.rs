use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Build from row-major entries. Rejects length mismatch and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Build a square matrix from nested rows.
    ///
    /// # Panics
    /// If the rows are ragged. Meant for literals in code and tests.
    pub fn from_rows(rows: &[&[Complex<T>]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged matrix literal");
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        ComplexMatrix { rows: n, cols: m, data }
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Real-valued matrix from row-major `f64` literals.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        let data = values.iter().map(|&v| Complex::new(T::lit(v), T::zero())).collect();
        ComplexMatrix { rows, cols, data }
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &[Complex<T>], b: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m.data[i * b.len() + j] = ai * bj.conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Complex::zero(), |a, b| a + b)
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    /// Frobenius inner product `tr(A† B)`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut acc = Complex::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let out = &mut m.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(m)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: T) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Commutator `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.try_sub(&other.matmul(self)?)
    }

    /// Anti-commutator `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.try_add(&other.matmul(self)?)
    }

    /// `‖A − A†‖_F`, or infinity for non-square input.
    pub fn hermiticity_residual(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let n = self.rows;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(A + A†) / 2`
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        let adj = self.adjoint();
        self.zip_with(&adj, |a, b| (a + b) * half)
    }

    /// `‖A A† − I‖_F`, or infinity for non-square input.
    pub fn unitarity_residual(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let p = self.matmul(&self.adjoint()).expect("square");
        p.try_sub(&Self::identity(self.rows)).expect("same shape").frobenius_norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; use the `try_*` methods for checked arithmetic.
impl<'a, T: Real> Mul<&'a ComplexMatrix<T>> for &'a ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &'a ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<'a, T: Real> Add<&'a ComplexMatrix<T>> for &'a ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &'a ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<'a, T: Real> Sub<&'a ComplexMatrix<T>> for &'a ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &'a ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

/// Kronecker product `A ⊗ B`.
pub fn tensor<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij.is_zero() {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    m[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all<T: Real>(factors: &[&ComplexMatrix<T>]) -> ComplexMatrix<T> {
    factors.iter().fold(ComplexMatrix::identity(1), |acc, f| tensor(&acc, f))
}

/// Kronecker product of vectors.
pub fn tensor_vec<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Trace out the subsystems listed in `traced` from a square operator on
/// `subsystem_dims[0] ⊗ subsystem_dims[1] ⊗ ...` (first factor most significant).
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    subsystem_dims: &[usize],
    traced: &[usize],
) -> Result<ComplexMatrix<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("partial trace of non-square {}x{} matrix", m.rows, m.cols)));
    }
    let total: usize = subsystem_dims.iter().product();
    if total != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {subsystem_dims:?} multiply to {total}, matrix is {}x{}",
            m.rows, m.cols
        )));
    }
    if let Some(&bad) = traced.iter().find(|&&t| t >= subsystem_dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "traced index {bad} out of range for {} subsystems",
            subsystem_dims.len()
        )));
    }
    let is_traced: Vec<bool> = (0..subsystem_dims.len()).map(|k| traced.contains(&k)).collect();
    let kept_dims: Vec<usize> = subsystem_dims.iter().zip(&is_traced).filter(|(_, &t)| !t).map(|(&d, _)| d).collect();
    let traced_dims: Vec<usize> = subsystem_dims.iter().zip(&is_traced).filter(|(_, &t)| t).map(|(&d, _)| d).collect();
    let kept: usize = kept_dims.iter().product();
    let env: usize = traced_dims.iter().product();

    // strides of each subsystem in the full index
    let mut strides = vec![1usize; subsystem_dims.len()];
    for k in (0..subsystem_dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * subsystem_dims[k + 1];
    }
    let kept_strides: Vec<usize> = strides.iter().zip(&is_traced).filter(|(_, &t)| !t).map(|(&s, _)| s).collect();
    let traced_strides: Vec<usize> = strides.iter().zip(&is_traced).filter(|(_, &t)| t).map(|(&s, _)| s).collect();

    let offsets = |local: usize, dims: &[usize], strides: &[usize]| -> usize {
        let mut rem = local;
        let mut off = 0;
        for k in (0..dims.len()).rev() {
            off += (rem % dims[k]) * strides[k];
            rem /= dims[k];
        }
        off
    };
    let kept_off: Vec<usize> = (0..kept).map(|i| offsets(i, &kept_dims, &kept_strides)).collect();
    let env_off: Vec<usize> = (0..env).map(|e| offsets(e, &traced_dims, &traced_strides)).collect();

    let mut out = ComplexMatrix::zeros(kept, kept);
    for (i, &ri) in kept_off.iter().enumerate() {
        for (j, &cj) in kept_off.iter().enumerate() {
            let mut acc = Complex::zero();
            for &e in &env_off {
                acc += m[(ri + e, cj + e)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// `min_φ ‖A − e^{iφ} B‖_F`, which equals `sqrt(‖A‖² + ‖B‖² − 2|tr(A†B)|)`.
///
/// The minimizing phase is `arg tr(B†A)`; the norm is then evaluated directly
/// because the expanded form loses half the significant digits near zero.
pub fn frobenius_distance_up_to_phase<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    a.check_same_shape(b)?;
    let overlap = b.inner(a);
    let phase = if overlap.norm() > T::zero() { overlap / overlap.norm() } else { Complex::one() };
    let d2: T = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y * phase).norm_sqr()).sum();
    Ok(d2.sqrt())
}
