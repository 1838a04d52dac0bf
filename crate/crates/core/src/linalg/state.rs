use std::ops::Deref;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::eig::eig_hermitian;
use super::{tensor, ComplexMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance used when validating unitarity and normalization:
/// 1e-10 for `f64`, scaled up to a few hundred ulps for `f32`.
pub fn validation_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(200.0))
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wrap amplitudes that already have unit norm.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = norm(&amplitudes);
        if amplitudes.is_empty() || (norm - T::one()).abs() > validation_tol::<T>() {
            return Err(Error::NotNormalized { norm: norm.to_f64_lossy() });
        }
        Ok(StateVector { amplitudes })
    }

    /// Rescale to unit norm; rejects the zero vector.
    pub fn normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::NotNormalized { norm: n.to_f64_lossy() });
        }
        let inv = T::one() / n;
        Ok(StateVector { amplitudes: amplitudes.into_iter().map(|a| a * inv).collect() })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amplitudes = vec![Complex::zero(); dim];
        amplitudes[index] = Complex::one();
        StateVector { amplitudes }
    }

    /// `|+⟩ = (|0⟩ + |1⟩)/√2`
    pub fn plus() -> Self {
        let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        StateVector { amplitudes: vec![s, s] }
    }

    /// `|−⟩ = (|0⟩ − |1⟩)/√2`
    pub fn minus() -> Self {
        let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        StateVector { amplitudes: vec![s, -s] }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        StateVector { amplitudes: super::tensor_vec(&self.amplitudes, &other.amplitudes) }
    }

    /// Apply a unitary; the result keeps unit norm up to rounding.
    pub fn evolve(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        Ok(StateVector { amplitudes: u.apply(&self.amplitudes)? })
    }

    pub fn density(&self) -> ComplexMatrix<T> {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

pub(crate) fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

pub(crate) fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// A 2×2 unitary: a single polarization gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
#[serde(try_from = "ComplexMatrix<T>", into = "ComplexMatrix<T>")]
pub struct Unitary2<T: Real>(ComplexMatrix<T>);

impl<T: Real> Unitary2<T> {
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, validation_tol::<T>())
    }

    pub fn with_tolerance(m: ComplexMatrix<T>, tol: T) -> Result<Self> {
        if (m.rows(), m.cols()) != (2, 2) {
            return Err(Error::DimensionMismatch(format!("gate must be 2x2, got {}x{}", m.rows(), m.cols())));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let residual = m.unitarity_residual();
        if residual > tol {
            return Err(Error::NotUnitary { residual: residual.to_f64_lossy() });
        }
        Ok(Unitary2(m))
    }

    /// Closest unitary in Frobenius norm (polar factor `M (M†M)^{-1/2}`).
    /// Used to clean up matrices entered with limited precision.
    pub fn nearest(m: &ComplexMatrix<T>) -> Result<Self> {
        if (m.rows(), m.cols()) != (2, 2) {
            return Err(Error::DimensionMismatch("gate must be 2x2".into()));
        }
        let gram = m.adjoint().matmul(m)?.hermitian_part();
        let eig = eig_hermitian(&gram)?;
        if eig.values[0] <= T::epsilon() * T::lit(16.0) * eig.values[1].max(T::one()) {
            return Err(Error::NotUnitary { residual: m.unitarity_residual().to_f64_lossy() });
        }
        let inv_sqrt: Vec<Complex<T>> =
            eig.values.iter().map(|&l| Complex::new(T::one() / l.sqrt(), T::zero())).collect();
        let v = &eig.vectors;
        let s = &(v * &ComplexMatrix::from_diag(&inv_sqrt)) * &v.adjoint();
        Unitary2::new(m * &s)
    }

    pub fn identity() -> Self {
        Unitary2(ComplexMatrix::identity(2))
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Unitary2(self.0.adjoint())
    }

    pub fn compose(&self, other: &Self) -> Self {
        Unitary2(&self.0 * &other.0)
    }

    pub fn with_phase(&self, phase: T) -> Self {
        Unitary2(self.0.scale(Complex::from_polar(T::one(), phase)))
    }

    /// `R U R†`
    pub fn conjugate_by(&self, r: &Self) -> Self {
        Unitary2(&(&r.0 * &self.0) * &r.0.adjoint())
    }

    /// Vectorization `|U⟩⟩ = Σ_a |a⟩ ⊗ U|a⟩`, input index most significant.
    pub fn choi_vector(&self) -> [Complex<T>; 4] {
        let u = &self.0;
        [u[(0, 0)], u[(1, 0)], u[(0, 1)], u[(1, 1)]]
    }

    pub fn entries(&self) -> [Complex<T>; 4] {
        let s = self.0.as_slice();
        [s[0], s[1], s[2], s[3]]
    }
}

impl<T: Real> Deref for Unitary2<T> {
    type Target = ComplexMatrix<T>;

    fn deref(&self) -> &ComplexMatrix<T> {
        &self.0
    }
}

impl<T: Real> TryFrom<ComplexMatrix<T>> for Unitary2<T> {
    type Error = Error;

    fn try_from(m: ComplexMatrix<T>) -> Result<Self> {
        Unitary2::new(m)
    }
}

impl<T: Real> From<Unitary2<T>> for ComplexMatrix<T> {
    fn from(u: Unitary2<T>) -> Self {
        u.0
    }
}

/// Unnormalized Choi operator `Σ_{ij} |i⟩⟨j| ⊗ U|i⟩⟨j|U†` (trace 2, rank 1).
/// Input space first, output space second.
pub fn choi<T: Real>(u: &Unitary2<T>) -> ComplexMatrix<T> {
    let v = u.choi_vector();
    ComplexMatrix::outer(&v, &v)
}

/// Choi operator of an arbitrary matrix after checking it is a 2×2 unitary.
pub fn choi_checked<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    Ok(choi(&Unitary2::new(m.clone())?))
}

/// Choi operator assembled from its definition, kept for cross-checks.
pub fn choi_from_definition<T: Real>(u: &Unitary2<T>) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let ket_ij = ComplexMatrix::outer(
                StateVector::<T>::basis(2, i).amplitudes(),
                StateVector::<T>::basis(2, j).amplitudes(),
            );
            let image = &(u.matrix() * &ket_ij) * &u.matrix().adjoint();
            out = &out + &tensor(&ket_ij, &image);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis::*;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn arb_unitary() -> impl Strategy<Value = Unitary2<f64>> {
        // U = e^{iα} [[a, -b*], [b, a*]] with |a|²+|b|²=1
        (0.0f64..6.3, 0.0f64..6.3, 0.0f64..6.3, 0.0f64..std::f64::consts::FRAC_PI_2).prop_map(|(alpha, pa, pb, t)| {
            let a = C::from_polar(t.cos(), pa);
            let b = C::from_polar(t.sin(), pb);
            let m = ComplexMatrix::from_rows(&[&[a, -b.conj()], &[b, a.conj()]]);
            Unitary2::new(m).unwrap().with_phase(alpha)
        })
    }

    #[test]
    fn rejects_non_unitary() {
        let m = ComplexMatrix::<f64>::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(Unitary2::new(m), Err(Error::NotUnitary { .. })));
        assert!(Unitary2::new(ComplexMatrix::<f64>::identity(3)).is_err());
        assert!(choi_checked(&ComplexMatrix::<f64>::from_real(2, 2, &[2.0, 0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn choi_of_identity_is_bell_projector() {
        let c = choi(&Unitary2::<f64>::identity());
        let phi = [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)];
        assert_eq!(c, ComplexMatrix::outer(&phi, &phi));
        assert!((c.trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn choi_of_x() {
        let c = choi(&Unitary2::new(pauli_x::<f64>()).unwrap());
        let v = [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)];
        assert_eq!(c, ComplexMatrix::outer(&v, &v));
    }

    #[test]
    #[allow(clippy::approx_constant)] // deliberately rounded entries
    fn nearest_repairs_rounded_hadamard() {
        let m = ComplexMatrix::<f64>::from_real(2, 2, &[0.7071, 0.7071, 0.7071, -0.7071]);
        assert!(Unitary2::new(m.clone()).is_err());
        let u = Unitary2::nearest(&m).unwrap();
        assert!(u.max_abs_diff(&hadamard()) < 1e-12);
    }

    #[test]
    fn state_validation() {
        assert!(StateVector::<f64>::new(vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]).is_err());
        assert!(StateVector::<f64>::normalized(vec![C::new(0.0, 0.0); 2]).is_err());
        let s = StateVector::<f64>::normalized(vec![C::new(3.0, 0.0), C::new(0.0, 4.0)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn choi_matches_definition_and_ignores_phase(u in arb_unitary(), phi in 0.0f64..6.3) {
            let c = choi(&u);
            prop_assert!(c.max_abs_diff(&choi_from_definition(&u)) < 1e-12);
            prop_assert!(c.max_abs_diff(&choi(&u.with_phase(phi))) < 1e-12);
            prop_assert!((c.trace().re - 2.0).abs() < 1e-10);
        }

        #[test]
        fn choi_is_rank_one_psd(u in arb_unitary()) {
            let e = eig_hermitian(&choi(&u)).unwrap();
            prop_assert!(e.values[0] >= -1e-10);
            prop_assert!(e.values[2] <= 1e-9);
            prop_assert!((e.values[3] - 2.0).abs() < 1e-10);
        }
    }
}
