//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex;
use num_traits::Zero;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues in ascending order; eigenvectors are the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(Λ) V†`
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(|l| l)
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Input must be Hermitian to within `1e-10 · max(1, ‖M‖_F)` (scaled up for `f32`);
/// only the Hermitian part is used.
pub fn eig_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = m.frobenius_norm().max(T::one());
    let residual = m.hermiticity_residual();
    if residual > super::validation_tol::<T>() * scale {
        return Err(Error::NotHermitian { residual: residual.to_f64_lossy() });
    }
    Ok(jacobi(m.hermitian_part()))
}

/// As [`eig_hermitian`], starting from a unitary `guess` whose columns are
/// approximate eigenvectors (e.g. the previous iterate's). Much cheaper when
/// the guess is good; correct for any unitary guess.
pub fn eig_hermitian_from<T: Real>(m: &ComplexMatrix<T>, guess: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if guess.rows() != m.rows() || !guess.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvector guess is {}x{}, matrix is {}x{}",
            guess.rows(),
            guess.cols(),
            m.rows(),
            m.cols()
        )));
    }
    let rotated = &(&guess.adjoint() * m) * guess;
    let inner = eig_hermitian(&rotated)?;
    Ok(HermitianEigen { values: inner.values, vectors: guess * &inner.vectors })
}

fn jacobi<T: Real>(mut a: ComplexMatrix<T>) -> HermitianEigen<T> {
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let fro = a.frobenius_norm();
    let target = T::epsilon() * fro;
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= target || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == T::zero() || r <= T::epsilon() * target {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / r;
                let zeta = (aqq - app) / (two * r);
                let t = if zeta == T::zero() {
                    T::one()
                } else {
                    zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] acting on coordinates (p, q)
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                rotate(&mut a, &mut v, p, q, c, s, gqp, gqq);
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(app - t * r, T::zero());
                a[(q, q)] = Complex::new(aqq + t * r, T::zero());
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = v[(i, old)];
        }
    }
    HermitianEigen { values, vectors }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate<T: Real>(
    a: &mut ComplexMatrix<T>,
    v: &mut ComplexMatrix<T>,
    p: usize,
    q: usize,
    c: T,
    s: T,
    gqp: Complex<T>,
    gqq: Complex<T>,
) {
    let n = a.rows();
    // A ← A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * gqp;
        a[(k, q)] = akp * s + akq * gqq;
    }
    // A ← G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * gqp.conj();
        a[(q, k)] = apk * s + aqk * gqq.conj();
    }
    // V ← V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * gqp;
        v[(k, q)] = vkp * s + vkq * gqq;
    }
}

/// Nearest positive semidefinite matrix in Frobenius norm, with the minimum eigenvalue of the input.
pub fn project_psd<T: Real>(m: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, T)> {
    let eig = eig_hermitian(m)?;
    Ok((eig.reconstruct_with(|l| l.max(T::zero())), eig.min()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis::*;
    use crate::linalg::{choi, Unitary2};
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn arb_hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix<f64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let m = ComplexMatrix::from_vec(n, n, v.into_iter().map(|(r, i)| C::new(r, i)).collect()).unwrap();
            m.hermitian_part()
        })
    }

    #[test]
    fn pauli_spectra() {
        let e = eig_hermitian(&pauli_z::<f64>()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        let e = eig_hermitian(&pauli_x::<f64>()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        // eigenvector for −1 is ∝ (1, −1)/√2
        let v = (e.vectors[(0, 0)], e.vectors[(1, 0)]);
        assert!((v.0 + v.1).norm() < 1e-14);
        assert!((v.0.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn choi_identity_spectrum() {
        let e = eig_hermitian(&choi(&Unitary2::<f64>::identity())).unwrap();
        let expected = [0.0, 0.0, 0.0, 2.0];
        for (got, want) in e.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::<f64>::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
        assert!(eig_hermitian(&ComplexMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let m = ComplexMatrix::<f32>::from_real(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let e = eig_hermitian(&m).unwrap();
        let s2 = 2f32.sqrt();
        for (got, want) in e.values.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-5);
        }
    }

    #[test]
    fn degenerate_32x32() {
        let m = ComplexMatrix::<f64>::identity(32).scale_real(3.0);
        let e = eig_hermitian(&m).unwrap();
        assert!(e.values.iter().all(|&l| (l - 3.0).abs() < 1e-14));
    }

    #[test]
    fn warm_start_matches_cold() {
        let base = ComplexMatrix::<f64>::from_real(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let cold = eig_hermitian(&base).unwrap();
        let mut nudged = base.clone();
        nudged[(0, 2)] = C::new(0.01, 0.02);
        nudged[(2, 0)] = C::new(0.01, -0.02);
        let warm = eig_hermitian_from(&nudged, &cold.vectors).unwrap();
        let fresh = eig_hermitian(&nudged).unwrap();
        for (a, b) in warm.values.iter().zip(&fresh.values) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(warm.reconstruct().max_abs_diff(&nudged) < 1e-13);
        assert!(eig_hermitian_from(&nudged, &ComplexMatrix::identity(2)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn reconstruction_and_orthonormality(m in arb_hermitian(12)) {
            let e = eig_hermitian(&m).unwrap();
            let err = (&e.reconstruct() - &m).frobenius_norm();
            prop_assert!(err <= 1e-9 * m.frobenius_norm().max(1e-300));
            let vtv = &e.vectors.adjoint() * &e.vectors;
            prop_assert!(vtv.max_abs_diff(&ComplexMatrix::identity(12)) < 1e-12);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn psd_projection_is_idempotent(m in arb_hermitian(8)) {
            let (p, _) = project_psd(&m).unwrap();
            let (pp, min) = project_psd(&p).unwrap();
            prop_assert!(min >= -1e-12);
            prop_assert!(pp.max_abs_diff(&p) < 1e-12);
        }
    }
}
