//! The linear part of the comb conditions.
//!
//! With `ₓW = tr_X(W) ⊗ I_X / d_X` (identity-averaging on `X`, put back in place),
//! the Hermitian operators satisfying the homogeneous recursion form the range of
//! the orthogonal projector
//!
//! `P(W) = W − ₅W + ₄₅W − ₃₄₅W + ₂₃₄₅W`,
//!
//! and adding the trace condition gives the affine set `{W : P(W) = W, tr W = 4}`.

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{COMB_TRACE, DIM, SPACES};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, tensor, ComplexMatrix};
use crate::scalar::Real;

/// `tr_X(W) ⊗ I_X / d_X` with `X = spaces`, subsystems kept in place.
pub fn average_out<T: Real>(w: &ComplexMatrix<T>, dims: &[usize], spaces: &[usize]) -> Result<ComplexMatrix<T>> {
    let n: usize = dims.iter().product();
    if !w.is_square() || w.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} do not describe a {}x{} operator",
            w.rows(),
            w.cols()
        )));
    }
    if let Some(&bad) = spaces.iter().find(|&&s| s >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("subsystem {bad} out of range")));
    }
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let d_x: usize = spaces.iter().map(|&s| dims[s]).product();
    // split every index into its X part and the rest
    let x_part = |i: usize| spaces.iter().map(|&s| (i / strides[s]) % dims[s] * strides[s]).sum::<usize>();
    let env: Vec<usize> = (0..n).filter(|&i| i == x_part(i)).collect();
    let base: Vec<usize> = (0..n).map(|i| i - x_part(i)).collect();
    let xoff: Vec<usize> = (0..n).map(x_part).collect();

    let scale = T::one() / T::lit(d_x as f64);
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if xoff[i] != xoff[j] {
                continue;
            }
            let mut acc = Complex::zero();
            for &e in &env {
                acc += w[(base[i] + e, base[j] + e)];
            }
            out[(i, j)] = acc * scale;
        }
    }
    Ok(out)
}

/// Orthogonal projector onto operators obeying the homogeneous comb recursion.
pub fn comb_projection<T: Real>(w: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let a = |spaces: &[usize]| average_out(w, &SPACES, spaces);
    let mut out = w.clone();
    out.add_scaled(&a(&[4])?, -T::one());
    out.add_scaled(&a(&[3, 4])?, T::one());
    out.add_scaled(&a(&[2, 3, 4])?, -T::one());
    out.add_scaled(&a(&[1, 2, 3, 4])?, T::one());
    Ok(out)
}

/// Projection onto the trace-zero part of the comb subspace (the directions
/// along which the affine comb set extends).
pub fn trace_zero_projection<T: Real>(w: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let mut p = comb_projection(w)?;
    let shift = p.trace().re / T::lit(DIM as f64);
    for k in 0..DIM {
        p[(k, k)] -= Complex::new(shift, T::zero());
    }
    Ok(p)
}

/// Nearest point (Frobenius) of the affine set `{P(W) = W, tr W = 4}`.
pub fn affine_projection<T: Real>(w: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let mut p = comb_projection(w)?;
    let shift = (T::lit(COMB_TRACE) - p.trace().re) / T::lit(DIM as f64);
    for k in 0..DIM {
        p[(k, k)] += Complex::new(shift, T::zero());
    }
    Ok(p)
}

/// Exchange the two slots: `(P1 P2 P3 P4 P5) → (P3 P4 P1 P2 P5)`.
pub fn swap_slots<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !m.is_square() || m.rows() != DIM {
        return Err(Error::DimensionMismatch(format!(
            "slot swap needs a 32x32 operator, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    // index = 8·(P1P2) + 2·(P3P4) + P5 with each pair in 0..4
    let perm = |i: usize| {
        let (first, second, out) = (i >> 3, (i >> 1) & 3, i & 1);
        (second << 3) | (first << 1) | out
    };
    let mut out = ComplexMatrix::zeros(DIM, DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            out[(perm(i), perm(j))] = m[(i, j)];
        }
    }
    Ok(out)
}

/// How far an operator is from being a comb; all affine entries are Frobenius norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombResiduals {
    pub min_eigenvalue: f64,
    /// `‖tr₅W − W₂ ⊗ I₄‖` with `W₂ = tr₄₅W / 2`.
    pub last_slot: f64,
    /// `‖tr₃W₂ − W₁ ⊗ I₂‖` with `W₁ = tr₂₃W₂ / 2`.
    pub first_slot: f64,
    /// `|tr W₁ − 1|`
    pub normalization: f64,
    pub hermiticity: f64,
}

impl CombResiduals {
    pub fn max_affine(&self) -> f64 {
        self.last_slot.max(self.first_slot).max(self.normalization).max(self.hermiticity)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.max_affine() <= tol && self.min_eigenvalue >= -tol
    }
}

impl fmt::Display for CombResiduals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "min eigenvalue {:.3e}, last-slot {:.3e}, first-slot {:.3e}, normalization {:.3e}, hermiticity {:.3e}",
            self.min_eigenvalue, self.last_slot, self.first_slot, self.normalization, self.hermiticity
        )
    }
}

/// Check the recursive conditions directly with partial traces.
pub fn comb_residuals<T: Real>(w: &ComplexMatrix<T>) -> Result<CombResiduals> {
    if !w.is_square() || w.rows() != DIM {
        return Err(Error::DimensionMismatch(format!("a comb is 32x32, got {}x{}", w.rows(), w.cols())));
    }
    let half = T::lit(0.5);
    let id2 = ComplexMatrix::identity(2);
    let hermiticity = w.hermiticity_residual();
    let h = w.hermitian_part();
    let min_eigenvalue = eig_hermitian(&h)?.min();

    let w4 = partial_trace(&h, &SPACES, &[4])?; // P1..P4
    let w2 = partial_trace(&w4, &[2, 2, 2, 2], &[3])?.scale_real(half); // P1..P3
    let last_slot = (&w4 - &tensor(&w2, &id2)).frobenius_norm();
    let w2_3 = partial_trace(&w2, &[2, 2, 2], &[2])?; // P1P2
    let w1 = partial_trace(&w2_3, &[2, 2], &[1])?.scale_real(half); // P1
    let first_slot = (&w2_3 - &tensor(&w1, &id2)).frobenius_norm();
    let normalization = (w1.trace().re - T::one()).abs();

    Ok(CombResiduals {
        min_eigenvalue: min_eigenvalue.to_f64_lossy(),
        last_slot: last_slot.to_f64_lossy(),
        first_slot: first_slot.to_f64_lossy(),
        normalization: normalization.to_f64_lossy(),
        hermiticity: hermiticity.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type M = ComplexMatrix<f64>;

    fn arb_hermitian() -> impl Strategy<Value = M> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), DIM * DIM).prop_map(|v| {
            M::from_vec(DIM, DIM, v.into_iter().map(|(r, i)| Complex::new(r, i)).collect()).unwrap().hermitian_part()
        })
    }

    #[test]
    fn averaging_matches_partial_trace() {
        let mut m = M::zeros(DIM, DIM);
        for i in 0..DIM {
            for j in 0..DIM {
                m[(i, j)] = Complex::new((i * 7 + j) as f64 % 5.0, (i as f64 - j as f64) * 0.1);
            }
        }
        let avg = average_out(&m, &SPACES, &[3, 4]).unwrap();
        let reduced = partial_trace(&m, &SPACES, &[3, 4]).unwrap();
        let expect = tensor(&reduced, &M::identity(4)).scale_real(0.25);
        assert!(avg.max_abs_diff(&expect) < 1e-14);
        // a middle subsystem stays in place
        let mid = average_out(&m, &SPACES, &[1]).unwrap();
        let mut expect = M::zeros(DIM, DIM);
        for i in 0..DIM {
            for j in 0..DIM {
                if (i >> 3) & 1 == (j >> 3) & 1 {
                    let (i0, j0) = (i & !0b01000, j & !0b01000);
                    expect[(i, j)] = (m[(i0, j0)] + m[(i0 | 0b01000, j0 | 0b01000)]) * 0.5;
                }
            }
        }
        assert!(mid.max_abs_diff(&expect) < 1e-14);
        assert!(matches!(average_out(&m, &[2, 2, 2], &[1]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn identity_is_fixed() {
        let id = M::identity(DIM);
        assert!(comb_projection(&id).unwrap().max_abs_diff(&id) < 1e-14);
        let w = affine_projection(&M::zeros(DIM, DIM)).unwrap();
        assert!(w.max_abs_diff(&M::identity(DIM).scale_real(0.125)) < 1e-15);
    }

    #[test]
    fn swap_is_an_involution() {
        let mut m = M::zeros(DIM, DIM);
        m[(0b01000, 0b00010)] = Complex::new(1.0, 0.0);
        let s = swap_slots(&m).unwrap();
        assert_eq!(s[(0b00010, 0b01000)], Complex::new(1.0, 0.0));
        assert_eq!(swap_slots(&s).unwrap(), m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn projector_is_idempotent_and_self_adjoint(a in arb_hermitian(), b in arb_hermitian()) {
            let pa = comb_projection(&a).unwrap();
            prop_assert!(comb_projection(&pa).unwrap().max_abs_diff(&pa) < 1e-10);
            let pb = comb_projection(&b).unwrap();
            prop_assert!((pa.inner(&b) - a.inner(&pb)).norm() < 1e-10);
            let aff = affine_projection(&a).unwrap();
            prop_assert!(affine_projection(&aff).unwrap().max_abs_diff(&aff) < 1e-10);
        }

        #[test]
        fn projection_satisfies_the_recursion(a in arb_hermitian()) {
            // the affine characterization and the recursive one agree
            let w = affine_projection(&a).unwrap();
            let r = comb_residuals(&w).unwrap();
            prop_assert!(r.max_affine() < 1e-10, "{}", r);
            // and a recursion-satisfying operator is a fixed point
            prop_assert!(comb_projection(&w).unwrap().max_abs_diff(&w) < 1e-10);
        }

        #[test]
        fn generic_operators_violate_the_recursion(a in arb_hermitian()) {
            let r = comb_residuals(&a).unwrap();
            let moved = (&comb_projection(&a).unwrap() - &a).frobenius_norm();
            prop_assert!(r.last_slot > 1e-3 && moved > 1e-3);
        }
    }
}
