//! Combs of concrete fixed-order circuits, and the statevector simulation they must agree with.
//!
//! Circuit: prepare `ψ` on system ⊗ ancilla, send the system through slot 1, apply
//! `V2` to system ⊗ ancilla, send the system through slot 2, apply `V3`, and
//! measure one qubit wire (0 = system, 1 = a qubit ancilla) in the computational basis.

use num_complex::Complex;
use num_traits::Zero;

use super::{CombOperator, DIM};
use crate::error::{Error, Result};
use crate::gates::{haar_random_matrix, RandomSource};
use crate::linalg::{validation_tol, ComplexMatrix, StateVector, Unitary2};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct Circuit<T: Real> {
    prep: StateVector<T>,
    v2: ComplexMatrix<T>,
    v3: ComplexMatrix<T>,
    measured_wire: usize,
    ancilla_dim: usize,
}

impl<T: Real> Circuit<T> {
    pub fn new(prep: StateVector<T>, v2: ComplexMatrix<T>, v3: ComplexMatrix<T>, measured_wire: usize) -> Result<Self> {
        let n = prep.dim();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "preparation must live on a qubit times an ancilla, got dimension {n}"
            )));
        }
        let ancilla_dim = n / 2;
        for (name, v) in [("V2", &v2), ("V3", &v3)] {
            if v.rows() != n || v.cols() != n {
                return Err(Error::DimensionMismatch(format!("{name} is {}x{}, expected {n}x{n}", v.rows(), v.cols())));
            }
            let residual = v.unitarity_residual();
            if residual > validation_tol::<T>() * T::lit(n as f64) {
                return Err(Error::NotUnitary { residual: residual.to_f64_lossy() });
            }
        }
        match (measured_wire, ancilla_dim) {
            (0, _) | (1, 2) => {}
            (1, d) => {
                return Err(Error::DimensionMismatch(format!(
                    "wire 1 must be a qubit to be measured, ancilla has dimension {d}"
                )))
            }
            (w, _) => return Err(Error::InvalidInput(format!("measured wire must be 0 or 1, got {w}"))),
        }
        Ok(Circuit { prep, v2, v3, measured_wire, ancilla_dim })
    }

    /// `|0⟩` with no ancilla and no intermediate gates, system measured.
    pub fn trivial() -> Self {
        let id = ComplexMatrix::identity(2);
        Circuit::new(StateVector::basis(2, 0), id.clone(), id, 0).expect("valid")
    }

    /// Haar-random preparation and gates on a qubit system with a `d`-level ancilla.
    pub fn random(ancilla_dim: usize, measured_wire: usize, rng: &mut RandomSource) -> Result<Self> {
        let n = 2 * ancilla_dim;
        let prep = StateVector::new(haar_random_matrix::<T>(n, rng).as_slice()[..n].to_vec())?;
        let v2 = haar_random_matrix(n, rng);
        let v3 = haar_random_matrix(n, rng);
        Circuit::new(prep, v2, v3, measured_wire)
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    /// Map an output index `(system, ancilla)` to `(measured outcome, unmeasured rest)`.
    fn split_output(&self, r: usize) -> (usize, usize) {
        let d = self.ancilla_dim;
        let (s, l) = (r / d, r % d);
        if self.measured_wire == 0 {
            (s, l)
        } else {
            (l, s)
        }
    }

    /// `Σ_m V3[r, (z, m)] Σ_l V2[(y, m), (x, l)] ψ(a, l)` for every output `r`.
    fn amplitudes(&self, a: usize, x: usize, y: usize, z: usize) -> Vec<Complex<T>> {
        let d = self.ancilla_dim;
        let psi = self.prep.amplitudes();
        let f: Vec<Complex<T>> = (0..d)
            .map(|m| (0..d).fold(Complex::zero(), |acc, l| acc + self.v2[(y * d + m, x * d + l)] * psi[a * d + l]))
            .collect();
        (0..2 * d).map(|r| (0..d).fold(Complex::zero(), |acc, m| acc + self.v3[(r, z * d + m)] * f[m])).collect()
    }

    /// The comb `W = Σ_k |w_k⟩⟨w_k|` with `w_k(a, x, y, z, o)` the conjugated amplitude.
    pub fn comb(&self) -> CombOperator<T> {
        let d = self.ancilla_dim;
        let mut w = vec![vec![Complex::<T>::zero(); DIM]; d];
        for a in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    for z in 0..2 {
                        for (r, amp) in self.amplitudes(a, x, y, z).into_iter().enumerate() {
                            let (o, k) = self.split_output(r);
                            w[k][(a << 4) | (x << 3) | (y << 2) | (z << 1) | o] = amp.conj();
                        }
                    }
                }
            }
        }
        let mut m = ComplexMatrix::zeros(DIM, DIM);
        for wk in &w {
            for i in 0..DIM {
                if wk[i].is_zero() {
                    continue;
                }
                for j in 0..DIM {
                    m[(i, j)] += wk[i] * wk[j].conj();
                }
            }
        }
        CombOperator::new_unchecked(m)
    }

    /// Outcome distribution of the measured wire by direct simulation.
    pub fn probabilities(&self, u1: &Unitary2<T>, u2: &Unitary2<T>) -> [T; 2] {
        let d = self.ancilla_dim;
        let on_system = |u: &Unitary2<T>, v: &[Complex<T>]| -> Vec<Complex<T>> {
            (0..2 * d)
                .map(|r| {
                    let (s, l) = (r / d, r % d);
                    u[(s, 0)] * v[l] + u[(s, 1)] * v[d + l]
                })
                .collect()
        };
        let state = on_system(u1, self.prep.amplitudes());
        let state = self.v2.apply(&state).expect("dimensions checked");
        let state = on_system(u2, &state);
        let state = self.v3.apply(&state).expect("dimensions checked");
        let mut p = [T::zero(); 2];
        for (r, amp) in state.iter().enumerate() {
            p[self.split_output(r).0] += amp.norm_sqr();
        }
        p
    }
}

/// Comb of the circuit "prepare, slot 1, `V2`, slot 2, `V3`, measure `measured_wire`".
pub fn build_comb_from_circuit<T: Real>(
    prep: &StateVector<T>,
    v2: &ComplexMatrix<T>,
    v3: &ComplexMatrix<T>,
    measured_wire: usize,
) -> Result<CombOperator<T>> {
    Ok(Circuit::new(prep.clone(), v2.clone(), v3.clone(), measured_wire)?.comb())
}

/// Statevector oracle for [`build_comb_from_circuit`].
pub fn circuit_probabilities<T: Real>(
    prep: &StateVector<T>,
    v2: &ComplexMatrix<T>,
    v3: &ComplexMatrix<T>,
    measured_wire: usize,
    u1: &Unitary2<T>,
    u2: &Unitary2<T>,
) -> Result<[T; 2]> {
    Ok(Circuit::new(prep.clone(), v2.clone(), v3.clone(), measured_wire)?.probabilities(u1, u2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{comb_projection, probability_from_comb, score_operator};
    use crate::gates::haar_random_unitary;

    #[test]
    fn haar_matrices_are_unitary() {
        let mut rng = RandomSource::new(6);
        for n in [1, 2, 4, 6] {
            let u: ComplexMatrix<f64> = haar_random_matrix(n, &mut rng);
            assert!(u.unitarity_residual() < 1e-13);
        }
    }

    #[test]
    fn trivial_circuit_measures_u2_u1_zero() {
        let c = Circuit::<f64>::trivial();
        let w = c.comb();
        let mut rng = RandomSource::new(10);
        for _ in 0..100 {
            let (u1, u2): (Unitary2<f64>, Unitary2<f64>) =
                (haar_random_unitary(&mut rng), haar_random_unitary(&mut rng));
            let amp = u2.compose(&u1)[(0, 0)];
            for i in 0..2 {
                let expect = if i == 0 { amp.norm_sqr() } else { 1.0 - amp.norm_sqr() };
                let s = score_operator(&u1, &u2, i).unwrap();
                let via_trace = s.matrix().trace_of_product(w.matrix()).re;
                assert!((via_trace - expect).abs() <= 1e-12);
                assert!((probability_from_comb(&w, &u1, &u2, i).unwrap() - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn random_circuits_match_simulation_and_are_combs() {
        let mut rng = RandomSource::new(11);
        for (d, wire) in [(1, 0), (2, 0), (2, 1), (3, 0)] {
            for _ in 0..10 {
                let c = Circuit::<f64>::random(d, wire, &mut rng).unwrap();
                let w = c.comb();
                let r = w.residuals();
                assert!(r.is_valid(1e-10), "d={d}: {r}");
                assert!(comb_projection(w.matrix()).unwrap().max_abs_diff(w.matrix()) < 1e-12);
                let (u1, u2) = (haar_random_unitary(&mut rng), haar_random_unitary(&mut rng));
                let p = c.probabilities(&u1, &u2);
                assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
                for (i, &pi) in p.iter().enumerate() {
                    assert!((probability_from_comb(&w, &u1, &u2, i).unwrap() - pi).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_circuits() {
        let id4 = ComplexMatrix::<f64>::identity(4);
        let prep4 = StateVector::basis(4, 0);
        assert!(Circuit::new(StateVector::basis(3, 0), id4.clone(), id4.clone(), 0).is_err());
        assert!(Circuit::new(prep4.clone(), ComplexMatrix::identity(2), id4.clone(), 0).is_err());
        assert!(Circuit::new(prep4.clone(), id4.scale_real(2.0), id4.clone(), 0).is_err());
        assert!(Circuit::new(prep4.clone(), id4.clone(), id4.clone(), 2).is_err());
        let prep6 = StateVector::basis(6, 0);
        let id6 = ComplexMatrix::<f64>::identity(6);
        assert!(Circuit::new(prep6, id6.clone(), id6, 1).is_err());
        assert!(build_comb_from_circuit(&prep4, &id4, &id4, 1).is_ok());
    }
}
