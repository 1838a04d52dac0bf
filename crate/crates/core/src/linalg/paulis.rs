//! Standard single-qubit gates.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::ComplexMatrix;
use crate::scalar::Real;

fn m2<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_rows(&[&[a, b], &[c, d]])
}

pub fn pauli_i<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::identity(2)
}

pub fn pauli_x<T: Real>() -> ComplexMatrix<T> {
    let (o, z) = (Complex::one(), Complex::zero());
    m2(z, o, o, z)
}

pub fn pauli_y<T: Real>() -> ComplexMatrix<T> {
    let z = Complex::zero();
    let i = Complex::i();
    m2(z, -i, i, z)
}

pub fn pauli_z<T: Real>() -> ComplexMatrix<T> {
    let (o, z) = (Complex::<T>::one(), Complex::zero());
    m2(o, z, z, -o)
}

pub fn hadamard<T: Real>() -> ComplexMatrix<T> {
    let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    m2(s, s, s, -s)
}
