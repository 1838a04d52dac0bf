//! Fixed-order strategies as quantum combs, and the best success probability
//! any of them reaches on the commute / anti-commute discrimination task.
//!
//! Spaces are ordered `P1 P2 P3 P4 P5`: input and output of the first slot,
//! input and output of the second slot, and the measured qubit. All are qubits,
//! so operators are 32 × 32 with `P1` the most significant index.
//!
//! Convention: the probability of outcome `i` is `tr(S_i W)` with
//! `S_i = C(U1) ⊗ C(U2) ⊗ |i⟩⟨i|` and the unnormalized Choi operator
//! `C(U) = Σ_ab |a⟩⟨b| ⊗ U|a⟩⟨b|U†`. With that choice the comb of a concrete
//! circuit is built from the *complex conjugate* of its process amplitudes
//! (see [`build_comb_from_circuit`]); no partial transposes appear anywhere.

mod circuit;
mod constraints;
mod score;
mod sdp;

pub use circuit::{build_comb_from_circuit, circuit_probabilities, Circuit};
pub use constraints::{
    affine_projection, average_out, comb_projection, comb_residuals, swap_slots, trace_zero_projection, CombResiduals,
};
pub use score::{averaged_score, objective, score_operator, score_vector, DEFAULT_SAMPLES};
pub use sdp::{
    evaluate_comb, optimize_fixed_order, optimize_fixed_order_with, pair_success_probabilities, probability_from_comb,
    SdpSettings, SdpSolution,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// Qubit dimension of each of `P1 … P5`.
pub const SPACES: [usize; 5] = [2; 5];
/// Full operator dimension, 2⁵.
pub const DIM: usize = 32;
/// `tr W` of a deterministic comb with two qubit slots.
pub const COMB_TRACE: f64 = 4.0;
/// Default tolerance for [`CombOperator::new`].
pub const COMB_TOL: f64 = 1e-8;

/// A 32 × 32 score operator, optionally a Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct ScoreOperator<T: Real> {
    pub matrix: ComplexMatrix<T>,
    /// Haar draws behind the estimate (`None` when exact).
    pub samples: Option<usize>,
    /// Largest entrywise standard error of the estimate.
    pub max_std_error: Option<f64>,
    /// Frobenius norm of the entrywise standard errors.
    pub frobenius_std_error: Option<f64>,
}

impl<T: Real> ScoreOperator<T> {
    pub fn exact(matrix: ComplexMatrix<T>) -> Self {
        ScoreOperator { matrix, samples: None, max_std_error: None, frobenius_std_error: None }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }
}

/// A deterministic two-slot comb: PSD and satisfying the recursive trace conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct CombOperator<T: Real> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> CombOperator<T> {
    /// Validate every comb condition to `tol`.
    pub fn new(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        let r = comb_residuals(&matrix)?;
        if !r.is_valid(tol.to_f64_lossy()) {
            return Err(Error::InvalidInput(format!("not a valid comb: {r}")));
        }
        Ok(CombOperator { matrix })
    }

    /// Skip validation; for operators valid by construction.
    pub fn new_unchecked(matrix: ComplexMatrix<T>) -> Self {
        CombOperator { matrix }
    }

    /// `I/8`: discard everything and guess uniformly.
    pub fn maximally_mixed() -> Self {
        CombOperator { matrix: ComplexMatrix::identity(DIM).scale_real(T::lit(COMB_TRACE / DIM as f64)) }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn residuals(&self) -> CombResiduals {
        comb_residuals(&self.matrix).expect("32x32 comb")
    }
}

/// JSON form of an operator: subsystem dims plus row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl OperatorJson {
    pub fn from_matrix<T: Real>(m: &ComplexMatrix<T>, dims: &[usize]) -> Result<Self> {
        if dims.iter().product::<usize>() != m.rows() || !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} do not describe a {}x{} operator",
                m.rows(),
                m.cols()
            )));
        }
        Ok(OperatorJson {
            dims: dims.to_vec(),
            re: m.as_slice().iter().map(|z| z.re.to_f64_lossy()).collect(),
            im: m.as_slice().iter().map(|z| z.im.to_f64_lossy()).collect(),
        })
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix<f64>> {
        let n: usize = self.dims.iter().product();
        if self.re.len() != n * n || self.im.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for dims {:?}, got {} real / {} imaginary",
                n * n,
                self.dims,
                self.re.len(),
                self.im.len()
            )));
        }
        let data = self.re.iter().zip(&self.im).map(|(&r, &i)| num_complex::Complex::new(r, i)).collect();
        ComplexMatrix::from_vec(n, n, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_mixed_is_a_comb() {
        let w = CombOperator::<f64>::maximally_mixed();
        let r = w.residuals();
        assert!(r.is_valid(1e-12), "{r}");
        assert!((r.min_eigenvalue - 0.125).abs() < 1e-12);
        assert!(CombOperator::new(ComplexMatrix::<f64>::identity(DIM), 1e-8).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = CombOperator::<f64>::maximally_mixed();
        let j = OperatorJson::from_matrix(w.matrix(), &SPACES).unwrap();
        let text = serde_json::to_string(&j).unwrap();
        let back: OperatorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), *w.matrix());
        assert!(OperatorJson::from_matrix(w.matrix(), &[2, 2]).is_err());
        let short = OperatorJson { dims: vec![2], re: vec![1.0], im: vec![0.0] };
        assert!(short.to_matrix().is_err());
    }
}
