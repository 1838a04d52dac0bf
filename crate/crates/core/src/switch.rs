//! The 2-SWITCH: two gates applied in a coherent superposition of both orders,
//! with the order controlled by a qubit that is finally measured in the |±⟩ basis.
//!
//! Control ordering is (control, target) with joint index `2·c + t`. Exit port 0
//! corresponds to control outcome |0⟩ after the final Hadamard (the |+⟩ outcome
//! before it), which carries the anti-commutator branch.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::paulis::hadamard;
use crate::linalg::{norm, tensor, ComplexMatrix, StateVector, Unitary2};
use crate::scalar::Real;

/// Normalized state on control ⊗ target.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState<T: Real>(StateVector<T>);

impl<T: Real> JointState<T> {
    pub fn new(state: StateVector<T>) -> Result<Self> {
        if state.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "joint control/target state must have dimension 4, got {}",
                state.dim()
            )));
        }
        Ok(JointState(state))
    }

    pub fn state(&self) -> &StateVector<T> {
        &self.0
    }

    /// Amplitude for control `c`, target `t`.
    pub fn amplitude(&self, c: usize, t: usize) -> Complex<T> {
        self.0.amplitudes()[2 * c + t]
    }

    /// Probability that the control is found in `|c⟩`.
    pub fn control_probability(&self, c: usize) -> T {
        self.amplitude(c, 0).norm_sqr() + self.amplitude(c, 1).norm_sqr()
    }

    /// Unnormalized target state conditioned on control `c`.
    pub fn target_branch(&self, c: usize) -> [Complex<T>; 2] {
        [self.amplitude(c, 0), self.amplitude(c, 1)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Commute,
    Anticommute,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Commute => "COMMUTE",
            Verdict::Anticommute => "ANTICOMMUTE",
        })
    }
}

/// Exit-port probabilities of one run of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchOutcome<T> {
    pub p0: T,
    pub p1: T,
    pub verdict: Verdict,
    /// Set when `p0 ≈ p1`: the gates violate the commute/anti-commute promise
    /// and the verdict carries no information.
    pub degenerate: bool,
}

/// Which gate acts first in a fixed-order circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    /// `U1` first, then `U2`: applies `U2·U1`.
    U1First,
    /// `U2` first, then `U1`: applies `U1·U2`.
    U2First,
}

/// Separation below which `p0` and `p1` are reported as a degenerate tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

fn check_qubit<T: Real>(psi: &StateVector<T>) -> Result<()> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("target must be a qubit, got dimension {}", psi.dim())));
    }
    Ok(())
}

/// `½|0⟩⊗{U1,U2}ψ + ½|1⟩⊗[U1,U2]ψ`
pub fn two_switch_output<T: Real>(u1: &Unitary2<T>, u2: &Unitary2<T>, psi: &StateVector<T>) -> Result<JointState<T>> {
    check_qubit(psi)?;
    let half = T::lit(0.5);
    let anti = u1.anticommutator(u2)?.apply(psi.amplitudes())?;
    let comm = u1.commutator(u2)?.apply(psi.amplitudes())?;
    let amplitudes = anti.iter().chain(&comm).map(|a| a * half).collect();
    JointState::new(StateVector::new(amplitudes)?)
}

/// The same state built gate by gate: prepare `|+⟩ψ`, apply `U1U2` on the
/// control-0 branch and `U2U1` on the control-1 branch, then a Hadamard on the control.
pub fn two_switch_output_by_circuit<T: Real>(
    u1: &Unitary2<T>,
    u2: &Unitary2<T>,
    psi: &StateVector<T>,
) -> Result<JointState<T>> {
    check_qubit(psi)?;
    let input = StateVector::<T>::plus().tensor(psi);
    let p0 = StateVector::<T>::basis(2, 0).density();
    let p1 = StateVector::<T>::basis(2, 1).density();
    let u12 = u1.compose(u2);
    let u21 = u2.compose(u1);
    let controlled = &tensor(&p0, &u12) + &tensor(&p1, &u21);
    let beamsplitter = tensor(&hadamard::<T>(), &ComplexMatrix::identity(2));
    let out = input.evolve(&controlled)?.evolve(&beamsplitter)?;
    JointState::new(out)
}

/// `p0 = ‖{U1,U2}ψ‖²/4`, `p1 = ‖[U1,U2]ψ‖²/4`, and the resulting verdict.
pub fn exit_probabilities<T: Real>(
    u1: &Unitary2<T>,
    u2: &Unitary2<T>,
    psi: &StateVector<T>,
) -> Result<SwitchOutcome<T>> {
    check_qubit(psi)?;
    let quarter = T::lit(0.25);
    let anti = u1.anticommutator(u2)?.apply(psi.amplitudes())?;
    let comm = u1.commutator(u2)?.apply(psi.amplitudes())?;
    let p0 = norm(&anti).powi(2) * quarter;
    let p1 = norm(&comm).powi(2) * quarter;
    Ok(outcome(p0, p1))
}

pub(crate) fn outcome<T: Real>(p0: T, p1: T) -> SwitchOutcome<T> {
    let verdict = if p0 >= p1 { Verdict::Commute } else { Verdict::Anticommute };
    SwitchOutcome { p0, p1, verdict, degenerate: (p0 - p1).abs() <= T::lit(TIE_TOLERANCE) }
}

/// Apply both gates in a definite order.
pub fn fixed_order_apply<T: Real>(
    u1: &Unitary2<T>,
    u2: &Unitary2<T>,
    psi: &StateVector<T>,
    order: Order,
) -> Result<StateVector<T>> {
    check_qubit(psi)?;
    let product = match order {
        Order::U1First => u2.compose(u1),
        Order::U2First => u1.compose(u2),
    };
    psi.evolve(&product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis::*;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn u(m: ComplexMatrix<f64>) -> Unitary2<f64> {
        Unitary2::new(m).unwrap()
    }

    fn arb_unitary() -> impl Strategy<Value = Unitary2<f64>> {
        (0.0f64..6.3, 0.0f64..6.3, 0.0f64..6.3, 0.0f64..std::f64::consts::FRAC_PI_2).prop_map(|(alpha, pa, pb, t)| {
            let a = C::from_polar(t.cos(), pa);
            let b = C::from_polar(t.sin(), pb);
            u(ComplexMatrix::from_rows(&[&[a, -b.conj()], &[b, a.conj()]])).with_phase(alpha)
        })
    }

    fn arb_state() -> impl Strategy<Value = StateVector<f64>> {
        (0.0f64..std::f64::consts::FRAC_PI_2, 0.0f64..6.3)
            .prop_map(|(t, p)| StateVector::new(vec![C::new(t.cos(), 0.0), C::from_polar(t.sin(), p)]).unwrap())
    }

    #[test]
    fn identities_exit_port_zero() {
        let psi = StateVector::normalized(vec![C::new(0.3, 0.1), C::new(-0.2, 0.9)]).unwrap();
        let out = two_switch_output(&Unitary2::identity(), &Unitary2::identity(), &psi).unwrap();
        assert!((out.control_probability(0) - 1.0).abs() < 1e-12);
        let branch = out.target_branch(0);
        assert!((branch[0] - psi.amplitudes()[0]).norm() < 1e-12);
        assert!((branch[1] - psi.amplitudes()[1]).norm() < 1e-12);
    }

    #[test]
    fn x_y_goes_to_port_one_with_i_sigma_z() {
        let psi = StateVector::basis(2, 0);
        let out = two_switch_output(&u(pauli_x()), &u(pauli_y()), &psi).unwrap();
        assert!(out.control_probability(0) < 1e-24);
        // [X,Y]/2 = iZ, so the target is i|0⟩
        let branch = out.target_branch(1);
        assert!((branch[0] - C::new(0.0, 1.0)).norm() < 1e-12);
        assert!(branch[1].norm() < 1e-12);
    }

    #[test]
    fn x_hadamard_splits_evenly() {
        for psi in [StateVector::basis(2, 0), StateVector::basis(2, 1), StateVector::plus()] {
            let out = two_switch_output(&u(pauli_x()), &u(hadamard()), &psi).unwrap();
            assert!((out.control_probability(0) - 0.5).abs() < 1e-12);
            let o = exit_probabilities(&u(pauli_x()), &u(hadamard()), &psi).unwrap();
            assert!((o.p0 - 0.5).abs() < 1e-12 && (o.p1 - 0.5).abs() < 1e-12);
            assert!(o.degenerate);
            assert_eq!(o.verdict, Verdict::Commute);
        }
    }

    #[test]
    fn pauli_exit_probabilities() {
        let psi = StateVector::plus();
        let o = exit_probabilities(&u(pauli_x()), &u(pauli_x()), &psi).unwrap();
        assert_eq!((o.p0, o.p1, o.verdict, o.degenerate), (1.0, 0.0, Verdict::Commute, false));
        let o = exit_probabilities(&u(pauli_x()), &u(pauli_z()), &psi).unwrap();
        assert_eq!((o.p0, o.p1, o.verdict), (0.0, 1.0, Verdict::Anticommute));
    }

    #[test]
    fn fixed_order_examples() {
        let psi = StateVector::basis(2, 0);
        let out = fixed_order_apply(&u(pauli_x()), &u(pauli_z()), &psi, Order::U1First).unwrap();
        assert!((out.amplitudes()[1] - C::new(-1.0, 0.0)).norm() < 1e-15);
        let out = fixed_order_apply(&u(pauli_z()), &u(pauli_z()), &psi, Order::U2First).unwrap();
        assert!((out.inner(&psi).norm() - 1.0).abs() < 1e-15);
        let h = u(hadamard());
        let out = fixed_order_apply(&Unitary2::identity(), &h, &psi, Order::U1First).unwrap();
        assert_eq!(out, psi.evolve(&h).unwrap());
    }

    #[test]
    fn rejects_wrong_target_dimension() {
        let psi = StateVector::<f64>::basis(4, 0);
        assert!(exit_probabilities(&Unitary2::identity(), &Unitary2::identity(), &psi).is_err());
    }

    proptest! {
        #[test]
        fn closed_form_matches_circuit(u1 in arb_unitary(), u2 in arb_unitary(), psi in arb_state()) {
            let a = two_switch_output(&u1, &u2, &psi).unwrap();
            let b = two_switch_output_by_circuit(&u1, &u2, &psi).unwrap();
            let diff = a.state().amplitudes().iter().zip(b.state().amplitudes())
                .map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(diff <= 1e-12);
        }

        #[test]
        fn probabilities_sum_to_one(u1 in arb_unitary(), u2 in arb_unitary(), psi in arb_state()) {
            let o = exit_probabilities(&u1, &u2, &psi).unwrap();
            prop_assert!((o.p0 + o.p1 - 1.0).abs() <= 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&o.p0));
        }

        #[test]
        fn global_phases_are_invisible(u1 in arb_unitary(), u2 in arb_unitary(), psi in arb_state(),
                                       a in 0.0f64..6.3, b in 0.0f64..6.3) {
            let o = exit_probabilities(&u1, &u2, &psi).unwrap();
            let p = exit_probabilities(&u1.with_phase(a), &u2.with_phase(b), &psi).unwrap();
            prop_assert!((o.p0 - p.p0).abs() <= 1e-12 && (o.p1 - p.p1).abs() <= 1e-12);
        }
    }
}
