use std::sync::OnceLock;

use qswitch::comb::{self, score_operator, swap_slots, Circuit, SdpSolution};
use qswitch::gates::{haar_random_unitary, sample_pairs, RandomSource};
use qswitch::linalg::Unitary2;
use qswitch::CMatrix;

fn solved() -> &'static (CMatrix, SdpSolution) {
    static CELL: OnceLock<(CMatrix, SdpSolution)> = OnceLock::new();
    CELL.get_or_init(|| {
        let omega = comb::objective(comb::DEFAULT_SAMPLES, &RandomSource::new(31)).unwrap().matrix;
        let sol = comb::optimize_fixed_order(&omega).unwrap();
        (omega, sol)
    })
}

#[test]
fn exchanging_the_gates_swaps_the_slots() {
    let mut rng = RandomSource::new(1);
    for _ in 0..50 {
        let (u1, u2): (Unitary2<f64>, Unitary2<f64>) = (haar_random_unitary(&mut rng), haar_random_unitary(&mut rng));
        for i in 0..2 {
            let s12 = score_operator(&u1, &u2, i).unwrap();
            let s21 = score_operator(&u2, &u1, i).unwrap();
            assert!(swap_slots(s12.matrix()).unwrap().max_abs_diff(s21.matrix()) < 1e-14);
        }
    }
}

#[test]
fn optimum_does_not_depend_on_slot_order() {
    let (omega, sol) = solved();
    let swapped = comb::optimize_fixed_order(&swap_slots(omega).unwrap()).unwrap();
    let slack = sol.gap().max(swapped.gap()) + 1e-6;
    assert!((swapped.p_succ - sol.p_succ).abs() <= slack, "{} vs {}", swapped.p_succ, sol.p_succ);
    assert!(swapped.residuals.is_valid(1e-6));
}

#[test]
fn no_circuit_beats_the_certificate() {
    let (omega, sol) = solved();
    let mut rng = RandomSource::new(2);
    let mut best = 0.0f64;
    for k in 0..200 {
        let (d, wire) = [(1, 0), (2, 0), (2, 1), (4, 0)][k % 4];
        let w = Circuit::<f64>::random(d, wire, &mut rng).unwrap().comb();
        best = best.max(omega.trace_of_product(w.matrix()).re);
    }
    assert!(best <= sol.upper_bound + 1e-9, "{best} > {}", sol.upper_bound);
    assert!(sol.p_succ <= sol.upper_bound + 1e-12);
    // generic circuits fall short of the optimum
    assert!(best < sol.p_succ);
}

#[test]
fn optimal_comb_generalizes_to_fresh_pairs() {
    let (_, sol) = solved();
    let pairs = sample_pairs::<f64>(10_000, &mut RandomSource::new(3));
    let v = comb::evaluate_comb(&sol.w_star, &pairs).unwrap();
    assert!((v - 0.9288).abs() <= 0.005, "{v}");
}

#[test]
fn estimate_is_seeded_and_sample_size_shrinks_the_error() {
    let a = comb::objective(20_000, &RandomSource::new(4)).unwrap();
    let b = comb::objective(20_000, &RandomSource::new(4)).unwrap();
    assert_eq!(a, b);
    let small = comb::objective(5_000, &RandomSource::new(4)).unwrap();
    let ratio = small.frobenius_std_error.unwrap() / a.frobenius_std_error.unwrap();
    assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
}
