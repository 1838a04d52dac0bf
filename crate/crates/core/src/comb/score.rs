//! Score operators `S_i = C(U1) ⊗ C(U2) ⊗ |i⟩⟨i|` and their averages over the
//! commuting and anti-commuting pair measures.
//!
//! Both measures are sampled exactly as the gate factory draws pairs. For the
//! commuting class `U = R(|0⟩⟨0| + e^{iθ}|1⟩⟨1|)R†` and the uniform θ average of
//! `C(U)` is `Σ_j |r_j⟩⟩⟨⟨r_j|` with `r_j = R|j⟩⟨j|R†`, so only `R` is sampled.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use super::{ScoreOperator, DIM};
use crate::error::{Error, Result};
use crate::gates::{haar_random_unitary, GateClass, RandomSource};
use crate::linalg::{paulis, tensor, tensor_vec, ComplexMatrix, Unitary2};
use crate::scalar::Real;

/// Haar draws per class for the objective.
pub const DEFAULT_SAMPLES: usize = 200_000;
const CHUNK: usize = 4096;

/// `vec(U1) ⊗ vec(U2) ⊗ |i⟩`; `S_i = |s⟩⟨s|` for unitary gates.
pub fn score_vector<T: Real>(u1: &Unitary2<T>, u2: &Unitary2<T>, outcome: usize) -> Result<Vec<Complex<T>>> {
    if outcome > 1 {
        return Err(Error::InvalidInput(format!("outcome must be 0 or 1, got {outcome}")));
    }
    let mut e = [Complex::zero(); 2];
    e[outcome] = Complex::new(T::one(), T::zero());
    Ok(tensor_vec(&tensor_vec(&u1.choi_vector(), &u2.choi_vector()), &e))
}

pub fn score_operator<T: Real>(u1: &Unitary2<T>, u2: &Unitary2<T>, outcome: usize) -> Result<ScoreOperator<T>> {
    let s = score_vector(u1, u2, outcome)?;
    Ok(ScoreOperator::exact(ComplexMatrix::outer(&s, &s)))
}

fn vec_of(m: &ComplexMatrix<f64>) -> [Complex<f64>; 4] {
    // |A⟩⟩ index (a, x) = A[x][a]
    [m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]]
}

/// One Haar draw's contribution to `E[C(U1) ⊗ C(U2)]` (16 × 16, row-major).
fn sample_term(class: GateClass, rng: &mut RandomSource) -> Vec<Complex<f64>> {
    let r: Unitary2<f64> = haar_random_unitary(rng);
    match class {
        GateClass::Commute => {
            let mut m = [[Complex::<f64>::zero(); 4]; 4];
            for j in 0..2 {
                let col = [r[(0, j)], r[(1, j)]];
                let proj = ComplexMatrix::outer(&col, &col);
                let v = vec_of(&proj);
                for (a, va) in v.iter().enumerate() {
                    for (b, vb) in v.iter().enumerate() {
                        m[a][b] += va * vb.conj();
                    }
                }
            }
            let mut out = vec![Complex::zero(); 256];
            for i in 0..16 {
                for j in 0..16 {
                    out[i * 16 + j] = m[i / 4][j / 4] * m[i % 4][j % 4];
                }
            }
            out
        }
        _ => {
            let conj = |p: ComplexMatrix<f64>| &(r.matrix() * &p) * &r.adjoint().into_matrix();
            let v = tensor_vec(&vec_of(&conj(paulis::pauli_z())), &vec_of(&conj(paulis::pauli_y())));
            let mut out = vec![Complex::zero(); 256];
            for i in 0..16 {
                for j in 0..16 {
                    out[i * 16 + j] = v[i] * v[j].conj();
                }
            }
            out
        }
    }
}

struct Moments {
    sum: Vec<Complex<f64>>,
    sum_sq: Vec<f64>,
}

fn accumulate(class: GateClass, n: usize, rng: &mut RandomSource) -> Moments {
    let mut acc = Moments { sum: vec![Complex::zero(); 256], sum_sq: vec![0.0; 256] };
    for _ in 0..n {
        let t = sample_term(class, rng);
        for k in 0..256 {
            acc.sum[k] += t[k];
            acc.sum_sq[k] += t[k].norm_sqr();
        }
    }
    acc
}

/// Monte Carlo `E[S_i]` over the commuting or anti-commuting measure.
///
/// Draws are split into fixed chunks, each with its own derived stream, and
/// reduced in chunk order, so the result depends only on `rng` and `n_samples`.
pub fn averaged_score(
    class: GateClass,
    outcome: usize,
    n_samples: usize,
    rng: &RandomSource,
) -> Result<ScoreOperator<f64>> {
    if class == GateClass::Neither {
        return Err(Error::InvalidInput("score averages exist for COMMUTE and ANTICOMMUTE only".into()));
    }
    if outcome > 1 {
        return Err(Error::InvalidInput(format!("outcome must be 0 or 1, got {outcome}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {n_samples}")));
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(n_samples - c * CHUNK);
            accumulate(class, n, &mut rng.derive(c as u64))
        })
        .collect();
    let mut total = Moments { sum: vec![Complex::zero(); 256], sum_sq: vec![0.0; 256] };
    for p in &parts {
        for k in 0..256 {
            total.sum[k] += p.sum[k];
            total.sum_sq[k] += p.sum_sq[k];
        }
    }
    let n = n_samples as f64;
    let mean: Vec<Complex<f64>> = total.sum.iter().map(|s| s / n).collect();
    let se: Vec<f64> = mean
        .iter()
        .zip(&total.sum_sq)
        .map(|(m, sq)| ((sq / n - m.norm_sqr()).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    let pair = ComplexMatrix::from_vec(16, 16, mean)?.hermitian_part();
    let mut proj = ComplexMatrix::zeros(2, 2);
    proj[(outcome, outcome)] = Complex::new(1.0, 0.0);
    Ok(ScoreOperator {
        matrix: tensor(&pair, &proj),
        samples: Some(n_samples),
        max_std_error: Some(se.iter().copied().fold(0.0, f64::max)),
        frobenius_std_error: Some(se.iter().map(|s| s * s).sum::<f64>().sqrt()),
    })
}

/// `Ω = (S₀ᶜ + S₁ᴬ)/2`: the success probability of a comb `W` is `tr(ΩW)`.
/// The two classes use independent streams derived from `rng`.
pub fn objective(n_samples: usize, rng: &RandomSource) -> Result<ScoreOperator<f64>> {
    let c = averaged_score(GateClass::Commute, 0, n_samples, &rng.derive(0))?;
    let a = averaged_score(GateClass::Anticommute, 1, n_samples, &rng.derive(1))?;
    let mut m = c.matrix.scale_real(0.5);
    m.add_scaled(&a.matrix, 0.5);
    debug_assert_eq!(m.rows(), DIM);
    // the two blocks do not overlap, so entrywise errors simply halve
    let max_se = c.max_std_error.zip(a.max_std_error).map(|(x, y)| 0.5 * x.max(y));
    let fro_se = c.frobenius_std_error.zip(a.frobenius_std_error).map(|(x, y)| 0.5 * (x * x + y * y).sqrt());
    Ok(ScoreOperator { matrix: m, samples: Some(n_samples), max_std_error: max_se, frobenius_std_error: fro_se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::swap_slots;
    use crate::gates::anticommuting_pair;
    use crate::linalg::eig_hermitian;

    fn id() -> Unitary2<f64> {
        Unitary2::identity()
    }

    #[test]
    fn exact_score_examples() {
        let s = score_operator(&id(), &id(), 0).unwrap();
        assert!((s.matrix.trace().re - 4.0).abs() < 1e-14);
        let e = eig_hermitian(&s.matrix).unwrap();
        assert_eq!(e.values.iter().filter(|v| v.abs() > 1e-12).count(), 1);

        let x = Unitary2::<f64>::new(paulis::pauli_x()).unwrap();
        let z = Unitary2::<f64>::new(paulis::pauli_z()).unwrap();
        let s1 = score_operator(&x, &z, 1).unwrap();
        assert!((s1.matrix.trace().re - 4.0).abs() < 1e-14);
        assert!(eig_hermitian(&s1.matrix).unwrap().min() > -1e-12);
        let s0 = score_operator(&x, &z, 0).unwrap();
        assert!(((&s0.matrix + &s1.matrix).trace().re - 8.0).abs() < 1e-14);
        assert!(score_operator(&x, &z, 2).is_err());
    }

    #[test]
    fn analytic_theta_average_matches_sampling_theta() {
        // average over θ₁, θ₂ by brute force for one fixed R
        let mut rng = RandomSource::new(31);
        let mut probe = rng.clone();
        let analytic = sample_term(GateClass::Commute, &mut probe);
        let r: Unitary2<f64> = haar_random_unitary(&mut rng);
        let steps = 64;
        let mut brute = vec![Complex::zero(); 256];
        for a in 0..steps {
            for b in 0..steps {
                let t = |k: usize| std::f64::consts::TAU * k as f64 / steps as f64;
                let p = crate::gates::commuting_pair_from(&r, t(a), t(b));
                let s = score_vector(&p.u1, &p.u2, 0).unwrap();
                // drop the |0⟩ factor: entries at even positions
                let v: Vec<_> = s.iter().step_by(2).copied().collect();
                for i in 0..16 {
                    for j in 0..16 {
                        brute[i * 16 + j] += v[i] * v[j].conj() / (steps * steps) as f64;
                    }
                }
            }
        }
        let worst = analytic.iter().zip(&brute).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn averages_have_trace_four_and_are_psd() {
        for class in [GateClass::Commute, GateClass::Anticommute] {
            let s = averaged_score(class, 1, 20_000, &RandomSource::new(3)).unwrap();
            assert!((s.matrix.trace().re - 4.0).abs() < 1e-10);
            assert!(s.matrix.hermiticity_residual() < 1e-12);
            assert!(eig_hermitian(&s.matrix).unwrap().min() > -1e-10);
            assert!(s.max_std_error.unwrap() < 0.01);
        }
        assert!(averaged_score(GateClass::Neither, 0, 100, &RandomSource::new(3)).is_err());
    }

    #[test]
    fn averaging_is_seeded_and_converges() {
        let a = averaged_score(GateClass::Anticommute, 1, 10_000, &RandomSource::new(1)).unwrap();
        let b = averaged_score(GateClass::Anticommute, 1, 10_000, &RandomSource::new(1)).unwrap();
        assert_eq!(a, b);
        let c = averaged_score(GateClass::Anticommute, 1, 10_000, &RandomSource::new(2)).unwrap();
        let diff = (&a.matrix - &c.matrix).frobenius_norm();
        // two independent estimates differ by ~√2 × the Frobenius standard error
        assert!(diff < 5.0 * a.frobenius_std_error.unwrap(), "{diff}");
    }

    #[test]
    fn linear_in_per_pair_probabilities() {
        // tr(E[S] W) equals the average of per-pair tr(S W) for the same draws
        let n = 300;
        let rng = RandomSource::new(8);
        let avg = averaged_score(GateClass::Anticommute, 1, n, &rng).unwrap();
        let w = crate::comb::Circuit::<f64>::random(2, 0, &mut RandomSource::new(4)).unwrap().comb();
        let mut stream = rng.derive(0);
        let mut total = 0.0;
        for _ in 0..n {
            let p = anticommuting_pair::<f64>(&mut stream);
            total += crate::comb::probability_from_comb(&w, &p.u1, &p.u2, 1).unwrap();
        }
        let via_avg = avg.matrix.trace_of_product(w.matrix()).re;
        assert!((via_avg - total / n as f64).abs() < 1e-12);
    }

    #[test]
    fn anticommuting_average_is_swap_symmetric() {
        let s = averaged_score(GateClass::Anticommute, 1, 100_000, &RandomSource::new(5)).unwrap();
        let swapped = swap_slots(&s.matrix).unwrap();
        let diff = (&s.matrix - &swapped).frobenius_norm();
        assert!(diff < 6.0 * s.frobenius_std_error.unwrap(), "{diff}");
        let c = averaged_score(GateClass::Commute, 0, 4_096, &RandomSource::new(5)).unwrap();
        assert!((&c.matrix - &swap_slots(&c.matrix).unwrap()).frobenius_norm() < 1e-12);
    }
}
