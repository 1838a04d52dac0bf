//! `max tr(ΩW)` over deterministic two-slot combs, by ADMM.
//!
//! The feasible set is the intersection of the affine comb set `A` and the PSD
//! cone, so the splitting alternates the closed-form projection onto `A`
//! (with an objective step) and an eigenvalue clip. The scaled multiplier gives
//! a dual certificate: for any Hermitian `Λ`, repairing it so that `Ω − Λ` is
//! orthogonal to the comb directions yields
//! `max ≤ tr((Ω − Λ)·I/8) + 4·λ_max(Λ)`, valid whether or not ADMM has converged.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{
    affine_projection, comb_residuals, score_vector, trace_zero_projection, CombOperator, CombResiduals, COMB_TRACE,
    DIM,
};
use crate::error::{Error, Result};
use crate::gates::{GateClass, GatePair};
use crate::linalg::{eig_hermitian, eig_hermitian_from, ComplexMatrix, Unitary2};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSettings {
    /// Initial penalty; adapted by residual balancing.
    pub rho: f64,
    pub max_iterations: usize,
    /// Stop only once `‖X − Z‖_F` is below this…
    pub primal_tol: f64,
    /// …the objective moved less than this over `window` iterations…
    pub objective_tol: f64,
    pub window: usize,
    /// …and the certified gap is below this.
    pub gap_tol: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            rho: 1.0,
            max_iterations: 50_000,
            primal_tol: 1e-7,
            objective_tol: 1e-8,
            window: 100,
            gap_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    /// `tr(Ω W*)` for the returned, exactly feasible comb.
    pub p_succ: f64,
    /// Dual-certified upper bound on the optimum.
    pub upper_bound: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub residuals: CombResiduals,
    pub w_star: CombOperator<f64>,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.p_succ
    }
}

pub fn optimize_fixed_order(omega: &ComplexMatrix<f64>) -> Result<SdpSolution> {
    optimize_fixed_order_with(omega, &SdpSettings::default())
}

/// Upper bound on `max tr(ΩW)` from a trial multiplier `lambda`.
fn dual_bound(omega: &ComplexMatrix<f64>, lambda: &ComplexMatrix<f64>) -> Result<f64> {
    let m = omega - lambda;
    // Λ' = Ω − (M − P₀M): Ω − Λ' is orthogonal to every trace-zero comb direction
    let lam = &(omega - &m) + &trace_zero_projection(&m)?;
    let top = eig_hermitian(&lam.hermitian_part())?.max();
    let offset = (omega - &lam).trace().re * COMB_TRACE / DIM as f64;
    Ok(offset + COMB_TRACE * top)
}

/// Move an affine-feasible `w` toward `I/8` just enough to make it PSD.
fn repair(w: ComplexMatrix<f64>) -> Result<ComplexMatrix<f64>> {
    let w = w.hermitian_part();
    let min = eig_hermitian(&w)?.min();
    if min >= 0.0 {
        return Ok(w);
    }
    let centre = COMB_TRACE / DIM as f64;
    let t = -min / (centre - min);
    let mut out = w.scale_real(1.0 - t);
    for k in 0..DIM {
        out[(k, k)] += Complex::new(t * centre, 0.0);
    }
    Ok(out)
}

pub fn optimize_fixed_order_with(omega: &ComplexMatrix<f64>, settings: &SdpSettings) -> Result<SdpSolution> {
    if !omega.is_square() || omega.rows() != DIM {
        return Err(Error::DimensionMismatch(format!(
            "objective must be 32x32, got {}x{}",
            omega.rows(),
            omega.cols()
        )));
    }
    if omega.hermiticity_residual() > 1e-10 * omega.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual: omega.hermiticity_residual() });
    }
    let omega = omega.hermitian_part();
    let mut rho = settings.rho;
    let mut z = CombOperator::<f64>::maximally_mixed().into_matrix();
    let mut u = ComplexMatrix::zeros(DIM, DIM);
    let mut basis = ComplexMatrix::identity(DIM);
    let mut last_objective = f64::NAN;
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
    let mut bound = f64::INFINITY;

    for it in 1..=settings.max_iterations {
        // X ← Π_A(Z − U + Ω/ρ)
        let mut target = &z - &u;
        target.add_scaled(&omega, 1.0 / rho);
        let x = affine_projection(&target)?;
        // Z ← Π_PSD(X + U)
        let shifted = (&x + &u).hermitian_part();
        let eig = eig_hermitian_from(&shifted, &basis)?;
        let z_new = eig.reconstruct_with(|l| l.max(0.0));
        basis = eig.vectors;
        let diff = &x - &z_new;
        u = &u + &diff;
        primal = diff.frobenius_norm();
        dual = rho * (&z_new - &z).frobenius_norm();
        z = z_new;

        if it % settings.window == 0 {
            let objective = omega.trace_of_product(&x).re;
            let stalled = (objective - last_objective).abs() <= settings.objective_tol;
            last_objective = objective;
            if primal <= settings.primal_tol && stalled {
                bound = dual_bound(&omega, &u.scale_real(rho))?;
                if bound - objective <= settings.gap_tol {
                    return finish(&omega, &z, bound, it, primal, dual);
                }
            }
            // residual balancing
            if primal > 10.0 * dual {
                rho *= 2.0;
                u = u.scale_real(0.5);
            } else if dual > 10.0 * primal {
                rho *= 0.5;
                u = u.scale_real(2.0);
            }
        }
    }
    if bound.is_infinite() {
        bound = dual_bound(&omega, &u.scale_real(rho))?;
    }
    // measured against the nearest feasible comb, so the gap stays a certificate
    let value = omega.trace_of_product(&repair(affine_projection(&z)?)?).re;
    Err(Error::NonConvergence {
        iterations: settings.max_iterations,
        primal_residual: primal,
        psd_residual: dual,
        gap: bound - value,
    })
}

fn finish(
    omega: &ComplexMatrix<f64>,
    z: &ComplexMatrix<f64>,
    upper_bound: f64,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
) -> Result<SdpSolution> {
    let w = repair(affine_projection(z)?)?;
    let residuals = comb_residuals(&w)?;
    let p_succ = omega.trace_of_product(&w).re;
    Ok(SdpSolution {
        p_succ,
        upper_bound: upper_bound.max(p_succ),
        iterations,
        primal_residual,
        dual_residual,
        residuals,
        w_star: CombOperator::new_unchecked(w),
    })
}

/// `tr(S_i W)`, clamped into [0, 1] when within 1e-8 of it.
pub fn probability_from_comb<T: Real>(
    w: &CombOperator<T>,
    u1: &Unitary2<T>,
    u2: &Unitary2<T>,
    outcome: usize,
) -> Result<T> {
    let s = score_vector(u1, u2, outcome)?;
    let ws = w.matrix().apply(&s)?;
    let p = s.iter().zip(&ws).map(|(a, b)| (a.conj() * b).re).fold(T::zero(), |acc, v| acc + v);
    let slack = T::lit(1e-8);
    if !(p >= -slack && p <= T::one() + slack) {
        return Err(Error::InvalidComb { value: p.to_f64_lossy() });
    }
    Ok(p.max(T::zero()).min(T::one()))
}

/// Probability of the correct outcome (0 for commuting, 1 for anti-commuting) per pair.
pub fn pair_success_probabilities<T: Real>(w: &CombOperator<T>, pairs: &[GatePair<T>]) -> Result<Vec<T>> {
    pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let outcome = match p.label {
                GateClass::Commute => 0,
                GateClass::Anticommute => 1,
                GateClass::Neither => return Err(Error::Unlabeled { index: k }),
            };
            probability_from_comb(w, &p.u1, &p.u2, outcome)
        })
        .collect()
}

/// Mean correct-outcome probability over labeled pairs.
pub fn evaluate_comb<T: Real>(w: &CombOperator<T>, pairs: &[GatePair<T>]) -> Result<T> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no pairs to evaluate".into()));
    }
    let probs = pair_success_probabilities(w, pairs)?;
    Ok(probs.iter().copied().fold(T::zero(), |a, b| a + b) / T::lit(probs.len() as f64))
}
