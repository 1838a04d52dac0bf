//! Jones-calculus waveplates and quarter–half–quarter gate compilation.
//!
//! Conventions: `QWP(0) = diag(1, i)`, `HWP(0) = diag(1, −1)`, a plate at fast-axis
//! angle θ is `R(θ)·J·R(−θ)` with `R` the real rotation, and in a triple the
//! first-listed plate acts first on the photon. These reproduce every row of the
//! published Pauli table exactly (see the `tables` module tests).
//!
//! On the Poincaré sphere a plate at θ is a rotation by its retardance about the
//! equatorial axis at 2θ, so `Q(c)·H(b)·Q(a)` collapses to a ZYZ Euler product
//! `Rz(2c)·Ry(4b − 2a − 2c)ᵀ·Rz(−2a)`; `decompose` inverts that map in closed form.

use num_complex::Complex;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_distance_up_to_phase, paulis, ComplexMatrix, Unitary2};
use crate::scalar::Real;

/// Fast-axis angles in degrees, in the order the photon meets the plates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveplateTriple<T> {
    pub q_first: T,
    pub h: T,
    pub q_last: T,
}

impl<T: Real> WaveplateTriple<T> {
    pub fn new(q_first: T, h: T, q_last: T) -> Self {
        WaveplateTriple { q_first, h, q_last }
    }

    pub fn is_finite(&self) -> bool {
        self.q_first.is_finite() && self.h.is_finite() && self.q_last.is_finite()
    }

    pub fn to_unitary(&self) -> Unitary2<T> {
        triple_to_unitary(self)
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.q_first, self.h, self.q_last]
    }
}

fn rotation<T: Real>(theta_deg: T) -> ComplexMatrix<T> {
    let t = theta_deg.to_radians();
    let (s, c) = t.sin_cos();
    let re = |v: T| Complex::new(v, T::zero());
    ComplexMatrix::from_rows(&[&[re(c), re(-s)], &[re(s), re(c)]])
}

fn rotated<T: Real>(theta_deg: T, diag: [Complex<T>; 2]) -> Unitary2<T> {
    let r = rotation(theta_deg);
    let m = &(&r * &ComplexMatrix::from_diag(&diag)) * &r.transpose();
    Unitary2::new(m).expect("rotated retarder is unitary")
}

/// Quarter-wave plate with fast axis at `theta` degrees.
pub fn qwp<T: Real>(theta: T) -> Unitary2<T> {
    rotated(theta, [Complex::one(), Complex::i()])
}

/// Half-wave plate with fast axis at `theta` degrees.
pub fn hwp<T: Real>(theta: T) -> Unitary2<T> {
    rotated(theta, [Complex::one(), -Complex::one()])
}

/// `QWP(q_last) · HWP(h) · QWP(q_first)`.
pub fn triple_to_unitary<T: Real>(t: &WaveplateTriple<T>) -> Unitary2<T> {
    qwp(t.q_last).compose(&hwp(t.h)).compose(&qwp(t.q_first))
}

/// Round-trip tolerance of `decompose`: 1e-8 in `f64`.
pub fn decompose_tol<T: Real>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(1000.0))
}

/// Closed-form residual above which the numerical polish is attempted.
fn polish_threshold<T: Real>() -> T {
    decompose_tol::<T>() * T::lit(0.01)
}

/// Waveplate angles (degrees) realizing `u` up to a global phase.
///
/// Angles are reported with `q` and `h` wrapped into (−90°, 90°].
pub fn decompose<T: Real>(u: &Unitary2<T>) -> Result<WaveplateTriple<T>> {
    let closed = decompose_closed_form(u);
    let residual = frobenius_distance_up_to_phase(&closed.to_unitary(), u)?;
    if residual <= polish_threshold::<T>() {
        return Ok(closed);
    }
    let polished = polish(u, closed)?;
    let residual = frobenius_distance_up_to_phase(&polished.to_unitary(), u)?;
    if residual <= decompose_tol::<T>() {
        Ok(polished)
    } else {
        Err(Error::DecompositionFailed { residual: residual.to_f64_lossy() })
    }
}

/// Quaternion coordinates `(w, x, y, z)` of `U/√det U = w − i(x σ_z + y σ_x + z σ_y)`.
fn su2_coordinates<T: Real>(u: &Unitary2<T>) -> [T; 4] {
    let m = u.matrix();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let su = m.scale(Complex::<T>::one() / det.sqrt());
    let half = T::lit(0.5);
    let tr = |p: &ComplexMatrix<T>| p.trace_of_product(&su);
    let w = su.trace().re * half;
    let x = -tr(&paulis::pauli_z()).im * half;
    let y = -tr(&paulis::pauli_x()).im * half;
    let z = -tr(&paulis::pauli_y()).im * half;
    [w, x, y, z]
}

pub(crate) fn decompose_closed_form<T: Real>(u: &Unitary2<T>) -> WaveplateTriple<T> {
    let [w, x, y, z] = su2_coordinates(u);
    let two = T::lit(2.0);
    let half_beta = (x * x + y * y).sqrt().atan2((w * w + z * z).sqrt());
    let sum = z.atan2(w); // (α + γ)/2
    let diff = (-x).atan2(y); // (α − γ)/2
    let alpha = sum + diff;
    let gamma = sum - diff;
    let beta = two * half_beta;
    let c = alpha / two;
    let a = -gamma / two;
    let b = (-beta + two * a + two * c) / T::lit(4.0);
    WaveplateTriple::new(wrap_half_turn(a.to_degrees()), wrap_half_turn(b.to_degrees()), wrap_half_turn(c.to_degrees()))
}

/// Wrap into (−90°, 90°]; waveplates are invariant under 180° rotations.
pub fn wrap_half_turn<T: Real>(deg: T) -> T {
    let period = T::lit(180.0);
    let half = T::lit(90.0);
    let mut r = deg - period * ((deg + half) / period).floor();
    if r <= -half {
        r += period;
    }
    r
}

/// Levenberg–Marquardt refinement of the three angles against the
/// phase-aligned Frobenius residual.
fn polish<T: Real>(target: &Unitary2<T>, start: WaveplateTriple<T>) -> Result<WaveplateTriple<T>> {
    let residual_vec = |p: [T; 3]| -> Result<Vec<T>> {
        let got = WaveplateTriple::new(p[0], p[1], p[2]).to_unitary();
        let overlap = got.inner(target);
        let phase = if overlap.norm() > T::zero() { overlap / overlap.norm() } else { Complex::<T>::one() };
        Ok(got
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .flat_map(|(g, t)| {
                let d = g * phase - t;
                [d.re, d.im]
            })
            .collect())
    };
    let cost = |r: &[T]| r.iter().map(|v| *v * *v).sum::<T>();

    let mut p = start.as_array();
    let mut r = residual_vec(p)?;
    let mut lambda = T::lit(1e-3);
    let step = T::lit(1e-4);
    for _ in 0..200 {
        if cost(&r).sqrt() <= polish_threshold::<T>() {
            break;
        }
        // numerical Jacobian, 8 × 3
        let mut jac = [[T::zero(); 3]; 8];
        for k in 0..3 {
            let mut hi = p;
            let mut lo = p;
            hi[k] += step;
            lo[k] -= step;
            let (rh, rl) = (residual_vec(hi)?, residual_vec(lo)?);
            for i in 0..8 {
                jac[i][k] = (rh[i] - rl[i]) / (step + step);
            }
        }
        let mut jtj = [[T::zero(); 3]; 3];
        let mut jtr = [T::zero(); 3];
        for i in 0..8 {
            for a in 0..3 {
                jtr[a] += jac[i][a] * r[i];
                for b in 0..3 {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        loop {
            let mut lhs = jtj;
            for (a, row) in lhs.iter_mut().enumerate() {
                row[a] += lambda * (T::one() + jtj[a][a]);
            }
            let Some(delta) = solve3(lhs, jtr.map(|v| -v)) else {
                lambda *= T::lit(10.0);
                if lambda > T::lit(1e12) {
                    return Ok(WaveplateTriple::new(p[0], p[1], p[2]));
                }
                continue;
            };
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            let rt = residual_vec(trial)?;
            if cost(&rt) < cost(&r) {
                p = trial;
                r = rt;
                lambda = (lambda * T::lit(0.3)).max(T::lit(1e-12));
                break;
            }
            lambda *= T::lit(10.0);
            if lambda > T::lit(1e12) {
                return Ok(WaveplateTriple::new(p[0], p[1], p[2]));
            }
        }
    }
    Ok(WaveplateTriple::new(wrap_half_turn(p[0]), wrap_half_turn(p[1]), wrap_half_turn(p[2])))
}

fn solve3<T: Real>(m: [[T; 3]; 3], b: [T; 3]) -> Option<[T; 3]> {
    let det3 = |m: &[[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    if d.abs() <= T::min_positive_value() {
        return None;
    }
    let mut out = [T::zero(); 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = b[i];
        }
        *o = det3(&mk) / d;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{haar_random_unitary, RandomSource};
    use crate::linalg::paulis::*;
    use num_complex::Complex64 as C;

    fn dist(a: &ComplexMatrix<f64>, b: &ComplexMatrix<f64>) -> f64 {
        frobenius_distance_up_to_phase(a, b).unwrap()
    }

    #[test]
    fn plate_conventions() {
        assert!(qwp(0.0f64).max_abs_diff(&ComplexMatrix::from_diag(&[C::new(1.0, 0.0), C::new(0.0, 1.0)])) < 1e-15);
        assert!(qwp(90.0f64).max_abs_diff(&ComplexMatrix::from_diag(&[C::new(0.0, 1.0), C::new(1.0, 0.0)])) < 1e-15);
        assert!(hwp(0.0f64).max_abs_diff(&pauli_z()) < 1e-15);
        assert!(hwp(45.0f64).max_abs_diff(&pauli_x()) < 1e-15);
        assert!(dist(&hwp(22.5f64), &hadamard()) < 1e-12);
    }

    #[test]
    fn hwp_is_hermitian_traceless() {
        for theta in [-33.0, 0.0, 12.5, 71.0, 182.2] {
            let h = hwp::<f64>(theta);
            assert!(h.hermiticity_residual() < 1e-15);
            assert!(h.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn two_quarter_plates_make_a_half_plate() {
        for theta in [0.0, 10.0, 45.0, 77.7, -120.0] {
            let qq = qwp::<f64>(theta).compose(&qwp(theta));
            assert!(dist(&qq, &hwp(theta)) < 1e-12);
        }
    }

    #[test]
    fn pauli_triples() {
        let t = |a, b, c| triple_to_unitary(&WaveplateTriple::new(a, b, c));
        assert!(dist(&t(0.0, 0.0, 0.0), &pauli_i()) < 1e-12);
        assert!(dist(&t(0.0, 45.0, 0.0), &pauli_x()) < 1e-12);
        assert!(t(0.0, 45.0, 0.0).max_abs_diff(&pauli_x::<f64>().scale(C::new(0.0, 1.0))) < 1e-12);
        assert!(dist(&t(90.0, 45.0, 0.0), &pauli_y()) < 1e-12);
    }

    #[test]
    fn half_turn_periodicity() {
        let base = WaveplateTriple::new(12.3f64, -40.1, 77.0);
        let u = base.to_unitary();
        for shifted in [
            WaveplateTriple::new(192.3, -40.1, 77.0),
            WaveplateTriple::new(12.3, 139.9, 77.0),
            WaveplateTriple::new(12.3, -40.1, -103.0),
        ] {
            assert!(dist(&shifted.to_unitary(), &u) < 1e-12);
        }
    }

    #[test]
    fn wraps_into_half_open_interval() {
        assert_eq!(wrap_half_turn(90.0f64), 90.0);
        assert_eq!(wrap_half_turn(-90.0f64), 90.0);
        assert!((wrap_half_turn(182.2f64) - 2.2).abs() < 1e-12);
        assert!((wrap_half_turn(-100.0f64) - 80.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_named_gates() {
        for g in [pauli_i::<f64>(), pauli_x(), pauli_y(), pauli_z(), hadamard()] {
            let u = Unitary2::new(g.clone()).unwrap();
            let t = decompose(&u).unwrap();
            assert!(dist(&t.to_unitary(), &g) <= 1e-8, "{g:?} -> {t:?}");
        }
        // diagonal in the circular basis: rotation about the pole
        let s = Unitary2::new(ComplexMatrix::from_diag(&[C::new(1.0, 0.0), C::new(0.0, 1.0)])).unwrap();
        let circ = s.compose(&Unitary2::new(hadamard()).unwrap());
        for u in [s, circ] {
            let t = decompose(&u).unwrap();
            assert!(dist(&t.to_unitary(), &u) <= 1e-8);
        }
    }

    #[test]
    fn decompose_random_round_trip() {
        let mut rng = RandomSource::new(2024);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let u: Unitary2<f64> = haar_random_unitary(&mut rng);
            let t = decompose(&u).unwrap();
            worst = worst.max(dist(&t.to_unitary(), &u));
        }
        assert!(worst <= 1e-8, "worst round trip {worst:e}");
    }

    #[test]
    fn closed_form_needs_no_polish_for_haar_gates() {
        let mut rng = RandomSource::new(8);
        for _ in 0..2000 {
            let u: Unitary2<f64> = haar_random_unitary(&mut rng);
            let t = decompose_closed_form(&u);
            assert!(dist(&t.to_unitary(), &u) <= 1e-12);
        }
    }

    #[test]
    fn polish_recovers_from_perturbed_start() {
        let mut rng = RandomSource::new(81);
        for _ in 0..50 {
            let u: Unitary2<f64> = haar_random_unitary(&mut rng);
            let exact = decompose_closed_form(&u);
            let start = WaveplateTriple::new(exact.q_first + 0.7, exact.h - 0.4, exact.q_last + 0.3);
            let t = polish(&u, start).unwrap();
            assert!(dist(&t.to_unitary(), &u) <= 1e-8);
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let mut rng = RandomSource::new(4);
        for _ in 0..200 {
            let u: Unitary2<f32> = haar_random_unitary(&mut rng);
            let t = decompose(&u).unwrap();
            assert!(frobenius_distance_up_to_phase(&t.to_unitary(), &u).unwrap() <= decompose_tol::<f32>());
        }
    }
}
