//! Random gates: Haar sampling on U(2) and commuting / anti-commuting pair constructors.

use std::io::Write;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{paulis, ComplexMatrix, Unitary2};
use crate::scalar::Real;

/// Seeded, counted random stream.
///
/// Identical `(seed, stream)` pairs produce identical draws. Independent
/// workers should each take a [`RandomSource::derive`]d child.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    draws: u64,
    rng: ChaCha20Rng,
}

pub const RNG_ALGORITHM: &str = "chacha20";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { seed, stream, draws: 0, rng }
    }

    /// Child stream keyed by `label`; does not advance `self`.
    pub fn derive(&self, label: u64) -> Self {
        let stream = splitmix64(self.stream ^ splitmix64(label.wrapping_add(0x5851_F42D_4C95_7F2D)));
        Self::with_stream(self.seed, stream)
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 32-bit words drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn record(&self) -> SeedRecord {
        SeedRecord { algorithm: RNG_ALGORITHM.to_string(), seed: self.seed, stream: self.stream, draw: self.draws }
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 2;
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.draws += dst.len().div_ceil(4) as u64;
        self.rng.fill_bytes(dst)
    }
}

/// Where in a random stream a value was drawn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub algorithm: String,
    pub seed: u64,
    pub stream: u64,
    /// Draw counter at the start of the sample.
    pub draw: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateClass {
    Commute,
    Anticommute,
    Neither,
}

impl std::fmt::Display for GateClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GateClass::Commute => "COMMUTE",
            GateClass::Anticommute => "ANTICOMMUTE",
            GateClass::Neither => "NEITHER",
        })
    }
}

impl std::str::FromStr for GateClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "COMMUTE" | "C" => Ok(GateClass::Commute),
            "ANTICOMMUTE" | "A" => Ok(GateClass::Anticommute),
            "NEITHER" => Ok(GateClass::Neither),
            other => Err(Error::InvalidInput(format!("unknown gate class '{other}'"))),
        }
    }
}

/// Two gates with their ground-truth relation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct GatePair<T: Real> {
    pub u1: Unitary2<T>,
    pub u2: Unitary2<T>,
    pub label: GateClass,
    pub seed_record: Option<SeedRecord>,
}

impl<T: Real> GatePair<T> {
    pub fn new(u1: Unitary2<T>, u2: Unitary2<T>, label: GateClass) -> Self {
        GatePair { u1, u2, label, seed_record: None }
    }

    pub fn commutator_norm(&self) -> T {
        self.u1.commutator(&self.u2).expect("2x2").frobenius_norm()
    }

    pub fn anticommutator_norm(&self) -> T {
        self.u1.anticommutator(&self.u2).expect("2x2").frobenius_norm()
    }

    /// Same pair with the slot roles exchanged.
    pub fn swapped(&self) -> Self {
        GatePair { u1: self.u2.clone(), u2: self.u1.clone(), ..self.clone() }
    }
}

/// Default tolerance for classifying analytically constructed gates.
pub const DEFAULT_CLASS_TOLERANCE: f64 = 1e-8;

/// Haar-distributed element of U(2): QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_random_unitary<T: Real>(rng: &mut RandomSource) -> Unitary2<T> {
    let scale = T::FRAC_1_SQRT_2();
    loop {
        let mut g = [Complex::<T>::zero(); 4];
        for z in g.iter_mut() {
            *z = Complex::new(T::sample_normal(rng), T::sample_normal(rng)) * scale;
        }
        // columns a1 = (g0, g2), a2 = (g1, g3)
        if let Some(q) = qr_unitary_factor([g[0], g[2]], [g[1], g[3]]) {
            if let Ok(u) = Unitary2::new(q) {
                return u;
            }
        }
    }
}

/// `Q · diag(r_ii / |r_ii|)` for the 2×2 matrix with the given columns, or
/// `None` when the columns are (numerically) dependent.
fn qr_unitary_factor<T: Real>(a1: [Complex<T>; 2], a2: [Complex<T>; 2]) -> Option<ComplexMatrix<T>> {
    let tiny = T::epsilon().sqrt();
    let r11 = (a1[0].norm_sqr() + a1[1].norm_sqr()).sqrt();
    if r11 <= tiny {
        return None;
    }
    let q1 = [a1[0] / r11, a1[1] / r11];
    let r12 = q1[0].conj() * a2[0] + q1[1].conj() * a2[1];
    let mut v = [a2[0] - q1[0] * r12, a2[1] - q1[1] * r12];
    // one re-orthogonalization pass keeps ‖Q†Q − I‖ at rounding level
    let corr = q1[0].conj() * v[0] + q1[1].conj() * v[1];
    v = [v[0] - q1[0] * corr, v[1] - q1[1] * corr];
    let r22 = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if r22 <= tiny * r11.max(T::one()) {
        return None;
    }
    let q2 = [v[0] / r22, v[1] / r22];
    // Gram–Schmidt produces a real positive diagonal in R; the general phase
    // correction diag(r_ii/|r_ii|) is therefore the identity but applied anyway.
    let d1 = Complex::new(r11, T::zero()) / r11;
    let d2 = Complex::new(r22, T::zero()) / r22;
    Some(ComplexMatrix::from_rows(&[&[q1[0] * d1, q2[0] * d2], &[q1[1] * d1, q2[1] * d2]]))
}

/// `R·diag(1, e^{iθ₁})·R†`, `R·diag(1, e^{iθ₂})·R†`.
pub fn commuting_pair_from<T: Real>(r: &Unitary2<T>, theta1: T, theta2: T) -> GatePair<T> {
    let d = |theta: T| {
        Unitary2::new(ComplexMatrix::from_diag(&[Complex::one(), Complex::from_polar(T::one(), theta)]))
            .expect("diagonal phase gate is unitary")
    };
    GatePair::new(d(theta1).conjugate_by(r), d(theta2).conjugate_by(r), GateClass::Commute)
}

/// `R·σ_z·R†`, `R·σ_y·R†`.
pub fn anticommuting_pair_from<T: Real>(r: &Unitary2<T>) -> GatePair<T> {
    let z = Unitary2::new(paulis::pauli_z()).expect("unitary");
    let y = Unitary2::new(paulis::pauli_y()).expect("unitary");
    GatePair::new(z.conjugate_by(r), y.conjugate_by(r), GateClass::Anticommute)
}

/// Random commuting pair: Haar `R`, θ₁, θ₂ uniform on [0, 2π).
pub fn commuting_pair<T: Real>(rng: &mut RandomSource) -> GatePair<T> {
    let record = rng.record();
    let r = haar_random_unitary(rng);
    let two_pi = T::TAU();
    let theta1 = T::sample_unit(rng) * two_pi;
    let theta2 = T::sample_unit(rng) * two_pi;
    GatePair { seed_record: Some(record), ..commuting_pair_from(&r, theta1, theta2) }
}

/// Random anti-commuting pair: Haar `R` conjugating (σ_z, σ_y).
pub fn anticommuting_pair<T: Real>(rng: &mut RandomSource) -> GatePair<T> {
    let record = rng.record();
    let r = haar_random_unitary(rng);
    GatePair { seed_record: Some(record), ..anticommuting_pair_from(&r) }
}

/// Classify by Frobenius norms of the commutator and anti-commutator.
pub fn classify_pair<T: Real>(u1: &ComplexMatrix<T>, u2: &ComplexMatrix<T>, tol: T) -> Result<GateClass> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(format!("classification tolerance must be positive, got {tol}")));
    }
    let comm = u1.commutator(u2)?.frobenius_norm();
    let anti = u1.anticommutator(u2)?.frobenius_norm();
    match (comm <= tol, anti <= tol) {
        (true, true) => Err(Error::AmbiguousClass { tol: tol.to_f64_lossy() }),
        (true, false) => Ok(GateClass::Commute),
        (false, true) => Ok(GateClass::Anticommute),
        (false, false) => Ok(GateClass::Neither),
    }
}

/// Draw `count` commuting pairs followed by `count` anti-commuting pairs.
pub fn sample_pairs<T: Real>(count: usize, rng: &mut RandomSource) -> Vec<GatePair<T>> {
    let mut out: Vec<GatePair<T>> = (0..count).map(|_| commuting_pair(rng)).collect();
    out.extend((0..count).map(|_| anticommuting_pair(rng)));
    out
}

/// One exported pair: gate entries row-major as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub index: usize,
    pub label: GateClass,
    pub u1: [[f64; 2]; 4],
    pub u2: [[f64; 2]; 4],
    pub seed: Option<SeedRecord>,
}

impl PairRecord {
    pub fn from_pair<T: Real>(index: usize, pair: &GatePair<T>) -> Self {
        let flat = |u: &Unitary2<T>| u.entries().map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]);
        PairRecord { index, label: pair.label, u1: flat(&pair.u1), u2: flat(&pair.u2), seed: pair.seed_record.clone() }
    }

    /// Rebuild the pair, re-validating unitarity at `tol`.
    pub fn to_pair(&self, tol: f64) -> Result<GatePair<f64>> {
        let m = |e: &[[f64; 2]; 4]| {
            ComplexMatrix::from_vec(2, 2, e.iter().map(|&[re, im]| Complex::new(re, im)).collect())
                .and_then(|m| Unitary2::with_tolerance(m, tol))
        };
        Ok(GatePair { u1: m(&self.u1)?, u2: m(&self.u2)?, label: self.label, seed_record: self.seed.clone() })
    }
}

pub const PAIR_CSV_HEADER: [&str; 20] = [
    "index", "label", "u1_00_re", "u1_00_im", "u1_01_re", "u1_01_im", "u1_10_re", "u1_10_im", "u1_11_re", "u1_11_im",
    "u2_00_re", "u2_00_im", "u2_01_re", "u2_01_im", "u2_10_re", "u2_10_im", "u2_11_re", "u2_11_im", "seed", "draw",
];

/// CSV export: index, label, both gates as re/im pairs, seed and draw counter.
pub fn write_pairs_csv<T: Real, W: Write>(pairs: &[GatePair<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PAIR_CSV_HEADER)?;
    for (i, pair) in pairs.iter().enumerate() {
        let rec = PairRecord::from_pair(i, pair);
        let mut row = vec![i.to_string(), rec.label.to_string()];
        for [re, im] in rec.u1.iter().chain(&rec.u2) {
            row.push(format!("{re:.17e}"));
            row.push(format!("{im:.17e}"));
        }
        row.push(rec.seed.as_ref().map_or(String::new(), |s| s.seed.to_string()));
        row.push(rec.seed.as_ref().map_or(String::new(), |s| s.draw.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairs_json<T: Real, W: Write>(pairs: &[GatePair<T>], out: W) -> Result<()> {
    let records: Vec<PairRecord> = pairs.iter().enumerate().map(|(i, p)| PairRecord::from_pair(i, p)).collect();
    serde_json::to_writer_pretty(out, &records)?;
    Ok(())
}

/// Haar-distributed `n × n` unitary (Ginibre, modified Gram–Schmidt on columns).
pub fn haar_random_matrix<T: Real>(n: usize, rng: &mut RandomSource) -> ComplexMatrix<T> {
    let scale = T::FRAC_1_SQRT_2();
    'retry: loop {
        let mut cols: Vec<Vec<Complex<T>>> = (0..n)
            .map(|_| (0..n).map(|_| Complex::new(T::sample_normal(rng), T::sample_normal(rng)) * scale).collect())
            .collect();
        for k in 0..n {
            for _pass in 0..2 {
                for j in 0..k {
                    let proj: Complex<T> =
                        cols[j].iter().zip(&cols[k]).fold(Complex::zero(), |acc, (q, v)| acc + q.conj() * v);
                    let (head, tail) = cols.split_at_mut(k);
                    for (v, q) in tail[0].iter_mut().zip(&head[j]) {
                        *v -= q * proj;
                    }
                }
            }
            let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if norm <= T::epsilon().sqrt() {
                continue 'retry;
            }
            for v in cols[k].iter_mut() {
                *v /= norm;
            }
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        return m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_distance_up_to_phase;
    use crate::linalg::paulis::*;
    use crate::linalg::StateVector;
    use crate::switch::exit_probabilities;

    #[test]
    fn haar_is_unitary_and_deterministic() {
        let mut a = RandomSource::new(42);
        let mut b = RandomSource::new(42);
        for _ in 0..10_000 {
            let ua: Unitary2<f64> = haar_random_unitary(&mut a);
            let ub: Unitary2<f64> = haar_random_unitary(&mut b);
            assert!(ua.unitarity_residual() <= 1e-10);
            assert_eq!(ua, ub);
        }
        assert_eq!(a.draws(), b.draws());
        assert!(a.draws() > 0);
    }

    #[test]
    fn haar_works_in_f32() {
        let mut rng = RandomSource::new(3);
        for _ in 0..1000 {
            let u: Unitary2<f32> = haar_random_unitary(&mut rng);
            assert!(u.unitarity_residual() < 1e-5);
        }
    }

    #[test]
    fn derived_streams_differ_and_repeat() {
        let root = RandomSource::new(9);
        let mut a = root.derive(1);
        let mut b = root.derive(2);
        let mut a2 = root.derive(1);
        let (x, y, z) = (a.next_u64(), b.next_u64(), a2.next_u64());
        assert_ne!(x, y);
        assert_eq!(x, z);
        assert_eq!(root.draws(), 0);
    }

    #[test]
    fn forced_commuting_examples() {
        let id = Unitary2::<f64>::identity();
        let p = commuting_pair_from(&id, 0.0, 0.0);
        assert!(p.u1.max_abs_diff(&id) < 1e-15 && p.u2.max_abs_diff(&id) < 1e-15);
        let p = commuting_pair_from(&id, std::f64::consts::PI, 1.0);
        assert!(frobenius_distance_up_to_phase(&p.u1, &pauli_z()).unwrap() < 1e-12);
    }

    #[test]
    fn forced_anticommuting_example() {
        let p = anticommuting_pair_from(&Unitary2::<f64>::identity());
        assert_eq!(*p.u1.matrix(), pauli_z());
        assert_eq!(*p.u2.matrix(), pauli_y());
    }

    #[test]
    fn constructed_pairs_satisfy_promise() {
        let mut rng = RandomSource::new(11);
        let psi = StateVector::plus();
        for _ in 0..500 {
            let c: GatePair<f64> = commuting_pair(&mut rng);
            assert!(c.commutator_norm() <= 1e-10);
            assert!((exit_probabilities(&c.u1, &c.u2, &psi).unwrap().p0 - 1.0).abs() <= 1e-10);
            let a: GatePair<f64> = anticommuting_pair(&mut rng);
            assert!(a.anticommutator_norm() <= 1e-10);
            assert!(a.u1.hermiticity_residual() < 1e-12 && a.u2.hermiticity_residual() < 1e-12);
            assert!((exit_probabilities(&a.u1, &a.u2, &psi).unwrap().p1 - 1.0).abs() <= 1e-10);
            // [A1, A2]/2 is itself unitary
            let half_comm = a.u1.commutator(&a.u2).unwrap().scale_real(0.5);
            assert!(half_comm.unitarity_residual() < 1e-10);
        }
    }

    #[test]
    fn classify_examples() {
        let tol = DEFAULT_CLASS_TOLERANCE;
        assert_eq!(classify_pair(&pauli_x::<f64>(), &pauli_i(), tol).unwrap(), GateClass::Commute);
        assert_eq!(classify_pair(&pauli_x::<f64>(), &pauli_y(), tol).unwrap(), GateClass::Anticommute);
        assert_eq!(classify_pair(&pauli_x::<f64>(), &hadamard(), tol).unwrap(), GateClass::Neither);
        let zero = ComplexMatrix::<f64>::zeros(2, 2);
        assert!(matches!(classify_pair(&zero, &zero, tol), Err(Error::AmbiguousClass { .. })));
        assert!(classify_pair(&pauli_x::<f64>(), &pauli_i(), 0.0).is_err());
    }

    #[test]
    fn classification_is_conjugation_invariant() {
        let mut rng = RandomSource::new(5);
        let named = [pauli_i::<f64>(), pauli_x(), pauli_y(), pauli_z(), hadamard()];
        for _ in 0..50 {
            let r: Unitary2<f64> = haar_random_unitary(&mut rng);
            for a in &named {
                for b in &named {
                    let ra = &(r.matrix() * a) * r.adjoint().matrix();
                    let rb = &(r.matrix() * b) * r.adjoint().matrix();
                    let tol = DEFAULT_CLASS_TOLERANCE;
                    assert_eq!(classify_pair(a, b, tol).unwrap(), classify_pair(&ra, &rb, tol).unwrap());
                }
            }
        }
    }

    #[test]
    fn commuting_pairs_do_not_anticommute() {
        let mut rng = RandomSource::new(17);
        let min =
            (0..10_000).map(|_| commuting_pair::<f64>(&mut rng).anticommutator_norm()).fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
    }

    #[test]
    fn csv_and_json_export() {
        let mut rng = RandomSource::new(1);
        let pairs: Vec<GatePair<f64>> = sample_pairs(2, &mut rng);
        let mut buf = Vec::new();
        write_pairs_csv(&pairs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0].split(',').count(), 20);
        assert!(lines[1].starts_with("0,COMMUTE,"));
        assert!(lines[3].starts_with("2,ANTICOMMUTE,"));

        let mut buf = Vec::new();
        write_pairs_json(&pairs, &mut buf).unwrap();
        let back: Vec<PairRecord> = serde_json::from_slice(&buf).unwrap();
        let rebuilt = back[3].to_pair(1e-10).unwrap();
        assert!(rebuilt.u1.max_abs_diff(&pairs[3].u1) < 1e-15);
        assert_eq!(rebuilt.label, GateClass::Anticommute);
    }
}
