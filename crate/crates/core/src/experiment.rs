//! Monte Carlo model of the interferometric switch: imperfect fringe visibility,
//! phase drift driven by waveplate moves and wall-clock time, unequal detector
//! efficiency, Poissonian pair counts, and the efficiency-corrected estimator.
//!
//! Phase model. Every group of settings starts from the identity configuration
//! (all plates at 0°) with the phase re-zeroed to `phase_setpoint`. Moving to a
//! setting rotates each of the six plates by the shortest path (mod 180°); that
//! setting's phase error is `u · phase_drift_per_degree · Σ|move|` with
//! `u ~ U[−1, 1]` (the quoted rate is a maximum, and its sign is unknown), plus
//! `phase_drift_per_minute` times the minutes elapsed since the group started.

use std::io::Write;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{classify_pair, GateClass, RandomSource, SeedRecord};
use crate::linalg::{inner, StateVector, Unitary2};
use crate::scalar::Real;
use crate::tables::{pauli_table, random_pair_table, AngleTable};
use crate::waveplate::{hwp, wrap_half_turn, WaveplateTriple};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    /// Fringe visibility in [0, 1].
    pub visibility: f64,
    /// Interferometer phase after re-zeroing, radians.
    pub phase_setpoint: f64,
    /// Maximum phase change per degree of plate rotation, radians.
    pub phase_drift_per_degree: f64,
    /// Slow drift, radians per minute.
    pub phase_drift_per_minute: f64,
    /// Port-1 detection efficiency relative to port 0, in (0, 1].
    pub eta: f64,
    /// Mean heralded pairs per setting.
    pub pairs_per_setting: f64,
    /// Wall-clock time per setting (plate moves plus counting).
    pub seconds_per_setting: f64,
    /// Passes over each suite.
    pub repeats: usize,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            visibility: 0.994,
            phase_setpoint: std::f64::consts::PI,
            phase_drift_per_degree: 0.002,
            phase_drift_per_minute: 0.009,
            eta: 0.7,
            pairs_per_setting: 40_000.0,
            seconds_per_setting: 6.0,
            repeats: 5,
        }
    }
}

impl NoiseParams {
    /// Perfect visibility, no drift, equal detectors.
    pub fn noiseless() -> Self {
        NoiseParams {
            visibility: 1.0,
            phase_drift_per_degree: 0.0,
            phase_drift_per_minute: 0.0,
            eta: 1.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("noise parameter {what}")));
        if !(0.0..=1.0).contains(&self.visibility) {
            return bad("visibility must lie in [0, 1]");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidEta(self.eta));
        }
        if !self.phase_setpoint.is_finite()
            || !self.phase_drift_per_degree.is_finite()
            || !self.phase_drift_per_minute.is_finite()
        {
            return bad("phases must be finite");
        }
        if !(self.pairs_per_setting.is_finite() && self.pairs_per_setting >= 0.0) {
            return bad("pairs_per_setting must be finite and non-negative");
        }
        if !(self.seconds_per_setting.is_finite() && self.seconds_per_setting >= 0.0) {
            return bad("seconds_per_setting must be finite and non-negative");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: NoiseParams = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

/// Two-path interference of the branches `U1U2ψ/√2` and `U2U1ψ/√2` at relative
/// phase `phi` and visibility `v`; returns `(p0, p1)`.
///
/// At `v = 1, phi = π` this is exactly the ideal switch.
pub fn interfere<T: Real>(
    u1: &Unitary2<T>,
    u2: &Unitary2<T>,
    psi: &StateVector<T>,
    visibility: T,
    phi: T,
) -> Result<(T, T)> {
    let a = u1.compose(u2).apply(psi.amplitudes())?;
    let b = u2.compose(u1).apply(psi.amplitudes())?;
    // ⟨a|b⟩ with both branches carrying 1/√2
    let overlap = inner(&a, &b) * T::lit(0.5);
    let rotated = Complex::from_polar(T::one(), phi) * overlap;
    let p0 = (T::lit(0.5) - visibility * rotated.re).max(T::zero()).min(T::one());
    Ok((p0, T::one() - p0))
}

/// Port probabilities with phase `setpoint + drift_per_degree · accumulated_rotation`.
pub fn ideal_port_probabilities_with_noise<T: Real>(
    u1: &Unitary2<T>,
    u2: &Unitary2<T>,
    psi: &StateVector<T>,
    noise: &NoiseParams,
    accumulated_rotation: T,
) -> Result<(T, T)> {
    let phi = T::lit(noise.phase_setpoint) + T::lit(noise.phase_drift_per_degree) * accumulated_rotation;
    interfere(u1, u2, psi, T::lit(noise.visibility), phi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: usize,
    pub label: String,
    pub true_label: GateClass,
    pub repeat: usize,
    pub c0: u64,
    pub c1: u64,
    /// Seconds since the last re-zeroing when counting finished.
    pub wall_time: f64,
}

/// `N ~ Poisson(pairs)`, `n1 ~ Binomial(N, p1)`, detected `c1 ~ Binomial(n1, η)`.
pub fn draw_counts<R: Rng + ?Sized>(p1: f64, noise: &NoiseParams, rng: &mut R) -> Result<(u64, u64)> {
    let total = if noise.pairs_per_setting > 0.0 {
        Poisson::new(noise.pairs_per_setting).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(rng) as u64
    } else {
        0
    };
    let binomial = |n: u64, p: f64, rng: &mut R| -> Result<u64> {
        Ok(Binomial::new(n, p.clamp(0.0, 1.0)).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(rng))
    };
    let n1 = binomial(total, p1, rng)?;
    let c1 = binomial(n1, noise.eta, rng)?;
    Ok((total - n1, c1))
}

/// One counting window at the re-zeroed phase.
pub fn simulate_counts(
    u1: &Unitary2<f64>,
    u2: &Unitary2<f64>,
    psi: &StateVector<f64>,
    noise: &NoiseParams,
    rng: &mut RandomSource,
) -> Result<CountRecord> {
    noise.validate()?;
    let (_, p1) = ideal_port_probabilities_with_noise(u1, u2, psi, noise, 0.0)?;
    let (c0, c1) = draw_counts(p1, noise, rng)?;
    let true_label = classify_pair(u1, u2, 0.05).unwrap_or(GateClass::Neither);
    Ok(CountRecord {
        setting: 0,
        label: String::new(),
        true_label,
        repeat: 0,
        c0,
        c1,
        wall_time: noise.seconds_per_setting,
    })
}

/// `P0 = C0 / (C0 + C1/η)`.
pub fn corrected_probability(c0: u64, c1: u64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidEta(eta));
    }
    if c0 + c1 == 0 {
        return Err(Error::ZeroCounts);
    }
    let c0 = c0 as f64;
    Ok(c0 / (c0 + c1 as f64 / eta))
}

/// Counting windows with `U1 = U2 = I`, input `|H⟩` and the interferometer
/// phase stepped through `phases`; one derived stream per point.
pub fn phase_sweep(noise: &NoiseParams, phases: &[f64], rng: &RandomSource) -> Result<Vec<CountRecord>> {
    noise.validate()?;
    let id = Unitary2::identity();
    let h = StateVector::basis(2, 0);
    phases
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let mut child = rng.derive(k as u64);
            let (_, p1) = interfere(&id, &id, &h, noise.visibility, phi)?;
            let (c0, c1) = draw_counts(p1, noise, &mut child)?;
            Ok(CountRecord {
                setting: k,
                label: format!("phase {phi:.4}"),
                true_label: GateClass::Commute,
                repeat: 0,
                c0,
                c1,
                wall_time: 0.0,
            })
        })
        .collect()
}

/// Efficiency making `C0 + C1/η` as constant as possible across a phase sweep
/// (least squares: `1/η = −Cov(C0, C1) / Var(C1)`).
pub fn calibrate_eta(sweep: &[CountRecord]) -> Result<f64> {
    if sweep.len() < 3 {
        return Err(Error::DegenerateSweep(format!("need at least 3 phase points, got {}", sweep.len())));
    }
    let n = sweep.len() as f64;
    let c0: Vec<f64> = sweep.iter().map(|r| r.c0 as f64).collect();
    let c1: Vec<f64> = sweep.iter().map(|r| r.c1 as f64).collect();
    let m0 = c0.iter().sum::<f64>() / n;
    let m1 = c1.iter().sum::<f64>() / n;
    let var1 = c1.iter().map(|x| (x - m1).powi(2)).sum::<f64>() / (n - 1.0);
    let cov = c0.iter().zip(&c1).map(|(a, b)| (a - m0) * (b - m1)).sum::<f64>() / (n - 1.0);
    // a fringe must stand well clear of the Poisson spread (variance ≈ mean)
    if var1 <= 4.0 * m1.max(1.0) {
        return Err(Error::DegenerateSweep(format!(
            "port-1 counts show no fringe contrast (variance {var1:.1}, mean {m1:.1})"
        )));
    }
    let inv_eta = -cov / var1;
    if !(inv_eta > 0.0 && inv_eta.is_finite()) {
        return Err(Error::DegenerateSweep(format!(
            "ports are not anti-correlated (cov {cov:.1}); cannot infer efficiency"
        )));
    }
    Ok(1.0 / inv_eta)
}

/// One configuration of the two gates and the input polarization.
#[derive(Clone, Debug)]
pub struct Setting {
    pub label: String,
    pub class: GateClass,
    /// Settings sharing a group run back to back after one re-zeroing.
    pub group: usize,
    pub u1_angles: WaveplateTriple<f64>,
    pub u2_angles: WaveplateTriple<f64>,
    pub psi: StateVector<f64>,
}

impl Setting {
    pub fn gates(&self) -> (Unitary2<f64>, Unitary2<f64>) {
        (self.u1_angles.to_unitary(), self.u2_angles.to_unitary())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingResult {
    /// 1-based position in the suite.
    pub id: usize,
    pub label: String,
    pub class: GateClass,
    pub group: usize,
    pub records: Vec<CountRecord>,
    pub p0_corrected: Vec<f64>,
    pub correct_port_probability: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub name: String,
    pub settings: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub settings: usize,
    pub repeats: usize,
    /// Mean over settings of the repeat-averaged correct-port probability.
    pub success_mean: f64,
    /// Standard deviation of that quantity across settings.
    pub success_std: f64,
    /// Largest per-setting standard deviation across repeats.
    pub error_bar: f64,
    pub groups: Vec<GroupSummary>,
    pub noise: NoiseParams,
    pub seed: SeedRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub summary: SuiteSummary,
    pub settings: Vec<SettingResult>,
}

pub const SUITE_CSV_HEADER: [&str; 7] =
    ["setting_id", "label", "repeat", "c0", "c1", "p0_corrected", "correct_port_probability"];

impl SuiteReport {
    pub fn success_mean(&self) -> f64 {
        self.summary.success_mean
    }

    pub fn success_std(&self) -> f64 {
        self.summary.success_std
    }

    /// Count of detections in the port that the label says should stay dark.
    pub fn wrong_port_counts(&self) -> u64 {
        self.settings
            .iter()
            .flat_map(|s| s.records.iter())
            .map(|r| match r.true_label {
                GateClass::Anticommute => r.c0,
                _ => r.c1,
            })
            .sum()
    }

    /// One line per setting and repeat.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SUITE_CSV_HEADER)?;
        for s in &self.settings {
            for (k, r) in s.records.iter().enumerate() {
                w.write_record([
                    s.id.to_string(),
                    s.label.clone(),
                    r.repeat.to_string(),
                    r.c0.to_string(),
                    r.c1.to_string(),
                    format!("{:.6}", s.p0_corrected[k]),
                    format!("{:.6}", s.correct_port_probability[k]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Plate rotation (degrees) needed to reach each setting and minutes since the
/// group's re-zeroing when its counting window closes.
pub fn rotation_schedule(settings: &[Setting], seconds_per_setting: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(settings.len());
    let mut prev = [0.0; 6];
    let mut position = 0usize;
    let mut group = None;
    for s in settings {
        if group != Some(s.group) {
            prev = [0.0; 6];
            position = 0;
            group = Some(s.group);
        }
        let cur = [s.u1_angles.as_array(), s.u2_angles.as_array()].concat();
        let moved: f64 = cur.iter().zip(prev).map(|(c, p)| wrap_half_turn(c - p).abs()).sum();
        position += 1;
        out.push((moved, position as f64 * seconds_per_setting / 60.0));
        prev.copy_from_slice(&cur);
    }
    out
}

/// Run any ordered list of settings under `noise`; `group_names[g]` names group `g`.
pub fn run_settings(
    suite: &str,
    settings: &[Setting],
    group_names: &[String],
    noise: &NoiseParams,
    rng: &RandomSource,
) -> Result<SuiteReport> {
    noise.validate()?;
    let schedule = rotation_schedule(settings, noise.seconds_per_setting);
    let results: Vec<SettingResult> = settings
        .par_iter()
        .zip(schedule.par_iter())
        .enumerate()
        .map(|(idx, (s, &(moved, minutes)))| {
            let (u1, u2) = s.gates();
            let mut records = Vec::with_capacity(noise.repeats);
            let mut p0s = Vec::with_capacity(noise.repeats);
            let mut correct = Vec::with_capacity(noise.repeats);
            for repeat in 0..noise.repeats {
                let mut child = rng.derive(((repeat as u64) << 32) | idx as u64);
                let u: f64 = child.random_range(-1.0..=1.0);
                let phi = noise.phase_setpoint
                    + u * noise.phase_drift_per_degree * moved
                    + noise.phase_drift_per_minute * minutes;
                let (_, p1) = interfere(&u1, &u2, &s.psi, noise.visibility, phi)?;
                let (c0, c1) = draw_counts(p1, noise, &mut child)?;
                let p0 = corrected_probability(c0, c1, noise.eta)?;
                p0s.push(p0);
                correct.push(if s.class == GateClass::Anticommute { 1.0 - p0 } else { p0 });
                records.push(CountRecord {
                    setting: idx + 1,
                    label: s.label.clone(),
                    true_label: s.class,
                    repeat,
                    c0,
                    c1,
                    wall_time: minutes * 60.0,
                });
            }
            let (mean, std) = mean_std(&correct);
            Ok(SettingResult {
                id: idx + 1,
                label: s.label.clone(),
                class: s.class,
                group: s.group,
                records,
                p0_corrected: p0s,
                correct_port_probability: correct,
                mean,
                std,
            })
        })
        .collect::<Result<_>>()?;

    let means: Vec<f64> = results.iter().map(|r| r.mean).collect();
    let (success_mean, success_std) = mean_std(&means);
    let error_bar = results.iter().map(|r| r.std).fold(0.0, f64::max);
    let groups = group_names
        .iter()
        .enumerate()
        .map(|(g, name)| {
            let xs: Vec<f64> = results.iter().filter(|r| r.group == g).map(|r| r.mean).collect();
            let (mean, std) = mean_std(&xs);
            GroupSummary { group: g, name: name.clone(), settings: xs.len(), mean, std }
        })
        .collect();
    Ok(SuiteReport {
        summary: SuiteSummary {
            suite: suite.to_string(),
            settings: results.len(),
            repeats: noise.repeats,
            success_mean,
            success_std,
            error_bar,
            groups,
            noise: noise.clone(),
            seed: rng.record(),
        },
        settings: results,
    })
}

fn class_of(u1: &WaveplateTriple<f64>, u2: &WaveplateTriple<f64>) -> GateClass {
    classify_pair(&u1.to_unitary(), &u2.to_unitary(), 0.05).unwrap_or(GateClass::Neither)
}

/// All 16 ordered Pauli pairs: `U1` from the first triple column, `U2` from the second.
pub fn pauli_settings(table: &AngleTable, psi: &StateVector<f64>, group: usize) -> Vec<Setting> {
    let mut out = Vec::with_capacity(table.len() * table.len());
    for a in &table.rows {
        for b in &table.rows {
            out.push(Setting {
                label: format!("{},{}", a.name, b.name),
                class: class_of(&a.u1, &b.u2),
                group,
                u1_angles: a.u1,
                u2_angles: b.u2,
                psi: psi.clone(),
            });
        }
    }
    out
}

/// `C1..C50` then `A1..A50`, re-zeroed every ten settings.
pub fn random_settings(table: &AngleTable, psi: &StateVector<f64>) -> Vec<Setting> {
    let mut rows: Vec<_> = table.rows.iter().collect();
    rows.sort_by_key(|r| r.label != GateClass::Commute);
    rows.into_iter()
        .enumerate()
        .map(|(k, r)| Setting {
            label: r.name.clone(),
            class: r.label,
            group: k / RANDOM_GROUP_SIZE,
            u1_angles: r.u1,
            u2_angles: r.u2,
            psi: psi.clone(),
        })
        .collect()
}

pub const RANDOM_GROUP_SIZE: usize = 10;
/// Preparation half-waveplate angles for the input-state sweep, degrees.
pub const STATE_SWEEP_ANGLES: [f64; 5] = [0.0, 10.0, 20.0, 30.0, 40.0];

/// Diagonal polarization, the input for the gate suites.
pub fn default_input() -> StateVector<f64> {
    StateVector::plus()
}

/// `hwp(θ)|H⟩`
pub fn prepared_state(theta_deg: f64) -> StateVector<f64> {
    StateVector::basis(2, 0).evolve(&hwp(theta_deg)).expect("qubit")
}

pub fn run_pauli_suite(noise: &NoiseParams, rng: &RandomSource) -> Result<SuiteReport> {
    let settings = pauli_settings(&pauli_table(), &default_input(), 0);
    run_settings("pauli", &settings, &["pauli".to_string()], noise, rng)
}

pub fn run_random_suite(noise: &NoiseParams, rng: &RandomSource) -> Result<SuiteReport> {
    run_random_suite_with(&random_pair_table(), noise, rng)
}

/// Random-pair suite over an arbitrary 13-column table.
pub fn run_random_suite_with(table: &AngleTable, noise: &NoiseParams, rng: &RandomSource) -> Result<SuiteReport> {
    let settings = random_settings(table, &default_input());
    let groups = settings.iter().map(|s| s.group).max().map_or(0, |g| g + 1);
    let names = (0..groups)
        .map(|g| {
            let first = &settings[g * RANDOM_GROUP_SIZE].label;
            let last = &settings[((g + 1) * RANDOM_GROUP_SIZE).min(settings.len()) - 1].label;
            format!("{first}-{last}")
        })
        .collect::<Vec<_>>();
    run_settings("random100", &settings, &names, noise, rng)
}

/// The Pauli suite for each preparation angle in [`STATE_SWEEP_ANGLES`].
pub fn run_state_sweep(noise: &NoiseParams, rng: &RandomSource) -> Result<SuiteReport> {
    let table = pauli_table();
    let mut settings = Vec::new();
    let mut names = Vec::new();
    for (g, &theta) in STATE_SWEEP_ANGLES.iter().enumerate() {
        let psi = prepared_state(theta);
        settings.extend(pauli_settings(&table, &psi, g).into_iter().map(|mut s| {
            s.label = format!("hwp{theta:.0}:{}", s.label);
            s
        }));
        names.push(format!("hwp {theta:.0} deg"));
    }
    run_settings("statesweep", &settings, &names, noise, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Pauli,
    Random100,
    StateSweep,
}

impl std::str::FromStr for SuiteKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pauli" => Ok(SuiteKind::Pauli),
            "random100" | "random" => Ok(SuiteKind::Random100),
            "statesweep" | "states" => Ok(SuiteKind::StateSweep),
            other => {
                Err(Error::InvalidInput(format!("unknown suite '{other}' (expected pauli, random100 or statesweep)")))
            }
        }
    }
}

pub fn run_suite(kind: SuiteKind, noise: &NoiseParams, rng: &RandomSource) -> Result<SuiteReport> {
    match kind {
        SuiteKind::Pauli => run_pauli_suite(noise, rng),
        SuiteKind::Random100 => run_random_suite(noise, rng),
        SuiteKind::StateSweep => run_state_sweep(noise, rng),
    }
}
