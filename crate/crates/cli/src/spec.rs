//! Gate and state spec mini-language.
//!
//! Gates: `I`, `X`, `Y`, `Z`, `H`; `wp:q,h,q` (quarter, half, quarter waveplate
//! angles in degrees, in the order the light meets them); or eight numbers
//! `re00,im00,re01,im01,re10,im10,re11,im11` (row-major, separated by commas
//! or whitespace).
//!
//! States: polarizations `H`, `V`, `D`, `A`, `R`, `L` (also `0`, `1`, `+`, `-`);
//! `hwp:θ` for a half-wave plate at θ degrees acting on `H`; or four numbers
//! `re0,im0,re1,im1`, normalized on input.

use num_complex::Complex;
use qswitch::linalg::{paulis, ComplexMatrix, StateVector, Unitary2};
use qswitch::waveplate::WaveplateTriple;
use qswitch::{experiment, Error};

/// Unitarity slack for hand-entered matrix literals; they are snapped to the
/// nearest unitary afterwards.
pub const LITERAL_TOL: f64 = 1e-6;

#[derive(Debug)]
pub enum SpecError {
    /// Unparseable text; carries the offending token.
    Syntax(String),
    /// Parsed, but not a valid gate or state.
    Invalid(Error),
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecError::Syntax(msg) => f.write_str(msg),
            SpecError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

fn numbers(body: &str, spec: &str) -> Result<Vec<f64>, SpecError> {
    body.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| SpecError::Syntax(format!("bad number '{t}' in spec '{spec}'")))
        })
        .collect()
}

pub fn parse_gate(spec: &str) -> Result<Unitary2<f64>, SpecError> {
    let s = spec.trim();
    let named = match s.to_ascii_uppercase().as_str() {
        "I" => Some(paulis::pauli_i()),
        "X" => Some(paulis::pauli_x()),
        "Y" => Some(paulis::pauli_y()),
        "Z" => Some(paulis::pauli_z()),
        "H" => Some(paulis::hadamard()),
        _ => None,
    };
    if let Some(m) = named {
        return Unitary2::new(m).map_err(SpecError::Invalid);
    }
    if let Some(body) = s.strip_prefix("wp:").or_else(|| s.strip_prefix("WP:")) {
        let v = numbers(body, spec)?;
        if v.len() != 3 {
            return Err(SpecError::Syntax(format!("waveplate spec '{spec}' needs 3 angles (q,h,q), got {}", v.len())));
        }
        return Ok(WaveplateTriple::new(v[0], v[1], v[2]).to_unitary());
    }
    let first = s.split(|c: char| c == ',' || c == ';' || c.is_whitespace()).find(|t| !t.is_empty());
    if first.is_none_or(|t| t.parse::<f64>().is_err()) {
        return Err(SpecError::Syntax(format!(
            "unknown gate '{}' (expected I, X, Y, Z, H, wp:q,h,q or 8 numbers)",
            first.unwrap_or(s)
        )));
    }
    let v = numbers(s, spec)?;
    if v.len() != 8 {
        return Err(SpecError::Syntax(format!("matrix literal '{spec}' needs 8 numbers, got {}", v.len())));
    }
    let m = ComplexMatrix::from_vec(2, 2, v.chunks(2).map(|c| Complex::new(c[0], c[1])).collect())
        .map_err(SpecError::Invalid)?;
    let residual = m.unitarity_residual();
    if residual > LITERAL_TOL {
        return Err(SpecError::Invalid(Error::NotUnitary { residual }));
    }
    Unitary2::nearest(&m).map_err(SpecError::Invalid)
}

pub fn parse_state(spec: &str) -> Result<StateVector<f64>, SpecError> {
    let s = spec.trim();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex::new(re, im);
    let named = match s.to_ascii_uppercase().as_str() {
        "H" | "0" => Some(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        "V" | "1" => Some(vec![c(0.0, 0.0), c(1.0, 0.0)]),
        "D" | "+" => Some(vec![c(r, 0.0), c(r, 0.0)]),
        "A" | "-" => Some(vec![c(r, 0.0), c(-r, 0.0)]),
        "R" => Some(vec![c(r, 0.0), c(0.0, -r)]),
        "L" => Some(vec![c(r, 0.0), c(0.0, r)]),
        _ => None,
    };
    if let Some(v) = named {
        return StateVector::new(v).map_err(SpecError::Invalid);
    }
    if let Some(body) = s.strip_prefix("hwp:").or_else(|| s.strip_prefix("HWP:")) {
        let v = numbers(body, spec)?;
        if v.len() != 1 {
            return Err(SpecError::Syntax(format!("state spec '{spec}' needs one angle")));
        }
        return Ok(experiment::prepared_state(v[0]));
    }
    let first = s.split(|c: char| c == ',' || c == ';' || c.is_whitespace()).find(|t| !t.is_empty());
    if first.is_none_or(|t| t.parse::<f64>().is_err()) {
        return Err(SpecError::Syntax(format!(
            "unknown state '{}' (expected H, V, D, A, R, L, hwp:θ or 4 numbers)",
            first.unwrap_or(s)
        )));
    }
    let v = numbers(s, spec)?;
    if v.len() != 4 {
        return Err(SpecError::Syntax(format!("state literal '{spec}' needs 4 numbers, got {}", v.len())));
    }
    StateVector::normalized(vec![c(v[0], v[1]), c(v[2], v[3])]).map_err(SpecError::Invalid)
}
