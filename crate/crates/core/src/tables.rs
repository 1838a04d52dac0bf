//! Waveplate angle tables: the Pauli settings and the 50 + 50 random gate pairs.
//!
//! Two CSV layouts are accepted, distinguished by column count:
//!
//! * 7 columns: `gate, q1, h1, q2, q3, h2, q4` — both triples realize the named gate.
//! * 13 columns: `index`, six angles for a commuting pair, six for an anti-commuting pair.
//!
//! A header line and `#` comments are optional. Each 13-column line yields two rows
//! (`C<index>` then `A<index>`), and [`AngleTable::pairs`] orders all commuting rows
//! before all anti-commuting ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{GateClass, GatePair};
use crate::waveplate::WaveplateTriple;

pub const PAULI_TABLE_CSV: &str = include_str!("../data/table1.csv");
pub const RANDOM_TABLE_CSV: &str = include_str!("../data/table2.csv");

/// Plate angles beyond this magnitude are legal (everything is mod 180°) but noted.
const ANGLE_NOTE_LIMIT: f64 = 180.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableLayout {
    Pauli,
    RandomPairs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleRow {
    /// Row number as printed (1-based for the random table, position for the Pauli table).
    pub index: usize,
    pub name: String,
    pub u1: WaveplateTriple<f64>,
    pub u2: WaveplateTriple<f64>,
    pub label: GateClass,
    /// The six angle fields verbatim.
    pub raw: [String; 6],
}

impl AngleRow {
    pub fn to_pair(&self) -> GatePair<f64> {
        GatePair::new(self.u1.to_unitary(), self.u2.to_unitary(), self.label)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AngleTable {
    pub layout: Option<TableLayout>,
    pub rows: Vec<AngleRow>,
    /// Non-fatal remarks, e.g. angles written outside (−180°, 180°).
    pub diagnostics: Vec<String>,
}

impl AngleTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Gate pairs, commuting rows first, each group in table order.
    pub fn pairs(&self) -> Vec<GatePair<f64>> {
        let mut rows: Vec<&AngleRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.label != GateClass::Commute);
        rows.into_iter().map(AngleRow::to_pair).collect()
    }

    pub fn row(&self, name: &str) -> Option<&AngleRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Parse a Pauli (7-column) or random-pair (13-column) angle table.
pub fn load_angle_table(source: &str) -> Result<AngleTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());

    let mut table = AngleTable::default();
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(n as u64 + 1, |p| p.line()) as usize;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let layout = match record.len() {
            7 => TableLayout::Pauli,
            13 => TableLayout::RandomPairs,
            k => return Err(Error::Parse { row: line, message: format!("expected 7 or 13 columns, found {k}") }),
        };
        if table.rows.is_empty() && is_header(&record) {
            table.layout = Some(layout);
            continue;
        }
        match table.layout {
            Some(l) if l != layout => {
                return Err(Error::Parse {
                    row: line,
                    message: format!("column count {} does not match the table layout", record.len()),
                })
            }
            _ => table.layout = Some(layout),
        }
        let fields: Vec<&str> = record.iter().collect();
        match layout {
            TableLayout::Pauli => {
                let (u1, u2, raw) = parse_six(&fields[1..7], line, &mut table.diagnostics)?;
                table.rows.push(AngleRow {
                    index: table.rows.len() + 1,
                    name: fields[0].to_string(),
                    u1,
                    u2,
                    label: GateClass::Commute,
                    raw,
                });
            }
            TableLayout::RandomPairs => {
                let index: usize = fields[0].parse().map_err(|_| Error::Parse {
                    row: line,
                    message: format!("row index {:?} is not a non-negative integer", fields[0]),
                })?;
                let (c1, c2, craw) = parse_six(&fields[1..7], line, &mut table.diagnostics)?;
                let (a1, a2, araw) = parse_six(&fields[7..13], line, &mut table.diagnostics)?;
                table.rows.push(AngleRow {
                    index,
                    name: format!("C{index}"),
                    u1: c1,
                    u2: c2,
                    label: GateClass::Commute,
                    raw: craw,
                });
                table.rows.push(AngleRow {
                    index,
                    name: format!("A{index}"),
                    u1: a1,
                    u2: a2,
                    label: GateClass::Anticommute,
                    raw: araw,
                });
            }
        }
    }
    Ok(table)
}

fn is_header(record: &csv::StringRecord) -> bool {
    record.iter().skip(1).any(|f| f.parse::<f64>().is_err())
}

type Parsed = (WaveplateTriple<f64>, WaveplateTriple<f64>, [String; 6]);

fn parse_six(fields: &[&str], line: usize, notes: &mut Vec<String>) -> Result<Parsed> {
    const NAMES: [&str; 6] = ["Q1", "H1", "Q2", "Q3", "H2", "Q4"];
    let mut v = [0.0f64; 6];
    for (k, f) in fields.iter().enumerate() {
        let x: f64 = f
            .parse()
            .map_err(|_| Error::Parse { row: line, message: format!("{} = {f:?} is not a number", NAMES[k]) })?;
        if !x.is_finite() {
            return Err(Error::Parse { row: line, message: format!("{} is not finite", NAMES[k]) });
        }
        if x.abs() > ANGLE_NOTE_LIMIT {
            notes.push(format!(
                "line {line}: {} = {f}° lies outside [-180°, 180°]; used as written (equivalent mod 180°)",
                NAMES[k]
            ));
        }
        v[k] = x;
    }
    let raw = std::array::from_fn(|k| fields[k].to_string());
    Ok((WaveplateTriple::new(v[0], v[1], v[2]), WaveplateTriple::new(v[3], v[4], v[5]), raw))
}

/// The four Pauli settings (I, X, Y, Z), each with its two triples.
pub fn pauli_table() -> AngleTable {
    load_angle_table(PAULI_TABLE_CSV).expect("embedded Pauli table parses")
}

/// The 50 commuting and 50 anti-commuting random pairs.
pub fn random_pair_table() -> AngleTable {
    load_angle_table(RANDOM_TABLE_CSV).expect("embedded random-pair table parses")
}

/// `C1..C50` followed by `A1..A50`, reconstructed from the printed angles.
pub fn random_pairs() -> Vec<GatePair<f64>> {
    random_pair_table().pairs()
}
