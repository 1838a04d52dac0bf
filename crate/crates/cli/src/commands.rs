use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use qswitch::comb::{self, OperatorJson, SdpSettings, SPACES};
use qswitch::experiment::{self, NoiseParams, SuiteKind, SuiteReport};
use qswitch::gates::{self, classify_pair, GateClass, RandomSource, DEFAULT_CLASS_TOLERANCE};
use qswitch::linalg::{frobenius_distance_up_to_phase, Unitary2};
use qswitch::tables::{self, AngleTable, TableLayout};
use qswitch::{switch, waveplate, Error};

use crate::spec::{parse_gate, parse_state, SpecError};
use crate::Global;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotHermitian { .. }
            | Error::NonFinite
            | Error::AmbiguousClass { .. }
            | Error::ZeroCounts
            | Error::DegenerateSweep(_)
            | Error::NonConvergence { .. }
            | Error::InvalidComb { .. }
            | Error::DecompositionFailed { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Syntax(m) => CliError::Usage(m),
            SpecError::Invalid(e) => e.into(),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

fn print_json(v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn load_noise(g: &Global) -> Result<NoiseParams> {
    match &g.noise {
        None => Ok(NoiseParams::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            NoiseParams::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
    }
}

fn load_table(path: &Path, layout: TableLayout) -> Result<AngleTable> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let table = tables::load_angle_table(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if table.layout != Some(layout) {
        return Err(CliError::Usage(format!("{}: expected a {layout:?} table", path.display())));
    }
    Ok(table)
}

fn out_dir(g: &Global, default: Option<&str>) -> Result<Option<PathBuf>> {
    let dir = g.out.clone().or_else(|| default.map(PathBuf::from));
    if let Some(d) = &dir {
        fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
    }
    Ok(dir)
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>> {
    fs::File::create(path).map(io::BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_json_file(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, v).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(f).and_then(|_| f.flush()).map_err(|e| io_err(path, e))
}

fn matrix_json(u: &Unitary2<f64>) -> Value {
    json!(u.entries().map(|z| [z.re, z.im]))
}

pub fn discriminate(g: &Global, u1: &str, u2: &str, state: &str) -> Result<()> {
    let (a, b) = (parse_gate(u1)?, parse_gate(u2)?);
    let psi = parse_state(state)?;
    let out = switch::exit_probabilities(&a, &b, &psi)?;
    let class = classify_pair(a.matrix(), b.matrix(), DEFAULT_CLASS_TOLERANCE)?;
    let verdict = if out.degenerate { "INCONCLUSIVE".to_string() } else { out.verdict.to_string() };
    let warning = (class == GateClass::Neither).then_some(
        "the gates neither commute nor anti-commute (NEITHER): the promise does not hold and the verdict is not meaningful",
    );
    if g.json {
        print_json(&json!({
            "u1": matrix_json(&a),
            "u2": matrix_json(&b),
            "state": psi.amplitudes().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "p0": out.p0,
            "p1": out.p1,
            "verdict": verdict,
            "class": class,
            "warning": warning,
        }))?;
    } else {
        println!("p0 = {:.12}", out.p0);
        println!("p1 = {:.12}", out.p1);
        println!("verdict: {verdict}");
    }
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
    Ok(())
}

pub fn suite(g: &Global, which: &str, table: Option<&Path>, noiseless: bool) -> Result<()> {
    let kind: SuiteKind = which.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    if noiseless && g.noise.is_some() {
        return Err(CliError::Usage("--noiseless and --noise are mutually exclusive".into()));
    }
    let noise = if noiseless { NoiseParams::noiseless() } else { load_noise(g)? };
    let rng = RandomSource::new(g.seed);
    let report = match (kind, table) {
        (_, None) => experiment::run_suite(kind, &noise, &rng)?,
        (SuiteKind::Pauli, Some(p)) => {
            let t = load_table(p, TableLayout::Pauli)?;
            let settings = experiment::pauli_settings(&t, &experiment::default_input(), 0);
            experiment::run_settings("pauli", &settings, &["pauli".to_string()], &noise, &rng)?
        }
        (SuiteKind::Random100, Some(p)) => {
            experiment::run_random_suite_with(&load_table(p, TableLayout::RandomPairs)?, &noise, &rng)?
        }
        (SuiteKind::StateSweep, Some(_)) => {
            return Err(CliError::Usage("statesweep always uses the built-in Pauli table".into()))
        }
    };
    let dir = out_dir(g, Some("."))?.expect("default set");
    let csv_path = dir.join(format!("{}.csv", report.summary.suite));
    let json_path = dir.join(format!("{}_summary.json", report.summary.suite));
    write_suite(&report, &csv_path, &json_path)?;

    let s = &report.summary;
    if g.json {
        print_json(&json!({
            "summary": s,
            "wrong_port_counts": report.wrong_port_counts(),
            "csv": csv_path,
            "summary_json": json_path,
        }))?;
    } else {
        println!("suite {}: {} settings x {} repeats", s.suite, s.settings, s.repeats);
        println!(
            "success = {:.4} ± {:.4} (largest per-setting spread {:.4})",
            s.success_mean, s.success_std, s.error_bar
        );
        if s.groups.len() > 1 {
            for grp in &s.groups {
                println!("  {:<16} {:.4} ± {:.4}", grp.name, grp.mean, grp.std);
            }
        }
        println!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(())
}

fn write_suite(report: &SuiteReport, csv_path: &Path, json_path: &Path) -> Result<()> {
    report.write_csv(create(csv_path)?)?;
    write_json_file(json_path, &report.summary)
}

pub fn bound(
    g: &Global,
    table: Option<&Path>,
    max_iterations: Option<usize>,
    primal_tol: Option<f64>,
    gap_tol: Option<f64>,
) -> Result<()> {
    let noise = load_noise(g)?;
    let table = match table {
        Some(p) => load_table(p, TableLayout::RandomPairs)?,
        None => tables::random_pair_table(),
    };
    let mut settings = SdpSettings::default();
    if let Some(n) = max_iterations {
        settings.max_iterations = n;
    }
    if let Some(t) = primal_tol {
        settings.primal_tol = t;
    }
    if let Some(t) = gap_tol {
        settings.gap_tol = t;
    }
    let samples = g.samples.unwrap_or(comb::DEFAULT_SAMPLES);
    let rng = RandomSource::new(g.seed);

    let omega = comb::objective(samples, &rng.derive(0))?;
    let sol = comb::optimize_fixed_order_with(&omega.matrix, &settings)?;
    // |tr(δΩ W)| ≤ ‖δΩ‖_F ‖W‖_F
    let mc_error = omega.frobenius_std_error.unwrap_or(0.0) * sol.w_star.matrix().frobenius_norm();

    let pairs: Vec<_> = table.rows.iter().map(|r| r.to_pair()).collect();
    let probs = comb::pair_success_probabilities(&sol.w_star, &pairs)?;
    let evaluation = probs.iter().sum::<f64>() / probs.len().max(1) as f64;
    let class_mean = |c: GateClass| {
        let v: Vec<f64> = pairs.iter().zip(&probs).filter(|(p, _)| p.label == c).map(|(_, &q)| q).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };

    let switch_run = experiment::run_random_suite_with(&table, &noise, &rng.derive(1))?;
    let sw = &switch_run.summary;
    let gap = sw.success_mean - sol.p_succ;
    let gap_sigmas = if sw.success_std > 0.0 { gap / sw.success_std } else { f64::INFINITY };

    let report = json!({
        "samples": samples,
        "seed": g.seed,
        "p_succ": sol.p_succ,
        "upper_bound": sol.upper_bound,
        "certified_gap": sol.gap(),
        "monte_carlo_error": mc_error,
        "iterations": sol.iterations,
        "primal_residual": sol.primal_residual,
        "dual_residual": sol.dual_residual,
        "residuals": sol.residuals,
        "evaluation": {
            "pairs": pairs.len(),
            "mean": evaluation,
            "commuting": class_mean(GateClass::Commute),
            "anticommuting": class_mean(GateClass::Anticommute),
        },
        "switch": {
            "success_mean": sw.success_mean,
            "success_std": sw.success_std,
            "gap": gap,
            "gap_sigmas": gap_sigmas,
        },
    });

    if let Some(dir) = out_dir(g, None)? {
        let csv_path = dir.join("bound_evaluation.csv");
        let mut w = csv::Writer::from_writer(create(&csv_path)?);
        let csv_err = |e: csv::Error| CliError::Usage(format!("{}: {e}", csv_path.display()));
        w.write_record(["row", "label", "p_correct"]).map_err(csv_err)?;
        for (r, p) in table.rows.iter().zip(&probs) {
            w.write_record([r.name.clone(), r.label.to_string(), format!("{p:.12}")]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| io_err(&csv_path, e))?;
        write_json_file(&dir.join("bound_summary.json"), &report)?;
        write_json_file(&dir.join("w_star.json"), &OperatorJson::from_matrix(sol.w_star.matrix(), &SPACES)?)?;
    }

    if g.json {
        return print_json(&report);
    }
    println!("fixed-order optimum  p_succ = {:.6}  (certified upper bound {:.6})", sol.p_succ, sol.upper_bound);
    println!("monte carlo          {samples} draws per class, |error| <~ {mc_error:.1e}");
    println!("solver               {} iterations, primal residual {:.2e}", sol.iterations, sol.primal_residual);
    println!("comb residuals       {}", sol.residuals);
    println!(
        "evaluation           {:.4} on {} table pairs (commuting {:.4}, anti-commuting {:.4})",
        evaluation,
        pairs.len(),
        class_mean(GateClass::Commute),
        class_mean(GateClass::Anticommute)
    );
    println!("simulated switch     {:.4} ± {:.4}", sw.success_mean, sw.success_std);
    println!("gap                  {gap:.4} = {gap_sigmas:.1} standard deviations");
    Ok(())
}

pub fn compile(g: &Global, gate: &str) -> Result<()> {
    let u = parse_gate(gate)?;
    let t = waveplate::decompose(&u)?;
    let residual = frobenius_distance_up_to_phase(t.to_unitary().matrix(), u.matrix())?;
    if g.json {
        return print_json(&json!({
            "gate": matrix_json(&u),
            "q_first": t.q_first,
            "h": t.h,
            "q_last": t.q_last,
            "spec": format!("wp:{},{},{}", t.q_first, t.h, t.q_last),
            "residual": residual,
        }));
    }
    println!("quarter {:>10.4} deg", t.q_first);
    println!("half    {:>10.4} deg", t.h);
    println!("quarter {:>10.4} deg", t.q_last);
    println!("round-trip residual (up to phase) {residual:.3e}");
    Ok(())
}

pub fn sample_pairs(g: &Global) -> Result<()> {
    let n = g.samples.unwrap_or(1000);
    let pairs = gates::sample_pairs::<f64>(n, &mut RandomSource::new(g.seed));
    match out_dir(g, None)? {
        Some(dir) => {
            let (csv_path, json_path) = (dir.join("pairs.csv"), dir.join("pairs.json"));
            gates::write_pairs_csv(&pairs, create(&csv_path)?)?;
            let mut f = create(&json_path)?;
            gates::write_pairs_json(&pairs, &mut f)?;
            f.flush().map_err(|e| io_err(&json_path, e))?;
            if g.json {
                print_json(&json!({ "pairs": pairs.len(), "csv": csv_path, "json": json_path }))?;
            } else {
                println!("wrote {} pairs to {} and {}", pairs.len(), csv_path.display(), json_path.display());
            }
        }
        None if g.json => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            gates::write_pairs_json(&pairs, &mut lock)?;
            writeln!(lock).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        None => gates::write_pairs_csv(&pairs, io::stdout().lock())?,
    }
    Ok(())
}
