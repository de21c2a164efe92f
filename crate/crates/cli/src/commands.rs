use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use sparsum_core::bounds::{bound_report_for, dx_subgroup_bound};
use sparsum_core::calibration::calibrate;
use sparsum_core::charsum::RawPoly;
use sparsum_core::sweep::{format_float, run_sweep, sample_lambdas, write_csv, SweepError, SweepSpec};
use sparsum_core::{
    d_times, energy_deviation_report, eval_sparse_sum, eval_sum_subgroup_decomposed, make_field, ratio_shift_set,
    romanoff_coverage, three_fold_sumset, triple_deviation_report, CharacterId, Error, SparsePoly,
};

use crate::args::{Command, Format, SumsetKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Arithmetic(#[from] Error),
    #[error("{0} property violation(s)")]
    Violations(usize),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violations(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Arithmetic(Error::InvalidPolynomial(_)) => 2,
            CliError::Arithmetic(_) => 3,
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Arithmetic(e) => CliError::Arithmetic(e),
            SweepError::Io(e) => CliError::Io(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Expsum { p, poly, character, decomposed, output } => expsum(p, &poly, character, decomposed, output.format),
        Command::Triples { p, order, lambda, lambda_random, seed } => triples(p, order, lambda, lambda_random, seed),
        Command::Energy { p, order, lambda, output } => {
            let ctx = make_field(p)?;
            let report = energy_deviation_report(&ctx, &ctx.subgroup(order)?, lambda)?;
            emit(output.format, &report, || {
                vec![
                    ("p", p.to_string()),
                    ("order", order.to_string()),
                    ("lambda", report.lambda.to_string()),
                    ("energy", report.energy.to_string()),
                    ("main_term", format_float(report.main_term)),
                    ("deviation", format_float(report.deviation)),
                    ("regime", report.regime.to_string()),
                    ("bound", format_float(report.regime_bound)),
                    ("ratio", format_float(report.ratio)),
                ]
            })
        }
        Command::Dtimes { p, set, order, output } => dtimes(p, set, order, output.format),
        Command::Sumset { p, order, lambda, mu, kind, output } => {
            let ctx = make_field(p)?;
            let g = ctx.subgroup(order)?;
            let report = match kind {
                SumsetKind::S1 => three_fold_sumset(&ctx, &g, lambda, mu)?,
                SumsetKind::S2 => ratio_shift_set(&ctx, &g, lambda, mu)?,
            };
            emit(output.format, &report, || {
                let mut rows = vec![
                    ("kind", format!("{:?}", report.kind)),
                    ("size", report.size.to_string()),
                    ("missing_nonzero", report.missing_nonzero.to_string()),
                    ("regime", report.regime.to_string()),
                    ("bound", format_float(report.bound)),
                ];
                let label = if report.zero_in_q.is_some() { "q_covers_nonzero" } else { "covered" };
                rows.push((label, report.covered.to_string()));
                if let Some(z) = report.zero_in_q {
                    rows.push(("zero_in_q", z.to_string()));
                }
                rows
            })
        }
        Command::Romanoff { p, base, output } => {
            let ctx = make_field(p)?;
            let c = romanoff_coverage(&ctx, base)?;
            emit(output.format, &c, || {
                vec![
                    ("p", p.to_string()),
                    ("base", base.to_string()),
                    ("order", c.order.to_string()),
                    ("missing", c.missing.to_string()),
                    ("regime", c.regime.to_string()),
                ]
            })
        }
        Command::Sweep { spec, jobs, check, out } => sweep(&spec, jobs, check, out.as_deref()),
        Command::Calibrate { seed, jobs, out } => {
            if jobs == 0 {
                return Err(CliError::Usage("jobs must be at least 1".into()));
            }
            let text = calibrate(seed, jobs)?.to_json() + "\n";
            write_output(out.as_deref(), text.as_bytes())
        }
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn print_table(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("{k:<width$}  {v}");
    }
}

/// JSON wraps the payload with the schema version; tables print `rows`.
fn emit<T: Serialize>(format: Format, payload: &T, rows: impl FnOnce() -> Vec<(&'static str, String)>) -> Result<()> {
    match format {
        Format::Json => {
            let mut value = serde_json::to_value(payload).map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(obj) = value.as_object_mut() {
                obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
            }
            println!("{}", serde_json::to_string_pretty(&value).map_err(|e| CliError::Usage(e.to_string()))?);
        }
        Format::Table => print_table(&rows()),
    }
    Ok(())
}

fn expsum(p: u64, raw: &RawPoly, j: u64, decomposed: bool, format: Format) -> Result<()> {
    let ctx = make_field(p)?;
    let poly = SparsePoly::from_signed(&ctx, &raw.0)?;
    let chi = CharacterId::new(&ctx, j)?;
    let s = if decomposed {
        eval_sum_subgroup_decomposed(&ctx, &poly, chi)?
    } else {
        eval_sparse_sum(&ctx, &poly, chi)
    };
    let bounds = match bound_report_for(&ctx, &poly, s.norm()) {
        Ok(b) => Some(b),
        Err(Error::NotATrinomial(_)) => None,
        Err(e) => return Err(e.into()),
    };
    match format {
        Format::Json => {
            let value = json!({
                "schema_version": SCHEMA_VERSION,
                "p": p,
                "poly": poly.to_string(),
                "char": j,
                "method": if decomposed { "decomposed" } else { "direct" },
                "sum": { "re": s.re, "im": s.im },
                "abs": s.norm(),
                "best": bounds.as_ref().map(|b| b.best),
                "bounds": bounds,
            });
            println!("{}", serde_json::to_string_pretty(&value).map_err(|e| CliError::Usage(e.to_string()))?);
        }
        Format::Table => {
            let mut rows = vec![
                ("p", p.to_string()),
                ("poly", poly.to_string()),
                ("char", j.to_string()),
                ("S", format!("{} {} {}i", format_float(s.re), if s.im < 0.0 { '-' } else { '+' }, format_float(s.im.abs()))),
                ("|S|", format_float(s.norm())),
            ];
            if let Some(b) = &bounds {
                for e in &b.entries {
                    let note = if e.applicable { "" } else { " (not applicable)" };
                    rows.push((e.name, format!("{}  ratio {}{note}", format_float(e.value), format_float(e.ratio))));
                }
                rows.push(("best", b.best.to_string()));
            }
            print_table(&rows);
        }
    }
    Ok(())
}

fn triples(p: u64, order: u64, lambda: Option<u64>, random: Option<usize>, seed: u64) -> Result<()> {
    let ctx = make_field(p)?;
    let g = ctx.subgroup(order)?;
    let lambdas = match (lambda, random) {
        (Some(l), _) => vec![l],
        (None, Some(n)) if n > 0 => sample_lambdas(seed, p, order, n),
        _ => return Err(CliError::Usage("give --lambda or --lambda-random N with N >= 1".into())),
    };
    let mut rows = Vec::with_capacity(lambdas.len());
    for l in lambdas {
        rows.push(triple_deviation_report(&ctx, &g, l)?);
    }
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let csv_err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(["p", "d", "lambda", "T", "main_term", "deviation", "regime", "bound", "ratio"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.order.to_string(),
            r.lambda.to_string(),
            r.t.to_string(),
            format_float(r.main_term),
            format_float(r.deviation),
            r.regime.to_string(),
            format_float(r.regime_bound),
            format_float(r.ratio),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DtimesOutput {
    p: u64,
    size: usize,
    d_times: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

fn dtimes(p: u64, set: Option<Vec<u64>>, order: Option<u64>, format: Format) -> Result<()> {
    let ctx = make_field(p)?;
    let (elements, order) = match (set, order) {
        (Some(s), _) => (ctx.normalize_set(&s), None),
        (None, Some(d)) => (ctx.subgroup(d)?.elements().to_vec(), Some(d)),
        (None, None) => return Err(CliError::Usage("give --set or --order".into())),
    };
    let value = d_times(&ctx, &elements)?;
    let bound = order.map(|d| dx_subgroup_bound(p, d).0);
    let out = DtimesOutput {
        p,
        size: elements.len(),
        d_times: value,
        order,
        bound,
        ratio: bound.map(|b| value as f64 / b),
    };
    emit(format, &out, || {
        let mut rows = vec![("p", p.to_string()), ("size", out.size.to_string()), ("d_times", value.to_string())];
        if let (Some(b), Some(r)) = (out.bound, out.ratio) {
            rows.push(("bound", format_float(b)));
            rows.push(("ratio", format_float(r)));
        }
        rows
    })
}

fn sweep(path: &Path, jobs: Option<usize>, check: bool, out: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut spec = SweepSpec::from_json(&text)?;
    if let Some(j) = jobs {
        spec.jobs = j;
        spec.validate()?;
    }
    let outcome = run_sweep(&spec, check)?;
    let mut buf = Vec::new();
    write_csv(&spec.columns(), &outcome.rows, &mut buf)?;
    write_output(out, &buf)?;
    if !outcome.violations.is_empty() {
        for v in &outcome.violations {
            eprintln!(
                "violation p={} d={} lambda={} {}: {}",
                v.p,
                v.d,
                v.lambda,
                v.measure.as_str(),
                v.message
            );
        }
        return Err(CliError::Violations(outcome.violations.len()));
    }
    Ok(())
}
