//! Parameter sweeps over `(p, d, lambda)` grids with deterministic CSV output.
//!
//! Cells are independent and run on a dedicated thread pool; rows are sorted
//! before emission so the output bytes do not depend on the worker count.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{dx_subgroup_bound, Regime};
use crate::energy::{d_times, energy_deviation_report, mult_energy, ENERGY_REPORT_LIMIT};
use crate::error::Error;
use crate::field::{divisors, is_prime, FieldContext, Subgroup};
use crate::incidence::{
    collinear_triples, collinear_triples_bruteforce, iota_moments, second_moment_closed_form, triple_deviation_report,
    TRIPLES_SET_LIMIT,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest modulus a sweep accepts; every cell allocates O(p) histograms.
pub const SWEEP_MODULUS_LIMIT: u64 = 10_000_000;

/// Moduli up to this size also get the incidence-moment checks, which cost O(p^2).
const MOMENT_CHECK_LIMIT: u64 = 2000;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Arithmetic(#[from] Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRange {
    /// Smallest candidate.
    pub start: u64,
    /// Number of consecutive primes taken from `start` upward.
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllKeyword {
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderSelection {
    All(AllKeyword),
    List(Vec<u64>),
}

impl Default for OrderSelection {
    fn default() -> Self {
        OrderSelection::All(AllKeyword::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaSampling {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `T_lambda(G)` against `|G|^6/p`.
    Triples,
    /// `E(G + lambda)` against `|G|^4/p`.
    Energy,
    /// `D_x(G)` against its upper bound; independent of lambda.
    Dtimes,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Triples => "triples",
            Measure::Energy => "energy",
            Measure::Dtimes => "dtimes",
        }
    }

    fn order_limit(self) -> u64 {
        match self {
            Measure::Triples => TRIPLES_SET_LIMIT as u64,
            Measure::Energy | Measure::Dtimes => ENERGY_REPORT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    P,
    D,
    Lambda,
    Measure,
    Value,
    MainTerm,
    Deviation,
    Regime,
    Bound,
    Ratio,
}

impl Column {
    pub const ALL: [Column; 10] = [
        Column::P,
        Column::D,
        Column::Lambda,
        Column::Measure,
        Column::Value,
        Column::MainTerm,
        Column::Deviation,
        Column::Regime,
        Column::Bound,
        Column::Ratio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::P => "p",
            Column::D => "d",
            Column::Lambda => "lambda",
            Column::Measure => "measure",
            Column::Value => "value",
            Column::MainTerm => "main_term",
            Column::Deviation => "deviation",
            Column::Regime => "regime",
            Column::Bound => "bound",
            Column::Ratio => "ratio",
        }
    }
}

fn default_max_order() -> u64 {
    1000
}

fn default_measures() -> Vec<Measure> {
    vec![Measure::Triples]
}

fn default_jobs() -> usize {
    1
}

/// A sweep definition, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime_range: Option<PrimeRange>,
    #[serde(default)]
    pub subgroup_orders: OrderSelection,
    #[serde(default = "default_max_order")]
    pub max_order: u64,
    pub lambda: LambdaSampling,
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<Column>>,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| SweepError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |msg: String| Err(SweepError::Spec(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        match (&self.primes, &self.prime_range) {
            (Some(_), Some(_)) => return bad("give either primes or prime_range, not both".into()),
            (None, None) => return bad("one of primes or prime_range is required".into()),
            (None, Some(r)) if r.count == 0 => return bad("prime_range.count must be positive".into()),
            _ => {}
        }
        for p in self.resolved_primes() {
            if p < 3 || !is_prime(p) {
                return bad(format!("{p} is not an odd prime"));
            }
            if p > SWEEP_MODULUS_LIMIT {
                return bad(format!("prime {p} exceeds the sweep limit {SWEEP_MODULUS_LIMIT}"));
            }
        }
        if self.lambda.count == 0 {
            return bad("lambda.count must be positive".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if self.measures.is_empty() {
            return bad("measures must not be empty".into());
        }
        if let Some(cols) = &self.columns {
            if cols.is_empty() {
                return bad("columns must not be empty".into());
            }
        }
        if let OrderSelection::List(orders) = &self.subgroup_orders {
            if orders.contains(&0) {
                return bad("subgroup orders must be positive".into());
            }
        }
        for m in &self.measures {
            if self.max_order > m.order_limit() {
                return bad(format!(
                    "max_order {} exceeds the {} limit {}",
                    self.max_order,
                    m.as_str(),
                    m.order_limit()
                ));
            }
        }
        Ok(())
    }

    pub fn resolved_primes(&self) -> Vec<u64> {
        let mut primes = match (&self.primes, &self.prime_range) {
            (Some(list), _) => list.clone(),
            (None, Some(r)) => (r.start.max(2)..)
                .filter(|&n| is_prime(n))
                .take_while(|&n| n <= SWEEP_MODULUS_LIMIT + 1)
                .take(r.count)
                .collect(),
            (None, None) => Vec::new(),
        };
        primes.sort_unstable();
        primes.dedup();
        primes
    }

    pub fn columns(&self) -> Vec<Column> {
        self.columns.clone().unwrap_or_else(|| Column::ALL.to_vec())
    }

    /// Subgroup orders swept for `p`, ascending.
    pub fn orders_for(&self, p: u64) -> Vec<u64> {
        let all = divisors(p - 1);
        let chosen: Vec<u64> = match &self.subgroup_orders {
            OrderSelection::All(_) => all,
            OrderSelection::List(list) => all.into_iter().filter(|d| list.contains(d)).collect(),
        };
        chosen.into_iter().filter(|&d| d <= self.max_order).collect()
    }
}

/// The lambdas for cell `(p, d)`, a pure function of `(seed, p, d)`.
pub fn sample_lambdas(seed: u64, p: u64, d: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((p << 32) | d);
    (0..count).map(|_| rng.gen_range(1..p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: u64,
    pub d: u64,
    /// `0` for measures that do not depend on lambda.
    pub lambda: u64,
    pub measure: Measure,
    pub value: u128,
    pub main_term: f64,
    pub deviation: f64,
    pub regime: Regime,
    pub bound: f64,
    pub ratio: f64,
}

impl SweepRow {
    fn key(&self) -> (u64, u64, u64, Measure) {
        (self.p, self.d, self.lambda, self.measure)
    }

    fn cell(&self, col: Column) -> String {
        match col {
            Column::P => self.p.to_string(),
            Column::D => self.d.to_string(),
            Column::Lambda => self.lambda.to_string(),
            Column::Measure => self.measure.as_str().to_string(),
            Column::Value => self.value.to_string(),
            Column::MainTerm => format_float(self.main_term),
            Column::Deviation => format_float(self.deviation),
            Column::Regime => self.regime.as_str().to_string(),
            Column::Bound => format_float(self.bound),
            Column::Ratio => format_float(self.ratio),
        }
    }
}

/// Seventeen significant digits: enough for any `f64` to round-trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub p: u64,
    pub d: u64,
    pub lambda: u64,
    pub measure: Measure,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub violations: Vec<Violation>,
}

struct Cell<'a> {
    ctx: &'a FieldContext,
    group: Subgroup,
    lambdas: Vec<u64>,
}

impl Cell<'_> {
    fn violation(&self, lambda: u64, measure: Measure, message: String) -> Violation {
        Violation {
            p: self.ctx.p(),
            d: self.group.order(),
            lambda,
            measure,
            message,
        }
    }

    fn run(&self, measures: &[Measure], check: bool) -> Result<SweepOutcome, Error> {
        let mut out = SweepOutcome::default();
        for &m in measures {
            match m {
                Measure::Triples | Measure::Energy => {
                    for &lambda in &self.lambdas {
                        let row = self.measure_shifted(m, lambda)?;
                        if check {
                            out.violations.extend(self.check_shifted(&row)?);
                        }
                        out.rows.push(row);
                    }
                }
                Measure::Dtimes => {
                    let row = self.measure_dtimes()?;
                    if check {
                        out.violations.extend(self.check_dtimes(&row));
                    }
                    out.rows.push(row);
                }
            }
        }
        Ok(out)
    }

    fn measure_shifted(&self, m: Measure, lambda: u64) -> Result<SweepRow, Error> {
        let (p, d) = (self.ctx.p(), self.group.order());
        Ok(if m == Measure::Triples {
            let r = triple_deviation_report(self.ctx, &self.group, lambda)?;
            SweepRow {
                p,
                d,
                lambda,
                measure: m,
                value: r.t,
                main_term: r.main_term,
                deviation: r.deviation,
                regime: r.regime,
                bound: r.regime_bound,
                ratio: r.ratio,
            }
        } else {
            let r = energy_deviation_report(self.ctx, &self.group, lambda)?;
            SweepRow {
                p,
                d,
                lambda,
                measure: m,
                value: r.energy,
                main_term: r.main_term,
                deviation: r.deviation,
                regime: r.regime,
                bound: r.regime_bound,
                ratio: r.ratio,
            }
        })
    }

    /// `D_x(G)` is reported against the upper bound itself, so `deviation`
    /// carries the value and `ratio = value / bound`.
    fn measure_dtimes(&self) -> Result<SweepRow, Error> {
        let (p, d) = (self.ctx.p(), self.group.order());
        let value = d_times(self.ctx, self.group.elements())?;
        let (bound, regime) = dx_subgroup_bound(p, d);
        Ok(SweepRow {
            p,
            d,
            lambda: 0,
            measure: Measure::Dtimes,
            value,
            main_term: (d as f64).powi(8) / p as f64,
            deviation: value as f64,
            regime,
            bound,
            ratio: value as f64 / bound,
        })
    }

    fn check_shifted(&self, row: &SweepRow) -> Result<Vec<Violation>, Error> {
        let ctx = self.ctx;
        let g = self.group.elements();
        let n = self.group.order() as u128;
        let lambda = row.lambda;
        let mut v = Vec::new();
        let mut fail = |msg: String| v.push(self.violation(lambda, row.measure, msg));
        if !row.ratio.is_finite() {
            fail(format!("ratio is not finite: {}", row.ratio));
        }
        match row.measure {
            Measure::Triples => {
                if row.value > n.pow(6) {
                    fail(format!("T = {} exceeds |G|^6", row.value));
                }
                if n * n <= 64 {
                    let brute = collinear_triples_bruteforce(ctx, g, g, 1, lambda)?;
                    if brute != row.value {
                        fail(format!("T = {} but enumeration gives {brute}", row.value));
                    }
                }
                if n <= 200 {
                    let swapped = collinear_triples(ctx, g, g, lambda, 1)?;
                    if swapped != row.value {
                        fail(format!("T not symmetric: {} vs {swapped}", row.value));
                    }
                }
                if ctx.p() <= MOMENT_CHECK_LIMIT {
                    let m = iota_moments(ctx, g, g, lambda, 1)?;
                    let pn2 = ctx.p() as u128 * n * n;
                    if m.first != pn2 || m.first_scaled != pn2 {
                        fail(format!("first moments {} / {} differ from p|G|^2", m.first, m.first_scaled));
                    }
                    let closed = second_moment_closed_form(ctx, g, g, lambda, 1)?;
                    if m.second != closed {
                        fail(format!("second moment {} differs from closed form {closed}", m.second));
                    }
                }
            }
            Measure::Energy => {
                if row.value < n * n {
                    fail(format!("energy {} below the diagonal count", row.value));
                }
                let e = mult_energy(ctx, g, g)?;
                if e != n.pow(3) {
                    fail(format!("subgroup energy {e} differs from |G|^3"));
                }
            }
            Measure::Dtimes => {}
        }
        Ok(v)
    }

    fn check_dtimes(&self, row: &SweepRow) -> Vec<Violation> {
        let n = self.group.order() as u128;
        let zero_factor = n * n * (2 * n - 1);
        let mut v = Vec::new();
        if row.value < zero_factor * zero_factor {
            v.push(self.violation(0, Measure::Dtimes, format!("D_x = {} below h(0)^2", row.value)));
        }
        if !row.ratio.is_finite() {
            v.push(self.violation(0, Measure::Dtimes, format!("ratio is not finite: {}", row.ratio)));
        }
        v
    }
}

/// Runs every cell of `spec`; with `check`, also runs the property checks.
pub fn run_sweep(spec: &SweepSpec, check: bool) -> Result<SweepOutcome, SweepError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| SweepError::Spec(e.to_string()))?;
    let mut measures = spec.measures.clone();
    measures.sort_unstable();
    measures.dedup();

    let contexts: Vec<FieldContext> = spec
        .resolved_primes()
        .into_iter()
        .map(FieldContext::new)
        .collect::<Result<_, _>>()?;
    let mut cells = Vec::new();
    for ctx in &contexts {
        for d in spec.orders_for(ctx.p()) {
            cells.push(Cell {
                ctx,
                group: ctx.subgroup(d)?,
                lambdas: sample_lambdas(spec.lambda.seed, ctx.p(), d, spec.lambda.count),
            });
        }
    }

    let results: Vec<Result<SweepOutcome, Error>> =
        pool.install(|| cells.par_iter().map(|c| c.run(&measures, check)).collect());
    let mut outcome = SweepOutcome::default();
    for r in results {
        let r = r?;
        outcome.rows.extend(r.rows);
        outcome.violations.extend(r.violations);
    }
    outcome.rows.sort_by(|a, b| a.key().cmp(&b.key()));
    outcome
        .violations
        .sort_by(|a, b| (a.p, a.d, a.lambda, a.measure).cmp(&(b.p, b.d, b.lambda, b.measure)));
    Ok(outcome)
}

pub fn write_csv<W: Write>(columns: &[Column], rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns.iter().map(|c| c.name()))?;
    for row in rows {
        w.write_record(columns.iter().map(|&c| row.cell(c)))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `spec` and renders the CSV in memory.
pub fn sweep_csv(spec: &SweepSpec) -> Result<String, SweepError> {
    let outcome = run_sweep(spec, false)?;
    let mut buf = Vec::new();
    write_csv(&spec.columns(), &outcome.rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(jobs: usize) -> SweepSpec {
        SweepSpec::from_json(&format!(
            r#"{{"schema_version": 1, "primes": [61, 31], "lambda": {{"count": 2, "seed": 9}},
                "measures": ["energy", "triples", "dtimes"], "jobs": {jobs}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn output_is_independent_of_jobs() {
        assert_eq!(sweep_csv(&spec(1)).unwrap(), sweep_csv(&spec(3)).unwrap());
    }

    #[test]
    fn rows_are_sorted_and_checked() {
        let out = run_sweep(&spec(2), true).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        assert!(out.rows.windows(2).all(|w| w[0].key() <= w[1].key()));
        assert!(out.rows.iter().all(|r| r.ratio.is_finite()));
        // 61: 12 divisors, 31: 8 divisors; 2 lambdas x 2 shifted measures + 1.
        assert_eq!(out.rows.len(), (12 + 8) * 5);
    }

    #[test]
    fn header_and_column_selection() {
        let mut s = spec(1);
        s.columns = Some(vec![Column::P, Column::Ratio]);
        let csv = sweep_csv(&s).unwrap();
        assert!(csv.starts_with("p,ratio\n"));
        let full = sweep_csv(&spec(1)).unwrap();
        assert!(full.starts_with("p,d,lambda,measure,value,main_term,deviation,regime,bound,ratio\n"));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, 123456789.123456789] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn malformed_specs_are_rejected() {
        for text in [
            r#"{"schema_version": 2, "primes": [7], "lambda": {"count": 1, "seed": 0}}"#,
            r#"{"schema_version": 1, "lambda": {"count": 1, "seed": 0}}"#,
            r#"{"schema_version": 1, "primes": [9], "lambda": {"count": 1, "seed": 0}}"#,
            r#"{"schema_version": 1, "primes": [7], "lambda": {"count": 0, "seed": 0}}"#,
            r#"{"schema_version": 1, "primes": [7], "lambda": {"count": 1, "seed": 0}, "jobs": 0}"#,
            r#"{"schema_version": 1, "primes": [7], "lambda": {"count": 1, "seed": 0}, "subgroup_orders": "some"}"#,
            r#"{"schema_version": 1, "primes": [7], "lambda": {"count": 1, "seed": 0}, "extra": 1}"#,
            r#"{"schema_version": 1, "primes": [7], "lambda": {"count": 1, "seed": 0}, "max_order": 3000}"#,
        ] {
            assert!(matches!(SweepSpec::from_json(text), Err(SweepError::Spec(_))), "{text}");
        }
    }

    #[test]
    fn prime_range_and_order_list() {
        let s = SweepSpec::from_json(
            r#"{"schema_version": 1, "prime_range": {"start": 100, "count": 3},
                "subgroup_orders": [2, 3, 4], "lambda": {"count": 1, "seed": 0}}"#,
        )
        .unwrap();
        assert_eq!(s.resolved_primes(), vec![101, 103, 107]);
        assert_eq!(s.orders_for(101), vec![2, 4]);
        assert_eq!(s.orders_for(103), vec![2, 3]);
    }

    #[test]
    fn lambda_sampling_is_per_cell() {
        let a = sample_lambdas(5, 1009, 4, 3);
        assert_eq!(a, sample_lambdas(5, 1009, 4, 3));
        assert_ne!(a, sample_lambdas(5, 1009, 8, 3));
        assert!(a.iter().all(|&l| (1..1009).contains(&l)));
    }
}
