//! Batch experiment runner: a config names construction families, their
//! parameters, and moduli; the runner builds every (family, parameter) cell,
//! analyzes it at every modulus, and emits one flat row per (family,
//! parameter, m) as deterministic CSV or JSON.
//!
//! Cells are independent and run on a rayon pool (capped by the optional
//! `SIDONLAB_THREADS` environment variable); rows are sorted by (family,
//! parameter, m) afterwards so output never depends on scheduling. Floats are
//! printed with six significant digits in CSV and shortest-round-trip in
//! JSON, making byte-identical reruns part of the contract.

use crate::analysis::{self, AnalysisError, FlatRecord};
use crate::constructions::{self, ConstructionError, Family};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Column order is the serialization order of [`FlatRecord`] with the cell
/// coordinates in front.
pub const CSV_HEADER: &str =
    "family,param,N,k,ell,m,dev_l2,dev_linf,bound,branch,ratio_l2,uniformity,N_m,d0,epsilon,dichotomy";

/// Hard cap on moduli per cell, so a rule like "2..floor(N^{1/1})" fails
/// loudly instead of expanding into millions of rows.
pub const MAX_MODULI_PER_CELL: u64 = 4096;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("construction failed for cell ({family}, {param}): {source}")]
    Construction {
        family: Family,
        param: u64,
        source: ConstructionError,
    },
    #[error("analysis failed for cell ({family}, {param}, m={m}): {source}")]
    Analysis {
        family: Family,
        param: u64,
        m: u64,
        source: AnalysisError,
    },
    #[error("moduli rule expands to {got} values for cell ({family}, {param}); maximum {max}")]
    TooManyModuli {
        family: Family,
        param: u64,
        got: u64,
        max: u64,
    },
    #[error("i/o failure on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Moduli are either an explicit list or a range rule evaluated per cell.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ModuliSpec {
    List(Vec<u64>),
    Rule(String),
}

/// Parsed form of a rule string: `LO..HI` with `HI` a literal integer or
/// `floor(N^{NUM/DEN})`, evaluated against each cell's ambient bound N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuliRule {
    pub lo: u64,
    pub hi: RuleBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleBound {
    Constant(u64),
    /// floor(N^{num/den}); exponent at most 1 (num ≤ den) keeps the
    /// expansion sublinear in N.
    RootFloor {
        num: u32,
        den: u32,
    },
}

impl ModuliRule {
    /// Accepts `"2..10"` and `"2..floor(N^{1/6})"`; exponents `NUM/DEN`
    /// (or a bare `NUM`) need 1 ≤ num ≤ den ≤ 16.
    pub fn parse(rule: &str) -> Result<Self, String> {
        let (lo_text, hi_text) = rule
            .split_once("..")
            .ok_or_else(|| format!("rule {rule:?} has no '..' separator"))?;
        let lo: u64 = lo_text
            .trim()
            .parse()
            .map_err(|_| format!("rule lower bound {lo_text:?} is not an integer"))?;
        if lo == 0 {
            return Err("rule lower bound must be at least 1".into());
        }
        let hi_text = hi_text.trim();
        let hi = if let Some(inner) = hi_text
            .strip_prefix("floor(N^{")
            .and_then(|rest| rest.strip_suffix("})"))
        {
            let (num_text, den_text) = match inner.split_once('/') {
                Some((n, d)) => (n, d),
                None => (inner, "1"),
            };
            let num: u32 = num_text
                .trim()
                .parse()
                .map_err(|_| format!("exponent numerator {num_text:?} is not an integer"))?;
            let den: u32 = den_text
                .trim()
                .parse()
                .map_err(|_| format!("exponent denominator {den_text:?} is not an integer"))?;
            if num == 0 || den == 0 || num > den || den > 16 {
                return Err(format!(
                    "exponent {num}/{den} out of range (need 1 ≤ num ≤ den ≤ 16)"
                ));
            }
            RuleBound::RootFloor { num, den }
        } else {
            RuleBound::Constant(
                hi_text
                    .parse()
                    .map_err(|_| format!("rule upper bound {hi_text:?} is not an integer"))?,
            )
        };
        Ok(ModuliRule { lo, hi })
    }

    /// The (possibly empty) inclusive range [lo, hi(N)].
    pub fn evaluate(&self, n: u64) -> (u64, u64) {
        let hi = match self.hi {
            RuleBound::Constant(hi) => hi,
            RuleBound::RootFloor { num, den } => integer_root_floor(n, num, den),
        };
        (self.lo, hi)
    }
}

/// Largest m with m^den ≤ n^num, exact in integers.
pub fn integer_root_floor(n: u64, num: u32, den: u32) -> u64 {
    let target = (n as u128)
        .checked_pow(num)
        .expect("numerator exponent ≤ 3 cannot overflow u128 for u64 inputs");
    let pow_le = |m: u128| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..den {
            acc = match acc.checked_mul(m) {
                Some(v) => v,
                None => return false,
            };
            if acc > target {
                return false;
            }
        }
        acc <= target
    };
    let (mut lo, mut hi) = (0u128, (n as u128) + 1);
    // Invariant: pow_le(lo) holds, pow_le(hi) fails (num ≤ den ⇒ n^num ≤ n^den < (n+1)^den).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pow_le(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo as u64
}

fn default_c() -> f64 {
    1.0
}

fn default_grid_factor() -> u64 {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Declarative description of a batch run, loaded from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub families: Vec<Family>,
    /// Construction parameters: primes, except counts for mian_chowla.
    pub primes: Vec<u64>,
    pub moduli: ModuliSpec,
    /// Slack multiplier for ε = c·(m/√N)^{1/2}.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Grid oversampling for cosine scans; accepted for config compatibility
    /// and validated (≥ 8), though the flat row schema carries no cosine
    /// column for it to influence.
    #[serde(default = "default_grid_factor")]
    pub grid_factor: u64,
    pub output: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        if self.families.is_empty() {
            return invalid("families must be nonempty".into());
        }
        if self.primes.is_empty() {
            return invalid("primes must be nonempty".into());
        }
        match &self.moduli {
            ModuliSpec::List(list) => {
                if list.is_empty() {
                    return invalid("moduli list must be nonempty".into());
                }
                if list.contains(&0) {
                    return invalid("moduli must be at least 1".into());
                }
            }
            ModuliSpec::Rule(rule) => {
                if let Err(reason) = ModuliRule::parse(rule) {
                    return invalid(format!("bad moduli rule: {reason}"));
                }
            }
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return invalid(format!(
                "c must be a positive finite number, got {}",
                self.c
            ));
        }
        if self.grid_factor < 8 {
            return invalid(format!(
                "grid_factor must be at least 8, got {}",
                self.grid_factor
            ));
        }
        Ok(())
    }
}

/// One output row: cell coordinates plus the flat analysis record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub family: Family,
    pub param: u64,
    #[serde(flatten)]
    pub record: FlatRecord,
}

/// A logged, non-fatal omission: the cell produced no rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipRecord {
    pub family: Family,
    pub param: u64,
    pub reason: String,
}

impl fmt::Display for SkipRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "skip ({}, {}): {}", self.family, self.param, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub rows: Vec<ExperimentRow>,
    pub skips: Vec<SkipRecord>,
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let threads: usize = std::env::var("SIDONLAB_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .ok()
}

/// Runs every (family, parameter) cell, one row per modulus, rows sorted by
/// (family, parameter, m). Construction failures abort the whole run naming
/// the cell; a cell whose set fails strict verification, or whose moduli
/// rule evaluates to an empty range, is skipped and logged instead.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    config.validate()?;
    let mut families = config.families.clone();
    families.sort();
    families.dedup();
    let mut params = config.primes.clone();
    params.sort_unstable();
    params.dedup();
    let (moduli_list, rule) = match &config.moduli {
        ModuliSpec::List(list) => {
            let mut list = list.clone();
            list.sort_unstable();
            list.dedup();
            (Some(list), None)
        }
        ModuliSpec::Rule(rule) => {
            let parsed = ModuliRule::parse(rule).map_err(ExperimentError::InvalidConfig)?;
            (None, Some(parsed))
        }
    };

    let cells: Vec<(Family, u64)> = families
        .iter()
        .flat_map(|&family| params.iter().map(move |&p| (family, p)))
        .collect();

    let run_cells = || -> Result<Vec<CellOutcome>, ExperimentError> {
        cells
            .par_iter()
            .map(|&(family, param)| run_cell(family, param, &moduli_list, rule, config.c))
            .collect()
    };
    let outcomes = match thread_pool() {
        Some(pool) => pool.install(run_cells)?,
        None => run_cells()?,
    };

    let mut rows = Vec::new();
    let mut skips = Vec::new();
    for (cell_rows, skip) in outcomes {
        rows.extend(cell_rows);
        skips.extend(skip);
    }
    rows.sort_by_key(|a| (a.family, a.param, a.record.m));
    Ok(RunOutcome { rows, skips })
}

/// Rows produced by one (family, parameter) cell, plus a skip note when the
/// cell's modulus range came out empty.
type CellOutcome = (Vec<ExperimentRow>, Option<SkipRecord>);

fn run_cell(
    family: Family,
    param: u64,
    moduli_list: &Option<Vec<u64>>,
    rule: Option<ModuliRule>,
    c: f64,
) -> Result<CellOutcome, ExperimentError> {
    let output = constructions::construct(family, param).map_err(|source| {
        ExperimentError::Construction {
            family,
            param,
            source,
        }
    })?;
    let set = output.set;
    let moduli: Vec<u64> = match (moduli_list, rule) {
        (Some(list), _) => list.clone(),
        (None, Some(rule)) => {
            let (lo, hi) = rule.evaluate(set.ambient_bound());
            if lo > hi {
                let reason = format!(
                    "moduli rule yields empty range {lo}..{hi} at N = {}",
                    set.ambient_bound()
                );
                return Ok((
                    Vec::new(),
                    Some(SkipRecord {
                        family,
                        param,
                        reason,
                    }),
                ));
            }
            let count = hi - lo + 1;
            if count > MAX_MODULI_PER_CELL {
                return Err(ExperimentError::TooManyModuli {
                    family,
                    param,
                    got: count,
                    max: MAX_MODULI_PER_CELL,
                });
            }
            (lo..=hi).collect()
        }
        (None, None) => unreachable!("config validation guarantees list or rule"),
    };
    let mut rows = Vec::with_capacity(moduli.len());
    for m in moduli {
        let record =
            analysis::analyze_set(&set, m, c).map_err(|source| ExperimentError::Analysis {
                family,
                param,
                m,
                source,
            })?;
        rows.push(ExperimentRow {
            family,
            param,
            record: record.flat(),
        });
    }
    Ok((rows, None))
}

/// Six-significant-digit formatting with no trailing zero noise: plain
/// decimal within a sane magnitude window, scientific outside it. This is
/// the fixed CSV float format; byte determinism follows from it.
pub fn format_significant(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let formatted = format!("{value:.5e}");
    let (mantissa, exponent) = formatted
        .split_once('e')
        .expect("{:.5e} always contains an exponent");
    let exp: i32 = exponent.parse().expect("exponent is an integer");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{value:.decimals$}");
        if fixed.contains('.') {
            let trimmed = fixed.trim_end_matches('0').trim_end_matches('.');
            trimmed.to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

fn csv_row(row: &ExperimentRow) -> String {
    let r = &row.record;
    let uniformity = r.uniformity.map(format_significant).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        row.family,
        row.param,
        r.n,
        r.k,
        format_significant(r.ell),
        r.m,
        format_significant(r.dev_l2),
        format_significant(r.dev_linf),
        format_significant(r.bound),
        r.branch,
        format_significant(r.ratio_l2),
        uniformity,
        r.n_m,
        r.d0,
        format_significant(r.epsilon),
        r.dichotomy,
    )
}

/// Serializes rows in the given format. CSV uses [`CSV_HEADER`] and
/// [`format_significant`]; JSON is a pretty-printed array with serde's
/// shortest-round-trip floats.
pub fn write_rows<W: Write>(
    writer: &mut W,
    rows: &[ExperimentRow],
    format: OutputFormat,
) -> io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(writer, "{CSV_HEADER}")?;
            for row in rows {
                writeln!(writer, "{}", csv_row(row))?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *writer, rows)?;
            writeln!(writer)?;
        }
    }
    Ok(())
}

/// In-memory rendering; what [`run_to_file`] writes, byte for byte.
pub fn render_rows(rows: &[ExperimentRow], format: OutputFormat) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, format).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("rendered output is UTF-8")
}

/// Runs the experiment and writes the report to `config.output` atomically
/// (temp file in the destination directory, then rename), so an aborted run
/// leaves no partial file behind.
pub fn run_to_file(config: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    let outcome = run_experiment(config)?;
    let path = &config.output;
    let io_err = |source: io::Error| ExperimentError::Io {
        path: path.clone(),
        source,
    };
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let mut temp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    write_rows(temp.as_file_mut(), &outcome.rows, config.format).map_err(io_err)?;
    temp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(moduli: ModuliSpec) -> ExperimentConfig {
        ExperimentConfig {
            families: vec![Family::Singer],
            primes: vec![2, 3],
            moduli,
            c: 1.0,
            grid_factor: 8,
            output: PathBuf::from("out.csv"),
            format: OutputFormat::Csv,
        }
    }

    #[test]
    fn rule_parsing() {
        assert_eq!(
            ModuliRule::parse("2..10").unwrap(),
            ModuliRule {
                lo: 2,
                hi: RuleBound::Constant(10)
            }
        );
        assert_eq!(
            ModuliRule::parse("2..floor(N^{1/6})").unwrap(),
            ModuliRule {
                lo: 2,
                hi: RuleBound::RootFloor { num: 1, den: 6 }
            }
        );
        assert_eq!(
            ModuliRule::parse("1..floor(N^{1})").unwrap(),
            ModuliRule {
                lo: 1,
                hi: RuleBound::RootFloor { num: 1, den: 1 }
            }
        );
        assert!(ModuliRule::parse("2..floor(N^{7/6})").is_err()); // exponent > 1
        assert!(ModuliRule::parse("2..floor(N^{1/17})").is_err());
        assert!(ModuliRule::parse("0..5").is_err());
        assert!(ModuliRule::parse("five").is_err());
        assert!(ModuliRule::parse("2..x").is_err());
    }

    #[test]
    fn root_floor_is_exact() {
        assert_eq!(integer_root_floor(50, 1, 6), 1); // 2^6 = 64 > 50
        assert_eq!(integer_root_floor(64, 1, 6), 2);
        assert_eq!(integer_root_floor(63, 1, 6), 1);
        assert_eq!(integer_root_floor(1_000_000, 1, 6), 10);
        assert_eq!(integer_root_floor(100, 1, 2), 10);
        assert_eq!(integer_root_floor(99, 1, 2), 9);
        assert_eq!(integer_root_floor(8, 2, 3), 4); // 8^(2/3)
        assert_eq!(integer_root_floor(0, 1, 3), 0);
        assert_eq!(integer_root_floor(u64::MAX, 1, 1), u64::MAX);
        // Cross-check against floats away from boundaries.
        for n in [10u64, 1234, 99999, 123_456_789] {
            let f = (n as f64).powf(1.0 / 6.0).floor() as u64;
            let exact = integer_root_floor(n, 1, 6);
            assert!(
                exact == f || exact == f + 1 || exact + 1 == f,
                "n={n}: {exact} vs {f}"
            );
            assert!(u128::from(exact).pow(6) <= u128::from(n));
            assert!(u128::from(exact + 1).pow(6) > u128::from(n));
        }
    }

    #[test]
    fn config_validation() {
        let mut config = base_config(ModuliSpec::List(vec![2, 3]));
        config.validate().unwrap();
        config.families.clear();
        assert!(matches!(
            config.validate(),
            Err(ExperimentError::InvalidConfig(_))
        ));

        let mut config = base_config(ModuliSpec::List(vec![]));
        assert!(config.validate().is_err());
        config.moduli = ModuliSpec::List(vec![0]);
        assert!(config.validate().is_err());
        config.moduli = ModuliSpec::Rule("2..floor(N^{1/6})".into());
        config.validate().unwrap();
        config.grid_factor = 7;
        assert!(config.validate().is_err());
        config.grid_factor = 8;
        config.c = 0.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn config_json_round_trip_and_defaults() {
        let config = ExperimentConfig::from_json(
            r#"{
                "families": ["singer", "bose_chowla"],
                "primes": [3, 2],
                "moduli": [2, 3],
                "output": "report.csv"
            }"#,
        )
        .unwrap();
        assert_eq!(config.c, 1.0);
        assert_eq!(config.grid_factor, 8);
        assert_eq!(config.format, OutputFormat::Csv);

        let config = ExperimentConfig::from_json(
            r#"{
                "families": ["erdos_turan"],
                "primes": [5],
                "moduli": "2..floor(N^{1/6})",
                "format": "json",
                "output": "report.json"
            }"#,
        )
        .unwrap();
        assert_eq!(config.moduli, ModuliSpec::Rule("2..floor(N^{1/6})".into()));
        assert_eq!(config.format, OutputFormat::Json);

        let err =
            ExperimentConfig::from_json(r#"{"families": [], "unknown_field": 1}"#).unwrap_err();
        assert!(matches!(err, ExperimentError::InvalidConfig(_)));
    }

    #[test]
    fn four_rows_sorted() {
        let outcome = run_experiment(&base_config(ModuliSpec::List(vec![3, 2]))).unwrap();
        assert!(outcome.skips.is_empty());
        let keys: Vec<(Family, u64, u64)> = outcome
            .rows
            .iter()
            .map(|r| (r.family, r.param, r.record.m))
            .collect();
        assert_eq!(
            keys,
            vec![
                (Family::Singer, 2, 2),
                (Family::Singer, 2, 3),
                (Family::Singer, 3, 2),
                (Family::Singer, 3, 3),
            ]
        );
    }

    #[test]
    fn families_sort_before_params() {
        let mut config = base_config(ModuliSpec::List(vec![2]));
        config.families = vec![Family::Singer, Family::BoseChowla];
        let outcome = run_experiment(&config).unwrap();
        let keys: Vec<(Family, u64)> = outcome.rows.iter().map(|r| (r.family, r.param)).collect();
        assert_eq!(
            keys,
            vec![
                (Family::BoseChowla, 2),
                (Family::BoseChowla, 3),
                (Family::Singer, 2),
                (Family::Singer, 3),
            ]
        );
    }

    #[test]
    fn construction_failure_aborts_naming_cell() {
        let mut config = base_config(ModuliSpec::List(vec![2]));
        config.families = vec![Family::BoseChowla];
        config.primes = vec![4];
        let err = run_experiment(&config).unwrap_err();
        assert!(err.to_string().contains("(bose_chowla, 4)"), "got: {err}");
    }

    #[test]
    fn mian_chowla_cells_produce_rows() {
        // The greedy family's parameter is a term count, not a prime; its
        // cells flow through the same analysis as the field families.
        let mut config = base_config(ModuliSpec::List(vec![2, 3]));
        config.families = vec![Family::MianChowla, Family::Singer];
        config.primes = vec![5];
        let outcome = run_experiment(&config).unwrap();
        assert!(outcome.skips.is_empty());
        let keys: Vec<(Family, u64, u64)> = outcome
            .rows
            .iter()
            .map(|r| (r.family, r.param, r.record.m))
            .collect();
        assert_eq!(
            keys,
            vec![
                (Family::MianChowla, 5, 2),
                (Family::MianChowla, 5, 3),
                (Family::Singer, 5, 2),
                (Family::Singer, 5, 3),
            ]
        );
        // mian_chowla(5) = {1,2,4,8,13}: N = 13, k = 5.
        let row = &outcome.rows[0];
        assert_eq!(row.record.n, 13);
        assert_eq!(row.record.k, 5);
    }

    #[test]
    fn empty_rule_range_is_skipped() {
        // singer(2) has N = 7 and singer(11) has N = 133; floor(N^{1/6}) is
        // 1 for the first (2^6 = 64 > 7) and 2 for the second (2^6 ≤ 133),
        // so exactly one cell is empty under the rule 2..floor(N^{1/6}).
        let mut config = base_config(ModuliSpec::Rule("2..floor(N^{1/6})".into()));
        config.primes = vec![2, 11];
        let outcome = run_experiment(&config).unwrap();
        assert_eq!(outcome.skips.len(), 1);
        assert_eq!(outcome.skips[0].param, 2);
        assert!(outcome.skips[0].reason.contains("empty range"));
        let keys: Vec<(u64, u64)> = outcome.rows.iter().map(|r| (r.param, r.record.m)).collect();
        assert_eq!(keys, vec![(11, 2)]);
    }

    #[test]
    fn rule_produces_rows_when_range_is_nonempty() {
        let mut config = base_config(ModuliSpec::Rule("2..floor(N^{1/2})".into()));
        config.primes = vec![3];
        let outcome = run_experiment(&config).unwrap();
        // singer(3): N = 13, floor(√13) = 3 → m ∈ {2, 3}.
        assert!(outcome.skips.is_empty());
        let ms: Vec<u64> = outcome.rows.iter().map(|r| r.record.m).collect();
        assert_eq!(ms, vec![2, 3]);
    }

    #[test]
    fn format_significant_cases() {
        assert_eq!(format_significant(2.0), "2");
        assert_eq!(format_significant(0.5), "0.5");
        assert_eq!(format_significant(1.0), "1");
        assert_eq!(format_significant(2.0710678118654755), "2.07107");
        assert_eq!(format_significant(-0.17157287525381), "-0.171573");
        assert_eq!(format_significant(10303.0), "10303");
        assert_eq!(format_significant(5.477225575051661), "5.47723");
        assert_eq!(format_significant(150_000_000.0), "1.5e8");
        assert_eq!(format_significant(0.0001), "0.0001");
        assert_eq!(format_significant(0.00001), "1e-5");
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(0.8408964152537145), "0.840896");
        assert_eq!(format_significant(2.899822), "2.89982");
        assert_eq!(format_significant(999999.4), "999999");
        assert_eq!(format_significant(999999.5), "1e6");
    }

    #[test]
    fn csv_header_and_pinned_row() {
        let mut config = base_config(ModuliSpec::List(vec![5]));
        config.families = vec![Family::ErdosTuran];
        config.primes = vec![5];
        let outcome = run_experiment(&config).unwrap();
        let text = render_rows(&outcome.rows, OutputFormat::Csv);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "erdos_turan,5,50,5,2.07107,5,2,1,2.89982,1,0.689698,1,2,9,0.840896,true"
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn json_rows_flatten_cell_coordinates() {
        let mut config = base_config(ModuliSpec::List(vec![5]));
        config.families = vec![Family::ErdosTuran];
        config.primes = vec![5];
        let outcome = run_experiment(&config).unwrap();
        let text = render_rows(&outcome.rows, OutputFormat::Json);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let row = &parsed.as_array().unwrap()[0];
        assert_eq!(row["family"], "erdos_turan");
        assert_eq!(row["param"], 5);
        assert_eq!(row["N"], 50);
        assert_eq!(row["N_m"], 2);
        assert_eq!(row["dev_l2"], 2.0);
        assert_eq!(row["dichotomy"], true);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let config = ExperimentConfig {
            families: vec![Family::Singer, Family::BoseChowla, Family::ErdosTuran],
            primes: vec![5, 3, 7],
            moduli: ModuliSpec::Rule("2..floor(N^{1/2})".into()),
            c: 1.3,
            grid_factor: 8,
            output: PathBuf::from("unused.csv"),
            format: OutputFormat::Csv,
        };
        let first = render_rows(&run_experiment(&config).unwrap().rows, OutputFormat::Csv);
        let second = render_rows(&run_experiment(&config).unwrap().rows, OutputFormat::Csv);
        assert_eq!(first, second);
        assert!(first.lines().count() > 3);
    }

    #[test]
    fn run_to_file_writes_report_and_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let output = dir.path().join("report.csv");
        let mut config = base_config(ModuliSpec::List(vec![2, 3]));
        config.output = output.clone();
        let outcome = run_to_file(&config).unwrap();
        let text = std::fs::read_to_string(&output).unwrap();
        assert_eq!(text, render_rows(&outcome.rows, OutputFormat::Csv));
        // Exactly the report file; no leftover temp files.
        let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);

        // A failing run must not leave any file at the output path.
        let bad_output = dir.path().join("bad.csv");
        let mut bad = base_config(ModuliSpec::List(vec![2]));
        bad.families = vec![Family::BoseChowla];
        bad.primes = vec![4];
        bad.output = bad_output.clone();
        assert!(run_to_file(&bad).is_err());
        assert!(!bad_output.exists());
        let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn thread_cap_does_not_change_output() {
        // Run with an explicit pool of one thread via the public entry point.
        let config = base_config(ModuliSpec::List(vec![2, 3, 5]));
        let baseline = render_rows(&run_experiment(&config).unwrap().rows, OutputFormat::Csv);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let single = pool.install(|| run_experiment(&config)).unwrap();
        assert_eq!(render_rows(&single.rows, OutputFormat::Csv), baseline);
    }
}
