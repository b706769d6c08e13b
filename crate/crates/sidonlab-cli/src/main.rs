//! `sidonlab` — construct, verify, and analyze B₂ (Sidon) sets from the
//! command line, probe cosine-sum minima, and run batch experiments.
//!
//! Exit codes: 0 success; 1 usage or configuration error; 2 the input set
//! fails the B₂ verification; 3 a numeric certification failed internally.

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand};
use sidonlab::analysis::{self, AnalysisError};
use sidonlab::constructions::{self, Family};
use sidonlab::cosine::{self, CosineError};
use sidonlab::experiment::{self, format_significant, ExperimentError, OutputFormat};
use sidonlab::model::B2Set;
use sidonlab::verify;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_B2: u8 = 2;
const EXIT_CERTIFICATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sidonlab",
    version,
    about = "Dense B2 (Sidon) sets: construction, verification, residue statistics, cosine minima"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a named family member and print its elements.
    Construct {
        /// One of: bose_chowla, erdos_turan, mian_chowla, singer.
        family: Family,
        /// Prime parameter (term count for mian_chowla).
        parameter: u64,
    },
    /// Check the distinct-sums property of a set (inline integers or a file).
    Verify {
        /// Inline whitespace-separated elements, or a single path to a set
        /// file (whitespace-separated integers, '#' comments).
        #[arg(required = true, num_args = 1..)]
        input: Vec<String>,
    },
    /// Residue statistics mod m, the deviation bound, and the identity trace.
    Analyze {
        /// Inline elements or a single set-file path.
        #[arg(required = true, num_args = 1..)]
        input: Vec<String>,
        /// Modulus for residue classes.
        #[arg(long)]
        m: u64,
        /// Slack multiplier for epsilon.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Ambient bound N (defaults to the largest element).
        #[arg(long)]
        n: Option<u64>,
        /// Emit the flat record as JSON instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Probe the minimum of a cosine sum: unit weights from --freqs, or the
    /// squared-modulus polynomial of a B2 set from --from-set/--from-file.
    #[command(group(ArgGroup::new("source").required(true).args(["freqs", "from_set", "from_file"])))]
    Cosmin {
        /// Comma-separated strictly increasing frequencies, e.g. 1,2,5.
        #[arg(long, value_delimiter = ',')]
        freqs: Option<Vec<u64>>,
        /// Inline B2 set elements.
        #[arg(long, num_args = 1..)]
        from_set: Option<Vec<u64>>,
        /// Path to a set file.
        #[arg(long)]
        from_file: Option<PathBuf>,
        /// Grid points per unit frequency (at least 8).
        #[arg(long, default_value_t = 32)]
        grid_factor: usize,
        /// Emit JSON instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Run a batch experiment from a JSON config and write CSV/JSON rows.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Display) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    /// The verdict was already printed; carry only the code.
    fn silent(code: u8) -> Self {
        CliError {
            code,
            message: String::new(),
        }
    }
}

impl From<constructions::ConstructionError> for CliError {
    fn from(e: constructions::ConstructionError) -> Self {
        CliError::usage(e)
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        let code = match e {
            AnalysisError::NotB2(_) => EXIT_NOT_B2,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CosineError> for CliError {
    fn from(e: CosineError) -> Self {
        let code = match e {
            CosineError::NotB2(_) => EXIT_NOT_B2,
            CosineError::CertificationFailure { .. } => EXIT_CERTIFICATION,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Analysis {
                source: AnalysisError::NotB2(_),
                ..
            } => EXIT_NOT_B2,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if !err.message.is_empty() {
                eprintln!("error: {}", err.message);
            }
            ExitCode::from(err.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Construct { family, parameter } => construct(family, parameter),
        Command::Verify { input } => verify_command(&input),
        Command::Analyze {
            input,
            m,
            c,
            n,
            json,
        } => analyze(&input, m, c, n, json),
        Command::Cosmin {
            freqs,
            from_set,
            from_file,
            grid_factor,
            json,
        } => cosmin(freqs, from_set, from_file, grid_factor, json),
        Command::Experiment { config } => experiment_command(&config),
    }
}

fn construct(family: Family, parameter: u64) -> Result<(), CliError> {
    let output = constructions::construct(family, parameter)?;
    let rendered: Vec<String> = output.set.elements().iter().map(u64::to_string).collect();
    println!("{}", rendered.join(" "));
    Ok(())
}

fn verify_command(input: &[String]) -> Result<(), CliError> {
    let set = set_from_tokens(input, None)?;
    match verify::verify_b2(&set).witness {
        None => {
            println!(
                "ok: B2 property holds (k={}, max element {})",
                set.len(),
                set.elements().last().copied().unwrap_or(0)
            );
            Ok(())
        }
        Some(witness) => {
            println!("not a B2 set: {witness}");
            Err(CliError::silent(EXIT_NOT_B2))
        }
    }
}

fn analyze(input: &[String], m: u64, c: f64, n: Option<u64>, json: bool) -> Result<(), CliError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(CliError::usage(format!(
            "--c must be a positive finite number, got {c}"
        )));
    }
    let set = set_from_tokens(input, n)?;
    let flat = analysis::analyze_set(&set, m, c)?.flat();
    if json {
        println!("{}", to_json(&flat)?);
        return Ok(());
    }
    println!("N={}", flat.n);
    println!("k={}", flat.k);
    println!("ell={}", format_significant(flat.ell));
    println!("m={}", flat.m);
    println!("dev_l2={}", format_significant(flat.dev_l2));
    println!("dev_linf={}", format_significant(flat.dev_linf));
    println!("bound={}", format_significant(flat.bound));
    println!("branch={}", flat.branch);
    println!("ratio_l2={}", format_significant(flat.ratio_l2));
    match flat.uniformity {
        Some(u) => println!("uniformity={}", format_significant(u)),
        None => println!("uniformity="),
    }
    println!("N_m={}", flat.n_m);
    println!("d0={}", flat.d0);
    println!("epsilon={}", format_significant(flat.epsilon));
    println!("dichotomy={}", flat.dichotomy);
    Ok(())
}

fn cosmin(
    freqs: Option<Vec<u64>>,
    from_set: Option<Vec<u64>>,
    from_file: Option<PathBuf>,
    grid_factor: usize,
    json: bool,
) -> Result<(), CliError> {
    if grid_factor < 8 {
        return Err(CliError::usage(format!(
            "--grid-factor must be at least 8, got {grid_factor}"
        )));
    }
    if let Some(frequencies) = freqs {
        let (report, _) = cosine::probe_with_minimization(&frequencies, grid_factor)?;
        if json {
            println!("{}", to_json(&report)?);
        } else {
            println!("N_terms={}", report.n_terms);
            println!("lambda_max={}", report.lambda_max);
            println!("epsilon={}", format_significant(report.epsilon));
            println!("M_star={}", format_significant(report.m_star));
            println!("A_empirical={}", format_significant(report.a_empirical));
            println!(
                "epsilon_exceeds_3_over_n={}",
                report.epsilon_exceeds_3_over_n
            );
        }
        return Ok(());
    }
    let elements = match (from_set, from_file) {
        (Some(elements), None) => elements,
        (None, Some(path)) => parse_set_file(&path)?,
        _ => unreachable!("clap group enforces exactly one source"),
    };
    let set = b2_from_elements(elements, None)?;
    let poly = cosine::cosine_from_b2(&set)?;
    let grid = grid_factor
        .saturating_mul(poly.lambda_max() as usize)
        .max(64);
    let result = cosine::minimize(&poly, grid)?;
    if json {
        println!("{}", to_json(&result)?);
    } else {
        println!("k={}", set.len());
        println!("lambda_max={}", poly.lambda_max());
        println!("grid_size={}", result.grid_size);
        println!("argmin_x={}", format_significant(result.argmin_x));
        println!("min_value={}", format_significant(result.min_value));
        println!(
            "certified_lower_bound={}",
            format_significant(result.certified_lower_bound)
        );
        println!(
            "lipschitz_constant={}",
            format_significant(result.lipschitz_constant)
        );
    }
    Ok(())
}

fn experiment_command(config_path: &Path) -> Result<(), CliError> {
    let config = experiment::ExperimentConfig::from_file(config_path)?;
    let outcome = experiment::run_to_file(&config)?;
    for skip in &outcome.skips {
        eprintln!("{skip}");
    }
    let format = match config.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    println!(
        "wrote {} rows ({format}) to {} ({} cells skipped)",
        outcome.rows.len(),
        config.output.display(),
        outcome.skips.len()
    );
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError {
        code: EXIT_USAGE,
        message: format!("JSON encoding failed: {e}"),
    })
}

/// Inline integers, or — when the input is a single token that is not an
/// integer — a path to a set file.
fn set_from_tokens(tokens: &[String], ambient: Option<u64>) -> Result<B2Set, CliError> {
    let elements = if tokens.len() == 1 && tokens[0].parse::<u64>().is_err() {
        parse_set_file(Path::new(&tokens[0]))?
    } else {
        tokens
            .iter()
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| CliError::usage(format!("invalid set element {t:?}")))
            })
            .collect::<Result<Vec<u64>, CliError>>()?
    };
    b2_from_elements(elements, ambient)
}

fn b2_from_elements(elements: Vec<u64>, ambient: Option<u64>) -> Result<B2Set, CliError> {
    if elements.is_empty() {
        return Err(CliError::usage("the set is empty"));
    }
    let max = elements.iter().copied().max().expect("nonempty");
    let ambient = match ambient {
        Some(n) if n < max => {
            return Err(CliError::usage(format!(
                "--n {n} is below the largest element {max}"
            )));
        }
        Some(n) => n,
        None => max,
    };
    B2Set::new(elements, ambient).map_err(CliError::usage)
}

/// Whitespace-separated integers; anything after '#' on a line is a comment.
fn parse_set_file(path: &Path) -> Result<Vec<u64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut elements = Vec::new();
    for line in text.lines() {
        let data = line.split('#').next().unwrap_or("");
        for token in data.split_whitespace() {
            let value: u64 = token.parse().map_err(|_| {
                CliError::usage(format!("invalid integer {token:?} in {}", path.display()))
            })?;
            elements.push(value);
        }
    }
    Ok(elements)
}
