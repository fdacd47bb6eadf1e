//! Command-line frontend: parse a rational target matrix, run the exact
//! reduction solvers, and emit deterministic certified reports.
//!
//! Exit codes: 0 success, 2 parse error, 3 precondition violation,
//! 4 certificate or consistency failure.

mod matrix;
mod report;
mod verify;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{Signed, ToPrimitive};

use sda_core::certify::{dominance_certificate, improvement_certificate, k_prime_certificate};
use sda_core::exactnum::{parse_rat, Rat};
use sda_core::illl::{compute_k_prime, query_q, run_illl, IlllConfig};
use sda_core::lattice::ReductionParams;
use sda_core::oracle::{brute_best, dirichlet_witness};
use sda_core::sda::approximate_once;
use sda_core::Error;

use matrix::{load_matrix, ParsedMatrix};
use report::{AgainstSection, ReportDocument, SolverEcho, TupleEcho, SCHEMA_VERSION};

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn parse(message: String) -> Self {
        Self { code: 2, message }
    }

    pub fn invalid(message: String) -> Self {
        Self { code: 3, message }
    }

    pub fn cert_failure(message: String) -> Self {
        Self { code: 4, message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) => 2,
            Error::InvalidParameter(_) | Error::Intractable(_) => 3,
            Error::LinearDependence | Error::NoNonzeroQPart | Error::Internal(_) => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Machine-readable JSON document (deterministic, verifiable)
    Report,
    /// Human-readable text
    Plain,
}

#[derive(Parser)]
#[command(
    name = "sda",
    version,
    about = "Certified simultaneous Diophantine approximation through exact lattice reduction",
    after_help = "MATRIX is a file path or inline text: one row per line (';' also \
                  separates rows inline), entries whitespace-separated, each an exact \
                  fraction like 610/987 or a decimal literal; '#' starts a comment line."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One reduction at accuracy eps, with both quality bounds certified
    Approx {
        #[arg(allow_hyphen_values = true)]
        matrix: String,
        /// Accuracy in (0, 1), exact fraction or decimal
        #[arg(long, default_value = "1/2")]
        eps: String,
        /// Reduction parameter in (1/4, 1)
        #[arg(long, default_value = "3/4")]
        alpha: String,
        /// Bits certified for the dyadic scale lower bound
        #[arg(long, default_value_t = 128)]
        precision: u32,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
    /// Iterated reductions, accuracy shrinking by d each round
    Illl {
        #[arg(allow_hyphen_values = true)]
        matrix: String,
        #[arg(long, default_value = "1/2")]
        eps: String,
        /// Per-round accuracy step, greater than 1
        #[arg(long, default_value = "2")]
        d: String,
        /// Denominator size that stops the iteration
        #[arg(long, default_value = "1024")]
        qmax: String,
        #[arg(long, default_value = "3/4")]
        alpha: String,
        #[arg(long, default_value_t = 128)]
        precision: u32,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
    /// Select and certify the stored tuple for a denominator cap Q
    Query {
        #[arg(allow_hyphen_values = true)]
        matrix: String,
        /// Denominator cap, admissible between the eps lower limit and qmax
        #[arg(long = "Q")]
        q_cap: String,
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(long, default_value = "2")]
        d: String,
        #[arg(long, default_value = "1024")]
        qmax: String,
        #[arg(long, default_value = "3/4")]
        alpha: String,
        #[arg(long, default_value_t = 128)]
        precision: u32,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
    /// Recheck every value and certificate in a report document
    Verify { report_file: String },
    /// Exhaustive best-approximation search up to a denominator bound
    Oracle {
        #[arg(allow_hyphen_values = true)]
        matrix: String,
        /// Search bound (positive integer); guarded against intractable boxes
        #[arg(long = "Q")]
        q_cap: u64,
        /// Solver report whose tuples to compare against the exhaustive best
        #[arg(long)]
        against: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Approx {
            matrix,
            eps,
            alpha,
            precision,
            format,
        } => cmd_approx(&matrix, &eps, &alpha, precision, format),
        Command::Illl {
            matrix,
            eps,
            d,
            qmax,
            alpha,
            precision,
            format,
        } => cmd_illl(&matrix, &eps, &d, &qmax, &alpha, precision, format),
        Command::Query {
            matrix,
            q_cap,
            eps,
            d,
            qmax,
            alpha,
            precision,
            format,
        } => cmd_query(&matrix, &q_cap, &eps, &d, &qmax, &alpha, precision, format),
        Command::Verify { report_file } => cmd_verify(&report_file),
        Command::Oracle {
            matrix,
            q_cap,
            against,
            format,
        } => cmd_oracle(&matrix, q_cap, against.as_deref(), format),
    }
}

fn flag_rat(value: &str, flag: &str) -> Result<Rat, CliError> {
    parse_rat(value).map_err(|e| CliError::parse(format!("{flag}: {e}")))
}

fn check_precision(precision: u32) -> Result<(), CliError> {
    if precision == 0 {
        return Err(CliError::invalid("--precision must be at least 1".into()));
    }
    Ok(())
}

fn solver_echo(
    parsed: &ParsedMatrix,
    eps: &Rat,
    params: &ReductionParams,
    precision: u32,
) -> SolverEcho {
    SolverEcho {
        matrix: parsed.echo.clone(),
        n: parsed.matrix.n(),
        m: parsed.matrix.m(),
        eps: eps.to_string(),
        alpha: params.alpha().to_string(),
        beta: params.beta().to_string(),
        precision_bits: precision,
    }
}

/// Prints the document and maps any failing certificate to exit code 4.
fn emit(doc: ReportDocument, format: Format) -> Result<ExitCode, CliError> {
    let text = match format {
        Format::Report => report::to_json(&doc),
        Format::Plain => report::render_plain(&doc),
    };
    print!("{text}");
    if doc.certificates.iter().all(|c| c.pass) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}

fn cmd_approx(
    matrix: &str,
    eps: &str,
    alpha: &str,
    precision: u32,
    format: Format,
) -> Result<ExitCode, CliError> {
    let parsed = load_matrix(matrix)?;
    let eps = flag_rat(eps, "--eps")?;
    let params = ReductionParams::new(flag_rat(alpha, "--alpha")?)?;
    check_precision(precision)?;
    let approx = approximate_once(&parsed.matrix, &eps, &params, precision)?;
    let echo = solver_echo(&parsed, &eps, &params, precision);
    emit(report::approx_document(echo, &approx), format)
}

fn illl_config(
    eps: &str,
    d: &str,
    qmax: &str,
    alpha: &str,
    precision: u32,
) -> Result<IlllConfig, CliError> {
    let params = ReductionParams::new(flag_rat(alpha, "--alpha")?)?;
    Ok(IlllConfig::new(
        flag_rat(eps, "--eps")?,
        flag_rat(d, "--d")?,
        flag_rat(qmax, "--qmax")?,
        params,
        precision,
    )?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_illl(
    matrix: &str,
    eps: &str,
    d: &str,
    qmax: &str,
    alpha: &str,
    precision: u32,
    format: Format,
) -> Result<ExitCode, CliError> {
    let parsed = load_matrix(matrix)?;
    let config = illl_config(eps, d, qmax, alpha, precision)?;
    let trace = run_illl(&parsed.matrix, &config)?;
    let prediction = compute_k_prime(&config, trace.n, trace.m);
    let k_prime_cert = k_prime_certificate(config.d(), &prediction);
    let echo = solver_echo(&parsed, config.eps(), config.params(), precision);
    let doc = report::illl_document(
        echo,
        config.d().to_string(),
        config.q_max().to_string(),
        &trace,
        &k_prime_cert,
    );
    emit(doc, format)
}

#[allow(clippy::too_many_arguments)]
fn cmd_query(
    matrix: &str,
    q_cap: &str,
    eps: &str,
    d: &str,
    qmax: &str,
    alpha: &str,
    precision: u32,
    format: Format,
) -> Result<ExitCode, CliError> {
    let parsed = load_matrix(matrix)?;
    let q_cap = flag_rat(q_cap, "--Q")?;
    let config = illl_config(eps, d, qmax, alpha, precision)?;
    let trace = run_illl(&parsed.matrix, &config)?;
    let outcome = query_q(&parsed.matrix, &trace, &q_cap)?;
    let prediction = compute_k_prime(&config, trace.n, trace.m);
    let k_prime_cert = k_prime_certificate(config.d(), &prediction);
    let improvement = improvement_certificate(trace.n, trace.m);
    let echo = solver_echo(&parsed, config.eps(), config.params(), precision);
    let doc = report::query_document(
        echo,
        config.d().to_string(),
        config.q_max().to_string(),
        &trace,
        &k_prime_cert,
        q_cap.to_string(),
        &outcome,
        &improvement,
    );
    emit(doc, format)
}

fn cmd_verify(report_file: &str) -> Result<ExitCode, CliError> {
    let text = fs::read_to_string(report_file)
        .map_err(|e| CliError::parse(format!("cannot read {report_file}: {e}")))?;
    let count = verify::verify_text(&text)?;
    println!("report verified: all {count} certificates reproduced and passing");
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(
    matrix: &str,
    q_cap: u64,
    against: Option<&str>,
    format: Format,
) -> Result<ExitCode, CliError> {
    let parsed = load_matrix(matrix)?;
    let best = brute_best(&parsed.matrix, q_cap)?;
    let witness = dirichlet_witness(&parsed.matrix, q_cap)?;

    let (against_section, dominance) = match against {
        None => (None, Vec::new()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::parse(format!("cannot read {path}: {e}")))?;
            let doc: ReportDocument = serde_json::from_str(&text)
                .map_err(|e| CliError::parse(format!("malformed report {path}: {e}")))?;
            if doc.schema_version != SCHEMA_VERSION {
                return Err(CliError::parse(format!(
                    "unsupported schema_version {:?} in {path}",
                    doc.schema_version
                )));
            }
            if doc.config.matrix != parsed.echo {
                return Err(CliError::invalid(
                    "the --against report targets a different matrix".into(),
                ));
            }
            let mut tuples = Vec::new();
            let mut certs = Vec::new();
            for section in &doc.results {
                let q: Vec<_> = section
                    .q
                    .iter()
                    .map(|s| {
                        s.parse::<num_bigint::BigInt>()
                            .map_err(|_| CliError::parse(format!("bad q value {s:?} in {path}")))
                    })
                    .collect::<Result<_, _>>()?;
                let p: Vec<_> = section
                    .p
                    .iter()
                    .map(|s| {
                        s.parse::<num_bigint::BigInt>()
                            .map_err(|_| CliError::parse(format!("bad p value {s:?} in {path}")))
                    })
                    .collect::<Result<_, _>>()?;
                if q.len() != parsed.matrix.m() || p.len() != parsed.matrix.n() {
                    return Err(CliError::parse(format!(
                        "tuple shape in {path} does not match the matrix"
                    )));
                }
                let max_abs_q = q.iter().map(|x| x.abs()).max().expect("m >= 1");
                let tuple_error = (0..parsed.matrix.n())
                    .map(|i| {
                        let combo: Rat = (0..parsed.matrix.m())
                            .map(|j| parsed.matrix.entry(i, j) * Rat::from(q[j].clone()))
                            .sum();
                        (Rat::from(p[i].clone()) + combo).abs()
                    })
                    .max()
                    .expect("n >= 1");
                // Tuples beyond the enumeration guard are skipped, not failed:
                // dominance is a spot check, not a completeness claim.
                let Some(bound) = max_abs_q.to_u64() else {
                    continue;
                };
                match brute_best(&parsed.matrix, bound) {
                    Ok(ob) => {
                        certs.push(dominance_certificate(
                            section.k,
                            &max_abs_q,
                            &tuple_error,
                            &ob.best_error,
                        ));
                        tuples.push(TupleEcho {
                            k: section.k,
                            q: section.q.clone(),
                            p: section.p.clone(),
                        });
                    }
                    Err(Error::Intractable(_)) => continue,
                    Err(e) => return Err(e.into()),
                }
            }
            (
                Some(AgainstSection {
                    command: doc.command.clone(),
                    tuples,
                }),
                certs,
            )
        }
    };

    let doc = report::oracle_document(
        parsed.echo.clone(),
        parsed.matrix.n(),
        parsed.matrix.m(),
        &best,
        witness.as_ref(),
        against_section,
        &dominance,
    );
    emit(doc, format)
}
