//! The report document: a versioned, deterministic JSON structure whose
//! every numeric value is an exact fraction string, self-contained enough
//! for the `verify` subcommand to reproduce each certificate verdict.

use serde::{Deserialize, Serialize};

use sda_core::certify::{CertStatus, Certificate};
use sda_core::illl::{improvement_ratio, IlllReport, QueryOutcome, StopReason};
use sda_core::oracle::{DirichletWitness, OracleBest};
use sda_core::sda::{ApproxResult, CertifiedApprox};

pub const SCHEMA_VERSION: &str = "1";

/// Fixed label attached to every Dirichlet-style witness: for rational
/// targets the independence hypothesis behind the infinitely-many-solutions
/// bound never holds, so the search is evidence, not a theorem check.
pub const WITNESS_NOTE: &str =
    "heuristic witness only: rational targets never satisfy the independence hypothesis";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    pub config: ConfigSection,
    pub results: Vec<ResultSection>,
    pub certificates: Vec<CertificateSection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub illl: Option<IlllSection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub query: Option<QuerySection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle: Option<OracleSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSection {
    pub n: usize,
    pub m: usize,
    pub matrix: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_max: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision_bits: Option<u32>,
}

/// One emitted tuple. `k` is the 1-based iteration that produced it, 0 for
/// a single-shot run; `terminal` marks the round that tripped the
/// denominator stop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultSection {
    pub k: u32,
    pub q: Vec<String>,
    pub p: Vec<String>,
    pub row_errors: Vec<String>,
    pub max_abs_q: String,
    pub max_error: String,
    pub terminal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    pub name: String,
    pub inequality: String,
    pub pass: bool,
    pub slack: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlllSection {
    pub k_prime_predicted: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_prime_alternate: Option<u32>,
    pub k_observed: u32,
    pub stop_reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySection {
    #[serde(rename = "Q")]
    pub q_cap: String,
    pub selected_k: u32,
    pub prior_bound_coeff: String,
    pub current_bound_coeff: String,
    pub improvement_ratio: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub search_bound: u64,
    pub q_star: Vec<String>,
    pub best_error: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dirichlet: Option<DirichletSection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub against: Option<AgainstSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSection {
    pub q: Vec<String>,
    pub row_errors: Vec<String>,
    pub max_error: String,
    pub max_abs_q: String,
    pub note: String,
}

/// Echo of the solver tuples a dominance comparison ran against; only the
/// tuples small enough for exhaustive search are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgainstSection {
    pub command: String,
    pub tuples: Vec<TupleEcho>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleEcho {
    pub k: u32,
    pub q: Vec<String>,
    pub p: Vec<String>,
}

pub fn certificate_section(cert: &Certificate) -> CertificateSection {
    CertificateSection {
        name: cert.name.clone(),
        inequality: cert.inequality.clone(),
        pass: cert.passed(),
        slack: cert.status == CertStatus::PassWithSlack,
    }
}

pub fn result_section(result: &ApproxResult, terminal: bool) -> ResultSection {
    ResultSection {
        k: result.iteration_k,
        q: result.q.iter().map(|x| x.to_string()).collect(),
        p: result.p.iter().map(|x| x.to_string()).collect(),
        row_errors: result.row_errors.iter().map(|x| x.to_string()).collect(),
        max_abs_q: result.max_abs_q.to_string(),
        max_error: result.max_error.to_string(),
        terminal,
    }
}

pub fn stop_reason_label(reason: StopReason) -> &'static str {
    match reason {
        StopReason::QMaxExceeded => "q_max_exceeded",
        StopReason::KPrimeReached => "k_prime_reached",
    }
}

pub struct SolverEcho {
    pub matrix: Vec<Vec<String>>,
    pub n: usize,
    pub m: usize,
    pub eps: String,
    pub alpha: String,
    pub beta: String,
    pub precision_bits: u32,
}

pub fn approx_document(echo: SolverEcho, approx: &CertifiedApprox) -> ReportDocument {
    ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        command: "approx".into(),
        config: ConfigSection {
            n: echo.n,
            m: echo.m,
            matrix: echo.matrix,
            eps: Some(echo.eps),
            alpha: Some(echo.alpha),
            beta: Some(echo.beta),
            d: None,
            q_max: None,
            precision_bits: Some(echo.precision_bits),
        },
        results: vec![result_section(&approx.result, false)],
        certificates: approx
            .certificates
            .iter()
            .map(certificate_section)
            .collect(),
        illl: None,
        query: None,
        oracle: None,
    }
}

fn illl_sections(
    report: &IlllReport,
    k_prime_cert: &Certificate,
) -> (Vec<ResultSection>, Vec<CertificateSection>, IlllSection) {
    let results: Vec<ResultSection> = report
        .iterations
        .iter()
        .map(|it| result_section(&it.result, it.terminal))
        .collect();
    let mut certificates = vec![certificate_section(k_prime_cert)];
    for it in &report.iterations {
        certificates.extend(it.certificates.iter().map(certificate_section));
    }
    let section = IlllSection {
        k_prime_predicted: report.k_prime_predicted,
        k_prime_alternate: report.k_prime_alternate,
        k_observed: report.k_observed,
        stop_reason: stop_reason_label(report.stop_reason).into(),
    };
    (results, certificates, section)
}

pub fn illl_document(
    echo: SolverEcho,
    d: String,
    q_max: String,
    report: &IlllReport,
    k_prime_cert: &Certificate,
) -> ReportDocument {
    let (results, certificates, illl) = illl_sections(report, k_prime_cert);
    ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        command: "illl".into(),
        config: ConfigSection {
            n: echo.n,
            m: echo.m,
            matrix: echo.matrix,
            eps: Some(echo.eps),
            alpha: Some(echo.alpha),
            beta: Some(echo.beta),
            d: Some(d),
            q_max: Some(q_max),
            precision_bits: Some(echo.precision_bits),
        },
        results,
        certificates,
        illl: Some(illl),
        query: None,
        oracle: None,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn query_document(
    echo: SolverEcho,
    d: String,
    q_max: String,
    report: &IlllReport,
    k_prime_cert: &Certificate,
    q_cap: String,
    outcome: &QueryOutcome,
    improvement_cert: &Certificate,
) -> ReportDocument {
    let mut doc = illl_document(echo, d, q_max, report, k_prime_cert);
    doc.command = "query".into();
    doc.certificates
        .extend(outcome.certificates.iter().map(certificate_section));
    doc.certificates.push(certificate_section(improvement_cert));
    let (prior, current, ratio) = improvement_ratio(report.n, report.m);
    doc.query = Some(QuerySection {
        q_cap,
        selected_k: outcome.selected_k,
        prior_bound_coeff: prior.to_string(),
        current_bound_coeff: current.to_string(),
        improvement_ratio: ratio.to_string(),
    });
    doc
}

pub fn oracle_document(
    matrix_echo: Vec<Vec<String>>,
    n: usize,
    m: usize,
    best: &OracleBest,
    dirichlet: Option<&DirichletWitness>,
    against: Option<AgainstSection>,
    dominance: &[Certificate],
) -> ReportDocument {
    ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        command: "oracle".into(),
        config: ConfigSection {
            n,
            m,
            matrix: matrix_echo,
            eps: None,
            alpha: None,
            beta: None,
            d: None,
            q_max: None,
            precision_bits: None,
        },
        results: Vec::new(),
        certificates: dominance.iter().map(certificate_section).collect(),
        illl: None,
        query: None,
        oracle: Some(OracleSection {
            search_bound: best.search_bound,
            q_star: best.q_star.iter().map(|x| x.to_string()).collect(),
            best_error: best.best_error.to_string(),
            dirichlet: dirichlet.map(|w| DirichletSection {
                q: w.q.iter().map(|x| x.to_string()).collect(),
                row_errors: w.row_errors.iter().map(|x| x.to_string()).collect(),
                max_error: w.max_error.to_string(),
                max_abs_q: w.max_abs_q.to_string(),
                note: WITNESS_NOTE.into(),
            }),
            against,
        }),
    }
}

/// Deterministic serialization: fixed key order (struct order), no
/// timestamps, trailing newline. Identical inputs yield identical bytes.
pub fn to_json(doc: &ReportDocument) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("report serialization cannot fail");
    text.push('\n');
    text
}

pub fn render_plain(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    push(&mut out, format!("command: {}", doc.command));
    push(
        &mut out,
        format!("target: {} x {} matrix", doc.config.n, doc.config.m),
    );
    for row in &doc.config.matrix {
        push(&mut out, format!("  {}", row.join(" ")));
    }
    let mut params = Vec::new();
    if let Some(eps) = &doc.config.eps {
        params.push(format!("eps = {eps}"));
    }
    if let Some(alpha) = &doc.config.alpha {
        params.push(format!("alpha = {alpha}"));
    }
    if let Some(beta) = &doc.config.beta {
        params.push(format!("beta = {beta}"));
    }
    if let Some(d) = &doc.config.d {
        params.push(format!("d = {d}"));
    }
    if let Some(q_max) = &doc.config.q_max {
        params.push(format!("q_max = {q_max}"));
    }
    if let Some(p) = doc.config.precision_bits {
        params.push(format!("precision_bits = {p}"));
    }
    if !params.is_empty() {
        push(&mut out, params.join(", "));
    }
    if let Some(illl) = &doc.illl {
        let alt = illl
            .k_prime_alternate
            .map(|a| format!(" (boundary tie, strict reading {a})"))
            .unwrap_or_default();
        push(
            &mut out,
            format!(
                "k' predicted = {}{alt}; observed = {}; stop: {}",
                illl.k_prime_predicted, illl.k_observed, illl.stop_reason
            ),
        );
    }
    if let Some(query) = &doc.query {
        push(
            &mut out,
            format!(
                "Q = {}, selected k = {}; prior coefficient {} vs current {} (ratio {})",
                query.q_cap,
                query.selected_k,
                query.prior_bound_coeff,
                query.current_bound_coeff,
                query.improvement_ratio
            ),
        );
    }
    for r in &doc.results {
        let terminal = if r.terminal { " [terminal]" } else { "" };
        push(
            &mut out,
            format!(
                "k={}: q = [{}], p = [{}], max error = {}, max |q| = {}{terminal}",
                r.k,
                r.q.join(", "),
                r.p.join(", "),
                r.max_error,
                r.max_abs_q
            ),
        );
    }
    if let Some(oracle) = &doc.oracle {
        push(
            &mut out,
            format!(
                "oracle: best error at bound {} is {} (q* = [{}])",
                oracle.search_bound,
                oracle.best_error,
                oracle.q_star.join(", ")
            ),
        );
        if let Some(w) = &oracle.dirichlet {
            push(
                &mut out,
                format!(
                    "dirichlet witness: q = [{}], max error = {} ({})",
                    w.q.join(", "),
                    w.max_error,
                    w.note
                ),
            );
        }
        if let Some(against) = &oracle.against {
            push(
                &mut out,
                format!(
                    "compared against {} tuple(s) from a '{}' report",
                    against.tuples.len(),
                    against.command
                ),
            );
        }
    }
    if !doc.certificates.is_empty() {
        push(&mut out, "certificates:".into());
        for c in &doc.certificates {
            let verdict = match (c.pass, c.slack) {
                (true, false) => "PASS ",
                (true, true) => "SLACK",
                (false, _) => "FAIL ",
            };
            push(
                &mut out,
                format!("  {verdict} {}: {}", c.name, c.inequality),
            );
        }
        let failed = doc.certificates.iter().filter(|c| !c.pass).count();
        if failed == 0 {
            push(
                &mut out,
                format!("all {} certificates passed", doc.certificates.len()),
            );
        } else {
            push(
                &mut out,
                format!("{failed} of {} certificates FAILED", doc.certificates.len()),
            );
        }
    }
    out
}
