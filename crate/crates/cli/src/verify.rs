//! Report verification: re-derives every quantity a report claims — row
//! errors, maxima, iteration numbering, stop reasons, the predicted
//! stopping round, and each certificate's full rendered text — from the
//! exact values serialized in the document, and compares byte for byte.
//! Nothing is re-reduced; only the recorded tuples are rechecked against
//! the recorded inputs, so verification is fast and self-contained.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use sda_core::certify::{
    dominance_certificate, improvement_certificate, iteration_certificates, k_prime_certificate,
    query_certificates, single_shot_certificates, Certificate,
};
use sda_core::exactnum::{parse_rat, rat_pow, Rat};
use sda_core::illl::{compute_k_prime, improvement_ratio, IlllConfig};
use sda_core::lattice::ReductionParams;
use sda_core::oracle::{brute_best, dirichlet_witness};
use sda_core::sda::{ApproxResult, TargetMatrix};

use crate::report::{
    self, CertificateSection, ConfigSection, ReportDocument, ResultSection, SCHEMA_VERSION,
    WITNESS_NOTE,
};
use crate::CliError;

/// Checks a serialized report end to end; returns the number of
/// reproduced certificates. Malformed documents fail with exit code 2,
/// any value or certificate that does not reproduce with exit code 4.
pub fn verify_text(text: &str) -> Result<usize, CliError> {
    let doc: ReportDocument = serde_json::from_str(text)
        .map_err(|e| CliError::parse(format!("malformed report: {e}")))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::parse(format!(
            "unsupported schema_version {:?}",
            doc.schema_version
        )));
    }
    match doc.command.as_str() {
        "approx" => verify_approx(&doc),
        "illl" => verify_illl(&doc),
        "query" => verify_query(&doc),
        "oracle" => verify_oracle(&doc),
        other => Err(CliError::parse(format!("unknown command {other:?}"))),
    }
}

fn fail(message: String) -> CliError {
    CliError::cert_failure(message)
}

/// Parses a fraction string and insists on its canonical rendering, so a
/// value-preserving rewrite (leading zeros, unreduced fractions) is still
/// flagged.
fn canon_rat(s: &str, what: &str) -> Result<Rat, CliError> {
    let v = parse_rat(s).map_err(|_| CliError::parse(format!("cannot parse {what}: {s:?}")))?;
    if v.to_string() != s {
        return Err(fail(format!("{what} is not in canonical form: {s:?}")));
    }
    Ok(v)
}

fn canon_int(s: &str, what: &str) -> Result<BigInt, CliError> {
    let v =
        BigInt::from_str(s).map_err(|_| CliError::parse(format!("cannot parse {what}: {s:?}")))?;
    if v.to_string() != s {
        return Err(fail(format!("{what} is not in canonical form: {s:?}")));
    }
    Ok(v)
}

fn required<'a>(field: &'a Option<String>, what: &str) -> Result<&'a str, CliError> {
    field
        .as_deref()
        .ok_or_else(|| CliError::parse(format!("missing {what}")))
}

fn matrix_from_config(config: &ConfigSection) -> Result<TargetMatrix, CliError> {
    let mut rows = Vec::new();
    for (i, row) in config.matrix.iter().enumerate() {
        let mut parsed = Vec::new();
        for (j, s) in row.iter().enumerate() {
            parsed.push(canon_rat(s, &format!("config.matrix[{i}][{j}]"))?);
        }
        rows.push(parsed);
    }
    let matrix =
        TargetMatrix::new(rows).map_err(|e| CliError::parse(format!("bad matrix: {e}")))?;
    if matrix.n() != config.n || matrix.m() != config.m {
        return Err(fail(
            "config.n/config.m do not match the matrix shape".into(),
        ));
    }
    Ok(matrix)
}

fn solver_params(config: &ConfigSection) -> Result<(Rat, ReductionParams, u32), CliError> {
    let eps = canon_rat(required(&config.eps, "config.eps")?, "config.eps")?;
    let alpha = canon_rat(required(&config.alpha, "config.alpha")?, "config.alpha")?;
    let params = ReductionParams::new(alpha)
        .map_err(|e| fail(format!("config.alpha is out of range: {e}")))?;
    let beta = required(&config.beta, "config.beta")?;
    if params.beta().to_string() != beta {
        return Err(fail("config.beta does not match config.alpha".into()));
    }
    let precision = config
        .precision_bits
        .ok_or_else(|| CliError::parse("missing config.precision_bits".into()))?;
    if precision == 0 {
        return Err(fail("config.precision_bits must be positive".into()));
    }
    Ok((eps, params, precision))
}

/// Rebuilds one tuple from its serialized strings, recomputing the row
/// errors and maxima from the matrix and insisting they match.
#[allow(clippy::needless_range_loop)]
fn rebuild_result(
    matrix: &TargetMatrix,
    section: &ResultSection,
    at: &str,
) -> Result<ApproxResult, CliError> {
    let (n, m) = (matrix.n(), matrix.m());
    if section.q.len() != m || section.p.len() != n || section.row_errors.len() != n {
        return Err(fail(format!("{at}: tuple shape does not match the matrix")));
    }
    let q: Vec<BigInt> = section
        .q
        .iter()
        .enumerate()
        .map(|(j, s)| canon_int(s, &format!("{at}.q[{j}]")))
        .collect::<Result<_, _>>()?;
    let p: Vec<BigInt> = section
        .p
        .iter()
        .enumerate()
        .map(|(i, s)| canon_int(s, &format!("{at}.p[{i}]")))
        .collect::<Result<_, _>>()?;
    let mut row_errors = Vec::with_capacity(n);
    for i in 0..n {
        let combo: Rat = (0..m)
            .map(|j| matrix.entry(i, j) * Rat::from(q[j].clone()))
            .sum();
        let err = (Rat::from(p[i].clone()) + combo).abs();
        if err.to_string() != section.row_errors[i] {
            return Err(fail(format!(
                "{at}.row_errors[{i}] does not match the recorded tuple"
            )));
        }
        row_errors.push(err);
    }
    let max_abs_q = q.iter().map(|x| x.abs()).max().expect("m >= 1");
    if max_abs_q.to_string() != section.max_abs_q {
        return Err(fail(format!(
            "{at}.max_abs_q does not match the recorded tuple"
        )));
    }
    let max_error = row_errors.iter().cloned().max().expect("n >= 1");
    if max_error.to_string() != section.max_error {
        return Err(fail(format!(
            "{at}.max_error does not match the recorded row errors"
        )));
    }
    Ok(ApproxResult {
        q,
        p,
        row_errors,
        max_abs_q,
        max_error,
        iteration_k: section.k,
    })
}

/// Byte-compares regenerated certificates against the stored list, then
/// requires every stored certificate to pass.
fn compare_certificates(
    expected: &[Certificate],
    stored: &[CertificateSection],
) -> Result<(), CliError> {
    if expected.len() != stored.len() {
        return Err(fail(format!(
            "certificate count mismatch: regenerated {}, report carries {}",
            expected.len(),
            stored.len()
        )));
    }
    for (e, s) in expected.iter().zip(stored) {
        if report::certificate_section(e) != *s {
            return Err(fail(format!(
                "certificate '{}' does not reproduce from the recorded values",
                s.name
            )));
        }
    }
    if let Some(c) = stored.iter().find(|c| !c.pass) {
        return Err(fail(format!(
            "certificate '{}' is recorded as failing",
            c.name
        )));
    }
    Ok(())
}

fn no_section<T>(section: &Option<T>, what: &str, command: &str) -> Result<(), CliError> {
    if section.is_some() {
        return Err(CliError::parse(format!(
            "{command} reports carry no {what} section"
        )));
    }
    Ok(())
}

fn verify_approx(doc: &ReportDocument) -> Result<usize, CliError> {
    no_section(&doc.illl, "illl", "approx")?;
    no_section(&doc.query, "query", "approx")?;
    no_section(&doc.oracle, "oracle", "approx")?;
    let matrix = matrix_from_config(&doc.config)?;
    let (eps, params, precision) = solver_params(&doc.config)?;
    if doc.config.d.is_some() || doc.config.q_max.is_some() {
        return Err(CliError::parse("approx reports carry no d or q_max".into()));
    }
    if doc.results.len() != 1 {
        return Err(fail("approx reports carry exactly one result".into()));
    }
    let section = &doc.results[0];
    if section.k != 0 || section.terminal {
        return Err(fail(
            "approx results have k = 0 and no terminal flag".into(),
        ));
    }
    let result = rebuild_result(&matrix, section, "results[0]")?;
    let expected =
        single_shot_certificates(matrix.n(), matrix.m(), &eps, &params, precision, &result);
    compare_certificates(&expected, &doc.certificates)?;
    Ok(doc.certificates.len())
}

/// Shared portion of illl and query verification: config, the predicted
/// stopping round, the iteration sequence and stop reason, and the
/// regenerated per-round certificates (prefixed by the k' certificate).
fn verify_illl_trace(
    doc: &ReportDocument,
) -> Result<
    (
        TargetMatrix,
        IlllConfig,
        Vec<ApproxResult>,
        Vec<Certificate>,
    ),
    CliError,
> {
    let matrix = matrix_from_config(&doc.config)?;
    let (eps, params, precision) = solver_params(&doc.config)?;
    let d = canon_rat(required(&doc.config.d, "config.d")?, "config.d")?;
    let q_max = canon_rat(required(&doc.config.q_max, "config.q_max")?, "config.q_max")?;
    let config = IlllConfig::new(eps, d, q_max, params, precision)
        .map_err(|e| fail(format!("config does not validate: {e}")))?;
    let (n, m) = (matrix.n(), matrix.m());

    let illl = doc
        .illl
        .as_ref()
        .ok_or_else(|| CliError::parse("missing illl section".into()))?;
    let prediction = compute_k_prime(&config, n, m);
    if prediction.k_prime != illl.k_prime_predicted {
        return Err(fail(
            "illl.k_prime_predicted does not match the recomputation".into(),
        ));
    }
    if prediction.boundary_alternate != illl.k_prime_alternate {
        return Err(fail(
            "illl.k_prime_alternate does not match the recomputation".into(),
        ));
    }
    if doc.results.is_empty() {
        return Err(fail("illl reports carry at least one result".into()));
    }
    if illl.k_observed as usize != doc.results.len() {
        return Err(fail(
            "illl.k_observed does not match the number of results".into(),
        ));
    }

    let mut rebuilt = Vec::with_capacity(doc.results.len());
    for (idx, section) in doc.results.iter().enumerate() {
        let at = format!("results[{idx}]");
        if section.k as usize != idx + 1 {
            return Err(fail(format!("{at}: iterations must be numbered 1..")));
        }
        let result = rebuild_result(&matrix, section, &at)?;
        let terminal = Rat::from(result.max_abs_q.clone()) > *config.q_max();
        if terminal != section.terminal {
            return Err(fail(format!(
                "{at}.terminal does not match max_abs_q against q_max"
            )));
        }
        let last = idx + 1 == doc.results.len();
        if !last && (terminal || section.k >= prediction.k_prime) {
            return Err(fail(format!("{at}: the run continued past a stop")));
        }
        if last {
            let reason = if terminal {
                "q_max_exceeded"
            } else {
                if section.k != prediction.k_prime {
                    return Err(fail(format!(
                        "{at}: the run stopped before round k' without exceeding q_max"
                    )));
                }
                "k_prime_reached"
            };
            if illl.stop_reason != reason {
                return Err(fail("illl.stop_reason does not match the trace".into()));
            }
        }
        rebuilt.push(result);
    }

    let mut expected = vec![k_prime_certificate(config.d(), &prediction)];
    for result in &rebuilt {
        expected.extend(iteration_certificates(
            n,
            m,
            config.eps(),
            config.d(),
            config.params(),
            config.precision_bits(),
            result.iteration_k,
            result,
        ));
    }
    Ok((matrix, config, rebuilt, expected))
}

fn verify_illl(doc: &ReportDocument) -> Result<usize, CliError> {
    no_section(&doc.query, "query", "illl")?;
    no_section(&doc.oracle, "oracle", "illl")?;
    let (_, _, _, expected) = verify_illl_trace(doc)?;
    compare_certificates(&expected, &doc.certificates)?;
    Ok(doc.certificates.len())
}

fn verify_query(doc: &ReportDocument) -> Result<usize, CliError> {
    no_section(&doc.oracle, "oracle", "query")?;
    let (matrix, config, rebuilt, mut expected) = verify_illl_trace(doc)?;
    let query = doc
        .query
        .as_ref()
        .ok_or_else(|| CliError::parse("missing query section".into()))?;
    let (n, m) = (matrix.n(), matrix.m());
    let q_cap = canon_rat(&query.q_cap, "query.Q")?;

    // The round the cap selects, rederived through the same exact window.
    let nm = (n + m) as i64;
    let selector = rat_pow(&q_cap, 4 * m as i64)
        * rat_pow(config.eps(), 4 * n as i64)
        * rat_pow(config.params().beta(), (1 - nm) * nm);
    let step = rat_pow(config.d(), 4 * n as i64);
    let mut k = 1u32;
    let mut upper = step.clone();
    while upper <= selector {
        upper *= &step;
        k += 1;
        if k > 100_000 {
            return Err(fail("query.Q selects an out-of-range round".into()));
        }
    }
    if k != query.selected_k {
        return Err(fail(
            "query.selected_k does not match the recomputation".into(),
        ));
    }
    let result = rebuilt
        .get(k as usize - 1)
        .ok_or_else(|| fail("query.selected_k exceeds the recorded iterations".into()))?;

    expected.extend(query_certificates(
        &matrix,
        config.eps(),
        config.d(),
        config.q_max(),
        config.params(),
        config.precision_bits(),
        &q_cap,
        k,
        result,
    ));
    expected.push(improvement_certificate(n, m));

    let (prior, current, ratio) = improvement_ratio(n, m);
    if query.prior_bound_coeff != prior.to_string()
        || query.current_bound_coeff != current.to_string()
        || query.improvement_ratio != ratio.to_string()
    {
        return Err(fail(
            "query bound coefficients do not match the recomputation".into(),
        ));
    }
    compare_certificates(&expected, &doc.certificates)?;
    Ok(doc.certificates.len())
}

fn verify_oracle(doc: &ReportDocument) -> Result<usize, CliError> {
    no_section(&doc.illl, "illl", "oracle")?;
    no_section(&doc.query, "query", "oracle")?;
    if !doc.results.is_empty() {
        return Err(CliError::parse("oracle reports carry no results".into()));
    }
    let matrix = matrix_from_config(&doc.config)?;
    let oracle = doc
        .oracle
        .as_ref()
        .ok_or_else(|| CliError::parse("missing oracle section".into()))?;

    let best = brute_best(&matrix, oracle.search_bound)
        .map_err(|e| fail(format!("search bound does not verify: {e}")))?;
    let q_star: Vec<String> = best.q_star.iter().map(|x| x.to_string()).collect();
    if q_star != oracle.q_star {
        return Err(fail("oracle.q_star does not match the enumeration".into()));
    }
    if best.best_error.to_string() != oracle.best_error {
        return Err(fail(
            "oracle.best_error does not match the enumeration".into(),
        ));
    }

    let witness = dirichlet_witness(&matrix, oracle.search_bound)
        .map_err(|e| fail(format!("witness search does not verify: {e}")))?;
    match (&witness, &oracle.dirichlet) {
        (None, None) => {}
        (Some(w), Some(section)) => {
            let q: Vec<String> = w.q.iter().map(|x| x.to_string()).collect();
            let errs: Vec<String> = w.row_errors.iter().map(|x| x.to_string()).collect();
            if q != section.q
                || errs != section.row_errors
                || w.max_error.to_string() != section.max_error
                || w.max_abs_q.to_string() != section.max_abs_q
                || section.note != WITNESS_NOTE
            {
                return Err(fail(
                    "oracle.dirichlet does not match the witness search".into(),
                ));
            }
        }
        _ => {
            return Err(fail(
                "oracle.dirichlet presence does not match the witness search".into(),
            ));
        }
    }

    let mut expected = Vec::new();
    if let Some(against) = &oracle.against {
        for (idx, tuple) in against.tuples.iter().enumerate() {
            let at = format!("oracle.against.tuples[{idx}]");
            if tuple.q.len() != matrix.m() || tuple.p.len() != matrix.n() {
                return Err(fail(format!("{at}: shape does not match the matrix")));
            }
            let q: Vec<BigInt> = tuple
                .q
                .iter()
                .enumerate()
                .map(|(j, s)| canon_int(s, &format!("{at}.q[{j}]")))
                .collect::<Result<_, _>>()?;
            let p: Vec<BigInt> = tuple
                .p
                .iter()
                .enumerate()
                .map(|(i, s)| canon_int(s, &format!("{at}.p[{i}]")))
                .collect::<Result<_, _>>()?;
            let max_abs_q = q.iter().map(|x| x.abs()).max().expect("m >= 1");
            let tuple_error = (0..matrix.n())
                .map(|i| {
                    let combo: Rat = (0..matrix.m())
                        .map(|j| matrix.entry(i, j) * Rat::from(q[j].clone()))
                        .sum();
                    (Rat::from(p[i].clone()) + combo).abs()
                })
                .max()
                .expect("n >= 1");
            let bound = max_abs_q
                .to_u64()
                .ok_or_else(|| fail(format!("{at}: denominator too large to re-check")))?;
            let ob = brute_best(&matrix, bound)
                .map_err(|e| fail(format!("{at}: dominance does not verify: {e}")))?;
            expected.push(dominance_certificate(
                tuple.k,
                &max_abs_q,
                &tuple_error,
                &ob.best_error,
            ));
        }
    }
    compare_certificates(&expected, &doc.certificates)?;
    Ok(doc.certificates.len())
}
