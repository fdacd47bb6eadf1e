//! Acceptance gate: ten criteria covering the reduction guarantees, the
//! solver bounds, iteration-count prediction, query selection, the exact
//! improvement factor, exhaustive-search dominance, and report
//! verification. One test per criterion; each prints a single pass line
//! (visible with --nocapture).

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use sda_core::certify::{improvement_certificate, CertStatus};
use sda_core::exactnum::{rat, rat_int, rat_pow, Rat};
use sda_core::illl::{
    compute_k_prime, improvement_factor, improvement_ratio, query_q, run_illl, IlllConfig,
    IlllReport,
};
use sda_core::lattice::{
    check_reduced_bounds, gram_schmidt, is_lovasz, is_size_reduced, lattice_det, lll_reduce,
    LatticeBasis, ReductionParams,
};
use sda_core::oracle::brute_best;
use sda_core::sda::{
    approximate_once, proposition_m1, ApproxResult, CertifiedApprox, TargetMatrix,
};

fn pass_line(criterion: u32, detail: &str) {
    println!("criterion {criterion:02}: PASS - {detail}");
}

fn params_34() -> ReductionParams {
    ReductionParams::new(rat(3, 4)).unwrap()
}

/// 100 random rational targets, n + m <= 6, entry denominators <= 1000.
fn corpus() -> &'static Vec<TargetMatrix> {
    static CELL: OnceLock<Vec<TargetMatrix>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x00d1_0fa4);
        let mut targets = Vec::new();
        while targets.len() < 100 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=5);
            if n + m > 6 {
                continue;
            }
            let entries: Vec<Vec<Rat>> = (0..n)
                .map(|_| {
                    (0..m)
                        .map(|_| {
                            let den = rng.gen_range(1..=1000);
                            rat(rng.gen_range(-2 * den..=2 * den), den)
                        })
                        .collect()
                })
                .collect();
            targets.push(TargetMatrix::new(entries).unwrap());
        }
        targets
    })
}

const EPS_GRID: [(i64, i64); 3] = [(1, 2), (1, 10), (1, 100)];

struct SingleRuns {
    elapsed: Duration,
    runs: Vec<(usize, Rat, CertifiedApprox)>,
}

/// One reduction per (target, eps) pair — 300 runs, shared by criteria 3
/// and 9. The recorded duration covers exactly the solver calls.
fn single_runs() -> &'static SingleRuns {
    static CELL: OnceLock<SingleRuns> = OnceLock::new();
    CELL.get_or_init(|| {
        let params = params_34();
        let targets = corpus();
        let start = Instant::now();
        let mut runs = Vec::new();
        for (idx, target) in targets.iter().enumerate() {
            for (num, den) in EPS_GRID {
                let eps = rat(num, den);
                let approx = approximate_once(target, &eps, &params, 128).unwrap();
                runs.push((idx, eps, approx));
            }
        }
        SingleRuns {
            elapsed: start.elapsed(),
            runs,
        }
    })
}

struct IlllRuns {
    elapsed: Duration,
    runs: Vec<(usize, Rat, IlllReport)>,
}

/// Iterated runs over the same corpus with d = 2, q_max = 10^4 — shared by
/// criteria 6, 7 and 9.
fn illl_runs() -> &'static IlllRuns {
    static CELL: OnceLock<IlllRuns> = OnceLock::new();
    CELL.get_or_init(|| {
        let params = params_34();
        let targets = corpus();
        let start = Instant::now();
        let mut runs = Vec::new();
        for (idx, target) in targets.iter().enumerate() {
            for (num, den) in EPS_GRID {
                let eps = rat(num, den);
                let config = IlllConfig::new(
                    eps.clone(),
                    rat_int(2),
                    rat_int(10_000),
                    params.clone(),
                    128,
                )
                .unwrap();
                let report = run_illl(target, &config).unwrap();
                runs.push((idx, eps, report));
            }
        }
        IlllRuns {
            elapsed: start.elapsed(),
            runs,
        }
    })
}

#[test]
fn criterion_01_beta_specialization() {
    let params = params_34();
    assert_eq!(*params.beta(), rat_int(2));
    pass_line(1, "alpha = 3/4 yields beta = 2 exactly");
}

#[test]
fn criterion_02_lll_certificate_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba5e);
    let alphas = [rat(5, 16), rat(1, 2), rat(3, 4), rat(99, 100)];
    let start = Instant::now();
    let mut reductions = 0usize;
    for _ in 0..200 {
        let dim = rng.gen_range(2..=8);
        let basis = loop {
            let vectors: Vec<Vec<Rat>> = (0..dim)
                .map(|_| (0..dim).map(|_| rat_int(rng.gen_range(-50..=50))).collect())
                .collect();
            let candidate = LatticeBasis::new(vectors).unwrap();
            if gram_schmidt(&candidate).is_ok() {
                break candidate;
            }
        };
        let det_before = lattice_det(&basis);
        for alpha in &alphas {
            let params = ReductionParams::new(alpha.clone()).unwrap();
            let (reduced, transform) = lll_reduce(&basis, &params).unwrap();
            let gso = gram_schmidt(&reduced).unwrap();
            assert!(is_size_reduced(&gso), "alpha {alpha}");
            assert!(is_lovasz(&gso, &params), "alpha {alpha}");
            let bounds = check_reduced_bounds(&reduced, &gso, &params).unwrap();
            assert!(bounds.all_hold(), "alpha {alpha}: {bounds:?}");
            assert!(transform.is_unimodular());
            assert_eq!(transform.apply(&basis).unwrap(), reduced);
            assert_eq!(lattice_det(&reduced), det_before);
            reductions += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(reductions, 800);
    assert!(elapsed <= Duration::from_secs(60), "took {elapsed:?}");
    pass_line(
        2,
        &format!("800 reductions fully certified in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_03_single_shot_bounds() {
    let data = single_runs();
    assert_eq!(data.runs.len(), 300);
    for (idx, eps, approx) in &data.runs {
        let certs = &approx.certificates;
        assert_eq!(certs.len(), 2, "target {idx}");
        assert_eq!(
            certs[0].status,
            CertStatus::Pass,
            "target {idx} eps {eps}: {}",
            certs[0].inequality
        );
        assert!(
            certs[1].passed(),
            "target {idx} eps {eps}: {}",
            certs[1].inequality
        );
        assert!(approx.result.max_error <= *eps);
    }
    assert!(
        data.elapsed <= Duration::from_secs(120),
        "took {:?}",
        data.elapsed
    );
    pass_line(
        3,
        &format!(
            "300 runs: error bound exact, q-bound within certified slack, in {:.2?}",
            data.elapsed
        ),
    );
}

#[test]
fn criterion_04_single_column_proposition() {
    let approx = proposition_m1(&[rat(610, 987)], &rat(1, 10), &params_34()).unwrap();
    assert!(approx.all_passed());
    let q = &approx.result.q[0];
    assert!(*q >= BigInt::one());
    let q2 = q * q;
    assert!(&q2 * &q2 <= BigInt::from(40_000), "q^4 exceeds 4*10^4");
    assert!(approx.result.max_error <= rat(1, 10));

    let target = TargetMatrix::from_column(vec![rat(610, 987)]).unwrap();
    let oracle = brute_best(&target, 14).unwrap();
    assert_eq!(oracle.q_star, vec![BigInt::from(13)]);
    assert_eq!(oracle.best_error, rat(34, 987));
    pass_line(
        4,
        &format!(
            "q = {q} within 2^(1/2)*10, error {} <= 1/10; exhaustive best at 14 is 34/987",
            approx.result.max_error
        ),
    );
}

#[test]
fn criterion_05_predicted_round_agreement() {
    let start = Instant::now();
    let config = IlllConfig::new(rat(1, 2), rat_int(2), rat_int(1024), params_34(), 128).unwrap();
    let prediction = compute_k_prime(&config, 1, 1);
    assert_eq!(prediction.k_prime, 10);

    let target = TargetMatrix::from_column(vec![rat(610, 987)]).unwrap();
    let report = run_illl(&target, &config).unwrap();
    assert_eq!(report.k_prime_predicted, 10);
    assert!(report.k_observed >= 10);
    assert_eq!(report.iterations.len() as u32, report.k_observed);
    for (i, it) in report.iterations.iter().enumerate() {
        assert_eq!(it.result.iteration_k as usize, i + 1);
        assert!(
            it.certificates.iter().all(|c| c.passed()),
            "round {} has a failing certificate",
            i + 1
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed <= Duration::from_secs(10), "took {elapsed:?}");
    pass_line(
        5,
        &format!("k' = 10 predicted and all 10 rounds certified in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_06_iterated_bound_displays() {
    let data = illl_runs();
    assert_eq!(data.runs.len(), 300);
    let mut iterations = 0usize;
    for (idx, eps, report) in &data.runs {
        for it in &report.iterations {
            let k = it.result.iteration_k;
            assert_eq!(it.certificates.len(), 2);
            assert_eq!(
                it.certificates[0].status,
                CertStatus::Pass,
                "target {idx} eps {eps} k {k}: {}",
                it.certificates[0].inequality
            );
            assert!(
                it.certificates[1].passed(),
                "target {idx} eps {eps} k {k}: {}",
                it.certificates[1].inequality
            );
            iterations += 1;
        }
    }
    pass_line(
        6,
        &format!(
            "{iterations} iterations across 300 runs all pass both displays ({:.2?})",
            data.elapsed
        ),
    );
}

/// Smallest integer cap admissible for the run, or None when even q_max
/// is below the lower limit.
fn smallest_admissible_cap(report: &IlllReport) -> Option<BigInt> {
    let config = &report.config;
    let (n, m) = (report.n, report.m);
    let nm = (n + m) as i64;
    let lower_pow =
        rat_pow(config.eps(), -4 * (n as i64)) * rat_pow(config.params().beta(), (nm - 1) * nm);
    let admissible = |q: &BigInt| rat_pow(&Rat::from(q.clone()), 4 * m as i64) >= lower_pow;
    if !admissible(&BigInt::from(10_000)) {
        return None;
    }
    let est = lower_pow
        .to_f64()
        .unwrap_or(f64::MAX)
        .powf(1.0 / (4.0 * m as f64))
        .ceil() as i64;
    let mut q = BigInt::from((est - 2).max(1));
    while !admissible(&q) {
        q += 1;
    }
    Some(q)
}

#[test]
fn criterion_07_query_grid() {
    let data = illl_runs();
    let targets = corpus();
    let mut queried_runs = 0usize;
    let mut total_queries = 0usize;
    for (idx, eps, report) in &data.runs {
        let Some(q_min) = smallest_admissible_cap(report) else {
            continue;
        };
        let lo = q_min.to_f64().unwrap();
        let hi = 10_000f64;
        let mut caps: BTreeSet<i64> = (0..10)
            .map(|i| {
                let x = lo * (hi / lo).powf(i as f64 / 9.0);
                (x.round() as i64).clamp(q_min.to_i64().unwrap(), 10_000)
            })
            .collect();
        let mut filler = q_min.to_i64().unwrap();
        while caps.len() < 10 && filler <= 10_000 {
            caps.insert(filler);
            filler += 1;
        }
        if caps.len() < 10 {
            continue;
        }
        for cap in &caps {
            let outcome = query_q(&targets[*idx], report, &rat_int(*cap)).unwrap();
            assert_eq!(outcome.certificates.len(), 4, "eps {eps} Q {cap}");
            for cert in &outcome.certificates {
                assert_eq!(
                    cert.status,
                    CertStatus::Pass,
                    "target {idx} eps {eps} Q {cap}: {} [{}]",
                    cert.inequality,
                    cert.name
                );
            }
            assert!(
                Rat::from(outcome.result.max_abs_q.clone()) <= rat_int(*cap),
                "target {idx} Q {cap}"
            );
            total_queries += 1;
        }
        queried_runs += 1;
    }
    assert!(
        queried_runs >= 100,
        "only {queried_runs} runs had a rich enough admissible interval"
    );
    pass_line(
        7,
        &format!(
            "{total_queries} queries over {queried_runs} runs: selection and both bounds exact"
        ),
    );
}

#[test]
fn criterion_08_improvement_factor() {
    for (n, m) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 2)] {
        let (_, _, ratio) = improvement_ratio(n, m);
        let expected = improvement_factor(n, m);
        assert!(
            ratio.value_eq(&expected),
            "(n,m)=({n},{m}): {ratio} != {expected}"
        );
        let cert = improvement_certificate(n, m);
        assert_eq!(cert.status, CertStatus::Pass, "{}", cert.inequality);
    }
    let (prior, current, _) = improvement_ratio(1, 1);
    assert_eq!(prior.to_string(), "2^(5/2)");
    assert_eq!(current.to_string(), "2^(3/2)");
    pass_line(
        8,
        "prior/current bound ratio is exactly 2^(m/n) on all five shapes",
    );
}

fn dominated(
    cache: &mut HashMap<(usize, u64), Rat>,
    targets: &[TargetMatrix],
    idx: usize,
    result: &ApproxResult,
    checked: &mut usize,
) {
    if targets[idx].m() > 2 {
        return;
    }
    let Some(bound) = result.max_abs_q.to_u64() else {
        return;
    };
    if bound == 0 || bound > 30 {
        return;
    }
    let best = cache
        .entry((idx, bound))
        .or_insert_with(|| brute_best(&targets[idx], bound).unwrap().best_error);
    assert!(
        *best <= result.max_error,
        "target {idx}: exhaustive best {best} exceeds tuple error {}",
        result.max_error
    );
    *checked += 1;
}

#[test]
fn criterion_09_oracle_dominance() {
    let single = single_runs();
    let illl = illl_runs();
    let targets = corpus();
    let start = Instant::now();
    let mut cache = HashMap::new();
    let mut checked = 0usize;
    for (idx, _, approx) in &single.runs {
        dominated(&mut cache, targets, *idx, &approx.result, &mut checked);
    }
    for (idx, _, report) in &illl.runs {
        for it in &report.iterations {
            dominated(&mut cache, targets, *idx, &it.result, &mut checked);
        }
    }
    let elapsed = start.elapsed();
    assert!(
        checked > 100,
        "only {checked} tuples were small enough to check"
    );
    assert!(elapsed <= Duration::from_secs(120), "took {elapsed:?}");
    pass_line(
        9,
        &format!("{checked} emitted tuples dominated by exhaustive search in {elapsed:.2?}"),
    );
}

fn sda_ok(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_sda"))
        .args(args)
        .output()
        .expect("binary runs");
    assert_eq!(
        out.status.code(),
        Some(0),
        "sda {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn verify_code(dir: &Path, name: &str, content: &str) -> i32 {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    Command::new(env!("CARGO_BIN_EXE_sda"))
        .args(["verify", path.to_str().unwrap()])
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("no signal")
}

fn inline_matrix(target: &TargetMatrix) -> String {
    target
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join(" ; ")
}

fn bump_first_digit(s: &str) -> Option<String> {
    let mut bytes = s.as_bytes().to_vec();
    for b in bytes.iter_mut() {
        if b.is_ascii_digit() {
            *b = if *b == b'9' { b'8' } else { *b + 1 };
            return Some(String::from_utf8(bytes).unwrap());
        }
    }
    None
}

/// Every single-digit mutation of the certified numeric fields of a
/// report: tuple entries, recorded errors and maxima, and the rendered
/// certificate inequalities. Paths are JSON pointers.
fn digit_mutations(doc: &Value) -> Vec<(String, Value)> {
    let mut pointers = Vec::new();
    let results = doc["results"].as_array().map(|a| a.len()).unwrap_or(0);
    for r in 0..results {
        pointers.push(format!("/results/{r}/max_abs_q"));
        pointers.push(format!("/results/{r}/max_error"));
        for list in ["q", "p", "row_errors"] {
            let len = doc["results"][r][list].as_array().unwrap().len();
            for j in 0..len {
                pointers.push(format!("/results/{r}/{list}/{j}"));
            }
        }
    }
    let certs = doc["certificates"].as_array().map(|a| a.len()).unwrap_or(0);
    for c in 0..certs {
        pointers.push(format!("/certificates/{c}/inequality"));
    }

    let mut variants = Vec::new();
    for pointer in pointers {
        let s = doc
            .pointer(&pointer)
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        for (i, c) in s.char_indices() {
            if !c.is_ascii_digit() {
                continue;
            }
            let bumped = if c == '9' { '8' } else { (c as u8 + 1) as char };
            let mut t = s.clone();
            t.replace_range(i..i + 1, &bumped.to_string());
            let mut v = doc.clone();
            *v.pointer_mut(&pointer).unwrap() = Value::String(t);
            variants.push((format!("{pointer}[{i}]"), v));
        }
    }
    variants
}

#[test]
fn criterion_10_verify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports: Vec<(String, String)> = Vec::new();

    // The single-column proposition run (criterion 4) as a document.
    reports.push((
        "approx-prop".into(),
        sda_ok(&["approx", "610/987", "--eps", "1/10"]),
    ));
    // The k' agreement run (criterion 5).
    reports.push((
        "illl-kprime".into(),
        sda_ok(&["illl", "610/987", "--qmax", "1024"]),
    ));
    // A corpus slice under criterion 6's configuration.
    for (i, target) in corpus().iter().take(6).enumerate() {
        let text = inline_matrix(target);
        let (num, den) = EPS_GRID[i % 3];
        reports.push((
            format!("illl-corpus-{i}"),
            sda_ok(&[
                "illl",
                &text,
                "--eps",
                &format!("{num}/{den}"),
                "--qmax",
                "10000",
            ]),
        ));
    }
    // A ten-point query grid (criterion 7) on the desk example.
    for q in ["3", "4", "6", "10", "17", "28", "46", "130", "400", "1024"] {
        reports.push((
            format!("query-Q{q}"),
            sda_ok(&["query", "610/987", "--Q", q]),
        ));
    }

    let mut verified = 0usize;
    let mut rejected = 0usize;
    for (label, text) in &reports {
        assert_eq!(
            verify_code(dir.path(), &format!("{label}.json"), text),
            0,
            "{label} failed verification"
        );
        verified += 1;
    }

    // Exhaustive digit sweep on the smallest report.
    let approx_doc: Value = serde_json::from_str(&reports[0].1).unwrap();
    let sweep = digit_mutations(&approx_doc);
    assert!(
        sweep.len() >= 30,
        "sweep unexpectedly small: {}",
        sweep.len()
    );
    for (path, variant) in &sweep {
        let code = verify_code(dir.path(), "tampered.json", &variant.to_string());
        assert_eq!(code, 4, "mutation at {path} was not rejected");
        rejected += 1;
    }

    // Targeted mutations on the structured fields of the other commands.
    let illl_doc: Value = serde_json::from_str(&reports[1].1).unwrap();
    let mut v = illl_doc.clone();
    v["illl"]["k_prime_predicted"] = Value::from(11);
    assert_eq!(verify_code(dir.path(), "t.json", &v.to_string()), 4);
    rejected += 1;
    let mut v = illl_doc.clone();
    v["illl"]["k_observed"] = Value::from(9);
    assert_eq!(verify_code(dir.path(), "t.json", &v.to_string()), 4);
    rejected += 1;
    let mut v = illl_doc.clone();
    v["certificates"][0]["pass"] = Value::from(false);
    assert_eq!(verify_code(dir.path(), "t.json", &v.to_string()), 4);
    rejected += 1;
    let mut v = illl_doc;
    let err0 = v["results"][0]["row_errors"][0]
        .as_str()
        .unwrap()
        .to_string();
    v["results"][0]["row_errors"][0] = Value::String(bump_first_digit(&err0).unwrap());
    assert_eq!(verify_code(dir.path(), "t.json", &v.to_string()), 4);
    rejected += 1;

    let query_doc: Value = serde_json::from_str(&reports.last().unwrap().1).unwrap();
    let mut v = query_doc.clone();
    v["query"]["selected_k"] = Value::from(1);
    assert_eq!(verify_code(dir.path(), "t.json", &v.to_string()), 4);
    rejected += 1;
    let mut v = query_doc;
    let q_cap = v["query"]["Q"].as_str().unwrap().to_string();
    v["query"]["Q"] = Value::String(bump_first_digit(&q_cap).unwrap());
    assert_eq!(verify_code(dir.path(), "t.json", &v.to_string()), 4);
    rejected += 1;

    pass_line(
        10,
        &format!("{verified} reports verified; {rejected} single-character tampers rejected"),
    );
}
