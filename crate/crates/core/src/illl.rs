//! Iterated reduction: shrink the lattice scale by `d^(-(n+m)/m)` per
//! round, which multiplies the error bound by `d^-1` and the denominator
//! bound by `d^(n/m)` per round, and stop once the denominators outgrow
//! `q_max` — or at the exactly predicted round `k'` where the guaranteed
//! denominator bound itself passes `q_max`.
//!
//! The explicit stop cap matters: for a rational target whose exact
//! denominator is within `q_max`, the reduction eventually finds an
//! error-zero vector and the observed `max |q_j|` never grows past it, so
//! the "too large" condition alone would loop forever.

use crate::certify::{self, Certificate};
use crate::error::{Error, Result};
use crate::exactnum::{rat_int, rat_pow, FracPower, Rat};
use crate::lattice::{lll_reduce, ReductionParams};
use crate::sda::{
    build_basis_matrix, extract_tuple, scale_from_epsilon, ApproxResult, TargetMatrix,
};

use num_traits::{One, Signed};

/// Validated configuration for the iterated reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlllConfig {
    eps: Rat,
    d: Rat,
    q_max: Rat,
    params: ReductionParams,
    precision_bits: u32,
}

impl IlllConfig {
    pub fn new(
        eps: Rat,
        d: Rat,
        q_max: Rat,
        params: ReductionParams,
        precision_bits: u32,
    ) -> Result<Self> {
        if !eps.is_positive() || eps >= Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, 1), got {eps}"
            )));
        }
        if d <= Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "step factor d must exceed 1, got {d}"
            )));
        }
        if q_max <= Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "q_max must exceed 1, got {q_max}"
            )));
        }
        if precision_bits == 0 {
            return Err(Error::InvalidParameter(
                "precision_bits must be positive".into(),
            ));
        }
        Ok(Self {
            eps,
            d,
            q_max,
            params,
            precision_bits,
        })
    }

    pub fn eps(&self) -> &Rat {
        &self.eps
    }

    pub fn d(&self) -> &Rat {
        &self.d
    }

    pub fn q_max(&self) -> &Rat {
        &self.q_max
    }

    pub fn params(&self) -> &ReductionParams {
        &self.params
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }
}

/// Predicted stopping round: the least `k >= 1` whose guaranteed
/// denominator bound reaches `q_max`, decided by the exact 4m-th power
/// inequality `beta^(-(m+n-1)(m+n)) * (eps d)^(4n) * q_max^(4m) <= d^(4kn)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KPrimePrediction {
    pub k_prime: u32,
    /// Set when the defining inequality is met with equality at `k_prime`;
    /// a strict reading of the stop rule would run one more round.
    pub boundary_alternate: Option<u32>,
    /// The left side of the defining inequality (exact), for rendering.
    pub stop_value: Rat,
}

pub fn compute_k_prime(config: &IlllConfig, n: usize, m: usize) -> KPrimePrediction {
    let nm = (n + m) as i64;
    let eps_d = config.eps() * config.d();
    let stop_value = rat_pow(config.params().beta(), -(nm - 1) * nm)
        * rat_pow(&eps_d, 4 * n as i64)
        * rat_pow(config.q_max(), 4 * m as i64);
    let step = rat_pow(config.d(), 4 * n as i64);
    let mut k = 1u32;
    let mut power = step.clone();
    while power < stop_value {
        power *= &step;
        k += 1;
    }
    let boundary_alternate = if power == stop_value {
        Some(k + 1)
    } else {
        None
    };
    KPrimePrediction {
        k_prime: k,
        boundary_alternate,
        stop_value,
    }
}

/// One round of the iterated reduction, with its certificates and whether
/// the round tripped the `max |q_j| > q_max` stop.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub result: ApproxResult,
    pub certificates: Vec<Certificate>,
    pub terminal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Some denominator exceeded `q_max`.
    QMaxExceeded,
    /// The predicted round `k'` was reached with denominators still within
    /// `q_max` (possible when the target is exactly representable below
    /// `q_max`, where iteration would otherwise never stop).
    KPrimeReached,
}

/// Full trace of an iterated reduction.
#[derive(Clone, Debug)]
pub struct IlllReport {
    pub config: IlllConfig,
    pub n: usize,
    pub m: usize,
    pub iterations: Vec<IterationRecord>,
    pub k_prime_predicted: u32,
    pub k_prime_alternate: Option<u32>,
    pub k_observed: u32,
    pub stop_reason: StopReason,
}

impl IlllReport {
    pub fn all_passed(&self) -> bool {
        self.iterations
            .iter()
            .all(|it| it.certificates.iter().all(|c| c.passed()))
    }
}

/// Runs rounds `k = 1, 2, ...`, each a fresh reduction at scale
/// `gamma_k = gamma_1 * d^(-4(n+m)(k-1))`. Round `k` certifies
/// `max_i |p_i + (A q)_i| <= eps * d^(1-k)` and the matching denominator
/// bound; iteration stops on `max_j |q_j| > q_max` or at round `k'`.
pub fn run_illl(a: &TargetMatrix, config: &IlllConfig) -> Result<IlllReport> {
    let (n, m) = (a.n(), a.m());
    let prediction = compute_k_prime(config, n, m);
    let mut scale =
        scale_from_epsilon(config.eps(), config.params(), n, m, config.precision_bits())?;
    let mut iterations = Vec::new();
    let mut k: u32 = 1;
    let stop_reason = loop {
        let basis = build_basis_matrix(a, &scale);
        let (reduced, _) = lll_reduce(&basis, config.params())?;
        let mut result = extract_tuple(&reduced, a, &scale)?;
        result.iteration_k = k;
        let certificates = certify::iteration_certificates(
            n,
            m,
            config.eps(),
            config.d(),
            config.params(),
            config.precision_bits(),
            k,
            &result,
        );
        let terminal = Rat::from(result.max_abs_q.clone()) > *config.q_max();
        iterations.push(IterationRecord {
            result,
            certificates,
            terminal,
        });
        if terminal {
            break StopReason::QMaxExceeded;
        }
        if k >= prediction.k_prime {
            break StopReason::KPrimeReached;
        }
        scale = scale.shrunk_by(config.d(), n)?;
        k += 1;
    };
    Ok(IlllReport {
        config: config.clone(),
        n,
        m,
        k_observed: iterations.len() as u32,
        iterations,
        k_prime_predicted: prediction.k_prime,
        k_prime_alternate: prediction.boundary_alternate,
        stop_reason,
    })
}

/// The tuple selected for a denominator cap `Q`, with its certificates.
#[derive(Clone, Debug)]
pub struct QueryOutcome {
    pub selected_k: u32,
    pub result: ApproxResult,
    pub certificates: Vec<Certificate>,
}

impl QueryOutcome {
    pub fn all_passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed())
    }
}

/// For an admissible cap `Q` — at least `eps^(-n/m) *
/// beta^((m+n-1)(m+n)/(4m))` and at most `q_max` — picks the round `k`
/// with `d^((k-1)n/m) <= Q eps^(n/m) beta^((1-m-n)(m+n)/(4m)) < d^(kn/m)`
/// (decided in the exact 4m-th power) and certifies that its tuple has
/// `max |q_j| <= Q` and error at most
/// `d * Q^(-m/n) * beta^((m+n-1)(m+n)/(4n))`.
pub fn query_q(a: &TargetMatrix, report: &IlllReport, q_cap: &Rat) -> Result<QueryOutcome> {
    let config = &report.config;
    let (n, m) = (report.n, report.m);
    if (a.n(), a.m()) != (n, m) {
        return Err(Error::InvalidParameter(
            "target matrix does not match the report dimensions".into(),
        ));
    }
    if !q_cap.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "Q must be positive, got {q_cap}"
        )));
    }
    let nm = (n + m) as i64;
    let beta = config.params().beta();
    let q_cap_pow = rat_pow(q_cap, 4 * m as i64);
    let lower_pow = rat_pow(config.eps(), -4 * (n as i64)) * rat_pow(beta, (nm - 1) * nm);
    if q_cap_pow < lower_pow || q_cap > config.q_max() {
        return Err(Error::InvalidParameter(format!(
            "Q = {q_cap} lies outside the admissible interval \
             [eps^(-n/m) beta^((m+n-1)(m+n)/(4m)), q_max = {}]",
            config.q_max()
        )));
    }
    let selector = &q_cap_pow * rat_pow(config.eps(), 4 * n as i64) * rat_pow(beta, (1 - nm) * nm);
    let step = rat_pow(config.d(), 4 * n as i64);
    let mut k = 1u32;
    let mut upper = step.clone();
    while upper <= selector {
        upper *= &step;
        k += 1;
    }
    let record = report.iterations.get((k - 1) as usize).ok_or_else(|| {
        Error::Internal(format!(
            "selected round k = {k} exceeds the {} recorded iterations",
            report.k_observed
        ))
    })?;
    let certificates = certify::query_certificates(
        a,
        config.eps(),
        config.d(),
        config.q_max(),
        config.params(),
        config.precision_bits(),
        q_cap,
        k,
        &record.result,
    );
    Ok(QueryOutcome {
        selected_k: k,
        result: record.result.clone(),
        certificates,
    })
}

/// The exact factor `2^(m/n)` separating the earlier quality bound from
/// the present one in the `beta = d = 2` specialization.
pub fn improvement_factor(n: usize, m: usize) -> FracPower {
    FracPower::new(rat_int(2), m as i64, n as i64).expect("positive base")
}

/// `(previous coefficient, present coefficient, their exact ratio)`, all
/// powers of two: `2^((m+n+3)(m+n)/(4n))` against
/// `2 * 2^((m+n-1)(m+n)/(4n))`.
pub fn improvement_ratio(n: usize, m: usize) -> (FracPower, FracPower, FracPower) {
    let nm = (n + m) as i64;
    let n4 = 4 * n as i64;
    let prior = FracPower::new(rat_int(2), (nm + 3) * nm, n4).expect("positive base");
    let current = FracPower::new(rat_int(2), (nm - 1) * nm + n4, n4).expect("positive base");
    let ratio = crate::exactnum::frac_power_mul(&prior, &current.recip());
    (prior, current, ratio)
}
