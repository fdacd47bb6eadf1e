//! The block approximation lattice: scale handling, basis construction,
//! and extraction of integer tuples from a reduced basis.
//!
//! For an `n x m` target matrix `A` and accuracy `eps`, the lattice is
//! spanned by the columns of `[[I_n, A], [0, c I_m]]` with scale
//! `c = beta^((1-m-n)(n+m)/(4m)) * eps^(1+n/m)`. The scale is irrational in
//! general, so it is carried exactly as `gamma = c^(4m)` together with a
//! certified dyadic lower bound `c_lower <= c < c_lower (1 + 2^-p)`; the
//! lattice is built with `c_lower`, and the bound certificates account for
//! the inflation this can cause on the denominator side.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::certify::{self, Certificate};
use crate::error::{Error, Result};
use crate::exactnum::{nth_root_lower, rat_pow, root_certificate_holds, Rat};
use crate::lattice::{lll_reduce, LatticeBasis, ReductionParams};

/// Default dyadic precision for scale lower bounds.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// The `n x m` matrix of rational approximation targets: row `i` holds the
/// coefficients of the i-th linear form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetMatrix {
    entries: Vec<Vec<Rat>>,
}

impl TargetMatrix {
    pub fn new(entries: Vec<Vec<Rat>>) -> Result<Self> {
        if entries.is_empty() || entries[0].is_empty() {
            return Err(Error::InvalidParameter(
                "target matrix must have at least one row and one column".into(),
            ));
        }
        let m = entries[0].len();
        if entries.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidParameter(
                "target matrix rows must all have the same length".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// Column matrix for the simultaneous approximation of `n` numbers by a
    /// single denominator (`m = 1`).
    pub fn from_column(entries: Vec<Rat>) -> Result<Self> {
        Self::new(entries.into_iter().map(|e| vec![e]).collect())
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn m(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.entries
    }
}

/// Lattice scale held exactly: `gamma = c^(4m)` plus the certified dyadic
/// lower bound `c_lower` actually used to build the basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleFactor {
    gamma: Rat,
    m: usize,
    c_lower: Rat,
    precision_bits: u32,
}

impl ScaleFactor {
    pub fn from_gamma(gamma: Rat, m: usize, precision_bits: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if !gamma.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "scale gamma must be positive, got {gamma}"
            )));
        }
        let c_lower = nth_root_lower(&gamma, 4 * m as u32, precision_bits)?;
        let scale = Self {
            gamma,
            m,
            c_lower,
            precision_bits,
        };
        if !scale.certificate_holds() {
            return Err(Error::Internal(
                "scale lower-bound certificate failed".into(),
            ));
        }
        Ok(scale)
    }

    pub fn gamma(&self) -> &Rat {
        &self.gamma
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c_lower(&self) -> &Rat {
        &self.c_lower
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// `c_lower^(4m) <= gamma < (c_lower (1 + 2^-precision_bits))^(4m)`,
    /// checked exactly.
    pub fn certificate_holds(&self) -> bool {
        root_certificate_holds(
            &self.gamma,
            4 * self.m as u32,
            self.precision_bits,
            &self.c_lower,
        )
    }

    /// The per-iteration scale update `c -> c * d^(-(n+m)/m)`, exact on
    /// gamma: `gamma -> gamma * d^(-4(n+m))`.
    pub fn shrunk_by(&self, d: &Rat, n: usize) -> Result<ScaleFactor> {
        let gamma = &self.gamma * rat_pow(d, -4 * (n + self.m) as i64);
        Self::from_gamma(gamma, self.m, self.precision_bits)
    }
}

/// `gamma = beta^((1-m-n)(n+m)) * eps^(4(m+n))`: the exact 4m-th power of
/// the lattice scale for accuracy target `eps in (0, 1)`.
pub fn scale_from_epsilon(
    eps: &Rat,
    params: &ReductionParams,
    n: usize,
    m: usize,
    precision_bits: u32,
) -> Result<ScaleFactor> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "target dimensions must be at least 1".into(),
        ));
    }
    if !eps.is_positive() || *eps >= Rat::from(BigInt::from(1)) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let nm = (n + m) as i64;
    let gamma = rat_pow(params.beta(), (1 - nm) * nm) * rat_pow(eps, 4 * nm);
    ScaleFactor::from_gamma(gamma, m, precision_bits)
}

/// The `(n+m)`-dimensional column basis `[[I_n, A], [0, c I_m]]`, with the
/// certified lower bound standing in for `c`.
pub fn build_basis_matrix(a: &TargetMatrix, scale: &ScaleFactor) -> LatticeBasis {
    let (n, m) = (a.n(), a.m());
    let dim = n + m;
    let mut cols = Vec::with_capacity(dim);
    for i in 0..n {
        let mut col = vec![Rat::zero(); dim];
        col[i] = Rat::from(BigInt::from(1));
        cols.push(col);
    }
    for j in 0..m {
        let mut col = vec![Rat::zero(); dim];
        for i in 0..n {
            col[i] = a.entry(i, j).clone();
        }
        col[n + j] = scale.c_lower().clone();
        cols.push(col);
    }
    LatticeBasis::new(cols).expect("block basis is square by construction")
}

/// One extracted approximation: denominators `q`, numerators `p`, and the
/// exact per-row errors `row_errors[i] = |p_i + (A q)_i|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxResult {
    pub q: Vec<BigInt>,
    pub p: Vec<BigInt>,
    pub row_errors: Vec<Rat>,
    pub max_abs_q: BigInt,
    pub max_error: Rat,
    /// 1-based iteration that produced this tuple; 0 for a single shot.
    pub iteration_k: u32,
}

impl ApproxResult {
    /// Joint sign flip `(q, p) -> (-q, -p)`; all errors are unchanged.
    pub fn negated(mut self) -> Self {
        for x in self.q.iter_mut() {
            *x = -(x.clone());
        }
        for x in self.p.iter_mut() {
            *x = -(x.clone());
        }
        self
    }
}

/// Reads the first reduced vector with a nonzero denominator block and
/// splits it back into `(q, p)`. The lower block of any lattice vector is
/// `c_lower * (integer vector)`, so the divisions must be exact; a
/// non-integer quotient indicates a bug and is reported as such.
pub fn extract_tuple(
    reduced: &LatticeBasis,
    a: &TargetMatrix,
    scale: &ScaleFactor,
) -> Result<ApproxResult> {
    let (n, m) = (a.n(), a.m());
    if reduced.dim() != n + m {
        return Err(Error::InvalidParameter(format!(
            "reduced basis has dimension {}, expected n + m = {}",
            reduced.dim(),
            n + m
        )));
    }
    let vector = reduced
        .vectors()
        .iter()
        .find(|v| v[n..].iter().any(|x| !x.is_zero()))
        .ok_or(Error::NoNonzeroQPart)?;

    let mut q = Vec::with_capacity(m);
    for j in 0..m {
        let q_rat = &vector[n + j] / scale.c_lower();
        if !q_rat.is_integer() {
            return Err(Error::Internal(format!(
                "denominator coordinate {} is not an exact multiple of the scale",
                j + 1
            )));
        }
        q.push(q_rat.to_integer());
    }
    let mut p = Vec::with_capacity(n);
    let mut row_errors = Vec::with_capacity(n);
    for i in 0..n {
        let combo: Rat = (0..m)
            .map(|j| a.entry(i, j) * Rat::from(q[j].clone()))
            .sum();
        let p_rat = &vector[i] - combo;
        if !p_rat.is_integer() {
            return Err(Error::Internal(format!(
                "numerator coordinate {} is not an integer",
                i + 1
            )));
        }
        p.push(p_rat.to_integer());
        row_errors.push(vector[i].abs());
    }
    let max_abs_q = q.iter().map(|x| x.abs()).max().expect("m >= 1");
    let max_error = row_errors.iter().cloned().max().expect("n >= 1");
    Ok(ApproxResult {
        q,
        p,
        row_errors,
        max_abs_q,
        max_error,
        iteration_k: 0,
    })
}

/// An approximation together with the exact certificates checked for it.
#[derive(Clone, Debug)]
pub struct CertifiedApprox {
    pub result: ApproxResult,
    pub certificates: Vec<Certificate>,
}

impl CertifiedApprox {
    pub fn all_passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed())
    }
}

/// One reduction at accuracy `eps`: guarantees
/// `max_i |p_i + (A q)_i| <= eps` and
/// `max_j |q_j| <= beta^((m+n-1)(m+n)/(4m)) * eps^(-n/m)` (the latter up to
/// the certified scale slack), both recorded as certificates.
pub fn approximate_once(
    a: &TargetMatrix,
    eps: &Rat,
    params: &ReductionParams,
    precision_bits: u32,
) -> Result<CertifiedApprox> {
    let scale = scale_from_epsilon(eps, params, a.n(), a.m(), precision_bits)?;
    let basis = build_basis_matrix(a, &scale);
    let (reduced, _) = lll_reduce(&basis, params)?;
    let result = extract_tuple(&reduced, a, &scale)?;
    let certificates =
        certify::single_shot_certificates(a.n(), a.m(), eps, params, precision_bits, &result);
    Ok(CertifiedApprox {
        result,
        certificates,
    })
}

/// Simultaneous approximation of a column of `n` rationals by one positive
/// denominator: returns `q >= 1` with `q^n <= beta^(n(n+1)/4) * eps^(-n)`
/// (certified in the exact fourth power) and `|q a_i - p'_i| <= eps` for
/// the presented numerators `p' = -p`. The extracted tuple is negated
/// jointly if needed, which changes no error.
pub fn proposition_m1(a: &[Rat], eps: &Rat, params: &ReductionParams) -> Result<CertifiedApprox> {
    let matrix = TargetMatrix::from_column(a.to_vec())?;
    let approx = approximate_once(&matrix, eps, params, DEFAULT_PRECISION_BITS)?;
    let mut result = approx.result;
    if result.q[0].is_negative() {
        result = result.negated();
    }
    let certificates =
        certify::proposition_certificates(a.len(), eps, params, DEFAULT_PRECISION_BITS, &result);
    Ok(CertifiedApprox {
        result,
        certificates,
    })
}
