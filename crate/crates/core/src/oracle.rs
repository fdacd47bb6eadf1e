//! Reference solvers used to cross-check the lattice output: exhaustive
//! search over bounded denominator tuples, continued-fraction convergents,
//! and a witness search for the one-sided pigeonhole guarantee.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{nearest_int_dist, rat_pow, Rat};
use crate::sda::TargetMatrix;

/// Cap on `(2 bound + 1)^m`, the number of candidate tuples enumerated.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

fn check_guard(m: usize, bound: u64) -> Result<()> {
    let per_axis = 2 * bound + 1;
    let mut total: u64 = 1;
    for _ in 0..m {
        total = total
            .checked_mul(per_axis)
            .filter(|t| *t <= ENUMERATION_GUARD)
            .ok_or_else(|| {
                Error::Intractable(format!(
                    "enumerating ({per_axis})^{m} candidate tuples exceeds the {ENUMERATION_GUARD} guard"
                ))
            })?;
    }
    Ok(())
}

/// Visits every nonzero `q` in `[-bound, bound]^m` whose first nonzero
/// entry is positive (one tuple per `{q, -q}` pair, since negation leaves
/// all errors unchanged), in lexicographic order.
fn for_each_canonical<F: FnMut(&[i64])>(m: usize, bound: i64, f: &mut F) {
    fn rec<F: FnMut(&[i64])>(
        q: &mut Vec<i64>,
        pos: usize,
        bound: i64,
        nonzero_seen: bool,
        f: &mut F,
    ) {
        if pos == q.len() {
            if nonzero_seen {
                f(q);
            }
            return;
        }
        let start = if nonzero_seen { -bound } else { 0 };
        for v in start..=bound {
            q[pos] = v;
            rec(q, pos + 1, bound, nonzero_seen || v != 0, f);
        }
    }
    let mut q = vec![0i64; m];
    rec(&mut q, 0, bound, false, f);
}

fn row_errors_for(a: &TargetMatrix, q: &[i64]) -> Vec<Rat> {
    (0..a.n())
        .map(|i| {
            let combo: Rat = (0..a.m())
                .map(|j| a.entry(i, j) * Rat::from(BigInt::from(q[j])))
                .sum();
            nearest_int_dist(&combo)
        })
        .collect()
}

/// The exhaustive optimum over denominators bounded by `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleBest {
    /// Minimizer of `max_i ||(A q)_i||`; ties broken toward the
    /// lexicographically smallest canonical tuple.
    pub q_star: Vec<BigInt>,
    pub best_error: Rat,
    pub search_bound: u64,
}

/// Exhaustive search of all canonical nonzero `q` with `max |q_j| <= bound`
/// for the minimal `max_i ||(A q)_i||`. Errors out (rather than stalling)
/// when the candidate count exceeds [`ENUMERATION_GUARD`].
pub fn brute_best(a: &TargetMatrix, bound: u64) -> Result<OracleBest> {
    if bound == 0 {
        return Err(Error::InvalidParameter(
            "search bound must be at least 1".into(),
        ));
    }
    check_guard(a.m(), bound)?;
    let mut best: Option<(Rat, Vec<i64>)> = None;
    for_each_canonical(a.m(), bound as i64, &mut |q| {
        let err = row_errors_for(a, q).into_iter().max().expect("n >= 1");
        let better = match &best {
            None => true,
            Some((e, bq)) => err < *e || (err == *e && q < &bq[..]),
        };
        if better {
            best = Some((err, q.to_vec()));
        }
    });
    let (best_error, q_star) = best.expect("bound >= 1 yields candidates");
    Ok(OracleBest {
        q_star: q_star.into_iter().map(BigInt::from).collect(),
        best_error,
        search_bound: bound,
    })
}

/// Continued-fraction convergents `(p_k, q_k)` of a rational target, by the
/// Euclidean algorithm. The sequence is finite and its last element equals
/// the input exactly; at most `count` initial convergents are returned.
pub fn cf_convergents(a: &Rat, count: usize) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    if count == 0 {
        return out;
    }
    let mut num = a.numer().clone();
    let mut den = a.denom().clone();
    let (mut p_prev2, mut p_prev) = (BigInt::zero(), BigInt::one());
    let (mut q_prev2, mut q_prev) = (BigInt::one(), BigInt::zero());
    loop {
        let (quot, rem) = num.div_mod_floor(&den);
        let p = &quot * &p_prev + &p_prev2;
        let q = &quot * &q_prev + &q_prev2;
        out.push((p.clone(), q.clone()));
        if out.len() == count || rem.is_zero() {
            return out;
        }
        p_prev2 = std::mem::replace(&mut p_prev, p);
        q_prev2 = std::mem::replace(&mut q_prev, q);
        num = den;
        den = rem;
    }
}

/// A tuple meeting the per-row pigeonhole quality `q^(m/n) ||(A q)_i|| < 1`,
/// decided exactly as `q^m ||(A q)_i||^n < 1` with `q = max |q_j|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletWitness {
    pub q: Vec<BigInt>,
    pub row_errors: Vec<Rat>,
    pub max_error: Rat,
    pub max_abs_q: BigInt,
}

/// Searches denominators up to `bound` for tuples meeting the pigeonhole
/// quality on every row and returns the one with the smallest maximal
/// error (ties lexicographic). Row errors never exceed 1/2, so the unit
/// tuple `q = (1, 0, ..)` always qualifies and `None` cannot occur for
/// `bound >= 1`; the `Option` mirrors the general existence contract.
pub fn dirichlet_witness(a: &TargetMatrix, bound: u64) -> Result<Option<DirichletWitness>> {
    if bound == 0 {
        return Err(Error::InvalidParameter(
            "search bound must be at least 1".into(),
        ));
    }
    check_guard(a.m(), bound)?;
    let (n, m) = (a.n(), a.m());
    let mut best: Option<(Rat, Vec<i64>, Vec<Rat>)> = None;
    for_each_canonical(m, bound as i64, &mut |q| {
        let errs = row_errors_for(a, q);
        let q_inf = q.iter().map(|x| x.abs()).max().expect("m >= 1");
        let q_pow = rat_pow(&Rat::from(BigInt::from(q_inf)), m as i64);
        let qualifies = errs
            .iter()
            .all(|e| &q_pow * rat_pow(e, n as i64) < Rat::one());
        if !qualifies {
            return;
        }
        let max_err = errs.iter().cloned().max().expect("n >= 1");
        let better = match &best {
            None => true,
            Some((e, bq, _)) => max_err < *e || (max_err == *e && q < &bq[..]),
        };
        if better {
            best = Some((max_err, q.to_vec(), errs));
        }
    });
    Ok(best.map(|(max_error, q, row_errors)| {
        let max_abs_q = q.iter().map(|x| x.abs()).max().expect("m >= 1");
        DirichletWitness {
            q: q.into_iter().map(BigInt::from).collect(),
            row_errors,
            max_error,
            max_abs_q: BigInt::from(max_abs_q),
        }
    }))
}
