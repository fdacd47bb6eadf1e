//! Exact rational scalars and symbolic fractional powers.
//!
//! Every quantity in this crate is a [`Rat`]: an arbitrary-precision
//! rational kept in canonical form (reduced, positive denominator). Bounds
//! of the form `b^(p/q)` are never evaluated numerically; they are carried
//! symbolically as a [`FracPower`] and compared by raising both sides to a
//! common integer exponent.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Universal exact scalar: arbitrary-precision rational in canonical form.
pub type Rat = BigRational;

/// Shorthand for small rational constants. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for integer constants.
pub fn rat_int(value: i64) -> Rat {
    Rat::from(BigInt::from(value))
}

/// Parses `"p/q"`, a decimal literal, or a plain integer into an exact
/// rational. Decimal literals convert exactly (`"0.125"` is `1/8`, not a
/// float). The denominator of a `p/q` literal must be positive.
pub fn parse_rat(input: &str) -> Result<Rat> {
    let s = input.trim();
    let invalid = || Error::Parse(format!("invalid rational literal '{input}'"));
    if s.is_empty() {
        return Err(invalid());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| invalid())?;
        let den: BigInt = den.trim().parse().map_err(|_| invalid())?;
        if !den.is_positive() {
            return Err(Error::Parse(format!(
                "denominator must be positive in '{input}'"
            )));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (negative, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_digits) || !all_digits(frac_part) {
            return Err(invalid());
        }
        if int_digits.is_empty() && frac_part.is_empty() {
            return Err(invalid());
        }
        let digits = format!(
            "{}{}",
            if int_digits.is_empty() {
                "0"
            } else {
                int_digits
            },
            frac_part
        );
        let num: BigInt = digits.parse().map_err(|_| invalid())?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        let value = Rat::new(num, den);
        return Ok(if negative { -value } else { value });
    }
    s.parse::<BigInt>().map(Rat::from).map_err(|_| invalid())
}

/// `x^e` for an integer exponent. `x` must be nonzero when `e < 0`.
pub fn rat_pow(x: &Rat, e: i64) -> Rat {
    if e == 0 {
        return Rat::one();
    }
    let mag = u32::try_from(e.unsigned_abs()).expect("exponent magnitude fits u32");
    let num = x.numer().pow(mag);
    let den = x.denom().pow(mag);
    if e > 0 {
        Rat::new(num, den)
    } else {
        assert!(!x.is_zero(), "negative power of zero");
        Rat::new(den, num)
    }
}

/// Distance from `x` to the nearest integer; always in `[0, 1/2]`.
pub fn nearest_int_dist(x: &Rat) -> Rat {
    let fract = x - x.floor();
    let complement = Rat::one() - &fract;
    if fract <= complement {
        fract
    } else {
        complement
    }
}

/// Nearest integer to `x`, with exact half-integers rounded toward zero
/// (`5/2 -> 2`, `-5/2 -> -2`).
pub fn round_ties_to_zero(x: &Rat) -> BigInt {
    let floor = x.floor();
    let fract = x - &floor;
    let floor = floor.to_integer();
    match fract.cmp(&rat(1, 2)) {
        Ordering::Less => floor,
        Ordering::Greater => floor + 1,
        Ordering::Equal => {
            if x.is_negative() {
                floor + 1
            } else {
                floor
            }
        }
    }
}

/// A positive rational base raised to a rational exponent, kept symbolic:
/// `base^(exp_num/exp_den)`. The exponent is stored reduced with
/// `exp_den >= 1`; the value itself is never rounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FracPower {
    base: Rat,
    exp_num: i64,
    exp_den: i64,
}

impl FracPower {
    pub fn new(base: Rat, exp_num: i64, exp_den: i64) -> Result<Self> {
        if !base.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "fractional power base must be positive, got {base}"
            )));
        }
        if exp_den < 1 {
            return Err(Error::InvalidParameter(format!(
                "fractional power exponent denominator must be >= 1, got {exp_den}"
            )));
        }
        if exp_num == 0 {
            return Ok(Self {
                base,
                exp_num: 0,
                exp_den: 1,
            });
        }
        let g = exp_num.unsigned_abs().gcd(&exp_den.unsigned_abs()) as i64;
        Ok(Self {
            base,
            exp_num: exp_num / g,
            exp_den: exp_den / g,
        })
    }

    pub fn base(&self) -> &Rat {
        &self.base
    }

    pub fn exp_num(&self) -> i64 {
        self.exp_num
    }

    pub fn exp_den(&self) -> i64 {
        self.exp_den
    }

    /// True when the represented value is exactly 1.
    pub fn is_one(&self) -> bool {
        self.exp_num == 0 || self.base.is_one()
    }

    /// `base^(-exp_num/exp_den)`.
    pub fn recip(&self) -> FracPower {
        Self {
            base: self.base.clone(),
            exp_num: -self.exp_num,
            exp_den: self.exp_den,
        }
    }

    /// Exact ordering of the represented values: raise both to
    /// `lcm(exp_den, other.exp_den)` and compare rationals.
    pub fn value_cmp(&self, other: &FracPower) -> Ordering {
        let l = self.exp_den.lcm(&other.exp_den);
        let lhs = rat_pow(&self.base, self.exp_num * (l / self.exp_den));
        let rhs = rat_pow(&other.base, other.exp_num * (l / other.exp_den));
        lhs.cmp(&rhs)
    }

    pub fn value_eq(&self, other: &FracPower) -> bool {
        self.value_cmp(other) == Ordering::Equal
    }
}

impl fmt::Display for FracPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base.is_integer() {
            write!(f, "{}^({}/{})", self.base, self.exp_num, self.exp_den)
        } else {
            write!(f, "({})^({}/{})", self.base, self.exp_num, self.exp_den)
        }
    }
}

/// Exact ordering of a positive rational `x` against `fp`, decided by
/// comparing `x^exp_den` with `base^exp_num`. No rounding is involved, so
/// equality is detected reliably.
pub fn cmp_frac_power(x: &Rat, fp: &FracPower) -> Result<Ordering> {
    if !x.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "cmp_frac_power requires x > 0, got {x}"
        )));
    }
    let lhs = rat_pow(x, fp.exp_den);
    let rhs = rat_pow(&fp.base, fp.exp_num);
    Ok(lhs.cmp(&rhs))
}

/// Product of two fractional powers, merged onto the common root
/// `lcm(exp_den, exp_den')` and simplified by extracting exact roots of the
/// merged base. Unit factors pass the other operand through unchanged, so
/// e.g. `4^(1/2) * 1^(5/3)` stays `4^(1/2)`, while `2^(3/2) * (1/2)^(1/2)`
/// collapses to `2^(1/1)`.
pub fn frac_power_mul(a: &FracPower, b: &FracPower) -> FracPower {
    if a.is_one() {
        return b.clone();
    }
    if b.is_one() {
        return a.clone();
    }
    let l = a.exp_den.lcm(&b.exp_den);
    let merged = rat_pow(&a.base, a.exp_num * (l / a.exp_den))
        * rat_pow(&b.base, b.exp_num * (l / b.exp_den));
    reduce_root(merged, l)
}

/// Lowers `base^(1/root)` by pulling exact p-th roots out of the base.
fn reduce_root(mut base: Rat, mut root: i64) -> FracPower {
    if base.is_one() {
        return FracPower::new(Rat::one(), 0, 1).expect("unit power");
    }
    let mut p = 2i64;
    while p <= root {
        while root % p == 0 {
            match exact_root(&base, p as u32) {
                Some(r) => {
                    base = r;
                    root /= p;
                }
                None => break,
            }
        }
        p += 1;
    }
    FracPower::new(base, 1, root).expect("positive base")
}

fn exact_root(x: &Rat, p: u32) -> Option<Rat> {
    let num = exact_int_root(x.numer(), p)?;
    let den = exact_int_root(x.denom(), p)?;
    Some(Rat::new(num, den))
}

fn exact_int_root(x: &BigInt, p: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(p);
    if r.clone().pow(p) == *x {
        Some(r)
    } else {
        None
    }
}

/// Certified dyadic lower bound for `x^(1/n)`: returns `r` with
///
/// ```text
/// r <= x^(1/n) < r * (1 + 2^-precision_bits)
/// ```
///
/// both sides checked exactly via [`root_certificate_holds`]. The returned
/// value has the form `a / 2^s` with `a >= 2^precision_bits`, which is what
/// makes the upper inequality follow from `(a+1)^n > x * 2^(n s)`.
pub fn nth_root_lower(x: &Rat, n: u32, precision_bits: u32) -> Result<Rat> {
    if !x.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "nth_root_lower requires x > 0, got {x}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "root index must be positive".into(),
        ));
    }
    if precision_bits == 0 {
        return Err(Error::InvalidParameter(
            "precision_bits must be positive".into(),
        ));
    }
    // Initial dyadic scale: enough bits that floor((x << n s)^(1/n)) already
    // has more than `precision_bits` bits; adjusted below if the magnitude
    // estimate was off.
    let num_bits = x.numer().bits() as i64;
    let den_bits = x.denom().bits() as i64;
    let mut s = (precision_bits as i64 + 2 + ((den_bits - num_bits) / n as i64).max(0)) as u64;
    let root = loop {
        let scaled: BigInt = (x.numer() << (n as u64 * s) as usize) / x.denom();
        let a = scaled.nth_root(n);
        debug_assert!(a.is_positive());
        if a.bits() > precision_bits as u64 {
            break Rat::new(a, BigInt::one() << s as usize);
        }
        s += precision_bits as u64 + 2 - a.bits();
    };
    debug_assert!(root_certificate_holds(x, n, precision_bits, &root));
    Ok(root)
}

/// Exact check of the [`nth_root_lower`] output contract:
/// `r^n <= x` and `(r (1 + 2^-precision_bits))^n > x`.
pub fn root_certificate_holds(x: &Rat, n: u32, precision_bits: u32, r: &Rat) -> bool {
    if !r.is_positive() {
        return false;
    }
    let n = n as i64;
    if rat_pow(r, n) > *x {
        return false;
    }
    let inflated =
        r * (Rat::one() + Rat::new(BigInt::one(), BigInt::one() << precision_bits as usize));
    rat_pow(&inflated, n) > *x
}
