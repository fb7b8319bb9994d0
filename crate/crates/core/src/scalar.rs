//! Rational scalars and the explicit conversions around them.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational, always normalized (gcd 1, positive denominator).
pub type Rational = BigRational;

/// Default number of bits kept when an irrational value is approximated by a rational.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Lossless conversion of a finite float to the rational it denotes.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite float {x}")))
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q`, an integer, or a decimal literal with optional exponent
/// (`0.125`, `-3e-2`). Decimals are converted exactly.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = format!("{whole}{frac}");
    let mut numer: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| bad())?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Exact `n`-th root when `r` is a perfect `n`-th power of a rational.
/// Negative inputs have a real root only for odd `n`.
pub fn nth_root_exact(r: &Rational, n: u32) -> Option<Rational> {
    if n == 0 {
        return None;
    }
    if r.is_zero() {
        return Some(Rational::zero());
    }
    if r.is_negative() && n.is_multiple_of(2) {
        return None;
    }
    let root_int = |x: &BigInt| -> Option<BigInt> {
        let c = x.abs().nth_root(n);
        (num_traits::pow(c.clone(), n as usize) == x.abs()).then_some(c)
    };
    let p = root_int(r.numer())?;
    let q = root_int(r.denom())?;
    let root = Rational::new(p, q);
    Some(if r.is_negative() { -root } else { root })
}

/// Real `n`-th root in floating point (odd roots of negatives allowed).
pub fn nth_root_f64(x: f64, n: u32) -> Option<f64> {
    if x < 0.0 {
        (n % 2 == 1).then(|| -(-x).powf(1.0 / n as f64))
    } else {
        Some(x.powf(1.0 / n as f64))
    }
}

/// Rounds to `bits` significant bits.
pub fn round_to_bits(r: &Rational, bits: u32) -> Rational {
    if r.is_zero() {
        return r.clone();
    }
    let mag = r.numer().bits() as i64 - r.denom().bits() as i64;
    let shift = bits as i64 - mag;
    let two = BigInt::from(2);
    let scaled = if shift >= 0 {
        r * Rational::from_integer(num_traits::pow(two.clone(), shift as usize))
    } else {
        r / Rational::from_integer(num_traits::pow(two.clone(), (-shift) as usize))
    };
    let rounded = Rational::from_integer(scaled.round().to_integer());
    if shift >= 0 {
        rounded / Rational::from_integer(num_traits::pow(two, shift as usize))
    } else {
        rounded * Rational::from_integer(num_traits::pow(two, (-shift) as usize))
    }
}

/// Rational approximation of `sqrt(r)` with relative error below `2^-bits`.
pub fn sqrt_approx(r: &Rational, bits: u32) -> Result<Rational> {
    if r.is_negative() {
        return Err(Error::InvalidArgument("square root of a negative".into()));
    }
    if let Some(exact) = nth_root_exact(r, 2) {
        return Ok(exact);
    }
    // sqrt(n/d) = sqrt(n d) / d, scaled by 2^(bits + guard).
    let guard = bits + 8 + (r.denom().bits() as u32);
    let nd = r.numer() * r.denom();
    let scaled = nd << (2 * guard as usize);
    let s = scaled.sqrt();
    let approx = Rational::new(s, r.denom() << guard as usize);
    Ok(round_to_bits(&approx, bits + 4))
}

/// Rational approximation of `e^{-1}` with relative error below `2^-bits`.
pub fn exp_neg_one(bits: u32) -> Rational {
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    let threshold = Rational::new(BigInt::one(), BigInt::one() << (bits as usize + 8));
    let mut k = 0u64;
    while term > threshold {
        if k.is_multiple_of(2) {
            sum += &term;
        } else {
            sum -= &term;
        }
        k += 1;
        term /= Rational::from_integer(BigInt::from(k));
    }
    round_to_bits(&sum, bits + 4)
}

/// Continued-fraction convergents of `r`, in order of increasing denominator.
pub fn convergents(r: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut x = r.clone();
    loop {
        let a = x.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        out.push(Rational::new(h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &x - Rational::from_integer(a);
        if frac.is_zero() || out.len() > 200 {
            break;
        }
        x = frac.recip();
    }
    out
}

pub fn sign(r: &Rational) -> i8 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Integer binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Least common multiple of the denominators of `values`.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn pow(r: &Rational, e: usize) -> Rational {
    num_traits::pow(r.clone(), e)
}
