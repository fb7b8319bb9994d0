//! Dense univariate polynomials over the rationals, with the exact machinery
//! needed to decide nonnegativity on the real line.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::scalar::{self, Rational};

/// Coefficients are stored lowest degree first, with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// `u - root`
    pub fn linear(root: Rational) -> Self {
        Poly::new(vec![-root, Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + scalar::to_f64(c))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * z + scalar::to_f64(c))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn pow(&self, e: usize) -> Poly {
        (0..e).fold(Poly::constant(Rational::one()), |acc, _| &acc * self)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let f = rem.last().unwrap() / &lc;
            for (i, c) in divisor.coeffs.iter().enumerate() {
                let d = &f * c;
                rem[shift + i] -= d;
            }
            quot[shift] = f;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Renders with the given variable name, highest degree first.
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let coef = scalar::format(&mag);
            match k {
                0 => out.push_str(&coef),
                _ => {
                    if !mag.is_one() {
                        out.push_str(&coef);
                        out.push('*');
                    }
                    out.push_str(var);
                    if k > 1 {
                        out.push('^');
                        out.push_str(&k.to_string());
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("u"))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Yun's square-free decomposition of a nonzero polynomial.
///
/// Returns `(c, factors)` with `p = c * prod_i factors[i]^(i+1)`; each factor
/// is monic and square-free, and the factors are pairwise coprime.
pub fn square_free_decomposition(p: &Poly) -> (Rational, Vec<Poly>) {
    let lc = p.leading();
    let f = p.monic();
    if f.degree().unwrap_or(0) == 0 {
        return (lc, Vec::new());
    }
    let one = Poly::constant(Rational::one());
    let df = f.derivative();
    let a0 = f.gcd(&df);
    let mut b = f.div_rem(&a0).0;
    let c = df.div_rem(&a0).0;
    let mut d = &c - &b.derivative();
    let mut factors = Vec::new();
    while b != one {
        let a = b.gcd(&d);
        let b_next = b.div_rem(&a).0;
        let c_next = d.div_rem(&a).0;
        d = &c_next - &b_next.derivative();
        b = b_next;
        factors.push(a);
    }
    while factors.last().is_some_and(|f| *f == one) {
        factors.pop();
    }
    (lc, factors)
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Sturm chain `p, p', -rem(p, p'), ...`.
pub fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        let r = chain[n - 2].div_rem(&chain[n - 1]).1;
        if r.is_zero() {
            break;
        }
        chain.push(-&r);
    }
    chain
}

/// Number of distinct real roots of a nonzero polynomial.
pub fn real_root_count(p: &Poly) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let chain = sturm_chain(p);
    let at_pos = chain.iter().map(|q| scalar::sign(&q.leading()));
    let at_neg = chain.iter().map(|q| {
        let s = scalar::sign(&q.leading());
        if q.degree().unwrap_or(0) % 2 == 1 {
            -s
        } else {
            s
        }
    });
    sign_changes(at_neg) - sign_changes(at_pos)
}

/// Decides `p(u) >= 0` for every real `u`, exactly.
///
/// Nonnegative iff `p` is zero, or has positive leading coefficient and every
/// real root has even multiplicity (which forces even degree).
pub fn is_nonnegative_on_reals(p: &Poly) -> bool {
    if p.is_zero() {
        return true;
    }
    if p.leading().is_negative() || p.degree().unwrap() % 2 == 1 {
        return false;
    }
    let (_, factors) = square_free_decomposition(p);
    factors
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .all(|(_, f)| real_root_count(f) == 0)
}
