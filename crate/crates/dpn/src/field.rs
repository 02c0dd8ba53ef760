//! Arithmetic in the prime field F_p and binomial coefficients modulo p.
//!
//! Binomial coefficients are never formed from big factorials: `binom_mod_p`
//! multiplies one small binomial per base-p digit of the arguments
//! (C(m,k) = Π C(m_t, k_t) mod p), so C(m,k) for m up to 2^63 costs
//! O(log_p m) digit steps of at most p-1 multiplications each. A digit
//! binomial C(a,b) with a,b < p is a quotient of products of integers
//! below p, all invertible mod p.
//!
//! Consequences used throughout the crate:
//! * C(m,k) ≡ 0 iff some digit of k exceeds the digit of m (a base-p carry
//!   occurs in k + (m-k));
//! * C(α+β, β) for multi-indices factors over the axes (`multi_binom`);
//! * `inv_digit_factorial(d)` = (d!)^{-1} exists for every digit d < p.

use crate::error::Error;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A validated prime modulus. Bounded by 2^31 - 1 so that products of two
/// reduced residues stay inside u64.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Prime(u64);

impl Prime {
    /// Largest admissible modulus.
    pub const MAX: u64 = (1 << 31) - 1;

    pub fn new(p: u64) -> Result<Self, Error> {
        if p > Self::MAX {
            return Err(Error::PrimeTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// p^e, panicking if it leaves u64.
    pub fn pow(self, e: u32) -> u64 {
        self.0.checked_pow(e).expect("prime power exceeds u64")
    }

    /// The residue of `value`.
    pub fn scalar(self, value: u64) -> Scalar {
        Scalar {
            value: value % self.0,
            prime: self,
        }
    }

    /// The residue of a signed integer.
    pub fn scalar_i64(self, value: i64) -> Scalar {
        let p = self.0 as i64;
        Scalar {
            value: value.rem_euclid(p) as u64,
            prime: self,
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    if m % 2 == 0 {
        return m == 2;
    }
    let mut d = 3u64;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of F_p. Operations across distinct moduli panic: residues
/// from different fields must never mix silently.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Scalar {
    value: u64,
    prime: Prime,
}

impl Scalar {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn prime(self) -> Prime {
        self.prime
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse via Fermat: a^{p-2}. Panics on zero.
    pub fn inv(self) -> Scalar {
        assert!(self.value != 0, "inverse of zero in F_{}", self.prime);
        self.pow(self.prime.get() - 2)
    }

    pub fn pow(self, mut e: u64) -> Scalar {
        let p = self.prime.get();
        let mut base = self.value;
        let mut acc = 1u64 % p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        Scalar {
            value: acc,
            prime: self.prime,
        }
    }

    fn same_field(self, rhs: Scalar) -> Prime {
        assert!(
            self.prime == rhs.prime,
            "mixed moduli {} and {}",
            self.prime,
            rhs.prime
        );
        self.prime
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        let p = self.same_field(rhs);
        p.scalar(self.value + rhs.value)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        let p = self.same_field(rhs);
        p.scalar(self.value + p.get() - rhs.value)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        let p = self.same_field(rhs);
        p.scalar(self.value * rhs.value)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.prime.scalar(self.prime.get() - self.value)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Base-p digits of m, least significant first. Empty for m = 0.
pub fn base_p_digits(mut m: u64, p: Prime) -> Vec<u64> {
    let q = p.get();
    let mut out = Vec::new();
    while m > 0 {
        out.push(m % q);
        m /= q;
    }
    out
}

/// C(a, b) for digits 0 <= b <= a < p, by the falling product; all factors
/// in the denominator are below p, hence invertible.
fn binom_digit(a: u64, b: u64, p: Prime) -> u64 {
    debug_assert!(b <= a && a < p.get());
    let b = b.min(a - b);
    let q = p.get();
    let mut num = 1u64;
    let mut den = 1u64;
    for t in 0..b {
        num = num * ((a - t) % q) % q;
        den = den * ((t + 1) % q) % q;
    }
    (p.scalar(num) * p.scalar(den).inv()).value()
}

/// C(m, k) mod p, digit by digit in base p.
pub fn binom_mod_p(m: u64, k: u64, p: Prime) -> Scalar {
    if k > m {
        return p.scalar(0);
    }
    let q = p.get();
    let mut m = m;
    let mut k = k;
    let mut acc = 1 % q;
    while k > 0 {
        let (md, kd) = (m % q, k % q);
        if kd > md {
            return p.scalar(0);
        }
        acc = acc * binom_digit(md, kd, p) % q;
        m /= q;
        k /= q;
    }
    p.scalar(acc)
}

/// Π_i C(α_i, β_i) mod p for equal-length exponent vectors.
pub fn multi_binom(alpha: &[u32], beta: &[u32], p: Prime) -> Scalar {
    assert_eq!(alpha.len(), beta.len(), "exponent vectors of unequal length");
    let mut acc = p.scalar(1);
    for (&a, &b) in alpha.iter().zip(beta) {
        if acc.is_zero() {
            return acc;
        }
        acc = acc * binom_mod_p(a as u64, b as u64, p);
    }
    acc
}

/// (d!)^{-1} mod p for a single base-p digit d < p.
pub fn inv_digit_factorial(d: u64, p: Prime) -> Scalar {
    assert!(d < p.get(), "{} is not a base-{} digit", d, p);
    let mut acc = p.scalar(1);
    for t in 2..=d {
        acc = acc * p.scalar(t);
    }
    acc.inv()
}
