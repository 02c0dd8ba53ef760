//! Sparse normal-form arithmetic in the ring of divided-power differential
//! operators on F_p[x_1, …, x_n].
//!
//! An element is a finite sum Σ c_{αβ} x^α ∂^{[β]} with c_{αβ} ∈ F_p,
//! where ∂^{[β]} = Π_i ∂_i^{[β_i]} and ∂_i^{[k]} acts on polynomials by
//! ∂_i^{[k]}(x_i^m) = C(m,k) x_i^{m-k}. The generators satisfy
//!
//!   ∂_i^{[k]} ∂_i^{[l]} = C(k+l, k) ∂_i^{[k+l]},
//!   [∂_i^{[k]}, x_j]    = δ_{ij} ∂_i^{[k-1]},
//!   [x_i, x_j] = [∂_i^{[k]}, ∂_j^{[l]}] = 0  (i ≠ j),
//!
//! from which multiplication rewrites every product into normal form via
//!
//!   ∂_i^{[k]} x_i^m = Σ_{j ≤ min(k,m)} C(m,j) x_i^{m-j} ∂_i^{[k-j]}.
//!
//! All coefficients live in F_p through Lucas digit products, so every
//! computation here is exact. The independent certificate for `mul` is
//! the action: composing the actions of a and b on polynomials must agree
//! with the action of a·b (tested exhaustively below and in the
//! acceptance suite).

use crate::field::{multi_binom, Prime, Scalar};
use crate::index::MultiIndex;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Exponent pair (α, β) of one normal-form term x^α ∂^{[β]}.
pub type TermKey = (MultiIndex, MultiIndex);

/// A differential operator in normal form. Stored coefficients are
/// always in [1, p); absent keys mean zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffOp {
    p: Prime,
    n: usize,
    terms: BTreeMap<TermKey, u64>,
}

impl DiffOp {
    pub fn zero(p: Prime, n: usize) -> Self {
        DiffOp {
            p,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(p: Prime, n: usize) -> Self {
        Self::scalar(p, n, 1)
    }

    pub fn scalar(p: Prime, n: usize, c: u64) -> Self {
        Self::monomial(p, n, &MultiIndex::zero(n), &MultiIndex::zero(n), c)
    }

    /// x_i (axes are 0-based here; the CLI surface is 1-based).
    pub fn var(p: Prime, n: usize, i: usize) -> Self {
        Self::xpow(p, n, i, 1)
    }

    pub fn xpow(p: Prime, n: usize, i: usize, e: u32) -> Self {
        Self::monomial(p, n, &MultiIndex::axis(n, i, e), &MultiIndex::zero(n), 1)
    }

    /// ∂_i^{[k]}, the k-th divided power.
    pub fn dpow(p: Prime, n: usize, i: usize, k: u32) -> Self {
        Self::monomial(p, n, &MultiIndex::zero(n), &MultiIndex::axis(n, i, k), 1)
    }

    pub fn monomial(p: Prime, n: usize, alpha: &MultiIndex, beta: &MultiIndex, c: u64) -> Self {
        assert_eq!(alpha.len(), n, "x-exponent length differs from n");
        assert_eq!(beta.len(), n, "∂-exponent length differs from n");
        let mut out = Self::zero(p, n);
        out.add_term(alpha.clone(), beta.clone(), c % p.get());
        out
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (lexicographic key) order.
    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, Scalar)> + '_ {
        self.terms.iter().map(|(k, &c)| (k, self.p.scalar(c)))
    }

    pub fn coeff(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Scalar {
        let c = self
            .terms
            .get(&(alpha.clone(), beta.clone()))
            .copied()
            .unwrap_or(0);
        self.p.scalar(c)
    }

    /// True iff no term has an x-part: the element lies in D_n.
    pub fn is_scalar_operator(&self) -> bool {
        self.terms.keys().all(|(a, _)| a.is_zero())
    }

    /// True iff no term has a ∂-part: the element lies in P_n.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|(_, b)| b.is_zero())
    }

    fn add_term(&mut self, alpha: MultiIndex, beta: MultiIndex, c: u64) {
        let c = c % self.p.get();
        if c == 0 {
            return;
        }
        let key = (alpha, beta);
        let next = (self.terms.get(&key).copied().unwrap_or(0) + c) % self.p.get();
        if next == 0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, next);
        }
    }

    fn assert_same_shape(&self, rhs: &DiffOp) {
        assert!(
            self.p == rhs.p && self.n == rhs.n,
            "shape mismatch: F_{} in {} variables vs F_{} in {} variables",
            self.p,
            self.n,
            rhs.p,
            rhs.n
        );
    }

    pub fn scalar_mul(&self, c: Scalar) -> DiffOp {
        assert!(c.prime() == self.p, "scalar from a different field");
        let mut out = DiffOp::zero(self.p, self.n);
        if c.is_zero() {
            return out;
        }
        for ((a, b), &v) in &self.terms {
            out.add_term(a.clone(), b.clone(), v * c.value());
        }
        out
    }

    /// Product in normal form. For each pair of terms
    /// x^{α}∂^{[β]} · x^{α'}∂^{[β']}, the interchange of ∂^{[β]} past x^{α'}
    /// contributes, for every γ ≤ min(β, α'),
    /// C(α',γ)·C(β-γ+β', β') · x^{α+α'-γ} ∂^{[β-γ+β']}.
    pub fn mul(&self, rhs: &DiffOp) -> DiffOp {
        self.assert_same_shape(rhs);
        let mut out = DiffOp::zero(self.p, self.n);
        for ((a1, b1), &c1) in &self.terms {
            for ((a2, b2), &c2) in &rhs.terms {
                let cap = b1.entrywise_min(a2);
                for g in MultiIndex::iter_le(&cap) {
                    let interchange = multi_binom(a2.entries(), g.entries(), self.p);
                    if interchange.is_zero() {
                        continue;
                    }
                    let b_rest = b1.checked_sub(&g).unwrap();
                    let b_out = b_rest.add(b2);
                    let merge = multi_binom(b_out.entries(), b2.entries(), self.p);
                    if merge.is_zero() {
                        continue;
                    }
                    let a_out = a1.add(&a2.checked_sub(&g).unwrap());
                    out.add_term(a_out, b_out, c1 * c2 % self.p.get() * interchange.value() % self.p.get() * merge.value());
                }
            }
        }
        out
    }

    /// a^e by repeated squaring over `mul`.
    pub fn pow(&self, e: u64) -> DiffOp {
        let mut acc = DiffOp::one(self.p, self.n);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// [self, rhs] = self·rhs − rhs·self.
    pub fn commutator(&self, rhs: &DiffOp) -> DiffOp {
        self.mul(rhs) - rhs.mul(self)
    }

    /// [a, x_i]: each term's β_i drops by one, coefficient unchanged
    /// (terms with β_i = 0 vanish). Equals −ad(x_i) applied to a.
    pub fn ad_x(&self, i: usize) -> DiffOp {
        self.lower_d(i, 1)
    }

    /// (−ad x_i)^m in one step: β_i drops by m. Agrees with −ad(x_i^m)
    /// whenever m is a power of p (binomial middle terms vanish).
    pub fn lower_d(&self, i: usize, m: u32) -> DiffOp {
        assert!(i < self.n, "axis {} out of range for n = {}", i, self.n);
        let mut out = DiffOp::zero(self.p, self.n);
        for ((a, b), &c) in &self.terms {
            if b.get(i) >= m {
                out.add_term(a.clone(), b.with(i, b.get(i) - m), c);
            }
        }
        out
    }

    /// [∂_i^{[p^k]}, a], computed through `mul`.
    pub fn ad_dpk(&self, i: usize, k: u32) -> DiffOp {
        let e = u32::try_from(self.p.pow(k)).expect("p^k exceeds exponent range");
        DiffOp::dpow(self.p, self.n, i, e).commutator(self)
    }

    /// Action on a polynomial: x^α∂^{[β]} sends x^γ to C(γ,β) x^{α+γ-β}.
    pub fn apply(&self, f: &Poly) -> Poly {
        assert!(
            self.p == f.p && self.n == f.n,
            "operator and polynomial shapes differ"
        );
        let mut out = Poly::zero(self.p, self.n);
        for ((a, b), &c) in &self.terms {
            for (g, &cf) in &f.terms {
                let act = multi_binom(g.entries(), b.entries(), self.p);
                if act.is_zero() {
                    continue;
                }
                let target = a.add(&g.checked_sub(b).unwrap());
                out.add_term(target, c * cf % self.p.get() * act.value());
            }
        }
        out
    }

    /// Componentwise maximum of β over stored terms (zero for 0).
    pub fn max_beta(&self) -> MultiIndex {
        self.terms
            .keys()
            .fold(MultiIndex::zero(self.n), |acc, (_, b)| acc.entrywise_max(b))
    }

    /// Componentwise maximum of α over stored terms (zero for 0).
    pub fn max_alpha(&self) -> MultiIndex {
        self.terms
            .keys()
            .fold(MultiIndex::zero(self.n), |acc, (a, _)| acc.entrywise_max(a))
    }

    /// (order, degree): the maxima over terms of |β| and of |α| + |β|.
    /// Undefined (panics) for the zero element.
    pub fn degrees(&self) -> (u64, u64) {
        assert!(!self.is_zero(), "degrees of the zero element are undefined");
        let order = self.terms.keys().map(|(_, b)| b.total()).max().unwrap();
        let degree = self
            .terms
            .keys()
            .map(|(a, b)| a.total() + b.total())
            .max()
            .unwrap();
        (order, degree)
    }

    /// Max of |α| + |β| over terms; 0 for the zero element.
    pub fn canonical_degree(&self) -> u64 {
        self.terms
            .keys()
            .map(|(a, b)| a.total() + b.total())
            .max()
            .unwrap_or(0)
    }

    pub fn to_poly(&self) -> Result<Poly, crate::error::Error> {
        if !self.is_polynomial() {
            return Err(crate::error::Error::NotPolynomial);
        }
        let mut out = Poly::zero(self.p, self.n);
        for ((a, _), &c) in &self.terms {
            out.add_term(a.clone(), c);
        }
        Ok(out)
    }

    pub fn from_poly(f: &Poly) -> DiffOp {
        let mut out = DiffOp::zero(f.p, f.n);
        for (a, &c) in &f.terms {
            out.add_term(a.clone(), MultiIndex::zero(f.n), c);
        }
        out
    }
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        self.assert_same_shape(rhs);
        let mut out = self.clone();
        for ((a, b), &c) in &rhs.terms {
            out.add_term(a.clone(), b.clone(), c);
        }
        out
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        self.assert_same_shape(rhs);
        let mut out = self.clone();
        let p = self.p.get();
        for ((a, b), &c) in &rhs.terms {
            out.add_term(a.clone(), b.clone(), p - c);
        }
        out
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp::zero(self.p, self.n) - self.clone()
    }
}

impl Add for DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: DiffOp) -> DiffOp {
        &self + &rhs
    }
}

impl Sub for DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: DiffOp) -> DiffOp {
        &self - &rhs
    }
}

impl Neg for DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        -&self
    }
}

impl Mul for &DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        DiffOp::mul(self, rhs)
    }
}

/// Equality certified through the polynomial action: a = b iff they act
/// identically on every monomial x^γ with γ up to the componentwise max
/// of the stored ∂-exponents. Sufficient bound: a ≤-minimal stored β₀ of
/// a − b reproduces its coefficients in (a − b)(x^{β₀}) with factor
/// C(β₀,β₀) = 1, and no other stored β reaches x^{β₀}.
pub fn equals_via_action(a: &DiffOp, b: &DiffOp) -> bool {
    a.assert_same_shape(b);
    let bound = a.max_beta().entrywise_max(&b.max_beta());
    for g in MultiIndex::iter_le(&bound) {
        let probe = Poly::monomial(a.p, a.n, &g, 1);
        if a.apply(&probe) != b.apply(&probe) {
            return false;
        }
    }
    true
}

/// A polynomial in F_p[x_1, …, x_n], sparse, coefficients in [1, p).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    p: Prime,
    n: usize,
    terms: BTreeMap<MultiIndex, u64>,
}

impl Poly {
    pub fn zero(p: Prime, n: usize) -> Self {
        Poly {
            p,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(p: Prime, n: usize) -> Self {
        Self::monomial(p, n, &MultiIndex::zero(n), 1)
    }

    pub fn monomial(p: Prime, n: usize, alpha: &MultiIndex, c: u64) -> Self {
        assert_eq!(alpha.len(), n);
        let mut out = Self::zero(p, n);
        out.add_term(alpha.clone(), c % p.get());
        out
    }

    pub fn var(p: Prime, n: usize, i: usize) -> Self {
        Self::monomial(p, n, &MultiIndex::unit(n, i), 1)
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, Scalar)> + '_ {
        self.terms.iter().map(|(k, &c)| (k, self.p.scalar(c)))
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Scalar {
        self.p.scalar(self.terms.get(alpha).copied().unwrap_or(0))
    }

    fn add_term(&mut self, alpha: MultiIndex, c: u64) {
        let c = c % self.p.get();
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(alpha.clone()).or_insert(0);
        *entry = (*entry + c) % self.p.get();
        if *entry == 0 {
            self.terms.remove(&alpha);
        }
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        assert!(self.p == rhs.p && self.n == rhs.n, "shape mismatch");
        let mut out = Poly::zero(self.p, self.n);
        for (a, &c1) in &self.terms {
            for (b, &c2) in &rhs.terms {
                out.add_term(a.add(b), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut acc = Poly::one(self.p, self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert!(self.p == rhs.p && self.n == rhs.n, "shape mismatch");
        let mut out = self.clone();
        for (a, &c) in &rhs.terms {
            out.add_term(a.clone(), c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert!(self.p == rhs.p && self.n == rhs.n, "shape mismatch");
        let mut out = self.clone();
        let p = self.p.get();
        for (a, &c) in &rhs.terms {
            out.add_term(a.clone(), p - c);
        }
        out
    }
}
