//! Seeded random generation of ring elements and parameters.
//!
//! Every generator takes an explicit RNG so that callers (tests, CLI,
//! examples) stay reproducible: the same seed always yields the same
//! element stream on every platform.

use crate::field::Prime;
use crate::frobenius::FrobParams;
use crate::index::MultiIndex;
use crate::ring::{DiffOp, Poly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// The project-wide deterministic RNG.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Uniform element of F_p, as a representative in [0, p).
pub fn random_scalar<R: Rng>(p: Prime, rng: &mut R) -> u64 {
    rng.gen_range(0..p.get())
}

/// Uniform element of F_p^*.
pub fn random_nonzero_scalar<R: Rng>(p: Prime, rng: &mut R) -> u64 {
    rng.gen_range(1..p.get())
}

/// Multi-index with n entries, each uniform in [0, max_entry].
pub fn random_index<R: Rng>(n: usize, max_entry: u32, rng: &mut R) -> MultiIndex {
    MultiIndex::new((0..n).map(|_| rng.gen_range(0..=max_entry)).collect())
}

/// Sum of up to `terms` random monomials x^α ∂^{[β]} with α ≤ max_x and
/// β ≤ max_d entrywise. Coinciding monomials merge, so the result can
/// have fewer terms, or even be zero.
pub fn random_diffop<R: Rng>(
    p: Prime,
    n: usize,
    max_x: u32,
    max_d: u32,
    terms: usize,
    rng: &mut R,
) -> DiffOp {
    let mut out = DiffOp::zero(p, n);
    for _ in 0..terms {
        let alpha = random_index(n, max_x, rng);
        let beta = random_index(n, max_d, rng);
        let c = random_nonzero_scalar(p, rng);
        out = &out + &DiffOp::monomial(p, n, &alpha, &beta, c);
    }
    out
}

/// Like [`random_diffop`], retrying until the element is nonzero.
pub fn random_nonzero_diffop<R: Rng>(
    p: Prime,
    n: usize,
    max_x: u32,
    max_d: u32,
    terms: usize,
    rng: &mut R,
) -> DiffOp {
    loop {
        let a = random_diffop(p, n, max_x, max_d, terms, rng);
        if !a.is_zero() {
            return a;
        }
    }
}

/// Random scalar operator (no x-part): element of the commutative
/// subalgebra spanned by the ∂^{[β]}.
pub fn random_scalar_op<R: Rng>(
    p: Prime,
    n: usize,
    max_d: u32,
    terms: usize,
    rng: &mut R,
) -> DiffOp {
    let mut out = DiffOp::zero(p, n);
    for _ in 0..terms {
        let beta = random_index(n, max_d, rng);
        let c = random_nonzero_scalar(p, rng);
        out = &out + &DiffOp::monomial(p, n, &MultiIndex::zero(n), &beta, c);
    }
    out
}

/// Random polynomial with per-axis degree ≤ max_deg.
pub fn random_poly<R: Rng>(
    p: Prime,
    n: usize,
    max_deg: u32,
    terms: usize,
    rng: &mut R,
) -> Poly {
    let mut out = Poly::zero(p, n);
    for _ in 0..terms {
        let alpha = random_index(n, max_deg, rng);
        let c = random_nonzero_scalar(p, rng);
        out = &out + &Poly::monomial(p, n, &alpha, c);
    }
    out
}

/// Random element of the span of {∂^{[β]} : 0 ≠ β, β_i < p^s for all i}
/// (the parameter space for one Frobenius matrix entry).
pub fn random_cube_entry<R: Rng>(
    p: Prime,
    n: usize,
    s: u32,
    terms: usize,
    rng: &mut R,
) -> DiffOp {
    let top = (p.pow(s) - 1) as u32;
    let mut out = DiffOp::zero(p, n);
    for _ in 0..terms {
        let beta = loop {
            let b = random_index(n, top, rng);
            if !b.is_zero() {
                break b;
            }
        };
        let c = random_nonzero_scalar(p, rng);
        out = &out + &DiffOp::monomial(p, n, &MultiIndex::zero(n), &beta, c);
    }
    out
}

/// Random admissible parameter matrix u with `depth` levels per axis.
pub fn random_frob_params<R: Rng>(
    p: Prime,
    n: usize,
    s: u32,
    depth: u32,
    rng: &mut R,
) -> FrobParams {
    let entries = (0..n)
        .map(|_| {
            (0..depth)
                .map(|_| {
                    let terms = rng.gen_range(0..=2);
                    random_cube_entry(p, n, s, terms, rng)
                })
                .collect()
        })
        .collect();
    FrobParams::new(p, n, s, entries).expect("cube entries are admissible")
}

/// Random admissible seed list for the rank-one construction over the
/// scalar operators in one variable at level 0 (δ = −ad x): the k-th
/// seed is ∂^{[p^k]} plus an arbitrary combination of ∂^{[m]}, 1 ≤ m < p^k.
/// These are exactly the elements y with y^p = 0 and δ^{p^k}(y) = 1.
pub fn random_admissible_seeds<R: Rng>(p: Prime, depth: u32, rng: &mut R) -> Vec<DiffOp> {
    (0..depth)
        .map(|k| {
            let pk = u32::try_from(p.pow(k)).expect("exponent overflow");
            let mut y = DiffOp::dpow(p, 1, 0, pk);
            for m in 1..pk {
                let c = random_scalar(p, rng);
                if c != 0 {
                    y = &y + &DiffOp::dpow(p, 1, 0, m).scalar_mul(p.scalar(c));
                }
            }
            y
        })
        .collect()
}
