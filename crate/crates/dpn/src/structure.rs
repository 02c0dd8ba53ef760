//! Structural subalgebras, the nil-filtration, the free-module
//! decomposition over a Frobenius image, and the rigidity checker.
//!
//! The kernels and centralizers attached to the distinguished elements
//! x_i^{p^k} and ∂_i^{[p^k]} all have closed forms as spans of normal
//! monomials x^α ∂^{[β]} cut out by exponent patterns:
//!
//! * joint centralizer of ∂_i, ∂_i^{[p]}, …, ∂_i^{[p^k]} —
//!   p^{k+1} divides α_i;
//! * joint centralizer of the axis towers up to levels k_i —
//!   p^{k_i+1} | α_i ∀i;
//! * centralizer of every ∂_i^{[p^k]}, k ≥ 0 — α_i = 0;
//! * centralizer of all divided powers — α = 0 (the scalar
//!   operators D_n);
//! * centralizer of x_i^{p^k} — β_i < p^k;
//! * joint centralizer of x_i^{p^{k_i}} — β_i < p^{k_i} ∀i;
//! * centralizer of all x_i — β = 0 (the polynomials P_n);
//! * scalar-operator part of the centralizer of the canonical
//!   Frobenius image F_x^k(D(P_n)) — α = 0 and β_i < p^k ∀i;
//!
//! and, acting on polynomials instead of by commutators,
//!
//! * kernel of ∂_i^{[p^k]} on P_n — the k-th base-p digit of α_i is 0;
//! * joint kernel — digit k_i of α_i is 0 ∀i;
//! * kernel on P_n of all ∂_i^{[p^k]}, k ≥ 0 — α_i = 0;
//! * kernel of everything — the constants K.
//!
//! Two subtleties of characteristic p are worth spelling out, because
//! they dictate the exact shape of the statements above. First, the
//! divisibility pattern p^{k+1} | α_i describes the joint centralizer
//! of the whole divided-power tower up to level k, not the centralizer
//! of the single element ∂_i^{[p^k]}: once every exponent α_i is
//! divisible by p^l, the bracket with ∂_i^{[p^l]} collapses to the
//! single-term shift c·(α_i digit l)·x^{α−p^l e_i}∂^{[β]}, so climbing
//! the tower strips one digit per level; but the single bracket at
//! level k ≥ 1 also vanishes on extraneous elements (at p = 2 the
//! Euler operator x∂ commutes with ∂^{[2]}, since both candidate terms
//! of the bracket carry even coefficients). Second, for k ≥ 1 the full
//! centralizer of the Frobenius image is strictly larger than the
//! scalar part D_n ∩ ker ad(x_i^{p^k}): the Euler operators x_i∂_i
//! commute with every image monomial x^{pα}∂^{[pβ]} because
//! [x_i∂_i, x^α∂^{[β]}] = (α_i − β_i)x^α∂^{[β]} and the image's
//! exponents are all ≡ 0 mod p. Within the scalar operators the
//! pattern is exact. Both phenomena are pinned down by tests.
//!
//! [`SubalgebraSpec::member`] decides membership by these patterns;
//! [`SubalgebraSpec::member_direct`] recomputes the defining condition
//! (commutators, or the action on polynomials) so that tests can play
//! the two against each other. The infinite level quantifiers in the
//! tower specs truncate exactly: a bracket or action at level
//! p^l > α_i vanishes automatically, so levels up to ⌊log_p α_i⌋ + 1
//! decide the full intersection.

use crate::error::Error;
use crate::frobenius::FrobMap;
use crate::index::MultiIndex;
use crate::report::Report;
use crate::ring::DiffOp;
use crate::descent::Descent;
use crate::field::Prime;
use std::collections::BTreeMap;

/// A closed-form subalgebra of the operator ring, decided by exponent
/// patterns on normal monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubalgebraSpec {
    /// Joint centralizer of the tower ∂_i, ∂_i^{[p]}, …, ∂_i^{[p^k]}
    /// on one axis.
    DpCentralizer { axis: usize, level: u32 },
    /// Joint centralizer of the towers up to level k_i on every axis.
    DpCentralizerJoint { levels: Vec<u32> },
    /// Centralizer of ∂_i^{[p^k]} for every k ≥ 0.
    DpCentralizerTower { axis: usize },
    /// Centralizer of all divided powers: the scalar operators D_n.
    ScalarOperators,
    /// Centralizer of x_i^{p^k}.
    XPowerCentralizer { axis: usize, level: u32 },
    /// Joint centralizer of x_i^{p^{k_i}} for all axes.
    XPowerCentralizerJoint { levels: Vec<u32> },
    /// Centralizer of all the variables: the polynomials P_n.
    Polynomials,
    /// Scalar-operator part of the centralizer of the canonical
    /// Frobenius image F_x^k(D(P_n)).
    FrobeniusImageCentralizer { level: u32 },
    /// Kernel of ∂_i^{[p^k]} acting on P_n.
    DpPolyKernel { axis: usize, level: u32 },
    /// Joint kernel of ∂_i^{[p^{k_i}]} on P_n for all axes.
    DpPolyKernelJoint { levels: Vec<u32> },
    /// Kernel on P_n of ∂_i^{[p^k]} for every k ≥ 0.
    DpPolyKernelTower { axis: usize },
    /// Kernel of every divided power on P_n: the constants K.
    Constants,
}

/// k-th base-p digit of e.
fn digit(e: u64, k: u32, p: Prime) -> u64 {
    (e / p.pow(k)) % p.get()
}

/// Smallest L with e < p^L (so levels ≥ L act trivially on exponent e).
fn level_bound(e: u64, p: Prime) -> u32 {
    let mut l = 0;
    let mut cap = 1u64;
    while cap <= e {
        cap *= p.get();
        l += 1;
    }
    l
}

impl SubalgebraSpec {
    fn assert_shape(&self, a: &DiffOp) {
        let n = a.n();
        match self {
            SubalgebraSpec::DpCentralizer { axis, .. }
            | SubalgebraSpec::DpCentralizerTower { axis }
            | SubalgebraSpec::XPowerCentralizer { axis, .. }
            | SubalgebraSpec::DpPolyKernel { axis, .. }
            | SubalgebraSpec::DpPolyKernelTower { axis } => {
                assert!(*axis < n, "axis {} out of range for n = {}", axis + 1, n);
            }
            SubalgebraSpec::DpCentralizerJoint { levels }
            | SubalgebraSpec::XPowerCentralizerJoint { levels }
            | SubalgebraSpec::DpPolyKernelJoint { levels } => {
                assert!(
                    levels.len() == n,
                    "expected {} levels, got {}",
                    n,
                    levels.len()
                );
            }
            _ => {}
        }
    }

    /// Membership via the closed-form exponent pattern.
    pub fn member(&self, a: &DiffOp) -> bool {
        self.assert_shape(a);
        let p = a.p();
        a.terms().all(|((alpha, beta), _)| match self {
            SubalgebraSpec::DpCentralizer { axis, level } => {
                (alpha.get(*axis) as u64) % p.pow(level + 1) == 0
            }
            SubalgebraSpec::DpCentralizerJoint { levels } => levels
                .iter()
                .enumerate()
                .all(|(i, &k)| (alpha.get(i) as u64) % p.pow(k + 1) == 0),
            SubalgebraSpec::DpCentralizerTower { axis } => alpha.get(*axis) == 0,
            SubalgebraSpec::ScalarOperators => alpha.is_zero(),
            SubalgebraSpec::XPowerCentralizer { axis, level } => {
                (beta.get(*axis) as u64) < p.pow(*level)
            }
            SubalgebraSpec::XPowerCentralizerJoint { levels } => levels
                .iter()
                .enumerate()
                .all(|(i, &k)| (beta.get(i) as u64) < p.pow(k)),
            SubalgebraSpec::Polynomials => beta.is_zero(),
            SubalgebraSpec::FrobeniusImageCentralizer { level } => {
                alpha.is_zero()
                    && beta
                        .entries()
                        .iter()
                        .all(|&e| (e as u64) < p.pow(*level))
            }
            SubalgebraSpec::DpPolyKernel { axis, level } => {
                beta.is_zero() && digit(alpha.get(*axis) as u64, *level, p) == 0
            }
            SubalgebraSpec::DpPolyKernelJoint { levels } => {
                beta.is_zero()
                    && levels
                        .iter()
                        .enumerate()
                        .all(|(i, &k)| digit(alpha.get(i) as u64, k, p) == 0)
            }
            SubalgebraSpec::DpPolyKernelTower { axis } => {
                beta.is_zero() && alpha.get(*axis) == 0
            }
            SubalgebraSpec::Constants => alpha.is_zero() && beta.is_zero(),
        })
    }

    /// Membership recomputed from the defining condition: vanishing of
    /// the relevant commutators, or of the action on polynomials. The
    /// slow, authoritative counterpart of [`SubalgebraSpec::member`].
    pub fn member_direct(&self, a: &DiffOp) -> bool {
        self.assert_shape(a);
        let p = a.p();
        let n = a.n();
        // Bound beyond which brackets and actions vanish identically.
        let max_alpha = a
            .terms()
            .map(|((alpha, _), _)| {
                alpha.entries().iter().map(|&e| e as u64).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        let top = level_bound(max_alpha, p);
        let commutes_with_dp = |i: usize, k: u32| a.ad_dpk(i, k).is_zero();
        let kills_poly = |i: usize, k: u32| match a.to_poly() {
            Ok(f) => {
                let e = u32::try_from(p.pow(k)).expect("exponent overflow");
                DiffOp::dpow(p, n, i, e).apply(&f).is_zero()
            }
            Err(_) => false,
        };
        match self {
            SubalgebraSpec::DpCentralizer { axis, level } => {
                (0..=*level).all(|k| commutes_with_dp(*axis, k))
            }
            SubalgebraSpec::DpCentralizerJoint { levels } => levels
                .iter()
                .enumerate()
                .all(|(i, &top_k)| (0..=top_k).all(|k| commutes_with_dp(i, k))),
            SubalgebraSpec::DpCentralizerTower { axis } => {
                (0..=top).all(|k| commutes_with_dp(*axis, k))
            }
            SubalgebraSpec::ScalarOperators => {
                (0..n).all(|i| (0..=top).all(|k| commutes_with_dp(i, k)))
            }
            SubalgebraSpec::XPowerCentralizer { axis, level } => {
                let e = u32::try_from(p.pow(*level)).expect("exponent overflow");
                a.commutator(&DiffOp::xpow(p, n, *axis, e)).is_zero()
            }
            SubalgebraSpec::XPowerCentralizerJoint { levels } => {
                levels.iter().enumerate().all(|(i, &k)| {
                    let e = u32::try_from(p.pow(k)).expect("exponent overflow");
                    a.commutator(&DiffOp::xpow(p, n, i, e)).is_zero()
                })
            }
            SubalgebraSpec::Polynomials => {
                (0..n).all(|i| a.commutator(&DiffOp::var(p, n, i)).is_zero())
            }
            SubalgebraSpec::FrobeniusImageCentralizer { level } => {
                // Scalar operators are cut out by the full divided-power
                // tower; within them, centralizing the image reduces to
                // centralizing its generators x_j^{p^k} and ∂_j^{[p^{k+l}]}
                // (the ∂-brackets vanish on all of D_n), so running the
                // tower up through the image levels checks both at once.
                let e = u32::try_from(p.pow(*level)).expect("exponent overflow");
                (0..n).all(|j| a.commutator(&DiffOp::xpow(p, n, j, e)).is_zero())
                    && (0..n)
                        .all(|j| (0..=top + level).all(|k| commutes_with_dp(j, k)))
            }
            SubalgebraSpec::DpPolyKernel { axis, level } => kills_poly(*axis, *level),
            SubalgebraSpec::DpPolyKernelJoint { levels } => {
                levels.iter().enumerate().all(|(i, &k)| kills_poly(i, k))
            }
            SubalgebraSpec::DpPolyKernelTower { axis } => {
                (0..=top).all(|k| kills_poly(*axis, k))
            }
            SubalgebraSpec::Constants => {
                (0..n).all(|i| (0..=top).all(|k| kills_poly(i, k)))
            }
        }
    }

    /// All monomials of the closed form with |α| + |β| ≤ degree_bound,
    /// in lexicographic (α, β) order, with coefficient 1.
    pub fn basis_upto(&self, p: Prime, n: usize, degree_bound: u32) -> Vec<DiffOp> {
        let top = MultiIndex::new(vec![degree_bound; n]);
        let mut out = Vec::new();
        for alpha in MultiIndex::iter_le(&top) {
            if alpha.total() > degree_bound as u64 {
                continue;
            }
            for beta in MultiIndex::iter_le(&top) {
                if alpha.total() + beta.total() > degree_bound as u64 {
                    continue;
                }
                let m = DiffOp::monomial(p, n, &alpha, &beta, 1);
                if self.member(&m) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Human-readable description for reports and CLI output.
    pub fn describe(&self) -> String {
        match self {
            SubalgebraSpec::DpCentralizer { axis, level } => format!(
                "centralizer of the axis-{} divided powers up to level {}",
                axis + 1,
                level
            ),
            SubalgebraSpec::DpCentralizerJoint { levels } => format!(
                "joint centralizer of the divided powers up to levels {:?}",
                levels
            ),
            SubalgebraSpec::DpCentralizerTower { axis } => format!(
                "centralizer of every divided power on axis {}",
                axis + 1
            ),
            SubalgebraSpec::ScalarOperators => "scalar operators".into(),
            SubalgebraSpec::XPowerCentralizer { axis, level } => format!(
                "centralizer of x{}^(p^{})",
                axis + 1,
                level
            ),
            SubalgebraSpec::XPowerCentralizerJoint { levels } => format!(
                "joint centralizer of the variable powers at levels {:?}",
                levels
            ),
            SubalgebraSpec::Polynomials => "polynomials".into(),
            SubalgebraSpec::FrobeniusImageCentralizer { level } => format!(
                "scalar-operator centralizer of the level-{} Frobenius image",
                level
            ),
            SubalgebraSpec::DpPolyKernel { axis, level } => format!(
                "kernel of d{}[p^{}] on polynomials",
                axis + 1,
                level
            ),
            SubalgebraSpec::DpPolyKernelJoint { levels } => format!(
                "joint polynomial kernel at levels {:?}",
                levels
            ),
            SubalgebraSpec::DpPolyKernelTower { axis } => format!(
                "polynomial kernel of every divided power on axis {}",
                axis + 1
            ),
            SubalgebraSpec::Constants => "constants".into(),
        }
    }
}

/// The least α with a ∈ N_α = ⊕_{β ≤ α} P_n ∂^{[β]}: the componentwise
/// maximum of the ∂-exponents. Panics on zero, which lies in every N_α.
pub fn nil_degree(a: &DiffOp) -> MultiIndex {
    assert!(!a.is_zero(), "the nil degree of the zero element is undefined");
    a.max_beta()
}

/// Which side of the free-module decomposition to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// a = Σ G(c_{αβ}) · x^α ∂^{[β]}
    Left,
    /// a = Σ x^α ∂^{[β]} · G(c_{αβ})
    Right,
}

/// Coefficients of an element over the rank-p^{2n} basis
/// {x^α ∂^{[β]} : α, β ∈ [0, p)^n} of the operator ring as a module over
/// a level-1 Frobenius image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusDecomposition {
    p: Prime,
    n: usize,
    side: Side,
    coeffs: BTreeMap<(MultiIndex, MultiIndex), DiffOp>,
}

impl FrobeniusDecomposition {
    pub fn side(&self) -> Side {
        self.side
    }

    /// c_{αβ}; zero for basis positions that do not occur.
    pub fn coefficient(&self, alpha: &MultiIndex, beta: &MultiIndex) -> DiffOp {
        self.coeffs
            .get(&(alpha.clone(), beta.clone()))
            .cloned()
            .unwrap_or_else(|| DiffOp::zero(self.p, self.n))
    }

    /// The nonzero coefficients, keyed by basis position (α, β).
    pub fn nonzero(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &DiffOp)> + '_ {
        self.coeffs.iter()
    }

    /// Number of basis positions in the module basis, p^{2n}.
    pub fn basis_size(&self) -> u64 {
        self.p.pow(2 * self.n as u32)
    }

    /// Σ G(c_{αβ})·x^α∂^{[β]} (or the right-handed product), which must
    /// return the decomposed element.
    pub fn reconstruct(&self, map: &FrobMap) -> Result<DiffOp, Error> {
        let mut out = DiffOp::zero(self.p, self.n);
        for ((alpha, beta), c) in &self.coeffs {
            let image = map.apply(c)?;
            let basis_el = DiffOp::monomial(self.p, self.n, alpha, beta, 1);
            let term = match self.side {
                Side::Left => image.mul(&basis_el),
                Side::Right => basis_el.mul(&image),
            };
            out = &out + &term;
        }
        Ok(out)
    }
}

/// Total weight |⌊ν/p⌋| of a ∂-exponent, the grading that makes the
/// decomposition triangular.
fn weight(nu: &MultiIndex, p: Prime) -> u64 {
    nu.entries().iter().map(|&e| e as u64 / p.get()).sum()
}

/// (max weight, number of terms at it): strictly decreases every round.
fn progress_measure(a: &DiffOp, p: Prime) -> Option<(u64, usize)> {
    let mut best: Option<(u64, usize)> = None;
    for ((_, nu), _) in a.terms() {
        let w = weight(nu, p);
        best = Some(match best {
            None => (w, 1),
            Some((bw, _)) if w > bw => (w, 1),
            Some((bw, c)) if w == bw => (bw, c + 1),
            Some(keep) => keep,
        });
    }
    best
}

/// Decompose a over the rank-p^{2n} basis of the operator ring as a
/// (left or right) module over the image of a level-1 Frobenius map:
/// unique coefficients c_{αβ} with a = Σ G(c_{αβ})·x^α∂^{[β]}
/// (respectively Σ x^α∂^{[β]}·G(c_{αβ})), with α, β ∈ [0, p)^n.
///
/// The algorithm peels the term x^μ∂^{[ν]} of highest weight |⌊ν/p⌋|,
/// splits its exponents into base-p digit and quotient, μ = ᾱ + pγ,
/// ν = β̄ + pδ, and subtracts κ·G(x^γ∂^{[δ]})·x^ᾱ∂^{[β̄]}. The product
/// reproduces κ·x^μ∂^{[ν]} exactly (the relevant binomials are 1 by
/// Lucas) and otherwise contributes strictly smaller weight, because a
/// base-p carry would force the surviving binomial coefficients to
/// vanish. Termination is monitored, so a map that fails to be
/// triangular (a raw image table that is not a Frobenius family) is
/// reported instead of looping.
pub fn decompose_over_frobenius_image(
    map: &FrobMap,
    a: &DiffOp,
    side: Side,
) -> Result<FrobeniusDecomposition, Error> {
    if map.s() != 1 {
        return Err(Error::Invalid(
            "the free-module decomposition requires a level-1 Frobenius map".into(),
        ));
    }
    if a.p() != map.p() || a.n() != map.n() {
        return Err(Error::Invalid(
            "element shape differs from the map shape".into(),
        ));
    }
    let p = map.p();
    let n = map.n();
    let mut rest = a.clone();
    let mut coeffs: BTreeMap<(MultiIndex, MultiIndex), DiffOp> = BTreeMap::new();
    let mut guard = progress_measure(&rest, p);
    while !rest.is_zero() {
        let ((mu, nu), kappa) = rest
            .terms()
            .max_by(|((mu1, nu1), _), ((mu2, nu2), _)| {
                weight(nu1, p)
                    .cmp(&weight(nu2, p))
                    .then(nu1.cmp(nu2))
                    .then(mu1.cmp(mu2))
            })
            .map(|(key, c)| (key.clone(), c))
            .expect("nonzero element has terms");
        let (gamma, alpha_bar) = mu.div_rem_pow(p, 1);
        let (delta, beta_bar) = nu.div_rem_pow(p, 1);
        let inner = DiffOp::monomial(p, n, &gamma, &delta, kappa.value());
        let image = map.apply(&inner)?;
        let basis_el = DiffOp::monomial(p, n, &alpha_bar, &beta_bar, 1);
        let product = match side {
            Side::Left => image.mul(&basis_el),
            Side::Right => basis_el.mul(&image),
        };
        rest = &rest - &product;
        let slot = coeffs
            .entry((alpha_bar, beta_bar))
            .or_insert_with(|| DiffOp::zero(p, n));
        *slot = &*slot + &inner;
        let next = progress_measure(&rest, p);
        let decreased = match (guard, next) {
            (_, None) => true,
            (Some(g), Some(x)) => x < g,
            (None, Some(_)) => false,
        };
        if !decreased {
            return Err(Error::Invalid(
                "the supplied map does not induce a triangular decomposition".into(),
            ));
        }
        guard = next;
    }
    coeffs.retain(|_, c| !c.is_zero());
    Ok(FrobeniusDecomposition {
        p,
        n,
        side,
        coeffs,
    })
}

/// Check a candidate generator table against the uniqueness theorem for
/// iterative descents of the shift derivations −ad(x_i): the divided
/// powers are the only one, so the check passes exactly when every
/// generator equals ∂_i^{[p^k]}. Violations are reported in the order
/// the uniqueness proof excludes them: nonzero p-th power first, then
/// cross-axis shifts, then the shift identity on the own axis, then
/// commutation, and finally any residual difference from the divided
/// powers.
pub fn rigidity_check(candidate: &Descent) -> Report {
    let mut report = Report::new();
    let p = candidate.p();
    let n = candidate.n();
    report.check(candidate.level() == 0, || {
        format!(
            "uniqueness concerns the level-0 shift derivations, got level {}",
            candidate.level()
        )
    });
    if candidate.level() != 0 {
        return report;
    }
    let delta = candidate.derivation();
    for (i, column) in candidate.gens().iter().enumerate() {
        for (k, g) in column.iter().enumerate() {
            let pk = u32::try_from(p.pow(k as u32)).expect("exponent overflow");
            report.check(g.pow(p.get()).is_zero(), || {
                format!("the p-th power of y_{}[{}] is nonzero", i + 1, pk)
            });
            for j in 0..n {
                if j != i {
                    report.check(delta.apply(j, g).is_zero(), || {
                        format!(
                            "the shift along axis {} does not annihilate y_{}[{}]",
                            j + 1,
                            i + 1,
                            pk
                        )
                    });
                }
            }
            let want = candidate.expand(&MultiIndex::axis(n, i, pk - 1));
            report.check(delta.apply(i, g) == want, || {
                format!(
                    "the shift along axis {} does not lower y_{}[{}] to the previous member",
                    i + 1,
                    i + 1,
                    pk
                )
            });
        }
    }
    let flat: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..candidate.gens()[i].len()).map(move |k| (i, k)))
        .collect();
    for (pos, &(i, k)) in flat.iter().enumerate() {
        for &(j, l) in &flat[pos + 1..] {
            report.check(
                candidate
                    .gen(i, k)
                    .commutator(candidate.gen(j, l))
                    .is_zero(),
                || {
                    format!(
                        "generators y_{}[p^{}] and y_{}[p^{}] do not commute",
                        i + 1,
                        k,
                        j + 1,
                        l
                    )
                },
            );
        }
    }
    // The equality comparison is the theorem's conclusion, so it only
    // means something when the hypotheses hold; skip it for candidates
    // the axioms already rejected.
    if report.passed() {
        for (i, column) in candidate.gens().iter().enumerate() {
            for (k, g) in column.iter().enumerate() {
                let pk = u32::try_from(p.pow(k as u32)).expect("exponent overflow");
                report.check(*g == DiffOp::dpow(p, n, i, pk), || {
                    format!(
                        "y_{}[{}] satisfies the checked axioms but differs from d{}[{}]",
                        i + 1,
                        pk,
                        i + 1,
                        pk
                    )
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::FrobParams;
    use crate::sample;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn membership_examples() {
        let p = pr(2);
        // Joint variable centralizer = polynomials.
        let f = &DiffOp::xpow(p, 2, 0, 2) + &DiffOp::var(p, 2, 0).mul(&DiffOp::var(p, 2, 1));
        assert!(SubalgebraSpec::Polynomials.member(&f));
        let xd = DiffOp::var(p, 1, 0).mul(&DiffOp::dpow(p, 1, 0, 1));
        assert!(!SubalgebraSpec::Polynomials.member(&xd));
        // Centralizer of the level-1 Frobenius image at p = 2, n = 1.
        let spec = SubalgebraSpec::FrobeniusImageCentralizer { level: 1 };
        assert!(spec.member(&DiffOp::dpow(p, 1, 0, 1)));
        assert!(!spec.member(&DiffOp::dpow(p, 1, 0, 2)));
        // Centralizer of x^{p}: β < p, cross-checked by the bracket.
        let spec = SubalgebraSpec::XPowerCentralizer { axis: 0, level: 1 };
        assert!(spec.member(&DiffOp::dpow(p, 1, 0, 1)));
        assert!(!spec.member(&DiffOp::dpow(p, 1, 0, 2)));
        let bracket = DiffOp::dpow(p, 1, 0, 2).commutator(&DiffOp::xpow(p, 1, 0, 2));
        assert_eq!(bracket, DiffOp::one(p, 1));
    }

    #[test]
    fn membership_matches_direct_computation() {
        let p = pr(2);
        let specs: Vec<SubalgebraSpec> = vec![
            SubalgebraSpec::DpCentralizer { axis: 0, level: 1 },
            SubalgebraSpec::DpCentralizerJoint { levels: vec![0, 1] },
            SubalgebraSpec::DpCentralizerTower { axis: 1 },
            SubalgebraSpec::ScalarOperators,
            SubalgebraSpec::XPowerCentralizer { axis: 0, level: 1 },
            SubalgebraSpec::XPowerCentralizerJoint { levels: vec![1, 2] },
            SubalgebraSpec::Polynomials,
            SubalgebraSpec::FrobeniusImageCentralizer { level: 1 },
            SubalgebraSpec::DpPolyKernel { axis: 0, level: 1 },
            SubalgebraSpec::DpPolyKernelJoint { levels: vec![1, 0] },
            SubalgebraSpec::DpPolyKernelTower { axis: 0 },
            SubalgebraSpec::Constants,
        ];
        let top = mi(&[4, 4]);
        for spec in &specs {
            for alpha in MultiIndex::iter_le(&top) {
                for beta in MultiIndex::iter_le(&top) {
                    let m = DiffOp::monomial(p, 2, &alpha, &beta, 1);
                    assert_eq!(
                        spec.member(&m),
                        spec.member_direct(&m),
                        "{} at ({}, {})",
                        spec.describe(),
                        alpha,
                        beta
                    );
                }
            }
        }
        // Also on random multi-term elements for the commutator-based specs.
        let mut rng = sample::rng_from_seed(17);
        for _ in 0..100 {
            let a = sample::random_diffop(p, 2, 5, 5, 3, &mut rng);
            for spec in &specs[..8] {
                assert_eq!(spec.member(&a), spec.member_direct(&a), "{}", spec.describe());
            }
        }
    }

    #[test]
    fn single_level_brackets_do_not_cut_out_the_closed_forms() {
        // At p = 2 the Euler operator x∂ commutes with ∂^{[2]} (both
        // candidate bracket terms carry even coefficients), so the
        // single level-1 bracket does not detect the odd exponent; the
        // level-0 bracket does. This is why the divisibility patterns
        // describe the joint centralizers of the towers.
        let p = pr(2);
        let euler = DiffOp::var(p, 1, 0).mul(&DiffOp::dpow(p, 1, 0, 1));
        assert!(euler.ad_dpk(0, 1).is_zero());
        assert!(!euler.ad_dpk(0, 0).is_zero());
        assert!(!SubalgebraSpec::DpCentralizer { axis: 0, level: 1 }.member(&euler));
        assert!(!SubalgebraSpec::DpCentralizer { axis: 0, level: 1 }.member_direct(&euler));
        // The same operator centralizes the whole level-1 Frobenius
        // image ([x∂, x^α∂^{[β]}] = (α−β)x^α∂^{[β]} and the image's
        // exponents are all even), without being a scalar operator: the
        // full image centralizer is strictly larger than its
        // scalar-operator part, which is what the pattern describes.
        assert!(euler.commutator(&DiffOp::xpow(p, 1, 0, 2)).is_zero());
        for k in 1..=4 {
            assert!(euler.ad_dpk(0, k).is_zero(), "k = {k}");
        }
        let spec = SubalgebraSpec::FrobeniusImageCentralizer { level: 1 };
        assert!(!spec.member(&euler));
        assert!(!spec.member_direct(&euler));
    }

    #[test]
    fn unconditional_shift_identity() {
        // [∂_i^{[j]}, x_i^{p^k}] = ∂_i^{[j - p^k]} for every j, including
        // j < p^k where the right side is zero.
        for p in [pr(2), pr(3)] {
            for k in 0..3u32 {
                let e = u32::try_from(p.pow(k)).unwrap();
                for j in 0..u32::try_from(p.pow(3)).unwrap() {
                    let lhs = DiffOp::dpow(p, 1, 0, j).commutator(&DiffOp::xpow(p, 1, 0, e));
                    let rhs = if j >= e {
                        DiffOp::dpow(p, 1, 0, j - e)
                    } else {
                        DiffOp::zero(p, 1)
                    };
                    assert_eq!(lhs, rhs, "p={p}, j={j}, k={k}");
                }
            }
        }
    }

    #[test]
    fn basis_examples() {
        let p = pr(2);
        // Polynomials up to degree 1 in one variable: {1, x}.
        let b = SubalgebraSpec::Polynomials.basis_upto(p, 1, 1);
        assert_eq!(b, vec![DiffOp::one(p, 1), DiffOp::var(p, 1, 0)]);
        // Frobenius-image centralizer at level 1: {1, ∂}.
        let b = SubalgebraSpec::FrobeniusImageCentralizer { level: 1 }.basis_upto(p, 1, 1);
        assert_eq!(b, vec![DiffOp::one(p, 1), DiffOp::dpow(p, 1, 0, 1)]);
        // Polynomial kernel of ∂ at p = 2 up to degree 2: {1, x^2}.
        let b = SubalgebraSpec::DpPolyKernel { axis: 0, level: 0 }.basis_upto(p, 1, 2);
        assert_eq!(b, vec![DiffOp::one(p, 1), DiffOp::xpow(p, 1, 0, 2)]);
        // Every basis member passes membership (both routes).
        for spec in [
            SubalgebraSpec::DpCentralizer { axis: 0, level: 0 },
            SubalgebraSpec::ScalarOperators,
            SubalgebraSpec::Constants,
        ] {
            for m in spec.basis_upto(p, 1, 4) {
                assert!(spec.member(&m) && spec.member_direct(&m));
            }
        }
    }

    #[test]
    fn nil_degree_examples() {
        let p = pr(3);
        assert_eq!(nil_degree(&DiffOp::xpow(p, 1, 0, 5)), mi(&[0]));
        let a = DiffOp::monomial(p, 2, &mi(&[1, 0]), &mi(&[2, 1]), 1);
        assert_eq!(nil_degree(&a), mi(&[2, 1]));
        let b = &DiffOp::dpow(p, 1, 0, 3) + &DiffOp::dpow(p, 1, 0, 1);
        assert_eq!(nil_degree(&b), mi(&[3]));
    }

    #[test]
    #[should_panic(expected = "zero element")]
    fn nil_degree_of_zero_panics() {
        let _ = nil_degree(&DiffOp::zero(pr(2), 1));
    }

    #[test]
    fn decompose_golden_example() {
        // Over the canonical level-1 image at p = 2, n = 1:
        // x^3 ∂^{[5]} = F_x(x∂^{[2]}) · x∂ exactly.
        let p = pr(2);
        let map = FrobMap::canonical(p, 1, 1);
        let a = DiffOp::monomial(p, 1, &mi(&[3]), &mi(&[5]), 1);
        let dec = decompose_over_frobenius_image(&map, &a, Side::Left).unwrap();
        let want = DiffOp::monomial(p, 1, &mi(&[1]), &mi(&[2]), 1);
        assert_eq!(dec.coefficient(&mi(&[1]), &mi(&[1])), want);
        assert_eq!(dec.nonzero().count(), 1);
        assert_eq!(dec.reconstruct(&map).unwrap(), a);
        assert_eq!(dec.basis_size(), 4);
    }

    #[test]
    fn decompose_identity_and_basis_elements() {
        let p = pr(2);
        let map = FrobMap::canonical(p, 1, 1);
        let one = DiffOp::one(p, 1);
        let dec = decompose_over_frobenius_image(&map, &one, Side::Left).unwrap();
        assert_eq!(dec.coefficient(&mi(&[0]), &mi(&[0])), one);
        assert_eq!(dec.nonzero().count(), 1);
        // Module basis elements decompose as themselves with coefficient 1.
        for alpha in MultiIndex::iter_le(&mi(&[1])) {
            for beta in MultiIndex::iter_le(&mi(&[1])) {
                let b = DiffOp::monomial(p, 1, &alpha, &beta, 1);
                let dec = decompose_over_frobenius_image(&map, &b, Side::Left).unwrap();
                assert_eq!(dec.coefficient(&alpha, &beta), DiffOp::one(p, 1));
                assert_eq!(dec.nonzero().count(), 1);
            }
        }
    }

    #[test]
    fn decompose_reconstructs_random_elements_on_both_sides() {
        let mut rng = sample::rng_from_seed(53);
        for p in [pr(2), pr(3)] {
            let map = FrobMap::canonical(p, 2, 1);
            for _ in 0..15 {
                let a = sample::random_diffop(p, 2, 6, 6, 4, &mut rng);
                for side in [Side::Left, Side::Right] {
                    let dec = decompose_over_frobenius_image(&map, &a, side).unwrap();
                    assert_eq!(dec.reconstruct(&map).unwrap(), a, "p={p}, side {side:?}");
                    for ((alpha, beta), _) in dec.nonzero() {
                        assert!(alpha.entries().iter().all(|&e| (e as u64) < p.get()));
                        assert!(beta.entries().iter().all(|&e| (e as u64) < p.get()));
                    }
                }
            }
        }
    }

    #[test]
    fn decompose_over_a_deformed_image() {
        // The module structure exists for every member of the level-1
        // family, not only the canonical one.
        let p = pr(2);
        let u0 = DiffOp::dpow(p, 1, 0, 1);
        let map = FrobMap::build(FrobParams::new(p, 1, 1, vec![vec![u0]]).unwrap()).unwrap();
        let mut rng = sample::rng_from_seed(59);
        for _ in 0..10 {
            let a = sample::random_diffop(p, 1, 5, 7, 4, &mut rng);
            for side in [Side::Left, Side::Right] {
                let dec = decompose_over_frobenius_image(&map, &a, side).unwrap();
                assert_eq!(dec.reconstruct(&map).unwrap(), a);
            }
        }
    }

    #[test]
    fn decompose_requires_level_one() {
        let p = pr(2);
        let map = FrobMap::canonical(p, 1, 2);
        let a = DiffOp::var(p, 1, 0);
        assert!(decompose_over_frobenius_image(&map, &a, Side::Left).is_err());
    }

    #[test]
    fn rigidity_accepts_exactly_the_divided_powers() {
        let p = pr(2);
        let canonical = Descent::canonical(p, 2, 0, &[2, 1]);
        assert!(rigidity_check(&canonical).passed());

        // ∂ + x has nonzero square.
        let bad = Descent::new(
            p,
            1,
            0,
            vec![vec![&DiffOp::dpow(p, 1, 0, 1) + &DiffOp::var(p, 1, 0)]],
        )
        .unwrap();
        let verdict = rigidity_check(&bad);
        assert!(!verdict.passed());
        assert!(
            verdict.violations()[0].contains("p-th power"),
            "{verdict}"
        );

        // ∂^{[2]} + x^2 at level 1 of the table: same failure mode.
        let bad = Descent::new(
            p,
            1,
            0,
            vec![vec![
                DiffOp::dpow(p, 1, 0, 1),
                &DiffOp::dpow(p, 1, 0, 2) + &DiffOp::xpow(p, 1, 0, 2),
            ]],
        )
        .unwrap();
        let verdict = rigidity_check(&bad);
        assert!(!verdict.passed());
        assert!(
            verdict.violations()[0].contains("p-th power"),
            "{verdict}"
        );

        // ∂ + ∂^{[2]} still has zero square but breaks the lowering
        // identity (its shift is 1 + ∂, not 1).
        let bad = Descent::new(
            p,
            1,
            0,
            vec![vec![&DiffOp::dpow(p, 1, 0, 1) + &DiffOp::dpow(p, 1, 0, 2)]],
        )
        .unwrap();
        let verdict = rigidity_check(&bad);
        assert!(!verdict.passed());
        assert!(
            verdict.violations()[0].contains("does not lower"),
            "{verdict}"
        );

        // Wrong level is flagged up front.
        let level1 = Descent::canonical(p, 1, 1, &[1]);
        assert!(!rigidity_check(&level1).passed());
    }
}
