//! The parameterized family G_u of Frobenius endomorphisms.
//!
//! The canonical Frobenius F_x^s sends x^α ∂^{[β]} to x^{p^s α} ∂^{[p^s β]};
//! it restricts to f ↦ f^{p^s} on polynomials and preserves the scalar
//! operators D_n. Its deformations are classified by matrices
//! u = (u_{ik}), i ≤ n, k ≥ 0, with entries in the punctured-cube span
//! {∂^{[β]} : 0 ≠ β, β_j < p^s for all j}: each u determines generator
//! images
//!
//!   G(∂_i^{[p^k]}) = u_{ik} + ∫_i^{*p^s}( y_i^{[p^k - 1]} ),
//!
//! where ∫_i^* is the dual integration ∂^{[β]} ↦ ∂^{[β + e_i]} and
//! y_i^{[p^k - 1]} is the digit product of the earlier images. Together
//! with G(x_i) = x_i^{p^s} this extends to an injective endomorphism
//! G_u of the whole operator ring, and u ↦ G_u is a bijection onto the
//! endomorphisms that fix polynomials to their p^s powers and map D_n
//! into itself. The inverse reads the parameters back off the images:
//! u_{ik} = G(∂_i^{[p^k]}) − ∫_i^{*p^s}(G(∂_i^{[p^k - 1]})).
//!
//! [`FrobMap::verify_homomorphism`] checks the defining relations of the
//! ring on the generator images plus sampled multiplicativity;
//! [`FrobMap::verify_frobenius_axioms`] checks the structural axioms
//! (polynomials raised to p^s powers; the designated polynomial
//! subalgebra recoverable as the joint centralizer of the variables;
//! iterates of the designated elements y_i = ∂_i staying inside D_n and
//! centralizing the other variables). The two notions differ: every
//! admissible u yields a homomorphism, but cross-axis parameter entries
//! break the iterate-centralizing axiom for n ≥ 2.

use crate::descent::Descent;
use crate::error::Error;
use crate::field::{base_p_digits, inv_digit_factorial, Prime};
use crate::index::MultiIndex;
use crate::report::Report;
use crate::ring::DiffOp;
use crate::sample;
use std::collections::HashMap;
use std::sync::Mutex;

/// The canonical Frobenius F_x^s: x^α ∂^{[β]} ↦ x^{p^s α} ∂^{[p^s β]}.
/// At s = 0 this is the identity.
pub fn canonical_frobenius(a: &DiffOp, s: u32) -> DiffOp {
    let scale = a.p().pow(s);
    let mut out = DiffOp::zero(a.p(), a.n());
    for ((alpha, beta), c) in a.terms() {
        let term = DiffOp::monomial(
            a.p(),
            a.n(),
            &alpha.scaled(scale),
            &beta.scaled(scale),
            c.value(),
        );
        out = &out + &term;
    }
    out
}

/// The i-th dual integration ∂^{[β]} ↦ ∂^{[β + times·e_i]}, the right
/// inverse of the shift δ_i: defined on scalar operators only.
pub fn dual_integration(a: &DiffOp, i: usize, times: u32) -> Result<DiffOp, Error> {
    if !a.is_scalar_operator() {
        return Err(Error::NotScalarOperator);
    }
    let mut out = DiffOp::zero(a.p(), a.n());
    for ((_, beta), c) in a.terms() {
        let raised = beta.with(i, beta.get(i).checked_add(times).expect("exponent overflow"));
        let term = DiffOp::monomial(a.p(), a.n(), &MultiIndex::zero(a.n()), &raised, c.value());
        out = &out + &term;
    }
    Ok(out)
}

/// A parameter matrix u = (u_{ik}) for the family G_u at level s ≥ 1:
/// each entry lies in the span of {∂^{[β]} : 0 ≠ β, β_j < p^s ∀j}.
/// Entries beyond the stored depth are implicitly zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobParams {
    p: Prime,
    n: usize,
    s: u32,
    entries: Vec<Vec<DiffOp>>,
}

impl FrobParams {
    pub fn new(p: Prime, n: usize, s: u32, entries: Vec<Vec<DiffOp>>) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Invalid("at least one variable is required".into()));
        }
        if s == 0 {
            return Err(Error::Invalid(
                "the Frobenius level s must be at least 1".into(),
            ));
        }
        if entries.len() != n {
            return Err(Error::Invalid(format!(
                "expected one parameter column per axis ({} axes, got {})",
                n,
                entries.len()
            )));
        }
        let depth = entries[0].len();
        if entries.iter().any(|c| c.len() != depth) {
            return Err(Error::Invalid("ragged parameter matrix".into()));
        }
        let side = p.pow(s);
        for (i, column) in entries.iter().enumerate() {
            for (k, u) in column.iter().enumerate() {
                if u.p() != p || u.n() != n {
                    return Err(Error::BadParameter {
                        i,
                        k,
                        reason: "parameter shape differs from the family shape".into(),
                    });
                }
                if !u.is_scalar_operator() {
                    return Err(Error::BadParameter {
                        i,
                        k,
                        reason: "parameter has a nonzero x-part".into(),
                    });
                }
                for ((_, beta), _) in u.terms() {
                    if beta.is_zero() {
                        return Err(Error::BadParameter {
                            i,
                            k,
                            reason: "parameter has a constant term".into(),
                        });
                    }
                    if beta.entries().iter().any(|&e| (e as u64) >= side) {
                        return Err(Error::BadParameter {
                            i,
                            k,
                            reason: format!("a term leaves the cube of side p^s = {}", side),
                        });
                    }
                }
            }
        }
        Ok(FrobParams { p, n, s, entries })
    }

    /// The zero matrix with `depth` stored levels: parameters of F_x^s.
    pub fn zero(p: Prime, n: usize, s: u32, depth: u32) -> Self {
        let entries = vec![vec![DiffOp::zero(p, n); depth as usize]; n];
        FrobParams::new(p, n, s, entries).expect("the zero matrix is admissible")
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Number of explicitly stored levels per axis.
    pub fn depth(&self) -> u32 {
        self.entries[0].len() as u32
    }

    /// u_{ik}, with the implicit-zero convention beyond the stored depth.
    pub fn entry(&self, i: usize, k: u32) -> DiffOp {
        self.entries[i]
            .get(k as usize)
            .cloned()
            .unwrap_or_else(|| DiffOp::zero(self.p, self.n))
    }

    pub fn entries(&self) -> &[Vec<DiffOp>] {
        &self.entries
    }
}

/// A Frobenius-type endomorphism given by its generator images
/// G(∂_i^{[p^k]}) together with G(x_i) = x_i^{p^s}.
///
/// Maps built from a parameter matrix ([`FrobMap::build`]) extend their
/// image table lazily to whatever level an application requires; maps
/// wrapped around a raw image table ([`FrobMap::from_images`]) cannot
/// extend, and applications beyond the stored depth fail.
#[derive(Debug)]
pub struct FrobMap {
    p: Prime,
    n: usize,
    s: u32,
    params: Option<FrobParams>,
    images: Mutex<Vec<Vec<DiffOp>>>,
    memo: Mutex<HashMap<(usize, u32), DiffOp>>,
}

impl Clone for FrobMap {
    fn clone(&self) -> Self {
        FrobMap {
            p: self.p,
            n: self.n,
            s: self.s,
            params: self.params.clone(),
            images: Mutex::new(self.images.lock().unwrap().clone()),
            memo: Mutex::new(self.memo.lock().unwrap().clone()),
        }
    }
}

impl FrobMap {
    /// G_u from an admissible parameter matrix (the family recursion).
    pub fn build(params: FrobParams) -> Result<FrobMap, Error> {
        let map = FrobMap {
            p: params.p(),
            n: params.n(),
            s: params.s(),
            images: Mutex::new(vec![Vec::new(); params.n()]),
            memo: Mutex::new(HashMap::new()),
            params: Some(params.clone()),
        };
        map.ensure_depth(params.depth().max(1))?;
        Ok(map)
    }

    /// F_x^s = G_0.
    pub fn canonical(p: Prime, n: usize, s: u32) -> FrobMap {
        FrobMap::build(FrobParams::zero(p, n, s, 1)).expect("the zero matrix builds")
    }

    /// Wrap a raw image table G(∂_i^{[p^k]}) = images[i][k]. Only the
    /// shape is validated — the verifiers exist precisely to interrogate
    /// tables like this, including non-homomorphisms.
    pub fn from_images(
        p: Prime,
        n: usize,
        s: u32,
        images: Vec<Vec<DiffOp>>,
    ) -> Result<FrobMap, Error> {
        if n == 0 || s == 0 {
            return Err(Error::Invalid(
                "need at least one variable and level s >= 1".into(),
            ));
        }
        if images.len() != n {
            return Err(Error::Invalid(format!(
                "expected one image column per axis ({} axes, got {})",
                n,
                images.len()
            )));
        }
        let depth = images[0].len();
        if depth == 0 || images.iter().any(|c| c.len() != depth) {
            return Err(Error::Invalid(
                "image columns must be nonempty and of equal length".into(),
            ));
        }
        for column in &images {
            for y in column {
                if y.p() != p || y.n() != n {
                    return Err(Error::Invalid(
                        "image shape differs from the family shape".into(),
                    ));
                }
            }
        }
        Ok(FrobMap {
            p,
            n,
            s,
            params: None,
            images: Mutex::new(images),
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn params(&self) -> Option<&FrobParams> {
        self.params.as_ref()
    }

    /// Currently materialized generator depth.
    pub fn depth(&self) -> u32 {
        self.images.lock().unwrap()[0].len() as u32
    }

    /// Extend the image table to `depth` levels per axis via
    /// G(∂_i^{[p^k]}) = u_{ik} + ∫_i^{*p^s}(y_i^{[p^k - 1]}).
    fn ensure_depth(&self, depth: u32) -> Result<(), Error> {
        loop {
            let current = self.depth();
            if current >= depth {
                return Ok(());
            }
            let params = self.params.as_ref().ok_or_else(|| {
                Error::Invalid(format!(
                    "generator images stop at level {} and the map carries no \
                     parameter matrix to extend them",
                    current
                ))
            })?;
            let k = current;
            let prev_top = u32::try_from(self.p.pow(k) - 1).expect("exponent overflow");
            let shift = u32::try_from(self.p.pow(self.s)).expect("exponent overflow");
            let mut next = Vec::with_capacity(self.n);
            for i in 0..self.n {
                let body = self.axis_power_at(i, prev_top)?;
                let lifted = dual_integration(&body, i, shift)?;
                next.push(&params.entry(i, k) + &lifted);
            }
            let mut images = self.images.lock().unwrap();
            if images[0].len() as u32 == k {
                for (i, y) in next.into_iter().enumerate() {
                    images[i].push(y);
                }
            }
        }
    }

    /// G(∂_i^{[e]}) as the digit product of generator images, using only
    /// already-materialized levels.
    fn axis_power_at(&self, i: usize, e: u32) -> Result<DiffOp, Error> {
        if e == 0 {
            return Ok(DiffOp::one(self.p, self.n));
        }
        if let Some(hit) = self.memo.lock().unwrap().get(&(i, e)) {
            return Ok(hit.clone());
        }
        let digits = base_p_digits(e as u64, self.p);
        let images = self.images.lock().unwrap();
        if images[i].len() < digits.len() {
            return Err(Error::Invalid(format!(
                "generator images stop at level {} but index {} needs level {}",
                images[i].len(),
                e,
                digits.len()
            )));
        }
        let mut acc = DiffOp::one(self.p, self.n);
        for (k, &digit) in digits.iter().enumerate() {
            if digit == 0 {
                continue;
            }
            let factor = images[i][k]
                .pow(digit)
                .scalar_mul(inv_digit_factorial(digit, self.p));
            acc = acc.mul(&factor);
        }
        drop(images);
        self.memo.lock().unwrap().insert((i, e), acc.clone());
        Ok(acc)
    }

    fn axis_power(&self, i: usize, e: u32) -> Result<DiffOp, Error> {
        if e > 0 {
            self.ensure_depth(base_p_digits(e as u64, self.p).len() as u32)?;
        }
        self.axis_power_at(i, e)
    }

    /// G(∂_i^{[p^k]}), extending the table if the map permits.
    pub fn generator_image(&self, i: usize, k: u32) -> Result<DiffOp, Error> {
        self.ensure_depth(k + 1)?;
        Ok(self.images.lock().unwrap()[i][k as usize].clone())
    }

    /// The image table up to `depth` levels per axis.
    pub fn image_table(&self, depth: u32) -> Result<Vec<Vec<DiffOp>>, Error> {
        self.ensure_depth(depth)?;
        let images = self.images.lock().unwrap();
        Ok(images
            .iter()
            .map(|c| c[..depth as usize].to_vec())
            .collect())
    }

    /// Apply G term by term: x^α ∂^{[β]} ↦ x^{p^s α} Π_i G(∂_i^{[β_i]}).
    pub fn apply(&self, a: &DiffOp) -> Result<DiffOp, Error> {
        if a.p() != self.p || a.n() != self.n {
            return Err(Error::Invalid(
                "element shape differs from the family shape".into(),
            ));
        }
        let scale = self.p.pow(self.s);
        let mut out = DiffOp::zero(self.p, self.n);
        for ((alpha, beta), c) in a.terms() {
            let mut term = DiffOp::monomial(
                self.p,
                self.n,
                &alpha.scaled(scale),
                &MultiIndex::zero(self.n),
                c.value(),
            );
            for i in 0..self.n {
                if beta.get(i) > 0 {
                    term = term.mul(&self.axis_power(i, beta.get(i))?);
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// The generator images as a descent candidate for the level-s
    /// shift derivations: members are indexed by β with y^{[β]} = G(∂^{[β]}).
    pub fn descent(&self, depth: u32) -> Result<Descent, Error> {
        Descent::new(self.p, self.n, self.s, self.image_table(depth)?)
    }

    /// Read the parameter matrix back off the images (inverse of build).
    pub fn recover(&self, depth: u32) -> Result<FrobParams, Error> {
        recover_u(self.p, self.n, self.s, &self.image_table(depth)?)
    }

    /// Check the defining relations of the operator ring on the
    /// generator images up to `depth`, plus multiplicativity on sampled
    /// pairs. An empty report certifies a homomorphism on the span
    /// exercised.
    pub fn verify_homomorphism(&self, depth: u32, samples: usize, seed: u64) -> Report {
        let mut report = Report::new();
        let d = match self.usable_depth(depth, &mut report) {
            Some(d) => d,
            None => return report,
        };
        let p = self.p;
        let images = self.image_table(d).expect("depth just ensured");
        let shift = u32::try_from(p.pow(self.s)).expect("exponent overflow");
        let x_images: Vec<DiffOp> = (0..self.n)
            .map(|j| DiffOp::xpow(p, self.n, j, shift))
            .collect();

        for i in 0..self.n {
            for j in i + 1..self.n {
                report.check(x_images[i].commutator(&x_images[j]).is_zero(), || {
                    format!("images of x{} and x{} do not commute", i + 1, j + 1)
                });
            }
        }
        let flat: Vec<(usize, u32)> = (0..self.n)
            .flat_map(|i| (0..d).map(move |k| (i, k)))
            .collect();
        for (pos, &(i, k)) in flat.iter().enumerate() {
            let gi = &images[i][k as usize];
            report.check(gi.pow(p.get()).is_zero(), || {
                format!("image of d{}[{}] has nonzero p-th power", i + 1, p.pow(k))
            });
            for &(j, l) in &flat[pos + 1..] {
                report.check(gi.commutator(&images[j][l as usize]).is_zero(), || {
                    format!(
                        "images of d{}[{}] and d{}[{}] do not commute",
                        i + 1,
                        p.pow(k),
                        j + 1,
                        p.pow(l)
                    )
                });
            }
            for j in 0..self.n {
                let got = gi.commutator(&x_images[j]);
                let want = if i == j {
                    let e = u32::try_from(p.pow(k) - 1).expect("exponent overflow");
                    self.axis_power_at(i, e).expect("within ensured depth")
                } else {
                    DiffOp::zero(p, self.n)
                };
                report.check(got == want, || {
                    format!(
                        "bracket of the d{}[{}] image with the x{} image has the wrong value",
                        i + 1,
                        p.pow(k),
                        j + 1
                    )
                });
            }
        }

        match self.apply(&DiffOp::one(p, self.n)) {
            Ok(one) => report.check(one == DiffOp::one(p, self.n), || {
                "the image of 1 is not 1".into()
            }),
            Err(e) => report.check(false, || format!("cannot apply the map to 1: {}", e)),
        }

        let mut rng = sample::rng_from_seed(seed);
        let beta_bound = if d >= 1 {
            u32::try_from(p.pow(d - 1) - 1).unwrap_or(u32::MAX)
        } else {
            0
        };
        for t in 0..samples {
            let a = sample::random_diffop(p, self.n, 4, beta_bound, 3, &mut rng);
            let b = sample::random_diffop(p, self.n, 4, beta_bound, 3, &mut rng);
            let lhs = self.apply(&a.mul(&b));
            let rhs = self
                .apply(&a)
                .and_then(|ga| Ok(ga.mul(&self.apply(&b)?)));
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => report.check(l == r, || {
                    format!("multiplicativity fails on sampled pair {}", t)
                }),
                (Err(e), _) | (_, Err(e)) => report.check(false, || {
                    format!("cannot apply the map to sampled pair {}: {}", t, e)
                }),
            }
        }
        report
    }

    /// Check the structural axioms for a Frobenius endomorphism with the
    /// designated data P' = polynomials, D' = scalar operators, y_i = ∂_i:
    /// 1. polynomials map to their p^s-th powers (sampled);
    /// 2. each ad(x_i) is locally nilpotent and the joint centralizer of
    ///    the variables is exactly the polynomials (on a bounded
    ///    monomial basis);
    /// 3. the iterates G^k(∂_i) stay inside the scalar operators and
    ///    commute with every other variable, for k ≤ depth.
    pub fn verify_frobenius_axioms(&self, depth: u32, seed: u64) -> Report {
        let mut report = Report::new();
        let p = self.p;
        let n = self.n;
        let mut rng = sample::rng_from_seed(seed);

        for t in 0..20 {
            let f = sample::random_poly(p, n, 4, 3, &mut rng);
            let lhs = self
                .apply(&DiffOp::from_poly(&f))
                .expect("polynomial images need no generator levels");
            let rhs = DiffOp::from_poly(&f.pow(p.pow(self.s)));
            report.check(lhs == rhs, || {
                format!(
                    "polynomials are not raised to the p^s power (sample {})",
                    t
                )
            });
        }

        let beta_cap = u32::try_from((p.pow(self.s + 1) - 1).min(20)).unwrap();
        let alpha_top = MultiIndex::new(vec![2; n]);
        let beta_top = MultiIndex::new(vec![beta_cap; n]);
        for alpha in MultiIndex::iter_le(&alpha_top) {
            for beta in MultiIndex::iter_le(&beta_top) {
                let b = DiffOp::monomial(p, n, &alpha, &beta, 1);
                for i in 0..n {
                    let mut cur = b.clone();
                    let mut steps = 0;
                    while !cur.is_zero() && steps <= beta.get(i) + 1 {
                        cur = DiffOp::var(p, n, i).commutator(&cur);
                        steps += 1;
                    }
                    report.check(cur.is_zero(), || {
                        format!(
                            "ad(x{}) fails to vanish on the basis element at ({}, {})",
                            i + 1,
                            alpha,
                            beta
                        )
                    });
                }
                let centralizes = (0..n)
                    .all(|i| DiffOp::var(p, n, i).commutator(&b).is_zero());
                report.check(centralizes == beta.is_zero(), || {
                    format!(
                        "joint centralizer of the variables disagrees with the \
                         polynomials at ({}, {})",
                        alpha, beta
                    )
                });
            }
        }
        report.note(format!(
            "variable-centralizer condition checked on the monomial basis with \
             alpha <= 2 and beta <= {} per axis; the axiom ranges over the whole ring",
            beta_cap
        ));

        if let Some(d) = self.usable_depth(depth.max(1), &mut report) {
            let images = self.image_table(d).expect("depth just ensured");
            for (i, column) in images.iter().enumerate() {
                for (k, y) in column.iter().enumerate() {
                    report.check(y.is_scalar_operator(), || {
                        format!(
                            "image of d{}[{}] leaves the scalar-operator subalgebra",
                            i + 1,
                            p.pow(k as u32)
                        )
                    });
                }
            }
        }
        for i in 0..n {
            let mut cur = DiffOp::dpow(p, n, i, 1);
            for k in 1..=depth {
                match self.apply(&cur) {
                    Ok(next) => cur = next,
                    Err(e) => {
                        report.check(false, || {
                            format!("cannot iterate the map {} times on d{}: {}", k, i + 1, e)
                        });
                        break;
                    }
                }
                report.check(cur.is_scalar_operator(), || {
                    format!(
                        "iterate {} of d{} leaves the scalar-operator subalgebra",
                        k,
                        i + 1
                    )
                });
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    report.check(
                        cur.commutator(&DiffOp::var(p, n, j)).is_zero(),
                        || {
                            format!(
                                "iterate {} of d{} does not commute with x{}",
                                k,
                                i + 1,
                                j + 1
                            )
                        },
                    );
                }
            }
        }
        report.note(format!(
            "iterate conditions checked for k <= {}; the axiom ranges over all k",
            depth
        ));
        report
    }

    /// Depth actually usable for verification: extendable maps reach
    /// `requested`; fixed tables are capped at their stored depth (noted).
    fn usable_depth(&self, requested: u32, report: &mut Report) -> Option<u32> {
        if self.params.is_some() {
            match self.ensure_depth(requested) {
                Ok(()) => Some(requested),
                Err(e) => {
                    report.check(false, || {
                        format!("cannot materialize generator images: {}", e)
                    });
                    None
                }
            }
        } else {
            let available = self.depth();
            if requested > available {
                report.note(format!(
                    "generator depth capped at {} by the fixed image table",
                    available
                ));
                Some(available)
            } else {
                Some(requested)
            }
        }
    }
}

/// Build G_u from its parameter matrix.
pub fn build_gu(params: FrobParams) -> Result<FrobMap, Error> {
    FrobMap::build(params)
}

/// Read the parameter matrix off a generator-image table:
/// u_{ik} = images[i][k] − ∫_i^{*p^s}(digit product of earlier images).
/// Fails if an image leaves the scalar operators or a recovered entry is
/// not supported on the punctured cube.
pub fn recover_u(
    p: Prime,
    n: usize,
    s: u32,
    images: &[Vec<DiffOp>],
) -> Result<FrobParams, Error> {
    if n == 0 || images.len() != n {
        return Err(Error::Invalid(format!(
            "expected one image column per axis ({} axes, got {})",
            n,
            images.len()
        )));
    }
    if s == 0 {
        return Err(Error::Invalid(
            "the Frobenius level s must be at least 1".into(),
        ));
    }
    let depth = images[0].len();
    if images.iter().any(|c| c.len() != depth) {
        return Err(Error::Invalid("ragged image table".into()));
    }
    for column in images {
        for y in column {
            if !y.is_scalar_operator() {
                return Err(Error::NotScalarOperator);
            }
        }
    }
    let shift = u32::try_from(p.pow(s)).expect("exponent overflow");
    let top_inv = inv_digit_factorial(p.get() - 1, p);
    let mut entries = Vec::with_capacity(n);
    for (i, column) in images.iter().enumerate() {
        let mut out = Vec::with_capacity(depth);
        let mut running = DiffOp::one(p, n);
        for y in column {
            let lifted = dual_integration(&running, i, shift)?;
            out.push(y - &lifted);
            running = running.mul(&y.pow(p.get() - 1).scalar_mul(top_inv));
        }
        entries.push(out);
    }
    FrobParams::new(p, n, s, entries)
}
