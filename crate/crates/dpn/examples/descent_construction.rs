//! Iterative descents of the shift derivations.
//!
//! The derivation δ_i = −ad(x_i^{p^s}) lowers the i-th divided-power
//! order by exactly p^s. A descent under δ = (δ_1, …, δ_n) is a family
//! {y^[α]} over a box of exponents with y^[0] = 1 and
//! δ^γ(y^[α]) = y^[α−γ]; it is iterative when the members also satisfy
//! the divided-power product law y^[α]·y^[β] = C(α+β, α)·y^[α+β]. An
//! iterative family is determined by its generators y_i[p^k] (every
//! other member is a digit product), and the canonical descent at
//! level 0 is the divided-power family itself.
//!
//! Run with: cargo run --example descent_construction

use dpn::{construct_rank1, parse_element, Derivation, Descent, MultiIndex, Prime};

fn main() -> Result<(), dpn::Error> {
    let p = Prime::new(2)?;

    // The canonical rank-1 descent at level 0: members d1[1], d1[2],
    // d1[4], … — each p-th power step is one rung of the ladder.
    let canonical = Descent::canonical(p, 1, 0, &[3]);
    println!("canonical generators at p = 2:");
    for (k, y) in canonical.gens()[0].iter().enumerate() {
        println!("  y[p^{k}] = {y}");
    }

    // The defining property: one application of the shift derivation
    // moves a member one index down the box, so the generator y[4]
    // descends to the expanded member y^[3].
    let delta = canonical.derivation();
    let y2 = canonical.gen(0, 2);
    println!("delta(y[p^2]) = {}", delta.apply(0, y2));

    // Expansion: the descent induces one operator y^[alpha] per
    // exponent in the box, multiplicative across the base-p digits.
    let alpha = MultiIndex::new(vec![5]);
    println!("y^[5] = {}", canonical.expand(&alpha));

    // Both laws, checked exhaustively over the declared box:
    println!("shift law:   {}", canonical.verify_descent(&delta));
    println!("product law: {}", canonical.verify_iterative());

    // Perturbing a generator by a delta-killed tail preserves the bare
    // shift identity, but the verifiers catch everything else it
    // breaks: commutation, the vanishing p-th power, and the
    // divided-power product law — each violation is listed.
    let twisted = Descent::new(
        p,
        1,
        0,
        vec![vec![
            parse_element("d1[1]", p, 1)?,
            parse_element("d1[2] + x1", p, 1)?,
        ]],
    )?;
    println!("twisted shift law:   {}", twisted.verify_descent(&delta));
    println!("twisted product law: {}", twisted.verify_iterative());

    // construct_rank1 rebuilds a descent from admissible seeds: scalar
    // operators y_k with y_k^p = 0 and delta^{p^k}(y_k) = 1. The seeds
    // need not be the canonical generators — the recursion projects the
    // junk away, and uniqueness forces the canonical answer.
    let seeds = vec![
        parse_element("d1[1]", p, 1)?,
        parse_element("d1[2] + d1[1]", p, 1)?,
        parse_element("d1[4] + d1[3]", p, 1)?,
    ];
    let rebuilt = construct_rank1(&Derivation::new(p, 1, 0), 0, &seeds)?;
    println!(
        "descent rebuilt from perturbed seeds matches the canonical one: {}",
        rebuilt.gens() == canonical.gens()
    );

    // At level s > 0 the shift acts on exponents divisible by p^s and
    // the canonical members live p^s rungs apart.
    let level1 = Descent::canonical(p, 1, 1, &[2]);
    println!("level-1 canonical generators:");
    for (k, y) in level1.gens()[0].iter().enumerate() {
        println!("  y[p^{k}] = {y}");
    }

    Ok(())
}
