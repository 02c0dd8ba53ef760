//! Rigidity: the divided powers are the only level-0 descent.
//!
//! The rigidity checker takes a candidate family y_i[p^k] and tests the
//! axioms that pin the canonical generators down uniquely — vanishing
//! p-th powers, cross-axis annihilation, commutation, and the descent
//! step into the previously accepted member. A candidate that passes
//! everything necessarily IS the divided-power family; the checker
//! confirms the equality and reports any deviation as its own
//! violation.
//!
//! Run with: cargo run --example rigidity

use dpn::{parse_element, rigidity_check, Descent, Prime};

fn main() -> Result<(), dpn::Error> {
    let p = Prime::new(2)?;

    // The canonical family passes.
    let canonical = Descent::canonical(p, 2, 0, &[2, 2]);
    println!("canonical: {}", rigidity_check(&canonical));

    // Perturb one generator by a square: (d1[1] + x1)^2 = 1, nonzero,
    // so the nilpotence axiom fails loudly.
    let bad_power = Descent::new(
        p,
        1,
        0,
        vec![vec![
            parse_element("d1[1] + x1", p, 1)?,
            parse_element("d1[2]", p, 1)?,
        ]],
    )?;
    println!("d1[1] + x1: {}", rigidity_check(&bad_power));

    // Perturb by a nilpotent tail instead: (d1[1] + d1[2])^2 = 0, so
    // the power axiom holds — but the descent step catches it, because
    // delta(d1[1] + d1[2]) = 1 + d1[1] and the axiom demands exactly 1.
    let bad_descent = Descent::new(
        p,
        1,
        0,
        vec![vec![
            parse_element("d1[1] + d1[2]", p, 1)?,
            parse_element("d1[2]", p, 1)?,
        ]],
    )?;
    println!("d1[1] + d1[2]: {}", rigidity_check(&bad_descent));

    // The checks are axis-aware: a generator that fails to annihilate
    // the other axis is rejected even if its own axis looks right.
    let cross = Descent::new(
        p,
        2,
        0,
        vec![
            vec![parse_element("d1[1] + d2[1]", p, 2)?],
            vec![parse_element("d2[1]", p, 2)?],
        ],
    )?;
    println!("cross-axis leak: {}", rigidity_check(&cross));

    Ok(())
}
