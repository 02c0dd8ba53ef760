//! Exact arithmetic in the operator ring: products, commutators, and
//! the action on polynomials, all reduced to the normal form
//! Σ c·x^α ∂^{[β]}.
//!
//! Run with: cargo run --example normal_ordering

use dpn::{parse_element, Prime};

fn main() -> Result<(), dpn::Error> {
    let p = Prime::new(5)?;
    let n = 1;

    // Divided powers compose through a binomial coefficient:
    // d[k] * d[l] = C(k+l, k) d[k+l], evaluated mod p by digits.
    let d2 = parse_element("d1[2]", p, n)?;
    let d3 = parse_element("d1[3]", p, n)?;
    println!("d1[2] * d1[3] = {}", d2.mul(&d3)); // C(5,2) = 10 = 0 mod 5
    println!("d1[2] * d1[2] = {}", d2.mul(&d2)); // C(4,2) = 6 = 1 mod 5

    // Moving a divided power across a monomial spawns the full ladder
    // of lower-order terms.
    let x4 = parse_element("x1^4", p, n)?;
    println!("d1[2] * x1^4 = {}", d2.mul(&x4));
    println!("[d1[2], x1^4] = {}", d2.commutator(&x4));

    // The same product computed in the opposite order has no ladder:
    // polynomials multiply through on the left.
    println!("x1^4 * d1[2] = {}", x4.mul(&d2));

    // Operators act on polynomials: d[k] extracts the k-th divided
    // coefficient, so d1[2] applied to x^4 is C(4,2) x^2.
    let f = parse_element("x1^4 + 2*x1^2 + 3", p, n)?.to_poly()?;
    println!("d1[2] . (x1^4 + 2*x1^2 + 3) = {}", d2.apply(&f));

    // In characteristic p the ordinary derivative is nilpotent:
    // d^p = p! d[p] = 0, while the divided power d[p] survives.
    let d1 = parse_element("d1[1]", p, n)?;
    let mut pow = d1.clone();
    for _ in 1..5 {
        pow = pow.mul(&d1);
    }
    println!("d1[1]^5 = {} (p = 5)", pow);
    println!("d1[5]   = {}", parse_element("d1[5]", p, n)?);

    // Scalar operators (no x part) form a commutative subring in which
    // an element is nilpotent exactly when it has no constant term.
    let a = parse_element("d1[1] + d1[2]", p, n)?;
    let mut a_pow = a.clone();
    for _ in 1..5 {
        a_pow = a_pow.mul(&a);
    }
    println!("(d1[1] + d1[2])^5 = {}", a_pow);

    Ok(())
}
