//! Closed-form kernels and centralizers.
//!
//! Several natural subalgebras of the operator ring have exact
//! monomial descriptions, so membership is a digit condition on the
//! exponents rather than a search. Each description below is verified
//! against a direct bracket/action computation in the test suite.
//!
//! Run with: cargo run --example subalgebras

use dpn::structure::nil_degree;
use dpn::{parse_element, DiffOp, Prime, SubalgebraSpec};

fn show(spec: &SubalgebraSpec, a: &DiffOp, source: &str) {
    println!(
        "  {source:>24}  ->  {}",
        if spec.member(a) { "member" } else { "not a member" }
    );
}

fn main() -> Result<(), dpn::Error> {
    let p = Prime::new(2)?;
    let n = 1;
    let parse = |src: &str| parse_element(src, p, n);

    // Centralizer of d1[1], …, d1[p^k] (the divided-power tower up to
    // level k): exactly the terms whose x-exponents are divisible by
    // p^{k+1}. One level is not enough — centralizing d1[2] alone
    // admits x1*d1[1] at p = 2 — so the tower is what gets the clean
    // answer.
    let tower1 = SubalgebraSpec::DpCentralizer { axis: 0, level: 1 };
    println!("{}:", tower1.describe());
    show(&tower1, &parse("x1^4*d1[3]")?, "x1^4*d1[3]");
    show(&tower1, &parse("x1^2*d1[1]")?, "x1^2*d1[1]");

    // The commutant of the single operator d1[2] is strictly larger
    // than the tower centralizer: the number operator x1*d1[1]
    // commutes with d1[2] at p = 2 even though its x-exponent is odd.
    let euler = parse("x1*d1[1]")?;
    let d2 = parse("d1[2]")?;
    println!(
        "[x1*d1[1], d1[2]] = {} (commutes, yet x-exponent 1 is odd)",
        euler.commutator(&d2)
    );
    show(&tower1, &euler, "x1*d1[1]");

    // Centralizer of x1^{p^k}: divided-power orders below p^k. This one
    // IS a single-bracket condition, because [d1[j], x1^{p^k}] has a
    // single term d1[j - p^k] and never collapses mod p.
    let xcent = SubalgebraSpec::XPowerCentralizer { axis: 0, level: 2 };
    println!("{}:", xcent.describe());
    show(&xcent, &parse("x1^5*d1[3]")?, "x1^5*d1[3]");
    show(&xcent, &parse("d1[4]")?, "d1[4]");

    // Polynomials killed by d1[p^k]: exactly those whose exponents have
    // k-th base-p digit zero (a Lucas vanishing, not a degree cutoff —
    // x1^5 is in the kernel of d1[2] at p = 2 while x1^2 is not).
    let kernel = SubalgebraSpec::DpPolyKernel { axis: 0, level: 1 };
    println!("{}:", kernel.describe());
    show(&kernel, &parse("x1^5")?, "x1^5");
    show(&kernel, &parse("x1^2")?, "x1^2");

    // The scalar-operator part of the centralizer of a whole Frobenius
    // image: divided powers of order below p^k in every variable.
    let frob = SubalgebraSpec::FrobeniusImageCentralizer { level: 1 };
    println!("{}:", frob.describe());
    show(&frob, &parse("d1[1] + 1")?, "d1[1] + 1");
    show(&frob, &parse("d1[2]")?, "d1[2]");

    // Bases: every one of these subalgebras is spanned by the monomials
    // it contains, so a degree-bounded basis is a filtered enumeration.
    let basis = tower1.basis_upto(p, n, 5);
    println!("basis of the tower centralizer up to degree 5:");
    for b in &basis {
        println!("  {b}");
    }

    // Nilpotence in the scalar subring: a scalar operator with zero
    // constant term has vanishing p-th power, and the nil degree reads
    // off the top divided-power order per axis.
    let a = parse("d1[1] + d1[2]")?;
    println!(
        "nil degree of d1[1] + d1[2]: {} (its square is {})",
        nil_degree(&a),
        a.mul(&a)
    );

    Ok(())
}
