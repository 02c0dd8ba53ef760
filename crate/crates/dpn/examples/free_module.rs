//! The ring as a free module of rank p^{2n} over a Frobenius image.
//!
//! For a level-1 map G, every operator a decomposes uniquely as
//! a = Σ G(c_{αβ}) · x^α ∂^{[β]} with α, β ranging over [0, p)^n —
//! p^{2n} basis monomials, coefficients from the image. The algorithm
//! is triangular: it repeatedly strips the dominant remaining term,
//! so it both computes the coordinates and certifies uniqueness.
//!
//! Run with: cargo run --example free_module

use dpn::{
    decompose_over_frobenius_image, parse_element, DiffOp, FrobMap, FrobParams, Prime, Side,
};

fn main() -> Result<(), dpn::Error> {
    let p = Prime::new(2)?;
    let n = 1;
    let map = FrobMap::canonical(p, n, 1);

    // The basis has p^{2n} = 4 monomials: 1, x1, d1[1], x1*d1[1].
    let a = parse_element("x1^3*d1[5]", p, n)?;
    let dec = decompose_over_frobenius_image(&map, &a, Side::Left)?;
    println!("x1^3*d1[5] over the level-1 image (left side):");
    for ((alpha, beta), c) in dec.nonzero() {
        let basis = DiffOp::monomial(p, n, alpha, beta, 1);
        println!("  coefficient of {basis}: {c}");
    }
    println!(
        "  nonzero coordinates: {} of {}",
        dec.nonzero().count(),
        dec.basis_size()
    );

    // reconstruct() re-multiplies G(c)·basis and must return the input.
    println!("reconstructs exactly: {}", dec.reconstruct(&map)? == a);

    // The same element decomposes on the right too (basis·G(c)), with
    // different coordinates in general.
    let right = decompose_over_frobenius_image(&map, &a, Side::Right)?;
    println!("right-side coordinates agree: {}", {
        let l: Vec<_> = dec.nonzero().collect();
        let r: Vec<_> = right.nonzero().collect();
        l == r
    });
    println!("right side reconstructs: {}", right.reconstruct(&map)? == a);

    // A denser element: every basis monomial shows up.
    let b = parse_element("(1 + x1 + d1[1] + x1*d1[1]) * (1 + x1^2*d1[2])", p, n)?;
    let dec_b = decompose_over_frobenius_image(&map, &b, Side::Left)?;
    println!(
        "dense element uses {} of {} basis monomials",
        dec_b.nonzero().count(),
        dec_b.basis_size()
    );
    println!("dense reconstructs: {}", dec_b.reconstruct(&map)? == b);

    // The decomposition works over deformed images as well: the
    // triangular elimination only uses the leading form of G.
    let u = vec![vec![parse_element("d1[1]", p, n)?]];
    let deformed = FrobMap::build(FrobParams::new(p, n, 1, u)?)?;
    let dec_d = decompose_over_frobenius_image(&deformed, &a, Side::Left)?;
    println!(
        "over the deformed image: {} nonzero, reconstructs: {}",
        dec_d.nonzero().count(),
        dec_d.reconstruct(&deformed)? == a
    );

    Ok(())
}
