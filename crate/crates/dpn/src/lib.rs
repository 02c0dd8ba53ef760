//! Exact arithmetic for the ring D(P_n) of divided-power differential
//! operators on P_n = F_p[x_1, …, x_n], together with the structures that
//! make it rigid in characteristic p: iterative δ-descents, the
//! parameterized family of Frobenius endomorphisms, closed-form kernels
//! and centralizers, and the rank-p^{2n} free-module decomposition over a
//! Frobenius image.
//!
//! Everything is computed over F_p with zero tolerance; there is no
//! floating point anywhere. Binomial coefficients are taken mod p by
//! Lucas digit products, so exponents can be large without big-integer
//! blowup.
//!
//! Module map:
//! * [`field`]: F_p scalars, Lucas binomials, digit factorials.
//! * [`index`]: exponent vectors with the canonical term order.
//! * [`ring`]: normal-form operators, multiplication, the action on
//!   polynomials, commutators.
//! * [`descent`]: iterative δ-descents (generator form and table form),
//!   construction from seeds, normalization, classification.
//! * [`frobenius`]: the canonical Frobenius, dual integration, the
//!   parameter family u ↦ G_u and its inverse, verifiers.
//! * [`structure`]: membership predicates for closed-form subalgebras,
//!   bases, nil-filtration degree, free-module decomposition, rigidity.
//! * [`parse`], [`json`]: the expression surface syntax and the bit-exact
//!   JSON element format.
//! * [`sample`]: seeded random generators used by tests and the CLI.
//! * [`cli`]: the `dpn` command-line front end.
//!
//! Each runnable example under `examples/` walks one capability:
//! `normal_ordering`, `descent_construction`, `frobenius_family`,
//! `free_module`, `subalgebras`, `rigidity`.

pub mod cli;
pub mod descent;
pub mod error;
pub mod field;
pub mod frobenius;
pub mod index;
pub mod json;
pub mod parse;
pub mod report;
pub mod ring;
pub mod sample;
pub mod structure;

pub use descent::{
    classify, construct_rank1, normalize, perturb, product, Classification, Derivation, Descent,
    DescentTable,
};
pub use error::Error;
pub use field::{binom_mod_p, inv_digit_factorial, multi_binom, Prime, Scalar};
pub use frobenius::{FrobMap, FrobParams};
pub use index::MultiIndex;
pub use parse::{parse, parse_element};
pub use report::Report;
pub use ring::{equals_via_action, DiffOp, Poly};
pub use structure::{
    decompose_over_frobenius_image, rigidity_check, FrobeniusDecomposition, Side, SubalgebraSpec,
};
