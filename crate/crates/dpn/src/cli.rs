//! Command-line front end.
//!
//! Subcommands map one-to-one onto library operations:
//!
//! * `mul`, `apply`, `commutator` — operator arithmetic on parsed
//!   expressions;
//! * `frob build|apply|recover|verify` — the parameterized Frobenius
//!   family;
//! * `descent construct|verify|classify|normalize` — iterative
//!   descents;
//! * `struct member|basis|decompose|rigidity` — structural subalgebras,
//!   the free-module decomposition, and the rigidity checker.
//!
//! Exit codes: 0 on success/pass, 1 on verification failure (a failing
//! report, non-membership, or a non-triangular decomposition), 2 on
//! usage errors (bad flags, unparsable input, malformed files). Output
//! is deterministic for a fixed command line (sampling is driven by
//! `--seed`, default 0).

use crate::descent::{
    classify, construct_rank1, normalize, Derivation, Descent, DescentTable,
};
use crate::error::Error;
use crate::field::Prime;
use crate::frobenius::{FrobMap, FrobParams};
use crate::json;
use crate::parse::parse_element;
use crate::report::Report;
use crate::ring::{DiffOp, Poly};
use crate::structure::{
    decompose_over_frobenius_image, rigidity_check, Side, SubalgebraSpec,
};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

/// Exact arithmetic in the ring of divided-power differential operators
/// over a prime field.
#[derive(Parser)]
#[command(name = "dpn", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Shared session flags; each subcommand reads the subset it needs.
#[derive(Args, Clone, Default)]
struct Session {
    /// Prime modulus p.
    #[arg(long, global = true)]
    p: Option<u64>,

    /// Number of variables n (default 1).
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Level: the Frobenius is a ↦ a^{p^s} on polynomials (s ≥ 1);
    /// descents shift exponents by p^s (s ≥ 0, default 0).
    #[arg(long, global = true)]
    s: Option<u32>,

    /// Depth/degree bound; repeat to give one per axis where the
    /// operation is per-axis (descent tables).
    #[arg(long = "bound", global = true)]
    bounds: Vec<u32>,

    /// Generator-image depth for Frobenius tables (default 3).
    #[arg(long, global = true)]
    depth: Option<u32>,

    /// Seed for sampled verification.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Emit elements as canonical JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Frobenius parameter-matrix JSON file.
    #[arg(long = "u-file", global = true)]
    u_file: Option<PathBuf>,

    /// Input JSON file (image table, descent, or descent table).
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,

    /// Write the command's output here instead of stdout.
    #[arg(long = "out", global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExprArgs {
    #[command(flatten)]
    session: Session,

    /// Expression in the surface syntax; repeat for two-operand
    /// commands (order matters).
    #[arg(long = "expr")]
    exprs: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply two operator expressions (left * right).
    Mul(ExprArgs),
    /// Apply an operator expression to a polynomial expression.
    Apply(ExprArgs),
    /// Commutator [left, right] of two operator expressions.
    Commutator(ExprArgs),
    /// Parameterized Frobenius endomorphisms.
    #[command(subcommand)]
    Frob(FrobCmd),
    /// Iterative descents of the shift derivations.
    #[command(subcommand)]
    Descent(DescentCmd),
    /// Structural subalgebras, free-module decomposition, rigidity.
    #[command(subcommand, name = "struct")]
    Structure(StructCmd),
}

#[derive(Subcommand)]
enum FrobCmd {
    /// Build a map from a parameter matrix (canonical if no --u-file)
    /// and print its generator-image table.
    Build {
        #[command(flatten)]
        session: Session,
    },
    /// Apply a map to an expression.
    Apply(ExprArgs),
    /// Recover the parameter matrix from a generator-image table.
    Recover {
        #[command(flatten)]
        session: Session,
    },
    /// Verify the homomorphism property and the endomorphism axioms.
    Verify {
        #[command(flatten)]
        session: Session,
    },
}

#[derive(Subcommand)]
enum DescentCmd {
    /// Construct a descent: canonical for the session shape, or from a
    /// seed file (level-0, one axis) via the rank-1 recursion.
    Construct {
        #[command(flatten)]
        session: Session,
    },
    /// Verify the shift and product laws of a descent or table file.
    Verify {
        #[command(flatten)]
        session: Session,
    },
    /// Classify a descent file against the canonical reference.
    Classify {
        #[command(flatten)]
        session: Session,
    },
    /// Normalize a raw descent table against the canonical reference.
    Normalize {
        #[command(flatten)]
        session: Session,
    },
}

#[derive(Subcommand)]
enum StructCmd {
    /// Test an expression for membership in a structural subalgebra.
    /// Exit 0 if it is a member, 1 if not.
    Member {
        #[command(flatten)]
        session: Session,
        /// Subalgebra name, e.g. scalar-operators, polynomials,
        /// constants, dp-centralizer:AXIS:LEVEL,
        /// dp-centralizer-joint:K1,K2,…, dp-centralizer-tower:AXIS,
        /// x-centralizer:AXIS:LEVEL, x-centralizer-joint:K1,…,
        /// frobenius-image-centralizer:LEVEL,
        /// dp-poly-kernel:AXIS:LEVEL, dp-poly-kernel-joint:K1,…,
        /// dp-poly-kernel-tower:AXIS.
        spec: String,
        #[arg(long = "expr")]
        exprs: Vec<String>,
    },
    /// List the subalgebra's monomial basis up to a degree bound.
    Basis {
        #[command(flatten)]
        session: Session,
        /// Subalgebra name (see `struct member --help`).
        spec: String,
    },
    /// Decompose an expression over a level-1 Frobenius image.
    Decompose {
        #[command(flatten)]
        session: Session,
        #[arg(long = "expr")]
        exprs: Vec<String>,
        /// Module side: left (G(c)·basis) or right (basis·G(c)).
        #[arg(long, default_value = "left")]
        side: String,
    },
    /// Check a descent file against the uniqueness theorem for the
    /// shift derivations (canonical table if no --in).
    Rigidity {
        #[command(flatten)]
        session: Session,
    },
}

/// Parse argv and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<bool, Error> {
    match command {
        Command::Mul(args) => {
            let (p, n) = shape(&args.session)?;
            let (a, b) = two_exprs(&args, p, n)?;
            emit_element(&args.session, &a.mul(&b))?;
            Ok(true)
        }
        Command::Commutator(args) => {
            let (p, n) = shape(&args.session)?;
            let (a, b) = two_exprs(&args, p, n)?;
            emit_element(&args.session, &a.commutator(&b))?;
            Ok(true)
        }
        Command::Apply(args) => {
            let (p, n) = shape(&args.session)?;
            let (op, rhs) = two_exprs(&args, p, n)?;
            let f = rhs.to_poly()?;
            emit_poly(&args.session, &op.apply(&f))?;
            Ok(true)
        }
        Command::Frob(cmd) => frob(cmd),
        Command::Descent(cmd) => descent(cmd),
        Command::Structure(cmd) => structure(cmd),
    }
}

fn shape(session: &Session) -> Result<(Prime, usize), Error> {
    let p = session
        .p
        .ok_or_else(|| Error::Invalid("--p is required".into()))?;
    Ok((Prime::new(p)?, session.n.unwrap_or(1)))
}

fn two_exprs(args: &ExprArgs, p: Prime, n: usize) -> Result<(DiffOp, DiffOp), Error> {
    if args.exprs.len() != 2 {
        return Err(Error::Invalid(format!(
            "expected exactly two --expr arguments, got {}",
            args.exprs.len()
        )));
    }
    Ok((
        parse_element(&args.exprs[0], p, n)?,
        parse_element(&args.exprs[1], p, n)?,
    ))
}

fn one_expr(exprs: &[String], p: Prime, n: usize) -> Result<DiffOp, Error> {
    if exprs.len() != 1 {
        return Err(Error::Invalid(format!(
            "expected exactly one --expr argument, got {}",
            exprs.len()
        )));
    }
    parse_element(&exprs[0], p, n)
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn emit(session: &Session, text: &str) -> Result<(), Error> {
    match &session.output {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_element(session: &Session, a: &DiffOp) -> Result<(), Error> {
    let text = if session.json {
        json::element_to_string(a)
    } else {
        a.to_string()
    };
    emit(session, &text)
}

fn emit_poly(session: &Session, f: &Poly) -> Result<(), Error> {
    let text = if session.json {
        json::element_to_string(&DiffOp::from_poly(f))
    } else {
        f.to_string()
    };
    emit(session, &text)
}

fn print_report(label: &str, report: &Report) {
    println!("{label}: {report}");
}

/// Reject session flags that contradict a loaded file's header.
fn check_header(session: &Session, p: u64, n: usize, s: u32) -> Result<(), Error> {
    if let Some(fp) = session.p {
        if fp != p {
            return Err(Error::Invalid(format!(
                "--p {fp} contradicts the file header p = {p}"
            )));
        }
    }
    if let Some(fn_) = session.n {
        if fn_ != n {
            return Err(Error::Invalid(format!(
                "--n {fn_} contradicts the file header n = {n}"
            )));
        }
    }
    if let Some(fs) = session.s {
        if fs != s {
            return Err(Error::Invalid(format!(
                "--s {fs} contradicts the file header s = {s}"
            )));
        }
    }
    Ok(())
}

/// Resolve the Frobenius map a frob/struct subcommand operates on:
/// --u-file builds from parameters, --in wraps a raw image table, and
/// bare flags give the canonical map.
fn load_map(session: &Session) -> Result<FrobMap, Error> {
    if let (Some(_), Some(_)) = (&session.u_file, &session.input) {
        return Err(Error::Invalid(
            "--u-file and --in are mutually exclusive".into(),
        ));
    }
    if let Some(path) = &session.u_file {
        let params: FrobParams = json::params_from_str(&read_file(path)?)?;
        check_header(session, params.p().get(), params.n(), params.s())?;
        FrobMap::build(params)
    } else if let Some(path) = &session.input {
        let map = json::image_table_from_str(&read_file(path)?)?;
        check_header(session, map.p().get(), map.n(), map.s())?;
        Ok(map)
    } else {
        let (p, n) = shape(session)?;
        let s = session.s.unwrap_or(1);
        if s == 0 {
            return Err(Error::Invalid(
                "the Frobenius level s must be at least 1".into(),
            ));
        }
        Ok(FrobMap::canonical(p, n, s))
    }
}

fn frob(cmd: FrobCmd) -> Result<bool, Error> {
    match cmd {
        FrobCmd::Build { session } => {
            let map = load_map(&session)?;
            let depth = session.depth.unwrap_or(3);
            emit(&session, &json::image_table_to_string(&map, depth)?)?;
            Ok(true)
        }
        FrobCmd::Apply(args) => {
            let map = load_map(&args.session)?;
            let a = one_expr(&args.exprs, map.p(), map.n())?;
            emit_element(&args.session, &map.apply(&a)?)?;
            Ok(true)
        }
        FrobCmd::Recover { session } => {
            let map = load_map(&session)?;
            let depth = session.depth.unwrap_or_else(|| map.depth().max(1));
            let params = map.recover(depth)?;
            emit(&session, &json::params_to_string(&params))?;
            Ok(true)
        }
        FrobCmd::Verify { session } => {
            let map = load_map(&session)?;
            let depth = session.depth.unwrap_or(3);
            let hom = map.verify_homomorphism(depth, 200, session.seed);
            let axioms = map.verify_frobenius_axioms(depth, session.seed);
            print_report("homomorphism", &hom);
            print_report("endomorphism axioms", &axioms);
            Ok(hom.passed() && axioms.passed())
        }
    }
}

/// A descent file in either form: generator table or full box table.
enum DescentFile {
    Generators(Descent),
    Table(DescentTable),
}

fn load_descent_file(session: &Session) -> Result<DescentFile, Error> {
    let path = session
        .input
        .as_ref()
        .ok_or_else(|| Error::Invalid("--in <file> is required".into()))?;
    let text = read_file(path)?;
    if let Ok(j) = serde_json::from_str::<json::DescentJson>(&text) {
        let d = json::descent_from_json(&j)?;
        check_header(session, d.p().get(), d.n(), d.level())?;
        return Ok(DescentFile::Generators(d));
    }
    let j: json::DescentTableJson = serde_json::from_str(&text)?;
    let t = json::table_from_json(&j)?;
    check_header(session, t.p().get(), t.n(), t.level())?;
    Ok(DescentFile::Table(t))
}

fn descent(cmd: DescentCmd) -> Result<bool, Error> {
    match cmd {
        DescentCmd::Construct { session } => {
            let constructed = if session.input.is_some() {
                let file = load_descent_file(&session)?;
                let seeds = match &file {
                    DescentFile::Generators(d) => {
                        if d.n() != 1 || d.level() != 0 {
                            return Err(Error::Invalid(
                                "seed construction runs over one variable at level 0".into(),
                            ));
                        }
                        d.gens()[0].clone()
                    }
                    DescentFile::Table(_) => {
                        return Err(Error::Invalid(
                            "seed files use the generator form, not a box table".into(),
                        ))
                    }
                };
                let first = seeds
                    .first()
                    .ok_or_else(|| Error::Invalid("the seed file lists no generators".into()))?;
                construct_rank1(&Derivation::new(first.p(), 1, 0), 0, &seeds)?
            } else {
                let (p, n) = shape(&session)?;
                let level = session.s.unwrap_or(0);
                let bounds = if session.bounds.is_empty() {
                    vec![2; n]
                } else if session.bounds.len() == n {
                    session.bounds.clone()
                } else {
                    return Err(Error::Invalid(format!(
                        "expected {} --bound values, got {}",
                        n,
                        session.bounds.len()
                    )));
                };
                Descent::canonical(p, n, level, &bounds)
            };
            emit(&session, &json::descent_to_string(&constructed))?;
            Ok(true)
        }
        DescentCmd::Verify { session } => {
            let file = load_descent_file(&session)?;
            let (shift, iterative) = match &file {
                DescentFile::Generators(d) => {
                    let delta = Derivation::new(d.p(), d.n(), d.level());
                    (d.verify_descent(&delta), d.verify_iterative())
                }
                DescentFile::Table(t) => {
                    let delta = t.derivation();
                    (t.verify_descent(&delta), t.verify_iterative())
                }
            };
            print_report("shift law", &shift);
            print_report("product law", &iterative);
            Ok(shift.passed() && iterative.passed())
        }
        DescentCmd::Classify { session } => {
            let candidate = match load_descent_file(&session)? {
                DescentFile::Generators(d) => d,
                DescentFile::Table(_) => {
                    return Err(Error::Invalid(
                        "classification takes the generator form".into(),
                    ))
                }
            };
            let reference = Descent::canonical(
                candidate.p(),
                candidate.n(),
                candidate.level(),
                candidate.bounds(),
            );
            let delta = Derivation::new(candidate.p(), candidate.n(), candidate.level());
            let classification = classify(&delta, &reference, &candidate)?;
            if session.json {
                let grid = json::grid_to_json(&classification.lambdas);
                let doc = serde_json::json!({
                    "reference": classification.reference,
                    "lambdas": grid,
                });
                emit(&session, &doc.to_string())?;
            } else {
                let mut lines = vec![format!("reference: {}", classification.reference)];
                for (i, row) in classification.lambdas.iter().enumerate() {
                    for (k, lambda) in row.iter().enumerate() {
                        lines.push(format!("lambda[{}][{}] = {}", i + 1, k, lambda));
                    }
                }
                emit(&session, &lines.join("\n"))?;
            }
            Ok(true)
        }
        DescentCmd::Normalize { session } => {
            let raw = match load_descent_file(&session)? {
                DescentFile::Table(t) => t,
                DescentFile::Generators(d) => d.to_table(),
            };
            let reference = Descent::canonical(raw.p(), raw.n(), raw.level(), raw.bounds());
            let delta = raw.derivation();
            let normalized = normalize(&delta, &reference, &raw)?;
            emit(&session, &json::table_to_string(&normalized))?;
            Ok(true)
        }
    }
}

fn parse_axis(text: &str, what: &str) -> Result<usize, Error> {
    let v: usize = text
        .parse()
        .map_err(|_| Error::Invalid(format!("{what} must be a positive integer, got '{text}'")))?;
    if v == 0 {
        return Err(Error::Invalid(format!("{what} is 1-based, got 0")));
    }
    Ok(v - 1)
}

fn parse_level(text: &str) -> Result<u32, Error> {
    text.parse()
        .map_err(|_| Error::Invalid(format!("level must be a natural number, got '{text}'")))
}

fn parse_levels(text: &str) -> Result<Vec<u32>, Error> {
    text.split(',').map(parse_level).collect()
}

/// Parse a subalgebra name like `dp-centralizer:1:2` or `polynomials`.
fn parse_spec(text: &str, n: usize) -> Result<SubalgebraSpec, Error> {
    let mut parts = text.splitn(2, ':');
    let name = parts.next().unwrap_or_default();
    let rest = parts.next();
    let need = |what: &str| {
        rest.ok_or_else(|| Error::Invalid(format!("{name} needs {what}, e.g. {name}:{what}")))
    };
    let axis_level = |what: &str| -> Result<(usize, u32), Error> {
        let args = need(what)?;
        let mut it = args.splitn(2, ':');
        let axis = parse_axis(it.next().unwrap_or_default(), "axis")?;
        let level = parse_level(it.next().ok_or_else(|| {
            Error::Invalid(format!("{name} needs {what}, got only '{args}'"))
        })?)?;
        Ok((axis, level))
    };
    let joint = || -> Result<Vec<u32>, Error> {
        let levels = parse_levels(need("LEVELS")?)?;
        if levels.len() != n {
            return Err(Error::Invalid(format!(
                "expected {} comma-separated levels for n = {}, got {}",
                n,
                n,
                levels.len()
            )));
        }
        Ok(levels)
    };
    let spec = match name {
        "scalar-operators" => SubalgebraSpec::ScalarOperators,
        "polynomials" => SubalgebraSpec::Polynomials,
        "constants" => SubalgebraSpec::Constants,
        "dp-centralizer" => {
            let (axis, level) = axis_level("AXIS:LEVEL")?;
            SubalgebraSpec::DpCentralizer { axis, level }
        }
        "dp-centralizer-joint" => SubalgebraSpec::DpCentralizerJoint { levels: joint()? },
        "dp-centralizer-tower" => SubalgebraSpec::DpCentralizerTower {
            axis: parse_axis(need("AXIS")?, "axis")?,
        },
        "x-centralizer" => {
            let (axis, level) = axis_level("AXIS:LEVEL")?;
            SubalgebraSpec::XPowerCentralizer { axis, level }
        }
        "x-centralizer-joint" => SubalgebraSpec::XPowerCentralizerJoint { levels: joint()? },
        "frobenius-image-centralizer" => SubalgebraSpec::FrobeniusImageCentralizer {
            level: parse_level(need("LEVEL")?)?,
        },
        "dp-poly-kernel" => {
            let (axis, level) = axis_level("AXIS:LEVEL")?;
            SubalgebraSpec::DpPolyKernel { axis, level }
        }
        "dp-poly-kernel-joint" => SubalgebraSpec::DpPolyKernelJoint { levels: joint()? },
        "dp-poly-kernel-tower" => SubalgebraSpec::DpPolyKernelTower {
            axis: parse_axis(need("AXIS")?, "axis")?,
        },
        other => {
            return Err(Error::Invalid(format!(
                "unknown subalgebra '{other}' (see `struct member --help`)"
            )))
        }
    };
    if let SubalgebraSpec::DpCentralizer { axis, .. }
    | SubalgebraSpec::DpCentralizerTower { axis }
    | SubalgebraSpec::XPowerCentralizer { axis, .. }
    | SubalgebraSpec::DpPolyKernel { axis, .. }
    | SubalgebraSpec::DpPolyKernelTower { axis } = &spec
    {
        if *axis >= n {
            return Err(Error::Invalid(format!(
                "axis {} is outside the range 1..={}",
                axis + 1,
                n
            )));
        }
    }
    Ok(spec)
}

fn structure(cmd: StructCmd) -> Result<bool, Error> {
    match cmd {
        StructCmd::Member {
            session,
            spec,
            exprs,
        } => {
            let (p, n) = shape(&session)?;
            let spec = parse_spec(&spec, n)?;
            let a = one_expr(&exprs, p, n)?;
            let is_member = spec.member(&a);
            println!(
                "{}: {}",
                spec.describe(),
                if is_member { "member" } else { "not a member" }
            );
            Ok(is_member)
        }
        StructCmd::Basis { session, spec } => {
            let (p, n) = shape(&session)?;
            let spec = parse_spec(&spec, n)?;
            let bound = session.bounds.first().copied().unwrap_or(4);
            let basis = spec.basis_upto(p, n, bound);
            let text = if session.json {
                let docs: Vec<json::ElementJson> =
                    basis.iter().map(json::element_to_json).collect();
                serde_json::to_string(&docs).expect("serialization cannot fail")
            } else {
                basis
                    .iter()
                    .map(|b| b.to_string())
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            emit(&session, &text)?;
            Ok(true)
        }
        StructCmd::Decompose {
            session,
            exprs,
            side,
        } => {
            let side = match side.as_str() {
                "left" => Side::Left,
                "right" => Side::Right,
                other => {
                    return Err(Error::Invalid(format!(
                        "--side must be 'left' or 'right', got '{other}'"
                    )))
                }
            };
            let map = load_map(&session)?;
            if map.s() != 1 {
                return Err(Error::Invalid(
                    "the free-module decomposition requires a level-1 map".into(),
                ));
            }
            let a = one_expr(&exprs, map.p(), map.n())?;
            let decomposition = match decompose_over_frobenius_image(&map, &a, side) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("decomposition failed: {e}");
                    return Ok(false);
                }
            };
            if session.json {
                let docs: Vec<serde_json::Value> = decomposition
                    .nonzero()
                    .map(|((alpha, beta), c)| {
                        serde_json::json!({
                            "x": alpha.entries(),
                            "d": beta.entries(),
                            "coefficient": json::element_to_json(c),
                        })
                    })
                    .collect();
                emit(&session, &serde_json::Value::Array(docs).to_string())?;
            } else {
                let mut lines: Vec<String> = decomposition
                    .nonzero()
                    .map(|((alpha, beta), c)| {
                        let basis_el =
                            DiffOp::monomial(map.p(), map.n(), alpha, beta, 1);
                        format!("{basis_el} : {c}")
                    })
                    .collect();
                lines.push(format!(
                    "nonzero coefficients: {} of {}",
                    decomposition.nonzero().count(),
                    decomposition.basis_size()
                ));
                emit(&session, &lines.join("\n"))?;
            }
            Ok(true)
        }
        StructCmd::Rigidity { session } => {
            let candidate = if session.input.is_some() {
                match load_descent_file(&session)? {
                    DescentFile::Generators(d) => d,
                    DescentFile::Table(_) => {
                        return Err(Error::Invalid(
                            "rigidity takes the generator form".into(),
                        ))
                    }
                }
            } else {
                let (p, n) = shape(&session)?;
                let bounds = if session.bounds.is_empty() {
                    vec![2; n]
                } else {
                    session.bounds.clone()
                };
                Descent::canonical(p, n, 0, &bounds)
            };
            let report = rigidity_check(&candidate);
            print_report("rigidity", &report);
            Ok(report.passed())
        }
    }
}
