//! Surface syntax for operator arithmetic, and the matching printers.
//!
//! Grammar (whitespace insignificant, errors carry line/column):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := nat | 'x'i | 'd'i'['nat']' | '(' expr ')' | factor '^' nat
//! ```
//!
//! `d<i>[k]` denotes the divided power ∂_i^{[k]}, never the plain power
//! ∂_i^k — the two differ by k!, and the divided power is the
//! primitive. Scalar literals are reduced mod p during evaluation.
//!
//! [`parse`] produces an [`Expr`] tree; [`Expr::eval`] turns it into a
//! [`DiffOp`] for a concrete prime and variable count, checking that
//! variable indices lie in 1..=n. [`parse_element`] combines the two.
//! The printers render elements in the same syntax the parser accepts
//! (`1 + x1*d1[1]`), so print ∘ parse ∘ print is idempotent.
//!
//! Implementation guards (documented, not part of the grammar): literal
//! divided-power orders and exponents are capped at 10^6 and evaluated
//! elements at canonical degree 2^24, so that exponent arithmetic stays
//! far from u32 overflow; breaching either cap is reported as a syntax
//! error at the offending position.

use crate::error::Error;
use crate::field::Prime;
use crate::index::MultiIndex;
use crate::ring::{DiffOp, Poly};
use std::fmt;

/// Largest literal accepted for a divided-power order or an exponent.
const LITERAL_CAP: u64 = 1_000_000;
/// Largest canonical degree an evaluated subexpression may reach.
const DEGREE_CAP: u64 = 1 << 24;

/// Parsed expression tree. Parenthesized groups fold into the tree
/// shape; every node knows enough to report positions during
/// evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// A natural-number literal (reduced mod p during evaluation).
    Scalar { value: u64 },
    /// `x<i>` with the surface (1-based) index.
    Var {
        index: u64,
        line: usize,
        column: usize,
    },
    /// `d<i>[k]` with the surface (1-based) index.
    DividedPower {
        index: u64,
        order: u32,
        line: usize,
        column: usize,
    },
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Power {
        base: Box<Expr>,
        exponent: u64,
        line: usize,
        column: usize,
    },
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Number(u64),
    Var(u64),
    Dp(u64),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(v) => write!(f, "number {v}"),
            Token::Var(i) => write!(f, "x{i}"),
            Token::Dp(i) => write!(f, "d{i}"),
            Token::Plus => write!(f, "'+'"),
            Token::Minus => write!(f, "'-'"),
            Token::Star => write!(f, "'*'"),
            Token::Caret => write!(f, "'^'"),
            Token::LParen => write!(f, "'('"),
            Token::RParen => write!(f, "')'"),
            Token::LBracket => write!(f, "'['"),
            Token::RBracket => write!(f, "']'"),
            Token::End => write!(f, "end of input"),
        }
    }
}

/// A token plus the line/column where it starts (1-based).
#[derive(Clone, Debug)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_whitespace(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.bump();
        }
    }

    fn number(&mut self) -> Result<u64, Error> {
        let (line, column) = (self.line, self.column);
        let mut value: u64 = 0;
        let mut seen = false;
        while let Some(c @ b'0'..=b'9') = self.peek() {
            seen = true;
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(c - b'0')))
                .ok_or(Error::Syntax {
                    line,
                    column,
                    message: "number does not fit in 64 bits".into(),
                })?;
            self.bump();
        }
        if !seen {
            return Err(self.err("expected digits"));
        }
        Ok(value)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, Error> {
        let mut out = Vec::new();
        loop {
            self.skip_whitespace();
            let (line, column) = (self.line, self.column);
            let token = match self.peek() {
                None => {
                    out.push(Spanned {
                        token: Token::End,
                        line,
                        column,
                    });
                    return Ok(out);
                }
                Some(b'0'..=b'9') => Token::Number(self.number()?),
                Some(b'x') => {
                    self.bump();
                    Token::Var(self.number()?)
                }
                Some(b'd') => {
                    self.bump();
                    Token::Dp(self.number()?)
                }
                Some(b'+') => {
                    self.bump();
                    Token::Plus
                }
                Some(b'-') => {
                    self.bump();
                    Token::Minus
                }
                Some(b'*') => {
                    self.bump();
                    Token::Star
                }
                Some(b'^') => {
                    self.bump();
                    Token::Caret
                }
                Some(b'(') => {
                    self.bump();
                    Token::LParen
                }
                Some(b')') => {
                    self.bump();
                    Token::RParen
                }
                Some(b'[') => {
                    self.bump();
                    Token::LBracket
                }
                Some(b']') => {
                    self.bump();
                    Token::RBracket
                }
                Some(c) => {
                    return Err(self.err(format!(
                        "unexpected character '{}'",
                        char::from(c)
                    )))
                }
            };
            out.push(Spanned {
                token,
                line,
                column,
            });
        }
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, message: impl Into<String>) -> Error {
        let here = self.peek();
        Error::Syntax {
            line: here.line,
            column: here.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<Spanned, Error> {
        if self.peek().token == want {
            Ok(self.bump())
        } else {
            Err(self.err_at(format!("expected {what}, found {}", self.peek().token)))
        }
    }

    fn literal(&mut self, what: &str, cap: u64) -> Result<(u64, usize, usize), Error> {
        let here = self.peek().clone();
        match here.token {
            Token::Number(v) => {
                if v > cap {
                    return Err(self.err_at(format!("{what} {v} exceeds the supported limit {cap}")));
                }
                self.bump();
                Ok((v, here.line, here.column))
            }
            ref t => Err(self.err_at(format!("expected {what}, found {t}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().token {
                Token::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sum(Box::new(lhs), Box::new(rhs));
                }
                Token::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Difference(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.factor()?;
        while self.peek().token == Token::Star {
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Product(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, Error> {
        let here = self.peek().clone();
        let mut base = match here.token {
            Token::Number(value) => {
                self.bump();
                Expr::Scalar { value }
            }
            Token::Var(index) => {
                self.bump();
                Expr::Var {
                    index,
                    line: here.line,
                    column: here.column,
                }
            }
            Token::Dp(index) => {
                self.bump();
                self.expect(Token::LBracket, "'['")?;
                let (order, _, _) = self.literal("divided-power order", LITERAL_CAP)?;
                self.expect(Token::RBracket, "']'")?;
                Expr::DividedPower {
                    index,
                    order: order as u32,
                    line: here.line,
                    column: here.column,
                }
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                inner
            }
            ref t => {
                return Err(self.err_at(format!(
                    "expected a number, x<i>, d<i>[k], or '(', found {t}"
                )))
            }
        };
        while self.peek().token == Token::Caret {
            let caret = self.bump();
            let (exponent, _, _) = self.literal("exponent", LITERAL_CAP)?;
            base = Expr::Power {
                base: Box::new(base),
                exponent,
                line: caret.line,
                column: caret.column,
            };
        }
        Ok(base)
    }
}

/// Parse a source string into an expression tree.
pub fn parse(source: &str) -> Result<Expr, Error> {
    let tokens = Lexer::new(source).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if parser.peek().token != Token::End {
        return Err(parser.err_at(format!(
            "expected end of input, found {}",
            parser.peek().token
        )));
    }
    Ok(expr)
}

fn check_axis(index: u64, n: usize, line: usize, column: usize) -> Result<usize, Error> {
    if index >= 1 && index <= n as u64 {
        Ok((index - 1) as usize)
    } else {
        Err(Error::Syntax {
            line,
            column,
            message: format!("index {index} is outside the range 1..={n}"),
        })
    }
}

fn check_degree(a: DiffOp, line: usize, column: usize) -> Result<DiffOp, Error> {
    if a.canonical_degree() > DEGREE_CAP {
        Err(Error::Syntax {
            line,
            column,
            message: format!(
                "the result's canonical degree exceeds the supported limit {DEGREE_CAP}"
            ),
        })
    } else {
        Ok(a)
    }
}

impl Expr {
    /// Evaluate for a concrete prime and variable count.
    pub fn eval(&self, p: Prime, n: usize) -> Result<DiffOp, Error> {
        match self {
            Expr::Scalar { value } => Ok(DiffOp::scalar(p, n, *value)),
            Expr::Var {
                index,
                line,
                column,
            } => {
                let i = check_axis(*index, n, *line, *column)?;
                Ok(DiffOp::var(p, n, i))
            }
            Expr::DividedPower {
                index,
                order,
                line,
                column,
            } => {
                let i = check_axis(*index, n, *line, *column)?;
                Ok(DiffOp::dpow(p, n, i, *order))
            }
            Expr::Sum(a, b) => Ok(&a.eval(p, n)? + &b.eval(p, n)?),
            Expr::Difference(a, b) => Ok(&a.eval(p, n)? - &b.eval(p, n)?),
            Expr::Product(a, b) => Ok(a.eval(p, n)?.mul(&b.eval(p, n)?)),
            Expr::Power {
                base,
                exponent,
                line,
                column,
            } => {
                let b = base.eval(p, n)?;
                if b.canonical_degree().saturating_mul(*exponent) > DEGREE_CAP {
                    return Err(Error::Syntax {
                        line: *line,
                        column: *column,
                        message: format!(
                            "the result's canonical degree exceeds the supported limit {DEGREE_CAP}"
                        ),
                    });
                }
                check_degree(b.pow(*exponent), *line, *column)
            }
        }
    }
}

/// Parse and evaluate in one step.
pub fn parse_element(source: &str, p: Prime, n: usize) -> Result<DiffOp, Error> {
    parse(source)?.eval(p, n)
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    c: u64,
) -> fmt::Result {
    let mut parts: Vec<String> = Vec::new();
    if c != 1 || (alpha.is_zero() && beta.is_zero()) {
        parts.push(c.to_string());
    }
    for (i, &e) in alpha.entries().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    for (i, &k) in beta.entries().iter().enumerate() {
        if k > 0 {
            parts.push(format!("d{}[{}]", i + 1, k));
        }
    }
    write!(f, "{}", parts.join("*"))
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, ((alpha, beta), c)) in self.terms().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write_term(f, alpha, beta, c.value())?;
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let beta = MultiIndex::zero(self.n());
        for (idx, (alpha, c)) in self.terms().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write_term(f, alpha, &beta, c.value())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn syntax_pos(e: Error) -> (usize, usize, String) {
        match e {
            Error::Syntax {
                line,
                column,
                message,
            } => (line, column, message),
            other => panic!("expected a syntax error, got {other}"),
        }
    }

    #[test]
    fn golden_examples() {
        let p = pr(2);
        // ∂x = x∂ + 1.
        let a = parse_element("d1[1]*x1", p, 1).unwrap();
        let want = &DiffOp::var(p, 1, 0).mul(&DiffOp::dpow(p, 1, 0, 1)) + &DiffOp::one(p, 1);
        assert_eq!(a, want);
        assert_eq!(a.to_string(), "1 + x1*d1[1]");

        let p5 = pr(5);
        let b = parse_element("x1^2 + 3*d2[4]", p5, 2).unwrap();
        assert_eq!(b.terms().count(), 2);
        assert_eq!(b.to_string(), "3*d2[4] + x1^2");
    }

    #[test]
    fn unclosed_bracket_position() {
        let (line, column, message) = syntax_pos(parse("d1[1").unwrap_err());
        assert_eq!((line, column), (1, 5), "{message}");
        assert!(message.contains("']'"), "{message}");
    }

    #[test]
    fn error_positions() {
        // Unexpected character.
        let (l, c, _) = syntax_pos(parse("x1 + y").unwrap_err());
        assert_eq!((l, c), (1, 6));
        // Missing operand.
        let (l, c, _) = syntax_pos(parse("x1 + ").unwrap_err());
        assert_eq!((l, c), (1, 6));
        // Trailing garbage.
        let (l, c, _) = syntax_pos(parse("x1 x2").unwrap_err());
        assert_eq!((l, c), (1, 4));
        // Empty input.
        let (l, c, _) = syntax_pos(parse("").unwrap_err());
        assert_eq!((l, c), (1, 1));
        // Newlines advance the line counter.
        let (l, c, _) = syntax_pos(parse("x1 +\n )").unwrap_err());
        assert_eq!((l, c), (2, 2));
        // 'x' without digits.
        let (l, c, _) = syntax_pos(parse("x + 1").unwrap_err());
        assert_eq!((l, c), (1, 2));
        // Index range errors carry the variable's position.
        let p = pr(2);
        let (l, c, m) = syntax_pos(parse_element("x1 + x3", p, 2).unwrap_err());
        assert_eq!((l, c), (1, 6));
        assert!(m.contains("1..=2"), "{m}");
        let (_, _, m) = syntax_pos(parse_element("x0", p, 2).unwrap_err());
        assert!(m.contains("outside the range"), "{m}");
        let (_, _, m) = syntax_pos(parse_element("d3[1]", p, 2).unwrap_err());
        assert!(m.contains("outside the range"), "{m}");
    }

    #[test]
    fn precedence_and_grouping() {
        let p = pr(2);
        // '*' binds tighter than '+', '^' tighter than '*'.
        let a = parse_element("x1 + x2*x1^2", p, 2).unwrap();
        let x1 = DiffOp::var(p, 2, 0);
        let x2 = DiffOp::var(p, 2, 1);
        assert_eq!(a, &x1 + &x2.mul(&x1.mul(&x1)));
        // Freshman's dream via grouping.
        let b = parse_element("(x1 + x2)^2", p, 2).unwrap();
        assert_eq!(b, &DiffOp::xpow(p, 2, 0, 2) + &DiffOp::xpow(p, 2, 1, 2));
        // Chained exponents are left-associative: (x^2)^3 = x^6.
        let c = parse_element("x1^2^3", p, 1).unwrap();
        assert_eq!(c, DiffOp::xpow(p, 1, 0, 6));
        // Subtraction; at p = 2 it coincides with addition.
        assert!(parse_element("x1 - x1", p, 1).unwrap().is_zero());
        assert_eq!(
            parse_element("1 - x1", p, 1).unwrap(),
            parse_element("1 + x1", p, 1).unwrap()
        );
    }

    #[test]
    fn scalars_reduce_mod_p() {
        let p = pr(5);
        assert_eq!(parse_element("7", p, 1).unwrap(), DiffOp::scalar(p, 1, 2));
        assert!(parse_element("5", p, 1).unwrap().is_zero());
        assert_eq!(parse_element("d1[0]", p, 1).unwrap(), DiffOp::one(p, 1));
        // Leading zeros are plain digits.
        assert_eq!(
            parse_element("x01", p, 2).unwrap(),
            DiffOp::var(p, 2, 0)
        );
    }

    #[test]
    fn size_guards() {
        let p = pr(2);
        let (_, _, m) = syntax_pos(parse("x1^2000000").unwrap_err());
        assert!(m.contains("exceeds the supported limit"), "{m}");
        let (_, _, m) = syntax_pos(parse("d1[2000000]").unwrap_err());
        assert!(m.contains("exceeds the supported limit"), "{m}");
        let (_, _, m) =
            syntax_pos(parse_element("x1^1000000^1000000", p, 1).unwrap_err());
        assert!(m.contains("canonical degree"), "{m}");
        let (_, _, m) = syntax_pos(parse("99999999999999999999").unwrap_err());
        assert!(m.contains("64 bits"), "{m}");
    }

    #[test]
    fn display_round_trips() {
        let p = pr(3);
        let mut rng = sample::rng_from_seed(23);
        for _ in 0..50 {
            let a = sample::random_diffop(p, 2, 6, 6, 4, &mut rng);
            let printed = a.to_string();
            let reparsed = parse_element(&printed, p, 2).unwrap();
            assert_eq!(reparsed, a, "{printed}");
            assert_eq!(reparsed.to_string(), printed);
        }
        assert_eq!(DiffOp::zero(p, 1).to_string(), "0");
        assert!(parse_element("0", p, 1).unwrap().is_zero());
        assert_eq!(DiffOp::scalar(p, 1, 2).to_string(), "2");
        let m = DiffOp::monomial(
            p,
            2,
            &MultiIndex::new(vec![1, 2]),
            &MultiIndex::new(vec![0, 3]),
            2,
        );
        assert_eq!(m.to_string(), "2*x1*x2^2*d2[3]");
        // Polynomials print through the same writer.
        let g = Poly::monomial(p, 2, &MultiIndex::new(vec![2, 1]), 2);
        assert_eq!(g.to_string(), "2*x1^2*x2");
    }
}
