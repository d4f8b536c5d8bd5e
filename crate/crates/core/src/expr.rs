//! Surface syntax for *-polynomials.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (['*'] factor)*
//! factor := atom '\''*
//! atom   := scalar | 'P' '(' tuple ')' | 'V' '(' tuple ';' tuple ')' | '(' expr ')'
//! scalar := int ['/' int] ['i'] | 'i'
//! tuple  := '(' [int (',' int)*] ')'
//! ```
//!
//! Whitespace is insignificant. Adjoint binds tighter than product, product
//! tighter than sum. A bare scalar denotes a multiple of the unit `P(())`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::monomials::Monomial;
use crate::polynomials::Polynomial;
use crate::scalar::Scalar;
use crate::tuples::{Label, Tuple};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Scalar(Scalar),
    Projection(Tuple),
    Isometry(Tuple, Tuple),
    Adjoint(Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Negate(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: tuple length mismatch in V({domain};{range})")]
    LengthMismatch {
        line: usize,
        column: usize,
        domain: Tuple,
        range: Tuple,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Slash,
    I,
    P,
    V,
    LParen,
    RParen,
    Comma,
    Semi,
    Quote,
    Star,
    Plus,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Slash => f.write_str("/"),
            Tok::I => f.write_str("i"),
            Tok::P => f.write_str("P"),
            Tok::V => f.write_str("V"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Comma => f.write_str(","),
            Tok::Semi => f.write_str(";"),
            Tok::Quote => f.write_str("'"),
            Tok::Star => f.write_str("*"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
        }
    }
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    src_len: usize,
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |nl| {
        before[nl + 1..].chars().count()
    }) + 1;
    (line, column)
}

fn syntax(src: &str, offset: usize, message: impl Into<String>) -> ParseError {
    let (line, column) = position(src, offset);
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let mut toks = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '0'..='9' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let n: BigInt = src[i..end].parse().expect("digits");
                toks.push((Tok::Int(n), i));
                continue;
            }
            '/' => Tok::Slash,
            'i' => Tok::I,
            'P' => Tok::P,
            'V' => Tok::V,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '\'' => Tok::Quote,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            other => return Err(syntax(src, i, format!("unexpected character {other:?}"))),
        };
        toks.push((tok, i));
        chars.next();
    }
    Ok(Lexed {
        toks,
        src_len: src.len(),
    })
}

struct Parser<'a> {
    src: &'a str,
    lexed: Lexed,
    pos: usize,
}

fn constant(e: &Expr) -> Option<Scalar> {
    match e {
        Expr::Scalar(c) => Some(c.clone()),
        Expr::Negate(x) => constant(x).map(|c| -c),
        Expr::Sum(l, r) => Some(&constant(l)? + &constant(r)?),
        Expr::Difference(l, r) => Some(&constant(l)? - &constant(r)?),
        _ => None,
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.lexed.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.lexed
            .toks
            .get(self.pos)
            .map_or(self.lexed.src_len, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.lexed.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        syntax(self.src, self.offset(), message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found `{t}`")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{tok}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            Expr::Negate(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Sum(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Difference(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Int(_) | Tok::I | Tok::P | Tok::V | Tok::LParen)
        )
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            } else if !self.starts_atom() {
                return Ok(lhs);
            }
            lhs = Expr::Product(Box::new(lhs), Box::new(self.factor()?));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        while self.peek() == Some(&Tok::Quote) {
            self.pos += 1;
            e = Expr::Adjoint(Box::new(e));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::I) => self.scalar().map(Expr::Scalar),
            Some(Tok::P) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let t = self.tuple()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Projection(t))
            }
            Some(Tok::V) => {
                let at = self.offset();
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let a = self.tuple()?;
                self.expect(Tok::Semi)?;
                let b = self.tuple()?;
                self.expect(Tok::RParen)?;
                if a.len() != b.len() {
                    let (line, column) = position(self.src, at);
                    return Err(ParseError::LengthMismatch {
                        line,
                        column,
                        domain: a,
                        range: b,
                    });
                }
                Ok(Expr::Isometry(a, b))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                // `(1/2 - 3/4i)` and `(-1)` are single scalar literals.
                Ok(constant(&e).map_or(e, Expr::Scalar))
            }
            _ => Err(self.unexpected("a scalar, `P(`, `V(` or `(`")),
        }
    }

    fn scalar(&mut self) -> Result<Scalar, ParseError> {
        let value = match self.bump() {
            Some(Tok::I) => return Ok(Scalar::i()),
            Some(Tok::Int(n)) => {
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.bump() {
                        Some(Tok::Int(d)) if !d.is_zero() => BigRational::new(n, d),
                        Some(Tok::Int(_)) => {
                            self.pos -= 1;
                            return Err(self.error("zero denominator"));
                        }
                        _ => {
                            self.pos -= 1;
                            return Err(self.unexpected("a denominator"));
                        }
                    }
                } else {
                    BigRational::from_integer(n)
                }
            }
            _ => unreachable!("scalar called off a scalar token"),
        };
        if self.peek() == Some(&Tok::I) {
            self.pos += 1;
            Ok(Scalar::new(BigRational::zero(), value))
        } else {
            Ok(Scalar::real(value))
        }
    }

    fn tuple(&mut self) -> Result<Tuple, ParseError> {
        self.expect(Tok::LParen)?;
        let mut labels = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(Tuple::new(labels));
        }
        loop {
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let v = u64::try_from(n).map_err(|_| {
                        self.pos -= 1;
                        self.error("label out of range")
                    })?;
                    labels.push(Label(v));
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("a label"));
                }
            }
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(Tuple::new(labels)),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("`,` or `)`"));
                }
            }
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let lexed = lex(src)?;
    let mut p = Parser { src, lexed, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

/// Parses and evaluates in one step.
pub fn parse_polynomial(src: &str) -> Result<Polynomial, ParseError> {
    parse(src).map(|e| e.eval())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a word of monomials: {0}")]
pub struct NotAWord(pub String);

impl Expr {
    pub fn eval(&self) -> Polynomial {
        match self {
            Expr::Scalar(c) => Polynomial::scalar(c.clone()),
            Expr::Projection(a) => Polynomial::projection(a.clone()),
            Expr::Isometry(a, b) => Polynomial::monomial(Monomial::V {
                domain: a.clone(),
                range: b.clone(),
            }),
            Expr::Adjoint(e) => e.eval().adjoint(),
            Expr::Product(l, r) => l.eval().multiply(&r.eval()),
            Expr::Sum(l, r) => l.eval().add(&r.eval()),
            Expr::Difference(l, r) => l.eval().sub(&r.eval()),
            Expr::Negate(e) => e.eval().scale(&Scalar::from_int(-1)),
        }
    }

    /// Flattens a product of `P`/`V` atoms (adjoints allowed) into the list
    /// of its factors, leftmost first.
    pub fn as_word(&self) -> Result<Vec<Monomial>, NotAWord> {
        match self {
            Expr::Projection(a) => Ok(vec![Monomial::projection(a.clone())]),
            Expr::Isometry(a, b) => Ok(vec![Monomial::V {
                domain: a.clone(),
                range: b.clone(),
            }]),
            Expr::Adjoint(e) => {
                let mut w = e.as_word()?;
                w.reverse();
                Ok(w.iter().map(Monomial::adjoint).collect())
            }
            Expr::Product(l, r) => {
                let mut w = l.as_word()?;
                w.extend(r.as_word()?);
                Ok(w)
            }
            other => Err(NotAWord(other.to_string())),
        }
    }

    pub fn from_monomial(m: &Monomial) -> Expr {
        match m {
            Monomial::Zero => Expr::Scalar(Scalar::zero()),
            Monomial::V { domain, range } if domain == range => Expr::Projection(domain.clone()),
            Monomial::V { domain, range } => Expr::Isometry(domain.clone(), range.clone()),
        }
    }

    /// Sum of `coefficient * monomial` terms; `0` for the zero polynomial.
    pub fn from_polynomial(p: &Polynomial) -> Expr {
        let mut terms = p.terms().map(|(m, c)| {
            let atom = Expr::from_monomial(m);
            if *c == Scalar::one() {
                atom
            } else {
                Expr::Scalar(c.clone()).product(atom)
            }
        });
        let first = terms.next().unwrap_or(Expr::Scalar(Scalar::zero()));
        terms.fold(first, |acc, t| Expr::Sum(Box::new(acc), Box::new(t)))
    }

    /// Product of the factors of a non-empty word.
    pub fn from_word(word: &[Monomial]) -> Expr {
        let mut it = word.iter().map(Expr::from_monomial);
        let first = it.next().unwrap_or(Expr::Scalar(Scalar::one()));
        it.fold(first, Expr::product)
    }

    pub fn product(self, rhs: Expr) -> Expr {
        Expr::Product(Box::new(self), Box::new(rhs))
    }

    pub fn adjoint(self) -> Expr {
        Expr::Adjoint(Box::new(self))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(..) | Expr::Difference(..) | Expr::Negate(_) => 0,
            Expr::Product(..) => 1,
            Expr::Scalar(c) if !c.is_real() && !c.re.is_zero() => 3,
            Expr::Scalar(c) if c.re < BigRational::zero() || c.im < BigRational::zero() => 0,
            _ => 2,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Scalar(c) => write!(f, "{c}"),
            Expr::Projection(a) => write!(f, "P({a})"),
            Expr::Isometry(a, b) => write!(f, "V({a};{b})"),
            Expr::Adjoint(e) => {
                e.write_at(f, 2)?;
                f.write_str("'")
            }
            Expr::Product(l, r) => {
                l.write_at(f, 1)?;
                f.write_str(" * ")?;
                r.write_at(f, 2)
            }
            Expr::Sum(l, r) => {
                l.write_at(f, 0)?;
                f.write_str(" + ")?;
                r.write_at(f, 1)
            }
            Expr::Difference(l, r) => {
                l.write_at(f, 0)?;
                f.write_str(" - ")?;
                r.write_at(f, 1)
            }
            Expr::Negate(e) => {
                f.write_str("-")?;
                e.write_at(f, 1)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl From<Scalar> for Expr {
    fn from(c: Scalar) -> Self {
        Expr::Scalar(c)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t<const N: usize>(v: [u64; N]) -> Tuple {
        Tuple::from(v)
    }

    #[test]
    fn product_with_adjoint() {
        let e = parse("P((1)) * V((1);(2))'").unwrap();
        assert_eq!(
            e,
            Expr::Product(
                Box::new(Expr::Projection(t([1]))),
                Box::new(Expr::Adjoint(Box::new(Expr::Isometry(t([1]), t([2])))))
            )
        );
        assert_eq!(
            e.eval(),
            Polynomial::monomial(Monomial::new(t([2]), t([1])).unwrap())
        );
    }

    #[test]
    fn mixture() {
        let p = parse_polynomial("1/2 P((1)) + 1/2 P((2))").unwrap();
        let expected = Polynomial::projection(t([1]))
            .add(&Polynomial::projection(t([2])))
            .scale(&Scalar::ratio(1, 2));
        assert_eq!(p, expected);
    }

    #[test]
    fn juxtaposition_is_product() {
        let p = parse_polynomial("V((1);(2)) V((3);(1))").unwrap();
        assert_eq!(p.to_string(), "V((3);(2))");
    }

    #[test]
    fn imaginary_scalars() {
        let p = parse_polynomial("3/4 i P((1)) - i V((1);(2))").unwrap();
        assert_eq!(p.to_string(), "3/4i P((1)) - i V((1);(2))");
        let q = parse_polynomial("(1/2 + 3/4i) P((1))").unwrap();
        assert_eq!(q.to_string(), "(1/2 + 3/4i) P((1))");
        assert_eq!(parse_polynomial(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn length_mismatch() {
        let err = parse("V((1);(2,3))").unwrap_err();
        assert!(matches!(err, ParseError::LengthMismatch { line: 1, column: 1, .. }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("P((1)) +\n  Q") {
            Err(ParseError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match parse("P((1)") {
            Err(ParseError::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 6)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("1/0 P((1))").is_err());
        assert!(parse("P((1,))").is_err());
        assert!(parse("").is_err());
        assert!(parse("P((1)) )").is_err());
    }

    #[test]
    fn precedence() {
        // Adjoint binds to V only; product before sum.
        let p = parse_polynomial("P((1)) + V((1);(2)) V((3);(1))'").unwrap();
        let expected = Polynomial::projection(t([1]))
            .add(&Polynomial::monomial(Monomial::new(t([1]), t([2])).unwrap()).multiply(
                &Polynomial::monomial(Monomial::new(t([1]), t([3])).unwrap()),
            ));
        assert_eq!(p, expected);
        assert_eq!(
            parse_polynomial("-P((1)) - P((2))").unwrap(),
            Polynomial::projection(t([1]))
                .add(&Polynomial::projection(t([2])))
                .scale(&Scalar::from_int(-1))
        );
    }

    #[test]
    fn words() {
        let w = parse("V((1);(2)) P((2))' (V((3);(1)) P((3)))'").unwrap().as_word().unwrap();
        assert_eq!(
            w,
            vec![
                Monomial::new(t([1]), t([2])).unwrap(),
                Monomial::projection(t([2])),
                Monomial::projection(t([3])),
                Monomial::new(t([1]), t([3])).unwrap(),
            ]
        );
        assert!(parse("2 P((1))").unwrap().as_word().is_err());
        assert!(parse("P((1)) + P((2))").unwrap().as_word().is_err());
    }

    #[test]
    fn printer_parenthesises() {
        let e = parse("(P((1)) + P((2))) * V((1);(2))' - -1/2 P((3))").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { .. }));
        let e = parse("(P((1)) + P((2))) * (V((1);(2)) - P((1)))'").unwrap();
        assert_eq!(e.to_string(), "(P((1)) + P((2))) * (V((1);(2)) - P((1)))'");
        assert_eq!(parse(&e.to_string()).unwrap(), e);
        let neg = Expr::Scalar(Scalar::ratio(-1, 2)).product(Expr::Projection(t([1])));
        assert_eq!(neg.to_string(), "(-1/2) * P((1))");
        assert_eq!(parse(&neg.to_string()).unwrap().eval(), neg.eval());
    }
}
