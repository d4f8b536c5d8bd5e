//! Finite exact linear combinations of monomials, diagonal evaluation,
//! compression and finitely supported diagonal states.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::monomials::Monomial;
use crate::scalar::{parse_rational, Scalar};
use crate::tuples::{Label, SequenceDesc, Tuple, TupleParseError};

/// Canonical form: no `Zero` keys and no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cylinder {tuple} is shorter than the longest tuple ({needed}) in the polynomial")]
pub struct CylinderTooShort {
    pub tuple: Tuple,
    pub needed: usize,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn monomial(m: Monomial) -> Self {
        Polynomial::term(Scalar::one(), m)
    }

    pub fn term(c: Scalar, m: Monomial) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(c, m);
        p
    }

    pub fn scalar(c: Scalar) -> Self {
        Polynomial::term(c, Monomial::projection(Tuple::empty()))
    }

    pub fn projection(a: Tuple) -> Self {
        Polynomial::monomial(Monomial::projection(a))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, c: Scalar, m: Monomial) {
        if m.is_zero() || c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(c.clone(), m.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, d) in &self.terms {
            out.add_term(c * d, m.clone());
        }
        out
    }

    pub fn multiply(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(c1 * c2, m1.multiply(m2));
            }
        }
        out
    }

    pub fn adjoint(&self) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(c.conj(), m.adjoint());
        }
        out
    }

    /// Length of the longest tuple occurring in any term (0 if none).
    pub fn max_tuple_len(&self) -> usize {
        self.terms.keys().map(Monomial::level).max().unwrap_or(0)
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.terms
            .keys()
            .flat_map(|m| m.tuples().flat_map(|t| t.labels().iter().copied()).collect::<Vec<_>>())
            .collect()
    }

    /// `g_p(x) = <p χ_x, χ_x>`.
    pub fn g_eval(&self, x: &SequenceDesc) -> Scalar {
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            if let Some(a) = m.as_projection() {
                if x.member(a) {
                    acc += c;
                }
            }
        }
        acc
    }

    /// The constant value of `g_p` on `X_t`, for `t` at least as long as
    /// every tuple in `p`.
    pub fn g_on_cylinder(&self, t: &Tuple) -> Result<Scalar, CylinderTooShort> {
        let needed = self.max_tuple_len();
        if t.len() < needed {
            return Err(CylinderTooShort {
                tuple: t.clone(),
                needed,
            });
        }
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            if let Some(a) = m.as_projection() {
                if t.extends(a) {
                    acc += c;
                }
            }
        }
        Ok(acc)
    }

    /// `P_alpha · p · P_alpha`.
    pub fn compress(&self, alpha: &Tuple) -> Polynomial {
        let proj = Polynomial::projection(alpha.clone());
        proj.multiply(self).multiply(&proj)
    }

    /// Serialized `(coefficient, monomial)` list, one pair per line.
    pub fn to_pairs_text(&self) -> String {
        self.terms
            .iter()
            .map(|(m, c)| format!("({c}, {m})\n"))
            .collect()
    }
}

impl From<Monomial> for Polynomial {
    fn from(m: Monomial) -> Self {
        Polynomial::monomial(m)
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    first: bool,
    c: &Scalar,
    m: &Monomial,
) -> fmt::Result {
    // Pull a sign out of real and pure-imaginary coefficients.
    let (negative, magnitude) = if c.is_real() {
        (c.re.is_negative(), Scalar::real(c.re.abs()))
    } else if c.re.is_zero() {
        (
            c.im.is_negative(),
            Scalar::new(BigRational::zero(), c.im.abs()),
        )
    } else {
        (false, c.clone())
    };
    match (first, negative) {
        (true, true) => f.write_str("-")?,
        (true, false) => {}
        (false, true) => f.write_str(" - ")?,
        (false, false) => f.write_str(" + ")?,
    }
    if magnitude == Scalar::one() {
        write!(f, "{m}")
    } else if magnitude == Scalar::i() {
        write!(f, "i {m}")
    } else {
        write!(f, "{magnitude} {m}")
    }
}

/// Expression text accepted back by the parser, e.g. `2 P((1)) - i V((1);(2))`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            write_term(f, i == 0, c, m)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("state needs at least one support point")]
    Empty,
    #[error("weight {0} is not strictly positive")]
    NonPositiveWeight(String),
    #[error("weights sum to {0}, not 1")]
    BadTotal(String),
    #[error("support point {0} listed twice")]
    Duplicate(String),
    #[error("malformed state item {0:?}: expected `weight @ (prefix)/tail`")]
    Malformed(String),
    #[error(transparent)]
    Tuple(#[from] TupleParseError),
}

/// Finite convex combination of basis vector states `<· χ_x, χ_x>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiagonalState {
    support: Vec<(SequenceDesc, BigRational)>,
}

impl DiagonalState {
    pub fn new(support: Vec<(SequenceDesc, BigRational)>) -> Result<Self, StateError> {
        if support.is_empty() {
            return Err(StateError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut total = BigRational::zero();
        for (x, w) in &support {
            if !w.is_positive() {
                return Err(StateError::NonPositiveWeight(w.to_string()));
            }
            if !seen.insert(x.clone()) {
                return Err(StateError::Duplicate(x.to_string()));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(StateError::BadTotal(total.to_string()));
        }
        Ok(DiagonalState { support })
    }

    /// The vector state of a single point.
    pub fn point(x: SequenceDesc) -> Self {
        DiagonalState {
            support: vec![(x, BigRational::one())],
        }
    }

    pub fn support(&self) -> &[(SequenceDesc, BigRational)] {
        &self.support
    }

    pub fn eval(&self, p: &Polynomial) -> Scalar {
        let mut acc = Scalar::zero();
        for (x, w) in &self.support {
            acc += &(&Scalar::real(w.clone()) * &p.g_eval(x));
        }
        acc
    }

    /// All `b` with `1 <= len(b) <= max_len` and `ρ(P_b) != 0`, sorted.
    pub fn support_set(&self, max_len: usize) -> Vec<Tuple> {
        let mut out = BTreeSet::new();
        for (x, _) in &self.support {
            for n in 1..=max_len {
                out.insert(x.head(n));
            }
        }
        out.into_iter().collect()
    }
}

impl fmt::Display for DiagonalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, w)) in self.support.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{w} @ {x}")?;
        }
        Ok(())
    }
}

impl FromStr for DiagonalState {
    type Err = StateError;

    /// `weight @ prefix-tuple / tail-label` items separated by `;`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut support = Vec::new();
        for item in s.split(';') {
            if item.trim().is_empty() {
                continue;
            }
            let (w, x) = item
                .split_once('@')
                .ok_or_else(|| StateError::Malformed(item.trim().to_string()))?;
            let w = parse_rational(w).map_err(|_| StateError::Malformed(item.trim().to_string()))?;
            support.push((x.parse::<SequenceDesc>()?, w));
        }
        DiagonalState::new(support)
    }
}
