//! The *-semigroup of prefix-rewriting partial isometries.
//!
//! `V(a, b)` has domain projection `P_a` and range projection `P_b`: it sends
//! the basis vector of a sequence beginning with `a` to the basis vector of
//! the same sequence with that initial segment replaced by `b`. Products are
//! operator compositions with the right factor acting first.

use std::fmt;

use thiserror::Error;

use crate::tuples::{Compatibility, SequenceDesc, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("partial isometry needs equal-length tuples, got {domain} and {range}")]
pub struct LengthMismatch {
    pub domain: Tuple,
    pub range: Tuple,
}

/// Either the zero operator or a single `V(domain, range)` with
/// `domain.len() == range.len()`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monomial {
    Zero,
    V { domain: Tuple, range: Tuple },
}

impl Monomial {
    pub fn new(domain: Tuple, range: Tuple) -> Result<Self, LengthMismatch> {
        if domain.len() != range.len() {
            return Err(LengthMismatch { domain, range });
        }
        Ok(Monomial::V { domain, range })
    }

    /// `P_a = V(a, a)`.
    pub fn projection(a: Tuple) -> Self {
        Monomial::V {
            domain: a.clone(),
            range: a,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Monomial::Zero)
    }

    /// `Some(a)` if this is the projection `P_a`.
    pub fn as_projection(&self) -> Option<&Tuple> {
        match self {
            Monomial::V { domain, range } if domain == range => Some(domain),
            _ => None,
        }
    }

    pub fn domain(&self) -> Option<&Tuple> {
        match self {
            Monomial::V { domain, .. } => Some(domain),
            Monomial::Zero => None,
        }
    }

    pub fn range(&self) -> Option<&Tuple> {
        match self {
            Monomial::V { range, .. } => Some(range),
            Monomial::Zero => None,
        }
    }

    /// Common length of the domain and range tuples (0 for `Zero`).
    pub fn level(&self) -> usize {
        self.domain().map_or(0, Tuple::len)
    }

    pub fn adjoint(&self) -> Monomial {
        match self {
            Monomial::Zero => Monomial::Zero,
            Monomial::V { domain, range } => Monomial::V {
                domain: range.clone(),
                range: domain.clone(),
            },
        }
    }

    /// Composition `self ∘ rhs`.
    pub fn multiply(&self, rhs: &Monomial) -> Monomial {
        let (Monomial::V { domain: a, range: b }, Monomial::V { domain: c, range: d }) = (self, rhs)
        else {
            return Monomial::Zero;
        };
        // rhs sends prefix c to d, then self needs prefix a.
        match d.compatibility(a) {
            Compatibility::AExtendsB => {
                let s = d.suffix_after(a.len());
                Monomial::V {
                    domain: c.clone(),
                    range: b.concat(&s),
                }
            }
            Compatibility::BProperlyExtendsA => {
                let u = a.suffix_after(d.len());
                Monomial::V {
                    domain: c.concat(&u),
                    range: b.clone(),
                }
            }
            Compatibility::Disjoint => Monomial::Zero,
        }
    }

    /// Image of the basis vector `χ_x`, or `None` when it is sent to 0.
    pub fn act(&self, x: &SequenceDesc) -> Option<SequenceDesc> {
        match self {
            Monomial::Zero => None,
            Monomial::V { domain, range } => {
                if x.member(domain) {
                    Some(x.with_head(range))
                } else {
                    None
                }
            }
        }
    }

    /// Every tuple occurring in the monomial.
    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.domain().into_iter().chain(self.range())
    }
}

/// Left fold of [`Monomial::multiply`]; an empty word is rejected by
/// returning `None`.
pub fn normal_form<'a, I>(word: I) -> Option<Monomial>
where
    I: IntoIterator<Item = &'a Monomial>,
{
    let mut it = word.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, m| acc.multiply(m)))
}

/// Applies the factors of `word` to `x` right to left.
pub fn act_word(word: &[Monomial], x: &SequenceDesc) -> Option<SequenceDesc> {
    word.iter()
        .rev()
        .try_fold(x.clone(), |point, m| m.act(&point))
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Monomial::Zero => f.write_str("0"),
            Monomial::V { domain, range } if domain == range => write!(f, "P({domain})"),
            Monomial::V { domain, range } => write!(f, "V({domain};{range})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuples::Label;

    fn t<const N: usize>(v: [u64; N]) -> Tuple {
        Tuple::from(v)
    }

    fn v<const N: usize>(a: [u64; N], b: [u64; N]) -> Monomial {
        Monomial::new(t(a), t(b)).unwrap()
    }

    fn p<const N: usize>(a: [u64; N]) -> Monomial {
        Monomial::projection(t(a))
    }

    fn x<const N: usize>(pre: [u64; N], tail: u64) -> SequenceDesc {
        SequenceDesc::new(t(pre), Label(tail))
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(v([1], [2]).multiply(&v([3], [1])), v([3], [2]));
        assert_eq!(
            v([1, 2], [3, 4]).multiply(&v([5], [1])),
            v([5, 2], [3, 4])
        );
        assert_eq!(p([1]).multiply(&p([2])), Monomial::Zero);
        assert_eq!(p([1]).multiply(&p([1, 5])), p([1, 5]));
        assert_eq!(p([1, 5]).multiply(&p([1])), p([1, 5]));
        assert_eq!(Monomial::Zero.multiply(&p([1])), Monomial::Zero);
        assert_eq!(p([1]).multiply(&Monomial::Zero), Monomial::Zero);
    }

    #[test]
    fn multiply_examples_agree_with_point_action() {
        // (3,t..) -> (1,t..) -> (2,t..)
        let y = x([3, 6], 8);
        assert_eq!(v([3], [1]).act(&y), Some(x([1, 6], 8)));
        assert_eq!(v([1], [2]).act(&x([1, 6], 8)), Some(x([2, 6], 8)));
        assert_eq!(v([3], [2]).act(&y), Some(x([2, 6], 8)));

        let y = x([5, 2, 6], 8);
        let word = [v([1, 2], [3, 4]), v([5], [1])];
        assert_eq!(act_word(&word, &y), Some(x([3, 4, 6], 8)));
        assert_eq!(v([5, 2], [3, 4]).act(&y), Some(x([3, 4, 6], 8)));
        // (5,3,..) passes the first factor but misses (1,2).
        assert_eq!(act_word(&word, &x([5, 3], 8)), None);
        assert_eq!(v([5, 2], [3, 4]).act(&x([5, 3], 8)), None);
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(v([1], [2]).adjoint(), v([2], [1]));
        assert_eq!(p([1]).adjoint(), p([1]));
        assert_eq!(Monomial::Zero.adjoint(), Monomial::Zero);
    }

    #[test]
    fn normal_form_examples() {
        let w = [v([1], [2]), v([3], [1]), p([3])];
        assert_eq!(normal_form(&w), Some(v([3], [2])));
        assert_eq!(act_word(&w, &x([3, 4], 0)), Some(x([2, 4], 0)));
        assert_eq!(normal_form(&[p([1])]), Some(p([1])));
        // V((1),(2)) after V((2),(1)) returns to (1): the domain projection.
        assert_eq!(normal_form(&[v([2], [1]), v([1], [2])]), Some(p([1])));
        assert_eq!(normal_form(&[v([1], [2]), v([2], [1])]), Some(p([2])));
        assert_eq!(normal_form(&[]), None);
    }

    #[test]
    fn act_examples() {
        assert_eq!(v([1], [2]).act(&x([1, 7], 0)), Some(x([2, 7], 0)));
        assert_eq!(v([1], [2]).act(&x([3], 0)), None);
        assert_eq!(v([1, 9], [4, 4]).act(&x([1], 9)), Some(x([4, 4], 9)));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(Monomial::new(t([1]), t([2, 3])).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(v([1], [2]).to_string(), "V((1);(2))");
        assert_eq!(p([1, 5]).to_string(), "P((1,5))");
        assert_eq!(Monomial::Zero.to_string(), "0");
    }
}
