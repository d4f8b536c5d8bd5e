//! Labels, finite tuples and the prefix order on them.
//!
//! A tuple `a` of length `n` names the cylinder `X_a` of all sequences whose
//! first `n` coordinates are `a`. Coordinates are 1-indexed everywhere.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A coordinate value. Any finite set of labels leaves infinitely many free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Label(pub u64);

impl Label {
    /// Least label not contained in `used`.
    pub fn least_outside<'a, I>(used: I) -> Label
    where
        I: IntoIterator<Item = &'a Label>,
    {
        let mut taken: Vec<u64> = used.into_iter().map(|l| l.0).collect();
        taken.sort_unstable();
        taken.dedup();
        let mut candidate = 0u64;
        for t in taken {
            if t == candidate {
                candidate += 1;
            } else if t > candidate {
                break;
            }
        }
        Label(candidate)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Label {
    fn from(v: u64) -> Self {
        Label(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TupleParseError {
    #[error("expected `(` to open tuple in {0:?}")]
    MissingOpen(String),
    #[error("expected `)` to close tuple in {0:?}")]
    MissingClose(String),
    #[error("invalid label {0:?}")]
    BadLabel(String),
    #[error("expected `<tuple>/<label>` for a sequence, got {0:?}")]
    BadSequence(String),
}

/// Finite sequence of labels; the empty tuple names the whole space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tuple(Vec<Label>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compatibility {
    /// `a` extends `b` (includes `a == b`).
    AExtendsB,
    /// `b` extends `a` with strictly greater length.
    BProperlyExtendsA,
    /// The tuples differ at some common coordinate, so `P_a P_b = 0`.
    Disjoint,
}

impl Tuple {
    pub fn new(labels: Vec<Label>) -> Self {
        Tuple(labels)
    }

    pub fn empty() -> Self {
        Tuple(Vec::new())
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        Tuple(values.into_iter().map(Label).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    /// Coordinate `i` (1-indexed), or `None` past the end.
    pub fn coord(&self, i: usize) -> Option<Label> {
        if i == 0 {
            return None;
        }
        self.0.get(i - 1).copied()
    }

    /// First `n` coordinates. `n` must not exceed the length.
    pub fn prefix(&self, n: usize) -> Tuple {
        Tuple(self.0[..n].to_vec())
    }

    /// Coordinates after the first `n`.
    pub fn suffix_after(&self, n: usize) -> Tuple {
        Tuple(self.0[n..].to_vec())
    }

    pub fn concat(&self, other: &Tuple) -> Tuple {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Tuple(v)
    }

    pub fn push(&self, label: Label) -> Tuple {
        let mut v = self.0.clone();
        v.push(label);
        Tuple(v)
    }

    /// Pads with `fill` up to length `n`; longer tuples are returned unchanged.
    pub fn padded(&self, n: usize, fill: Label) -> Tuple {
        let mut v = self.0.clone();
        while v.len() < n {
            v.push(fill);
        }
        Tuple(v)
    }

    /// True iff `self` agrees with `other` on all of `other`'s coordinates.
    pub fn extends(&self, other: &Tuple) -> bool {
        self.len() >= other.len() && self.0[..other.len()] == other.0[..]
    }

    pub fn properly_extends(&self, other: &Tuple) -> bool {
        self.len() > other.len() && self.extends(other)
    }

    pub fn compatibility(&self, other: &Tuple) -> Compatibility {
        if self.extends(other) {
            Compatibility::AExtendsB
        } else if other.extends(self) {
            Compatibility::BProperlyExtendsA
        } else {
            Compatibility::Disjoint
        }
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for Tuple {
    type Err = TupleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .ok_or_else(|| TupleParseError::MissingOpen(s.to_string()))?
            .strip_suffix(')')
            .ok_or_else(|| TupleParseError::MissingClose(s.to_string()))?;
        if inner.trim().is_empty() {
            return Ok(Tuple::empty());
        }
        inner
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<u64>()
                    .map(Label)
                    .map_err(|_| TupleParseError::BadLabel(part.trim().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Tuple)
    }
}

impl<const N: usize> From<[u64; N]> for Tuple {
    fn from(values: [u64; N]) -> Self {
        Tuple::from_values(values)
    }
}

/// A point of `X` given by a finite prefix followed by a constant tail.
///
/// Trailing prefix entries equal to the tail are trimmed on construction, so
/// structural equality coincides with equality of the described sequences.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SequenceDesc {
    prefix: Tuple,
    tail: Label,
}

impl SequenceDesc {
    pub fn new(prefix: Tuple, tail: Label) -> Self {
        let mut labels = prefix.0;
        while labels.last() == Some(&tail) {
            labels.pop();
        }
        SequenceDesc {
            prefix: Tuple(labels),
            tail,
        }
    }

    pub fn prefix(&self) -> &Tuple {
        &self.prefix
    }

    pub fn tail(&self) -> Label {
        self.tail
    }

    /// Coordinate `i >= 1`.
    pub fn coordinate(&self, i: usize) -> Label {
        assert!(i >= 1, "coordinates are 1-indexed");
        self.prefix.coord(i).unwrap_or(self.tail)
    }

    /// First `n` coordinates as a tuple.
    pub fn head(&self, n: usize) -> Tuple {
        Tuple((1..=n).map(|i| self.coordinate(i)).collect())
    }

    /// Membership in the cylinder `X_a`.
    pub fn member(&self, a: &Tuple) -> bool {
        a.0.iter()
            .enumerate()
            .all(|(i, l)| self.coordinate(i + 1) == *l)
    }

    /// Replaces the first `replacement.len()` coordinates.
    pub fn with_head(&self, replacement: &Tuple) -> SequenceDesc {
        let n = replacement.len().max(self.prefix.len());
        let rest = self.head(n).suffix_after(replacement.len());
        SequenceDesc::new(replacement.concat(&rest), self.tail)
    }

    /// All labels mentioned by the description.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.prefix.0.iter().copied().chain(std::iter::once(self.tail))
    }
}

impl fmt::Display for SequenceDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.prefix, self.tail)
    }
}

impl FromStr for SequenceDesc {
    type Err = TupleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, tail) = s
            .trim()
            .rsplit_once('/')
            .ok_or_else(|| TupleParseError::BadSequence(s.to_string()))?;
        let prefix: Tuple = head.parse()?;
        let tail = tail
            .trim()
            .parse::<u64>()
            .map_err(|_| TupleParseError::BadSequence(s.to_string()))?;
        Ok(SequenceDesc::new(prefix, Label(tail)))
    }
}
