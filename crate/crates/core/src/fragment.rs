//! Exact finite matrices of polynomials on closed families of level-`n`
//! cylinders.
//!
//! The index set consists of level-`n` tuples. Each index `y` stands for the
//! point `y` followed by a constant padding label chosen outside every label
//! of the polynomials involved, so distinct indices are distinct points.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::polynomials::Polynomial;
use crate::scalar::Scalar;
use crate::tuples::{Label, SequenceDesc, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("level {level} is below the longest tuple length {needed}")]
    LevelTooLow { level: usize, needed: usize },
    #[error("index tuple {0} does not have the fragment level")]
    BadIndex(Tuple),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentMatrix {
    pub level: usize,
    pub pad: Label,
    pub index: Vec<Tuple>,
    /// Row-major; `entries[z][y] = <p χ_y, χ_z>`.
    pub entries: Vec<Vec<Scalar>>,
}

/// Least label above every label of `polys`.
pub fn padding_label(polys: &[&Polynomial]) -> Label {
    let max = polys
        .iter()
        .flat_map(|p| p.labels())
        .map(|l| l.0 + 1)
        .max()
        .unwrap_or(0);
    Label(max)
}

fn point(y: &Tuple, pad: Label) -> SequenceDesc {
    SequenceDesc::new(y.clone(), pad)
}

/// Closes the padded tuples of `polys` under the prefix rewrites of all
/// their monomials.
pub fn closed_index(
    polys: &[&Polynomial],
    level: usize,
    pad: Label,
) -> Result<Vec<Tuple>, FragmentError> {
    let needed = polys.iter().map(|p| p.max_tuple_len()).max().unwrap_or(0);
    if level < needed {
        return Err(FragmentError::LevelTooLow { level, needed });
    }
    let monomials: Vec<_> = polys
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()))
        .collect();
    let mut seen: BTreeSet<Tuple> = monomials
        .iter()
        .flat_map(|m| m.tuples().map(|t| t.padded(level, pad)).collect::<Vec<_>>())
        .collect();
    let mut frontier: Vec<Tuple> = seen.iter().cloned().collect();
    while let Some(y) = frontier.pop() {
        let x = point(&y, pad);
        for m in &monomials {
            if let Some(z) = m.act(&x) {
                let z = z.head(level);
                if seen.insert(z.clone()) {
                    frontier.push(z);
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

impl FragmentMatrix {
    /// Matrix of `p` on its own closed index set.
    pub fn of(p: &Polynomial, level: usize) -> Result<Self, FragmentError> {
        let pad = padding_label(&[p]);
        let index = closed_index(&[p], level, pad)?;
        Self::on_index(p, level, pad, index)
    }

    /// Matrix of `p` on a caller-supplied index set. Entries are computed
    /// by acting on basis points, never through monomial multiplication.
    pub fn on_index(
        p: &Polynomial,
        level: usize,
        pad: Label,
        index: Vec<Tuple>,
    ) -> Result<Self, FragmentError> {
        let needed = p.max_tuple_len();
        if level < needed {
            return Err(FragmentError::LevelTooLow { level, needed });
        }
        if let Some(bad) = index.iter().find(|t| t.len() != level) {
            return Err(FragmentError::BadIndex(bad.clone()));
        }
        let points: Vec<SequenceDesc> = index.iter().map(|y| point(y, pad)).collect();
        let mut entries = vec![vec![Scalar::zero(); index.len()]; index.len()];
        for (col, y) in points.iter().enumerate() {
            for (m, c) in p.terms() {
                if let Some(image) = m.act(y) {
                    if let Some(row) = points.iter().position(|z| *z == image) {
                        entries[row][col] += c;
                    }
                }
            }
        }
        Ok(FragmentMatrix {
            level,
            pad,
            index,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn entry(&self, row: &Tuple, col: &Tuple) -> Option<&Scalar> {
        let r = self.index.iter().position(|t| t == row)?;
        let c = self.index.iter().position(|t| t == col)?;
        Some(&self.entries[r][c])
    }

    pub fn multiply(&self, other: &FragmentMatrix) -> Result<FragmentMatrix, FragmentError> {
        if self.index != other.index {
            return Err(FragmentError::Dimension(self.dim(), other.dim()));
        }
        let n = self.dim();
        let mut entries = vec![vec![Scalar::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..n {
                    *cell += &(&self.entries[i][k] * &other.entries[k][j]);
                }
            }
        }
        Ok(FragmentMatrix {
            entries,
            ..self.clone()
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> FragmentMatrix {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| self.entries[j][i].conj()).collect())
            .collect();
        FragmentMatrix {
            entries,
            ..self.clone()
        }
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    /// True iff every off-diagonal entry is zero.
    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, e)| i == j || e.is_zero())
        })
    }

    /// Exact positive-semidefiniteness test by Hermitian Gaussian
    /// elimination over the complex rationals.
    ///
    /// A zero pivot forces its whole row to vanish; a negative pivot
    /// refutes.
    pub fn is_psd(&self) -> bool {
        if !self.is_hermitian() {
            return false;
        }
        let mut a = self.entries.clone();
        let n = a.len();
        for k in 0..n {
            let pivot = a[k][k].clone();
            if !pivot.is_real() || pivot.re.is_negative() {
                return false;
            }
            if pivot.re.is_zero() {
                if a[k][k + 1..].iter().any(|e| !e.is_zero()) {
                    return false;
                }
                continue;
            }
            let inv = pivot.inv().expect("nonzero pivot");
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let factor = &a[i][k] * &inv;
                for j in k..n {
                    let delta = &factor * &a[k][j];
                    a[i][j] = &a[i][j] - &delta;
                }
            }
        }
        true
    }
}

/// Row-major exact text: a header line then one line per row.
impl fmt::Display for FragmentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "matrix level={} pad={} dim={}",
            self.level,
            self.pad,
            self.dim()
        )?;
        let idx: Vec<String> = self.index.iter().map(Tuple::to_string).collect();
        writeln!(f, "index {}", idx.join(" "))?;
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(Scalar::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomials::Monomial;

    fn t<const N: usize>(v: [u64; N]) -> Tuple {
        Tuple::from(v)
    }

    fn vv<const N: usize>(a: [u64; N], b: [u64; N]) -> Polynomial {
        Monomial::new(t(a), t(b)).unwrap().into()
    }

    #[test]
    fn single_projection() {
        let m = FragmentMatrix::of(&Polynomial::projection(t([1])), 1).unwrap();
        assert_eq!(m.index, vec![t([1])]);
        assert_eq!(m.entries, vec![vec![Scalar::one()]]);
    }

    #[test]
    fn partial_isometry_is_off_diagonal() {
        let m = FragmentMatrix::of(&vv([1], [2]), 1).unwrap();
        assert_eq!(m.index, vec![t([1]), t([2])]);
        assert_eq!(m.entry(&t([2]), &t([1])), Some(&Scalar::one()));
        assert_eq!(m.entry(&t([1]), &t([2])), Some(&Scalar::zero()));
        assert_eq!(m.entry(&t([1]), &t([1])), Some(&Scalar::zero()));
    }

    #[test]
    fn short_tuples_are_padded() {
        let p = vv([1], [2]);
        let m = FragmentMatrix::of(&p, 2).unwrap();
        assert_eq!(m.pad, Label(3));
        assert_eq!(m.index, vec![t([1, 3]), t([2, 3])]);
    }

    #[test]
    fn level_below_tuple_length_rejected() {
        let err = FragmentMatrix::of(&vv([1, 2], [3, 4]), 1).unwrap_err();
        assert_eq!(err, FragmentError::LevelTooLow { level: 1, needed: 2 });
    }

    #[test]
    fn psd_examples() {
        let p = vv([1], [2]);
        let g = p.adjoint().multiply(&p);
        assert!(FragmentMatrix::of(&g, 1).unwrap().is_psd());
        assert!(!FragmentMatrix::of(&p, 1).unwrap().is_psd());
        let neg = Polynomial::projection(t([1])).scale(&Scalar::from_int(-1));
        assert!(!FragmentMatrix::of(&neg, 1).unwrap().is_psd());
        // [[1,1],[1,1]] is PSD but singular.
        let q = Polynomial::projection(t([1]))
            .add(&Polynomial::projection(t([2])))
            .add(&vv([1], [2]))
            .add(&vv([2], [1]));
        assert!(FragmentMatrix::of(&q, 1).unwrap().is_psd());
        // [[0,1],[1,0]] is not.
        let r = vv([1], [2]).add(&vv([2], [1]));
        assert!(!FragmentMatrix::of(&r, 1).unwrap().is_psd());
    }
}
