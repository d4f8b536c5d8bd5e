//! Online generator selection under the avoidance conditions.
//!
//! The registry is an append-only log. Each `link` request issues a
//! generator `V(a, b)` whose last coordinate is a label avoided by every
//! earlier generator and every earlier protected tuple at that coordinate;
//! each protection records a finite set of tuples that later generators
//! must steer clear of.
//!
//! Conditions checked by [`Registry::audit`], for a generator at stage `σ`
//! with length `n`:
//!
//! * (i) `len(a) = len(b) = n`;
//! * (ii) `a` and `b` properly extend the requested tuples;
//! * (iii) `a(n)` and `b(n)` lie outside `S ∪ T`, where `S` collects
//!   `a_τ(n), b_τ(n)` over earlier generators with `n <= n_τ` and `T`
//!   collects `c(n)` over earlier protected tuples with `n <= len(c)`.

use std::collections::BTreeSet;
use std::fmt;

use crate::monomials::Monomial;
use crate::polynomials::DiagonalState;
use crate::tuples::{Label, Tuple};

pub type Stage = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorRecord {
    pub stage: Stage,
    pub n: usize,
    pub a: Tuple,
    pub b: Tuple,
    pub requested: (Tuple, Tuple),
    /// The fresh label placed at coordinate `n` (and every filled coordinate).
    pub label: Label,
}

impl GeneratorRecord {
    /// `V_σ = V(a_σ, b_σ)`.
    pub fn monomial(&self) -> Monomial {
        Monomial::V {
            domain: self.a.clone(),
            range: self.b.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProtectionRecord {
    pub stage: Stage,
    pub tuples: Vec<Tuple>,
    /// The state and horizon the tuples were enumerated from, if any.
    pub source: Option<(DiagonalState, usize)>,
}

impl ProtectionRecord {
    pub fn horizon(&self) -> usize {
        match &self.source {
            Some((_, h)) => *h,
            None => self.tuples.iter().map(Tuple::len).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Record {
    Generator(GeneratorRecord),
    Protection(ProtectionRecord),
}

impl Record {
    pub fn stage(&self) -> Stage {
        match self {
            Record::Generator(g) => g.stage,
            Record::Protection(p) => p.stage,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditViolation {
    /// Stage number does not match the log position.
    StageOrder { position: usize, stage: Stage },
    /// Condition (i).
    Length { stage: Stage },
    /// Condition (ii).
    NotProperExtension { stage: Stage },
    /// `a(n) != b(n)` or the recorded label is not the one used.
    LabelMismatch { stage: Stage },
    /// Condition (iii): `label` at `coordinate` collides with an earlier
    /// record.
    Collision {
        stage: Stage,
        coordinate: usize,
        label: Label,
        earlier: Stage,
    },
}

impl std::error::Error for AuditViolation {}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditViolation::StageOrder { position, stage } => {
                write!(f, "record at position {position} carries stage {stage}")
            }
            AuditViolation::Length { stage } => {
                write!(f, "stage {stage}: tuple lengths differ from n")
            }
            AuditViolation::NotProperExtension { stage } => {
                write!(f, "stage {stage}: issued tuples do not properly extend the request")
            }
            AuditViolation::LabelMismatch { stage } => {
                write!(f, "stage {stage}: last coordinates disagree with the recorded label")
            }
            AuditViolation::Collision {
                stage,
                coordinate,
                label,
                earlier,
            } => write!(
                f,
                "stage {stage}: label {label} at coordinate {coordinate} collides with stage {earlier}"
            ),
        }
    }
}

/// Append-only log of generators and protections, stages `0, 1, 2, ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    log: Vec<Record>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// Builds a registry from raw records without any checks.
    pub fn from_records_unchecked(log: Vec<Record>) -> Self {
        Registry { log }
    }

    pub fn records(&self) -> &[Record] {
        &self.log
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn generators(&self) -> impl Iterator<Item = &GeneratorRecord> {
        self.log.iter().filter_map(|r| match r {
            Record::Generator(g) => Some(g),
            Record::Protection(_) => None,
        })
    }

    pub fn protections(&self) -> impl Iterator<Item = &ProtectionRecord> {
        self.log.iter().filter_map(|r| match r {
            Record::Protection(p) => Some(p),
            Record::Generator(_) => None,
        })
    }

    pub fn protection(&self, stage: Stage) -> Option<&ProtectionRecord> {
        match self.log.get(stage) {
            Some(Record::Protection(p)) => Some(p),
            _ => None,
        }
    }

    pub fn generator(&self, stage: Stage) -> Option<&GeneratorRecord> {
        match self.log.get(stage) {
            Some(Record::Generator(g)) => Some(g),
            _ => None,
        }
    }

    /// The generator whose monomial, or its adjoint, equals `m`.
    pub fn find_generator(&self, m: &Monomial) -> Option<(&GeneratorRecord, bool)> {
        let (Some(d), Some(r)) = (m.domain(), m.range()) else {
            return None;
        };
        self.generators().find_map(|g| {
            if g.a == *d && g.b == *r {
                Some((g, false))
            } else if g.b == *d && g.a == *r {
                Some((g, true))
            } else {
                None
            }
        })
    }

    /// Labels forbidden at `coordinate` for a generator issued after the
    /// first `before` records.
    pub fn avoided_labels(&self, before: usize, coordinate: usize) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for rec in &self.log[..before] {
            match rec {
                Record::Generator(g) if coordinate <= g.n => {
                    out.extend(g.a.coord(coordinate));
                    out.extend(g.b.coord(coordinate));
                }
                Record::Generator(_) => {}
                Record::Protection(p) => {
                    out.extend(p.tuples.iter().filter_map(|c| c.coord(coordinate)));
                }
            }
        }
        out
    }

    /// Issues the generator linking `P_alpha` and `P_beta`.
    pub fn link(&mut self, alpha: &Tuple, beta: &Tuple) -> GeneratorRecord {
        let stage = self.log.len();
        let n = alpha.len().max(beta.len()) + 1;
        let avoid = self.avoided_labels(stage, n);
        let r = Label::least_outside(&avoid);
        let record = GeneratorRecord {
            stage,
            n,
            a: alpha.padded(n, r),
            b: beta.padded(n, r),
            requested: (alpha.clone(), beta.clone()),
            label: r,
        };
        self.log.push(Record::Generator(record.clone()));
        record
    }

    /// Protects the support of `rho` up to length `horizon`.
    pub fn register_protection(&mut self, rho: &DiagonalState, horizon: usize) -> ProtectionRecord {
        let record = ProtectionRecord {
            stage: self.log.len(),
            tuples: rho.support_set(horizon),
            source: Some((rho.clone(), horizon)),
        };
        self.log.push(Record::Protection(record.clone()));
        record
    }

    /// Protects an explicit finite family of tuples.
    pub fn protect_tuples(&mut self, tuples: Vec<Tuple>) -> ProtectionRecord {
        let record = ProtectionRecord {
            stage: self.log.len(),
            tuples,
            source: None,
        };
        self.log.push(Record::Protection(record.clone()));
        record
    }

    /// The 1-tuple on whose generated ideal the protected state vanishes:
    /// the least label avoiding every first coordinate of generators up to
    /// the protection's stage and of the protected tuples.
    pub fn vanishing_tuple(&self, prot: &ProtectionRecord) -> Tuple {
        let mut avoid: BTreeSet<Label> = BTreeSet::new();
        for g in self.generators().filter(|g| g.stage <= prot.stage) {
            avoid.extend(g.a.coord(1));
            avoid.extend(g.b.coord(1));
        }
        avoid.extend(prot.tuples.iter().filter_map(|c| c.coord(1)));
        Tuple::new(vec![Label::least_outside(&avoid)])
    }

    /// Re-checks (i)-(iii) for every generator against the earlier log.
    pub fn audit(&self) -> Result<(), AuditViolation> {
        for (position, rec) in self.log.iter().enumerate() {
            if rec.stage() != position {
                return Err(AuditViolation::StageOrder {
                    position,
                    stage: rec.stage(),
                });
            }
            let Record::Generator(g) = rec else { continue };
            let stage = g.stage;
            if g.n == 0 || g.a.len() != g.n || g.b.len() != g.n {
                return Err(AuditViolation::Length { stage });
            }
            if !g.a.properly_extends(&g.requested.0) || !g.b.properly_extends(&g.requested.1) {
                return Err(AuditViolation::NotProperExtension { stage });
            }
            let (last_a, last_b) = (g.a.coord(g.n), g.b.coord(g.n));
            if last_a != Some(g.label) || last_b != Some(g.label) {
                return Err(AuditViolation::LabelMismatch { stage });
            }
            let n = g.n;
            for earlier in &self.log[..position] {
                let hit = match earlier {
                    Record::Generator(e) if n <= e.n => {
                        e.a.coord(n) == Some(g.label) || e.b.coord(n) == Some(g.label)
                    }
                    Record::Generator(_) => false,
                    Record::Protection(p) => p.tuples.iter().any(|c| c.coord(n) == Some(g.label)),
                };
                if hit {
                    return Err(AuditViolation::Collision {
                        stage,
                        coordinate: n,
                        label: g.label,
                        earlier: earlier.stage(),
                    });
                }
            }
        }
        Ok(())
    }
}
