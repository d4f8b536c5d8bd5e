//! Executable proof witnesses.
//!
//! Two pipelines:
//!
//! * **Ideal projections and linking.** From a positive element `q*q` and a
//!   point where its diagonal is positive, find a cylinder `alpha` on which
//!   the compression `P_alpha q*q P_alpha` is a nonzero multiple of
//!   `P_alpha`, so `P_alpha` lies in any ideal containing `q*q`. Two such
//!   projections are then joined by a freshly issued generator, and an
//!   explicit word exhibits the range projection of that generator inside
//!   both ideals.
//! * **Vanishing states.** For a protected state and its vanishing 1-tuple
//!   `a`, every nonzero product containing `P_a` is dominated by some `P_b`
//!   that the state annihilates. The witness follows the product right to
//!   left and records which case produced each `(b, n)`.
//!
//! Every witness carries enough data to be re-checked by plain normal-form
//! evaluation; see [`IdealWitness::verify`], [`PrimenessCertificate::verify`]
//! and [`verify_trace`].

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::expr::Expr;
use crate::monomials::{normal_form, Monomial};
use crate::oracle::{GeneratorRecord, ProtectionRecord, Registry, Stage};
use crate::polynomials::{DiagonalState, Polynomial};
use crate::scalar::Scalar;
use crate::tuples::{Label, SequenceDesc, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error("diagonal of q*q vanishes at {0}; supply a point where it is positive")]
    NotPositiveAt(SequenceDesc),
    #[error("q is zero")]
    ZeroInput,
    #[error("compression to {alpha} is not a nonzero multiple of P_alpha")]
    CompressionFailed { alpha: Tuple },
    #[error("stage {0} is not a protection record")]
    NotAProtection(Stage),
    #[error("{given} is not the vanishing tuple {expected} of protection {stage}")]
    WrongVanishingTuple {
        stage: Stage,
        given: Tuple,
        expected: Tuple,
    },
    #[error("word is empty")]
    EmptyWord,
    #[error("word has no factor equal to P{0}")]
    MissingPa(Tuple),
    #[error("factor {position} ({monomial}) is neither a projection nor a registered generator")]
    UnregisteredFactor { position: usize, monomial: Monomial },
    #[error("proof step failed at factor {position}: {detail}")]
    ProofGap { position: usize, detail: String },
    #[error("property ({property}) fails for b = {b}, n = {n}: {detail}")]
    PropertyFailed {
        property: u8,
        b: Tuple,
        n: usize,
        detail: String,
    },
    #[error("protection {stage} was not generated by this state")]
    StateMismatch { stage: Stage },
    #[error("n = {n} exceeds the protection horizon {horizon}")]
    HorizonInsufficient { n: usize, horizon: usize },
    #[error("state value {value} is nonzero for a certified word")]
    NonVanishing { value: Box<Scalar> },
    #[error("certificate check failed: {0}")]
    Certificate(String),
}

/// `P_alpha` belongs to the ideal generated by `q*q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealWitness {
    /// The element `q`; the positive source is `q*q`.
    pub q: Polynomial,
    pub source: Polynomial,
    /// Point at which the diagonal of the source is positive.
    pub point: SequenceDesc,
    /// One more than the longest tuple of `q`.
    pub n: usize,
    pub alpha_prime: Tuple,
    /// Coordinate `n` of `alpha`.
    pub label: Label,
    pub alpha: Tuple,
    pub scalar: Scalar,
    /// `scalar⁻¹ * P(alpha) * (q)' * (q) * P(alpha)`, which evaluates to `P(alpha)`.
    pub certificate: Expr,
}

/// The canonical witness expression for `P_alpha` from `q` and `scalar`.
pub fn ideal_certificate_expr(q: &Polynomial, alpha: &Tuple, scalar: &Scalar) -> Option<Expr> {
    let inv = scalar.inv()?;
    let q_expr = Expr::from_polynomial(q);
    Some(
        Expr::Scalar(inv)
            .product(Expr::Projection(alpha.clone()))
            .product(q_expr.clone().adjoint())
            .product(q_expr)
            .product(Expr::Projection(alpha.clone())),
    )
}

impl IdealWitness {
    /// Re-checks the certificate by evaluation alone.
    pub fn verify(&self) -> Result<(), TheoremError> {
        let expected = ideal_certificate_expr(&self.q, &self.alpha, &self.scalar)
            .ok_or_else(|| TheoremError::Certificate("scalar is zero".into()))?;
        if expected != self.certificate {
            return Err(TheoremError::Certificate(
                "witness expression does not have the compression shape".into(),
            ));
        }
        if self.certificate.eval() != Polynomial::projection(self.alpha.clone()) {
            return Err(TheoremError::Certificate(format!(
                "witness expression does not evaluate to P{}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Finds a projection in the ideal generated by `q*q`.
pub fn ideal_projection_witness(
    reg: &Registry,
    q: &Polynomial,
    x: &SequenceDesc,
) -> Result<IdealWitness, TheoremError> {
    if q.is_zero() {
        return Err(TheoremError::ZeroInput);
    }
    let source = q.adjoint().multiply(q);
    if !source.g_eval(x).is_positive_real() {
        return Err(TheoremError::NotPositiveAt(x.clone()));
    }
    let n = q.max_tuple_len() + 1;
    let alpha_prime = x.head(n - 1);
    let mut avoid = BTreeSet::new();
    for (m, _) in q.terms() {
        for t in m.tuples() {
            avoid.extend(t.coord(n));
        }
    }
    for p in reg.protections() {
        avoid.extend(p.tuples.iter().filter_map(|c| c.coord(n)));
    }
    let label = Label::least_outside(&avoid);
    let alpha = alpha_prime.push(label);
    let scalar = source
        .g_on_cylinder(&alpha)
        .expect("alpha is longer than every tuple of q");
    let target = Polynomial::projection(alpha.clone());
    if scalar.is_zero() || source.compress(&alpha) != target.scale(&scalar) {
        return Err(TheoremError::CompressionFailed { alpha });
    }
    let certificate =
        ideal_certificate_expr(q, &alpha, &scalar).expect("scalar checked nonzero above");
    Ok(IdealWitness {
        q: q.clone(),
        source,
        point: x.clone(),
        n,
        alpha_prime,
        label,
        alpha,
        scalar,
        certificate,
    })
}

/// `P_{b_σ}` lies in both ideals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimenessCertificate {
    pub witness1: IdealWitness,
    pub witness2: IdealWitness,
    pub generator: GeneratorRecord,
    pub product: Expr,
}

/// `[V P(a) W1 P(a) V'] * [P(b) W2 P(b)]`, with `W1`, `W2` the witness
/// expressions for `P_alpha` and `P_beta`.
pub fn primeness_product_expr(w1: &Expr, w2: &Expr, a: &Tuple, b: &Tuple) -> Expr {
    let v = Expr::Isometry(a.clone(), b.clone());
    let left = v
        .clone()
        .product(Expr::Projection(a.clone()))
        .product(w1.clone())
        .product(Expr::Projection(a.clone()))
        .product(v.adjoint());
    let right = Expr::Projection(b.clone())
        .product(w2.clone())
        .product(Expr::Projection(b.clone()));
    left.product(right)
}

impl PrimenessCertificate {
    pub fn claim(&self) -> Polynomial {
        Polynomial::projection(self.generator.b.clone())
    }

    /// Re-checks both witnesses, the generator's shape, and the product by
    /// evaluation.
    pub fn verify(&self) -> Result<(), TheoremError> {
        self.witness1.verify()?;
        self.witness2.verify()?;
        let g = &self.generator;
        if g.a.len() != g.n || g.b.len() != g.n {
            return Err(TheoremError::Certificate("generator tuples have wrong length".into()));
        }
        if g.requested != (self.witness1.alpha.clone(), self.witness2.alpha.clone()) {
            return Err(TheoremError::Certificate(
                "generator was not requested for the witness pair".into(),
            ));
        }
        if !g.a.properly_extends(&self.witness1.alpha) || !g.b.properly_extends(&self.witness2.alpha)
        {
            return Err(TheoremError::Certificate(
                "generator tuples do not properly extend the witnessed cylinders".into(),
            ));
        }
        let expected = primeness_product_expr(
            &self.witness1.certificate,
            &self.witness2.certificate,
            &g.a,
            &g.b,
        );
        if expected != self.product {
            return Err(TheoremError::Certificate("product expression has the wrong shape".into()));
        }
        if self.product.eval() != self.claim() {
            return Err(TheoremError::Certificate(format!(
                "product does not evaluate to P{}",
                g.b
            )));
        }
        Ok(())
    }
}

/// Links the two witnessed projections and builds the certificate.
pub fn primeness_witness(
    reg: &mut Registry,
    w1: &IdealWitness,
    w2: &IdealWitness,
) -> Result<PrimenessCertificate, TheoremError> {
    let generator = reg.link(&w1.alpha, &w2.alpha);
    let product = primeness_product_expr(&w1.certificate, &w2.certificate, &generator.a, &generator.b);
    let cert = PrimenessCertificate {
        witness1: w1.clone(),
        witness2: w2.clone(),
        generator,
        product,
    };
    cert.verify()?;
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// The whole product is `P_a`.
    Base,
    /// `P_a` is the leftmost factor of the product considered.
    LeftmostPa,
    /// A projection multiplies on the left; `(b, n)` is unchanged.
    UFactor,
    /// `n` exceeds the generator's length; its domain prefix of `b` is
    /// rewritten to its range.
    LongCase,
    /// A generator issued no later than the protection with `n` within its
    /// length; the product must vanish.
    ShortEarlierContradiction,
    /// A generator issued after the protection; `(b, n)` becomes its range
    /// tuple and length.
    ShortLater,
}

impl CaseTag {
    pub const ALL: [CaseTag; 6] = [
        CaseTag::Base,
        CaseTag::LeftmostPa,
        CaseTag::UFactor,
        CaseTag::LongCase,
        CaseTag::ShortEarlierContradiction,
        CaseTag::ShortLater,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Base => "Base",
            CaseTag::LeftmostPa => "LeftmostPa",
            CaseTag::UFactor => "UFactor",
            CaseTag::LongCase => "LongCase",
            CaseTag::ShortEarlierContradiction => "ShortEarlier-Contradiction",
            CaseTag::ShortLater => "ShortLater",
        }
    }

    pub fn from_name(s: &str) -> Option<CaseTag> {
        CaseTag::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma2Step {
    /// Index into the word, 0 = leftmost factor.
    pub position: usize,
    pub tag: CaseTag,
    pub b: Tuple,
    pub n: usize,
    /// Stage of the generator consumed at this step, if any.
    pub generator: Option<Stage>,
    /// The factor was the adjoint of that generator.
    pub adjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma2Trace {
    pub protection: Stage,
    pub a: Tuple,
    pub word: Vec<Monomial>,
    pub steps: Vec<Lemma2Step>,
    pub final_b: Tuple,
    pub final_n: usize,
}

/// The product vanished; carries the steps up to and including the factor
/// that annihilated it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroReport {
    pub protection: Stage,
    pub a: Tuple,
    pub word: Vec<Monomial>,
    pub position: usize,
    pub steps: Vec<Lemma2Step>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lemma2Outcome {
    Trace(Lemma2Trace),
    Zero(ZeroReport),
}

fn protection_of(reg: &Registry, stage: Stage) -> Result<&ProtectionRecord, TheoremError> {
    reg.protection(stage).ok_or(TheoremError::NotAProtection(stage))
}

/// Checks properties (2) and (3) for `(b, n)` against the protection.
pub fn check_avoidance(
    reg: &Registry,
    prot: &ProtectionRecord,
    b: &Tuple,
    n: usize,
) -> Result<(), TheoremError> {
    let Some(bn) = b.coord(n) else {
        return Err(TheoremError::PropertyFailed {
            property: 2,
            b: b.clone(),
            n,
            detail: "b is shorter than n".into(),
        });
    };
    for g in reg.generators().filter(|g| g.stage <= prot.stage && n <= g.n) {
        if g.a.coord(n) == Some(bn) || g.b.coord(n) == Some(bn) {
            return Err(TheoremError::PropertyFailed {
                property: 2,
                b: b.clone(),
                n,
                detail: format!("generator {} carries label {bn} at coordinate {n}", g.stage),
            });
        }
    }
    if let Some(c) = prot.tuples.iter().find(|c| c.coord(n) == Some(bn)) {
        return Err(TheoremError::PropertyFailed {
            property: 3,
            b: b.clone(),
            n,
            detail: format!("protected tuple {c} carries label {bn} at coordinate {n}"),
        });
    }
    Ok(())
}

struct Prepared<'r> {
    prot: &'r ProtectionRecord,
    /// Per factor: `None` for projections, else (generator, adjoint).
    factors: Vec<Option<(&'r GeneratorRecord, bool)>>,
    leftmost_pa: usize,
}

fn prepare<'r>(
    reg: &'r Registry,
    protection: Stage,
    a: &Tuple,
    word: &[Monomial],
) -> Result<Prepared<'r>, TheoremError> {
    let prot = protection_of(reg, protection)?;
    let expected = reg.vanishing_tuple(prot);
    if *a != expected {
        return Err(TheoremError::WrongVanishingTuple {
            stage: protection,
            given: a.clone(),
            expected,
        });
    }
    if word.is_empty() {
        return Err(TheoremError::EmptyWord);
    }
    let mut factors = Vec::with_capacity(word.len());
    for (position, m) in word.iter().enumerate() {
        if m.as_projection().is_some() {
            factors.push(None);
        } else {
            match reg.find_generator(m) {
                Some(found) => factors.push(Some(found)),
                None => {
                    return Err(TheoremError::UnregisteredFactor {
                        position,
                        monomial: m.clone(),
                    })
                }
            }
        }
    }
    let pa = Monomial::projection(a.clone());
    let leftmost_pa = word
        .iter()
        .position(|m| *m == pa)
        .ok_or_else(|| TheoremError::MissingPa(a.clone()))?;
    Ok(Prepared {
        prot,
        factors,
        leftmost_pa,
    })
}

/// Runs the inductive construction of `(b, n)` over `word`.
pub fn lemma2_witness(
    reg: &Registry,
    protection: Stage,
    a: &Tuple,
    word: &[Monomial],
) -> Result<Lemma2Outcome, TheoremError> {
    let prep = prepare(reg, protection, a, word)?;
    let start = prep.leftmost_pa;
    let mut steps = Vec::new();
    let zero = |position: usize, steps: Vec<Lemma2Step>| {
        Ok(Lemma2Outcome::Zero(ZeroReport {
            protection,
            a: a.clone(),
            word: word.to_vec(),
            position,
            steps,
        }))
    };

    let (mut b, mut n) = (a.clone(), 1usize);
    let tag = if start + 1 == word.len() {
        CaseTag::Base
    } else {
        CaseTag::LeftmostPa
    };
    steps.push(Lemma2Step {
        position: start,
        tag,
        b: b.clone(),
        n,
        generator: None,
        adjoint: false,
    });
    let mut running = normal_form(&word[start..]).expect("non-empty suffix");
    if running.is_zero() {
        return zero(start, steps);
    }

    for position in (0..start).rev() {
        let factor = &word[position];
        let next = factor.multiply(&running);
        let step = match prep.factors[position] {
            None => Lemma2Step {
                position,
                tag: CaseTag::UFactor,
                b: b.clone(),
                n,
                generator: None,
                adjoint: false,
            },
            Some((g, adjoint)) => {
                let (dom, ran) = if adjoint { (&g.b, &g.a) } else { (&g.a, &g.b) };
                let (tag, new_b, new_n, must_vanish) = if n > g.n {
                    if b.extends(dom) {
                        (CaseTag::LongCase, ran.concat(&b.suffix_after(g.n)), n, false)
                    } else {
                        (CaseTag::LongCase, b.clone(), n, true)
                    }
                } else if g.stage <= prep.prot.stage {
                    (CaseTag::ShortEarlierContradiction, b.clone(), n, true)
                } else {
                    (CaseTag::ShortLater, ran.clone(), g.n, false)
                };
                if must_vanish && !next.is_zero() {
                    return Err(TheoremError::ProofGap {
                        position,
                        detail: format!("{tag} step should annihilate the product but gives {next}"),
                    });
                }
                Lemma2Step {
                    position,
                    tag,
                    b: new_b,
                    n: new_n,
                    generator: Some(g.stage),
                    adjoint,
                }
            }
        };
        b = step.b.clone();
        n = step.n;
        steps.push(step);
        running = next;
        if running.is_zero() {
            return zero(position, steps);
        }
    }

    let trace = Lemma2Trace {
        protection,
        a: a.clone(),
        word: word.to_vec(),
        steps,
        final_b: b,
        final_n: n,
    };
    verify_trace(reg, &trace)?;
    Ok(Lemma2Outcome::Trace(trace))
}

/// Replays a trace step by step against the registry and checks the final
/// `(b, n)` for properties (1)-(3) by direct evaluation and scans.
pub fn verify_trace(reg: &Registry, trace: &Lemma2Trace) -> Result<(), TheoremError> {
    let prep = prepare(reg, trace.protection, &trace.a, &trace.word)?;
    let gap = |position: usize, detail: String| TheoremError::ProofGap { position, detail };
    let first = trace
        .steps
        .first()
        .ok_or_else(|| gap(0, "trace has no steps".into()))?;
    let expected_first = if prep.leftmost_pa + 1 == trace.word.len() {
        CaseTag::Base
    } else {
        CaseTag::LeftmostPa
    };
    if first.position != prep.leftmost_pa
        || first.tag != expected_first
        || first.b != trace.a
        || first.n != 1
    {
        return Err(gap(first.position, "first step must start at the leftmost P_a with (a, 1)".into()));
    }
    if trace.steps.len() != prep.leftmost_pa + 1 {
        return Err(gap(0, "trace must cover every factor left of P_a".into()));
    }
    let (mut b, mut n) = (trace.a.clone(), 1usize);
    for (k, step) in trace.steps.iter().enumerate().skip(1) {
        let position = prep.leftmost_pa - k;
        if step.position != position {
            return Err(gap(step.position, "steps must run right to left".into()));
        }
        let (tag, new_b, new_n, generator, adjoint) = match prep.factors[position] {
            None => (CaseTag::UFactor, b.clone(), n, None, false),
            Some((g, adjoint)) => {
                let (dom, ran) = if adjoint { (&g.b, &g.a) } else { (&g.a, &g.b) };
                if n > g.n {
                    if !b.extends(dom) {
                        return Err(gap(position, "long case with b outside the domain".into()));
                    }
                    (
                        CaseTag::LongCase,
                        ran.concat(&b.suffix_after(g.n)),
                        n,
                        Some(g.stage),
                        adjoint,
                    )
                } else if g.stage <= prep.prot.stage {
                    return Err(gap(position, "earlier short case cannot occur in a nonzero product".into()));
                } else {
                    (CaseTag::ShortLater, ran.clone(), g.n, Some(g.stage), adjoint)
                }
            }
        };
        if step.tag != tag
            || step.b != new_b
            || step.n != new_n
            || step.generator != generator
            || step.adjoint != adjoint
        {
            return Err(gap(position, format!("recorded step does not replay (expected {tag})")));
        }
        b = new_b;
        n = new_n;
    }
    if b != trace.final_b || n != trace.final_n {
        return Err(gap(0, "final (b, n) does not match the last step".into()));
    }

    let product = normal_form(&trace.word).expect("non-empty word");
    if product.is_zero() {
        return Err(gap(0, "the word is zero; a zero report is expected".into()));
    }
    if Monomial::projection(b.clone()).multiply(&product) != product {
        return Err(TheoremError::PropertyFailed {
            property: 1,
            b,
            n,
            detail: format!("P_b does not fix {product}"),
        });
    }
    check_avoidance(reg, prep.prot, &b, n)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VanishingClaim {
    /// No factor equals `P_a`; the value carries no claim.
    NoClaim,
    /// The word is zero.
    ZeroWord(ZeroReport),
    /// Certified by a trace whose `P_b` the state annihilates.
    Certified(Lemma2Trace),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishingReport {
    pub value: Scalar,
    pub claim: VanishingClaim,
}

/// Evaluates `rho` on the product and, when the word contains `P_a`,
/// certifies that the value is exactly zero.
pub fn vanishing_check(
    rho: &DiagonalState,
    reg: &Registry,
    protection: Stage,
    a: &Tuple,
    word: &[Monomial],
) -> Result<VanishingReport, TheoremError> {
    let prot = protection_of(reg, protection)?;
    let horizon = match &prot.source {
        Some((state, h)) if state == rho => *h,
        _ => return Err(TheoremError::StateMismatch { stage: protection }),
    };
    let product = normal_form(word).ok_or(TheoremError::EmptyWord)?;
    let a_poly = Polynomial::monomial(product.clone());
    let value = rho.eval(&a_poly);
    let outcome = match lemma2_witness(reg, protection, a, word) {
        Err(TheoremError::MissingPa(_)) => {
            return Ok(VanishingReport {
                value,
                claim: VanishingClaim::NoClaim,
            })
        }
        Err(e) => return Err(e),
        Ok(o) => o,
    };
    match outcome {
        Lemma2Outcome::Zero(report) => {
            if !value.is_zero() {
                return Err(TheoremError::NonVanishing { value: Box::new(value) });
            }
            Ok(VanishingReport {
                value,
                claim: VanishingClaim::ZeroWord(report),
            })
        }
        Lemma2Outcome::Trace(trace) => {
            if let Some(step) = trace.steps.iter().find(|s| s.n > horizon) {
                return Err(TheoremError::HorizonInsufficient {
                    n: step.n,
                    horizon,
                });
            }
            let pb = Polynomial::projection(trace.final_b.clone());
            let rho_pb = rho.eval(&pb);
            if !rho_pb.is_zero() {
                return Err(TheoremError::PropertyFailed {
                    property: 3,
                    b: trace.final_b.clone(),
                    n: trace.final_n,
                    detail: format!("state gives P_b the value {rho_pb}"),
                });
            }
            // |ρ(A)|² = |ρ(P_b A)|² <= ρ(P_b) ρ(A*A)
            let rho_pba = rho.eval(&pb.multiply(&a_poly));
            let rho_aa = rho.eval(&a_poly.adjoint().multiply(&a_poly));
            let bound = &rho_pb * &rho_aa;
            if rho_pba != value || !bound.is_real() || value.norm_sqr() > bound.re {
                return Err(TheoremError::NonVanishing { value: Box::new(value) });
            }
            if !value.re.is_zero() || !value.im.is_zero() {
                return Err(TheoremError::NonVanishing { value: Box::new(value) });
            }
            Ok(VanishingReport {
                value,
                claim: VanishingClaim::Certified(trace),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t<const N: usize>(v: [u64; N]) -> Tuple {
        Tuple::from(v)
    }

    fn x<const N: usize>(pre: [u64; N], tail: u64) -> SequenceDesc {
        SequenceDesc::new(t(pre), Label(tail))
    }

    fn p<const N: usize>(a: [u64; N]) -> Monomial {
        Monomial::projection(t(a))
    }

    #[test]
    fn projection_witness_from_projection() {
        let reg = Registry::new();
        let q = Polynomial::projection(t([1]));
        let w = ideal_projection_witness(&reg, &q, &x([1], 0)).unwrap();
        assert_eq!(w.n, 2);
        assert_eq!(w.alpha_prime, t([1]));
        assert_eq!(w.alpha, t([1, 0]));
        assert_eq!(w.scalar, Scalar::one());
        assert_eq!(w.source, q);
        w.verify().unwrap();
    }

    #[test]
    fn projection_witness_from_isometry() {
        let reg = Registry::new();
        let q: Polynomial = Monomial::new(t([1]), t([2])).unwrap().into();
        let w = ideal_projection_witness(&reg, &q, &x([1], 0)).unwrap();
        assert_eq!(w.source, Polynomial::projection(t([1])));
        assert_eq!(w.alpha, t([1, 0]));
        assert_eq!(w.scalar, Scalar::one());
        w.verify().unwrap();
    }

    #[test]
    fn projection_witness_avoids_protected_labels() {
        let mut reg = Registry::new();
        reg.protect_tuples(vec![t([1, 0]), t([1, 1])]);
        let q = Polynomial::projection(t([1]));
        let w = ideal_projection_witness(&reg, &q, &x([1], 0)).unwrap();
        assert_eq!(w.alpha, t([1, 2]));
    }

    #[test]
    fn projection_witness_needs_positive_point() {
        let reg = Registry::new();
        let q = Polynomial::projection(t([1]));
        assert_eq!(
            ideal_projection_witness(&reg, &q, &x([2], 0)),
            Err(TheoremError::NotPositiveAt(x([2], 0)))
        );
        assert_eq!(
            ideal_projection_witness(&reg, &Polynomial::zero(), &x([2], 0)),
            Err(TheoremError::ZeroInput)
        );
    }

    #[test]
    fn tampered_witness_rejected() {
        let reg = Registry::new();
        let q = Polynomial::projection(t([1]));
        let mut w = ideal_projection_witness(&reg, &q, &x([1], 0)).unwrap();
        w.scalar = Scalar::from_int(2);
        assert!(w.verify().is_err());
    }

    #[test]
    fn primeness_from_two_projections() {
        let mut reg = Registry::new();
        let w1 = ideal_projection_witness(&reg, &Polynomial::projection(t([1])), &x([1], 0)).unwrap();
        let w2 = ideal_projection_witness(&reg, &Polynomial::projection(t([2])), &x([2], 0)).unwrap();
        let cert = primeness_witness(&mut reg, &w1, &w2).unwrap();
        assert!(cert.generator.b.properly_extends(&t([2, w2.label.0])));
        assert_eq!(cert.product.eval(), cert.claim());
        assert!(reg.audit().is_ok());

        let same = primeness_witness(&mut reg, &w1, &w1).unwrap();
        same.verify().unwrap();
        assert!(reg.audit().is_ok());
    }

    #[test]
    fn tampered_certificate_rejected() {
        let mut reg = Registry::new();
        let w1 = ideal_projection_witness(&reg, &Polynomial::projection(t([1])), &x([1], 0)).unwrap();
        let w2 = ideal_projection_witness(&reg, &Polynomial::projection(t([2])), &x([2], 0)).unwrap();
        let mut cert = primeness_witness(&mut reg, &w1, &w2).unwrap();
        cert.generator.b = cert.generator.a.clone();
        assert!(cert.verify().is_err());
    }

    fn protected_registry() -> (Registry, Stage, Tuple, DiagonalState) {
        let mut reg = Registry::new();
        reg.link(&t([0]), &t([1]));
        let rho: DiagonalState = "1/2 @ (1,2)/0; 1/2 @ (3)/3".parse().unwrap();
        let prot = reg.register_protection(&rho, 4);
        let a = reg.vanishing_tuple(&prot);
        (reg, prot.stage, a, rho)
    }

    #[test]
    fn base_case() {
        let (reg, stage, a, rho) = protected_registry();
        // Generator 0 uses 0 and 1 at coordinate 1; the state uses 1 and 3.
        assert_eq!(a, t([2]));
        let word = vec![Monomial::projection(a.clone())];
        let Lemma2Outcome::Trace(trace) = lemma2_witness(&reg, stage, &a, &word).unwrap() else {
            panic!("expected trace");
        };
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].tag, CaseTag::Base);
        assert_eq!((trace.final_b.clone(), trace.final_n), (a.clone(), 1));
        let report = vanishing_check(&rho, &reg, stage, &a, &word).unwrap();
        assert!(report.value.is_zero());
    }

    #[test]
    fn short_later_case() {
        let (mut reg, stage, a, rho) = protected_registry();
        let g = reg.link(&a, &t([1]));
        let word = vec![g.monomial(), Monomial::projection(a.clone())];
        let Lemma2Outcome::Trace(trace) = lemma2_witness(&reg, stage, &a, &word).unwrap() else {
            panic!("expected trace");
        };
        assert_eq!(trace.steps[0].tag, CaseTag::Base);
        assert_eq!(trace.steps[1].tag, CaseTag::ShortLater);
        assert_eq!((trace.final_b.clone(), trace.final_n), (g.b.clone(), g.n));
        verify_trace(&reg, &trace).unwrap();
        let report = vanishing_check(&rho, &reg, stage, &a, &word).unwrap();
        assert!(report.value.is_zero());
        assert!(matches!(report.claim, VanishingClaim::Certified(_)));
    }

    #[test]
    fn long_case_rewrites_head() {
        let (mut reg, stage, a, rho) = protected_registry();
        let small = reg.link(&t([5]), &t([6]));
        let big = reg.link(&a, &small.a.push(Label(7)));
        assert_eq!(big.n, 4);
        let word = vec![
            small.monomial().adjoint(),
            small.monomial(),
            big.monomial(),
            Monomial::projection(a.clone()),
        ];
        let Lemma2Outcome::Trace(trace) = lemma2_witness(&reg, stage, &a, &word).unwrap() else {
            panic!("expected trace");
        };
        let tags: Vec<_> = trace.steps.iter().map(|s| s.tag).collect();
        assert_eq!(
            tags,
            vec![
                CaseTag::Base,
                CaseTag::ShortLater,
                CaseTag::LongCase,
                CaseTag::LongCase
            ]
        );
        assert_eq!(trace.steps[2].b, small.b.concat(&big.b.suffix_after(2)));
        assert!(trace.steps[3].adjoint);
        assert_eq!(trace.final_b, big.b);
        assert_eq!(trace.final_n, 4);
        verify_trace(&reg, &trace).unwrap();
        assert!(vanishing_check(&rho, &reg, stage, &a, &word).unwrap().value.is_zero());

        let mut forged = trace.clone();
        forged.steps[2].tag = CaseTag::UFactor;
        assert!(verify_trace(&reg, &forged).is_err());
    }

    #[test]
    fn leftmost_pa_with_factors_on_the_right() {
        let (mut reg, stage, a, rho) = protected_registry();
        let g = reg.link(&a, &t([1]));
        let pa = Monomial::projection(a.clone());
        let word = vec![pa.clone(), g.monomial().adjoint(), g.monomial(), pa];
        let Lemma2Outcome::Trace(trace) = lemma2_witness(&reg, stage, &a, &word).unwrap() else {
            panic!("expected trace");
        };
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].tag, CaseTag::LeftmostPa);
        assert_eq!(trace.steps[0].position, 0);
        assert!(vanishing_check(&rho, &reg, stage, &a, &word).unwrap().value.is_zero());
    }

    #[test]
    fn short_earlier_case_vanishes() {
        let (reg, stage, a, _) = protected_registry();
        let g0 = reg.generator(0).unwrap().clone();
        let word = vec![g0.monomial(), Monomial::projection(a.clone())];
        match lemma2_witness(&reg, stage, &a, &word).unwrap() {
            Lemma2Outcome::Zero(z) => {
                assert_eq!(z.position, 0);
                assert_eq!(z.steps.last().unwrap().tag, CaseTag::ShortEarlierContradiction);
            }
            other => panic!("expected zero report, got {other:?}"),
        }
    }

    #[test]
    fn precondition_errors() {
        let (reg, stage, a, rho) = protected_registry();
        let word = vec![p([7])];
        assert_eq!(
            lemma2_witness(&reg, stage, &a, &word),
            Err(TheoremError::MissingPa(a.clone()))
        );
        // Without P_a there is no claim and the value can be positive.
        let support = vec![p([1, 2])];
        let report = vanishing_check(&rho, &reg, stage, &a, &support).unwrap();
        assert_eq!(report.claim, VanishingClaim::NoClaim);
        assert_eq!(report.value, Scalar::ratio(1, 2));

        let stray = vec![Monomial::new(t([2]), t([9])).unwrap(), Monomial::projection(a.clone())];
        assert!(matches!(
            lemma2_witness(&reg, stage, &a, &stray),
            Err(TheoremError::UnregisteredFactor { position: 0, .. })
        ));
        assert!(matches!(
            lemma2_witness(&reg, stage, &t([9]), &word),
            Err(TheoremError::WrongVanishingTuple { .. })
        ));
        assert_eq!(
            lemma2_witness(&reg, 0, &a, &word),
            Err(TheoremError::NotAProtection(0))
        );
    }

    #[test]
    fn horizon_is_enforced() {
        let mut reg = Registry::new();
        let rho = DiagonalState::point(x([1], 0));
        let prot = reg.register_protection(&rho, 1);
        let a = reg.vanishing_tuple(&prot);
        let g = reg.link(&a, &t([1, 0]));
        let word = vec![g.monomial(), Monomial::projection(a.clone())];
        assert_eq!(
            vanishing_check(&rho, &reg, prot.stage, &a, &word),
            Err(TheoremError::HorizonInsufficient { n: 3, horizon: 1 })
        );
    }
}
