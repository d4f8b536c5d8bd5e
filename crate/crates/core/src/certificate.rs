//! Text forms of witnesses, certificates and traces, and the verifier that
//! re-checks them from the text alone.
//!
//! Files are line oriented: a header line `cylalg-certificate 1`, then
//! `key: value` lines in a fixed order. Stored derived values (the scalar,
//! the claim) are only compared against freshly evaluated ones, never
//! trusted.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::{parse, Expr};
use crate::oracle::{GeneratorRecord, Registry};
use crate::polynomials::Polynomial;
use crate::scalar::Scalar;
use crate::theorems::{
    verify_trace, CaseTag, IdealWitness, Lemma2Outcome, Lemma2Step, Lemma2Trace,
    PrimenessCertificate, TheoremError, ZeroReport,
};
use crate::tuples::{Label, Tuple};
use crate::monomials::normal_form;

pub const HEADER: &str = "cylalg-certificate 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("missing or unknown header; expected `{HEADER}`")]
    Header,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("unknown certificate kind `{0}`")]
    Kind(String),
    #[error("lemma2 traces can only be checked against a session registry")]
    NeedsRegistry,
    #[error(transparent)]
    Rejected(Box<TheoremError>),
}

impl From<TheoremError> for CertificateError {
    fn from(e: TheoremError) -> Self {
        CertificateError::Rejected(Box::new(e))
    }
}

/// What a successfully verified file established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verified {
    Ideal { alpha: Tuple },
    Prime { claim: Tuple },
    Lemma2 { b: Tuple, n: usize },
    Zero { position: usize },
}

fn write_witness(out: &mut String, prefix: &str, w: &IdealWitness) {
    let _ = writeln!(out, "{prefix}.q: {}", w.q);
    let _ = writeln!(out, "{prefix}.point: {}", w.point);
    let _ = writeln!(out, "{prefix}.n: {}", w.n);
    let _ = writeln!(out, "{prefix}.alpha: {}", w.alpha);
    let _ = writeln!(out, "{prefix}.label: {}", w.label);
    let _ = writeln!(out, "{prefix}.scalar: {}", w.scalar);
    let _ = writeln!(out, "{prefix}.proof: {}", w.certificate);
}

fn generator_fields(g: &GeneratorRecord) -> String {
    format!(
        "stage={} n={} label={} alpha={} beta={} a={} b={}",
        g.stage, g.n, g.label, g.requested.0, g.requested.1, g.a, g.b
    )
}

pub fn ideal_witness_text(w: &IdealWitness) -> String {
    let mut out = format!("{HEADER}\nkind: ideal\n");
    write_witness(&mut out, "w", w);
    let _ = writeln!(out, "claim: P({})", w.alpha);
    out
}

pub fn primeness_text(c: &PrimenessCertificate) -> String {
    let mut out = format!("{HEADER}\nkind: prime\n");
    write_witness(&mut out, "w1", &c.witness1);
    write_witness(&mut out, "w2", &c.witness2);
    let _ = writeln!(out, "generator: {}", generator_fields(&c.generator));
    let _ = writeln!(out, "product: {}", c.product);
    let _ = writeln!(out, "claim: P({})", c.generator.b);
    out
}

fn write_steps(out: &mut String, steps: &[Lemma2Step]) {
    for s in steps {
        let _ = write!(
            out,
            "step: position={} case={} b={} n={}",
            s.position, s.tag, s.b, s.n
        );
        if let Some(g) = s.generator {
            let _ = write!(out, " generator={g} adjoint={}", s.adjoint);
        }
        out.push('\n');
    }
}

pub fn trace_text(outcome: &Lemma2Outcome) -> String {
    let mut out = format!("{HEADER}\n");
    match outcome {
        Lemma2Outcome::Trace(t) => {
            out.push_str("kind: lemma2\n");
            let _ = writeln!(out, "protection: {}", t.protection);
            let _ = writeln!(out, "a: {}", t.a);
            let _ = writeln!(out, "word: {}", Expr::from_word(&t.word));
            write_steps(&mut out, &t.steps);
            let _ = writeln!(out, "final: b={} n={}", t.final_b, t.final_n);
        }
        Lemma2Outcome::Zero(z) => {
            out.push_str("kind: lemma2-zero\n");
            let _ = writeln!(out, "protection: {}", z.protection);
            let _ = writeln!(out, "a: {}", z.a);
            let _ = writeln!(out, "word: {}", Expr::from_word(&z.word));
            write_steps(&mut out, &z.steps);
            let _ = writeln!(out, "zero-at: {}", z.position);
        }
    }
    out
}

struct Fields {
    entries: Vec<(usize, String, String)>,
}

impl Fields {
    fn parse(text: &str) -> Result<Fields, CertificateError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == HEADER => {}
            _ => return Err(CertificateError::Header),
        }
        let mut entries = Vec::new();
        for (i, line) in lines {
            let (k, v) = line.split_once(':').ok_or(CertificateError::Malformed {
                line: i + 1,
                message: "expected `key: value`".into(),
            })?;
            entries.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Fields { entries })
    }

    fn get(&self, key: &str) -> Result<(usize, &str), CertificateError> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
            .ok_or_else(|| CertificateError::Missing(key.to_string()))
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
        self.entries
            .iter()
            .filter(move |(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, CertificateError>
    where
        T::Err: std::fmt::Display,
    {
        let (line, v) = self.get(key)?;
        v.parse().map_err(|e: T::Err| CertificateError::Malformed {
            line,
            message: format!("{key}: {e}"),
        })
    }

    fn expr(&self, key: &str) -> Result<Expr, CertificateError> {
        let (line, v) = self.get(key)?;
        parse(v).map_err(|e| CertificateError::Malformed {
            line,
            message: format!("{key}: {e}"),
        })
    }
}

/// Parses `k=v k=v ...`.
fn key_values(line: usize, s: &str) -> Result<HashMap<String, String>, CertificateError> {
    s.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| CertificateError::Malformed {
                    line,
                    message: format!("expected key=value, got {kv:?}"),
                })
        })
        .collect()
}

fn kv_parse<T: std::str::FromStr>(
    line: usize,
    map: &HashMap<String, String>,
    key: &str,
) -> Result<T, CertificateError>
where
    T::Err: std::fmt::Display,
{
    let raw = map.get(key).ok_or_else(|| CertificateError::Missing(key.to_string()))?;
    raw.parse().map_err(|e: T::Err| CertificateError::Malformed {
        line,
        message: format!("{key}: {e}"),
    })
}

fn read_witness(f: &Fields, prefix: &str) -> Result<IdealWitness, CertificateError> {
    let q = f.expr(&format!("{prefix}.q"))?.eval();
    let alpha: Tuple = f.parsed(&format!("{prefix}.alpha"))?;
    let n: usize = f.parsed(&format!("{prefix}.n"))?;
    let (line, _) = f.get(&format!("{prefix}.alpha"))?;
    if alpha.len() != n || n == 0 {
        return Err(CertificateError::Malformed {
            line,
            message: "alpha must have length n".into(),
        });
    }
    let label: u64 = f.parsed(&format!("{prefix}.label"))?;
    if alpha.coord(n) != Some(Label(label)) {
        return Err(CertificateError::Malformed {
            line,
            message: "alpha must end in the recorded label".into(),
        });
    }
    let scalar_expr = parse(f.get(&format!("{prefix}.scalar"))?.1).map_err(|e| {
        CertificateError::Malformed {
            line,
            message: e.to_string(),
        }
    })?;
    let scalar = scalar_of(&scalar_expr).ok_or(CertificateError::Malformed {
        line,
        message: "scalar must be a number".into(),
    })?;
    Ok(IdealWitness {
        source: q.adjoint().multiply(&q),
        q,
        point: f.parsed(&format!("{prefix}.point"))?,
        n,
        alpha_prime: alpha.prefix(n - 1),
        label: Label(label),
        alpha,
        scalar,
        certificate: f.expr(&format!("{prefix}.proof"))?,
    })
}

/// The value of a constant expression, if it is one.
fn scalar_of(e: &Expr) -> Option<Scalar> {
    let p = e.eval();
    if p.is_zero() {
        return Some(Scalar::zero());
    }
    let unit = crate::monomials::Monomial::projection(Tuple::empty());
    (p.len() == 1).then(|| p.coefficient(&unit)).filter(|c| !c.is_zero())
}

fn check_claim(f: &Fields, expected: &Polynomial) -> Result<(), CertificateError> {
    let claim = f.expr("claim")?.eval();
    if claim != *expected {
        return Err(TheoremError::Certificate(format!("stated claim {claim} is not {expected}")).into());
    }
    Ok(())
}

fn read_steps(f: &Fields) -> Result<Vec<Lemma2Step>, CertificateError> {
    f.all("step")
        .map(|(line, v)| {
            let kv = key_values(line, v)?;
            let tag_name: String = kv_parse(line, &kv, "case")?;
            let tag = CaseTag::from_name(&tag_name).ok_or(CertificateError::Malformed {
                line,
                message: format!("unknown case {tag_name:?}"),
            })?;
            let generator = match kv.get("generator") {
                Some(_) => Some(kv_parse(line, &kv, "generator")?),
                None => None,
            };
            let adjoint = match kv.get("adjoint") {
                Some(_) => kv_parse(line, &kv, "adjoint")?,
                None => false,
            };
            Ok(Lemma2Step {
                position: kv_parse(line, &kv, "position")?,
                tag,
                b: kv_parse(line, &kv, "b")?,
                n: kv_parse(line, &kv, "n")?,
                generator,
                adjoint,
            })
        })
        .collect()
}

fn read_word(f: &Fields) -> Result<Vec<crate::monomials::Monomial>, CertificateError> {
    let (line, _) = f.get("word")?;
    f.expr("word")?
        .as_word()
        .map_err(|e| CertificateError::Malformed {
            line,
            message: e.to_string(),
        })
}

/// Parses a lemma2 trace file back into its outcome, without checking it.
pub fn parse_trace(text: &str) -> Result<Lemma2Outcome, CertificateError> {
    let f = Fields::parse(text)?;
    let kind = f.get("kind")?.1.to_string();
    let protection = f.parsed("protection")?;
    let a = f.parsed("a")?;
    let word = read_word(&f)?;
    let steps = read_steps(&f)?;
    match kind.as_str() {
        "lemma2" => {
            let (line, v) = f.get("final")?;
            let kv = key_values(line, v)?;
            Ok(Lemma2Outcome::Trace(Lemma2Trace {
                protection,
                a,
                word,
                steps,
                final_b: kv_parse(line, &kv, "b")?,
                final_n: kv_parse(line, &kv, "n")?,
            }))
        }
        "lemma2-zero" => Ok(Lemma2Outcome::Zero(ZeroReport {
            protection,
            a,
            word,
            position: f.parsed("zero-at")?,
            steps,
        })),
        other => Err(CertificateError::Kind(other.to_string())),
    }
}

/// Parses a primeness certificate, without checking it.
pub fn parse_primeness(text: &str) -> Result<PrimenessCertificate, CertificateError> {
    let f = Fields::parse(text)?;
    match f.get("kind")?.1 {
        "prime" => {}
        other => return Err(CertificateError::Kind(other.to_string())),
    }
    let (line, v) = f.get("generator")?;
    let kv = key_values(line, v)?;
    let generator = GeneratorRecord {
        stage: kv_parse(line, &kv, "stage")?,
        n: kv_parse(line, &kv, "n")?,
        label: Label(kv_parse(line, &kv, "label")?),
        requested: (kv_parse(line, &kv, "alpha")?, kv_parse(line, &kv, "beta")?),
        a: kv_parse(line, &kv, "a")?,
        b: kv_parse(line, &kv, "b")?,
    };
    Ok(PrimenessCertificate {
        witness1: read_witness(&f, "w1")?,
        witness2: read_witness(&f, "w2")?,
        generator,
        product: f.expr("product")?,
    })
}

/// Verifies any certificate or trace file. Traces need the registry they
/// were produced against.
pub fn verify_text(text: &str, registry: Option<&Registry>) -> Result<Verified, CertificateError> {
    let f = Fields::parse(text)?;
    match f.get("kind")?.1 {
        "ideal" => {
            let w = read_witness(&f, "w")?;
            w.verify()?;
            check_claim(&f, &Polynomial::projection(w.alpha.clone()))?;
            Ok(Verified::Ideal { alpha: w.alpha })
        }
        "prime" => {
            let c = parse_primeness(text)?;
            c.verify()?;
            check_claim(&f, &c.claim())?;
            if let Some(reg) = registry {
                if reg.generator(c.generator.stage) != Some(&c.generator) {
                    return Err(TheoremError::Certificate(format!(
                        "generator stage {} is not in the session registry",
                        c.generator.stage
                    ))
                    .into());
                }
            }
            Ok(Verified::Prime { claim: c.generator.b })
        }
        "lemma2" => {
            let reg = registry.ok_or(CertificateError::NeedsRegistry)?;
            let Lemma2Outcome::Trace(t) = parse_trace(text)? else {
                unreachable!("kind checked above")
            };
            verify_trace(reg, &t)?;
            Ok(Verified::Lemma2 {
                b: t.final_b,
                n: t.final_n,
            })
        }
        "lemma2-zero" => {
            let Lemma2Outcome::Zero(z) = parse_trace(text)? else {
                unreachable!("kind checked above")
            };
            // Any suffix vanishing makes the whole word vanish.
            let suffix = normal_form(&z.word[z.position.min(z.word.len())..]);
            if suffix.is_none_or(|m| !m.is_zero()) {
                return Err(TheoremError::Certificate("word does not vanish at the stated position".into()).into());
            }
            Ok(Verified::Zero { position: z.position })
        }
        other => Err(CertificateError::Kind(other.to_string())),
    }
}
