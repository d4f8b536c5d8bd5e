//! Persistent sessions: a registry plus named bindings, stored as an ordered
//! log of requests, each followed by the summary it produced.
//!
//! ```text
//! cylalg-session 1
//! link | (1) | (2,7) | stage=0 n=3 label=0 a=(1,0,0) b=(2,7,0)
//! state | 1 @ (3)/0 | 2 | stage=1 a=(0) tuples=(3) (3,0)
//! ```
//!
//! Loading replays every request against an empty session and rejects the
//! file if any recomputed summary differs from the stored one.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{parse, parse_polynomial, Expr, ParseError};
use crate::monomials::Monomial;
use crate::oracle::{GeneratorRecord, ProtectionRecord, Registry, Stage};
use crate::polynomials::{DiagonalState, Polynomial};
use crate::theorems::{
    ideal_projection_witness, lemma2_witness, primeness_witness, Lemma2Outcome,
    PrimenessCertificate, TheoremError,
};
use crate::tuples::{SequenceDesc, Tuple};

pub const HEADER: &str = "cylalg-session 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("missing or unknown header; expected `{HEADER}`")]
    Header,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: replay produced `{actual}` but the file records `{recorded}`")]
    Diverged {
        line: usize,
        recorded: String,
        actual: String,
    },
    #[error("binding names must be identifiers, got {0:?}")]
    BadName(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
}

/// One state-changing request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Request {
    Link { alpha: Tuple, beta: Tuple },
    RegisterState { state: DiagonalState, horizon: usize },
    Let { name: String, expr: Expr },
    Prime {
        name: Option<String>,
        q1: Expr,
        x1: SequenceDesc,
        q2: Expr,
        x2: SequenceDesc,
    },
    Lemma2 {
        name: Option<String>,
        protection: Stage,
        word: Expr,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Polynomial(Polynomial),
    Certificate(Box<PrimenessCertificate>),
    Trace(Lemma2Outcome),
}

/// Result of applying a request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applied {
    Generator(GeneratorRecord),
    Protection { record: ProtectionRecord, vanishing: Tuple },
    Bound(Polynomial),
    Certificate(Box<PrimenessCertificate>),
    Lemma2(Lemma2Outcome),
}

impl Applied {
    /// Single-line summary stored in the session log.
    pub fn summary(&self) -> String {
        match self {
            Applied::Generator(g) => format!(
                "stage={} n={} label={} a={} b={}",
                g.stage, g.n, g.label, g.a, g.b
            ),
            Applied::Protection { record, vanishing } => {
                let tuples: Vec<String> = record.tuples.iter().map(Tuple::to_string).collect();
                format!(
                    "stage={} a={} tuples={}",
                    record.stage,
                    vanishing,
                    tuples.join(" ")
                )
            }
            Applied::Bound(p) => format!("= {p}"),
            Applied::Certificate(c) => format!(
                "stage={} alpha1={} alpha2={} a={} b={}",
                c.generator.stage, c.witness1.alpha, c.witness2.alpha, c.generator.a, c.generator.b
            ),
            Applied::Lemma2(Lemma2Outcome::Trace(t)) => {
                format!("b={} n={} steps={}", t.final_b, t.final_n, t.steps.len())
            }
            Applied::Lemma2(Lemma2Outcome::Zero(z)) => format!("zero-at={}", z.position),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub request: Request,
    pub summary: String,
}

fn opt_name(name: &Option<String>) -> &str {
    name.as_deref().unwrap_or("-")
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Request::Link { alpha, beta } => write!(f, "link | {alpha} | {beta}"),
            Request::RegisterState { state, horizon } => write!(f, "state | {state} | {horizon}"),
            Request::Let { name, expr } => write!(f, "let | {name} | {expr}"),
            Request::Prime { name, q1, x1, q2, x2 } => write!(
                f,
                "prime | {} | {q1} | {x1} | {q2} | {x2}",
                opt_name(name)
            ),
            Request::Lemma2 {
                name,
                protection,
                word,
            } => write!(f, "lemma2 | {} | {protection} | {word}", opt_name(name)),
        }
    }
}

fn check_name(name: &str) -> Result<(), SessionError> {
    let mut chars = name.chars();
    let ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(SessionError::BadName(name.to_string()))
    }
}

fn name_field(s: &str) -> Result<Option<String>, SessionError> {
    if s == "-" {
        return Ok(None);
    }
    check_name(s)?;
    Ok(Some(s.to_string()))
}

impl Request {
    /// Number of `|`-separated argument fields after the kind.
    fn arity(kind: &str) -> Option<usize> {
        Some(match kind {
            "link" | "state" | "let" => 2,
            "lemma2" => 3,
            "prime" => 5,
            _ => return None,
        })
    }

    fn from_fields(line: usize, kind: &str, args: &[&str]) -> Result<Request, SessionError> {
        let bad = |message: String| SessionError::Malformed { line, message };
        let tuple = |s: &str| s.parse::<Tuple>().map_err(|e| bad(e.to_string()));
        let point = |s: &str| s.parse::<SequenceDesc>().map_err(|e| bad(e.to_string()));
        Ok(match kind {
            "link" => Request::Link {
                alpha: tuple(args[0])?,
                beta: tuple(args[1])?,
            },
            "state" => Request::RegisterState {
                state: args[0].parse().map_err(|e: crate::polynomials::StateError| bad(e.to_string()))?,
                horizon: args[1].parse().map_err(|_| bad("horizon must be a number".into()))?,
            },
            "let" => {
                check_name(args[0])?;
                Request::Let {
                    name: args[0].to_string(),
                    expr: parse(args[1])?,
                }
            }
            "prime" => Request::Prime {
                name: name_field(args[0])?,
                q1: parse(args[1])?,
                x1: point(args[2])?,
                q2: parse(args[3])?,
                x2: point(args[4])?,
            },
            "lemma2" => Request::Lemma2 {
                name: name_field(args[0])?,
                protection: args[1]
                    .parse()
                    .map_err(|_| bad("protection id must be a number".into()))?,
                word: parse(args[2])?,
            },
            other => return Err(bad(format!("unknown request kind {other:?}"))),
        })
    }

    /// Parses a transcript line (a request without a summary).
    pub fn parse_line(line: usize, text: &str) -> Result<Request, SessionError> {
        let (request, rest) = split_event(line, text)?;
        if rest.is_some() {
            return Err(SessionError::Malformed {
                line,
                message: "unexpected trailing field".into(),
            });
        }
        Ok(request)
    }
}

fn split_event(line: usize, text: &str) -> Result<(Request, Option<String>), SessionError> {
    let fields: Vec<&str> = text.split('|').map(str::trim).collect();
    let kind = fields[0];
    let arity = Request::arity(kind).ok_or_else(|| SessionError::Malformed {
        line,
        message: format!("unknown request kind {kind:?}"),
    })?;
    if fields.len() < arity + 1 || fields.len() > arity + 2 {
        return Err(SessionError::Malformed {
            line,
            message: format!("`{kind}` takes {arity} fields"),
        });
    }
    let request = Request::from_fields(line, kind, &fields[1..=arity])?;
    Ok((request, fields.get(arity + 1).map(|s| s.to_string())))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Session {
    registry: Registry,
    bindings: BTreeMap<String, Binding>,
    events: Vec<Event>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn bindings(&self) -> &BTreeMap<String, Binding> {
        &self.bindings
    }

    pub fn binding(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// The requests of this session, in order.
    pub fn transcript(&self) -> Vec<Request> {
        self.events.iter().map(|e| e.request.clone()).collect()
    }

    /// Applies a request. Failed requests leave the session unchanged.
    pub fn apply(&mut self, request: Request) -> Result<Applied, SessionError> {
        let applied = match &request {
            Request::Link { alpha, beta } => Applied::Generator(self.registry.link(alpha, beta)),
            Request::RegisterState { state, horizon } => {
                let record = self.registry.register_protection(state, *horizon);
                let vanishing = self.registry.vanishing_tuple(&record);
                Applied::Protection { record, vanishing }
            }
            Request::Let { name, expr } => {
                let p = expr.eval();
                self.bindings
                    .insert(name.clone(), Binding::Polynomial(p.clone()));
                Applied::Bound(p)
            }
            Request::Prime { name, q1, x1, q2, x2 } => {
                let w1 = ideal_projection_witness(&self.registry, &q1.eval(), x1)?;
                let w2 = ideal_projection_witness(&self.registry, &q2.eval(), x2)?;
                let cert = Box::new(primeness_witness(&mut self.registry, &w1, &w2)?);
                if let Some(name) = name {
                    self.bindings
                        .insert(name.clone(), Binding::Certificate(cert.clone()));
                }
                Applied::Certificate(cert)
            }
            Request::Lemma2 {
                name,
                protection,
                word,
            } => {
                let prot = self
                    .registry
                    .protection(*protection)
                    .ok_or(TheoremError::NotAProtection(*protection))?;
                let a = self.registry.vanishing_tuple(prot);
                let word: Vec<Monomial> = word.as_word().map_err(|e| {
                    TheoremError::Certificate(format!("not a product of monomials: {e}"))
                })?;
                let outcome = lemma2_witness(&self.registry, *protection, &a, &word)?;
                if let Some(name) = name {
                    self.bindings
                        .insert(name.clone(), Binding::Trace(outcome.clone()));
                }
                Applied::Lemma2(outcome)
            }
        };
        self.events.push(Event {
            request,
            summary: applied.summary(),
        });
        Ok(applied)
    }

    /// Replays a transcript from an empty session.
    pub fn replay<I: IntoIterator<Item = Request>>(requests: I) -> Result<Session, SessionError> {
        let mut session = Session::new();
        for r in requests {
            session.apply(r)?;
        }
        Ok(session)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\n");
        for e in &self.events {
            out.push_str(&format!("{} | {}\n", e.request, e.summary));
        }
        out
    }

    /// Loads a session file by replaying it and checking every summary.
    pub fn from_text(text: &str) -> Result<Session, SessionError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, l)) if l.trim() == HEADER => {}
            _ => return Err(SessionError::Header),
        }
        let mut session = Session::new();
        for (i, text) in lines {
            let line = i + 1;
            let (request, recorded) = split_event(line, text)?;
            let recorded = recorded.ok_or(SessionError::Malformed {
                line,
                message: "missing summary field".into(),
            })?;
            let actual = session.apply(request)?.summary();
            if actual != recorded {
                return Err(SessionError::Diverged {
                    line,
                    recorded,
                    actual,
                });
            }
        }
        Ok(session)
    }
}

/// Parses a transcript: one request per line, `#` comments allowed.
pub fn parse_transcript(text: &str) -> Result<Vec<Request>, SessionError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| Request::parse_line(i + 1, l))
        .collect()
}

/// Convenience for building a `Let` request from source text.
pub fn let_request(name: &str, src: &str) -> Result<Request, SessionError> {
    check_name(name)?;
    parse_polynomial(src)?;
    Ok(Request::Let {
        name: name.to_string(),
        expr: parse(src)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRANSCRIPT: &str = "\
link | (1) | (2,7)
state | 1/2 @ (1,2)/0; 1/2 @ (4)/3 | 3
link | (2) | (1)
let | p | 2 P((1)) + V((1);(2))'
prime | c | P((1)) + V((1);(3)) | (1)/0 | i V((2,5);(4,4)) | (2,5)/0
lemma2 | t | 1 | P((0))
";

    #[test]
    fn link_summary_matches_spec_example() {
        let mut s = Session::new();
        let applied = s
            .apply(Request::Link {
                alpha: "(1)".parse().unwrap(),
                beta: "(2,7)".parse().unwrap(),
            })
            .unwrap();
        assert_eq!(applied.summary(), "stage=0 n=3 label=0 a=(1,0,0) b=(2,7,0)");
    }

    #[test]
    fn replay_is_byte_identical() {
        let requests = parse_transcript(TRANSCRIPT).unwrap();
        let a = Session::replay(requests.clone()).unwrap();
        let b = Session::replay(requests).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let reloaded = Session::from_text(&a.to_text()).unwrap();
        assert_eq!(reloaded, a);
        assert_eq!(reloaded.to_text(), a.to_text());
        assert!(matches!(a.binding("c"), Some(Binding::Certificate(_))));
        assert!(matches!(a.binding("t"), Some(Binding::Trace(_))));
    }

    #[test]
    fn divergent_file_is_rejected() {
        let s = Session::replay(parse_transcript(TRANSCRIPT).unwrap()).unwrap();
        let text = s.to_text().replacen("label=0", "label=5", 1);
        assert!(matches!(
            Session::from_text(&text),
            Err(SessionError::Diverged { line: 2, .. })
        ));
        assert!(matches!(Session::from_text("link | (1) | (2)"), Err(SessionError::Header)));
    }

    #[test]
    fn failed_requests_are_not_logged() {
        let mut s = Session::new();
        let bad = Request::Lemma2 {
            name: None,
            protection: 0,
            word: parse("P((0))").unwrap(),
        };
        assert!(s.apply(bad).is_err());
        assert!(s.events().is_empty());
        assert!(let_request("1x", "P((1))").is_err());
    }
}
