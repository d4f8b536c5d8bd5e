//! `cylalg`: batch front end for the cylinder-algebra engine.
//!
//! Exit status: 0 on success, 1 when a verification or proof step fails,
//! 2 on usage and parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use cylalg::certificate::{ideal_witness_text, primeness_text, trace_text, verify_text, Verified};
use cylalg::selftest::{self, Sizes};
use cylalg::session::{parse_transcript, Applied, Binding, Request, SessionError};
use cylalg::theorems::{ideal_projection_witness, vanishing_check, VanishingClaim};
use cylalg::{parse, parse_polynomial, DiagonalState, FragmentMatrix, SequenceDesc, Session, Tuple};

#[derive(Parser)]
#[command(name = "cylalg", version, about = "Exact computations with prefix-rewriting partial isometries")]
struct Cli {
    /// Session file to load and update. Without it, the session is ephemeral.
    #[arg(long, global = true)]
    session: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical form of an expression.
    Normalize { expr: String },
    /// Evaluate the diagonal g_p at a point such as `(1,2)/0`.
    Geval { expr: String, point: String },
    /// Print P_t p P_t.
    Compress { expr: String, tuple: String },
    /// Print the fragment matrix of an expression and whether it is PSD.
    Fragment {
        expr: String,
        /// Level of the index tuples; defaults to the longest tuple length.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Issue the generator linking P_alpha and P_beta.
    Link { alpha: String, beta: String },
    /// Protect the support of a diagonal state up to a tuple length.
    RegisterState { state: String, horizon: usize },
    /// Print the vanishing 1-tuple of a protection.
    VanishingTuple { protection: usize },
    /// Bind a name to a polynomial in the session.
    Let { name: String, expr: String },
    /// Build and print the vanishing trace for a word containing P_a.
    Lemma2 {
        protection: usize,
        word: String,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the protected state on a word and certify the value.
    VanishingCheck { protection: usize, word: String },
    /// Print a witness that P_alpha lies in the ideal generated by q*q.
    IdealWitness {
        expr: String,
        point: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Link witnessed projections of two ideals and print the certificate.
    PrimeWitness {
        q1: String,
        x1: String,
        q2: String,
        x2: String,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate or trace file.
    Verify { file: PathBuf },
    /// Re-check the avoidance conditions of every generator.
    Audit,
    /// Print the session file and its bindings.
    Show,
    /// Replay a transcript of requests into the session.
    Replay { transcript: PathBuf },
    /// Run the randomized property suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Verification(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn rejected<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Verification(e.into())
}

fn from_session(e: SessionError) -> Failure {
    match e {
        SessionError::Theorem(_) | SessionError::Diverged { .. } => rejected(e),
        _ => usage(e),
    }
}

fn load(path: Option<&Path>) -> Result<Session, Failure> {
    match path {
        Some(p) if p.exists() => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map_err(usage)?;
            Session::from_text(&text).map_err(|e| match from_session(e) {
                Failure::Usage(e) => usage(e.context(format!("loading {}", p.display()))),
                Failure::Verification(e) => rejected(e.context(format!("loading {}", p.display()))),
            })
        }
        _ => Ok(Session::new()),
    }
}

fn save(path: Option<&Path>, session: &Session) -> Outcome {
    if let Some(p) = path {
        fs::write(p, session.to_text())
            .with_context(|| format!("writing {}", p.display()))
            .map_err(usage)?;
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn apply(session: &mut Session, request: Request) -> Result<Applied, Failure> {
    session.apply(request).map_err(from_session)
}

fn run(cli: Cli) -> Outcome {
    let path = cli.session.as_deref();
    match cli.command {
        Command::Normalize { expr } => {
            println!("{}", parse_polynomial(&expr).map_err(usage)?);
        }
        Command::Geval { expr, point } => {
            let p = parse_polynomial(&expr).map_err(usage)?;
            let x: SequenceDesc = point.parse().map_err(usage)?;
            println!("{}", p.g_eval(&x));
        }
        Command::Compress { expr, tuple } => {
            let p = parse_polynomial(&expr).map_err(usage)?;
            let t: Tuple = tuple.parse().map_err(usage)?;
            println!("{}", p.compress(&t));
        }
        Command::Fragment { expr, level } => {
            let p = parse_polynomial(&expr).map_err(usage)?;
            let level = level.unwrap_or_else(|| p.max_tuple_len().max(1));
            let m = FragmentMatrix::of(&p, level).map_err(usage)?;
            print!("{m}");
            println!("hermitian={} psd={}", m.is_hermitian(), m.is_psd());
        }
        Command::Link { alpha, beta } => {
            let mut s = load(path)?;
            let request = Request::Link {
                alpha: alpha.parse().map_err(usage)?,
                beta: beta.parse().map_err(usage)?,
            };
            let applied = apply(&mut s, request)?;
            println!("generator {}", applied.summary());
            save(path, &s)?;
        }
        Command::RegisterState { state, horizon } => {
            let mut s = load(path)?;
            let state: DiagonalState = state.parse().map_err(usage)?;
            let applied = apply(&mut s, Request::RegisterState { state, horizon })?;
            println!("protection {}", applied.summary());
            save(path, &s)?;
        }
        Command::VanishingTuple { protection } => {
            let s = load(path)?;
            let prot = s
                .registry()
                .protection(protection)
                .ok_or_else(|| usage(anyhow!("stage {protection} is not a protection record")))?;
            println!("{}", s.registry().vanishing_tuple(prot));
        }
        Command::Let { name, expr } => {
            let mut s = load(path)?;
            let request = cylalg::session::let_request(&name, &expr).map_err(from_session)?;
            let applied = apply(&mut s, request)?;
            println!("{name} {}", applied.summary());
            save(path, &s)?;
        }
        Command::Lemma2 {
            protection,
            word,
            bind,
            out,
        } => {
            let mut s = load(path)?;
            let word = parse(&word).map_err(usage)?;
            word.as_word().map_err(usage)?;
            let request = Request::Lemma2 {
                name: bind,
                protection,
                word,
            };
            let Applied::Lemma2(outcome) = apply(&mut s, request)? else {
                unreachable!("lemma2 requests yield traces")
            };
            emit(&trace_text(&outcome), out.as_deref())?;
            save(path, &s)?;
        }
        Command::VanishingCheck { protection, word } => {
            let s = load(path)?;
            let word = parse(&word).map_err(usage)?.as_word().map_err(usage)?;
            let reg = s.registry();
            let prot = reg
                .protection(protection)
                .ok_or_else(|| usage(anyhow!("stage {protection} is not a protection record")))?;
            let (rho, _) = prot
                .source
                .as_ref()
                .ok_or_else(|| usage(anyhow!("protection {protection} has no state")))?;
            let a = reg.vanishing_tuple(prot);
            let report = vanishing_check(rho, reg, protection, &a, &word).map_err(rejected)?;
            println!("value {}", report.value);
            match report.claim {
                VanishingClaim::NoClaim => println!("claim none (word has no factor P({a}))"),
                VanishingClaim::ZeroWord(z) => println!("claim zero-word zero-at={}", z.position),
                VanishingClaim::Certified(t) => {
                    println!("claim certified b={} n={}", t.final_b, t.final_n)
                }
            }
        }
        Command::IdealWitness { expr, point, out } => {
            let s = load(path)?;
            let q = parse_polynomial(&expr).map_err(usage)?;
            let x: SequenceDesc = point.parse().map_err(usage)?;
            let w = ideal_projection_witness(s.registry(), &q, &x).map_err(rejected)?;
            emit(&ideal_witness_text(&w), out.as_deref())?;
        }
        Command::PrimeWitness {
            q1,
            x1,
            q2,
            x2,
            bind,
            out,
        } => {
            let mut s = load(path)?;
            let request = Request::Prime {
                name: bind,
                q1: parse(&q1).map_err(usage)?,
                x1: x1.parse().map_err(usage)?,
                q2: parse(&q2).map_err(usage)?,
                x2: x2.parse().map_err(usage)?,
            };
            let Applied::Certificate(cert) = apply(&mut s, request)? else {
                unreachable!("prime requests yield certificates")
            };
            emit(&primeness_text(&cert), out.as_deref())?;
            save(path, &s)?;
        }
        Command::Verify { file } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))
                .map_err(usage)?;
            let s = load(path)?;
            let registry = path.is_some().then(|| s.registry());
            match verify_text(&text, registry).map_err(rejected)? {
                Verified::Ideal { alpha } => println!("verified ideal P({alpha})"),
                Verified::Prime { claim } => println!("verified prime P({claim})"),
                Verified::Lemma2 { b, n } => println!("verified lemma2 b={b} n={n}"),
                Verified::Zero { position } => println!("verified zero-word zero-at={position}"),
            }
        }
        Command::Audit => {
            let s = load(path)?;
            s.registry().audit().map_err(rejected)?;
            println!("audit ok records={}", s.registry().len());
        }
        Command::Show => {
            let s = load(path)?;
            print!("{}", s.to_text());
            for (name, b) in s.bindings() {
                match b {
                    Binding::Polynomial(p) => println!("# {name} = {p}"),
                    Binding::Certificate(c) => println!("# {name} = certificate for P({})", c.generator.b),
                    Binding::Trace(t) => println!("# {name} = trace {}", trace_summary(t)),
                }
            }
        }
        Command::Replay { transcript } => {
            let text = fs::read_to_string(&transcript)
                .with_context(|| format!("reading {}", transcript.display()))
                .map_err(usage)?;
            let requests = parse_transcript(&text).map_err(from_session)?;
            let mut s = load(path)?;
            for r in requests {
                apply(&mut s, r)?;
            }
            save(path, &s)?;
            if path.is_none() {
                print!("{}", s.to_text());
            }
        }
        Command::Selftest { seed, cases } => {
            let reports = selftest::run_all(seed, &Sizes::uniform(cases));
            for r in &reports {
                println!("{}", r.to_string().replace(&format!(" time={:.2}s", r.elapsed.as_secs_f64()), ""));
            }
            if reports.iter().any(|r| !r.passed()) {
                return Err(rejected(anyhow!("property suites failed")));
            }
        }
    }
    Ok(())
}

fn trace_summary(outcome: &cylalg::theorems::Lemma2Outcome) -> String {
    match outcome {
        cylalg::theorems::Lemma2Outcome::Trace(t) => format!("b={} n={}", t.final_b, t.final_n),
        cylalg::theorems::Lemma2Outcome::Zero(z) => format!("zero-at={}", z.position),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
