//! Seeded randomized property suites.
//!
//! Each suite draws its inputs from a ChaCha stream seeded by the caller and
//! returns a [`Report`]. Point-action checks use a small oracle over raw
//! label vectors that shares no code with monomial multiplication or
//! [`Monomial::act`].

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::{primeness_text, verify_text, Verified};
use crate::expr::Expr;
use crate::fragment::{closed_index, padding_label, FragmentMatrix};
use crate::monomials::{normal_form, Monomial};
use crate::oracle::{Registry, Stage};
use crate::polynomials::{DiagonalState, Polynomial};
use crate::scalar::Scalar;
use crate::session::{parse_transcript, Request, Session};
use crate::theorems::{
    ideal_projection_witness, lemma2_witness, primeness_witness, vanishing_check, Lemma2Outcome,
    VanishingClaim,
};
use crate::tuples::{Label, SequenceDesc, Tuple};

const KEPT_FAILURES: usize = 5;

#[derive(Clone, Debug)]
pub struct Report {
    pub name: &'static str,
    pub cases: usize,
    pub failed: usize,
    /// The first few failure messages.
    pub failures: Vec<String>,
    pub notes: String,
    pub elapsed: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: cases={} failed={} time={:.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failed,
            self.elapsed.as_secs_f64()
        )?;
        if !self.notes.is_empty() {
            write!(f, " {}", self.notes)?;
        }
        for msg in &self.failures {
            write!(f, "\n  {msg}")?;
        }
        Ok(())
    }
}

struct Run {
    name: &'static str,
    start: Instant,
    cases: usize,
    failed: usize,
    failures: Vec<String>,
}

impl Run {
    fn new(name: &'static str) -> Self {
        Run {
            name,
            start: Instant::now(),
            cases: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(msg());
            }
        }
    }

    fn finish(self, notes: String) -> Report {
        Report {
            name: self.name,
            cases: self.cases,
            failed: self.failed,
            failures: self.failures,
            notes,
            elapsed: self.start.elapsed(),
        }
    }
}

/// Point-action oracle over raw label vectors.
pub mod raw {
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct Point {
        pub prefix: Vec<u64>,
        pub tail: u64,
    }

    impl Point {
        pub fn new(prefix: Vec<u64>, tail: u64) -> Point {
            let mut p = Point { prefix, tail };
            while p.prefix.last() == Some(&p.tail) {
                p.prefix.pop();
            }
            p
        }

        fn coord(&self, i: usize) -> u64 {
            self.prefix.get(i).copied().unwrap_or(self.tail)
        }
    }

    /// Rewrites the prefix `dom` of `p` into `ran`, if `p` starts with `dom`.
    pub fn act(dom: &[u64], ran: &[u64], p: &Point) -> Option<Point> {
        if dom.iter().enumerate().any(|(i, &d)| p.coord(i) != d) {
            return None;
        }
        let mut prefix = ran.to_vec();
        if p.prefix.len() > dom.len() {
            prefix.extend_from_slice(&p.prefix[dom.len()..]);
        }
        Some(Point::new(prefix, p.tail))
    }

    /// Applies the factors right to left.
    pub fn act_word(word: &[(Vec<u64>, Vec<u64>)], p: &Point) -> Option<Point> {
        word.iter()
            .rev()
            .try_fold(p.clone(), |x, (dom, ran)| act(dom, ran, &x))
    }
}

fn values(t: &Tuple) -> Vec<u64> {
    t.labels().iter().map(|l| l.0).collect()
}

fn raw_pair(m: &Monomial) -> Option<(Vec<u64>, Vec<u64>)> {
    Some((values(m.domain()?), values(m.range()?)))
}

fn raw_point(x: &SequenceDesc) -> raw::Point {
    raw::Point::new(values(x.prefix()), x.tail().0)
}

/// `g_p(x)` from the oracle: the sum of coefficients of terms fixing `x`.
fn raw_g(p: &Polynomial, x: &raw::Point) -> Scalar {
    let mut total = Scalar::zero();
    for (m, c) in p.terms() {
        if let Some((dom, ran)) = raw_pair(m) {
            if raw::act(&dom, &ran, x).as_ref() == Some(x) {
                total += c;
            }
        }
    }
    total
}

/// Random input generation.
pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn label(&mut self, max: u64) -> Label {
        Label(self.rng.gen_range(0..=max))
    }

    pub fn tuple_of_len(&mut self, len: usize, max_label: u64) -> Tuple {
        Tuple::new((0..len).map(|_| self.label(max_label)).collect())
    }

    pub fn tuple(&mut self, min_len: usize, max_len: usize, max_label: u64) -> Tuple {
        let len = self.rng.gen_range(min_len..=max_len);
        self.tuple_of_len(len, max_label)
    }

    /// A tuple comparable with `t` in the prefix order.
    pub fn comparable(&mut self, t: &Tuple, max_len: usize, max_label: u64) -> Tuple {
        if self.chance(0.5) || t.len() >= max_len {
            let k = self.rng.gen_range(0..=t.len().min(max_len));
            t.prefix(k)
        } else {
            let extra = self.rng.gen_range(0..=max_len - t.len());
            t.concat(&self.tuple_of_len(extra, max_label))
        }
    }

    pub fn scalar(&mut self) -> Scalar {
        let part = |g: &mut Self| {
            let num: i64 = g.rng.gen_range(-3..=3);
            let den: i64 = g.rng.gen_range(1..=3);
            BigRational::new(BigInt::from(num), BigInt::from(den))
        };
        let re = part(self);
        let im = if self.chance(0.5) {
            part(self)
        } else {
            BigRational::from_integer(0.into())
        };
        let s = Scalar::new(re, im);
        if s.is_zero() {
            Scalar::one()
        } else {
            s
        }
    }

    /// `V(a;b)` whose domain, with probability `bias`, is comparable with
    /// `accept` (the range of the factor to its right).
    pub fn monomial(
        &mut self,
        accept: Option<&Tuple>,
        bias: f64,
        max_len: usize,
        max_label: u64,
    ) -> Monomial {
        let domain = match accept {
            Some(t) if self.chance(bias) => self.comparable(t, max_len, max_label),
            _ => self.tuple(0, max_len, max_label),
        };
        let range = self.tuple_of_len(domain.len(), max_label);
        Monomial::new(domain, range).expect("equal lengths")
    }

    /// A word built right to left, each factor biased to accept the
    /// previous factor's range.
    pub fn word(&mut self, max_factors: usize, max_len: usize, max_label: u64) -> Vec<Monomial> {
        let len = self.rng.gen_range(1..=max_factors);
        let mut rev: Vec<Monomial> = Vec::with_capacity(len);
        for _ in 0..len {
            let accept = rev.last().and_then(|m| m.range().cloned());
            rev.push(self.monomial(accept.as_ref(), 0.75, max_len, max_label));
        }
        rev.reverse();
        rev
    }

    /// A point, half the time inside the cylinder `near`, with a tail drawn
    /// from `tails`.
    pub fn point(
        &mut self,
        near: Option<&Tuple>,
        max_label: u64,
        tails: std::ops::RangeInclusive<u64>,
    ) -> SequenceDesc {
        let base = match near {
            Some(t) if self.chance(0.5) => t.clone(),
            _ => self.tuple(0, 4, max_label),
        };
        let ext = self.tuple(0, 2, max_label);
        let tail = Label(self.rng.gen_range(tails));
        SequenceDesc::new(base.concat(&ext), tail)
    }

    pub fn polynomial(&mut self, max_terms: usize, max_len: usize, max_label: u64) -> Polynomial {
        let mut p = Polynomial::zero();
        let mut accept: Option<Tuple> = None;
        for _ in 0..self.rng.gen_range(1..=max_terms) {
            let m = self.monomial(accept.as_ref(), 0.6, max_len, max_label);
            accept = m.domain().cloned();
            let c = self.scalar();
            p.add_term(c, m);
        }
        if p.is_zero() {
            return self.polynomial(max_terms, max_len, max_label);
        }
        p
    }

    pub fn state(&mut self, max_points: usize, max_len: usize, max_label: u64) -> DiagonalState {
        let k = self.rng.gen_range(1..=max_points);
        let mut points: Vec<SequenceDesc> = Vec::new();
        while points.len() < k {
            let x = SequenceDesc::new(self.tuple(0, max_len, max_label), self.label(max_label));
            if !points.contains(&x) {
                points.push(x);
            }
        }
        let weights: Vec<i64> = (0..k).map(|_| self.rng.gen_range(1..=4)).collect();
        let total: i64 = weights.iter().sum();
        let support = points
            .into_iter()
            .zip(weights)
            .map(|(x, w)| (x, BigRational::new(w.into(), total.into())))
            .collect();
        DiagonalState::new(support).expect("valid by construction")
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        v.shuffle(&mut self.rng);
    }
}

/// Closure of words under multiplication and agreement with the oracle.
pub fn closure(seed: u64, words: usize) -> Report {
    let mut run = Run::new("closure");
    let mut g = Gen::new(seed);
    let (mut nonzero, mut hits) = (0usize, 0usize);
    for _ in 0..words {
        run.cases += 1;
        let word = g.word(8, 5, 8);
        let nf = normal_form(&word).expect("non-empty");
        let shape_ok = match &nf {
            Monomial::Zero => true,
            Monomial::V { domain, range } => domain.len() == range.len(),
        };
        run.check(shape_ok, || format!("{nf} has unequal lengths"));
        if !nf.is_zero() {
            nonzero += 1;
        }
        let raw_word: Vec<_> = word.iter().filter_map(raw_pair).collect();
        let rightmost = word.last().and_then(|m| m.domain().cloned());
        for _ in 0..5 {
            // Tails above every word label are fresh.
            let x = g.point(rightmost.as_ref(), 8, 9..=12);
            let p = raw_point(&x);
            let expected = raw::act_word(&raw_word, &p);
            let got = raw_pair(&nf).and_then(|(d, r)| raw::act(&d, &r, &p));
            if expected.is_some() {
                hits += 1;
            }
            run.check(expected == got, || {
                let shown: Vec<String> = word.iter().map(Monomial::to_string).collect();
                format!("[{}] -> {nf} disagrees with the oracle at {x}", shown.join(", "))
            });
        }
    }
    run.finish(format!("nonzero={nonzero} points-in-domain={hits}"))
}

/// Associativity, the involution and `V V* V = V`.
pub fn algebra_laws(seed: u64, cases: usize) -> Report {
    let mut run = Run::new("algebra-laws");
    let mut g = Gen::new(seed);
    for i in 0..cases {
        run.cases += 1;
        let m3 = g.monomial(None, 0.0, 5, 8);
        let m2 = g.monomial(m3.range(), 0.75, 5, 8);
        let m1 = g.monomial(m2.range(), 0.75, 5, 8);
        let left = m1.multiply(&m2).multiply(&m3);
        let right = m1.multiply(&m2.multiply(&m3));
        run.check(left == right, || format!("({m1} {m2}) {m3} != {m1} ({m2} {m3})"));
        let star = m1.multiply(&m2).adjoint();
        run.check(star == m2.adjoint().multiply(&m1.adjoint()), || {
            format!("({m1} {m2})* is not {m2}* {m1}*")
        });
        for m in [&m1, &m1.multiply(&m2)] {
            run.check(m.multiply(&m.adjoint()).multiply(m) == *m, || {
                format!("V V* V != V for {m}")
            });
            run.check(m.adjoint().adjoint() == *m, || format!("{m}** != {m}"));
        }
        if i % 4 == 0 {
            let p = g.polynomial(3, 3, 4);
            let q = g.polynomial(3, 3, 4);
            let r = g.polynomial(3, 3, 4);
            run.check(
                p.multiply(&q).multiply(&r) == p.multiply(&q.multiply(&r)),
                || format!("polynomial associativity fails for {p}; {q}; {r}"),
            );
            run.check(
                p.multiply(&q).adjoint() == q.adjoint().multiply(&p.adjoint()),
                || format!("polynomial involution fails for {p}; {q}"),
            );
            run.check(
                p.multiply(&q.add(&r)) == p.multiply(&q).add(&p.multiply(&r)),
                || format!("distributivity fails for {p}; {q}; {r}"),
            );
        }
    }
    run.finish(String::new())
}

/// Constancy of `g` on long cylinders and compression at a fresh label.
pub fn compression(seed: u64, polys: usize) -> Report {
    let mut run = Run::new("compression");
    let mut g = Gen::new(seed);
    let mut nonzero = 0usize;
    for _ in 0..polys {
        run.cases += 1;
        let p = g.polynomial(6, 3, 5);
        let need = p.max_tuple_len();
        let domains: Vec<Tuple> = p.terms().filter_map(|(m, _)| m.domain().cloned()).collect();
        let seed_tuple = domains[g.below(domains.len())].clone();

        let mut t = g.comparable(&seed_tuple, need + 2, 6);
        if t.len() < need {
            t = t.concat(&g.tuple_of_len(need - t.len(), 6));
        }
        match p.g_on_cylinder(&t) {
            Err(e) => run.check(false, || format!("g_on_cylinder({p}, {t}) failed: {e:?}")),
            Ok(v) => {
                for _ in 0..3 {
                    let x = SequenceDesc::new(t.concat(&g.tuple(0, 2, 7)), g.label(7));
                    let oracle = raw_g(&p, &raw_point(&x));
                    run.check(v == oracle && p.g_eval(&x) == oracle, || {
                        format!("g({p}) on {t} is {v} but {oracle} at {x}")
                    });
                }
            }
        }

        let n = need + 1;
        let mut alpha_prime = g.comparable(&seed_tuple, n - 1, 5);
        if alpha_prime.len() < n - 1 {
            alpha_prime = alpha_prime.concat(&g.tuple_of_len(n - 1 - alpha_prime.len(), 5));
        }
        let fresh = Label(p.labels().iter().map(|l| l.0 + 1).max().unwrap_or(0));
        let alpha = alpha_prime.push(fresh);
        let c = p.g_on_cylinder(&alpha).expect("alpha is long enough");
        if !c.is_zero() {
            nonzero += 1;
        }
        let pa = Polynomial::projection(alpha.clone());
        let compressed = p.compress(&alpha);
        run.check(compressed == pa.scale(&c), || {
            format!("compress({p}, {alpha}) = {compressed}, expected {c} P({alpha})")
        });

        // The same compression as a matrix product on a closed fragment.
        let pad = padding_label(&[&p, &pa]);
        let index = closed_index(&[&p, &pa], n, pad).expect("level covers p");
        let fp = FragmentMatrix::on_index(&p, n, pad, index.clone()).expect("valid index");
        let fa = FragmentMatrix::on_index(&pa, n, pad, index).expect("valid index");
        let fc = fa.multiply(&fp).and_then(|m| m.multiply(&fa)).expect("same index");
        let diag_ok = fc.index.iter().all(|y| {
            let expected = if *y == alpha { c.clone() } else { Scalar::zero() };
            fc.entry(y, y) == Some(&expected)
        });
        run.check(fc.is_diagonal() && diag_ok, || {
            format!("fragment of P_alpha {p} P_alpha at {alpha} is not {c} e_alpha")
        });
    }
    run.finish(format!("nonzero-compressions={nonzero}"))
}

/// Checks every generator of `reg` for the linking identity and domination.
fn check_generators(run: &mut Run, reg: &Registry) {
    for gen in reg.generators() {
        let v = gen.monomial();
        let (a, b) = (&gen.a, &gen.b);
        let linked = normal_form(&[v.clone(), Monomial::projection(a.clone()), v.adjoint()]);
        run.check(linked == Some(Monomial::projection(b.clone())), || {
            format!("stage {}: V P_a V* is {linked:?}, not P{b}", gen.stage)
        });
        let (alpha, beta) = &gen.requested;
        run.check(
            a.properly_extends(alpha)
                && b.properly_extends(beta)
                && a.len() == gen.n
                && b.len() == gen.n
                && gen.n == alpha.len().max(beta.len()) + 1
                && a.coord(gen.n) == Some(gen.label)
                && b.coord(gen.n) == Some(gen.label),
            || format!("stage {}: {a}, {b} do not dominate {alpha}, {beta}", gen.stage),
        );
    }
}

/// Interleaved links and protections keep the registry auditable.
pub fn oracle_invariants(seed: u64, ops: usize) -> Report {
    let mut run = Run::new("oracle-invariants");
    let mut g = Gen::new(seed);
    let mut reg = Registry::new();
    let mut requests: Vec<Request> = Vec::new();
    for i in 0..ops {
        run.cases += 1;
        let request = if g.chance(0.7) {
            Request::Link {
                alpha: g.tuple(0, 4, 12),
                beta: g.tuple(0, 4, 12),
            }
        } else {
            Request::RegisterState {
                state: g.state(4, 4, 12),
                horizon: 1 + g.below(4),
            }
        };
        match &request {
            Request::Link { alpha, beta } => {
                reg.link(alpha, beta);
            }
            Request::RegisterState { state, horizon } => {
                reg.register_protection(state, *horizon);
            }
            _ => unreachable!(),
        }
        requests.push(request);
        if i % 100 == 99 {
            let audit = reg.audit();
            run.check(audit.is_ok(), || format!("audit after {} ops: {audit:?}", i + 1));
        }
    }
    let audit = reg.audit();
    run.check(audit.is_ok(), || format!("final audit: {audit:?}"));
    check_generators(&mut run, &reg);

    let replayed = Session::replay(requests).map(|s| s.registry().clone());
    run.check(replayed.as_ref() == Ok(&reg), || "replay diverged".into());
    let generators = reg.generators().count();
    run.finish(format!("generators={generators} protections={}", reg.len() - generators))
}

/// Vanishing-trace suite sizes.
#[derive(Clone, Copy, Debug)]
pub struct Lemma2Sizes {
    pub states: usize,
    pub links_per_state: usize,
    pub words_per_state: usize,
}

const HORIZON: usize = 6;

fn clip(t: &Tuple, n: usize) -> Tuple {
    t.prefix(n.min(t.len()))
}

/// A random projection or registered generator (or adjoint) whose domain is
/// biased toward `accept`.
fn lemma2_factor(
    g: &mut Gen,
    reg: &Registry,
    pool: &[Monomial],
    accept: Option<&Tuple>,
) -> Monomial {
    if let Some(t) = accept {
        if g.chance(0.8) {
            let fits: Vec<&Monomial> = pool
                .iter()
                .filter(|m| m.domain().is_some_and(|d| d.extends(t) || t.extends(d)))
                .collect();
            if !fits.is_empty() && g.chance(0.7) {
                return fits[g.below(fits.len())].clone();
            }
            return Monomial::projection(g.comparable(t, 5, 9));
        }
    }
    let _ = reg;
    if g.chance(0.6) {
        pool[g.below(pool.len())].clone()
    } else {
        Monomial::projection(g.tuple(0, 3, 9))
    }
}

/// Vanishing traces on random states, registries and words.
pub fn lemma2_end_to_end(seed: u64, sizes: Lemma2Sizes) -> Report {
    let mut run = Run::new("lemma2");
    let mut g = Gen::new(seed);
    let mut tags: BTreeMap<&'static str, usize> = BTreeMap::new();
    let (mut nonzero, mut zero, mut combos) = (0usize, 0usize, 0usize);
    for _ in 0..sizes.states {
        let mut reg = Registry::new();
        for _ in 0..g.below(6) {
            let (alpha, beta) = (g.tuple(0, 3, 8), g.tuple(0, 3, 8));
            reg.link(&alpha, &beta);
        }
        let rho = g.state(4, 3, 8);
        let prot = reg.register_protection(&rho, HORIZON);
        let a = reg.vanishing_tuple(&prot);

        for _ in 0..sizes.links_per_state {
            let known: Vec<Tuple> = reg
                .generators()
                .flat_map(|x| [x.a.clone(), x.b.clone()])
                .collect();
            let pick = |g: &mut Gen| match g.below(4) {
                0 => a.concat(&g.tuple(0, 3, 9)),
                1 if !known.is_empty() => clip(&known[g.below(known.len())], 1 + g.below(3)),
                _ => g.tuple(0, 3, 9),
            };
            let (alpha, beta) = (pick(&mut g), pick(&mut g));
            let (alpha, beta) = (clip(&alpha, 4), clip(&beta, 4));
            reg.link(&alpha, &beta);
        }

        let pa = Monomial::projection(a.clone());
        let mut pool: Vec<Monomial> = reg
            .generators()
            .flat_map(|x| [x.monomial(), x.monomial().adjoint()])
            .collect();
        pool.push(pa.clone());

        let mut batch: Vec<Monomial> = Vec::new();
        for _ in 0..sizes.words_per_state {
            run.cases += 1;
            let len = 1 + g.below(6);
            let mut rev: Vec<Monomial> = Vec::with_capacity(len + 1);
            let mut running: Option<Monomial> = None;
            for _ in 0..len {
                let accept = running.as_ref().and_then(|m| m.range().cloned());
                let f = lemma2_factor(&mut g, &reg, &pool, accept.as_ref());
                running = Some(match running {
                    None => f.clone(),
                    Some(r) => f.multiply(&r),
                });
                rev.push(f);
            }
            if !rev.contains(&pa) {
                let at = g.below(rev.len() + 1);
                rev.insert(at, pa.clone());
            }
            rev.reverse();
            let word = rev;
            let product = normal_form(&word).expect("non-empty");
            let value = rho.eval(&Polynomial::monomial(product.clone()));
            run.check(value.is_zero(), || {
                format!("state is {value} on {} (= {product})", Expr::from_word(&word))
            });
            let outcome = lemma2_witness(&reg, prot.stage, &a, &word);
            match (outcome, product.is_zero()) {
                (Ok(Lemma2Outcome::Zero(z)), true) => {
                    zero += 1;
                    let suffix = normal_form(&word[z.position..]);
                    run.check(suffix == Some(Monomial::Zero), || {
                        format!("zero report at {} but the suffix is {suffix:?}", z.position)
                    });
                }
                (Ok(Lemma2Outcome::Trace(t)), false) => {
                    nonzero += 1;
                    for s in &t.steps {
                        *tags.entry(s.tag.name()).or_default() += 1;
                    }
                    let verified = crate::theorems::verify_trace(&reg, &t);
                    run.check(verified.is_ok(), || format!("trace rejected: {verified:?}"));
                    let (b, n) = (&t.final_b, t.final_n);
                    // (1): the range of the product lies inside X_b.
                    let range = product.range().expect("nonzero");
                    run.check(range.extends(b), || format!("P{b} does not fix {product}"));
                    // (2) and (3) by direct scan.
                    let bn = b.coord(n);
                    let clash_g = reg
                        .generators()
                        .filter(|x| x.stage <= prot.stage)
                        .any(|x| x.a.coord(n) == bn || x.b.coord(n) == bn);
                    let clash_p = prot.tuples.iter().any(|c| c.coord(n) == bn);
                    run.check(bn.is_some() && !clash_g && !clash_p, || {
                        format!("(b, n) = ({b}, {n}) collides with earlier labels")
                    });
                    let rho_pb = rho.eval(&Polynomial::projection(b.clone()));
                    run.check(rho_pb.is_zero(), || format!("state gives P{b} the value {rho_pb}"));
                    let check = vanishing_check(&rho, &reg, prot.stage, &a, &word);
                    run.check(
                        matches!(&check, Ok(r) if r.value.is_zero() && matches!(r.claim, VanishingClaim::Certified(_))),
                        || format!("vanishing check: {check:?}"),
                    );
                    batch.push(product);
                }
                (other, is_zero) => run.check(false, || {
                    format!(
                        "word {} (zero={is_zero}) gave {other:?}",
                        Expr::from_word(&word)
                    )
                }),
            }
            if batch.len() >= 8 {
                let mut sum = Polynomial::zero();
                for m in batch.drain(..) {
                    sum.add_term(g.scalar(), m);
                }
                combos += 1;
                let value = rho.eval(&sum);
                run.check(value.is_zero(), || format!("state is {value} on {sum}"));
            }
        }
    }
    let tag_text: Vec<String> = tags.iter().map(|(k, v)| format!("{k}={v}")).collect();
    run.finish(format!(
        "nonzero={nonzero} zero={zero} combinations={combos} cases[{}]",
        tag_text.join(" ")
    ))
}

/// A random polynomial with a point where `q*q` has a positive diagonal.
pub fn positive_pair(g: &mut Gen) -> (Polynomial, SequenceDesc) {
    loop {
        let q = g.polynomial(3, 3, 6);
        let source = q.adjoint().multiply(&q);
        let tail = Label(q.labels().iter().map(|l| l.0 + 1).max().unwrap_or(0));
        let mut domains: Vec<Tuple> = q.terms().filter_map(|(m, _)| m.domain().cloned()).collect();
        g.shuffle(&mut domains);
        for d in domains {
            let x = SequenceDesc::new(d.concat(&g.tuple(0, 1, 6)), tail);
            if source.g_eval(&x).is_positive_real() {
                return (q, x);
            }
        }
    }
}

/// Full primeness pipeline, re-checked through the certificate text.
pub fn primeness(seed: u64, pairs: usize) -> Report {
    let mut run = Run::new("primeness");
    let mut g = Gen::new(seed);
    let mut reg = Registry::new();
    for _ in 0..pairs {
        run.cases += 1;
        if g.chance(0.2) {
            let rho = g.state(3, 3, 8);
            reg.register_protection(&rho, 1 + g.below(4));
        }
        let (q1, x1) = positive_pair(&mut g);
        let (q2, x2) = positive_pair(&mut g);
        let cert = ideal_projection_witness(&reg, &q1, &x1).and_then(|w1| {
            let w2 = ideal_projection_witness(&reg, &q2, &x2)?;
            primeness_witness(&mut reg, &w1, &w2)
        });
        let cert = match cert {
            Ok(c) => c,
            Err(e) => {
                run.check(false, || format!("no certificate for {q1} @ {x1}, {q2} @ {x2}: {e}"));
                continue;
            }
        };
        let b = cert.generator.b.clone();
        let product = cert.product.eval();
        run.check(product == Polynomial::projection(b.clone()), || {
            format!("certificate product is {product}, not P{b}")
        });
        let text = primeness_text(&cert);
        let verified = verify_text(&text, Some(&reg));
        run.check(verified == Ok(Verified::Prime { claim: b.clone() }), || {
            format!("verify rejected a genuine certificate: {verified:?}")
        });
        let forged = text.replace(&format!("claim: P({b})"), &format!("claim: P({})", b.prefix(b.len() - 1)));
        run.check(verify_text(&forged, Some(&reg)).is_err(), || "forged claim accepted".into());
    }
    let audit = reg.audit();
    run.check(audit.is_ok(), || format!("audit: {audit:?}"));
    run.finish(String::new())
}

/// Fragment matrices of `q*q` are positive semidefinite.
pub fn fragment_psd(seed: u64, cases: usize) -> Report {
    let mut run = Run::new("fragment-psd");
    let mut g = Gen::new(seed);
    let mut max_dim = 0;
    for _ in 0..cases {
        run.cases += 1;
        let q = g.polynomial(4, 3, 5);
        let source = q.adjoint().multiply(&q);
        let level = source.max_tuple_len().max(1) + g.below(2);
        let m = FragmentMatrix::of(&source, level).expect("level covers q*q");
        max_dim = max_dim.max(m.dim());
        run.check(m.is_hermitian() && m.is_psd(), || format!("fragment of ({q})* ({q}) is not PSD"));
        let neg = FragmentMatrix::of(&source.scale(&Scalar::from_int(-1)), level).expect("same level");
        let all_zero = m.entries.iter().flatten().all(Scalar::is_zero);
        run.check(all_zero || !neg.is_psd(), || format!("-({q})* ({q}) passed the PSD check"));
    }
    run.finish(format!("max-dim={max_dim}"))
}

/// A random session transcript mixing every request kind.
pub fn random_transcript(g: &mut Gen, len: usize) -> Vec<Request> {
    let mut session = Session::new();
    let mut names = 0usize;
    while session.events().len() < len {
        let request = match g.below(6) {
            0 | 1 => Request::Link {
                alpha: g.tuple(0, 3, 8),
                beta: g.tuple(0, 3, 8),
            },
            2 => Request::RegisterState {
                state: g.state(3, 3, 8),
                horizon: 1 + g.below(5),
            },
            3 => {
                names += 1;
                Request::Let {
                    name: format!("p{names}"),
                    expr: Expr::from_polynomial(&g.polynomial(3, 3, 6)),
                }
            }
            4 => {
                let (q1, x1) = positive_pair(g);
                let (q2, x2) = positive_pair(g);
                Request::Prime {
                    name: g.chance(0.5).then(|| format!("c{}", session.events().len())),
                    q1: Expr::from_polynomial(&q1),
                    x1,
                    q2: Expr::from_polynomial(&q2),
                    x2,
                }
            }
            _ => {
                let prots: Vec<Stage> = session.registry().protections().map(|p| p.stage).collect();
                if prots.is_empty() {
                    continue;
                }
                let stage = prots[g.below(prots.len())];
                let prot = session.registry().protection(stage).expect("listed");
                let a = session.registry().vanishing_tuple(prot);
                let pool: Vec<Monomial> = session
                    .registry()
                    .generators()
                    .map(|x| x.monomial())
                    .collect();
                let mut word = vec![Monomial::projection(a)];
                for _ in 0..g.below(3) {
                    let f = if !pool.is_empty() && g.chance(0.6) {
                        pool[g.below(pool.len())].clone()
                    } else {
                        Monomial::projection(g.tuple(0, 2, 8))
                    };
                    word.insert(g.below(word.len() + 1), f);
                }
                Request::Lemma2 {
                    name: Some(format!("t{}", session.events().len())),
                    protection: stage,
                    word: Expr::from_word(&word),
                }
            }
        };
        let _ = session.apply(request);
    }
    session.transcript()
}

/// Replays of a transcript produce byte-identical session files.
pub fn determinism(seed: u64, transcripts: usize) -> Report {
    let mut run = Run::new("determinism");
    let mut g = Gen::new(seed);
    for _ in 0..transcripts {
        run.cases += 1;
        let requests = random_transcript(&mut g, 24);
        let text: String = requests.iter().map(|r| format!("{r}\n")).collect();
        let parsed = parse_transcript(&text);
        run.check(parsed.as_ref() == Ok(&requests), || format!("transcript does not reparse: {parsed:?}"));
        let first = Session::replay(requests.clone()).map(|s| s.to_text());
        let second = Session::replay(requests).map(|s| s.to_text());
        run.check(first.is_ok() && first == second, || "replays differ".into());
        if let Ok(file) = &first {
            let reloaded = Session::from_text(file).map(|s| s.to_text());
            run.check(reloaded.as_ref() == Ok(file), || format!("reload differs: {reloaded:?}"));
        }
    }
    run.finish(String::new())
}

/// Case counts for a full run.
#[derive(Clone, Copy, Debug)]
pub struct Sizes {
    pub closure_words: usize,
    pub law_cases: usize,
    pub compression_polys: usize,
    pub oracle_ops: usize,
    pub lemma2: Lemma2Sizes,
    pub prime_pairs: usize,
    pub psd_cases: usize,
    pub transcripts: usize,
}

impl Sizes {
    /// The sizes used by the acceptance suite.
    pub fn acceptance() -> Self {
        Sizes {
            closure_words: 10_000,
            law_cases: 10_000,
            compression_polys: 1_000,
            oracle_ops: 1_000,
            lemma2: Lemma2Sizes {
                states: 20,
                links_per_state: 50,
                words_per_state: 250,
            },
            prime_pairs: 100,
            psd_cases: 200,
            transcripts: 10,
        }
    }

    /// Every suite at roughly `cases` cases.
    pub fn uniform(cases: usize) -> Self {
        let cases = cases.max(1);
        Sizes {
            closure_words: cases,
            law_cases: cases,
            compression_polys: cases,
            oracle_ops: cases,
            lemma2: Lemma2Sizes {
                states: cases.div_ceil(50),
                links_per_state: 50,
                words_per_state: 50,
            },
            prime_pairs: cases,
            psd_cases: cases,
            transcripts: cases.div_ceil(20),
        }
    }
}

/// Runs all suites; suite `k` uses seed `seed + k`.
pub fn run_all(seed: u64, sizes: &Sizes) -> Vec<Report> {
    vec![
        closure(seed, sizes.closure_words),
        algebra_laws(seed.wrapping_add(1), sizes.law_cases),
        compression(seed.wrapping_add(2), sizes.compression_polys),
        oracle_invariants(seed.wrapping_add(3), sizes.oracle_ops),
        lemma2_end_to_end(seed.wrapping_add(4), sizes.lemma2),
        primeness(seed.wrapping_add(5), sizes.prime_pairs),
        fragment_psd(seed.wrapping_add(6), sizes.psd_cases),
        determinism(seed.wrapping_add(7), sizes.transcripts),
    ]
}
