//! Acceptance suite. Run with
//! `cargo test -p cylalg --test acceptance -- --nocapture`
//! to see one line per criterion.

use std::time::Duration;

use cylalg::selftest::{self, Report, Sizes};

const SEED: u64 = 20_240_601;

struct Criterion {
    number: usize,
    title: &'static str,
    minimum: usize,
    limit: Option<Duration>,
    report: Report,
}

impl Criterion {
    fn ok(&self) -> bool {
        self.report.passed()
            && self.report.cases >= self.minimum
            && self.limit.is_none_or(|l| self.report.elapsed < l)
    }

    fn line(&self) -> String {
        let limit = self
            .limit
            .map(|l| format!(" limit={}s", l.as_secs()))
            .unwrap_or_default();
        format!(
            "[{}] {}. {} (min cases {}{limit}): {}",
            if self.ok() { "PASS" } else { "FAIL" },
            self.number,
            self.title,
            self.minimum,
            self.report
        )
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

#[test]
fn acceptance_criteria() {
    let sizes = Sizes::acceptance();
    let l2 = sizes.lemma2;
    assert!(l2.states >= 20 && l2.links_per_state >= 50 && l2.states * l2.words_per_state >= 1000);

    let criteria = vec![
        Criterion {
            number: 1,
            title: "semigroup closure and point-action oracle",
            minimum: 10_000,
            limit: secs(10),
            report: selftest::closure(SEED, sizes.closure_words),
        },
        Criterion {
            number: 2,
            title: "associativity, involution, V V* V = V",
            minimum: 10_000,
            limit: secs(10),
            report: selftest::algebra_laws(SEED + 1, sizes.law_cases),
        },
        Criterion {
            number: 3,
            title: "g-constancy and fresh compression",
            minimum: 1_000,
            limit: secs(30),
            report: selftest::compression(SEED + 2, sizes.compression_polys),
        },
        Criterion {
            number: 4,
            title: "registry invariants under interleaving",
            minimum: 1_000,
            limit: secs(10),
            report: selftest::oracle_invariants(SEED + 3, sizes.oracle_ops),
        },
        Criterion {
            number: 5,
            title: "vanishing witnesses end to end",
            minimum: 1_000,
            limit: secs(60),
            report: selftest::lemma2_end_to_end(SEED + 4, l2),
        },
        Criterion {
            number: 6,
            title: "primeness certificates via verify",
            minimum: 100,
            limit: secs(30),
            report: selftest::primeness(SEED + 5, sizes.prime_pairs),
        },
        Criterion {
            number: 7,
            title: "fragment matrices of q*q are PSD",
            minimum: 200,
            limit: secs(30),
            report: selftest::fragment_psd(SEED + 6, sizes.psd_cases),
        },
        Criterion {
            number: 8,
            title: "session replay is byte-identical",
            minimum: 1,
            limit: None,
            report: selftest::determinism(SEED + 7, sizes.transcripts),
        },
    ];

    for c in &criteria {
        println!("{}", c.line());
    }
    let failed: Vec<usize> = criteria.iter().filter(|c| !c.ok()).map(|c| c.number).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
