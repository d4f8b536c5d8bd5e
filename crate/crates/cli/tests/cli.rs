use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cylalg(session: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cylalg"));
    if let Some(s) = session {
        cmd.arg("--session").arg(s);
    }
    cmd.args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn link_on_fresh_session_prints_n3() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.txt");
    let o = cylalg(Some(&s), &["link", "(1)", "(2,7)"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "generator stage=0 n=3 label=0 a=(1,0,0) b=(2,7,0)\n");
    let file = fs::read_to_string(&s).unwrap();
    assert!(file.starts_with("cylalg-session 1\n"));
    assert!(file.contains("link | (1) | (2,7) | stage=0 n=3"));
}

#[test]
fn normalize_composes_right_to_left() {
    let o = cylalg(None, &["normalize", "V((1);(2)) V((3);(1))"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "V((3);(2))\n");
    let o = cylalg(None, &["normalize", "P((1)) * V((1);(2))'"]);
    assert_eq!(stdout(&o), "V((2);(1))\n");
}

#[test]
fn parse_errors_exit_2() {
    let o = cylalg(None, &["normalize", "V((1);(2,3))"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("length mismatch"));
    let o = cylalg(None, &["normalize", "P((1)"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cylalg(None, &["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certificates_verify_and_tampering_fails() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.txt");
    let cert = dir.path().join("c.txt");
    let o = cylalg(
        Some(&s),
        &[
            "prime-witness",
            "P((1)) + 2 V((1);(3))",
            "(1)/0",
            "i V((2,5);(4,4))",
            "(2,5)/0",
            "--out",
            cert.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cylalg(None, &["verify", cert.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("verified prime P("));

    let text = fs::read_to_string(&cert).unwrap();
    let forged = dir.path().join("forged.txt");
    fs::write(&forged, text.replace("w1.scalar: 5", "w1.scalar: 6")).unwrap();
    let o = cylalg(None, &["verify", forged.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn lemma2_trace_round_trip_through_session() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.txt");
    let trace = dir.path().join("t.txt");
    assert!(cylalg(Some(&s), &["register-state", "1 @ (1,2)/0", "3"]).status.success());
    let o = cylalg(Some(&s), &["vanishing-tuple", "0"]);
    assert_eq!(stdout(&o), "(0)\n");
    assert!(cylalg(Some(&s), &["link", "(0)", "(5)"]).status.success());
    let o = cylalg(
        Some(&s),
        &["lemma2", "0", "V((0,0);(5,0)) P((0))", "--out", trace.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cylalg(Some(&s), &["verify", trace.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Without the session the registry is unknown.
    let o = cylalg(None, &["verify", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = cylalg(Some(&s), &["vanishing-check", "0", "V((0,0);(5,0)) P((0))"]);
    assert_eq!(stdout(&o), "value 0\nclaim certified b=(5,0) n=2\n");
    assert!(cylalg(Some(&s), &["audit"]).status.success());
}

#[test]
fn edited_session_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.txt");
    assert!(cylalg(Some(&s), &["link", "(1)", "(2)"]).status.success());
    let text = fs::read_to_string(&s).unwrap();
    fs::write(&s, text.replace("label=0", "label=3")).unwrap();
    let o = cylalg(Some(&s), &["audit"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn replaying_a_transcript_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("t.txt");
    fs::write(
        &transcript,
        "# requests\nlink | (1) | (2,7)\nstate | 1/2 @ (1)/0; 1/2 @ (3,3)/1 | 2\nlet | p | P((1)) - V((1);(2))\n",
    )
    .unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for s in [&a, &b] {
        let o = cylalg(Some(s), &["replay", transcript.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn selftest_is_deterministic_under_seed() {
    let args = ["selftest", "--seed", "3", "--cases", "20"];
    let first = cylalg(None, &args);
    let second = cylalg(None, &args);
    assert!(first.status.success(), "{}", stdout(&first));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(stdout(&first).lines().count(), 8);
}
