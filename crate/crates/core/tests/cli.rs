use std::fs;
use std::path::Path;
use std::process::Command;

use mub_core::frames::MubSet;

fn mubtool(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mubtool")).args(args).output().expect("run mubtool");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mub = dir.path().join("d8.mub");
    let spread = dir.path().join("d8.spread");
    let plane = dir.path().join("d8.plane");
    let (code, out, err) = mubtool(&[
        "build", "--family", "desarguesian", "--p", "2", "--n", "3", "--out", s(&mub), "--spread-out", s(&spread),
        "--plane-out", s(&plane),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(!out.contains("FAIL"), "{out}");
    for file in [&mub, &spread, &plane] {
        let (code, out, _) = mubtool(&["verify", s(file)]);
        assert_eq!(code, 0, "{out}");
        assert!(out.lines().all(|l| l.starts_with("CHECK ") && l.contains(" PASS")), "{out}");
    }
    let text = fs::read_to_string(&mub).unwrap();
    assert_eq!(MubSet::parse(&text).unwrap().to_text(), text);
    let (code, out, _) = mubtool(&["verify", s(&mub), "--mode", "all-pairs"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn export_and_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let mub = dir.path().join("d9.mub");
    assert_eq!(mubtool(&["build", "--family", "desarguesian", "--p", "3", "--n", "2", "--out", s(&mub)]).0, 0);
    let vectors = dir.path().join("d9.txt");
    assert_eq!(mubtool(&["export", s(&mub), "--out", s(&vectors)]).0, 0);
    let rows = fs::read_to_string(&vectors).unwrap().lines().filter(|l| l.starts_with("NORM=")).count();
    assert_eq!(rows, 9 * 10);

    let (code, one, _) = mubtool(&["--threads", "1", "invariants", s(&mub)]);
    assert_eq!(code, 0);
    assert!(one.contains("standard_invariance=PASS"), "{one}");
    assert!(one.contains("plane_p_rank=36"), "{one}");
    let (_, four, _) = mubtool(&["--threads", "4", "invariants", s(&mub)]);
    assert_eq!(one, four);
}

#[test]
fn verification_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mub = dir.path().join("d4.mub");
    assert_eq!(mubtool(&["build", "--family", "desarguesian", "--p", "2", "--n", "2", "--out", s(&mub)]).0, 0);
    let text = fs::read_to_string(&mub).unwrap();
    // Bump the first exponent of the last table row.
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.iter().rposition(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).unwrap();
    let mut cells: Vec<String> = lines[last].split_whitespace().map(String::from).collect();
    cells[0] = ((cells[0].parse::<u32>().unwrap() + 1) % 4).to_string();
    lines[last] = cells.join(" ");
    fs::write(&mub, lines.join("\n") + "\n").unwrap();
    let (code, out, _) = mubtool(&["verify", s(&mub)]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL"), "{out}");
}

#[test]
fn errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.mub");
    let (code, _, err) = mubtool(&["build", "--family", "kantor", "--n", "3", "--out", s(&out)]);
    assert_eq!(code, 2, "{err}");
    assert!(!out.exists());

    let junk = dir.path().join("junk.mub");
    fs::write(&junk, "MUBSET version=1\nROOT zeta p=3\nDIM N=banana\n").unwrap();
    let (code, _, err) = mubtool(&["verify", s(&junk)]);
    assert_eq!(code, 2);
    assert!(err.contains("line 3"), "{err}");

    assert_eq!(mubtool(&["verify", s(&dir.path().join("missing"))]).0, 2);
    assert_eq!(mubtool(&["build", "--family", "planar", "--n", "5", "--out", s(&out)]).0, 2);
    assert_eq!(mubtool(&["nonsense"]).0, 2);
}

#[test]
fn orthogonal_search() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = mubtool(&["search", "--n", "2", "--limit", "1", "--out-dir", s(dir.path())]);
    assert_eq!(code, 0, "{out}");
    let file = dir.path().join("orthospread-n2-0.txt");
    assert_eq!(mubtool(&["verify", s(&file)]).0, 0);
    assert_eq!(mubtool(&["search", "--n", "3", "--out-dir", s(dir.path())]).0, 2);
}

#[test]
fn bkl_build() {
    let dir = tempfile::tempdir().unwrap();
    let mub = dir.path().join("bkl.mub");
    let (code, out, err) =
        mubtool(&["build", "--family", "bkl", "--p", "3", "--n", "3", "--s", "1", "--out", s(&mub), "--mode", "difference-class"]);
    assert_eq!(code, 0, "{out}{err}");
    let m = MubSet::parse(&fs::read_to_string(&mub).unwrap()).unwrap();
    assert_eq!(m.frames.len(), 28);
    assert_eq!(m.provenance.unwrap().family, "bkl");
}
