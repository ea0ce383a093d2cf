use std::process::Command;

use dirac_cli::{run, AnalysisReport, VerifyReport};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
const MODELS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");

fn dirac(args: &[&str]) -> dirac_cli::Outcome {
    run(std::iter::once("dirac").chain(args.iter().copied()))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{GOLDEN}/{name}")).unwrap()
}

#[test]
fn text_reports_match_golden() {
    for p in ["jr-symbolic", "jr-a1", "jr-wz", "jr-wz-gaugefixed"] {
        let out = dirac(&["analyze", p]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert_eq!(out.stdout, golden(&format!("{p}.txt")), "{p}");
    }
}

#[test]
fn json_reports_match_golden_and_round_trip() {
    for p in ["jr-symbolic", "jr-a1", "jr-wz", "jr-wz-gaugefixed"] {
        let out = dirac(&["analyze", p, "--format", "json"]);
        assert_eq!(out.code, 0);
        assert_eq!(out.stdout, golden(&format!("{p}.json")), "{p}");
        let r: AnalysisReport = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(r.schema, 1);
        assert_eq!(r.to_json() + "\n", out.stdout);
    }
}

#[test]
fn report_contents() {
    let out = dirac(&["analyze", "jr-symbolic"]);
    assert!(out
        .stdout
        .contains("[A0(y), A1(x)] = i * ((1/(e^2*(a - 1))) d_y delta(y-x))"));
    let wz: AnalysisReport =
        serde_json::from_str(&dirac(&["analyze", "jr-wz", "--format", "json"]).stdout).unwrap();
    let cl = wz.classification.unwrap();
    assert_eq!(cl.determinant, "0");
    assert_eq!(
        cl.first_class,
        vec!["C1".to_string(), "C2 + C3".to_string()]
    );
    assert!(wz.commutators.is_none());
}

#[test]
fn specialized_symbolic_chain_matches_a1() {
    let parse =
        |args: &[&str]| -> AnalysisReport { serde_json::from_str(&dirac(args).stdout).unwrap() };
    let s = parse(&[
        "analyze",
        "jr-symbolic",
        "--param",
        "a=1",
        "--param",
        "e=1",
        "--format",
        "json",
    ]);
    let a1 = parse(&["analyze", "jr-a1", "--format", "json"]);
    assert_eq!(s.constraints, a1.constraints);
    assert_eq!(s.classification, a1.classification);
    assert_eq!(s.commutators, a1.commutators);
}

#[test]
fn rational_parameters() {
    let out = dirac(&["analyze", "jr-symbolic", "--param", "a=5/2"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("a = 5/2"));
}

#[test]
fn model_files() {
    let a1 = dirac(&["analyze", &format!("{MODELS}/jr-a1.lag")]);
    assert_eq!(a1.code, 0);
    assert_eq!(a1.stdout, golden("jr-a1.txt"));
    let gf = dirac(&[
        "analyze",
        &format!("{MODELS}/jr-wz.lag"),
        "--gauge",
        &format!("{MODELS}/jr-wz.gauge"),
    ]);
    assert_eq!(gf.code, 0);
    assert_eq!(
        gf.stdout
            .replacen("model: jr-wz\n", "model: jr-wz-gaugefixed\n", 1),
        golden("jr-wz-gaugefixed.txt")
    );
}

#[test]
fn input_errors_exit_1() {
    let dir = std::env::temp_dir().join(format!("dirac-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.lag");
    std::fs::write(&bad, "fields phi;\nL = dt(phi)^3;\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["analyze".into(), "no-such-model".into()],
        vec!["analyze".into(), bad.display().to_string()],
        vec![
            "analyze".into(),
            "jr-a1".into(),
            "--param".into(),
            "a=2".into(),
        ],
        vec![
            "analyze".into(),
            "jr-symbolic".into(),
            "--param".into(),
            "a".into(),
        ],
        vec!["analyze".into(), "jr-a1".into(), "--bogus".into()],
        vec![
            "verify".into(),
            "ansatz".into(),
            "--a".into(),
            "1".into(),
            "--e".into(),
            "1".into(),
            "--k".into(),
            "0.5".into(),
        ],
        vec![
            "verify".into(),
            "lattice".into(),
            "--preset".into(),
            "jr-a1".into(),
            "--n".into(),
            "4".into(),
        ],
        vec!["verify".into(), "nonsense".into()],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = dirac(&refs);
        assert_eq!(out.code, 1, "{args:?}: {}", out.stderr);
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn obstructions_exit_2() {
    let dir = std::env::temp_dir().join(format!("dirac-cli-gauge-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let one = dir.join("one.gauge");
    std::fs::write(&one, "-dx(theta)\n").unwrap();
    let out = dirac(&["analyze", "jr-wz", "--gauge", one.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("C1"), "{}", out.stderr);
    // Decoupled at e = 0: first class, which is a result rather than an obstruction.
    let free = dirac(&["analyze", "jr-symbolic", "--param", "e=0"]);
    assert_eq!(free.code, 0, "{}", free.stderr);
    assert!(free.stdout.contains("first class: C1; C2"));
}

#[test]
fn help_exits_0() {
    let out = dirac(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("analyze"));
}

#[test]
fn verify_suites() {
    let a = dirac(&["verify", "ansatz", "--a", "2", "--e", "1", "--k", "0.7"]);
    assert_eq!(a.code, 0);
    let r: VerifyReport = serde_json::from_str(&a.stdout).unwrap();
    assert!(r.pass);
    assert_eq!(r.summary["m2"], 4.0);

    let o = dirac(&["verify", "oracle", "--preset", "jr-a1"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let r: VerifyReport = serde_json::from_str(&o.stdout).unwrap();
    let delta = r
        .records
        .iter()
        .filter(|c| c.check.starts_with("delta-oracle"))
        .count();
    assert_eq!(delta, 3 * 16);
    assert!(r.pass);
}

#[test]
fn failing_checks_exit_2() {
    // Energy drift with a coarse step exceeds its bound.
    let out = dirac(&[
        "verify", "lattice", "--preset", "jr-a1", "--n", "64", "--dt", "0.04", "--t-end", "4",
    ]);
    assert_eq!(out.code, 2, "{}", out.stderr);
    let r: VerifyReport = serde_json::from_str(&out.stdout).unwrap();
    assert!(!r.pass);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["analyze", "jr-wz-gaugefixed", "--format", "json"][..],
        &[
            "verify", "oracle", "--preset", "jr-wz", "--n", "128", "--seeds", "4,5",
        ][..],
        &[
            "verify", "lattice", "--preset", "jr-a1", "--n", "64", "--dt", "0.01", "--t-end", "1",
        ][..],
    ] {
        assert_eq!(dirac(args), dirac(args));
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dirac");
    let ok = Command::new(bin)
        .args(["analyze", "jr-a1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), golden("jr-a1.txt"));
    let bad = Command::new(bin)
        .args(["verify", "ansatz", "--a", "1", "--e", "1", "--k", "0.5"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8(bad.stderr)
        .unwrap()
        .contains("domain error"));
}
