use std::path::Path;
use std::process::{Command, Output};

fn wsquad(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsquad"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let help = wsquad(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    for sub in [
        "rule1d",
        "sparse",
        "integrate",
        "converge",
        "fool",
        "selftest",
    ] {
        assert!(stdout(&help).contains(sub), "{sub} missing from help");
    }
    assert_eq!(wsquad(&["--version"], dir.path()).status.code(), Some(0));
    assert_eq!(
        wsquad(&["converge", "--help"], dir.path()).status.code(),
        Some(0)
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 7] = [
        &[],
        &["bogus"],
        &["rule1d"],
        &["rule1d", "--m", "5", "--theta", "1.5"],
        &["sparse", "--dim", "3", "--xi", "2", "--svg", "x.svg"],
        &[
            "integrate",
            "--dim",
            "2",
            "--xi",
            "3",
            "--fn",
            "builtin:nope",
        ],
        &["converge", "--budgets", "64:16:x2"],
    ];
    for args in cases {
        let out = wsquad(args, dir.path());
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
    let missing = wsquad(
        &["fool", "--dim", "1", "--against", "absent.csv"],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(1));
    let threads = wsquad(&["--threads", "0", "selftest"], dir.path());
    assert_eq!(threads.status.code(), Some(1));
}

#[test]
fn selftest_is_green_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let a = wsquad(&["selftest", "--json", "a.json"], dir.path());
    let b = wsquad(&["selftest", "--json", "b.json"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert!(!stdout(&a).contains("FAIL"));
    assert_eq!(a.stdout, b.stdout);
    let ja = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(ja, std::fs::read(dir.path().join("b.json")).unwrap());
    assert!(String::from_utf8(ja).unwrap().contains("\"schema\": 1"));
}

#[test]
fn converge_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "converge",
        "--dim",
        "1",
        "--r",
        "2",
        "--family",
        "bumps",
        "--budgets",
        "16:512:x2",
        "--witness",
    ];
    let mut first = args.to_vec();
    first.extend(["--out", "one.json"]);
    let mut second = vec!["--threads", "1"];
    second.extend(args);
    second.extend(["--out", "two.json"]);
    assert_eq!(wsquad(&first, dir.path()).status.code(), Some(0));
    assert_eq!(wsquad(&second, dir.path()).status.code(), Some(0));
    let one = std::fs::read_to_string(dir.path().join("one.json")).unwrap();
    assert_eq!(
        one,
        std::fs::read_to_string(dir.path().join("two.json")).unwrap()
    );
    let report: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["points"].as_array().unwrap().len(), 6);
    assert!(report["fit"]["slope"].as_f64().unwrap() < -0.5);
    // no temporary files are left next to the output
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(entries, 2);
}

#[test]
fn rule1d_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = wsquad(&["rule1d", "--m", "10", "--full"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# spec {"));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("node"))
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    let mass: f64 = rows.iter().map(|r| r[1]).sum();
    assert!((mass - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    let truncated = wsquad(&["rule1d", "--budget", "20", "--out", "t.csv"], dir.path());
    assert_eq!(truncated.status.code(), Some(0));
    let t = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(t.lines().filter(|l| !l.starts_with('#')).count() <= 21);
}

#[test]
fn integrate_reports_value_and_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("gauss.json"),
        r#"{"family":"freud","lambda":2,"a":0.5,"b":-0.9189385332046727}"#,
    )
    .unwrap();
    let out = wsquad(
        &[
            "integrate",
            "--spec",
            "gauss.json",
            "--dim",
            "2",
            "--xi",
            "5",
            "--fn",
            "builtin:poly2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let field = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!((field("exact") - 1.0).abs() < 1e-13);
    assert!((field("error") - (field("value") - field("exact")).abs()).abs() < 1e-15);
    assert!(field("error") < 0.05);
}

#[test]
fn sparse_nodes_feed_the_fooling_witness() {
    let dir = tempfile::tempdir().unwrap();
    let sparse = wsquad(
        &[
            "sparse",
            "--dim",
            "2",
            "--xi",
            "5",
            "--out",
            "nodes.csv",
            "--svg",
            "cross.svg",
        ],
        dir.path(),
    );
    assert_eq!(sparse.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("cross.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<circle"));
    let fool = wsquad(
        &[
            "fool",
            "--dim",
            "2",
            "--r",
            "1",
            "--against",
            "nodes.csv",
            "--report",
            "w.json",
        ],
        dir.path(),
    );
    assert_eq!(
        fool.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&fool.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert!(report["integral"].as_f64().unwrap() > 0.0);
    assert!(report["norm_certificate"].as_f64().unwrap() <= 1.0);
    assert_eq!(report["lows"].as_array().unwrap().len(), 2);
}
