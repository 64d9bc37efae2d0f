use std::path::Path;
use std::process::{Command, Output};

fn hamlocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamlocal"))
        .args(args)
        .env_remove("HAMLOCAL_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn report_to(path: &Path, workers: &str, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["--workers", workers, "--output", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = hamlocal(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::read(path).unwrap()
}

#[test]
fn test_report_identical_across_reruns_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = [
        "test",
        "--generator",
        "zchain:n=3,k-prime=3,eps=0.6",
        "--seed",
        "7",
    ];
    let first = report_to(&path, "1", &args);
    assert_eq!(report_to(&path, "1", &args), first);
    for w in ["4", "8"] {
        assert_eq!(report_to(&path, w, &args), first, "workers {w}");
    }
    let text = String::from_utf8(first).unwrap();
    for key in [
        "\"schema\": 1",
        "\"seed\": 7",
        "\"schedule\"",
        "\"formula\"",
        "\"decision\": \"far\"",
        "\"transcript\"",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
    assert!(!text.contains("workers"));
    assert!(!text.contains("report.json"));
}

#[test]
fn worker_count_from_environment() {
    let args = [
        "test",
        "--generator",
        "zchain:n=3,k-prime=1,eps=0.6",
        "--algorithm",
        "baseline",
    ];
    let plain = hamlocal(&args);
    let env = Command::new(env!("CARGO_BIN_EXE_hamlocal"))
        .args(args)
        .env("HAMLOCAL_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(plain.stdout, env.stdout);
    assert!(stdout(&plain).contains("\"decision\": \"local\""));
}

#[test]
fn ae_without_inverse_is_a_capability_error() {
    let o = hamlocal(&[
        "test",
        "--generator",
        "zchain:n=3,k-prime=3,eps=0.6",
        "--algorithm",
        "ae",
        "--access",
        "forward,controlled",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("inverse"));
    assert!(o.stdout.is_empty());
}

#[test]
fn ae_report_flags_per_round_bounds() {
    let o = hamlocal(&[
        "test",
        "--generator",
        "zchain:n=3,k-prime=3,eps=0.6",
        "--algorithm",
        "ae",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"grid\": 123"));
    assert!(text.contains("sqrt(22) * pi / (eps2 - eps1)"));
    assert!(stderr(&o).contains("per-round"));
}

#[test]
fn file_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.txt");
    std::fs::write(&path, "# header\nZZZ 0.5\nXQZ 0.1\n").unwrap();
    let o = hamlocal(&["test", "--hamiltonian", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    std::fs::write(&path, "ZZZ 0.5\nXIX -0.2\n").unwrap();
    let o = hamlocal(&[
        "test",
        "--hamiltonian",
        path.to_str().unwrap(),
        "--algorithm",
        "baseline",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = hamlocal(&[
        "test",
        "--hamiltonian",
        dir.path().join("missing").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exact_mode_is_labelled_white_box() {
    let o = hamlocal(&[
        "test",
        "--generator",
        "zchain:n=3,k-prime=3,eps=0.6",
        "--mode",
        "exact",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"white_box\": true"));
    assert!(text.contains("\"exact\""));
    let o = hamlocal(&["sweep", "--mode", "exact", "--gaps", "0.6,0.9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rows_footer_and_rerun() {
    let args = [
        "sweep",
        "--algorithm",
        "baseline",
        "--gaps",
        "0.6,0.7,0.8",
        "--reps",
        "4",
        "--seed",
        "5",
    ];
    let o = hamlocal(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(
        lines[0],
        "gap,tester,mean_time,mean_queries,success_rate,fitted_exponent"
    );
    assert!(lines[4].starts_with("fit,baseline,"));
    assert_eq!(hamlocal(&args).stdout, o.stdout);
}

#[test]
fn sweep_needs_two_gaps() {
    for gaps in [&["--gaps"][..], &["--gaps", "0.5"][..]] {
        let mut args = vec!["sweep"];
        args.extend_from_slice(gaps);
        let o = hamlocal(&args);
        assert_eq!(o.status.code(), Some(2), "{gaps:?}");
    }
}

#[test]
fn verify_passes_and_reports_corruption() {
    let o = hamlocal(&["verify", "--suite-size", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 10);

    let o = hamlocal(&["verify", "--suite-size", "3", "--step-scale", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("conditional acceptance"));
    assert!(stdout(&o).contains("\"failed\""));
}

#[test]
fn lowerbound_table() {
    let o = hamlocal(&[
        "lowerbound",
        "--format",
        "csv",
        "--times",
        "0.5,1,2",
        "--eps1",
        "0.1",
        "--eps2",
        "0.4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = hamlocal(&["lowerbound", "--times", "1"]);
    assert!(stdout(&o).contains("\"closed_form_agrees\": true"));
}

#[test]
fn unknown_flags_are_usage_errors() {
    assert_eq!(hamlocal(&["test", "--bogus"]).status.code(), Some(2));
    assert_eq!(hamlocal(&["test"]).status.code(), Some(2));
    assert_eq!(
        hamlocal(&["test", "--generator", "zchain:n=3,eps=0.6"])
            .status
            .code(),
        Some(2)
    );
}
