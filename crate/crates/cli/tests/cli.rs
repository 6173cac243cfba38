use std::fs;
use std::process::{Command, Output};

fn mbgf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbgf"))
        .args(args)
        .env_remove("MBGF_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_csv_to_stdout() {
    let o = mbgf(&[
        "run",
        "--problem",
        "p2",
        "--t-end",
        "1",
        "--record-every",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,x_0,x_1,f_0,f_1,speed,crit_unscaled,crit_scaled\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn config_file_with_overrides_writes_both_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    let csv = dir.path().join("out/iters.csv");
    let summary = dir.path().join("out/summary.json");
    fs::write(
        &cfg,
        format!(
            "# discrete run\nproblem = p1\nx0 = 0.5, -1\niters = 100\nout = {}\nsummary = {}\n",
            csv.display(),
            summary.display()
        ),
    )
    .unwrap();
    let args = [
        "discrete",
        "--config",
        cfg.to_str().unwrap(),
        "--iters",
        "20",
    ];
    let o = mbgf(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 22);
    let first = fs::read(&csv).unwrap();
    assert!(fs::read_to_string(&summary).unwrap().contains("\"k\": 20"));

    assert_eq!(mbgf(&args).status.code(), Some(0));
    assert_eq!(fs::read(&csv).unwrap(), first);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "problem = p2\nstepsize = 3\n").unwrap();
    let cases: [(Vec<&str>, &str); 5] = [
        (vec!["run", "--config", bad.to_str().unwrap()], "stepsize"),
        (vec!["run"], "problem"),
        (vec!["run", "--problem", "p2", "--dt", "-1"], "dt"),
        (vec!["accel", "--problem", "p2", "--r", "2"], "r"),
        (vec!["run", "--problem", "p7"], "p7"),
    ];
    for (args, needle) in cases {
        let o = mbgf(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn degenerate_scaling_exits_with_three() {
    // The start point is critical for f2, so unclamped gradient-norm scaling divides by zero.
    let o = mbgf(&[
        "run",
        "--problem",
        "p1",
        "--x0",
        "1,1",
        "--scaling",
        "gradnorm:eta=0",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn verify_exit_code_follows_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let o = mbgf(&[
        "verify",
        "--suite",
        "geometry-oracle",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(&json).unwrap();
    assert!(report.contains("\"suite\": \"geometry-oracle\""));
    assert!(String::from_utf8_lossy(&o.stdout).contains("4 of 4 gating checks passed"));

    let o = mbgf(&["verify", "--suite", "nonconvex-rate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("failing suites: nonconvex-rate"));

    let o = mbgf(&["verify", "--suite", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_problems_names_every_builtin() {
    let o = mbgf(&["list-problems"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["p1", "p2", "p3", "p4"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
}
