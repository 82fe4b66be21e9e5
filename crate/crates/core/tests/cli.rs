use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spin2mps")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let (k, v) = l.split_once(':')?;
            (k.trim() == key).then(|| v.trim().to_string())
        })
        .unwrap_or_else(|| panic!("no {key} in output"))
}

#[test]
fn point_at_isotropic_point() {
    let out = run(&["point", "--preset", "acritical", "--a", "2.449489743"]);
    assert_eq!(code(&out), 0);
    let s: f64 = field(&stdout(&out), "S").parse().unwrap();
    assert!((s - 5f64.log2()).abs() < 1e-8);
}

#[test]
fn point_at_critical_maximum() {
    let out = run(&["point", "--preset", "critical", "--a", "1.414213562", "--measures", "entropy"]);
    assert_eq!(code(&out), 0);
    let s: f64 = field(&stdout(&out), "S").parse().unwrap();
    assert!((s - 1.584963).abs() < 1e-6);
}

#[test]
fn point_at_degenerate_point_is_flagged() {
    let out = run(&["point", "--preset", "critical", "--a", "0"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(field(&text, "limit_flag"), "true");
    assert_eq!(field(&text, "a"), "0.00000000000e0");
    assert!(field(&text, "S").parse::<f64>().unwrap() < 1e-9);
}

#[test]
fn point_json_uses_null_for_absent_measures() {
    let out = run(&["point", "--x", "0", "--gamma", "1", "--a", "1", "--measures", "entropy,rf", "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["point"]["S"], 1.5);
    assert!(v["point"]["xi_long"].is_null());
    assert_eq!(v["point"]["limit_flag"], false);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["point", "--a", "1"],
        vec!["point", "--preset", "critical", "--a", "1", "--measures", "bogus"],
        vec!["point", "--preset", "nowhere", "--a", "1"],
        vec!["sweep", "--preset", "critical", "--a-min", "0", "--a-max", "1", "--a-steps", "1"],
        vec!["sweep", "--preset", "critical", "--a-min", "1", "--a-max", "0", "--a-steps", "5"],
        vec!["oracle-check", "--l-max", "10"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 2, "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_3() {
    let out = run(&["point", "--x", "0", "--gamma", "1", "--a", "1e300"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("evaluate_point"));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let out = run(&[
        "sweep", "--preset", "critical", "--a-min", "0.1", "--a-max", "1", "--a-steps", "3", "--out-dir",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn oracle_check_default_passes() {
    let out = run(&["oracle-check"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0 failed"));
}

#[test]
fn oracle_check_detects_injected_fault() {
    let out = run(&["oracle-check", "--inject-fault", "1e-6"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

fn sweep_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn sweep_is_sorted_and_deterministic_across_thread_counts() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let base = ["--preset", "critical", "--a-min", "0.01", "--a-max", "4", "--a-steps", "400", "--measures", "rfs"];
    let mut one = base.to_vec();
    one.extend(["--threads", "1"]);
    let mut four = base.to_vec();
    four.extend(["--threads", "4"]);
    assert_eq!(code(&sweep_into(d1.path(), &one)), 0);
    assert_eq!(code(&sweep_into(d2.path(), &four)), 0);
    let t1 = fs::read(d1.path().join("sweep.csv")).unwrap();
    assert_eq!(t1, fs::read(d2.path().join("sweep.csv")).unwrap());

    let rows = spin2mps::report::parse_csv(std::str::from_utf8(&t1).unwrap()).unwrap();
    let a = spin2mps::report::column(&rows, "a");
    let rfs = spin2mps::report::column(&rows, "RFS_fd");
    assert_eq!(rows.len(), 400);
    assert!(a.windows(2).all(|w| w[0] < w[1]));
    assert!(rfs.windows(2).all(|w| w[1].unwrap() < w[0].unwrap()));
    assert!(spin2mps::report::column(&rows, "S").iter().all(Option::is_none));
}

#[test]
fn sweep_header_and_svg() {
    let d = tempfile::tempdir().unwrap();
    let out = sweep_into(
        d.path(),
        &["--preset", "acritical", "--a-min", "0", "--a-max", "4", "--a-steps", "401", "--measures", "entropy", "--svg", "--stem", "fig"],
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(d.path().join("fig.csv")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with('#'));
    assert!(first.contains("x=") || first.contains("x ="), "{first}");
    let rows = spin2mps::report::parse_csv(&csv).unwrap();
    let s = spin2mps::report::column(&rows, "S");
    let peak = (0..s.len()).max_by(|&i, &j| s[i].unwrap().total_cmp(&s[j].unwrap())).unwrap();
    assert_eq!(peak, 245);
    let svg = fs::read_to_string(d.path().join("fig.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn sweep_json_format() {
    let d = tempfile::tempdir().unwrap();
    let out = sweep_into(
        d.path(),
        &["--preset", "critical", "--a-min", "0", "--a-max", "1", "--a-steps", "3", "--measures", "entropy", "--format", "json"],
    );
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("sweep.json")).unwrap()).unwrap();
    let text = v.to_string();
    assert!(text.contains("limit_flag"));
    assert!(!d.path().join("sweep.csv").exists());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.conf");
    fs::write(&cfg, "# sweep defaults\npreset = critical\na_min = 0.5\na-max = 1.5\na-steps = 3\nmeasures = entropy\n").unwrap();
    let out = sweep_into(d.path(), &["--config", cfg.to_str().unwrap(), "--a-steps", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows =
        spin2mps::report::parse_csv(&fs::read_to_string(d.path().join("sweep.csv")).unwrap()).unwrap();
    let a = spin2mps::report::column(&rows, "a");
    assert_eq!(a.len(), 5);
    assert_eq!(a[0], Some(0.5));
    assert_eq!(a[4], Some(1.5));

    fs::write(&cfg, "preset critical\n").unwrap();
    assert_eq!(code(&sweep_into(d.path(), &["--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn figures_writes_eight_files() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&["figures", "--out-dir", d.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for n in 1..=4 {
        assert!(d.path().join(format!("fig{n}.csv")).is_file());
        assert!(d.path().join(format!("fig{n}.svg")).is_file());
    }
}
