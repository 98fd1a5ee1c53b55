use std::path::Path;
use std::process::{Command, Output};

use mlap_cli::field::read_field_csv;
use mlap_cli::{Report, ReproReport};
use tempfile::TempDir;

fn mlap(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mlap"));
    cmd.args(args);
    for (key, _) in std::env::vars() {
        if key.starts_with("MLAP_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().expect("spawn mlap");
    (
        status.code().expect("exit code"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn in_dir(args: &[&str], dir: &Path) -> Command {
    let mut cmd = mlap(args);
    cmd.arg("--out-dir").arg(dir);
    cmd
}

fn value(stdout: &str, key: &str) -> String {
    let report: Report = stdout.parse().unwrap();
    report.get(key).unwrap_or_else(|| panic!("no {key} in\n{stdout}")).to_string()
}

#[test]
fn classify_examples() {
    let (code, out, _) = run(&mut mlap(&["classify", "--m", "2", "--p", "0.5", "--q", "1"]));
    assert_eq!(code, 0);
    assert_eq!(value(&out, "regime"), "Supercritical");
    assert_eq!(value(&out, "gamma"), "0.666667");
    assert_eq!(value(&out, "tau_star"), "3");

    let (code, out, _) = run(&mut mlap(&["classify", "--m", "2", "--p", "0", "--q", "0"]));
    assert_eq!(code, 0);
    assert_eq!(value(&out, "regime"), "Subcritical");

    let (code, _, err) = run(&mut mlap(&["classify", "--m", "2", "--p", "0", "--q", "1.6"]));
    assert_eq!(code, 2);
    assert!(err.contains("admissibility violation"), "{err}");
}

#[test]
fn torsion_peak_in_csv() {
    let dir = TempDir::new().unwrap();
    let (code, _, err) = run(&mut in_dir(
        &["solve", "--source", "torsion", "--m", "3", "--n", "1025"],
        dir.path(),
    ));
    assert_eq!(code, 0, "{err}");
    let rows = read_field_csv(&dir.path().join("solve.csv")).unwrap();
    assert_eq!(rows.len(), 1025);
    let peak = rows.iter().map(|r| r[2]).fold(f64::MIN, f64::max);
    // (m-1)/m · (1/2)^{m/(m-1)} at m = 3
    let exact = (2.0 / 3.0) * 0.5f64.powf(1.5);
    assert!((peak - exact).abs() < 5e-4, "{peak} vs {exact}");
    let text = std::fs::read_to_string(dir.path().join("solve.csv")).unwrap();
    assert!(text.starts_with("x,delta,u,du\n"));
}

#[test]
fn eigen_report() {
    let dir = TempDir::new().unwrap();
    let (code, out, err) = run(&mut in_dir(&["eigen", "--m", "2", "--n", "2049"], dir.path()));
    assert_eq!(code, 0, "{err}");
    let lambda: f64 = value(&out, "lambda").parse().unwrap();
    assert!((lambda - 9.8696).abs() < 1e-3, "{lambda}");
    let saved: Report = std::fs::read_to_string(dir.path().join("eigen.report"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(saved, out.parse::<Report>().unwrap());
}

#[test]
fn lemma_integral_verdicts() {
    let dir = TempDir::new().unwrap();
    let (code, out, _) = run(&mut in_dir(&["lemma-integral", "--a", "1.1"], dir.path()));
    assert_eq!(code, 0);
    assert_eq!(value(&out, "verdict"), "Infinite");
    let (code, out, _) = run(&mut in_dir(&["lemma-integral", "--a", "0.5"], dir.path()));
    assert_eq!(code, 0);
    assert_eq!(value(&out, "verdict"), "Finite");
    let v: f64 = value(&out, "value").parse().unwrap();
    assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-3, "{v}");
}

#[test]
fn csv_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let (code, _, err) = run(&mut in_dir(&["solve", "--n", "1025"], dir.path()));
        assert_eq!(code, 0, "{err}");
    }
    let read = |d: &TempDir| std::fs::read(d.path().join("solve.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn csv_has_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    run(&mut in_dir(&["solve", "--source", "torsion", "--n", "65"], dir.path()));
    let text = std::fs::read_to_string(dir.path().join("solve.csv")).unwrap();
    let cell = text.lines().nth(5).unwrap().split(',').nth(2).unwrap();
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{cell}");
}

#[test]
fn reproduce_default_matrix_round_trips() {
    let dir = TempDir::new().unwrap();
    let (code, out, err) = run(&mut in_dir(&["reproduce-theorem1"], dir.path()));
    assert_eq!(code, 0, "{out}{err}");
    let text = std::fs::read_to_string(dir.path().join("reproduce-theorem1.report")).unwrap();
    assert_eq!(text, out);
    let report: ReproReport = text.parse().unwrap();
    assert!(report.overall);
    assert_eq!(report.to_string(), text);
    // every regime contributes its four claims exactly once
    assert_eq!(report.claims.len(), 12);
    for label in ["Thm1.i.", "Thm1.ii.", "Thm1.iii."] {
        assert_eq!(report.claims.iter().filter(|c| c.id.starts_with(label)).count(), 4);
    }
}

#[test]
fn falsified_prediction_exits_one() {
    let dir = TempDir::new().unwrap();
    let (code, out, _) = run(&mut in_dir(
        &["reproduce-theorem1", "--matrix", "2:0.5:1:0.5"],
        dir.path(),
    ));
    assert_eq!(code, 1);
    let report: ReproReport = out.parse().unwrap();
    let failed: Vec<&str> = report.claims.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    assert_eq!(failed, ["Thm1.iii.exponent[m=2,p=0.5,q=1]"]);
}

#[test]
fn empty_matrix_exits_two() {
    let dir = TempDir::new().unwrap();
    let (code, _, err) = run(&mut in_dir(&["reproduce-theorem1", "--matrix", ""], dir.path()));
    assert_eq!(code, 2);
    assert!(err.contains("empty test matrix"), "{err}");
}

#[test]
fn config_file_and_precedence() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# critical spec\np = 0.5\nq = 0.5\n").unwrap();
    let conf = conf.to_str().unwrap();

    let (_, out, _) = run(&mut mlap(&["classify", "--config", conf]));
    assert_eq!(value(&out, "regime"), "Critical");

    // environment beats the file
    let (_, out, _) = run(mlap(&["classify", "--config", conf]).env("MLAP_Q", "1"));
    assert_eq!(value(&out, "regime"), "Supercritical");

    // a flag beats the environment
    let (_, out, _) = run(mlap(&["classify", "--config", conf, "--q", "0"]).env("MLAP_Q", "1"));
    assert_eq!(value(&out, "regime"), "Subcritical");

    // the file itself can come from the environment
    let (_, out, _) = run(mlap(&["classify"]).env("MLAP_CONFIG", conf));
    assert_eq!(value(&out, "regime"), "Critical");
}

#[test]
fn unknown_key_rejected() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "m = 2\ntolerance = 1e-8\n").unwrap();
    let (code, _, err) = run(&mut mlap(&["classify", "--config", conf.to_str().unwrap()]));
    assert_eq!(code, 2);
    assert!(err.contains("bad.conf:2") && err.contains("tolerance"), "{err}");

    let (code, _, _) = run(&mut mlap(&["classify", "--tolerance", "1"]));
    assert_eq!(code, 2);
}

#[test]
fn invalid_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 6] = [
        &["solve", "--grading", "0.5"],
        &["solve", "--n", "4"],
        &["solve", "--m", "abc"],
        &["fit-exponent", "--window", "1e-2,1e-4"],
        &["solve", "--source", "distance-power", "--a", "1.6"],
        &["scan-threshold", "--levels", "1025,2049"],
    ];
    for args in cases {
        let (code, _, err) = run(&mut in_dir(args, dir.path()));
        assert_eq!(code, 2, "{args:?}: {err}");
    }
    let (code, _, err) = run(&mut mlap(&["classify", "--config", "/nonexistent/run.conf"]));
    assert_eq!(code, 2);
    assert!(err.contains("/nonexistent/run.conf"), "{err}");
}

#[test]
fn filesystem_error_names_the_path() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("out");
    let (code, _, err) = run(&mut in_dir(&["solve", "--source", "torsion", "--n", "65"], &target));
    assert_eq!(code, 2);
    assert!(err.contains(target.to_str().unwrap()), "{err}");
}

#[test]
fn exhausted_budget_exits_one() {
    let dir = TempDir::new().unwrap();
    let (code, _, err) = run(&mut in_dir(
        &[
            "solve",
            "--source",
            "torsion",
            "--m",
            "3",
            "--max-newton-iters",
            "1",
            "--eps-schedule",
            "1e-10",
        ],
        dir.path(),
    ));
    assert_eq!(code, 1);
    assert!(err.contains("no convergence"), "{err}");
}

#[test]
fn barrier_check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let (code, out, err) = run(&mut in_dir(&["barrier-check", "--n", "2049"], dir.path()));
    assert_eq!(code, 0, "{out}{err}");
    assert!(dir.path().join("barrier-sub.csv").exists());
    assert!(dir.path().join("barrier-super.csv").exists());

    // exponent 0.3 is too steep for the E3 spec once the grid is fine
    let (code, out, _) = run(&mut in_dir(
        &["barrier-check", "--n", "16385", "--barrier-exponent", "0.3", "--c-max", "1024"],
        dir.path(),
    ));
    assert_eq!(code, 1);
    let report: Report = out.parse().unwrap();
    let sub = report.blocks.iter().find(|b| b.get("side") == Some("sub")).unwrap();
    assert_eq!(sub.get("certified"), Some("false"));
}

#[test]
fn scan_and_fit_commands() {
    let dir = TempDir::new().unwrap();
    let (code, out, err) = run(&mut in_dir(&["scan-threshold"], dir.path()));
    assert_eq!(code, 0, "{out}{err}");
    let text = std::fs::read_to_string(dir.path().join("scan-threshold.csv")).unwrap();
    assert!(text.starts_with("n,tau,norm\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 6);

    let (code, out, err) = run(&mut in_dir(&["fit-exponent", "--n", "8193"], dir.path()));
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(value(&out, "kind"), "power");

    let (code, out, err) = run(&mut in_dir(
        &["fit-exponent", "--n", "16385", "--q", "0.5"],
        dir.path(),
    ));
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(value(&out, "kind"), "log");

    // torsion has no finite threshold: every tau converges
    let (code, out, err) = run(&mut in_dir(&["scan-threshold", "--source", "torsion"], dir.path()));
    assert_eq!(code, 0, "{out}{err}");
}

#[test]
fn formats_select_outputs() {
    let dir = TempDir::new().unwrap();
    let (code, _, _) = run(&mut in_dir(
        &["eigen", "--n", "257", "--formats", "report"],
        dir.path(),
    ));
    assert_eq!(code, 0);
    assert!(dir.path().join("eigen.report").exists());
    assert!(dir.path().join("eigen.conf").exists());
    assert!(!dir.path().join("eigen.csv").exists());
}
