use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clonebound::optimizer::fidelity_from_coeffs;
use clonebound_cli::commands::SWEEP_HEADER;
use clonebound_cli::report::{matrix, BoundsReport, CombinedReport, SolutionReport};
use clonebound_cli::task::TaskFile;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clonebound"))
}

fn write_task(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const WORKED: &str = r#"{"states": {"angles": [0.0, 0.5, 1.0]}, "clone": {"from": 1, "to": 2}}"#;
const IDENTITY: &str = r#"{"states": {"gram": [[1,0,0],[0,1,0],[0,0,1]]}, "clone": {"from": 1, "to": 2}}"#;

#[test]
fn bounds_on_orthogonal_states_are_all_one() {
    let dir = TempDir::new().unwrap();
    let input = write_task(&dir, "id.json", IDENTITY);
    let out = dir.path().join("bounds.json");
    let res = run(&["bounds", "-i", p(&input), "-o", p(&out), "--partition", "0,1;2"]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let report: BoundsReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for v in [
        report.bound_trig3,
        report.bound_sym3,
        report.bound_avg,
        report.bound_partition,
        report.bound_greedy_paper,
        report.bound_greedy_matching,
        report.min_valid_bound,
    ] {
        assert_eq!(v, Some(1.0));
    }
    assert_eq!(report.validity["bound_trig3"], "marginal");
}

#[test]
fn bounds_worked_example() {
    let dir = TempDir::new().unwrap();
    let input = write_task(&dir, "w.json", WORKED);
    let res = run(&["bounds", "-i", p(&input)]);
    assert_eq!(code(&res), 0);
    let report: BoundsReport = serde_json::from_slice(&res.stdout).unwrap();
    assert!((report.bound_sym3.unwrap() - 0.98766).abs() < 1e-4);
    let first = report.greedy_trace[0].unwrap();
    assert_eq!((first.row, first.col), (0, 2));
    assert!((first.value - 0.27446).abs() < 1e-4);
    assert_eq!(report.greedy_trace[1], None);
    assert!(stderr(&res).contains("bound_sym3"));
}

#[test]
fn validation_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let priors = write_task(
        &dir,
        "priors.json",
        r#"{"states": {"angles": [0, 0.5, 1.0]}, "priors": [0.3, 0.3, 0.3], "clone": {"from": 1, "to": 2}}"#,
    );
    let res = run(&["bounds", "-i", p(&priors)]);
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("prior-sum invariant"));

    let not_psd = write_task(
        &dir,
        "psd.json",
        r#"{"states": {"gram": [[1, 0.9, 0.9], [0.9, 1, -0.9], [0.9, -0.9, 1]]}, "clone": {"from": 1, "to": 2}}"#,
    );
    let res = run(&["verify", "-i", p(&not_psd)]);
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("positive semidefinite"));

    let garbage = write_task(&dir, "garbage.json", "{not json");
    assert_eq!(code(&run(&["optimize", "-i", p(&garbage)])), 1);
    assert_eq!(code(&run(&["optimize", "-i", p(&dir.path().join("missing.json"))])), 1);
    assert_eq!(code(&run(&["bounds", "-i", p(&priors), "--partition", "0,1"])), 1);
    assert_eq!(code(&run(&["--no-such-flag"])), 1);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn optimize_two_state_tasks() {
    let dir = TempDir::new().unwrap();
    let orth = write_task(
        &dir,
        "orth.json",
        &format!(r#"{{"states": {{"angles": [0, {}]}}, "clone": {{"from": 1, "to": 2}}}}"#, std::f64::consts::FRAC_PI_2),
    );
    let res = run(&["optimize", "-i", p(&orth), "--restarts", "8"]);
    assert_eq!(code(&res), 0);
    let s: SolutionReport = serde_json::from_slice(&res.stdout).unwrap();
    assert!((s.fidelity - 1.0).abs() < 1e-10);

    let quarter = write_task(
        &dir,
        "quarter.json",
        &format!(r#"{{"states": {{"angles": [0, {}]}}, "clone": {{"from": 1, "to": 2}}}}"#, std::f64::consts::FRAC_PI_4),
    );
    let res = run(&["optimize", "-i", p(&quarter)]);
    let s: SolutionReport = serde_json::from_slice(&res.stdout).unwrap();
    // 30-digit evaluation of the two-state closed form at overlap cos(pi/4).
    assert!((s.fidelity - 0.982962913144534143374871599864).abs() < 1e-10);
    assert!(s.converged && !s.non_convergence);
    assert!(s.constraint_residual <= 1e-8);
}

#[test]
fn solution_json_round_trip() {
    let dir = TempDir::new().unwrap();
    for (name, json) in [
        ("w.json", WORKED.to_string()),
        (
            "skew.json",
            r#"{"states": {"angles": [0.1, 0.4, 0.8, 1.2]}, "priors": [0.4, 0.3, 0.2, 0.1], "clone": {"from": 1, "to": 3}}"#.to_string(),
        ),
    ] {
        let input = write_task(&dir, name, &json);
        for leak in [false, true] {
            let out = dir.path().join("sol.json");
            let mut args = vec!["optimize", "-i", p(&input), "-o", p(&out), "--restarts", "16"];
            if leak {
                args.push("--allow-leak");
            }
            assert_eq!(code(&run(&args)), 0);
            let s: SolutionReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
            let task = TaskFile::parse(&json).unwrap().task().unwrap();
            let (f, residual) = fidelity_from_coeffs(&matrix(&s.coefficients), &task);
            assert!((f - s.fidelity).abs() <= 1e-10, "{name}: {f} vs {}", s.fidelity);
            if !leak {
                assert!(residual <= 1e-8);
            }
        }
    }
}

#[test]
fn default_command_runs_optimizer_for_small_tasks() {
    let dir = TempDir::new().unwrap();
    let small = write_task(&dir, "w.json", WORKED);
    let res = run(&["-i", p(&small), "--restarts", "8"]);
    assert_eq!(code(&res), 0);
    let r: CombinedReport = serde_json::from_slice(&res.stdout).unwrap();
    let f = r.optimizer.unwrap().fidelity;
    assert!(f <= r.bounds.min_valid_bound.unwrap());

    let seven = write_task(
        &dir,
        "seven.json",
        r#"{"states": {"angles": [0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2]}, "clone": {"from": 1, "to": 2}}"#,
    );
    let res = run(&["-i", p(&seven)]);
    assert_eq!(code(&res), 0);
    let r: CombinedReport = serde_json::from_slice(&res.stdout).unwrap();
    assert!(r.optimizer.is_none());
    assert!(r.bounds.bound_sym3.is_none());
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn sweep_two_state_family() {
    let res = run(&["sweep", "--family", "two-state", "--t-min", "0.1", "--t-max", "1.5", "--steps", "15"]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with(
        "param,f_opt,bound_avg,bound_sym3,bound_trig3,bound_greedy_paper,bound_greedy_matching,min_bound\n"
    ));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, SWEEP_HEADER);
    assert_eq!(rows.len(), 15);
    for row in &rows {
        let f: f64 = row[1].parse().unwrap();
        let avg: f64 = row[2].parse().unwrap();
        assert!(f <= avg + 1e-9);
        assert!(row[3].is_empty() && row[4].is_empty());
    }
    let params: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(params.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn sweep_edge_cases() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let res = run(&[
        "sweep", "--family", "three-state-arithmetic", "--t-min", "0", "--t-max", "0.7", "--steps", "2",
        "--restarts", "8", "-o", p(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let (_, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 2);
    for cell in &rows[0][1..] {
        assert!((cell.parse::<f64>().unwrap() - 1.0).abs() < 1e-12, "{cell}");
    }
    assert_eq!(code(&run(&["sweep", "--t-min", "1.0", "--t-max", "0.5"])), 1);
    assert_eq!(code(&run(&["sweep", "--family", "three-state-arithmetic", "--t-max", "1.0"])), 1);
    assert_eq!(code(&run(&["sweep", "--steps", "1"])), 1);
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let id = write_task(&dir, "id.json", IDENTITY);
    assert_eq!(code(&run(&["verify", "-i", p(&id), "--restarts", "8"])), 0);

    let worked = write_task(&dir, "w.json", WORKED);
    let out = dir.path().join("verify.json");
    let res = run(&["verify", "-i", p(&worked), "--oracle", "-o", p(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let log = stderr(&res);
    assert!(log.contains("compare/greedy_paper_vs_avg"));
    assert!(log.contains("0.990636432155") && log.contains("0.987650381644"));
    assert!(log.contains("PASS oracle"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], true);

    // The trigonometric estimate undercuts the optimum here.
    let uneven = write_task(
        &dir,
        "uneven.json",
        r#"{"states": {"gram": [[1, 0.987456841929637, 0.11784358645788076],
                                [0.987456841929637, 1, 0.2731544660011541],
                                [0.11784358645788076, 0.2731544660011541, 1]]},
            "clone": {"from": 1, "to": 3}}"#,
    );
    let res = run(&["verify", "-i", p(&uneven), "--restarts", "16"]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("FAIL dominance/bound_trig3"));
}
