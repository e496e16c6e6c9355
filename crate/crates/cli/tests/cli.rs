use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_u1kepler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const POINT_H2: &str = r#"{"algebra":"hn","n":2,"pivot":1,"q":[1.3,0.2,-0.4],"p":[0.1,0.7,-0.2]}"#;

#[test]
fn verify_all_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "--n",
        "2,3",
        "--mu",
        "0,0.5,-1.3",
        "--trials",
        "10",
        "--seed",
        "7",
        "--suite",
        "all",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = read_json(&report);
    assert_eq!(r["pass"], true);
    assert_eq!(r["seed"], 7);
    assert!(r["version"].is_string());
    assert_eq!(r["config"]["trials"], 10);
    let suites: Vec<&str> = r["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["suite"].as_str().unwrap())
        .collect();
    for s in ["matrix", "lemma", "realization", "quadratic"] {
        assert!(suites.contains(&s), "missing {s} in {suites:?}");
    }
}

#[test]
fn verify_is_deterministic_in_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&[
            "verify",
            "--n",
            "3",
            "--mu",
            "0.5",
            "--suite",
            "realization",
            "--trials",
            "8",
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(read_json(&a)["reports"], read_json(&b)["reports"]);
}

#[test]
fn negative_controls_fail_with_exit_one() {
    for control in ["flip-s-mu", "drop-x-mu2"] {
        let out = run(&[
            "verify",
            "--n",
            "2",
            "--mu",
            "0.5",
            "--suite",
            "realization",
            "--trials",
            "10",
            "--negative-control",
            control,
        ]);
        assert_eq!(code(&out), 1, "{control}: {}", stdout(&out));
        assert!(stdout(&out).contains("FAIL"));
    }
}

#[test]
fn gamma3_verify_and_bad_usage() {
    let out = run(&[
        "verify",
        "--algebra",
        "gamma3",
        "--suite",
        "matrix",
        "--trials",
        "10",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(
        code(&run(&["verify", "--algebra", "gamma3", "--mu", "1"])),
        2
    );
    assert_eq!(code(&run(&["verify", "--n", "1"])), 2);
    assert_eq!(code(&run(&["verify", "--suite", "nonsense"])), 2);
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let out = run(&[
        "simulate",
        "--preset",
        "elliptic",
        "--t-end",
        "2",
        "--dt",
        "1e-3",
        "--stride",
        "100",
        "--seed",
        "11",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("max drift H"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,q_1,q_2,q_3,p_1,p_2,p_3,H,L2,A2,hla_residual"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    let h0 = rows[0][7];
    assert!((h0 + 0.28).abs() < 1e-12);
    assert!(rows.iter().all(|r| (r[7] - h0).abs() < 1e-9));

    let side = read_json(&dir.path().join("orbit.csv.json"));
    assert_eq!(side["status"], "complete");
    assert_eq!(side["seed"], 11);
    assert!(side["version"].is_string());
    assert_eq!(side["config"]["preset"], "elliptic");
    assert_eq!(side["pivot_history"][0]["t"], 0.0);
    assert!(side["pivot_history"][0]["chart"]["pivot"].as_u64().unwrap() >= 1);
}

#[test]
fn simulate_from_init_file_with_magnetic_charge() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init.json");
    std::fs::write(&init, r#"{"algebra":"hn","n":3,"pivot":2,"q":[2.0,0.3,0.1,-0.2,0.4],"p":[-0.1,0.2,0.3,0.1,-0.2]}"#).unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(&[
        "simulate",
        "--n",
        "3",
        "--mu",
        "0.5",
        "--init",
        init.to_str().unwrap(),
        "--t-end",
        "0.5",
        "--integrator",
        "rk45",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let side = read_json(&dir.path().join("t.csv.json"));
    assert!(side["max_drift"]["h"].as_f64().unwrap() < 1e-8);
}

#[test]
fn simulate_collision_exits_three_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fall.csv");
    let out = run(&[
        "simulate",
        "--algebra",
        "gamma3",
        "--init",
        r#"{"algebra":"gamma3","q":[1,0,0],"p":[0,0,0]}"#,
        "--t-end",
        "5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let side = read_json(&dir.path().join("fall.csv.json"));
    assert_eq!(side["status"], "singularity");
    assert_eq!(side["partial"], true);
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() > 2);
}

#[test]
fn simulate_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let csv = csv.to_str().unwrap();
    assert_eq!(code(&run(&["simulate", "--out", csv])), 2);
    assert_eq!(
        code(&run(&[
            "simulate", "--preset", "circular", "--n", "3", "--out", csv
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "simulate",
            "--preset",
            "sample",
            "--algebra",
            "gamma3",
            "--mu",
            "1",
            "--out",
            csv
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "simulate", "--preset", "circular", "--dt", "-1", "--out", csv
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "simulate",
            "--init",
            "/nonexistent/point.json",
            "--out",
            csv
        ])),
        2
    );
}

#[test]
fn eval_and_bracket_print_full_precision() {
    let out = run(&[
        "eval",
        "--f",
        r#"{"kind":"Ham"}"#,
        "--point",
        r#"{"algebra":"gamma3","q":[1,0,0],"p":[0,1.2,0]}"#,
    ]);
    assert_eq!(code(&out), 0);
    let h: f64 = stdout(&out).trim().parse().unwrap();
    assert!((h + 0.28).abs() < 1e-15);

    let x =
        r#"{"kind":"X","u":{"algebra":"hn","re":[[1,0.5],[0.5,-0.3]],"im":[[0,0.2],[-0.2,0]]}}"#;
    let y = r#"{"kind":"Y","u":{"algebra":"hn","re":[[0.1,0],[0,2]]}}"#;
    let fg = run(&[
        "bracket", "--f", x, "--g", y, "--point", POINT_H2, "--mu", "0.5",
    ]);
    let gf = run(&[
        "bracket", "--f", y, "--g", x, "--point", POINT_H2, "--mu", "0.5",
    ]);
    assert_eq!(code(&fg), 0);
    let a: f64 = stdout(&fg).trim().parse().unwrap();
    let b: f64 = stdout(&gf).trim().parse().unwrap();
    assert!(a != 0.0 && (a + b).abs() < 1e-14);
    assert!(stdout(&fg).trim().contains('e'));
}

#[test]
fn spec_and_point_errors_exit_two() {
    let x3 = r#"{"kind":"X","u":{"algebra":"hn","n":3,"identity":true}}"#;
    assert_eq!(code(&run(&["eval", "--f", x3, "--point", POINT_H2])), 2);
    assert_eq!(
        code(&run(&[
            "eval",
            "--f",
            r#"{"kind":"X"}"#,
            "--point",
            POINT_H2
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "eval",
            "--f",
            r#"{"kind":"Ham","u":{"algebra":"hn","n":2,"identity":true}}"#,
            "--point",
            POINT_H2
        ])),
        2
    );
    assert_eq!(
        code(&run(&["eval", "--f", "{not json", "--point", POINT_H2])),
        2
    );
    let g3 = r#"{"algebra":"gamma3","q":[1,0,0],"p":[0,1,0]}"#;
    assert_eq!(
        code(&run(&[
            "eval",
            "--f",
            r#"{"kind":"Ham"}"#,
            "--point",
            g3,
            "--mu",
            "0.5"
        ])),
        2
    );
}

#[test]
fn element_files_are_resolved_by_path() {
    let dir = tempfile::tempdir().unwrap();
    let e = dir.path().join("e.json");
    std::fs::write(&e, r#"{"algebra":"hn","n":2,"identity":true}"#).unwrap();
    let spec = format!(r#"{{"kind":"Y","u":"{}"}}"#, e.to_str().unwrap());
    let by_path = run(&["eval", "--f", &spec, "--point", POINT_H2]);
    let inline = run(&[
        "eval",
        "--f",
        r#"{"kind":"Y","u":{"algebra":"hn","n":2,"identity":true}}"#,
        "--point",
        POINT_H2,
    ]);
    assert_eq!(code(&by_path), 0);
    assert_eq!(stdout(&by_path), stdout(&inline));
}
