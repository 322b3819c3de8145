use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ddtruss::{default_alpha_grid, load_dataset};
use tempfile::TempDir;

fn ddtruss(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddtruss"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ddtruss(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Rows of the named CSV table, header excluded.
fn table<'a>(csv: &'a str, name: &str) -> Vec<Vec<&'a str>> {
    let mut lines = csv.lines().skip_while(|l| *l != format!("# table: {name}"));
    assert!(lines.next().is_some(), "no table {name}");
    lines.next();
    lines
        .take_while(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').collect())
        .collect()
}

fn summary_value(csv: &str, key: &str) -> String {
    table(csv, "summary")
        .into_iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("no summary key {key}"))[1]
        .to_string()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    // 41 exact linear points, spacing 2.5e-4
    ok(
        dir.path(),
        &[
            "synth",
            "--law",
            "linear",
            "--E",
            "2e11",
            "--n",
            "41",
            "--range",
            "-0.005:0.005",
            "-o",
            "lin.csv",
        ],
    );
    ok(
        dir.path(),
        &["synth", "--law", "hyperbolic", "--n", "20", "-o", "hyp.csv"],
    );
    ok(
        dir.path(),
        &[
            "synth",
            "--law",
            "hyperbolic",
            "--n",
            "20",
            "--range",
            "-0.001:0.001",
            "-o",
            "narrow.csv",
        ],
    );
    dir
}

#[test]
fn synth_writes_a_reproducible_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "synth", "--law", "linear", "--E", "2e11", "--n", "20", "--range", "0:0.01", "--noise", "0", "--seed", "1",
    ];
    let mut a: Vec<&str> = args.to_vec();
    a.extend(["-o", "mat.csv"]);
    ok(dir.path(), &a);
    let mut b: Vec<&str> = args.to_vec();
    b.extend(["-o", "again.csv"]);
    ok(dir.path(), &b);

    let first = std::fs::read(dir.path().join("mat.csv")).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("again.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# ddtruss "));
    assert!(text.contains("# seed = 1\n"));
    let data = load_dataset(dir.path().join("mat.csv")).unwrap();
    assert_eq!(data.len(), 20);
    for p in data.points() {
        assert!((p.stress - 2e11 * p.strain).abs() <= 1e-6 * p.stress.abs().max(1.0));
    }
}

#[test]
fn unknown_law_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddtruss(dir.path(), &["synth", "--law", "bogus", "-o", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    for law in ["linear", "ramberg_osgood", "hyperbolic"] {
        assert!(msg.contains(law), "{msg}");
    }
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn fit_reports_retained_terms_and_bandwidth() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "synth",
            "--law",
            "linear",
            "--E",
            "2e11",
            "--n",
            "10",
            "--range",
            "-0.005:0.005",
            "-o",
            "lin10.csv",
        ],
    );
    let cheb = ok(dir.path(), &["fit", "--dataset", "lin10.csv", "--dense", "7"]);
    assert!(num(&summary_value(&cheb, "n_retained")) <= 2.0);
    assert_eq!(table(&cheb, "curve").len(), 7);

    let kern = ok(dir.path(), &["fit", "--dataset", "lin10.csv", "--method", "kernel"]);
    let alpha = num(&summary_value(&kern, "alpha"));
    let data = load_dataset(dir.path().join("lin10.csv")).unwrap();
    assert!(default_alpha_grid(&data, 25).contains(&alpha));
    let cv = table(&kern, "cross_validation");
    assert_eq!(cv.len(), 25);
    assert_eq!(cv.iter().filter(|r| r[2] == "true").count(), 1);
}

#[test]
fn fit_rejects_single_point_dataset() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.csv"), "strain,stress\n0.001,2e8\n").unwrap();
    let out = ddtruss(dir.path(), &["fit", "--dataset", "one.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 2"), "{}", stderr(&out));
}

#[test]
fn solve_linear_data_reports_consistent_energy() {
    let dir = workspace();
    let csv = ok(
        dir.path(),
        &["solve", "--dataset", "lin.csv", "--ten-bar", "--lambda", "1"],
    );
    assert_eq!(summary_value(&csv, "converged"), "true");
    let energy = num(&summary_value(&csv, "energy_J"));
    let quad = num(&summary_value(&csv, "half_uKu_J"));
    assert!((energy - quad).abs() <= 1e-9 * quad);
    assert_eq!(table(&csv, "nodes").len(), 6);
    assert_eq!(table(&csv, "members").len(), 10);
    assert!(csv.contains("# lambda = 1\n"));
}

#[test]
fn solve_at_zero_load() {
    let dir = workspace();
    let csv = ok(
        dir.path(),
        &["solve", "--dataset", "lin.csv", "--ten-bar", "--lambda", "0"],
    );
    assert_eq!(num(&summary_value(&csv, "energy_J")), 0.0);
    for row in table(&csv, "nodes") {
        assert_eq!(num(row[1]), 0.0);
        assert_eq!(num(row[2]), 0.0);
    }
}

#[test]
fn solve_outside_data_coverage_exits_3() {
    let dir = workspace();
    let out = ddtruss(
        dir.path(),
        &["solve", "--dataset", "narrow.csv", "--ten-bar", "--lambda", "10"],
    );
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(msg.contains("member") && msg.contains("strain"), "{msg}");
}

#[test]
fn solver_non_convergence_exits_4() {
    let dir = workspace();
    let out = ddtruss(
        dir.path(),
        &[
            "solve",
            "--dataset",
            "hyp.csv",
            "--ten-bar",
            "--lambda",
            "8",
            "--max-iter",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn linear_path_energy_is_quadratic_in_lambda() {
    let dir = workspace();
    let csv = ok(
        dir.path(),
        &["path", "--dataset", "lin.csv", "--ten-bar", "--lambda", "1:10:10"],
    );
    let rows = table(&csv, "path");
    assert_eq!(rows.len(), 10);
    let e1 = num(rows[0][3]);
    for r in &rows {
        let lambda = num(r[0]);
        assert!((num(r[3]) - e1 * lambda * lambda).abs() <= 1e-8 * num(r[3]));
    }
}

#[test]
fn path_runs_are_byte_identical() {
    let dir = workspace();
    let args = [
        "path",
        "--dataset",
        "hyp.csv",
        "--ten-bar",
        "--lambda",
        "1:10:10",
        "--format",
        "json",
    ];
    let mut a = args.to_vec();
    a.extend(["-o", "a.json"]);
    let mut b = args.to_vec();
    b.extend(["-o", "b.json"]);
    ok(dir.path(), &a);
    ok(dir.path(), &b);
    let first = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("b.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["tables"]["path"].as_array().unwrap().len(), 10);
    assert_eq!(v["meta"]["config"]["lambda"], "1:10:10");
}

#[test]
fn truncated_path_keeps_partial_table() {
    let dir = workspace();
    let out = ddtruss(
        dir.path(),
        &[
            "path",
            "--dataset",
            "narrow.csv",
            "--ten-bar",
            "--lambda",
            "1:10:10",
            "-o",
            "p.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let rows = table(&csv, "path");
    assert!(!rows.is_empty() && rows.len() < 10);
    let failing = csv
        .lines()
        .find_map(|l| l.strip_prefix("# truncated_at_lambda: "))
        .expect("trailer line");
    assert!(num(failing) > num(rows.last().unwrap()[0]));
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let dir = workspace();
    let csv = ok(
        dir.path(),
        &["solve", "--dataset", "hyp.csv", "--ten-bar", "--lambda", "5"],
    );
    let json = ok(
        dir.path(),
        &[
            "solve",
            "--dataset",
            "hyp.csv",
            "--ten-bar",
            "--lambda",
            "5",
            "--format",
            "json",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for (row, obj) in table(&csv, "members")
        .iter()
        .zip(v["tables"]["members"].as_array().unwrap())
    {
        assert_eq!(num(row[1]), obj["strain"].as_f64().unwrap());
        assert_eq!(num(row[2]), obj["stress"].as_f64().unwrap());
    }
}

#[test]
fn compare_with_matched_bandwidth_agrees_on_linear_data() {
    let dir = workspace();
    let csv = ok(
        dir.path(),
        &[
            "compare",
            "--dataset",
            "lin.csv",
            "--ten-bar",
            "--alpha",
            "8e6",
            "--repeat",
            "5",
        ],
    );
    assert!(num(&summary_value(&csv, "max_rel_discrepancy")) <= 1e-6);
    let timings = table(&csv, "timings");
    let phases: Vec<(&str, &str)> = timings.iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(
        phases,
        [
            ("chebyshev", "fit"),
            ("chebyshev", "solve"),
            ("chebyshev", "total"),
            ("kernel", "fit"),
            ("kernel", "solve"),
            ("kernel", "total")
        ]
    );
    assert!(timings.iter().all(|r| r[3] == "5"));
}

#[test]
fn compare_output_is_reproducible_outside_timings() {
    let dir = workspace();
    ok(
        dir.path(),
        &[
            "synth",
            "--law",
            "hyperbolic",
            "--n",
            "200",
            "--noise",
            "1e6",
            "--seed",
            "8",
            "-o",
            "noisy.csv",
        ],
    );
    let run = || {
        ok(
            dir.path(),
            &["compare", "--dataset", "noisy.csv", "--ten-bar", "--lambda", "1:5:5"],
        )
    };
    let strip = |s: String| s.split("# table: timings").next().unwrap().to_string();
    let (a, b) = (run(), run());
    assert_eq!(strip(a.clone()), strip(b));
    assert_eq!(table(&a, "timings")[3][1], "cv");
}

#[test]
fn compare_reports_stalled_kernel_path() {
    // cross-validation on 20 noise-free points picks a near-interpolating
    // bandwidth whose staircase tangent stalls Newton
    let dir = workspace();
    let out = ddtruss(
        dir.path(),
        &["compare", "--dataset", "hyp.csv", "--ten-bar", "-o", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(4));
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(summary_value(&csv, "steps_chebyshev"), "10");
    assert!(csv.contains("# kernel_truncated_at_lambda: "));
}

#[test]
fn custom_truss_file() {
    let dir = workspace();
    let truss = r#"{"nodes":[{"id":"A","x":0,"y":0,"fixed_x":true,"fixed_y":true},
                              {"id":"B","x":2,"y":0,"fixed_y":true}],
                    "members":[{"id":"bar","from":"A","to":"B","area":1e-4}],
                    "loads":[{"node":"B","fx":1000}]}"#;
    std::fs::write(dir.path().join("bar.json"), truss).unwrap();
    let csv = ok(
        dir.path(),
        &["solve", "--dataset", "lin.csv", "--truss", "bar.json", "--lambda", "3"],
    );
    // u = λ P L / (E A)
    let ux = num(table(&csv, "nodes")[1][1]);
    let exact = 3.0 * 1e3 * 2.0 / (2e11 * 1e-4);
    assert!((ux - exact).abs() <= 1e-9 * exact);
}

#[test]
fn usage_errors_exit_2() {
    let dir = workspace();
    let cases: [&[&str]; 5] = [
        &["solve", "--dataset", "lin.csv", "--ten-bar", "--truss", "t.json"],
        &["solve", "--dataset", "lin.csv"],
        &["path", "--dataset", "lin.csv", "--ten-bar", "--lambda", "10:1:5"],
        &["fit", "--dataset", "missing.csv"],
        &[
            "fit",
            "--dataset",
            "lin.csv",
            "--method",
            "kernel",
            "--alpha",
            "1",
            "--grid-size",
            "5",
        ],
    ];
    for args in cases {
        assert_eq!(ddtruss(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_to_unwritable_path_fails() {
    let dir = workspace();
    let target: PathBuf = dir.path().join("no_such_dir").join("out.csv");
    let out = ddtruss(
        dir.path(),
        &["fit", "--dataset", "lin.csv", "-o", target.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
}
