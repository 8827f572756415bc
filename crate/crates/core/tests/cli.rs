use std::process::{Command, Output};

fn c1qk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c1qk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn dim_column(table: &str) -> Vec<usize> {
    table
        .lines()
        .skip(3)
        .map(|l| l.split_whitespace().rev().nth(2).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn study_table_lists_space_dimensions() {
    let o = c1qk(&[
        "study",
        "--dim",
        "2",
        "--k",
        "4",
        "--element",
        "bell",
        "--levels",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("C1-Q4 Bell element, 2D\n"));
    assert_eq!(dim_column(&out), vec![21, 52, 156, 532]);
}

#[test]
fn table_output_is_byte_stable() {
    let args = [
        "study",
        "--dim",
        "2",
        "--k",
        "5",
        "--element",
        "bfs",
        "--levels",
        "4",
    ];
    let a = c1qk(&args);
    let b = c1qk(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn too_few_levels_is_a_usage_error() {
    let o = c1qk(&[
        "study",
        "--dim",
        "2",
        "--k",
        "4",
        "--element",
        "bell",
        "--levels",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("--levels must be >= 2"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn csv_study_in_three_dimensions() {
    let o = c1qk(&[
        "study",
        "--dim",
        "3",
        "--k",
        "4",
        "--element",
        "bfs",
        "--levels",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,n,h,dim_total,dim_free,l2_error,l2_order,h2_error,h2_order,solver_iters,seconds"
    );
    let last = lines.last().unwrap();
    assert_eq!(last.split(',').nth(3), Some("2744"));
}

#[test]
fn json_report_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = c1qk(&[
        "study",
        "--dim",
        "2",
        "--k",
        "6",
        "--element",
        "bell",
        "--levels",
        "2",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["k"], 6);
    assert_eq!(v["levels"][1]["dim_total"], 132);
}

#[test]
fn matrix_export_writes_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.mtx");
    let o = c1qk(&[
        "study",
        "--dim",
        "2",
        "--k",
        "4",
        "--element",
        "bell",
        "--levels",
        "3",
        "--export-matrix",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('%') || l.starts_with("%%"));
    assert_eq!(
        lines.next().unwrap(),
        "%%MatrixMarket matrix coordinate real symmetric"
    );
    let size: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    // G3 Bell k=4 has 76 free unknowns
    assert_eq!(&size[..2], &[76, 76]);
    assert_eq!(lines.count(), size[2]);
}

#[test]
fn element_info_reports_counts() {
    let o = c1qk(&[
        "element-info",
        "--dim",
        "2",
        "--k",
        "4",
        "--element",
        "bell",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("N_d                21\n"));
    assert!(out.contains("constraint rank    4\n"));
    let o = c1qk(&[
        "element-info",
        "--dim",
        "3",
        "--k",
        "4",
        "--element",
        "bell",
    ]);
    let out = stdout(&o);
    assert!(out.contains("N_d                83\n"));
    assert!(out.contains("constraint rank    42\n"));
    assert!(out.contains("null-space dim     83\n"));
}

#[test]
fn element_info_lists_dofs() {
    let o = c1qk(&[
        "element-info",
        "--dim",
        "2",
        "--k",
        "5",
        "--element",
        "bell",
        "--list-dofs",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dofs"].as_array().unwrap().len(), 32);
    assert_eq!(v["n_dofs"], 32);
}

#[test]
fn cubic_bell_is_rejected() {
    let o = c1qk(&[
        "element-info",
        "--dim",
        "2",
        "--k",
        "3",
        "--element",
        "bell",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--k 3"), "{}", stderr(&o));
    let o = c1qk(&["element-info", "--dim", "2", "--k", "3", "--element", "bfs"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn compare_dofs_table() {
    let o = c1qk(&[
        "compare-dofs",
        "--dim",
        "2",
        "--k",
        "4",
        "--n-max",
        "4",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "n,bell,bfs,ratio");
    assert!(rows[1].starts_with("1,21,25,"));
    assert!(rows[4].starts_with("4,156,196,"));
}

#[test]
fn bad_flags_name_the_flag() {
    let cases: &[(&[&str], &str)] = &[
        (
            &[
                "study",
                "--dim",
                "4",
                "--k",
                "4",
                "--element",
                "bell",
                "--levels",
                "2",
            ],
            "--dim",
        ),
        (
            &[
                "study",
                "--dim",
                "2",
                "--k",
                "4",
                "--element",
                "bell",
                "--levels",
                "2",
                "--tol",
                "2",
            ],
            "--tol",
        ),
        (
            &[
                "study",
                "--dim",
                "2",
                "--k",
                "4",
                "--element",
                "bell",
                "--levels",
                "2",
                "--quad",
                "3",
            ],
            "--quad",
        ),
        (
            &[
                "study",
                "--dim",
                "2",
                "--k",
                "4",
                "--element",
                "bell",
                "--levels",
                "13",
            ],
            "--levels",
        ),
        (
            &[
                "study",
                "--dim",
                "2",
                "--k",
                "4",
                "--element",
                "bell",
                "--levels",
                "2",
                "--solver",
                "lu",
            ],
            "--solver",
        ),
        (
            &[
                "study",
                "--dim",
                "2",
                "--k",
                "4",
                "--element",
                "quad",
                "--levels",
                "2",
            ],
            "--element",
        ),
        (
            &["compare-dofs", "--dim", "2", "--k", "4", "--n-max", "0"],
            "--n-max",
        ),
        (
            &["study", "--dim", "2", "--k", "4", "--element", "bell"],
            "--levels",
        ),
    ];
    for (args, flag) in cases {
        let o = c1qk(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unreachable_tolerance_is_a_numerical_failure() {
    let o = c1qk(&[
        "study",
        "--dim",
        "2",
        "--k",
        "4",
        "--element",
        "bfs",
        "--levels",
        "5",
        "--solver",
        "pcg",
        "--max-iter",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("did not converge"), "{}", stderr(&o));
}
