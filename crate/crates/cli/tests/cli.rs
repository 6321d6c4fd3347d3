use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const DIAMOND: &str = "# s=0 a=1 b=2 t=3\n0 1\n0 2\n1 3\n2 3\n1 2\n";

fn hopenum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopenum"))
        .args(args)
        .env_remove("HOPENUM_TIME_LIMIT_MS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Complete bipartite layers of `width` vertices between a source and a target.
fn layered(layers: usize, width: usize) -> (String, usize) {
    let mut levels = vec![vec![0]];
    for l in 0..layers {
        levels.push((0..width).map(|x| 1 + l * width + x).collect());
    }
    let t = 1 + layers * width;
    levels.push(vec![t]);
    let mut text = String::new();
    for pair in levels.windows(2) {
        for u in &pair[0] {
            for v in &pair[1] {
                text.push_str(&format!("{u} {v}\n"));
            }
        }
    }
    (text, t)
}

#[test]
fn counts_on_diamond() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    for extra in [
        &[][..],
        &["--force-join", "1"],
        &["--force-join", "2"],
        &["--force-dfs"],
        &["--baseline-dfs"],
        &["--oracle"],
    ] {
        let mut args = vec!["query", s(&g), "0", "3", "3"];
        args.extend_from_slice(extra);
        let o = hopenum(&args);
        assert!(o.status.success(), "{extra:?}");
        assert_eq!(stdout(&o), "3\n", "{extra:?}");
    }
}

#[test]
fn unreachable_target_prints_zero() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let o = hopenum(&["query", s(&g), "3", "0", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn unknown_vertex_is_an_error() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let o = hopenum(&["query", s(&g), "0", "42", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("42"));
    let o = hopenum(&["query", s(&g), "0", "3", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stream_and_first_use_input_ids() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "sparse.txt", "100 200\n100 300\n200 400\n300 400\n200 300\n");
    let o = hopenum(&["query", s(&g), "100", "400", "3", "--stream"]);
    let text = stdout(&o);
    let mut lines: Vec<&str> = text.lines().map(str::trim).collect();
    lines.sort();
    assert_eq!(lines, vec!["100 200 300 400", "100 200 400", "100 300 400"]);
    let o = hopenum(&["query", s(&g), "100", "400", "3", "--first", "2"]);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn explain_and_metrics_go_to_stderr() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let o = hopenum(&["query", s(&g), "0", "3", "3", "--tau", "0", "--explain", "--metrics"]);
    assert_eq!(stdout(&o), "3\n");
    let err = String::from_utf8_lossy(&o.stderr);
    let mut docs = serde_json::Deserializer::from_str(&err).into_iter::<serde_json::Value>();
    let explain = docs.next().unwrap().unwrap();
    assert_eq!(explain["strategy"], "dfs");
    assert_eq!(explain["trace"]["cut"], 2);
    assert_eq!(explain["trace"]["dfs_cost"], 8);
    assert_eq!(explain["trace"]["join_cost"], 12);
    let metrics = docs.next().unwrap().unwrap();
    assert_eq!(metrics["result_count"], 3);
}

#[test]
fn time_limit_gives_distinct_exit_code() {
    let dir = TempDir::new().unwrap();
    let (text, t) = layered(4, 12);
    let g = write(&dir, "layered.txt", &text);
    let t = t.to_string();
    let o = Command::new(env!("CARGO_BIN_EXE_hopenum"))
        .args(["query", s(&g), "0", &t, "5", "--force-dfs"])
        .env("HOPENUM_TIME_LIMIT_MS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let found: u64 = stdout(&o).trim().parse().unwrap();
    assert!(found < 12u64.pow(4));
}

#[test]
fn constraint_file_filters_paths() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let c = write(
        &dir,
        "c.json",
        r#"{"default": {"weight": 1.0}, "edges": [[1, 2, 7.0, 0]], "predicate": {"max_weight": 5.0}}"#,
    );
    let o = hopenum(&["query", s(&g), "0", "3", "3", "--constraints", s(&c)]);
    assert_eq!(stdout(&o), "2\n");
    let o = hopenum(&[
        "query",
        s(&g),
        "0",
        "3",
        "3",
        "--constraints",
        s(&c),
        "--force-join",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hopenum(&[
            "bench",
            s(&g),
            "--setting",
            "v2v2",
            "--queries",
            "10",
            "--k",
            "3",
            "--seed",
            "7",
            "--omit-timings",
            "--output",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read(out.with_extension("csv")).unwrap(),
            fs::read_to_string(out.with_extension("json")).unwrap(),
        )
    };
    let (csv_a, json_a) = run("a");
    let (csv_b, json_b) = run("b");
    assert_eq!(csv_a, csv_b);
    assert_eq!(json_a, json_b);
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().skip(1).all(|l| l.contains(",ok,")));
    let sidecar: serde_json::Value = serde_json::from_str(&json_a).unwrap();
    assert_eq!(sidecar["summary"]["queries"], 10);
    assert_eq!(sidecar["workload"]["setting"], "v2v2");
}

#[test]
fn bench_timings_are_consistent() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let out = dir.path().join("r");
    let o = hopenum(&[
        "bench",
        s(&g),
        "--setting",
        "v2v2",
        "--queries",
        "10",
        "--k",
        "3",
        "--output",
        s(&out),
    ]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(out.with_extension("csv")).unwrap();
    for row in rdr.records() {
        let row = row.unwrap();
        let count: f64 = row[7].parse().unwrap();
        let time: f64 = row[8].parse().unwrap();
        let throughput: f64 = row[10].parse().unwrap();
        assert!(time < 100.0, "diamond query took {time} ms");
        if count > 0.0 {
            // Times are printed with four decimals, so allow for rounding.
            let rel = (throughput * time / 1e3 - count).abs() / count;
            assert!(rel < 0.5 || time < 0.01, "{throughput} * {time} vs {count}");
        }
    }
}

#[test]
fn dense_layered_workload_picks_join() {
    let dir = TempDir::new().unwrap();
    let (text, t) = layered(7, 6);
    let g = write(&dir, "layered.txt", &text);
    let w = write(&dir, "w.txt", &format!("0 {t} 8\n1 {t} 8\n"));
    let out = dir.path().join("r");
    let o = hopenum(&[
        "bench",
        s(&g),
        "--workload",
        s(&w),
        "--output",
        s(&out),
        "--omit-timings",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    assert!(first.contains(",join,4,279936,"), "{first}");
}

#[test]
fn dynamic_replays_every_edge() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "two.txt", "0 1\n1 0\n");
    let o = hopenum(&["dynamic", s(&g), "--fraction", "1", "--k", "3", "--omit-timings"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["insertions"], 2);
    assert_eq!(report["total_results"], 1);
}

#[test]
fn workload_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let w = dir.path().join("w.txt");
    let o = hopenum(&[
        "gen-workload",
        s(&g),
        "--setting",
        "v2v2",
        "--queries",
        "5",
        "--k",
        "3",
        "-o",
        s(&w),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&w).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    let out = dir.path().join("r");
    let o = hopenum(&[
        "bench",
        s(&g),
        "--workload",
        s(&w),
        "--output",
        s(&out),
        "--omit-timings",
    ]);
    assert!(o.status.success());
}

#[test]
fn verify_reports_agreement() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let o = hopenum(&["verify", s(&g), "0", "3", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("ok ")), "{text}");
    assert!(text.contains("walk-count dp=3 relaxed=3 estimate=3"));
}

#[test]
fn snapshot_loads_like_the_edge_list() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "sparse.txt", "100 200\n100 300\n200 400\n300 400\n200 300\n");
    let snap = dir.path().join("g.bin");
    assert!(hopenum(&["snapshot", s(&g), s(&snap)]).status.success());
    let o = hopenum(&["query", s(&snap), "100", "400", "3"]);
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn calibrate_falls_back_on_tiny_graphs() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "diamond.txt", DIAMOND);
    let o = hopenum(&["calibrate", s(&g), "--samples", "3", "--k", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["fallback"], true);
    assert_eq!(v["tau"], 1e5);
}
