use std::fs;
use std::path::{Path, PathBuf};

use pegasus::cli::{run, EXIT_INFEASIBLE, EXIT_INVALID, EXIT_OK, EXIT_PARSE};
use pegasus::Graph;

const TOY: &str = "0 2\n0 3\n1 2\n1 3\n2 4\n3 4\n";

fn pegasus(args: &[&str]) -> i32 {
    run(std::iter::once("pegasus").chain(args.iter().copied()))
}

fn toy(dir: &Path) -> PathBuf {
    let p = dir.join("toy.tsv");
    fs::write(&p, TOY).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(p: &Path) -> Vec<(u32, f64)> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .map(|l| {
            let (u, v) = l.split_once('\t').unwrap();
            (u.parse().unwrap(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn summarize_writes_summary_within_budget() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    let t = dir.path().join("t.txt");
    fs::write(&t, "0\n4\n").unwrap();
    let out = dir.path().join("out.pgs");
    let code = pegasus(&[
        "summarize", "-i", s(&g), "--targets", s(&t), "--budget-ratio", "0.5", "--alpha", "1.25", "--beta", "0.1",
        "--iters", "20", "--seed", "42", "-o", s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let summary = pegasus::summary::read_pgs(std::io::BufReader::new(fs::File::open(&out).unwrap())).unwrap();
    let graph = Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
    assert!(summary.size_bits() <= 0.5 * graph.size_bits() + 1e-9);

    let mut report_path = out.clone().into_os_string();
    report_path.push(".report.json");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(report["config"]["alpha"], 1.25);
    assert_eq!(report["config"]["seed"], 42);
}

#[test]
fn summarize_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    let out = dir.path().join("o.pgs");
    assert_eq!(
        pegasus(&["summarize", "-i", s(&g), "--budget-ratio", "0.5", "--alpha", "0.5", "-o", s(&out)]),
        EXIT_INVALID
    );
    assert_eq!(pegasus(&["summarize", "-i", s(&g), "--budget-bits", "1", "-o", s(&out)]), EXIT_INFEASIBLE);
    let missing = dir.path().join("missing.tsv");
    assert_eq!(pegasus(&["summarize", "-i", s(&missing), "--budget-ratio", "0.5", "-o", s(&out)]), EXIT_PARSE);
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "0 x\n").unwrap();
    assert_eq!(pegasus(&["summarize", "-i", s(&bad), "--budget-ratio", "0.5", "-o", s(&out)]), EXIT_PARSE);
}

#[test]
fn hop_query_on_toy_has_five_rows() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    let out = dir.path().join("hop.tsv");
    assert_eq!(pegasus(&["query", "-i", s(&g), "--exact", "--type", "hop", "--node", "0", "-o", s(&out)]), EXIT_OK);
    let r = rows(&out);
    // BFS from 0: 2, 3 at one hop; 1, 4 at two.
    assert_eq!(r, vec![(0, 0.0), (1, 2.0), (2, 1.0), (3, 1.0), (4, 2.0)]);
}

#[test]
fn top_rows_descend() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    let out = dir.path().join("top.tsv");
    assert_eq!(
        pegasus(&["query", "-i", s(&g), "--exact", "--type", "rwr", "--node", "1", "--top", "3", "-o", s(&out)]),
        EXIT_OK
    );
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    assert!(r.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn initial_summary_matches_exact_answers() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    let pgs = dir.path().join("init.pgs");
    let graph = Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
    let mut bytes = Vec::new();
    pegasus::summary::write_pgs(&pegasus::SummaryGraph::initial(&graph), &mut bytes).unwrap();
    fs::write(&pgs, bytes).unwrap();
    for kind in ["rwr", "hop", "php"] {
        let a = dir.path().join(format!("{kind}.summary.tsv"));
        let b = dir.path().join(format!("{kind}.exact.tsv"));
        assert_eq!(pegasus(&["query", "-i", s(&pgs), "--type", kind, "--node", "2", "-o", s(&a)]), EXIT_OK);
        assert_eq!(pegasus(&["query", "-i", s(&g), "--exact", "--type", kind, "--node", "2", "-o", s(&b)]), EXIT_OK);
        for ((u, x), (v, y)) in rows(&a).into_iter().zip(rows(&b)) {
            assert_eq!(u, v);
            assert!((x - y).abs() <= 1e-9, "{kind} node {u}: {x} vs {y}");
        }
    }
}

#[test]
fn query_rejects_bad_node_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    assert_eq!(pegasus(&["query", "-i", s(&g), "--exact", "--type", "hop", "--node", "9"]), EXIT_INVALID);
    let missing = dir.path().join("none.pgs");
    assert_eq!(pegasus(&["query", "-i", s(&missing), "--type", "hop", "--node", "0"]), EXIT_PARSE);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    for p in [&a, &b] {
        assert_eq!(
            pegasus(&["generate", "--model", "ba", "--n", "1000", "--m", "5", "--seed", "7", "-o", s(p)]),
            EXIT_OK
        );
    }
    let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn stats_on_toy_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    assert_eq!(pegasus(&["stats", "-i", s(&g)]), EXIT_OK);
}

#[test]
fn evaluate_with_zero_queries_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let g = toy(dir.path());
    let pgs = dir.path().join("s.pgs");
    assert_eq!(pegasus(&["summarize", "-i", s(&g), "--budget-ratio", "0.9", "-o", s(&pgs)]), EXIT_OK);
    let out = dir.path().join("eval.jsonl");
    assert_eq!(pegasus(&["evaluate", "-g", s(&g), "-s", s(&pgs), "--queries", "0", "-o", s(&out)]), EXIT_OK);
    assert_eq!(fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn distsim_runs_a_small_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    fs::write(
        &scenario,
        r#"{"dataset":"tiny","graph":{"model":"two_community","n_each":60,"m":2,"bridges":4,"seed":1},
            "machines":2,"seeds":[0],"query_count":5}"#,
    )
    .unwrap();
    let out = dir.path().join("dist.jsonl");
    assert_eq!(pegasus(&["distsim", "--scenario", s(&scenario), "-o", s(&out)]), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    let deployments: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["deployment"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(deployments, ["summary", "subgraph"]);
}
