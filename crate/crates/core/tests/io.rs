mod common;

use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use rglasso::bench::{BenchRecord, CellStatus};
use rglasso::io::fixture::{make_planted_returns, FixtureSpec};
use rglasso::io::matrix_csv::{parse_matrix_csv, render_matrix_csv};
use rglasso::io::records::{parse_records_csv, render_records_csv};
use rglasso::io::{
    covariance_from_returns, export_graph, extract_graph, parse_returns, read_matrix_csv, write_matrix_csv,
    AnomalyGraph, Edge, GraphFormat, LoadOptions, ReturnsTable,
};
use rglasso::{rglasso_solve, Error, ErrorCategory, IngestError, SolverConfig, SymMatrix};

fn parse(text: &str) -> rglasso::Result<ReturnsTable> {
    parse_returns(text.as_bytes(), &LoadOptions::default())
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("n{i}")).collect()
}

#[test]
fn returns_with_header() {
    let mut r = rng(300);
    let header: Vec<String> = names(94);
    let mut text = header.join(",") + "\n";
    for _ in 0..389 {
        let row: Vec<String> = (0..94).map(|_| r.random_range(-0.01..0.01).to_string()).collect();
        text += &(row.join(",") + "\n");
    }
    let t = parse(&text).unwrap();
    assert_eq!((t.n_assets(), t.n_rows(), t.dropped_rows), (94, 389, 0));
    assert_eq!(t.asset_names, header);
}

#[test]
fn malformed_rows_are_dropped_and_counted() {
    let mut text = String::from("a,b,c\n");
    for k in 0..100 {
        text += &match k {
            10 => "1.0,,2.0\n".to_string(),
            20 => "1.0,x,2.0\n".to_string(),
            30 => "NaN,1,2\n".to_string(),
            _ => format!("{k},{},{}\n", k * 2, k % 7),
        };
    }
    let t = parse(&text).unwrap();
    assert_eq!((t.n_rows(), t.dropped_rows), (97, 3));
}

#[test]
fn headerless_gets_synthetic_names() {
    let t = parse("1,2\n3,4\n5,7\n").unwrap();
    assert_eq!(t.asset_names, vec!["col_0", "col_1"]);
    assert_eq!(t.n_rows(), 3);
}

#[test]
fn ingestion_errors_are_distinct() {
    assert!(matches!(parse("a,b\n1,2\n"), Err(Error::Ingest(IngestError::TooSmall { .. }))));
    assert!(matches!(parse("a\n1\n2\n"), Err(Error::Ingest(IngestError::TooSmall { .. }))));
    assert!(matches!(parse("a,b\n1,2\n1,2,3\n"), Err(Error::Ingest(IngestError::Ragged { .. }))));
    let missing = rglasso::io::load_returns_csv("/nonexistent/returns.csv", &LoadOptions::default());
    assert!(matches!(missing, Err(Error::Ingest(IngestError::Unreadable { .. }))));
    assert_eq!(missing.unwrap_err().category(), ErrorCategory::Ingestion);
}

#[test]
fn covariance_simple_cases() {
    let t = parse("1,1\n2,2\n4,4\n").unwrap();
    let c = covariance_from_returns(&t).unwrap();
    assert!((c.get(0, 1) - c.get(0, 0)).abs() < 1e-15);
    let t = parse("1,1\n-1,1\n1,-1\n-1,-1\n").unwrap();
    assert_eq!(covariance_from_returns(&t).unwrap().get(0, 1), 0.0);
}

#[test]
fn covariance_matches_two_pass() {
    let mut r = rng(301);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..5).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let t = ReturnsTable {
        asset_names: names(5),
        rows: rows.clone(),
        dropped_rows: 0,
    };
    let c = covariance_from_returns(&t).unwrap();
    let means: Vec<f64> = (0..5).map(|j| rows.iter().map(|x| x[j]).sum::<f64>() / 50.0).collect();
    for a in 0..5 {
        for b in 0..5 {
            let s: f64 = rows.iter().map(|x| (x[a] - means[a]) * (x[b] - means[b])).sum();
            assert!((c.get(a, b) - s / 49.0).abs() < 1e-14);
        }
    }
}

#[test]
fn matrix_csv_round_trip() {
    let mut r = rng(302);
    let m = DMatrix::from_fn(7, 7, |_, _| r.random_range(-1e6..1e6) * r.random::<f64>().powi(8));
    let text = render_matrix_csv(&m, Some(&names(7))).unwrap();
    let back = parse_matrix_csv(&text).unwrap();
    assert_eq!(back.names, Some(names(7)));
    assert!((back.matrix - &m).amax() <= 1e-12 * m.amax());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    write_matrix_csv(&path, &m, None).unwrap();
    let back = read_matrix_csv(&path).unwrap();
    assert_eq!(back.names, None);
    assert_eq!(back.matrix, m);
}

#[test]
fn graph_extraction_cases() {
    assert!(extract_graph(&SymMatrix::zeros(6), &names(6), None).unwrap().edges.is_empty());
    let mut s = DMatrix::zeros(6, 6);
    s[(2, 5)] = 3.0;
    s[(5, 2)] = 3.0;
    s[(1, 1)] = 9.0;
    let g = extract_graph(&SymMatrix::new(s).unwrap(), &names(6), None).unwrap();
    assert_eq!(g.edges, vec![Edge { src: 2, dst: 5, weight: 3.0 }]);
    assert_eq!(g.degrees(), vec![0, 0, 1, 0, 0, 1]);
    assert!(extract_graph(&SymMatrix::zeros(3), &names(2), None).is_err());
}

#[test]
fn export_formats() {
    let empty = AnomalyGraph::new(names(3), vec![]).unwrap();
    assert_eq!(empty.to_edge_list_csv().unwrap(), "src,dst,weight\n");
    assert_eq!(empty.to_dot().matches("--").count(), 0);
    assert!(empty.to_dot().starts_with("graph "));
    assert_eq!(AnomalyGraph::from_json(&empty.to_json().unwrap()).unwrap(), empty);

    let one = AnomalyGraph::new(names(3), vec![Edge { src: 2, dst: 0, weight: -1.5 }]).unwrap();
    assert_eq!(one.to_edge_list_csv().unwrap(), "src,dst,weight\nn0,n2,-1.5\n");
    assert_eq!(one.to_dot().matches("--").count(), 1);
    let json: serde_json::Value = serde_json::from_str(&one.to_json().unwrap()).unwrap();
    assert_eq!(json["edges"][0]["src"], "n0");
    assert_eq!(json["edges"][0]["weight"], -1.5);

    let dir = tempfile::tempdir().unwrap();
    for f in [GraphFormat::EdgeListCsv, GraphFormat::Dot, GraphFormat::Json] {
        let path = dir.path().join(format!("g.{}", f.extension()));
        export_graph(&one, f, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), one.render(f).unwrap());
    }
    assert!(export_graph(&one, GraphFormat::Dot, dir.path().join("missing/g.dot")).is_err());
}

#[test]
fn graph_rejects_self_loops_and_bad_indices() {
    assert!(AnomalyGraph::new(names(3), vec![Edge { src: 1, dst: 1, weight: 1.0 }]).is_err());
    assert!(AnomalyGraph::new(names(3), vec![Edge { src: 0, dst: 3, weight: 1.0 }]).is_err());
    assert!(AnomalyGraph::new(vec!["a".into(), "a".into()], vec![]).is_err());
}

#[test]
fn exclude_and_ego() {
    // path 0-1-2-3 plus edge 4-5
    let edges = [(0, 1), (1, 2), (2, 3), (4, 5)]
        .iter()
        .map(|&(src, dst)| Edge { src, dst, weight: 1.0 })
        .collect();
    let g = AnomalyGraph::new(names(6), edges).unwrap();
    let (h, unknown) = g.exclude(&["n1".into(), "zz".into()]);
    assert_eq!(unknown, vec!["zz"]);
    assert_eq!(h.nodes, vec!["n0", "n2", "n3", "n4", "n5"]);
    let pairs: Vec<_> = h.edge_names().into_iter().collect();
    assert_eq!(pairs, vec![("n2".into(), "n3".into()), ("n4".into(), "n5".into())]);

    let e = g.ego("n1", 1).unwrap();
    assert_eq!(e.nodes, vec!["n0", "n1", "n2"]);
    assert_eq!(e.edges.len(), 2);
    assert_eq!(g.ego("n1", 2).unwrap().nodes.len(), 4);
    assert!(g.ego("missing", 1).is_err());
    assert_eq!(g.ranked_by_degree()[0], ("n1".to_string(), 2));
}

#[test]
fn planted_fixture_end_to_end() {
    let spec = FixtureSpec {
        assets: 10,
        hidden_pairs: 4,
        ..FixtureSpec::default()
    };
    let fx = make_planted_returns(&spec).unwrap();
    let m = covariance_from_returns(&fx.table).unwrap();
    let r = rglasso_solve(&m, &SolverConfig::with_penalties(0.05, 4.0)).unwrap();
    let g = extract_graph(&r.s, &fx.table.asset_names, None).unwrap();
    let want: std::collections::BTreeSet<_> = fx.planted.iter().cloned().collect();
    assert_eq!(g.edge_names(), want);
}

#[test]
fn fixture_is_deterministic() {
    let a = make_planted_returns(&FixtureSpec::default()).unwrap();
    let b = make_planted_returns(&FixtureSpec::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.table.n_assets(), 24);
    assert_eq!(a.planted.len(), 6);
}

#[test]
fn records_csv_round_trip() {
    let rec = BenchRecord {
        structure: 2,
        p: 10,
        n: None,
        mode: "direct".into(),
        mu: 1000.0,
        lambda: 1.98,
        rho: 0.01,
        f1: 0.5,
        precision: 0.25,
        recall: 1.0,
        tp: 1,
        fp: 3,
        fn_: 0,
        iterations: 49,
        delta1: 9.17e-8,
        delta2: 1e-12,
        termination: "converged".into(),
        status: CellStatus::Ok,
        error: String::new(),
        wall_time: None,
    };
    let text = render_records_csv(std::slice::from_ref(&rec)).unwrap();
    assert!(text.starts_with("structure,p,n,mode,mu,lambda,rho,f1"));
    let back: Vec<BenchRecord> = parse_records_csv(&text).unwrap();
    assert_eq!(back, vec![rec]);
}
