mod common;

use std::fs;
use std::path::Path;

use common::random_temporal_graph;
use dirclosure::closure::{detect_closure_stream, list_closure_flags};
use dirclosure::graph::TemporalDigraph;
use dirclosure::io::{
    emit_edge_csv, emit_list_file, micro_celebrities, parse_edge_csv, parse_list_file,
    parse_list_str, HandleMap,
};
use dirclosure::models::{generate, ModelParams};
use dirclosure::Error;
use proptest::prelude::*;

fn csv_round_trip(g: &TemporalDigraph) -> TemporalDigraph {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edges.csv");
    emit_edge_csv(g, &path, &["seed=7".into()]).unwrap();
    parse_edge_csv(&path).unwrap()
}

fn assert_same_graph(a: &TemporalDigraph, b: &TemporalDigraph) {
    assert_eq!(a.node_count(), b.node_count());
    assert_eq!(a.edges(), b.edges());
    assert_eq!(a.communities(), b.communities());
    let bits = |g: &TemporalDigraph| g.fitness().map(|f| f.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    assert_eq!(bits(a), bits(b));
    assert_eq!(a.fingerprint(), b.fingerprint());
}

#[test]
fn edge_csv_round_trips_generated_graphs() {
    for p in [
        ModelParams::pa(2_000, 0.3, 10, 7),
        ModelParams::fitness(2_000, 0.3, 10, 7),
        ModelParams::communities(2_000, 0.3, 0.8, 20, 10, 7),
    ] {
        let g = generate(&p).unwrap().graph;
        assert_same_graph(&g, &csv_round_trip(&g));
    }
}

#[test]
fn isolated_trailing_nodes_survive() {
    let mut g = TemporalDigraph::new(6);
    g.append_edge(0, 1).unwrap();
    assert_same_graph(&g, &csv_round_trip(&g));
}

proptest! {
    #[test]
    fn edge_csv_round_trips_random_graphs(n in 1usize..=30, density in 0.0f64..0.4, seed: u64, labelled: bool) {
        let mut g = random_temporal_graph(n, density, seed);
        if labelled {
            g.set_communities((0..n as u32).map(|v| v % 3).collect()).unwrap();
            g.set_fitness((0..n).map(|v| 1.0 / (v as f64 + 3.0)).collect()).unwrap();
        }
        assert_same_graph(&g, &csv_round_trip(&g));
    }

    #[test]
    fn list_file_round_trips_at_handle_level(n in 2usize..=25, density in 0.05f64..0.35, seed: u64) {
        let g = random_temporal_graph(n, density, seed);
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.txt");
        let second = dir.path().join("b.txt");
        emit_list_file(&g, &HandleMap::numeric(n), &first).unwrap();
        let (h, handles) = parse_list_file(&first).unwrap();
        emit_list_file(&h, &handles, &second).unwrap();
        let lines = |p: &Path| {
            let mut v: Vec<String> = fs::read_to_string(p).unwrap().lines().map(String::from).collect();
            v.sort();
            v
        };
        prop_assert_eq!(lines(&first), lines(&second));
        prop_assert!(h.has_synthetic_seq());
        prop_assert_eq!(h.edge_count(), g.edge_count());
    }

    #[test]
    fn list_flags_equal_csv_flags(n in 2usize..=25, density in 0.05f64..0.35, seed: u64) {
        let g = random_temporal_graph(n, density, seed);
        let dir = tempfile::tempdir().unwrap();
        let lists = dir.path().join("l.txt");
        emit_list_file(&g, &HandleMap::numeric(n), &lists).unwrap();
        let (h, handles) = parse_list_file(&lists).unwrap();
        let from_csv = detect_closure_stream(&csv_round_trip(&g));
        let from_lists = list_closure_flags(&h);
        for e in g.edges() {
            let a = handles.id(&e.src.to_string()).unwrap();
            let c = handles.id(&e.dst.to_string()).unwrap();
            prop_assert_eq!(from_lists.is_closed(h.seq_of(a, c).unwrap()), from_csv.is_closed(e.seq));
        }
    }
}

fn parse_csv_text(text: &str) -> dirclosure::Result<TemporalDigraph> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, text).unwrap();
    parse_edge_csv(&path)
}

#[test]
fn malformed_edge_csv_is_rejected() {
    let bad = [
        "src,dst,seq\n0,1,0\n1,2,0\n",
        "src,dst,seq\n0,1,0\n1,2,2\n",
        "src,dst,seq\n0,0,0\n",
        "src,dst,seq\n0,1,0\n0,1,1\n",
        "src,dst,seq\n0,x,0\n",
        "a,b\n0,1\n",
    ];
    for text in bad {
        assert!(parse_csv_text(text).is_err(), "accepted {text:?}");
    }
    let ok = parse_csv_text("# note\nsrc,dst,seq\n1,2,1\n0,1,0\n").unwrap();
    assert_eq!(ok.edge(0).src, 0);
    assert_eq!(ok.edge(1).src, 1);
}

#[test]
fn list_errors_carry_line_numbers() {
    let cases = [
        ("in a: b\nsideways a: c\n", 2),
        ("in a: b b\n", 1),
        ("out a: a\n", 1),
        ("in c: a\n\nin c: b\n", 3),
        ("in a\n", 1),
    ];
    for (text, want) in cases {
        match parse_list_str(text, Path::new("x.txt")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
    let contradiction = "in c: a b\nout b: c x\nin x: b a\nout a: x c\n";
    let err = parse_list_str(contradiction, Path::new("x")).unwrap_err();
    assert!(err.to_string().contains("contradict"), "{err}");
}

#[test]
fn handles_are_case_insensitive() {
    let (g, h) = parse_list_str("in C: B A\nout a: b c\n", Path::new("x")).unwrap();
    assert_eq!(h.len(), 3);
    assert_eq!(g.in_list(h.id("c").unwrap()).len(), 2);
    assert!(h.id("A").is_some());
}

#[test]
fn micro_celebrity_band() {
    let mut g = TemporalDigraph::new(30);
    for v in 1..30 {
        g.append_edge(v, 0).unwrap();
    }
    for v in 2..12 {
        g.append_edge(v, 1).unwrap();
    }
    assert_eq!(micro_celebrities(&g, 10, 20), vec![1]);
    assert_eq!(micro_celebrities(&g, 10, 50), vec![0, 1]);
}
