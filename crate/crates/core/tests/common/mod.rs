#![allow(dead_code)]

use dirclosure::graph::{NodeId, TemporalDigraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Each ordered pair is an edge with probability `density`; arrival order is
/// a uniform shuffle.
pub fn random_temporal_graph(n: usize, density: f64, seed: u64) -> TemporalDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    for s in 0..n as NodeId {
        for d in 0..n as NodeId {
            if s != d && rng.random_bool(density) {
                pairs.push((s, d));
            }
        }
    }
    pairs.shuffle(&mut rng);
    let mut g = TemporalDigraph::new(n);
    for (s, d) in pairs {
        g.append_edge(s, d).unwrap();
    }
    g
}

/// For each edge, scans every pair of earlier edges for a two-step path.
pub fn brute_force_flags(g: &TemporalDigraph) -> Vec<bool> {
    let edges: Vec<(NodeId, NodeId)> = g.edges().iter().map(|e| (e.src, e.dst)).collect();
    (0..edges.len())
        .map(|i| {
            let (a, c) = edges[i];
            (0..i).any(|j| {
                (0..i).any(|k| edges[j].0 == a && edges[k].1 == c && edges[j].1 == edges[k].0)
            })
        })
        .collect()
}
