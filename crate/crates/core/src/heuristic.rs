//! Closed-form closure-ratio estimate for preferential-attachment graphs.
//!
//! `S_t(j)` is the chance that one fresh edge lands on some follower of `j`:
//! a uniform pick hits one of the `|F_t(j)|` followers among `N_t` nodes,
//! a preferential pick hits them with total weight `d_t(F_t(j)) / E_t`.
//! If the edge to `j` is the `d`-th of its source's `D` edges, an earlier
//! sibling reached a follower with probability `1 - (1 - S)^(d-1)`; averaging
//! over `d = 1..D` gives `C_t(j) = 1 - (1 - (1 - S)^D) / (D S)`.

use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalDigraph};

#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicSnapshot {
    pub step: usize,
    pub edges: usize,
    pub nodes: usize,
    /// `|F_t(j)|`
    pub in_degree: Vec<usize>,
    /// `d_t(F_t(j))`
    pub follower_degree_sum: Vec<u64>,
}

impl HeuristicSnapshot {
    /// Snapshot of the complete graph.
    pub fn of_final(g: &TemporalDigraph) -> Self {
        let in_degree = g.in_degrees();
        let follower_degree_sum = (0..g.node_count() as NodeId)
            .map(|j| {
                g.in_edges(j)
                    .iter()
                    .map(|&(x, _)| in_degree[x as usize] as u64)
                    .sum()
            })
            .collect();
        Self {
            step: g.node_count().saturating_sub(1),
            edges: g.edge_count(),
            nodes: g.node_count(),
            in_degree,
            follower_degree_sum,
        }
    }
}

/// Probability that one new edge points at a follower of `j`. `uniform_prob`
/// is the chance the endpoint is drawn uniformly rather than by in-degree.
pub fn s_t(j: NodeId, snap: &HeuristicSnapshot, uniform_prob: f64) -> Result<f64> {
    s_from_counts(
        snap.in_degree[j as usize],
        snap.follower_degree_sum[j as usize],
        snap.nodes,
        snap.edges,
        uniform_prob,
    )
}

fn s_from_counts(
    followers: usize,
    follower_degree_sum: u64,
    nodes: usize,
    edges: usize,
    uniform_prob: f64,
) -> Result<f64> {
    if edges == 0 || nodes == 0 {
        return Err(Error::EmptySnapshot);
    }
    let s = uniform_prob * followers as f64 / nodes as f64
        + (1.0 - uniform_prob) * follower_degree_sum as f64 / edges as f64;
    Ok(s.clamp(0.0, 1.0))
}

/// `C_t(j)` from `S_t(j)` for sources emitting `d` edges; 0 at `s = 0`.
pub fn c_t(s: f64, d: usize) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let d = d as f64;
    // 1 - (1 - s)^D without cancellation for small s.
    let reach = if s >= 1.0 {
        1.0
    } else {
        -(d * (-s).ln_1p()).exp_m1()
    };
    (1.0 - reach / (d * s)).max(0.0)
}

/// Estimated final closure ratio `C_{N-1}(j)` of every node.
pub fn approx_final_ratios(g: &TemporalDigraph, uniform_prob: f64, d: usize) -> Vec<f64> {
    let snap = HeuristicSnapshot::of_final(g);
    (0..g.node_count() as NodeId)
        .map(|j| s_t(j, &snap, uniform_prob).map_or(0.0, |s| c_t(s, d)))
        .collect()
}

/// `C_t(j)` for each tracked node after every arrival step.
///
/// Step `t` ends once node `t`'s out-edges are in; nodes are assumed to
/// arrive in label order, as in the generated models. Row `i` of the result
/// belongs to `nodes[i]` and holds one value per step.
pub fn heuristic_trace(
    g: &TemporalDigraph,
    uniform_prob: f64,
    d: usize,
    nodes: &[NodeId],
) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut in_degree = vec![0u64; n];
    // followers[i][x] marks x as a follower of nodes[i]
    let mut is_follower: Vec<Vec<bool>> = nodes.iter().map(|_| vec![false; n]).collect();
    let mut follower_sum = vec![0u64; nodes.len()];
    let mut follower_count = vec![0usize; nodes.len()];
    let mut out: Vec<Vec<f64>> = nodes.iter().map(|_| Vec::with_capacity(n)).collect();

    let edges = g.edges();
    let mut next = 0;
    let mut seen_max = 0usize;
    for t in 0..n {
        while next < edges.len() && edges[next].src as usize <= t {
            let e = edges[next];
            seen_max = seen_max.max(e.src as usize).max(e.dst as usize);
            in_degree[e.dst as usize] += 1;
            for (i, &j) in nodes.iter().enumerate() {
                if is_follower[i][e.dst as usize] {
                    follower_sum[i] += 1;
                }
                if e.dst == j {
                    is_follower[i][e.src as usize] = true;
                    follower_count[i] += 1;
                    follower_sum[i] += in_degree[e.src as usize];
                }
            }
            next += 1;
        }
        let nodes_now = (t + 1).max(seen_max + 1);
        for i in 0..nodes.len() {
            let s = s_from_counts(follower_count[i], follower_sum[i], nodes_now, next, uniform_prob);
            out[i].push(s.map_or(0.0, |s| c_t(s, d)));
        }
    }
    out
}
