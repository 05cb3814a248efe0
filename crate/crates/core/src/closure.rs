//! Closure detection and per-node closure statistics.
//!
//! An edge `A -> C` exhibits closure when, at the moment it arrives, some
//! `B` already has both `A -> B` and `B -> C` in place.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalDigraph};

/// Per-edge closure outcome, indexed by `seq`.
///
/// `known` is false for edges whose outcome the available orderings cannot
/// decide (list-ingested edges missing from one of the two lists).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureFlags {
    closed: Vec<bool>,
    known: Vec<bool>,
}

impl ClosureFlags {
    pub fn from_bools(closed: Vec<bool>) -> Self {
        let known = vec![true; closed.len()];
        Self { closed, known }
    }

    pub fn len(&self) -> usize {
        self.closed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closed.is_empty()
    }

    pub fn is_closed(&self, seq: usize) -> bool {
        self.closed[seq]
    }

    pub fn is_known(&self, seq: usize) -> bool {
        self.known[seq]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.closed
    }

    pub fn closed_count(&self) -> usize {
        self.closed.iter().filter(|&&b| b).count()
    }

    pub fn unknown_count(&self) -> usize {
        self.known.iter().filter(|&&b| !b).count()
    }
}

/// Incremental closure detector fed one edge at a time in arrival order.
///
/// Keeps the set of present edges plus per-node out- and in-neighbour lists;
/// each check scans the shorter of `out(A)` and `in(C)`.
#[derive(Debug, Default)]
pub struct ClosureStream {
    present: HashSet<(NodeId, NodeId)>,
    out_so_far: Vec<Vec<NodeId>>,
    in_so_far: Vec<Vec<NodeId>>,
}

impl ClosureStream {
    pub fn new(node_count: usize) -> Self {
        Self {
            present: HashSet::new(),
            out_so_far: vec![Vec::new(); node_count],
            in_so_far: vec![Vec::new(); node_count],
        }
    }

    /// Records `src -> dst` and returns whether it closed a two-step path.
    pub fn push(&mut self, src: NodeId, dst: NodeId) -> bool {
        let need = (src.max(dst) as usize) + 1;
        if self.out_so_far.len() < need {
            self.out_so_far.resize_with(need, Vec::new);
            self.in_so_far.resize_with(need, Vec::new);
        }
        let outs = &self.out_so_far[src as usize];
        let ins = &self.in_so_far[dst as usize];
        let closed = if outs.len() <= ins.len() {
            outs.iter().any(|&b| self.present.contains(&(b, dst)))
        } else {
            ins.iter().any(|&b| self.present.contains(&(src, b)))
        };
        self.present.insert((src, dst));
        self.out_so_far[src as usize].push(dst);
        self.in_so_far[dst as usize].push(src);
        closed
    }
}

/// Closure flag for every edge, replaying the graph in arrival order.
pub fn detect_closure_stream(g: &TemporalDigraph) -> ClosureFlags {
    let mut stream = ClosureStream::new(g.node_count());
    let closed = g.edges().iter().map(|e| stream.push(e.src, e.dst)).collect();
    ClosureFlags::from_bools(closed)
}

/// The list criterion: `A -> C` closes iff some `B` precedes `A` in the
/// in-list of `C` and precedes `C` in the out-list of `A`.
pub fn exhibits_closure_lists(g: &TemporalDigraph, a: NodeId, c: NodeId) -> Result<bool> {
    let seq = g.seq_of(a, c).ok_or(Error::MissingEdge(a, c))?;
    if g.edge(seq).order != crate::graph::OrderInfo::Full {
        return Err(Error::Undeterminable(a, c));
    }
    let in_pos = g
        .in_edges(c)
        .iter()
        .position(|&(s, _)| s == a)
        .expect("adjacency consistent with edge index");
    let out_pos = g
        .out_edges(a)
        .iter()
        .position(|&(d, _)| d == c)
        .expect("adjacency consistent with edge index");

    let earlier_followers: HashSet<NodeId> = g.in_edges(c)[..in_pos]
        .iter()
        .filter(|&&(_, s)| g.edge(s).order.in_known())
        .map(|&(b, _)| b)
        .collect();
    Ok(g.out_edges(a)[..out_pos]
        .iter()
        .filter(|&&(_, s)| g.edge(s).order.out_known())
        .any(|(b, _)| earlier_followers.contains(b)))
}

/// Applies the list criterion to every edge. Edges it cannot decide are
/// reported as not closed and marked unknown.
pub fn list_closure_flags(g: &TemporalDigraph) -> ClosureFlags {
    let m = g.edge_count();
    let mut in_pos = vec![0usize; m];
    let mut out_pos = vec![0usize; m];
    for v in 0..g.node_count() as NodeId {
        for (i, &(_, s)) in g.in_edges(v).iter().enumerate() {
            in_pos[s] = i;
        }
        for (i, &(_, s)) in g.out_edges(v).iter().enumerate() {
            out_pos[s] = i;
        }
    }

    let decide = |seq: usize| -> Option<bool> {
        let e = g.edge(seq);
        if e.order != crate::graph::OrderInfo::Full {
            return None;
        }
        let (a, c) = (e.src, e.dst);
        let outs = &g.out_edges(a)[..out_pos[seq]];
        let ins = &g.in_edges(c)[..in_pos[seq]];
        let hit = if outs.len() <= ins.len() {
            outs.iter().any(|&(b, ab)| {
                g.edge(ab).order.out_known()
                    && g.seq_of(b, c).is_some_and(|bc| {
                        g.edge(bc).order.in_known() && in_pos[bc] < in_pos[seq]
                    })
            })
        } else {
            ins.iter().any(|&(b, bc)| {
                g.edge(bc).order.in_known()
                    && g.seq_of(a, b).is_some_and(|ab| {
                        g.edge(ab).order.out_known() && out_pos[ab] < out_pos[seq]
                    })
            })
        };
        Some(hit)
    };

    let decided: Vec<Option<bool>> = (0..m).into_par_iter().map(decide).collect();
    ClosureFlags {
        closed: decided.iter().map(|d| d == &Some(true)).collect(),
        known: decided.iter().map(Option::is_some).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureProfile {
    pub node: NodeId,
    pub in_degree: usize,
    pub closed: usize,
    pub final_ratio: f64,
    /// Running closure ratio over the node's in-edges; empty unless requested.
    pub trajectory: Vec<f64>,
    pub follower_indegree_sum: u64,
    pub same_community_follower_indegree_sum: Option<u64>,
}

/// Running closure ratio over `c`'s in-edges in arrival order.
pub fn closure_trajectory(g: &TemporalDigraph, flags: &ClosureFlags, c: NodeId) -> Vec<f64> {
    let mut hits = 0usize;
    g.in_edges(c)
        .iter()
        .enumerate()
        .map(|(i, &(_, s))| {
            hits += usize::from(flags.is_closed(s));
            hits as f64 / (i + 1) as f64
        })
        .collect()
}

/// Fraction of `c`'s in-edges that exhibit closure; zero for a node with no
/// followers.
pub fn final_ratio(g: &TemporalDigraph, flags: &ClosureFlags, c: NodeId) -> f64 {
    let ins = g.in_edges(c);
    if ins.is_empty() {
        return 0.0;
    }
    let hits = ins.iter().filter(|&&(_, s)| flags.is_closed(s)).count();
    hits as f64 / ins.len() as f64
}

/// Sum of in-degrees of `c`'s followers.
pub fn follower_indegree_sum(g: &TemporalDigraph, c: NodeId) -> u64 {
    g.in_edges(c)
        .iter()
        .map(|&(x, _)| g.in_degree(x) as u64)
        .sum()
}

/// Same as [`follower_indegree_sum`] restricted to followers sharing `c`'s
/// community label.
pub fn same_community_follower_indegree_sum(g: &TemporalDigraph, c: NodeId) -> Result<u64> {
    let labels = g.communities().ok_or(Error::NoCommunities)?;
    let own = labels[c as usize];
    Ok(g.in_edges(c)
        .iter()
        .filter(|&&(x, _)| labels[x as usize] == own)
        .map(|&(x, _)| g.in_degree(x) as u64)
        .sum())
}

pub fn follower_indegree_sums(
    g: &TemporalDigraph,
    c: NodeId,
    same_community: bool,
) -> Result<(u64, Option<u64>)> {
    let total = follower_indegree_sum(g, c);
    let same = if same_community {
        Some(same_community_follower_indegree_sum(g, c)?)
    } else {
        None
    };
    Ok((total, same))
}

pub fn closure_profile(
    g: &TemporalDigraph,
    flags: &ClosureFlags,
    c: NodeId,
    with_trajectory: bool,
    same_community: bool,
) -> Result<ClosureProfile> {
    let (follower_indegree_sum, same_community_follower_indegree_sum) =
        follower_indegree_sums(g, c, same_community)?;
    let closed = g
        .in_edges(c)
        .iter()
        .filter(|&&(_, s)| flags.is_closed(s))
        .count();
    Ok(ClosureProfile {
        node: c,
        in_degree: g.in_degree(c),
        closed,
        final_ratio: final_ratio(g, flags, c),
        trajectory: if with_trajectory {
            closure_trajectory(g, flags, c)
        } else {
            Vec::new()
        },
        follower_indegree_sum,
        same_community_follower_indegree_sum,
    })
}

/// Profiles of every node, without trajectories.
pub fn all_profiles(
    g: &TemporalDigraph,
    flags: &ClosureFlags,
    same_community: bool,
) -> Result<Vec<ClosureProfile>> {
    if same_community && g.communities().is_none() {
        return Err(Error::NoCommunities);
    }
    (0..g.node_count() as NodeId)
        .into_par_iter()
        .map(|c| closure_profile(g, flags, c, false, same_community))
        .collect()
}

/// The `m` nodes of highest in-degree, ties broken by smaller id.
pub fn top_by_in_degree(g: &TemporalDigraph, m: usize) -> Vec<NodeId> {
    let mut ids: Vec<NodeId> = (0..g.node_count() as NodeId).collect();
    ids.sort_by(|&a, &b| g.in_degree(b).cmp(&g.in_degree(a)).then(a.cmp(&b)));
    ids.truncate(m);
    ids
}

/// When a follower's `k` is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KMode {
    /// `k` counts every follower of `C` that `A` follows in the final graph.
    #[default]
    EndOfData,
    /// Only followers of `C` whose edge to `C` precedes `A -> C` count.
    AtArrival,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KLinkedStat {
    pub k: usize,
    /// Followers of `C` that are k-linked to it, in in-list order.
    pub members: Vec<NodeId>,
    /// Members whose edge to `C` exhibits closure.
    pub closed: usize,
    /// Members whose closure outcome counts toward `f_k`.
    pub evaluated: usize,
}

impl KLinkedStat {
    pub fn f_k(&self) -> Option<f64> {
        (self.evaluated > 0).then(|| self.closed as f64 / self.evaluated as f64)
    }
}

/// Partitions the followers of `c` by how many other followers of `c` they
/// follow. Only nonempty classes are returned, ascending in `k`.
///
/// With `exclude_undetermined`, followers whose edge outcome is unknown are
/// kept as members but left out of `f_k`.
pub fn k_linked_partition(
    g: &TemporalDigraph,
    flags: &ClosureFlags,
    c: NodeId,
    mode: KMode,
    exclude_undetermined: bool,
) -> Vec<KLinkedStat> {
    let followed_at: HashMap<NodeId, usize> =
        g.in_edges(c).iter().map(|&(b, s)| (b, s)).collect();

    let mut by_k: Vec<KLinkedStat> = Vec::new();
    for &(a, ac) in g.in_edges(c) {
        let k = g
            .out_edges(a)
            .iter()
            .filter(|(b, _)| match (followed_at.get(b), mode) {
                (None, _) => false,
                (Some(_), KMode::EndOfData) => true,
                (Some(&bc), KMode::AtArrival) => bc < ac,
            })
            .count();
        if by_k.len() <= k {
            by_k.resize_with(k + 1, || KLinkedStat {
                k: 0,
                members: Vec::new(),
                closed: 0,
                evaluated: 0,
            });
        }
        let slot = &mut by_k[k];
        slot.k = k;
        slot.members.push(a);
        if exclude_undetermined && !flags.is_known(ac) {
            continue;
        }
        slot.evaluated += 1;
        slot.closed += usize::from(flags.is_closed(ac));
    }
    by_k.into_iter().filter(|s| !s.members.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(n: usize, edges: &[(NodeId, NodeId)]) -> TemporalDigraph {
        let mut g = TemporalDigraph::new(n);
        for &(s, d) in edges {
            g.append_edge(s, d).unwrap();
        }
        g
    }

    // A=0, B=1, C=2
    #[test]
    fn closing_edge_arrives_last() {
        let g = build(3, &[(1, 2), (0, 1), (0, 2)]);
        assert_eq!(detect_closure_stream(&g).as_slice(), &[false, false, true]);
    }

    #[test]
    fn closing_edge_arrives_first() {
        let g = build(3, &[(0, 2), (0, 1), (1, 2)]);
        assert_eq!(detect_closure_stream(&g).as_slice(), &[false, false, false]);
    }

    #[test]
    fn list_criterion_with_witness() {
        // C=0, A=1, B1=2, B2=3, B3=4; in(C)=[B1,B2,B3,A], out(A)=[B2,C]
        let g = build(5, &[(2, 0), (3, 0), (4, 0), (1, 3), (1, 0)]);
        assert_eq!(g.in_list(0), vec![2, 3, 4, 1]);
        assert_eq!(g.out_list(1), vec![3, 0]);
        assert!(exhibits_closure_lists(&g, 1, 0).unwrap());
    }

    #[test]
    fn list_criterion_first_follower() {
        // A=0 follows C=2 before B=1 does
        let g = build(3, &[(0, 1), (0, 2), (1, 2)]);
        assert!(!exhibits_closure_lists(&g, 0, 2).unwrap());
    }

    #[test]
    fn list_criterion_first_out_edge() {
        // out(A)=[C,B], in(C)=[B,A]
        let g = build(3, &[(1, 2), (0, 2), (0, 1)]);
        assert_eq!(g.out_list(0), vec![2, 1]);
        assert_eq!(g.in_list(2), vec![1, 0]);
        assert!(!exhibits_closure_lists(&g, 0, 2).unwrap());
    }

    #[test]
    fn list_criterion_missing_edge() {
        let g = build(3, &[(1, 2)]);
        assert!(matches!(
            exhibits_closure_lists(&g, 0, 2),
            Err(Error::MissingEdge(0, 2))
        ));
    }

    #[test]
    fn trajectory_arithmetic() {
        // C=0 receives in-edges with outcomes [F, T, T, F]; 2 and 3 follow 1 first.
        let g = build(5, &[(1, 0), (2, 1), (2, 0), (3, 1), (3, 0), (4, 0)]);
        let flags = detect_closure_stream(&g);
        let in_flags: Vec<bool> = g.in_edges(0).iter().map(|&(_, s)| flags.is_closed(s)).collect();
        assert_eq!(in_flags, vec![false, true, true, false]);
        let traj = closure_trajectory(&g, &flags, 0);
        assert_eq!(traj, vec![0.0, 0.5, 2.0 / 3.0, 0.5]);
        assert_eq!(final_ratio(&g, &flags, 0), *traj.last().unwrap());
    }

    #[test]
    fn trajectory_all_open() {
        let g = build(4, &[(1, 0), (2, 0), (3, 0)]);
        let flags = detect_closure_stream(&g);
        assert_eq!(closure_trajectory(&g, &flags, 0), vec![0.0; 3]);
        assert!(closure_trajectory(&g, &flags, 1).is_empty());
    }

    #[test]
    fn three_linked_follower() {
        // C=0, A=1, B1..B3=2..4
        let g = build(5, &[(2, 0), (3, 0), (4, 0), (1, 2), (1, 3), (1, 4), (1, 0)]);
        let flags = detect_closure_stream(&g);
        let parts = k_linked_partition(&g, &flags, 0, KMode::EndOfData, false);
        let three = parts.iter().find(|s| s.k == 3).unwrap();
        assert_eq!(three.members, vec![1]);
        assert_eq!(three.f_k(), Some(1.0));
        let zero = parts.iter().find(|s| s.k == 0).unwrap();
        assert_eq!(zero.members, vec![2, 3, 4]);
        assert_eq!(zero.f_k(), Some(0.0));
    }

    #[test]
    fn zero_linked_follower() {
        let g = build(2, &[(1, 0)]);
        let flags = detect_closure_stream(&g);
        let parts = k_linked_partition(&g, &flags, 0, KMode::EndOfData, false);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].k, 0);
        assert_eq!(parts[0].members, vec![1]);
    }

    #[test]
    fn at_arrival_counts_only_earlier_followers() {
        // A=1 follows B=2 which follows C=0 only after A does.
        let g = build(3, &[(1, 2), (1, 0), (2, 0)]);
        let flags = detect_closure_stream(&g);
        let end = k_linked_partition(&g, &flags, 0, KMode::EndOfData, false);
        let arr = k_linked_partition(&g, &flags, 0, KMode::AtArrival, false);
        assert!(end.iter().any(|s| s.k == 1 && s.members == vec![1]));
        assert!(arr.iter().all(|s| s.k == 0));
    }

    #[test]
    fn indegree_sums() {
        let g = build(3, &[(1, 0)]);
        assert_eq!(follower_indegree_sums(&g, 2, false).unwrap(), (0, None));
        assert!(matches!(
            follower_indegree_sums(&g, 0, true),
            Err(Error::NoCommunities)
        ));

        // followers x=1 (in-degree 3), y=2 (in-degree 5) of c=0
        let mut edges = vec![(1, 0), (2, 0)];
        edges.extend([(3, 1), (4, 1), (5, 1)]);
        edges.extend([(3, 2), (4, 2), (5, 2), (6, 2), (7, 2)]);
        let mut g = build(8, &edges);
        assert_eq!(follower_indegree_sum(&g, 0), 8);
        g.set_communities(vec![0, 0, 1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(follower_indegree_sums(&g, 0, true).unwrap(), (8, Some(3)));
        assert_eq!(follower_indegree_sums(&g, 7, true).unwrap(), (0, Some(0)));
    }

    #[test]
    fn top_nodes_order() {
        let g = build(4, &[(1, 0), (2, 0), (3, 1), (0, 2)]);
        assert_eq!(top_by_in_degree(&g, 3), vec![0, 1, 2]);
    }
}
