//! Temporal directed graph with arrival-ordered adjacency.
//!
//! Every edge carries a dense arrival index (`seq`). Per-node adjacency
//! lists are kept in ascending `seq` order, so the in-list of a node is the
//! chronological list of its followers and the out-list is the
//! chronological list of the nodes it follows.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// How much of an edge's relative order is known.
///
/// Edges built from a full arrival stream are always `Full`. Edges ingested
/// from follower lists may only appear in one of the two lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderInfo {
    Full,
    /// Listed in the target's in-list only.
    InListOnly,
    /// Listed in the source's out-list only.
    OutListOnly,
}

impl OrderInfo {
    pub fn in_known(self) -> bool {
        matches!(self, OrderInfo::Full | OrderInfo::InListOnly)
    }

    pub fn out_known(self) -> bool {
        matches!(self, OrderInfo::Full | OrderInfo::OutListOnly)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeRecord {
    pub src: NodeId,
    pub dst: NodeId,
    pub seq: usize,
    pub order: OrderInfo,
}

#[derive(Clone, Debug, Default)]
pub struct TemporalDigraph {
    node_count: usize,
    edges: Vec<EdgeRecord>,
    out_adj: Vec<Vec<(NodeId, usize)>>,
    in_adj: Vec<Vec<(NodeId, usize)>>,
    index: HashMap<(NodeId, NodeId), usize>,
    communities: Option<Vec<u32>>,
    fitness: Option<Vec<f64>>,
    synthetic_seq: bool,
}

impl TemporalDigraph {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            out_adj: vec![Vec::new(); node_count],
            in_adj: vec![Vec::new(); node_count],
            ..Default::default()
        }
    }

    pub fn with_capacity(node_count: usize, edge_capacity: usize) -> Self {
        let mut g = Self::new(node_count);
        g.edges.reserve(edge_capacity);
        g.index.reserve(edge_capacity);
        g
    }

    pub fn add_node(&mut self) -> NodeId {
        let id = self.node_count as NodeId;
        self.node_count += 1;
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        if let Some(c) = self.communities.as_mut() {
            c.push(0);
        }
        if let Some(f) = self.fitness.as_mut() {
            f.push(0.0);
        }
        id
    }

    /// Appends `src -> dst` as the next arriving edge and returns its `seq`.
    pub fn append_edge(&mut self, src: NodeId, dst: NodeId) -> Result<usize> {
        self.append_edge_with_order(src, dst, OrderInfo::Full)
    }

    pub(crate) fn append_edge_with_order(
        &mut self,
        src: NodeId,
        dst: NodeId,
        order: OrderInfo,
    ) -> Result<usize> {
        self.check_node(src)?;
        self.check_node(dst)?;
        if src == dst {
            return Err(Error::SelfLoop(src));
        }
        if self.index.contains_key(&(src, dst)) {
            return Err(Error::DuplicateEdge(src, dst));
        }
        let seq = self.edges.len();
        self.edges.push(EdgeRecord {
            src,
            dst,
            seq,
            order,
        });
        self.out_adj[src as usize].push((dst, seq));
        self.in_adj[dst as usize].push((src, seq));
        self.index.insert((src, dst), seq);
        Ok(seq)
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.node_count {
            Ok(())
        } else {
            Err(Error::UnknownNode(v, self.node_count))
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, seq: usize) -> &EdgeRecord {
        &self.edges[seq]
    }

    pub fn seq_of(&self, src: NodeId, dst: NodeId) -> Option<usize> {
        self.index.get(&(src, dst)).copied()
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.index.contains_key(&(src, dst))
    }

    /// `(target, seq)` pairs of `v`'s out-edges in arrival order.
    pub fn out_edges(&self, v: NodeId) -> &[(NodeId, usize)] {
        &self.out_adj[v as usize]
    }

    /// `(source, seq)` pairs of `v`'s in-edges in arrival order.
    pub fn in_edges(&self, v: NodeId) -> &[(NodeId, usize)] {
        &self.in_adj[v as usize]
    }

    /// Followers of `c` in the order they started following.
    pub fn in_list(&self, c: NodeId) -> Vec<NodeId> {
        self.in_adj[c as usize].iter().map(|&(s, _)| s).collect()
    }

    /// Nodes followed by `a` in the order it followed them.
    pub fn out_list(&self, a: NodeId) -> Vec<NodeId> {
        self.out_adj[a as usize].iter().map(|&(d, _)| d).collect()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v as usize].len()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v as usize].len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        self.in_adj.iter().map(Vec::len).collect()
    }

    pub fn communities(&self) -> Option<&[u32]> {
        self.communities.as_deref()
    }

    pub fn community(&self, v: NodeId) -> Option<u32> {
        self.communities.as_ref().map(|c| c[v as usize])
    }

    pub fn set_communities(&mut self, labels: Vec<u32>) -> Result<()> {
        if labels.len() != self.node_count {
            return Err(Error::InvalidParams(format!(
                "{} community labels for {} nodes",
                labels.len(),
                self.node_count
            )));
        }
        self.communities = Some(labels);
        Ok(())
    }

    pub fn fitness(&self) -> Option<&[f64]> {
        self.fitness.as_deref()
    }

    pub fn set_fitness(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.node_count {
            return Err(Error::InvalidParams(format!(
                "{} fitness values for {} nodes",
                values.len(),
                self.node_count
            )));
        }
        self.fitness = Some(values);
        Ok(())
    }

    /// True when `seq` values are a synthesized linear extension of
    /// per-node list orders rather than a recorded global arrival order.
    pub fn has_synthetic_seq(&self) -> bool {
        self.synthetic_seq
    }

    pub(crate) fn mark_synthetic_seq(&mut self) {
        self.synthetic_seq = true;
    }

    /// Subgraph induced on `{c}` plus the followers of `c`.
    ///
    /// The returned mapping sends new ids to original ids; `c` becomes node 0
    /// and followers keep their in-list order. Surviving edges keep their
    /// relative arrival order and are re-indexed contiguously.
    pub fn induced_follower_subgraph(&self, c: NodeId) -> Result<(TemporalDigraph, Vec<NodeId>)> {
        self.check_node(c)?;
        let mut mapping = vec![c];
        mapping.extend(self.in_adj[c as usize].iter().map(|&(s, _)| s));
        let remap: HashMap<NodeId, NodeId> = mapping
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new as NodeId))
            .collect();

        let mut sub = TemporalDigraph::new(mapping.len());
        for e in &self.edges {
            if let (Some(&s), Some(&d)) = (remap.get(&e.src), remap.get(&e.dst)) {
                sub.append_edge_with_order(s, d, e.order)?;
            }
        }
        if let Some(labels) = &self.communities {
            sub.communities = Some(mapping.iter().map(|&v| labels[v as usize]).collect());
        }
        if let Some(fit) = &self.fitness {
            sub.fitness = Some(mapping.iter().map(|&v| fit[v as usize]).collect());
        }
        sub.synthetic_seq = self.synthetic_seq;
        Ok((sub, mapping))
    }

    /// Content hash over nodes, edges and node attributes.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.node_count.hash(&mut h);
        self.edges.hash(&mut h);
        self.communities.hash(&mut h);
        if let Some(f) = &self.fitness {
            for x in f {
                x.to_bits().hash(&mut h);
            }
        }
        self.synthetic_seq.hash(&mut h);
        h.finish()
    }
}
