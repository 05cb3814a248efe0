//! File formats.
//!
//! **Follower lists** (UTF-8, one record per line, `#` starts a comment):
//!
//! ```text
//! in  <handle>: <follower> <follower> ...   # oldest follower first
//! out <handle>: <followee> <followee> ...   # oldest followee first
//! ```
//!
//! **Temporal edge CSV** with header `src,dst,seq[,community][,fitness]`.
//! Edge rows carry all three leading columns. Rows with empty `dst` and
//! `seq` are node rows: they declare node `src` and its attributes, which
//! also lets isolated nodes survive a round trip. Attribute values on an
//! edge row describe its source node.

use std::collections::{BinaryHeap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{NodeId, OrderInfo, TemporalDigraph};

/// Bijection between case-normalized handles and dense node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HandleMap {
    handles: Vec<String>,
    ids: HashMap<String, NodeId>,
}

impl HandleMap {
    /// Handles `"0"`, `"1"`, ... for a graph without external names.
    pub fn numeric(n: usize) -> Self {
        let mut m = Self::default();
        for v in 0..n {
            m.intern(&v.to_string());
        }
        m
    }

    pub fn normalize(handle: &str) -> String {
        handle.trim().to_lowercase()
    }

    pub fn intern(&mut self, handle: &str) -> NodeId {
        let key = Self::normalize(handle);
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.handles.len() as NodeId;
        self.handles.push(key.clone());
        self.ids.insert(key, id);
        id
    }

    pub fn id(&self, handle: &str) -> Option<NodeId> {
        self.ids.get(&Self::normalize(handle)).copied()
    }

    pub fn handle(&self, id: NodeId) -> &str {
        &self.handles[id as usize]
    }

    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["id", "handle"])?;
        for (id, h) in self.handles.iter().enumerate() {
            w.write_record([id.to_string(), h.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListFileRecord {
    pub subject: String,
    pub direction: Direction,
    pub neighbors: Vec<String>,
    pub line: u64,
}

fn parse_list_records(text: &str, path: &Path) -> Result<Vec<ListFileRecord>> {
    let mut records = Vec::new();
    let mut seen: HashMap<(String, Direction), u64> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (head, tail) = body
            .split_once(':')
            .ok_or_else(|| Error::parse(path, line, "expected '<in|out> <handle>: ...'"))?;
        let mut head_tokens = head.split_whitespace();
        let (Some(dir), Some(subject), None) =
            (head_tokens.next(), head_tokens.next(), head_tokens.next())
        else {
            return Err(Error::parse(path, line, "expected '<in|out> <handle>:'"));
        };
        let direction = match dir.to_ascii_lowercase().as_str() {
            "in" => Direction::In,
            "out" => Direction::Out,
            other => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("unknown direction '{other}', expected 'in' or 'out'"),
                ))
            }
        };
        let subject = HandleMap::normalize(subject);
        if let Some(prev) = seen.insert((subject.clone(), direction), line) {
            return Err(Error::parse(
                path,
                line,
                format!("second {dir} list for '{subject}' (first on line {prev})"),
            ));
        }
        let mut neighbors: Vec<String> = Vec::new();
        for tok in tail.split_whitespace() {
            let h = HandleMap::normalize(tok);
            if h == subject {
                return Err(Error::parse(path, line, format!("'{h}' lists itself")));
            }
            if neighbors.contains(&h) {
                return Err(Error::parse(path, line, format!("duplicate neighbor '{h}'")));
            }
            neighbors.push(h);
        }
        records.push(ListFileRecord {
            subject,
            direction,
            neighbors,
            line,
        });
    }
    Ok(records)
}

/// Builds a graph from follower-list text.
///
/// List orders only fix relative order within one node's in-list or
/// out-list. Edges are inserted along a linear extension of those chains
/// (ties broken by first mention in the file), so `seq` is synthetic. Edges
/// that appear in just one of the two lists are kept with a partial
/// [`OrderInfo`].
pub fn parse_list_str(text: &str, path: &Path) -> Result<(TemporalDigraph, HandleMap)> {
    let records = parse_list_records(text, path)?;
    let mut handles = HandleMap::default();

    struct Pending {
        src: NodeId,
        dst: NodeId,
        in_known: bool,
        out_known: bool,
    }
    let mut pending: Vec<Pending> = Vec::new();
    let mut by_pair: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let mut chains: Vec<Vec<usize>> = Vec::new();

    for rec in &records {
        let subject = handles.intern(&rec.subject);
        let mut chain = Vec::with_capacity(rec.neighbors.len());
        for h in &rec.neighbors {
            let other = handles.intern(h);
            let (src, dst) = match rec.direction {
                Direction::In => (other, subject),
                Direction::Out => (subject, other),
            };
            let idx = *by_pair.entry((src, dst)).or_insert_with(|| {
                pending.push(Pending {
                    src,
                    dst,
                    in_known: false,
                    out_known: false,
                });
                pending.len() - 1
            });
            match rec.direction {
                Direction::In => pending[idx].in_known = true,
                Direction::Out => pending[idx].out_known = true,
            }
            chain.push(idx);
        }
        chains.push(chain);
    }

    // Kahn's algorithm over the chain constraints, smallest mention first.
    let m = pending.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut indeg = vec![0usize; m];
    for chain in &chains {
        for w in chain.windows(2) {
            succ[w[0]].push(w[1]);
            indeg[w[1]] += 1;
        }
    }
    let mut ready: BinaryHeap<std::cmp::Reverse<usize>> = (0..m)
        .filter(|&i| indeg[i] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(m);
    while let Some(std::cmp::Reverse(i)) = ready.pop() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(std::cmp::Reverse(j));
            }
        }
    }
    if order.len() != m {
        return Err(Error::parse(
            path,
            0,
            "in-list and out-list orders contradict each other (cyclic ordering)",
        ));
    }

    let mut g = TemporalDigraph::with_capacity(handles.len(), m);
    for i in order {
        let p = &pending[i];
        let info = match (p.in_known, p.out_known) {
            (true, true) => OrderInfo::Full,
            (true, false) => OrderInfo::InListOnly,
            (false, true) => OrderInfo::OutListOnly,
            (false, false) => unreachable!(),
        };
        g.append_edge_with_order(p.src, p.dst, info)?;
    }
    g.mark_synthetic_seq();
    Ok((g, handles))
}

pub fn parse_list_file(path: &Path) -> Result<(TemporalDigraph, HandleMap)> {
    let text = fs::read_to_string(path)?;
    parse_list_str(&text, path)
}

/// Writes `in` and `out` records for every node with edges, in id order.
pub fn emit_list_file(g: &TemporalDigraph, handles: &HandleMap, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    for v in 0..g.node_count() as NodeId {
        for (dir, list) in [("in", g.in_list(v)), ("out", g.out_list(v))] {
            if list.is_empty() {
                continue;
            }
            write!(w, "{dir} {}:", handles.handle(v))?;
            for u in list {
                write!(w, " {}", handles.handle(u))?;
            }
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the temporal edge CSV, preceded by `#`-prefixed comment lines.
pub fn emit_edge_csv(g: &TemporalDigraph, path: &Path, comments: &[String]) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    for c in comments {
        writeln!(file, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    let labels = g.communities();
    let fitness = g.fitness();
    let mut header = vec!["src", "dst", "seq"];
    if labels.is_some() {
        header.push("community");
    }
    if fitness.is_some() {
        header.push("fitness");
    }
    w.write_record(&header)?;

    let max_endpoint = g
        .edges()
        .iter()
        .map(|e| e.src.max(e.dst) as usize + 1)
        .max()
        .unwrap_or(0);
    let node_rows = labels.is_some() || fitness.is_some() || g.node_count() > max_endpoint;
    if node_rows {
        for v in 0..g.node_count() {
            let mut row = vec![v.to_string(), String::new(), String::new()];
            if let Some(l) = labels {
                row.push(l[v].to_string());
            }
            if let Some(f) = fitness {
                row.push(f[v].to_string());
            }
            w.write_record(&row)?;
        }
    }
    for e in g.edges() {
        let mut row = vec![e.src.to_string(), e.dst.to_string(), e.seq.to_string()];
        if labels.is_some() {
            row.push(String::new());
        }
        if fitness.is_some() {
            row.push(String::new());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_edge_csv(path: &Path) -> Result<TemporalDigraph> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[..3] != ["src", "dst", "seq"] {
        return Err(Error::parse(path, 1, "header must start with src,dst,seq"));
    }
    let mut community_col = None;
    let mut fitness_col = None;
    for (i, &c) in cols.iter().enumerate().skip(3) {
        match c {
            "community" if community_col.is_none() => community_col = Some(i),
            "fitness" if fitness_col.is_none() => fitness_col = Some(i),
            other => return Err(Error::parse(path, 1, format!("unexpected column '{other}'"))),
        }
    }

    let mut edges: Vec<(usize, NodeId, NodeId, u64)> = Vec::new();
    let mut labels: HashMap<NodeId, u32> = HashMap::new();
    let mut fitness: HashMap<NodeId, f64> = HashMap::new();
    let mut max_node: Option<NodeId> = None;

    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parse_id = |s: &str, what: &str| -> Result<NodeId> {
            s.parse::<NodeId>()
                .map_err(|_| Error::parse(path, line, format!("bad {what} '{s}'")))
        };
        let src = parse_id(field(0), "src")?;
        max_node = max_node.max(Some(src));

        if let Some(ci) = community_col {
            let s = field(ci);
            if !s.is_empty() {
                let l: u32 = s
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad community '{s}'")))?;
                if labels.insert(src, l).is_some_and(|prev| prev != l) {
                    return Err(Error::parse(path, line, format!("conflicting community for node {src}")));
                }
            }
        }
        if let Some(fi) = fitness_col {
            let s = field(fi);
            if !s.is_empty() {
                let f: f64 = s
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad fitness '{s}'")))?;
                if fitness.insert(src, f).is_some_and(|prev| prev.to_bits() != f.to_bits()) {
                    return Err(Error::parse(path, line, format!("conflicting fitness for node {src}")));
                }
            }
        }

        match (field(1), field(2)) {
            ("", "") => {}
            ("", _) | (_, "") => {
                return Err(Error::parse(path, line, "dst and seq must both be set or both empty"))
            }
            (d, s) => {
                let dst = parse_id(d, "dst")?;
                let seq: usize = s
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad seq '{s}'")))?;
                if src == dst {
                    return Err(Error::parse(path, line, format!("self-loop on node {src}")));
                }
                max_node = max_node.max(Some(dst));
                edges.push((seq, src, dst, line));
            }
        }
    }

    edges.sort_by_key(|&(seq, ..)| seq);
    for (i, w) in edges.iter().enumerate() {
        if w.0 != i {
            let msg = if i > 0 && edges[i - 1].0 == w.0 {
                format!("duplicate seq {}", w.0)
            } else {
                format!("non-contiguous seq: expected {i}, found {}", w.0)
            };
            return Err(Error::parse(path, w.3, msg));
        }
    }

    let n = max_node.map_or(0, |m| m as usize + 1);
    let mut g = TemporalDigraph::with_capacity(n, edges.len());
    for &(_, src, dst, line) in &edges {
        g.append_edge(src, dst).map_err(|e| Error::parse(path, line, e.to_string()))?;
    }
    if community_col.is_some() {
        let labels = (0..n as NodeId)
            .map(|v| {
                labels
                    .get(&v)
                    .copied()
                    .ok_or_else(|| Error::parse(path, 0, format!("node {v} has no community label")))
            })
            .collect::<Result<Vec<_>>>()?;
        g.set_communities(labels)?;
    }
    if fitness_col.is_some() {
        let values = (0..n as NodeId)
            .map(|v| {
                fitness
                    .get(&v)
                    .copied()
                    .ok_or_else(|| Error::parse(path, 0, format!("node {v} has no fitness value")))
            })
            .collect::<Result<Vec<_>>>()?;
        g.set_fitness(values)?;
    }
    Ok(g)
}

/// Nodes whose in-degree lies in `[min_followers, max_followers]`.
pub fn micro_celebrities(g: &TemporalDigraph, min_followers: usize, max_followers: usize) -> Vec<NodeId> {
    (0..g.node_count() as NodeId)
        .filter(|&v| (min_followers..=max_followers).contains(&g.in_degree(v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::exhibits_closure_lists;

    fn parse(text: &str) -> Result<(TemporalDigraph, HandleMap)> {
        parse_list_str(text, Path::new("test.lists"))
    }

    #[test]
    fn list_file_closure_example() {
        let (g, h) = parse("in C: B A\nout A: B C\n").unwrap();
        let (a, c) = (h.id("a").unwrap(), h.id("C").unwrap());
        assert!(exhibits_closure_lists(&g, a, c).unwrap());
        assert!(g.has_synthetic_seq());
    }

    #[test]
    fn empty_list_file() {
        let (g, h) = parse("# nothing here\n\n").unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
        assert!(h.is_empty());
    }

    #[test]
    fn list_file_errors_carry_line_numbers() {
        let err = parse("in C: A\nsideways C: B\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse("in C: A B a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse("in C A B\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse("in C: A\n# c\nin c: B\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn cyclic_orders_rejected() {
        // x->c < a->c, a->c < a->d, a->d < x->d, x->d < x->c
        let err = parse("in c: x a\nout a: c d\nin d: a x\nout x: d c\n").unwrap_err();
        assert!(err.to_string().contains("contradict"), "{err}");
    }

    #[test]
    fn partial_edges_are_marked() {
        let (g, h) = parse("in c: b a\n").unwrap();
        let (a, c) = (h.id("a").unwrap(), h.id("c").unwrap());
        let seq = g.seq_of(a, c).unwrap();
        assert_eq!(g.edge(seq).order, OrderInfo::InListOnly);
        assert!(matches!(
            exhibits_closure_lists(&g, a, c),
            Err(Error::Undeterminable(_, _))
        ));
    }

    #[test]
    fn handles_are_case_normalized() {
        let (g, h) = parse("in Celeb: Alice bob\nout ALICE: celeb\n").unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(g.edge_count(), 2);
        let seq = g.seq_of(h.id("alice").unwrap(), h.id("CELEB").unwrap()).unwrap();
        assert_eq!(g.edge(seq).order, OrderInfo::Full);
    }

    #[test]
    fn micro_celebrity_filter() {
        let mut g = TemporalDigraph::new(5);
        for s in 1..5 {
            g.append_edge(s, 0).unwrap();
        }
        g.append_edge(2, 1).unwrap();
        assert_eq!(micro_celebrities(&g, 2, 4), vec![0]);
        assert_eq!(micro_celebrities(&g, 1, 1), vec![1]);
    }
}
