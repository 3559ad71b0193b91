//! Line and grid topologies.
//!
//! Nodes are dense indices. A line of `M` links has nodes `0..=M`; an
//! `M x M` grid numbers its nodes row-major. Adjacency lists are sorted, which
//! makes every path enumeration below deterministic: paths come out in
//! lexicographic order of their node-index sequences.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// An undirected link, stored with the smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId {
    a: NodeId,
    b: NodeId,
}

impl LinkId {
    pub fn new(x: NodeId, y: NodeId) -> Self {
        if x <= y {
            Self { a: x, b: y }
        } else {
            Self { a: y, b: x }
        }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.a, self.b)
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.a == node || self.b == node
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Line,
    Grid,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Line => f.write_str("line"),
            Shape::Grid => f.write_str("grid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    /// `links` links in a row.
    Line { links: usize },
    /// `side x side` mesh, no wrap-around.
    Grid { side: usize },
}

/// A simple path, stored as its node sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    nodes: Vec<NodeId>,
}

impl Path {
    pub fn from_nodes(nodes: Vec<NodeId>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dest(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    /// Number of links.
    pub fn len(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.nodes.windows(2).map(|w| LinkId::new(w[0], w[1]))
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// True when the two paths share no node other than their common endpoints.
    pub fn interior_disjoint(&self, other: &Path) -> bool {
        let ends = [self.source(), self.dest()];
        let mut mine: Vec<NodeId> = self.nodes.iter().copied().filter(|n| !ends.contains(n)).collect();
        mine.sort_unstable();
        other.nodes.iter().filter(|n| !ends.contains(n)).all(|n| mine.binary_search(n).is_err())
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    kind: TopologyKind,
    links: Vec<LinkId>,
    adjacency: Vec<Vec<NodeId>>,
    link_index: HashMap<LinkId, usize>,
}

impl Topology {
    /// A line with `links` links; end `A` is node 0 and end `B` is node `links`.
    pub fn line(links: usize) -> Result<Self> {
        if links == 0 {
            return Err(Error::InvalidSize { size: links, reason: "a line needs at least one link" });
        }
        let edges = (0..links).map(|i| (i, i + 1)).collect::<Vec<_>>();
        Ok(Self::from_edges(TopologyKind::Line { links }, links + 1, &edges))
    }

    /// An unwrapped `side x side` mesh with row-major node numbering.
    pub fn grid(side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidSize { size: side, reason: "a grid needs side >= 2" });
        }
        let mut edges = Vec::with_capacity(2 * side * (side - 1));
        for row in 0..side {
            for col in 0..side {
                let n = row * side + col;
                if col + 1 < side {
                    edges.push((n, n + 1));
                }
                if row + 1 < side {
                    edges.push((n, n + side));
                }
            }
        }
        Ok(Self::from_edges(TopologyKind::Grid { side }, side * side, &edges))
    }

    pub fn build(shape: Shape, size: usize) -> Result<Self> {
        match shape {
            Shape::Line => Self::line(size),
            Shape::Grid => Self::grid(size),
        }
    }

    fn from_edges(kind: TopologyKind, nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); nodes];
        let mut links: Vec<LinkId> = edges
            .iter()
            .map(|&(a, b)| {
                adjacency[a].push(NodeId(b));
                adjacency[b].push(NodeId(a));
                LinkId::new(NodeId(a), NodeId(b))
            })
            .collect();
        links.sort_unstable();
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let link_index = links.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        Self { kind, links, adjacency, link_index }
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Links in canonical (sorted) order; a link's position is its dense index.
    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn link_index(&self, link: LinkId) -> Option<usize> {
        self.link_index.get(&link).copied()
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.0]
    }

    pub fn are_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a.0].binary_search(&b).is_ok()
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node.0 < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode { node: node.0, count: self.node_count() })
        }
    }

    /// Grid node at (`row`, `col`); on a line only row 0 exists.
    pub fn node_at(&self, row: usize, col: usize) -> NodeId {
        match self.kind {
            TopologyKind::Grid { side } => NodeId(row * side + col),
            TopologyKind::Line { .. } => NodeId(col),
        }
    }

    pub fn coords(&self, node: NodeId) -> (usize, usize) {
        match self.kind {
            TopologyKind::Grid { side } => (node.0 / side, node.0 % side),
            TopologyKind::Line { .. } => (0, node.0),
        }
    }

    pub fn hop_distance(&self, a: NodeId, b: NodeId) -> Result<usize> {
        self.check_node(a)?;
        self.check_node(b)?;
        let ((ra, ca), (rb, cb)) = (self.coords(a), self.coords(b));
        Ok(ra.abs_diff(rb) + ca.abs_diff(cb))
    }

    /// Up to `limit` shortest paths from `s` to `d`, lexicographic by node sequence.
    pub fn shortest_paths(&self, s: NodeId, d: NodeId, limit: usize) -> Result<Vec<Path>> {
        self.check_node(s)?;
        self.check_node(d)?;
        if s == d {
            return Err(Error::EmptyRequest(s.0));
        }
        Ok(self.restricted_shortest_paths(s, d, limit, |_| true, |_| true))
    }

    /// Shortest paths in the subgraph of allowed nodes and links, in
    /// lexicographic order. Empty when `d` is unreachable.
    pub fn restricted_shortest_paths(
        &self,
        s: NodeId,
        d: NodeId,
        limit: usize,
        node_ok: impl Fn(NodeId) -> bool,
        link_ok: impl Fn(LinkId) -> bool,
    ) -> Vec<Path> {
        let usable = |a: NodeId, b: NodeId| node_ok(b) && link_ok(LinkId::new(a, b));

        // BFS distances to d over the allowed subgraph.
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[d.0] = 0;
        let mut queue = VecDeque::from([d]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v.0] == usize::MAX && usable(u, v) {
                    dist[v.0] = dist[u.0] + 1;
                    queue.push_back(v);
                }
            }
        }
        if dist[s.0] == usize::MAX || limit == 0 {
            return Vec::new();
        }

        let mut out = Vec::new();
        let mut prefix = vec![s];
        self.descend(&dist, &usable, &mut prefix, d, limit, &mut out);
        out
    }

    fn descend(
        &self,
        dist: &[usize],
        usable: &impl Fn(NodeId, NodeId) -> bool,
        prefix: &mut Vec<NodeId>,
        d: NodeId,
        limit: usize,
        out: &mut Vec<Path>,
    ) {
        let u = *prefix.last().expect("prefix starts with the source");
        if u == d {
            out.push(Path::from_nodes(prefix.clone()));
            return;
        }
        for &v in self.neighbors(u) {
            if out.len() >= limit {
                return;
            }
            if dist[v.0] != usize::MAX && dist[v.0] + 1 == dist[u.0] && usable(u, v) {
                prefix.push(v);
                self.descend(dist, usable, prefix, d, limit, out);
                prefix.pop();
            }
        }
    }
}
