//! Path planning for the three benchmarked algorithms.
//!
//! The algorithms differ only in the [`PathPlan`] they hand to the engine:
//!
//! * `MG` (modified greedy): the lexicographically first shortest path.
//! * `NL` (nonoblivious local): up to two interior-disjoint shortest paths;
//!   the engine serves the request on whichever fires first and then sticks
//!   with it.
//! * `QP` (QPASS/QCAST hybrid): one shortest path plus a recovery detour per
//!   link, substituted at trigger time when the primary link is not ready.
//!
//! On a homogeneous grid, hop distance orders paths the same way the original
//! algorithms' metrics do, so every primary path is a shortest path.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::topology::{LinkId, NodeId, Path, Topology};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "MG")]
    Mg,
    #[serde(rename = "NL")]
    Nl,
    #[serde(rename = "QP")]
    Qp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Mg, Algorithm::Nl, Algorithm::Qp];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Mg => "MG",
            Algorithm::Nl => "NL",
            Algorithm::Qp => "QP",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "MG" => Ok(Algorithm::Mg),
            "NL" => Ok(Algorithm::Nl),
            "QP" => Ok(Algorithm::Qp),
            other => Err(format!("unknown algorithm `{other}` (expected MG, NL or QP)")),
        }
    }
}

/// A routing request from `source` to `dest`. Ids are assigned at creation
/// and double as the initial reservation priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Request {
    pub id: usize,
    pub source: NodeId,
    pub dest: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPlan {
    pub algorithm: Algorithm,
    /// Candidate paths in preference order; never empty.
    pub primary: Vec<Path>,
    /// Detour for a primary link, connecting the link's endpoints without it.
    pub recovery: BTreeMap<LinkId, Path>,
}

pub fn plan(algorithm: Algorithm, topo: &Topology, request: &Request) -> Result<PathPlan> {
    match algorithm {
        Algorithm::Mg => plan_mg(topo, request),
        Algorithm::Nl => plan_nl(topo, request),
        Algorithm::Qp => plan_qp(topo, request),
    }
}

pub fn plan_mg(topo: &Topology, request: &Request) -> Result<PathPlan> {
    let primary = topo.shortest_paths(request.source, request.dest, 1)?;
    Ok(PathPlan { algorithm: Algorithm::Mg, primary, recovery: BTreeMap::new() })
}

/// Number of disjoint candidate paths NL reserves.
pub const NL_PATHS: usize = 2;

pub fn plan_nl(topo: &Topology, request: &Request) -> Result<PathPlan> {
    let first = topo.shortest_paths(request.source, request.dest, 1)?.remove(0);
    let mut primary = vec![first];
    if NL_PATHS > 1 {
        // First path in canonical order that avoids the interior of the first one.
        let interior: Vec<NodeId> = primary[0].nodes()[1..primary[0].len()].to_vec();
        let first_links: Vec<LinkId> = primary[0].links().collect();
        let second = topo.restricted_shortest_paths(
            request.source,
            request.dest,
            1,
            |n| !interior.contains(&n),
            |l| !first_links.contains(&l),
        );
        if let Some(p) = second.into_iter().next() {
            if p.len() == primary[0].len() {
                primary.push(p);
            }
        }
    }
    Ok(PathPlan { algorithm: Algorithm::Nl, primary, recovery: BTreeMap::new() })
}

pub fn plan_qp(topo: &Topology, request: &Request) -> Result<PathPlan> {
    let primary = topo.shortest_paths(request.source, request.dest, 1)?;
    let path = &primary[0];
    let mut recovery = BTreeMap::new();
    for link in path.links() {
        if let Some(detour) = detour(topo, path, link) {
            recovery.insert(link, detour);
        }
    }
    Ok(PathPlan { algorithm: Algorithm::Qp, primary, recovery })
}

/// Shortest path between the endpoints of `link` that avoids the link and
/// every other node of `path`, oriented in the direction `path` traverses
/// the link. Splicing it in place of the link keeps `path` simple.
pub fn detour(topo: &Topology, path: &Path, link: LinkId) -> Option<Path> {
    let nodes = path.nodes();
    let pos = path.links().position(|l| l == link)?;
    let (from, to) = (nodes[pos], nodes[pos + 1]);
    topo.restricted_shortest_paths(from, to, 1, |n| n == from || n == to || !nodes.contains(&n), |l| l != link)
        .into_iter()
        .next()
}

/// Replaces `link` in `path` by `detour`; `None` if `path` does not use `link`.
pub fn splice(path: &Path, link: LinkId, detour: &Path) -> Option<Path> {
    let nodes = path.nodes();
    let pos = path.links().position(|l| l == link)?;
    let mut out = nodes[..pos].to_vec();
    out.extend_from_slice(detour.nodes());
    out.extend_from_slice(&nodes[pos + 2..]);
    Some(Path::from_nodes(out))
}
