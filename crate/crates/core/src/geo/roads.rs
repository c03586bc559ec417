use alloc::collections::{BinaryHeap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use serde::{Deserialize, Serialize};

use super::{distance, CoordinateMode, GeoError, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    #[serde(rename = "length_km")]
    pub length: f64,
}

/// Undirected road graph. Edge lengths are road kilometres and may exceed
/// the straight-line distance between their endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadNetwork {
    pub nodes: Vec<Point>,
    pub edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pred: Vec<usize>,
}

impl ShortestPathTree {
    /// Node sequence from the source to `target`, or `None` if unreachable.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if target >= self.dist.len() || !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut cur = target;
        while cur != self.source {
            cur = self.pred[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

impl RoadNetwork {
    pub fn new(nodes: Vec<Point>, edges: Vec<Edge>) -> Self {
        let mut net = RoadNetwork {
            nodes,
            edges,
            adjacency: Vec::new(),
        };
        net.rebuild_adjacency();
        net
    }

    fn rebuild_adjacency(&mut self) {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if e.a < adj.len() && e.b < adj.len() {
                adj[e.a].push((e.b, e.length));
                adj[e.b].push((e.a, e.length));
            }
        }
        for list in &mut adj {
            list.sort_by(|l, r| l.0.cmp(&r.0).then(l.1.total_cmp(&r.1)));
        }
        self.adjacency = adj;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    /// Checks edge geometry and connectivity, then rebuilds the adjacency.
    pub(crate) fn validate(&mut self, mode: CoordinateMode, path: &str) -> Result<(), GeoError> {
        if self.nodes.is_empty() {
            return Err(GeoError::validation(format!("{path}.nodes"), "road network has no nodes"));
        }
        for (i, p) in self.nodes.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeoError::validation(format!("{path}.nodes[{i}]"), "not finite"));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let n = self.nodes.len();
            if e.a >= n || e.b >= n {
                return Err(GeoError::validation(
                    format!("{path}.edges[{i}]"),
                    format!("endpoint out of range (nodes: {n})"),
                ));
            }
            if e.a == e.b {
                return Err(GeoError::validation(format!("{path}.edges[{i}]"), "self-loop"));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(GeoError::validation(
                    format!("{path}.edges[{i}].length_km"),
                    "must be positive",
                ));
            }
            let straight = distance(self.nodes[e.a], self.nodes[e.b], mode);
            if e.length < straight - 1e-9 {
                return Err(GeoError::validation(
                    format!("{path}.edges[{i}].length_km"),
                    format!("{} km is shorter than the straight-line {} km", e.length, straight),
                ));
            }
        }
        self.rebuild_adjacency();
        if !self.is_connected() {
            return Err(GeoError::validation(
                format!("{path}.edges"),
                "road network is disconnected",
            ));
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.nodes.len()
    }

    /// Dijkstra from `source`. Equal-length alternatives resolve to the
    /// smaller predecessor index, so the tree is fully deterministic.
    pub fn shortest_path_tree(&self, source: usize) -> Result<ShortestPathTree, GeoError> {
        let n = self.nodes.len();
        if source >= n {
            return Err(GeoError::UnknownNode(source));
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        pred[source] = source;
        heap.push(HeapEntry { dist: 0.0, node: source });
        while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, w) in &self.adjacency[u] {
                if done[v] {
                    continue;
                }
                let nd = d + w;
                if nd < dist[v] || (nd == dist[v] && u < pred[v]) {
                    dist[v] = nd;
                    pred[v] = u;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
        Ok(ShortestPathTree { source, dist, pred })
    }

    /// Minimum-length node path from `a` to `b` and its length in km.
    pub fn shortest_path(&self, a: usize, b: usize) -> Result<(Vec<usize>, f64), GeoError> {
        if b >= self.nodes.len() {
            return Err(GeoError::UnknownNode(b));
        }
        let tree = self.shortest_path_tree(a)?;
        let path = tree.path_to(b).ok_or(GeoError::NoRoute { from: a, to: b })?;
        Ok((path, tree.dist[b]))
    }

    /// Length of the shortest direct edge between `u` and `v`.
    pub fn edge_length(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency
            .get(u)?
            .iter()
            .filter(|(n, _)| *n == v)
            .map(|(_, w)| *w)
            .reduce(f64::min)
    }

    /// Index of the node closest to `p` (lowest index on ties).
    pub fn nearest_node(&self, p: Point, mode: CoordinateMode) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.nodes.iter().enumerate() {
            let d = distance(p, *q, mode);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(a: usize, b: usize, length: f64) -> Edge {
        Edge { a, b, length }
    }

    #[test]
    fn same_node_is_zero_length() {
        let net = RoadNetwork::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], vec![edge(0, 1, 1.0)]);
        assert_eq!(net.shortest_path(1, 1).unwrap(), (vec![1], 0.0));
    }

    #[test]
    fn single_edge() {
        let net = RoadNetwork::new(vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)], vec![edge(0, 1, 2.0)]);
        assert_eq!(net.shortest_path(0, 1).unwrap(), (vec![0, 1], 2.0));
    }

    #[test]
    fn five_nodes_prefers_three_km_route() {
        // 0-1-2-4 totals 3 km; 0-3-4 totals 4 km.
        let nodes = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(2.5, 0.0),
        ];
        let edges = vec![edge(0, 1, 1.0), edge(1, 2, 1.0), edge(2, 4, 1.0), edge(0, 3, 2.0), edge(3, 4, 2.0)];
        let net = RoadNetwork::new(nodes, edges);
        let (path, len) = net.shortest_path(0, 4).unwrap();
        assert_eq!(path, vec![0, 1, 2, 4]);
        assert_eq!(len, 3.0);
    }

    #[test]
    fn ties_resolve_to_smaller_predecessor() {
        // Square: 0-1-3 and 0-2-3 are both 2 km.
        let nodes = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0)];
        let edges = vec![edge(0, 2, 1.0), edge(2, 3, 1.0), edge(0, 1, 1.0), edge(1, 3, 1.0)];
        let net = RoadNetwork::new(nodes, edges);
        assert_eq!(net.shortest_path(0, 3).unwrap().0, vec![0, 1, 3]);
    }

    #[test]
    fn unreachable_pair_reports_no_route() {
        let nodes = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(5.0, 0.0)];
        let net = RoadNetwork::new(nodes, vec![edge(0, 1, 1.0)]);
        assert_eq!(net.shortest_path(0, 2), Err(GeoError::NoRoute { from: 0, to: 2 }));
    }

    #[test]
    fn validation_rejects_short_edges_and_disconnection() {
        let mut net = RoadNetwork::new(vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)], vec![edge(0, 1, 4.0)]);
        assert!(net.validate(CoordinateMode::Planar, "roads").is_err());
        let mut net = RoadNetwork::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            vec![edge(0, 1, 1.0)],
        );
        let err = net.validate(CoordinateMode::Planar, "roads").unwrap_err();
        assert!(matches!(err, GeoError::Validation { ref path, .. } if path == "roads.edges"));
    }
}
