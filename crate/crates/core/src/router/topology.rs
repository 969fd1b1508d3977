use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RouterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    AllToAll,
    Linear,
    HeavyHex,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 3] = [TopologyKind::AllToAll, TopologyKind::Linear, TopologyKind::HeavyHex];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::AllToAll => "all_to_all",
            TopologyKind::Linear => "linear",
            TopologyKind::HeavyHex => "heavy_hex",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = RouterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TopologyKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| RouterError::InvalidTopology(format!("unknown topology {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    pub kind: TopologyKind,
    pub n_phys: usize,
    /// Undirected edges stored as `(lo, hi)`.
    pub edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
}

pub const UNREACHABLE: u32 = u32::MAX;

impl CouplingGraph {
    pub fn from_edges(kind: TopologyKind, n_phys: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let mut adj = vec![Vec::new(); n_phys];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let dist = (0..n_phys).map(|s| bfs(&adj, s)).collect();
        CouplingGraph { kind, n_phys, edges, adj, dist }
    }

    pub fn neighbours(&self, p: usize) -> &[usize] {
        &self.adj[p]
    }

    pub fn degree(&self, p: usize) -> usize {
        self.adj[p].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn distance(&self, a: usize, b: usize) -> u32 {
        self.dist[a][b]
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn is_connected(&self) -> bool {
        self.n_phys == 0 || self.dist[0].iter().all(|&d| d != UNREACHABLE)
    }

    /// Shortest path from `a` to `b`, preferring the smallest index at each hop.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = *self.adj[cur]
                .iter()
                .find(|&&n| self.dist[n][b] + 1 == self.dist[cur][b])
                .expect("graph is connected");
            path.push(cur);
        }
        path
    }
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<u32> {
    let mut d = vec![UNREACHABLE; adj.len()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if d[v] == UNREACHABLE {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

/// Number of qubits of a heavy-hex tiling with `rows` rows of `4 * cols + 1`
/// qubits joined by bridge qubits.
fn heavy_hex_count(rows: usize, cols: usize) -> usize {
    let bridges: usize = (0..rows - 1).map(|k| if k % 2 == 0 { cols + 1 } else { cols }).sum();
    rows * (4 * cols + 1) + bridges
}

/// Smallest `(rows, cols)` tiling holding at least `n` qubits; ties go to
/// fewer rows.
pub fn heavy_hex_shape(n: usize) -> (usize, usize) {
    let limit = n.max(2);
    (2..=limit)
        .flat_map(|r| (1..=limit).map(move |c| (r, c)))
        .filter(|&(r, c)| heavy_hex_count(r, c) >= n)
        .min_by_key(|&(r, c)| (heavy_hex_count(r, c), r))
        .expect("some tiling fits")
}

fn heavy_hex(rows: usize, cols: usize) -> CouplingGraph {
    let width = 4 * cols + 1;
    let row_id = |r: usize, c: usize| r * width + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..width - 1 {
            edges.push((row_id(r, c), row_id(r, c + 1)));
        }
    }
    let mut next = rows * width;
    for r in 0..rows - 1 {
        let offset = if r % 2 == 0 { 0 } else { 2 };
        for c in (offset..width).step_by(4) {
            edges.push((row_id(r, c), next));
            edges.push((next, row_id(r + 1, c)));
            next += 1;
        }
    }
    CouplingGraph::from_edges(TopologyKind::HeavyHex, next, edges)
}

/// Canonical coupling graph. Heavy-hex is sized up to the smallest tiling
/// with at least `n_phys` qubits.
pub fn build_topology(kind: TopologyKind, n_phys: usize) -> Result<CouplingGraph, RouterError> {
    if n_phys < 2 {
        return Err(RouterError::InvalidSize(format!("{n_phys} physical qubits")));
    }
    Ok(match kind {
        TopologyKind::Linear => CouplingGraph::from_edges(kind, n_phys, (0..n_phys - 1).map(|i| (i, i + 1))),
        TopologyKind::AllToAll => CouplingGraph::from_edges(
            kind,
            n_phys,
            (0..n_phys).flat_map(|i| (i + 1..n_phys).map(move |j| (i, j))),
        ),
        TopologyKind::HeavyHex => {
            if n_phys < 12 {
                return Err(RouterError::InvalidSize(format!(
                    "heavy-hex needs at least one 12-qubit cell, got {n_phys}"
                )));
            }
            let (r, c) = heavy_hex_shape(n_phys);
            heavy_hex(r, c)
        }
    })
}
