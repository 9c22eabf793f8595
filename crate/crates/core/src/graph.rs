//! Undirected graphs with stable vertex ids, RHG lattice generation and
//! graph file I/O.
//!
//! RHG vertices are the points of Z³ with exactly one odd coordinate (edge
//! qubits) or exactly two odd coordinates (face qubits); two vertices are
//! adjacent when their coordinates differ by one in a single axis.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{SinglePauli, SparsePauli};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("invalid lattice spec: {0}")]
    SpecInvalid(String),
    #[error("graph parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl GraphError {
    fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        GraphError::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Coord = [i64; 3];

/// Undirected simple graph. Neighbor lists are sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    coords: Option<Vec<Coord>>,
}

/// Shortest-path length, or `Infinite` for disconnected pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops, duplicate edges and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (k, &(a, b)) in edges.iter().enumerate() {
            let loc = || format!("edges[{k}]");
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(GraphError::parse(loc(), format!("vertex {v} >= n = {vertex_count}")));
                }
            }
            if a == b {
                return Err(GraphError::parse(loc(), format!("self-loop on vertex {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (v.min(w[0]), v.max(w[0]));
                return Err(GraphError::parse("edges", format!("duplicate edge [{a},{b}]")));
            }
        }
        Ok(Self {
            adjacency,
            coords: None,
        })
    }

    pub fn with_coords(mut self, coords: Vec<Coord>) -> Result<Self, GraphError> {
        if coords.len() != self.vertex_count() {
            return Err(GraphError::parse(
                "coords",
                format!("expected {} entries, found {}", self.vertex_count(), coords.len()),
            ));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(small, large)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(v, nbrs)| nbrs.iter().filter(move |&&u| u > v).map(move |&u| (v, u)))
    }

    pub fn coords(&self) -> Option<&[Coord]> {
        self.coords.as_deref()
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count(),
            })
        }
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> Result<&[usize], GraphError> {
        self.check(v)?;
        Ok(&self.adjacency[v])
    }

    pub fn neighborhood(&self, v: usize) -> Result<BTreeSet<usize>, GraphError> {
        Ok(self.neighbors(v)?.iter().copied().collect())
    }

    pub fn degree(&self, v: usize) -> Result<usize, GraphError> {
        Ok(self.neighbors(v)?.len())
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|nbrs| nbrs.binary_search(&v).is_ok())
    }

    /// BFS distances from `source`, stopping once `max_depth` is reached.
    /// Unvisited vertices are `None`.
    pub fn bfs_distances(&self, source: usize, max_depth: Option<usize>) -> Result<Vec<Option<usize>>, GraphError> {
        self.check(source)?;
        let mut dist = vec![None; self.vertex_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            if max_depth.is_some_and(|m| du >= m) {
                continue;
            }
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<Distance, GraphError> {
        self.check(v)?;
        let dist = self.bfs_distances(u, None)?;
        Ok(dist[v].map_or(Distance::Infinite, Distance::Finite))
    }

    /// `S_v`: X on `v` and Z on each neighbor.
    pub fn stabilizer_generator(&self, v: usize) -> Result<SparsePauli, GraphError> {
        let nbrs = self.neighbors(v)?;
        let mut terms = Vec::with_capacity(nbrs.len() + 1);
        let mut placed = false;
        for &u in nbrs {
            if !placed && u > v {
                terms.push((v, SinglePauli::X));
                placed = true;
            }
            terms.push((u, SinglePauli::Z));
        }
        if !placed {
            terms.push((v, SinglePauli::X));
        }
        Ok(SparsePauli::from_sorted_unchecked(terms))
    }

    /// Subgraph induced on `vertices`, relabelled `0..vertices.len()` in the
    /// given order. Returns the subgraph and the map new id → old id.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<(Graph, Vec<usize>), GraphError> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (k, &v) in vertices.iter().enumerate() {
            self.check(v)?;
            if index.insert(v, k).is_some() {
                return Err(GraphError::parse("vertices", format!("vertex {v} listed twice")));
            }
        }
        let mut edges = Vec::new();
        for (k, &v) in vertices.iter().enumerate() {
            for u in &self.adjacency[v] {
                if let Some(&j) = index.get(u) {
                    if k < j {
                        edges.push((k, j));
                    }
                }
            }
        }
        let mut sub = Graph::from_edges(vertices.len(), &edges)?;
        if let Some(c) = &self.coords {
            sub.coords = Some(vertices.iter().map(|&v| c[v]).collect());
        }
        Ok((sub, vertices.to_vec()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    #[default]
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(GraphError::SpecInvalid(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Number of RHG unit cells along each axis plus the boundary mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhgSpec {
    pub cells: [usize; 3],
    #[serde(default)]
    pub boundary: Boundary,
}

impl RhgSpec {
    pub fn periodic(l: usize) -> Self {
        Self {
            cells: [l; 3],
            boundary: Boundary::Periodic,
        }
    }

    pub fn open(l: usize) -> Self {
        Self {
            cells: [l; 3],
            boundary: Boundary::Open,
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.cells.contains(&0) {
            return Err(GraphError::SpecInvalid("cell counts must be at least 1".into()));
        }
        if self.boundary == Boundary::Periodic && self.cells.iter().any(|&l| l < 2) {
            return Err(GraphError::SpecInvalid(
                "periodic boundary requires at least 2 cells per axis".into(),
            ));
        }
        Ok(())
    }
}

fn odd_count(c: &Coord) -> usize {
    c.iter().filter(|&&x| x.rem_euclid(2) == 1).count()
}

/// Builds the RHG lattice described by `spec`. Vertex ids follow the
/// lexicographic order of the `(x, y, z)` coordinates.
pub fn build_rhg(spec: &RhgSpec) -> Result<Graph, GraphError> {
    spec.validate()?;
    let periodic = spec.boundary == Boundary::Periodic;
    // periodic: 0..2L with wraparound; open: 0..=2L
    let extent: [i64; 3] = spec.cells.map(|l| {
        let l = l as i64;
        if periodic {
            2 * l
        } else {
            2 * l + 1
        }
    });

    let mut coords = Vec::new();
    for x in 0..extent[0] {
        for y in 0..extent[1] {
            for z in 0..extent[2] {
                let c = [x, y, z];
                if matches!(odd_count(&c), 1 | 2) {
                    coords.push(c);
                }
            }
        }
    }
    let index: HashMap<Coord, usize> = coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut edges = Vec::new();
    for (i, c) in coords.iter().enumerate() {
        for axis in 0..3 {
            let mut n = *c;
            n[axis] += 1;
            if n[axis] == extent[axis] {
                if !periodic {
                    continue;
                }
                n[axis] = 0;
            }
            if let Some(&j) = index.get(&n) {
                edges.push((i.min(j), i.max(j)));
            }
        }
    }
    edges.sort_unstable();
    Graph::from_edges(coords.len(), &edges)?.with_coords(coords)
}

/// True for RHG vertices with two odd coordinates.
pub fn is_face_qubit(c: &Coord) -> bool {
    odd_count(c) == 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Dot,
}

impl std::str::FromStr for GraphFormat {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(GraphFormat::Json),
            "dot" => Ok(GraphFormat::Dot),
            other => Err(GraphError::SpecInvalid(format!("unknown graph format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Coord>>,
}

/// Parses the JSON edge-list schema `{"n", "edges", "coords"?}`.
pub fn load_graph(bytes: &[u8]) -> Result<Graph, GraphError> {
    let file: GraphFile = serde_json::from_slice(bytes)
        .map_err(|e| GraphError::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let edges: Vec<(usize, usize)> = file.edges.iter().map(|&[a, b]| (a, b)).collect();
    let graph = Graph::from_edges(file.n, &edges)?;
    match file.coords {
        Some(c) => graph.with_coords(c),
        None => Ok(graph),
    }
}

pub fn export_graph(g: &Graph, format: GraphFormat) -> Vec<u8> {
    match format {
        GraphFormat::Json => {
            let file = GraphFile {
                n: g.vertex_count(),
                edges: g.edges().map(|(a, b)| [a, b]).collect(),
                coords: g.coords.clone(),
            };
            let mut out = serde_json::to_vec(&file).expect("graph serializes");
            out.push(b'\n');
            out
        }
        GraphFormat::Dot => {
            let mut s = String::from("graph G {\n");
            for v in 0..g.vertex_count() {
                match &g.coords {
                    Some(c) => {
                        let [x, y, z] = c[v];
                        writeln!(s, "  {v} [label=\"{v}\", pos=\"{x},{y},{z}\"];").unwrap();
                    }
                    None => writeln!(s, "  {v} [label=\"{v}\"];").unwrap(),
                }
            }
            for (a, b) in g.edges() {
                writeln!(s, "  {a} -- {b};").unwrap();
            }
            s.push_str("}\n");
            s.into_bytes()
        }
    }
}
