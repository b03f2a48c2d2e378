//! Finite simple graphs, the graph Laplacian and the graph of a matrix.
//!
//! Vertex labels are 1-based at every I/O boundary (files, names, error messages) and
//! 0-based inside the library.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Real, C};

/// Default threshold for deciding that an off-diagonal entry couples two vertices.
pub const GRAPH_ZERO_TOL: f64 = 1e-12;

/// Undirected graph without self-loops. Edges are stored 0-based as `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    m: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Edgeless graph on `m` vertices.
    pub fn empty(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidGraph("a graph needs at least one vertex".into()));
        }
        Ok(Self { m, edges: BTreeSet::new() })
    }

    /// Builds a graph from 1-based edge pairs. Duplicate and reversed pairs collapse.
    pub fn new(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(m)?;
        for &(i, j) in edges {
            for v in [i, j] {
                if v == 0 || v > m {
                    return Err(Error::VertexOutOfRange { vertex: v, m });
                }
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            g.insert(i - 1, j - 1);
        }
        Ok(g)
    }

    fn insert(&mut self, i: usize, j: usize) {
        self.edges.insert((i.min(j), i.max(j)));
    }

    pub fn vertex_count(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// 0-based edges `(i, j)`, `i < j`, in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Breadth-first search from vertex 0.
    pub fn is_connected(&self) -> bool {
        let adj = self.neighbours();
        let mut seen = vec![false; self.m];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.m
    }

    pub fn triangle() -> Self {
        Self::complete(3)
    }

    /// The 4-cycle 1-2-3-4-1.
    pub fn square() -> Self {
        Self::cycle(4)
    }

    pub fn cycle(m: usize) -> Self {
        let mut g = Self::chain(m);
        if m > 2 {
            g.insert(m - 1, 0);
        }
        g
    }

    /// Path graph 1-2-…-m.
    pub fn chain(m: usize) -> Self {
        let mut g = Self { m: m.max(1), edges: BTreeSet::new() };
        for i in 1..m {
            g.insert(i - 1, i);
        }
        g
    }

    pub fn complete(m: usize) -> Self {
        let mut g = Self { m: m.max(1), edges: BTreeSet::new() };
        for i in 0..m {
            for j in i + 1..m {
                g.insert(i, j);
            }
        }
        g
    }

    /// Cuboctahedron: 12 vertices of degree 4. Vertices 1–4 and 5–8 form two squares;
    /// 9–12 sit between them.
    pub fn cuboctahedron() -> Self {
        const EDGES: [(usize, usize); 24] = [
            (1, 2), (2, 3), (3, 4), (4, 1),
            (5, 6), (6, 7), (7, 8), (8, 5),
            (5, 9), (9, 6), (6, 10), (10, 7), (7, 11), (11, 8), (8, 12), (12, 5),
            (9, 2), (2, 10), (10, 3), (3, 11), (11, 4), (4, 12), (12, 1), (1, 9),
        ];
        Self::new(12, &EDGES).expect("static edge list")
    }

    /// Resolves `triangle`, `square`, `cuboctahedron`, `chain-M`, `complete-M`, `cycle-M`.
    pub fn builtin(name: &str) -> Option<Self> {
        let sized = |prefix: &str| {
            name.strip_prefix(prefix)
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&m| m >= 1 && m <= 63)
        };
        match name {
            "triangle" => Some(Self::triangle()),
            "square" => Some(Self::square()),
            "cuboctahedron" => Some(Self::cuboctahedron()),
            _ => sized("chain-")
                .map(Self::chain)
                .or_else(|| sized("complete-").map(Self::complete))
                .or_else(|| sized("cycle-").map(Self::cycle)),
        }
    }

    /// Parses `{"vertices": M, "edges": [[i, j], ...]}` with 1-based labels.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(s)?;
        let edges: Vec<_> = f.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(f.vertices, &edges)
    }

    /// Parses an edge list: first non-empty line `M`, then one `i j` pair per line.
    /// Lines starting with `#` are ignored.
    pub fn from_edge_list_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::InvalidGraph("empty edge list".into()))?;
        let m = header
            .parse::<usize>()
            .map_err(|_| Error::InvalidGraph(format!("bad vertex count {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let parts: Vec<_> = line.split_whitespace().collect();
            let parsed: Vec<usize> = parts.iter().filter_map(|p| p.parse().ok()).collect();
            if parts.len() != 2 || parsed.len() != 2 {
                return Err(Error::InvalidGraph(format!("bad edge line {line:?}")));
            }
            edges.push((parsed[0], parsed[1]));
        }
        Self::new(m, &edges)
    }

    /// Reads a graph file, JSON if the content starts with `{`, edge list otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        if s.trim_start().starts_with('{') {
            Self::from_json_str(&s)
        } else {
            Self::from_edge_list_str(&s)
        }
    }

    pub fn to_json(&self) -> String {
        let f = GraphFile {
            vertices: self.m,
            edges: self.edges.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        };
        serde_json::to_string(&f).expect("graph serialises")
    }
}

/// Δ with Δ_ii = −deg(i) and Δ_ij = 1 on edges.
pub fn graph_laplacian<T: Real>(g: &Graph) -> Matrix<T> {
    let mut d = Matrix::zeros(g.m, g.m);
    for (i, j) in g.edges() {
        d[(i, j)] = T::one();
        d[(j, i)] = T::one();
        d[(i, i)] -= T::one();
        d[(j, j)] -= T::one();
    }
    d
}

/// Graph whose edges are the off-diagonal entries with |a_ij| > `zero_tol`.
pub fn graph_of_matrix<T: Real>(a: &Matrix<C<T>>, zero_tol: T) -> Result<Graph> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", a.rows(), a.cols())));
    }
    let defect = a.max_hermitian_defect();
    if defect > zero_tol {
        return Err(Error::NotHermitian(defect.as_f64()));
    }
    let mut g = Graph::empty(a.rows())?;
    for i in 0..a.rows() {
        for j in 0..i {
            if a[(i, j)].norm() > zero_tol {
                g.insert(i, j);
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connectivity() {
        assert!(Graph::triangle().is_connected());
        assert!(!Graph::empty(2).unwrap().is_connected());
        assert!(Graph::empty(1).unwrap().is_connected());
        let fermionic_square = Graph::new(
            6,
            &[(1, 2), (2, 3), (3, 5), (5, 1), (2, 4), (4, 5), (5, 6), (6, 2)],
        )
        .unwrap();
        assert!(fermionic_square.is_connected());
    }

    #[test]
    fn laplacians() {
        let tri: Matrix<f64> = graph_laplacian(&Graph::triangle());
        let expected = Matrix::from_rows(&[
            vec![-2.0, 1.0, 1.0],
            vec![1.0, -2.0, 1.0],
            vec![1.0, 1.0, -2.0],
        ])
        .unwrap();
        assert_eq!(tri, expected);
        let sq: Matrix<f64> = graph_laplacian(&Graph::square());
        assert!((0..4).all(|i| sq[(i, i)] == -2.0));
        assert_eq!(sq[(0, 2)], 0.0);
        assert_eq!(sq[(1, 3)], 0.0);
        let single: Matrix<f64> = graph_laplacian(&Graph::empty(1).unwrap());
        assert_eq!(single[(0, 0)], 0.0);
    }

    #[test]
    fn graph_of_diagonal_matrix_is_edgeless() {
        let mut a = Matrix::<C<f64>>::zeros(3, 3);
        a[(1, 1)] = C::new(2.0, 0.0);
        assert_eq!(graph_of_matrix(&a, GRAPH_ZERO_TOL).unwrap().edge_count(), 0);
        a[(0, 1)] = C::new(1.0, 0.0);
        assert!(matches!(graph_of_matrix(&a, GRAPH_ZERO_TOL), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(Graph::new(3, &[(1, 4)]), Err(Error::VertexOutOfRange { vertex: 4, m: 3 })));
        assert!(Graph::new(3, &[(2, 2)]).is_err());
        assert!(Graph::new(3, &[(0, 1)]).is_err());
    }

    #[test]
    fn file_formats_round_trip() {
        let g = Graph::cuboctahedron();
        assert_eq!(Graph::from_json_str(&g.to_json()).unwrap(), g);
        let text = "3\n1 2\n# comment\n2 3\n";
        assert_eq!(Graph::from_edge_list_str(text).unwrap(), Graph::chain(3));
        assert!(Graph::from_edge_list_str("3\n1 2 3\n").is_err());
    }

    #[test]
    fn builtins() {
        assert_eq!(Graph::builtin("chain-5").unwrap().edge_count(), 4);
        assert_eq!(Graph::builtin("complete-4").unwrap().edge_count(), 6);
        assert!(Graph::builtin("chain-0").is_none());
        let cubo = Graph::cuboctahedron();
        assert_eq!(cubo.edge_count(), 24);
        assert!((0..12).all(|i| cubo.degree(i) == 4));
    }
}
