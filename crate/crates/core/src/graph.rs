//! Shaded bipartite graphs, Perron-Frobenius data and based loops.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linalg::{certified_eigenvector, charpoly, eigenvector_by_adjugate, isolate_real_roots, LinalgError, Matrix, Poly};
use crate::scalar::{Scalar, ScalarError, Sign, DEFAULT_MAX_DEPTH, DEFAULT_PRECISION, MAX_PRECISION};

const HAAGERUP_JSON: &str = include_str!("../data/haagerup.graph.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {0} does not join an even vertex to an odd vertex")]
    NotBipartite(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("base vertex {0} is missing or odd")]
    BadBase(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("edge {0} has multiplicity 0")]
    BadMultiplicity(String),
    #[error("malformed graph: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Shading of a box space: `+` loops start at even vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shading {
    Plus,
    Minus,
}

impl Shading {
    pub fn flip(self) -> Shading {
        match self {
            Shading::Plus => Shading::Minus,
            Shading::Minus => Shading::Plus,
        }
    }

    pub fn start_parity(self) -> Parity {
        match self {
            Shading::Plus => Parity::Even,
            Shading::Minus => Parity::Odd,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Shading::Plus => "+",
            Shading::Minus => "-",
        }
    }

    pub fn parse(s: &str) -> Option<Shading> {
        match s {
            "+" => Some(Shading::Plus),
            "-" | "\u{2212}" => Some(Shading::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Shading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub parity: Parity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub even: String,
    pub odd: String,
    #[serde(default = "one_mult")]
    pub mult: u32,
}

fn one_mult() -> u32 {
    1
}

/// The graph file format, kept in file order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphData {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    pub base: String,
}

/// One undirected edge after multiplicities are expanded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strand {
    pub label: String,
    pub even: usize,
    pub odd: usize,
}

impl Strand {
    pub fn other(&self, v: usize) -> usize {
        if v == self.even {
            self.odd
        } else {
            self.even
        }
    }
}

/// A validated shaded bipartite graph. Vertices are indexed in file order;
/// parallel edges become separate strands labelled `id.1`, `id.2`, ...
#[derive(Clone, Debug)]
pub struct BipartiteGraph {
    data: GraphData,
    parity: Vec<Parity>,
    index: HashMap<String, usize>,
    base: usize,
    strands: Vec<Strand>,
    adj: Vec<Vec<usize>>,
}

impl PartialEq for BipartiteGraph {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl Eq for BipartiteGraph {}

impl BipartiteGraph {
    pub fn new(data: GraphData) -> Result<Self, GraphError> {
        let mut index = HashMap::new();
        for (i, v) in data.vertices.iter().enumerate() {
            if index.insert(v.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateId(v.id.clone()));
            }
        }
        let parity: Vec<Parity> = data.vertices.iter().map(|v| v.parity).collect();
        let mut strands = Vec::new();
        let mut seen = HashMap::new();
        for e in &data.edges {
            if seen.insert(e.id.clone(), ()).is_some() {
                return Err(GraphError::DuplicateId(e.id.clone()));
            }
            let a = *index.get(&e.even).ok_or_else(|| GraphError::UnknownVertex(e.even.clone()))?;
            let b = *index.get(&e.odd).ok_or_else(|| GraphError::UnknownVertex(e.odd.clone()))?;
            if parity[a] != Parity::Even || parity[b] != Parity::Odd {
                return Err(GraphError::NotBipartite(e.id.clone()));
            }
            if e.mult == 0 {
                return Err(GraphError::BadMultiplicity(e.id.clone()));
            }
            for k in 1..=e.mult {
                let label = if e.mult == 1 { e.id.clone() } else { format!("{}.{k}", e.id) };
                strands.push(Strand { label, even: a, odd: b });
            }
        }
        let base = match index.get(&data.base) {
            Some(&b) if parity[b] == Parity::Even => b,
            _ => return Err(GraphError::BadBase(data.base.clone())),
        };
        let mut adj = vec![Vec::new(); parity.len()];
        for (s, st) in strands.iter().enumerate() {
            adj[st.even].push(s);
            adj[st.odd].push(s);
        }
        let g = BipartiteGraph { data, parity, index, base, strands, adj };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let data: GraphData = serde_json::from_str(s).map_err(|e| GraphError::Parse(e.to_string()))?;
        BipartiteGraph::new(data)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.data).expect("graph data serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.data).expect("graph data serializes")
    }

    pub fn data(&self) -> &GraphData {
        &self.data
    }

    /// Re-checks the invariants (always true for a constructed graph).
    pub fn validate(&self) -> Result<(), GraphError> {
        BipartiteGraph::new(self.data.clone()).map(|_| ())
    }

    fn is_connected(&self) -> bool {
        let n = self.parity.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &s in &self.adj[v] {
                let w = self.strands[s].other(v);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    pub fn num_vertices(&self) -> usize {
        self.parity.len()
    }

    pub fn num_strands(&self) -> usize {
        self.strands.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.data.vertices[v].id
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn parity(&self, v: usize) -> Parity {
        self.parity[v]
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn strand(&self, s: usize) -> &Strand {
        &self.strands[s]
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    pub fn strand_index(&self, label: &str) -> Option<usize> {
        self.strands.iter().position(|s| s.label == label)
    }

    /// Strands at `v`, in file order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn vertices_of_parity(&self, p: Parity) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_vertices()).filter(move |&v| self.parity[v] == p)
    }

    pub fn adjacency_counts(&self) -> Vec<Vec<u64>> {
        let n = self.num_vertices();
        let mut a = vec![vec![0u64; n]; n];
        for s in &self.strands {
            a[s.even][s.odd] += 1;
            a[s.odd][s.even] += 1;
        }
        a
    }

    pub fn adjacency_matrix(&self) -> Matrix {
        let rows = self.adjacency_counts().into_iter().map(|r| r.into_iter().map(|c| Scalar::int(c as i64)).collect()).collect();
        Matrix::from_rows(rows)
    }

    /// First 16 hex digits of the SHA-256 of the compact graph JSON.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json_string().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Simple path graph `v0 - v1 - ... - v(k-1)` based at `v0`.
    pub fn path(k: usize) -> BipartiteGraph {
        assert!(k >= 1);
        let vertices = (0..k)
            .map(|i| VertexSpec { id: format!("v{i}"), parity: if i % 2 == 0 { Parity::Even } else { Parity::Odd } })
            .collect();
        let edges = (0..k - 1)
            .map(|i| {
                let (e, o) = if i % 2 == 0 { (i, i + 1) } else { (i + 1, i) };
                EdgeSpec { id: format!("e{i}"), even: format!("v{e}"), odd: format!("v{o}"), mult: 1 }
            })
            .collect();
        BipartiteGraph::new(GraphData { vertices, edges, base: "v0".into() }).expect("path graph is valid")
    }
}

impl fmt::Display for BipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vertices, {} edges, base {}", self.num_vertices(), self.num_strands(), self.vertex_id(self.base))
    }
}

/// The Haagerup principal graph: a path `* - a - b - c` with two arms
/// `c - d - e - f` and `c - d' - e' - f'`; `*` is even.
pub fn haagerup_graph() -> BipartiteGraph {
    BipartiteGraph::from_json_str(HAAGERUP_JSON).expect("bundled graph is valid")
}

/// A closed edge path of even length. `edges` are strand indices; the
/// traversal direction is implied by `start`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopPath {
    pub start: usize,
    pub edges: Vec<usize>,
}

impl LoopPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Vertices `v0, v1, ..., v(2n)` visited, with `v(2n) = v0`.
    pub fn vertices(&self, g: &BipartiteGraph) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        let mut v = self.start;
        out.push(v);
        for &s in &self.edges {
            v = g.strand(s).other(v);
            out.push(v);
        }
        out
    }

    pub fn labels(&self, g: &BipartiteGraph) -> Vec<String> {
        self.edges.iter().map(|&s| g.strand(s).label.clone()).collect()
    }

    pub fn shading(&self, g: &BipartiteGraph) -> Shading {
        match g.parity(self.start) {
            Parity::Even => Shading::Plus,
            Parity::Odd => Shading::Minus,
        }
    }

    /// Checks that the strands chain up and return to the start.
    pub fn is_valid(&self, g: &BipartiteGraph) -> bool {
        if self.edges.len() % 2 != 0 || self.start >= g.num_vertices() {
            return false;
        }
        let mut v = self.start;
        for &s in &self.edges {
            if s >= g.num_strands() {
                return false;
            }
            let st = g.strand(s);
            if st.even != v && st.odd != v {
                return false;
            }
            v = st.other(v);
        }
        v == self.start
    }

    /// Rebuilds a loop from strand labels. A zero-length loop needs `start`.
    pub fn from_labels(g: &BipartiteGraph, labels: &[String], start: Option<usize>, shading: Shading) -> Option<LoopPath> {
        let edges: Vec<usize> = labels.iter().map(|l| g.strand_index(l)).collect::<Option<_>>()?;
        let start = match (edges.first(), start) {
            (_, Some(s)) => s,
            (Some(&s), None) => {
                let st = g.strand(s);
                if shading == Shading::Plus {
                    st.even
                } else {
                    st.odd
                }
            }
            (None, None) => return None,
        };
        let p = LoopPath { start, edges };
        (p.is_valid(g) && p.shading(g) == shading).then_some(p)
    }
}

/// All loops of length `2n` starting at vertices of the given shading, ordered
/// by start vertex and then lexicographically by strand (file) order.
pub fn enumerate_loops(g: &BipartiteGraph, n: usize, shading: Shading) -> Vec<LoopPath> {
    let mut out = Vec::new();
    let len = 2 * n;
    // dist[v][w] bounds the remaining length needed to get home
    let dist = distances(g);
    for start in g.vertices_of_parity(shading.start_parity()) {
        let mut path = Vec::with_capacity(len);
        walk(g, &dist, start, start, len, &mut path, &mut out);
    }
    out
}

fn walk(g: &BipartiteGraph, dist: &[Vec<usize>], start: usize, v: usize, remaining: usize, path: &mut Vec<usize>, out: &mut Vec<LoopPath>) {
    if remaining == 0 {
        if v == start {
            out.push(LoopPath { start, edges: path.clone() });
        }
        return;
    }
    for &s in g.incident(v) {
        let w = g.strand(s).other(v);
        if dist[w][start] > remaining - 1 {
            continue;
        }
        path.push(s);
        walk(g, dist, start, w, remaining - 1, path, out);
        path.pop();
    }
}

fn distances(g: &BipartiteGraph) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut d = vec![vec![usize::MAX; n]; n];
    for (src, row) in d.iter_mut().enumerate() {
        row[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            for &s in g.incident(v) {
                let w = g.strand(s).other(v);
                if row[w] == usize::MAX {
                    row[w] = row[v] + 1;
                    q.push_back(w);
                }
            }
        }
    }
    d
}

/// `(A^(2n))[base][base]` by exact integer matrix powers.
pub fn count_loops(g: &BipartiteGraph, n: usize, base: usize) -> BigInt {
    let p = adjacency_power(g, 2 * n);
    p[base][base].clone()
}

/// `A^k` over the integers.
pub fn adjacency_power(g: &BipartiteGraph, k: usize) -> Vec<Vec<BigInt>> {
    let a: Vec<Vec<BigInt>> = g.adjacency_counts().into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    let n = a.len();
    let mut acc: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut b = a;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = int_mul(&acc, &b);
        }
        e >>= 1;
        if e > 0 {
            b = int_mul(&b, &b);
        }
    }
    acc
}

fn int_mul(x: &[Vec<BigInt>], y: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = x.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if x[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !y[k][j].is_zero() {
                    out[i][j] += &x[i][k] * &y[k][j];
                }
            }
        }
    }
    out
}

/// How the graph norm and Perron weights are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormOptions {
    pub max_depth: usize,
    pub precision: u32,
    pub force_interval: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { max_depth: DEFAULT_MAX_DEPTH, precision: DEFAULT_PRECISION, force_interval: false }
    }
}

pub fn graph_norm(g: &BipartiteGraph) -> Scalar {
    graph_norm_with(g, &NormOptions::default())
}

/// Largest adjacency eigenvalue. Exact when its minimal polynomial has degree
/// at most 4 and is even or quadratic, so that the root fits in the tower;
/// otherwise a certified interval.
pub fn graph_norm_with(g: &BipartiteGraph, opts: &NormOptions) -> Scalar {
    let p = charpoly(&g.adjacency_matrix()).expect("integer matrix");
    let sf = p.squarefree_part();
    let roots = isolate_real_roots(&sf);
    let top = roots.last().expect("adjacency matrix has a real eigenvalue").clone();
    if !opts.force_interval {
        if let Some(d) = exact_largest_root(&p, &sf, &roots, opts.max_depth) {
            return d;
        }
    }
    let r = top.refine(&sf, opts.precision + 8);
    Scalar::Interval(crate::scalar::Enclosure::real(r.to_interval(opts.precision + 8)))
}

fn exact_largest_root(p: &Poly, sf: &Poly, roots: &[crate::linalg::RootInterval], max_depth: usize) -> Option<Scalar> {
    let approx: Vec<f64> = roots.iter().map(|r| midpoint_f64(&r.refine(sf, 80))).collect();
    let lam = *approx.last()?;
    let top = roots.last()?;
    let accept = |cand: Scalar| -> Option<Scalar> {
        if !p.eval(&cand).is_zero() {
            return None;
        }
        let e = cand.to_interval(128);
        let lo = crate::scalar::Dyadic::from_rational(&top.lo, 160, crate::scalar::Round::Down);
        let hi = crate::scalar::Dyadic::from_rational(&top.hi, 160, crate::scalar::Round::Up);
        (e.im.is_none() && e.re.lower() > &lo && e.re.upper() <= &hi).then_some(cand)
    };
    // rational
    let r = lam.round();
    if let Some(d) = accept(Scalar::int(r as i64)) {
        return Some(d);
    }
    let ri = |x: f64| -> Option<i64> { ((x - x.round()).abs() < 1e-9 && x.abs() < 1e15).then_some(x.round() as i64) };
    // x^2 - y
    if let Some(y) = ri(lam * lam) {
        if divides(&Poly::from_ints(&[-y, 0, 1]), p) {
            if let Some(d) = Scalar::int(y).exact_sqrt_or_adjoin(max_depth).ok().and_then(accept) {
                return Some(d);
            }
        }
    }
    for &other in &approx[..approx.len() - 1] {
        // x^2 - s x + t
        if let (Some(s), Some(t)) = (ri(lam + other), ri(lam * other)) {
            if divides(&Poly::from_ints(&[t, -s, 1]), p) {
                let disc = Scalar::int(s * s - 4 * t);
                if let Ok(r) = disc.exact_sqrt_or_adjoin(max_depth) {
                    if let Some(d) = accept(&(&r + &Scalar::int(s)) * &Scalar::ratio(1, 2)) {
                        return Some(d);
                    }
                }
            }
        }
        // x^4 - s x^2 + t
        let (a, b) = (lam * lam, other * other);
        if (a - b).abs() > 1e-6 {
            if let (Some(s), Some(t)) = (ri(a + b), ri(a * b)) {
                if divides(&Poly::from_ints(&[t, 0, -s, 0, 1]), p) {
                    let disc = Scalar::int(s * s - 4 * t);
                    let y = disc.exact_sqrt_or_adjoin(max_depth).ok().map(|r| &(&r + &Scalar::int(s)) * &Scalar::ratio(1, 2));
                    if let Some(d) = y.and_then(|y| y.exact_sqrt_or_adjoin(max_depth).ok()).and_then(accept) {
                        return Some(d);
                    }
                }
            }
        }
    }
    None
}

fn divides(d: &Poly, p: &Poly) -> bool {
    p.div_rem(d).1.is_zero()
}

fn midpoint_f64(r: &crate::linalg::RootInterval) -> f64 {
    let m: BigRational = (&r.lo + &r.hi) / BigRational::from_integer(BigInt::from(2));
    m.to_f64().unwrap_or(f64::NAN)
}

/// Graph norm and Perron-Frobenius weights, normalized to 1 at the base.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub delta: Scalar,
    pub mu: Vec<Scalar>,
    pub ids: Vec<String>,
}

impl PerronData {
    pub fn get(&self, id: &str) -> Option<&Scalar> {
        self.ids.iter().position(|x| x == id).map(|i| &self.mu[i])
    }

    pub fn by_id(&self) -> BTreeMap<String, Scalar> {
        self.ids.iter().cloned().zip(self.mu.iter().cloned()).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.delta.is_exact() && self.mu.iter().all(Scalar::is_exact)
    }
}

pub fn perron_vector(g: &BipartiteGraph) -> Result<PerronData, GraphError> {
    perron_vector_with(g, &NormOptions::default())
}

pub fn perron_vector_with(g: &BipartiteGraph, opts: &NormOptions) -> Result<PerronData, GraphError> {
    let delta = graph_norm_with(g, opts);
    let a = g.adjacency_matrix();
    let mu = if delta.is_exact() { certified_eigenvector(&a, &delta, g.base())? } else { eigenvector_by_adjugate(&a, &delta, g.base())? };
    for m in &mu {
        let bits = if delta.is_exact() { MAX_PRECISION } else { opts.precision };
        if m.certified_sign(bits)? != Sign::Positive {
            return Err(GraphError::Linalg(LinalgError::NotAnEigenvalue));
        }
    }
    let ids = (0..g.num_vertices()).map(|v| g.vertex_id(v).to_string()).collect();
    Ok(PerronData { delta, mu, ids })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> BipartiteGraph {
        BipartiteGraph::path(2)
    }

    #[test]
    fn single_edge_data() {
        let g = single_edge();
        assert_eq!(graph_norm(&g), Scalar::one());
        let p = perron_vector(&g).unwrap();
        assert_eq!(p.mu, vec![Scalar::one(), Scalar::one()]);
        assert_eq!(enumerate_loops(&g, 1, Shading::Plus).len(), 1);
        assert_eq!(enumerate_loops(&g, 0, Shading::Plus).len(), 1);
        for n in 0..6 {
            assert_eq!(count_loops(&g, n, 0), BigInt::one());
        }
    }

    #[test]
    fn two_even_vertices_rejected() {
        let s = r#"{"vertices":[{"id":"x","parity":"even"},{"id":"y","parity":"even"}],"edges":[{"id":"e","even":"x","odd":"y","mult":1}],"base":"x"}"#;
        assert_eq!(BipartiteGraph::from_json_str(s), Err(GraphError::NotBipartite("e".into())));
    }

    #[test]
    fn disconnected_and_bad_base() {
        let s = r#"{"vertices":[{"id":"x","parity":"even"},{"id":"y","parity":"odd"},{"id":"z","parity":"even"}],"edges":[{"id":"e","even":"x","odd":"y","mult":1}],"base":"x"}"#;
        assert_eq!(BipartiteGraph::from_json_str(s), Err(GraphError::Disconnected));
        let s = r#"{"vertices":[{"id":"x","parity":"even"},{"id":"y","parity":"odd"}],"edges":[{"id":"e","even":"x","odd":"y","mult":1}],"base":"y"}"#;
        assert_eq!(BipartiteGraph::from_json_str(s), Err(GraphError::BadBase("y".into())));
    }

    #[test]
    fn a3_norm_and_weights() {
        let g = BipartiteGraph::path(3);
        let d = graph_norm(&g);
        assert_eq!(&d * &d, Scalar::int(2));
        let p = perron_vector(&g).unwrap();
        assert_eq!(p.mu[0], Scalar::one());
        assert_eq!(p.mu[1], d);
        assert_eq!(p.mu[2], Scalar::one());
    }

    #[test]
    fn multi_edge_strands() {
        let s = r#"{"vertices":[{"id":"x","parity":"even"},{"id":"y","parity":"odd"}],"edges":[{"id":"e","even":"x","odd":"y","mult":2}],"base":"x"}"#;
        let g = BipartiteGraph::from_json_str(s).unwrap();
        assert_eq!(g.num_strands(), 2);
        assert_eq!(graph_norm(&g), Scalar::int(2));
        assert_eq!(enumerate_loops(&g, 1, Shading::Plus).len(), 4);
        assert_eq!(count_loops(&g, 2, 0), BigInt::from(16));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = r#"{"vertices":[{"id":"x","parity":"even"},{"id":"y","parity":"odd"}],"edges":[{"id":"e","even":"x","odd":"y","mult":1}],"base":"x"}"#;
        assert_eq!(BipartiteGraph::from_json_str(s).unwrap().to_json_string(), s);
    }

    #[test]
    fn forced_interval_norm() {
        let g = BipartiteGraph::path(3);
        let opts = NormOptions { force_interval: true, ..Default::default() };
        let d = graph_norm_with(&g, &opts);
        assert!(!d.is_exact());
        let exact = graph_norm(&g).to_interval(200);
        assert!(d.enclosure(200).re.overlaps(&exact.re));
        let p = perron_vector_with(&g, &opts).unwrap();
        assert!(p.mu[1].enclosure(200).re.overlaps(&exact.re));
    }

    #[test]
    fn cubic_norm_falls_back_to_interval() {
        // A6 has norm 2cos(pi/7), a cubic irrationality
        let g = BipartiteGraph::path(6);
        let d = graph_norm(&g);
        assert!(!d.is_exact());
        let p = perron_vector(&g).unwrap();
        assert_eq!(p.mu.len(), 6);
    }

    #[test]
    fn haagerup_norm_and_loops() {
        let g = haagerup_graph();
        assert_eq!((g.num_vertices(), g.num_strands()), (10, 9));
        let p = perron_vector(&g).unwrap();
        let d2 = &p.delta * &p.delta;
        let target = &(&Scalar::int(5) + &Scalar::int(13).exact_sqrt_or_adjoin(3).unwrap()) * &Scalar::ratio(1, 2);
        assert!((&d2 - &target).is_zero());
        assert!(p.delta.to_decimal(14).starts_with("2.0743132930"));
        let counts: Vec<BigInt> = (1..=7).map(|n| count_loops(&g, n, g.base())).collect();
        assert_eq!(counts, [1, 2, 5, 15, 52, 199, 807].map(BigInt::from));
        let dims: Vec<usize> = (1..=5).map(|n| enumerate_loops(&g, n, Shading::Plus).len()).collect();
        assert_eq!(dims, [9, 27, 96, 375, 1539]);
    }
}
