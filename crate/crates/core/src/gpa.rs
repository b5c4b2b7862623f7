//! The graph planar algebra of a bipartite graph.
//!
//! Elements of `P_n` are functions on loops `(v0; e1, ..., e2n)`. Boundary
//! point `k` (zero-based) carries edge `e(k+1)`; the bottom path is
//! `e1..en` and the top path is `e2n..e(n+1)`, both read left to right.
//!
//! Values are stored in a rational gauge: the spin factors `sqrt(mu)` of the
//! usual presentation are absorbed into the basis, so every tangle acts by
//! products of `mu(v)^(+-1)` only. Traces and inner products are gauge
//! invariant.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{enumerate_loops, perron_vector_with, BipartiteGraph, GraphError, LoopPath, NormOptions, PerronData, Shading};
use crate::scalar::{Scalar, ScalarError, Tower};
use crate::tl::{TLDiagram, TLElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GpaError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("position {0} out of range")]
    BadPosition(usize),
    #[error("unknown loop {0}")]
    UnknownLoop(String),
    #[error("malformed element: {0}")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Perron weights and their inverses, computed once per graph.
#[derive(Debug)]
pub struct SpinContext {
    pub perron: PerronData,
    pub mu_inv: Vec<Scalar>,
    /// `sum of mu(v)^2` over even vertices (equal to the odd sum).
    pub z: Scalar,
    pub z_inv: Scalar,
}

impl SpinContext {
    pub fn new(g: &BipartiteGraph, perron: PerronData) -> Result<Self, GpaError> {
        let mu_inv = perron.mu.iter().map(Scalar::inv).collect::<Result<Vec<_>, _>>()?;
        let mut z = Scalar::zero();
        for v in g.vertices_of_parity(crate::graph::Parity::Even) {
            z += &(&perron.mu[v] * &perron.mu[v]);
        }
        let z_inv = z.inv()?;
        Ok(SpinContext { perron, mu_inv, z, z_inv })
    }

    pub fn mu(&self, v: usize) -> &Scalar {
        &self.perron.mu[v]
    }

    pub fn delta(&self) -> &Scalar {
        &self.perron.delta
    }
}

/// The loop basis of one box space.
#[derive(Debug)]
pub struct BoxSpace {
    pub n: usize,
    pub shading: Shading,
    loops: Vec<LoopPath>,
    index: HashMap<LoopPath, usize>,
    weights: OnceLock<Vec<Scalar>>,
}

impl BoxSpace {
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn loops(&self) -> &[LoopPath] {
        &self.loops
    }

    pub fn index_of(&self, l: &LoopPath) -> Option<usize> {
        self.index.get(l).copied()
    }
}

/// A graph together with its Perron data and cached box spaces.
#[derive(Debug)]
pub struct Gpa {
    graph: BipartiteGraph,
    spin: SpinContext,
    spaces: Mutex<HashMap<(usize, Shading), Arc<BoxSpace>>>,
}

impl Gpa {
    pub fn new(graph: BipartiteGraph) -> Result<Arc<Gpa>, GpaError> {
        Gpa::with_options(graph, &NormOptions::default())
    }

    pub fn with_options(graph: BipartiteGraph, opts: &NormOptions) -> Result<Arc<Gpa>, GpaError> {
        let perron = perron_vector_with(&graph, opts)?;
        let spin = SpinContext::new(&graph, perron)?;
        Ok(Arc::new(Gpa { graph, spin, spaces: Mutex::new(HashMap::new()) }))
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn spin(&self) -> &SpinContext {
        &self.spin
    }

    pub fn delta(&self) -> &Scalar {
        self.spin.delta()
    }

    pub fn is_exact(&self) -> bool {
        self.spin.perron.is_exact()
    }

    /// The tower holding the Perron data, if exact.
    pub fn tower(&self) -> Option<Arc<Tower>> {
        std::iter::once(&self.spin.perron.delta).chain(self.spin.perron.mu.iter()).filter_map(|s| s.tower().cloned()).max_by_key(|t| t.depth())
    }

    pub fn space(&self, n: usize, shading: Shading) -> Arc<BoxSpace> {
        let mut spaces = self.spaces.lock().unwrap();
        spaces
            .entry((n, shading))
            .or_insert_with(|| {
                let loops = enumerate_loops(&self.graph, n, shading);
                let index = loops.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
                Arc::new(BoxSpace { n, shading, loops, index, weights: OnceLock::new() })
            })
            .clone()
    }

    fn mu(&self, v: usize) -> &Scalar {
        &self.spin.perron.mu[v]
    }

    fn mu_inv(&self, v: usize) -> &Scalar {
        &self.spin.mu_inv[v]
    }

    /// `mu(v0) mu(vn)`, or `mu(v0)` when `n = 0`.
    fn ends(&self, vs: &[usize], n: usize) -> Scalar {
        if n == 0 {
            self.mu(vs[0]).clone()
        } else {
            self.mu(vs[0]) * self.mu(vs[n])
        }
    }

    fn ends_inv(&self, vs: &[usize], n: usize) -> Scalar {
        if n == 0 {
            self.mu_inv(vs[0]).clone()
        } else {
            self.mu_inv(vs[0]) * self.mu_inv(vs[n])
        }
    }

    /// Inverse product of `mu` over the interior vertices `vs[a+1..b]`.
    fn interior_inv(&self, vs: &[usize], a: usize, b: usize) -> Scalar {
        let mut acc = Scalar::one();
        if b <= a + 1 {
            return acc;
        }
        for &v in &vs[a + 1..b] {
            acc *= self.mu_inv(v);
        }
        acc
    }

    /// Inner product weight `mu(v0) mu(vn) / (P_bottom P_top Z)` per loop.
    fn weights(&self, sp: &BoxSpace) -> Vec<Scalar> {
        let n = sp.n;
        sp.loops
            .iter()
            .map(|l| {
                let vs = l.vertices(&self.graph);
                let mut w = &(self.mu(vs[0]) * self.mu(vs[n])) * &self.spin.z_inv;
                if n > 0 {
                    w *= &self.interior_inv(&vs, 0, n);
                    w *= &self.interior_inv(&vs, n, 2 * n);
                }
                w
            })
            .collect()
    }

    /// Inner product weights of the loops of `P_n`, in loop order.
    pub fn loop_weights(&self, n: usize, shading: Shading) -> Vec<Scalar> {
        let sp = self.space(n, shading);
        sp.weights.get_or_init(|| self.weights(&sp)).clone()
    }

    /// The loop and factor produced by capping loop `l` of `P_n` at `i`.
    fn cap_one(&self, l: &LoopPath, n: usize, i: usize) -> Option<(LoopPath, Scalar)> {
        let (a, b) = (i - 1, i % (2 * n));
        if l.edges[a] != l.edges[b] {
            return None;
        }
        let g = &self.graph;
        let vs = l.vertices(g);
        let nl = if i < 2 * n {
            let mut e = l.edges[..a].to_vec();
            e.extend_from_slice(&l.edges[a + 2..]);
            LoopPath { start: vs[0], edges: e }
        } else {
            LoopPath { start: vs[1], edges: l.edges[1..2 * n - 1].to_vec() }
        };
        let nvs = nl.vertices(g);
        let f = &(&self.ends(&vs, n) * &self.ends_inv(&nvs, n - 1)) * self.mu_inv(vs[i - 1]);
        Some((nl, f))
    }

    /// Matrix of `cap_i` on `P_n` as `(source, target, factor)` triples.
    pub fn cap_map(&self, n: usize, shading: Shading, i: usize) -> Result<Vec<(usize, usize, Scalar)>, GpaError> {
        if n == 0 || i == 0 || i > 2 * n {
            return Err(GpaError::BadPosition(i));
        }
        let sp = self.space(n, shading);
        let osp = self.space(n - 1, if i == 2 * n { shading.flip() } else { shading });
        let mut out = Vec::new();
        for (k, l) in sp.loops.iter().enumerate() {
            if let Some((nl, f)) = self.cap_one(l, n, i) {
                out.push((k, osp.index[&nl], f));
            }
        }
        Ok(out)
    }

    pub fn zero(self: &Arc<Self>, n: usize, shading: Shading) -> GpaElement {
        GpaElement { ctx: self.clone(), space: self.space(n, shading), entries: BTreeMap::new() }
    }

    pub fn unit(self: &Arc<Self>, n: usize, shading: Shading) -> GpaElement {
        self.tl_embed(&TLDiagram::identity(n), shading)
    }

    /// The indicator of a single loop.
    pub fn basis_element(self: &Arc<Self>, n: usize, shading: Shading, i: usize) -> GpaElement {
        let mut x = self.zero(n, shading);
        x.entries.insert(i, Scalar::one());
        x
    }

    pub fn from_entries(self: &Arc<Self>, n: usize, shading: Shading, entries: BTreeMap<usize, Scalar>) -> GpaElement {
        let mut x = self.zero(n, shading);
        x.entries = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        x
    }

    /// Image of a Temperley-Lieb diagram: on a compatible loop (equal edges
    /// at paired points) the value is a product of `mu` powers read off the
    /// regions the diagram's arcs cut out.
    pub fn tl_embed(self: &Arc<Self>, d: &TLDiagram, shading: Shading) -> GpaElement {
        let n = d.n();
        let sp = self.space(n, shading);
        let mut entries = BTreeMap::new();
        for (i, l) in sp.loops.iter().enumerate() {
            if (0..2 * n).any(|a| l.edges[a] != l.edges[d.partner(a)]) {
                continue;
            }
            let vs = l.vertices(&self.graph);
            let mut h: BTreeMap<usize, i64> = BTreeMap::new();
            for (k, &v) in vs.iter().enumerate().take(2 * n) {
                if k != 0 && k != n {
                    *h.entry(v).or_default() += 1;
                }
            }
            for a in 0..2 * n {
                let b = d.partner(a);
                if a < b && ((a < n) == (b < n)) {
                    *h.entry(vs[a + 1]).or_default() += 1;
                    *h.entry(vs[a]).or_default() -= 1;
                }
            }
            let mut val = Scalar::one();
            for (v, c) in h {
                debug_assert!(c % 2 == 0);
                let e = c / 2;
                if e != 0 {
                    val *= &self.mu(v).pow(e).expect("mu is invertible");
                }
            }
            entries.insert(i, val);
        }
        GpaElement { ctx: self.clone(), space: sp, entries }
    }

    pub fn tl_embed_element(self: &Arc<Self>, x: &TLElement, shading: Shading) -> GpaElement {
        let mut out = self.zero(x.n(), shading);
        for (d, c) in x.terms() {
            out = out.add(&self.tl_embed(d, shading).scale(c));
        }
        out
    }

    /// Random element with integer entries in `[-bound, bound]` on roughly
    /// `density` of the loops.
    pub fn random_element<R: Rng>(self: &Arc<Self>, n: usize, shading: Shading, density: f64, bound: i64, rng: &mut R) -> GpaElement {
        let sp = self.space(n, shading);
        let mut entries = BTreeMap::new();
        for i in 0..sp.len() {
            if rng.gen_bool(density.clamp(0.0, 1.0)) {
                let v = rng.gen_range(-bound..=bound);
                if v != 0 {
                    entries.insert(i, Scalar::int(v));
                }
            }
        }
        GpaElement { ctx: self.clone(), space: sp, entries }
    }

    pub fn element_from_json(self: &Arc<Self>, v: &Value) -> Result<GpaElement, GpaError> {
        let err = |m: &str| GpaError::Parse(m.to_string());
        if let Some(h) = v.get("graph").and_then(Value::as_str) {
            if h != self.graph.hash() {
                return Err(err("graph hash does not match"));
            }
        }
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| err("missing n"))? as usize;
        let shading = v.get("shading").and_then(Value::as_str).and_then(Shading::parse).ok_or_else(|| err("missing shading"))?;
        let sp = self.space(n, shading);
        let tower = self.tower();
        let mut entries = BTreeMap::new();
        for e in v.get("entries").and_then(Value::as_array).ok_or_else(|| err("missing entries"))? {
            let labels: Vec<String> = e
                .get("loop")
                .and_then(Value::as_array)
                .ok_or_else(|| err("missing loop"))?
                .iter()
                .map(|s| s.as_str().map(str::to_string).ok_or_else(|| err("loop labels are strings")))
                .collect::<Result<_, _>>()?;
            let start = match e.get("start").and_then(Value::as_str) {
                Some(s) => Some(self.graph.vertex_index(s).ok_or_else(|| err("unknown start vertex"))?),
                None => None,
            };
            let l = LoopPath::from_labels(&self.graph, &labels, start, shading).ok_or_else(|| GpaError::UnknownLoop(labels.join(",")))?;
            let i = sp.index_of(&l).ok_or_else(|| GpaError::UnknownLoop(labels.join(",")))?;
            let val = Scalar::from_json(e.get("value").ok_or_else(|| err("missing value"))?, tower.as_ref())?;
            if !val.is_zero() {
                entries.insert(i, val);
            }
        }
        Ok(GpaElement { ctx: self.clone(), space: sp, entries })
    }
}

/// A vector in `P_n` with the given shading, stored sparsely.
#[derive(Clone)]
pub struct GpaElement {
    ctx: Arc<Gpa>,
    space: Arc<BoxSpace>,
    entries: BTreeMap<usize, Scalar>,
}

impl fmt::Debug for GpaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GpaElement").field("n", &self.space.n).field("shading", &self.space.shading).field("entries", &self.entries).finish()
    }
}

impl PartialEq for GpaElement {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.space, &o.space) && self.entries == o.entries
    }
}

impl GpaElement {
    pub fn ctx(&self) -> &Arc<Gpa> {
        &self.ctx
    }

    pub fn space(&self) -> &Arc<BoxSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    pub fn shading(&self) -> Shading {
        self.space.shading
    }

    pub fn entries(&self) -> &BTreeMap<usize, Scalar> {
        &self.entries
    }

    pub fn get(&self, i: usize) -> Scalar {
        self.entries.get(&i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    fn same_shape(&self, o: &GpaElement) -> Result<(), GpaError> {
        if !Arc::ptr_eq(&self.ctx, &o.ctx) {
            return Err(GpaError::ShapeMismatch("different graphs".into()));
        }
        if self.n() != o.n() || self.shading() != o.shading() {
            return Err(GpaError::ShapeMismatch(format!("P_{}{} vs P_{}{}", self.n(), self.shading(), o.n(), o.shading())));
        }
        Ok(())
    }

    fn with_entries(&self, space: Arc<BoxSpace>, entries: HashMap<usize, Scalar>) -> GpaElement {
        let entries = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        GpaElement { ctx: self.ctx.clone(), space, entries }
    }

    pub fn add(&self, o: &GpaElement) -> GpaElement {
        self.same_shape(o).expect("add needs equal shapes");
        let mut entries = self.entries.clone();
        for (i, v) in &o.entries {
            let e = entries.entry(*i).or_default();
            *e += v;
        }
        entries.retain(|_, v| !v.is_zero());
        GpaElement { ctx: self.ctx.clone(), space: self.space.clone(), entries }
    }

    pub fn sub(&self, o: &GpaElement) -> GpaElement {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> GpaElement {
        let entries = self.entries.iter().map(|(i, v)| (*i, -v)).collect();
        GpaElement { ctx: self.ctx.clone(), space: self.space.clone(), entries }
    }

    pub fn scale(&self, s: &Scalar) -> GpaElement {
        let entries = self.entries.iter().map(|(i, v)| (*i, v * s)).filter(|(_, v)| !v.is_zero()).collect();
        GpaElement { ctx: self.ctx.clone(), space: self.space.clone(), entries }
    }

    /// `y` stacked on top of `self`:
    /// `(xy)(p, q) = sum_m x(p, m) y(m, q) / P_m`.
    pub fn multiply(&self, y: &GpaElement) -> Result<GpaElement, GpaError> {
        self.same_shape(y)?;
        let (g, n) = (self.ctx.graph(), self.n());
        let sp = &self.space;
        let mut by_middle: HashMap<(usize, &[usize]), Vec<(&[usize], &Scalar)>> = HashMap::new();
        for (i, v) in &self.entries {
            let l = &sp.loops[*i];
            by_middle.entry((l.start, &l.edges[n..])).or_default().push((&l.edges[..n], v));
        }
        let mut out: HashMap<usize, Scalar> = HashMap::new();
        let mut key = LoopPath { start: 0, edges: vec![0; 2 * n] };
        for (j, yv) in &y.entries {
            let l = &sp.loops[*j];
            let mut mid: Vec<usize> = l.edges[..n].to_vec();
            mid.reverse();
            let Some(xs) = by_middle.get(&(l.start, &mid[..])) else { continue };
            let vs = l.vertices(g);
            let w = yv * &self.ctx.interior_inv(&vs, 0, n);
            key.start = l.start;
            key.edges[n..].copy_from_slice(&l.edges[n..]);
            for (p, xv) in xs {
                key.edges[..n].copy_from_slice(p);
                let k = sp.index[&key];
                let t = *xv * &w;
                match out.get_mut(&k) {
                    Some(e) => *e += &t,
                    None => {
                        out.insert(k, t);
                    }
                }
            }
        }
        Ok(self.with_entries(sp.clone(), out))
    }

    /// `x*(v0; e1..e2n) = conj x(v0; e2n..e1)`.
    pub fn adjoint(&self) -> GpaElement {
        let sp = &self.space;
        let mut out = HashMap::new();
        for (i, v) in &self.entries {
            let l = &sp.loops[*i];
            let r = LoopPath { start: l.start, edges: l.edges.iter().rev().copied().collect() };
            out.insert(sp.index[&r], v.conj());
        }
        self.with_entries(sp.clone(), out)
    }

    /// One click of rotation: new point `k` is old point `k + 2`.
    pub fn rotate(&self) -> GpaElement {
        let n = self.n();
        if n == 0 {
            return self.clone();
        }
        let (g, sp) = (self.ctx.graph(), &self.space);
        let mut out = HashMap::new();
        for (i, v) in &self.entries {
            let l = &sp.loops[*i];
            let vs = l.vertices(g);
            let mut edges = l.edges[2..].to_vec();
            edges.extend_from_slice(&l.edges[..2]);
            let nl = LoopPath { start: vs[2], edges };
            let f = &self.ctx.ends(&vs, n) * &(self.ctx.mu_inv(vs[2]) * self.ctx.mu_inv(vs[(n + 2) % (2 * n)]));
            out.insert(sp.index[&nl], v * &f);
        }
        self.with_entries(sp.clone(), out)
    }

    pub fn rotate_by(&self, k: usize) -> GpaElement {
        let n = self.n().max(1);
        let mut x = self.clone();
        for _ in 0..k % n {
            x = x.rotate();
        }
        x
    }

    /// Joins boundary points `i` and `i + 1` (one-based, cyclic), `1 <= i <= 2n`.
    /// Capping across the base point (`i = 2n`) flips the shading.
    pub fn cap(&self, i: usize) -> Result<GpaElement, GpaError> {
        let n = self.n();
        if n == 0 || i == 0 || i > 2 * n {
            return Err(GpaError::BadPosition(i));
        }
        let shading = if i == 2 * n { self.shading().flip() } else { self.shading() };
        let osp = self.ctx.space(n - 1, shading);
        let mut out: HashMap<usize, Scalar> = HashMap::new();
        for (k, v) in &self.entries {
            let Some((nl, f)) = self.ctx.cap_one(&self.space.loops[*k], n, i) else { continue };
            let t = v * &f;
            let idx = osp.index[&nl];
            match out.get_mut(&idx) {
                Some(e) => *e += &t,
                None => {
                    out.insert(idx, t);
                }
            }
        }
        Ok(self.with_entries(osp, out))
    }

    /// Inserts a cup occupying new points `i, i + 1` (one-based) of the
    /// `(n+1)`-box, `1 <= i <= 2n + 2`; `i = 2n + 2` straddles the base point
    /// and flips the shading.
    pub fn cup(&self, i: usize) -> Result<GpaElement, GpaError> {
        let n = self.n();
        if i == 0 || i > 2 * n + 2 {
            return Err(GpaError::BadPosition(i));
        }
        let g = self.ctx.graph();
        let shading = if i == 2 * n + 2 { self.shading().flip() } else { self.shading() };
        let osp = self.ctx.space(n + 1, shading);
        let mut out: HashMap<usize, Scalar> = HashMap::new();
        for (k, v) in &self.entries {
            let l = &self.space.loops[*k];
            let vs = l.vertices(g);
            let base = &self.ctx.ends(&vs, n) * v;
            let u = if i <= 2 * n + 1 { vs[i - 1] } else { vs[0] };
            for &s in g.incident(u) {
                let w = g.strand(s).other(u);
                let nl = if i <= 2 * n + 1 {
                    let mut e = l.edges[..i - 1].to_vec();
                    e.push(s);
                    e.push(s);
                    e.extend_from_slice(&l.edges[i - 1..]);
                    LoopPath { start: vs[0], edges: e }
                } else {
                    let mut e = vec![s];
                    e.extend_from_slice(&l.edges);
                    e.push(s);
                    LoopPath { start: w, edges: e }
                };
                let nvs = nl.vertices(g);
                let t = &(&base * self.ctx.mu(w)) * &self.ctx.ends_inv(&nvs, n + 1);
                let idx = osp.index[&nl];
                match out.get_mut(&idx) {
                    Some(e) => *e += &t,
                    None => {
                        out.insert(idx, t);
                    }
                }
            }
        }
        Ok(self.with_entries(osp, out))
    }

    /// `x (x) 1`: a through strand added on the right.
    pub fn include_right(&self) -> GpaElement {
        self.cup(self.n() + 1).expect("valid position")
    }

    /// `1 (x) x`: a through strand added on the left (flips shading).
    pub fn include_left(&self) -> GpaElement {
        self.cup(2 * self.n() + 2).expect("valid position")
    }

    /// Weighted sum over loops whose top and bottom paths agree.
    pub fn trace(&self) -> Scalar {
        let (g, n) = (self.ctx.graph(), self.n());
        let mut acc = Scalar::zero();
        for (i, v) in &self.entries {
            let l = &self.space.loops[*i];
            if (0..n).any(|k| l.edges[k] != l.edges[2 * n - 1 - k]) {
                continue;
            }
            let vs = l.vertices(g);
            let ends = self.ctx.mu(vs[0]) * self.ctx.mu(vs[n]);
            acc += &(&(v * &ends) * &self.ctx.interior_inv(&vs, 0, n));
        }
        &acc * &self.ctx.spin.z_inv
    }

    /// `<x, y> = trace(x y*)`, computed directly from loop weights.
    pub fn inner_product(&self, y: &GpaElement) -> Result<Scalar, GpaError> {
        self.same_shape(y)?;
        let w = self.space.weights.get_or_init(|| self.ctx.weights(&self.space));
        let mut acc = Scalar::zero();
        let (small, large, swap) = if self.nnz() <= y.nnz() { (self, y, false) } else { (y, self, true) };
        for (i, a) in &small.entries {
            if let Some(b) = large.entries.get(i) {
                let t = if swap { b * &a.conj() } else { a * &b.conj() };
                acc += &(&t * &w[*i]);
            }
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        let g = self.ctx.graph();
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(i, v)| {
                let l = &self.space.loops[*i];
                let mut e = json!({"loop": l.labels(g), "value": v.to_json()});
                if l.is_empty() {
                    e["start"] = Value::String(g.vertex_id(l.start).to_string());
                }
                e
            })
            .collect();
        json!({"graph": g.hash(), "n": self.n(), "shading": self.shading().symbol(), "entries": entries})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{haagerup_graph, BipartiteGraph};
    use crate::tl::{all_diagrams, compose, jones_wenzl};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn haagerup() -> Arc<Gpa> {
        Gpa::new(haagerup_graph()).unwrap()
    }

    #[test]
    fn single_edge_is_one_dimensional() {
        let ctx = Gpa::new(BipartiteGraph::path(2)).unwrap();
        for n in 0..4 {
            assert_eq!(ctx.space(n, Shading::Plus).len(), 1);
            let u = ctx.unit(n, Shading::Plus);
            let x = u.scale(&Scalar::int(3));
            let y = u.scale(&Scalar::int(-2));
            assert_eq!(x.multiply(&y).unwrap(), u.scale(&Scalar::int(-6)));
        }
    }

    #[test]
    fn unit_and_circle() {
        let ctx = haagerup();
        let u0 = ctx.unit(0, Shading::Plus);
        assert_eq!(u0.trace(), Scalar::one());
        let u1 = ctx.unit(1, Shading::Plus);
        assert_eq!(u1.trace(), ctx.delta().clone());
        assert_eq!(u1.cap(1).unwrap(), u0.scale(ctx.delta()));
    }

    #[test]
    fn unit_laws_and_adjoint() {
        let ctx = haagerup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            let u = ctx.unit(n, Shading::Plus);
            assert_eq!(u.adjoint(), u);
            let x = ctx.random_element(n, Shading::Plus, 0.3, 3, &mut rng);
            let y = ctx.random_element(n, Shading::Plus, 0.3, 3, &mut rng);
            assert_eq!(u.multiply(&x).unwrap(), x);
            assert_eq!(x.multiply(&u).unwrap(), x);
            assert_eq!(x.adjoint().adjoint(), x);
            let xy = x.multiply(&y).unwrap();
            assert_eq!(xy.adjoint(), y.adjoint().multiply(&x.adjoint()).unwrap());
            assert_eq!(xy.trace(), y.multiply(&x).unwrap().trace());
        }
    }

    #[test]
    fn tl_embedding_is_a_homomorphism() {
        let ctx = haagerup();
        let ds = all_diagrams(3);
        let emb: Vec<GpaElement> = ds.iter().map(|d| ctx.tl_embed(d, Shading::Plus)).collect();
        for (a, ea) in ds.iter().zip(&emb) {
            assert_eq!(ctx.tl_embed(&a.rotate(), Shading::Plus), ea.rotate());
            assert_eq!(ea.trace(), TLElement::diagram(a.clone()).markov_trace(ctx.delta()));
            for (b, eb) in ds.iter().zip(&emb) {
                let (c, loops) = compose(a, b).unwrap();
                let lhs = ea.multiply(eb).unwrap();
                let rhs = ctx.tl_embed(&c, Shading::Plus).scale(&ctx.delta().pow(loops as i64).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn cap_cup_identities() {
        let ctx = haagerup();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 2;
        let x = ctx.random_element(n, Shading::Plus, 0.5, 4, &mut rng);
        for i in 1..=2 * n + 2 {
            let c = x.cup(i).unwrap();
            assert_eq!(c.cap(i).unwrap(), x.scale(ctx.delta()), "cap_{i} cup_{i}");
            let xx = ctx.random_element(n + 1, c.shading(), 0.4, 4, &mut rng);
            assert_eq!(xx.cap(i).unwrap().inner_product(&x).unwrap(), xx.inner_product(&c).unwrap(), "adjoint {i}");
        }
        for i in 1..=2 * n {
            // zig-zag
            assert_eq!(x.cup(i + 1).unwrap().cap(i).unwrap(), x, "zigzag {i}");
        }
    }

    #[test]
    fn rotation_is_unitary_of_order_n() {
        let ctx = haagerup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let x = ctx.random_element(n, Shading::Plus, 0.3, 3, &mut rng);
            let y = ctx.random_element(n, Shading::Plus, 0.3, 3, &mut rng);
            assert_eq!(x.rotate_by(n), x);
            let mut r = x.clone();
            for _ in 0..n {
                r = r.rotate();
            }
            assert_eq!(r, x);
            assert_eq!(x.rotate().inner_product(&y.rotate()).unwrap(), x.inner_product(&y).unwrap());
        }
    }

    #[test]
    fn tl4_embedding() {
        let ctx = haagerup();
        let ds = all_diagrams(4);
        for a in &ds {
            let ea = ctx.tl_embed(a, Shading::Plus);
            assert_eq!(ctx.tl_embed(&a.rotate(), Shading::Plus), ea.rotate(), "rot {a}");
            for b in &ds {
                let (c, loops) = compose(a, b).unwrap();
                let rhs = ctx.tl_embed(&c, Shading::Plus).scale(&ctx.delta().pow(loops as i64).unwrap());
                assert_eq!(ea.multiply(&ctx.tl_embed(b, Shading::Plus)).unwrap(), rhs, "{a} {b}");
            }
        }
    }

    #[test]
    fn jones_wenzl_embeds() {
        let ctx = haagerup();
        let f4 = jones_wenzl(4, ctx.delta()).unwrap();
        let e = ctx.tl_embed_element(&f4, Shading::Plus);
        let q = crate::tl::quantum_integers(5, ctx.delta());
        let f3 = ctx.tl_embed_element(&jones_wenzl(3, ctx.delta()).unwrap(), Shading::Plus);
        let partial = f3.scale(&q[5].checked_div(&q[4]).unwrap());
        for i in 1..=8 {
            let c = e.cap(i).unwrap();
            match i {
                4 => assert_eq!(c, partial),
                8 => assert_eq!(c.trace(), partial.trace()),
                _ => assert!(c.is_zero(), "cap_{i} f4"),
            }
        }
        let q5 = q[5].clone();
        assert_eq!(e.trace(), q5);
    }

    #[test]
    fn json_round_trip() {
        let ctx = haagerup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = ctx.random_element(2, Shading::Minus, 0.5, 3, &mut rng).scale(ctx.delta());
        let back = ctx.element_from_json(&x.to_json()).unwrap();
        assert_eq!(back, x);
        let u0 = ctx.unit(0, Shading::Plus);
        assert_eq!(ctx.element_from_json(&u0.to_json()).unwrap(), u0);
    }
}
