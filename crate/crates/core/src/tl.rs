//! Temperley-Lieb diagrams, their algebra at a loop value `delta`, and
//! Jones-Wenzl projections.
//!
//! Boundary points of an `n`-strand diagram are numbered `0..2n` in circular
//! order: the bottom runs left to right (`0..n`), then the top runs right to
//! left, so the top point above column `c` is `2n - 1 - c`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TlError {
    #[error("quantum integer [{0}] vanishes or is not certifiably nonzero")]
    VanishingQuantumInteger(usize),
    #[error("not a non-crossing perfect matching: {0}")]
    BadDiagram(String),
    #[error("strand counts differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
}

/// A non-crossing perfect matching of `2n` boundary points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TLDiagram {
    pairing: Vec<usize>,
}

impl TLDiagram {
    pub fn new(pairing: Vec<usize>) -> Result<Self, TlError> {
        let m = pairing.len();
        if m % 2 != 0 {
            return Err(TlError::BadDiagram("odd number of points".into()));
        }
        for (k, &j) in pairing.iter().enumerate() {
            if j >= m || j == k || pairing[j] != k {
                return Err(TlError::BadDiagram(format!("point {k} is not matched consistently")));
            }
        }
        // non-crossing: a < c < b with partner of c outside [a, b]
        for (a, &b) in pairing.iter().enumerate() {
            if a < b && (a + 1..b).any(|c| pairing[c] < a || pairing[c] > b) {
                return Err(TlError::BadDiagram(format!("pair ({a}, {b}) is crossed")));
            }
        }
        Ok(TLDiagram { pairing })
    }

    pub fn n(&self) -> usize {
        self.pairing.len() / 2
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn partner(&self, k: usize) -> usize {
        self.pairing[k]
    }

    pub fn identity(n: usize) -> TLDiagram {
        TLDiagram { pairing: (0..2 * n).map(|k| 2 * n - 1 - k).collect() }
    }

    /// The generator `e_i` (`1 <= i < n`): cup and cap on columns `i-1, i`.
    pub fn e(n: usize, i: usize) -> TLDiagram {
        assert!(i >= 1 && i < n, "e_{i} needs 1 <= i < {n}");
        let mut p = TLDiagram::identity(n).pairing;
        let (c0, c1) = (i - 1, i);
        let (t0, t1) = (2 * n - 1 - c0, 2 * n - 1 - c1);
        p[c0] = c1;
        p[c1] = c0;
        p[t0] = t1;
        p[t1] = t0;
        TLDiagram { pairing: p }
    }

    /// One-based point list, as serialized.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.pairing.iter().map(|k| k + 1).collect()
    }

    pub fn from_one_based(v: &[usize]) -> Result<Self, TlError> {
        if v.contains(&0) {
            return Err(TlError::BadDiagram("points are numbered from 1".into()));
        }
        TLDiagram::new(v.iter().map(|k| k - 1).collect())
    }

    /// Reflection across the horizontal axis.
    pub fn adjoint(&self) -> TLDiagram {
        let m = self.pairing.len();
        let r = |k: usize| m - 1 - k;
        TLDiagram { pairing: (0..m).map(|k| r(self.pairing[r(k)])).collect() }
    }

    /// One click of rotation: point `k` of the result is point `k + 2` of `self`.
    pub fn rotate(&self) -> TLDiagram {
        let m = self.pairing.len();
        if m == 0 {
            return self.clone();
        }
        TLDiagram { pairing: (0..m).map(|k| (self.pairing[(k + 2) % m] + m - 2) % m).collect() }
    }

    /// Adds a through strand on the right: `TL_n -> TL_(n+1)`.
    pub fn include(&self) -> TLDiagram {
        let n = self.n();
        let shift = |k: usize| if k < n { k } else { k + 2 };
        let mut p = vec![0; 2 * n + 2];
        for (k, &j) in self.pairing.iter().enumerate() {
            p[shift(k)] = shift(j);
        }
        p[n] = n + 1;
        p[n + 1] = n;
        TLDiagram { pairing: p }
    }

    /// Number of closed loops formed by joining each bottom point to the top
    /// point above it.
    pub fn closure_loops(&self) -> usize {
        let m = self.pairing.len();
        let mut uf = UnionFind::new(m);
        for k in 0..m {
            uf.union(k, self.pairing[k]);
            uf.union(k, m - 1 - k);
        }
        uf.components()
    }

    /// Number of through strands.
    pub fn through_strands(&self) -> usize {
        let n = self.n();
        (0..n).filter(|&k| self.pairing[k] >= n).count()
    }
}

impl fmt::Display for TLDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_one_based())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Stacks `b` on top of `a`, returning the result and the number of closed
/// loops removed.
pub fn compose(a: &TLDiagram, b: &TLDiagram) -> Result<(TLDiagram, usize), TlError> {
    let n = a.n();
    if b.n() != n {
        return Err(TlError::SizeMismatch(n, b.n()));
    }
    let m = 2 * n;
    // nodes 0..m are points of a, m..2m points of b
    let mut uf = UnionFind::new(2 * m);
    for k in 0..m {
        uf.union(k, a.pairing[k]);
        uf.union(m + k, m + b.pairing[k]);
    }
    for k in n..m {
        // top of a at column 2n-1-k meets bottom of b at the same column
        uf.union(k, m + (m - 1 - k));
    }
    let outer = |k: usize| if k < n { k } else { m + k };
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    let mut p = vec![0; m];
    for k in 0..m {
        let r = uf.find(outer(k));
        if let Some(j) = owner.insert(r, k) {
            p[k] = j;
            p[j] = k;
        }
    }
    let mut roots = std::collections::BTreeSet::new();
    for x in 0..2 * m {
        roots.insert(uf.find(x));
    }
    let loops = roots.len() - n;
    Ok((TLDiagram { pairing: p }, loops))
}

/// All non-crossing matchings on `2n` points, with point 0 paired first to
/// point 1, then 3, 5, ... and the same order applied recursively.
pub fn all_diagrams(n: usize) -> Vec<TLDiagram> {
    let pts: Vec<usize> = (0..2 * n).collect();
    matchings(&pts)
        .into_iter()
        .map(|pairs| {
            let mut p = vec![0; 2 * n];
            for (a, b) in pairs {
                p[a] = b;
                p[b] = a;
            }
            TLDiagram { pairing: p }
        })
        .collect()
}

fn matchings(pts: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if pts.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for j in (1..pts.len()).step_by(2) {
        let inner = matchings(&pts[1..j]);
        let outer = matchings(&pts[j + 1..]);
        for i in &inner {
            for o in &outer {
                let mut v = vec![(pts[0], pts[j])];
                v.extend_from_slice(i);
                v.extend_from_slice(o);
                out.push(v);
            }
        }
    }
    out
}

pub fn catalan(n: usize) -> u64 {
    let mut c = 1u64;
    for k in 0..n as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// `[0], [1], ..., [n]` from `[k+1] = delta [k] - [k-1]`.
pub fn quantum_integers(n: usize, delta: &Scalar) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(), Scalar::one()];
    while v.len() <= n {
        let k = v.len();
        let next = &(delta * &v[k - 1]) - &v[k - 2];
        v.push(next);
    }
    v.truncate(n + 1);
    v
}

pub fn quantum_integer(n: usize, delta: &Scalar) -> Scalar {
    quantum_integers(n, delta).pop().unwrap()
}

/// A linear combination of diagrams with a common strand count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TLElement {
    n: usize,
    terms: BTreeMap<TLDiagram, Scalar>,
}

impl TLElement {
    pub fn zero(n: usize) -> Self {
        TLElement { n, terms: BTreeMap::new() }
    }

    pub fn diagram(d: TLDiagram) -> Self {
        let n = d.n();
        TLElement { n, terms: BTreeMap::from([(d, Scalar::one())]) }
    }

    pub fn identity(n: usize) -> Self {
        TLElement::diagram(TLDiagram::identity(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<TLDiagram, Scalar> {
        &self.terms
    }

    pub fn coeff(&self, d: &TLDiagram) -> Scalar {
        self.terms.get(d).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, d: TLDiagram, c: &Scalar) {
        assert_eq!(d.n(), self.n);
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(d).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, o: &TLElement) -> TLElement {
        let mut out = self.clone();
        for (d, c) in &o.terms {
            out.add_term(d.clone(), c);
        }
        out
    }

    pub fn sub(&self, o: &TLElement) -> TLElement {
        self.add(&o.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> TLElement {
        let terms = self.terms.iter().map(|(d, c)| (d.clone(), c * s)).filter(|(_, c)| !c.is_zero()).collect();
        TLElement { n: self.n, terms }
    }

    /// `y` stacked on top of `x`, each closed loop worth `delta`.
    pub fn multiply(&self, y: &TLElement, delta: &Scalar) -> Result<TLElement, TlError> {
        if self.n != y.n {
            return Err(TlError::SizeMismatch(self.n, y.n));
        }
        let mut out = TLElement::zero(self.n);
        let mut powers = vec![Scalar::one()];
        for (a, ca) in &self.terms {
            for (b, cb) in &y.terms {
                let (d, loops) = compose(a, b)?;
                while powers.len() <= loops {
                    let next = powers.last().unwrap() * delta;
                    powers.push(next);
                }
                out.add_term(d, &(&(ca * cb) * &powers[loops]));
            }
        }
        Ok(out)
    }

    /// Conjugate-linear reflection.
    pub fn adjoint(&self) -> TLElement {
        let terms = self.terms.iter().map(|(d, c)| (d.adjoint(), c.conj())).collect();
        TLElement { n: self.n, terms }
    }

    pub fn rotate(&self) -> TLElement {
        let terms = self.terms.iter().map(|(d, c)| (d.rotate(), c.clone())).collect();
        TLElement { n: self.n, terms }
    }

    pub fn include(&self) -> TLElement {
        let terms = self.terms.iter().map(|(d, c)| (d.include(), c.clone())).collect();
        TLElement { n: self.n + 1, terms }
    }

    /// Sum of coefficients weighted by `delta^loops` of each closed diagram.
    pub fn markov_trace(&self, delta: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for (d, c) in &self.terms {
            let p = delta.pow(d.closure_loops() as i64).expect("nonnegative power");
            acc += &(c * &p);
        }
        acc
    }

    /// One-based pairings with their coefficients.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(d, c)| serde_json::json!({"diagram": d.to_one_based(), "value": c.to_json()}))
            .collect();
        serde_json::json!({"n": self.n, "terms": terms})
    }
}

pub fn markov_trace(x: &TLElement, delta: &Scalar) -> Scalar {
    x.markov_trace(delta)
}

pub fn multiply(x: &TLElement, y: &TLElement, delta: &Scalar) -> Result<TLElement, TlError> {
    x.multiply(y, delta)
}

/// `f_n` by the Wenzl recursion
/// `f_n = f_(n-1) - ([n-1]/[n]) f_(n-1) e_(n-1) f_(n-1)`.
pub fn jones_wenzl(n: usize, delta: &Scalar) -> Result<TLElement, TlError> {
    let q = quantum_integers(n.max(1), delta);
    for (k, v) in q.iter().enumerate().skip(1) {
        if !v.is_certainly_nonzero() {
            return Err(TlError::VanishingQuantumInteger(k));
        }
    }
    let mut f = TLElement::identity(n.min(1));
    for k in 2..=n {
        let g = f.include();
        let e = TLElement::diagram(TLDiagram::e(k, k - 1));
        let geg = g.multiply(&e, delta)?.multiply(&g, delta)?;
        let ratio = q[k - 1].checked_div(&q[k]).map_err(|_| TlError::VanishingQuantumInteger(k))?;
        f = g.sub(&geg.scale(&ratio));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn haagerup_delta() -> Scalar {
        let r13 = Scalar::int(13).exact_sqrt_or_adjoin(3).unwrap();
        let d2 = &(&Scalar::int(5) + &r13) * &Scalar::ratio(1, 2);
        d2.exact_sqrt_or_adjoin(3).unwrap()
    }

    #[test]
    fn catalan_counts() {
        for n in 0..=8 {
            assert_eq!(all_diagrams(n).len() as u64, catalan(n));
        }
        assert_eq!(all_diagrams(4).len(), 14);
    }

    #[test]
    fn diagrams_are_valid_and_distinct() {
        let ds = all_diagrams(5);
        for d in &ds {
            assert!(TLDiagram::new(d.pairing.clone()).is_ok());
        }
        let set: std::collections::BTreeSet<_> = ds.iter().collect();
        assert_eq!(set.len(), ds.len());
    }

    #[test]
    fn crossing_rejected() {
        assert!(TLDiagram::new(vec![2, 3, 0, 1]).is_err());
        assert!(TLDiagram::new(vec![1, 0, 3, 2]).is_ok());
    }

    #[test]
    fn identity_is_a_unit() {
        for d in all_diagrams(4) {
            assert_eq!(compose(&TLDiagram::identity(4), &d).unwrap(), (d.clone(), 0));
            assert_eq!(compose(&d, &TLDiagram::identity(4)).unwrap(), (d.clone(), 0));
        }
    }

    #[test]
    fn generator_relations() {
        let e = TLDiagram::e(2, 1);
        assert_eq!(compose(&e, &e).unwrap(), (e.clone(), 1));
        let (e1, e2) = (TLDiagram::e(3, 1), TLDiagram::e(3, 2));
        let (x, l1) = compose(&e1, &e2).unwrap();
        let (y, l2) = compose(&x, &e1).unwrap();
        assert_eq!((y, l1 + l2), (e1, 0));
    }

    #[test]
    fn small_traces() {
        let d = Scalar::int(3);
        assert_eq!(TLElement::identity(0).markov_trace(&d), Scalar::one());
        assert_eq!(TLElement::identity(1).markov_trace(&d), d);
        assert_eq!(TLElement::diagram(TLDiagram::e(2, 1)).markov_trace(&d), d);
    }

    #[test]
    fn f2_and_annihilation() {
        let d = Scalar::int(3);
        let f2 = jones_wenzl(2, &d).unwrap();
        let mut expect = TLElement::identity(2);
        expect.add_term(TLDiagram::e(2, 1), &Scalar::ratio(-1, 3));
        assert_eq!(f2, expect);
        assert!(f2.multiply(&TLElement::diagram(TLDiagram::e(2, 1)), &d).unwrap().is_zero());
    }

    #[test]
    fn jones_wenzl_at_haagerup_delta() {
        let d = haagerup_delta();
        let q = quantum_integers(7, &d);
        for n in 1..=6 {
            let f = jones_wenzl(n, &d).unwrap();
            assert_eq!(f.markov_trace(&d), q[n + 1], "trace f_{n}");
            if n <= 4 {
                assert_eq!(f.multiply(&f, &d).unwrap(), f);
                assert_eq!(f.adjoint(), f);
                for i in 1..n {
                    let e = TLElement::diagram(TLDiagram::e(n, i));
                    assert!(e.multiply(&f, &d).unwrap().is_zero());
                    assert!(f.multiply(&e, &d).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn rotation_has_order_n() {
        for d in all_diagrams(4) {
            let mut r = d.clone();
            for _ in 0..4 {
                r = r.rotate();
            }
            assert_eq!(r, d);
        }
    }

    #[test]
    fn serialization_round_trip() {
        for d in all_diagrams(3) {
            assert_eq!(TLDiagram::from_one_based(&d.to_one_based()).unwrap(), d);
        }
    }
}
