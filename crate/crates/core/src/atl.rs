//! Annular Temperley-Lieb structure inside a graph planar algebra.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::gpa::{Gpa, GpaElement, GpaError};
use crate::graph::Shading;
use crate::linalg::{inverse, nullspace, LinalgError, Matrix, Poly, SparseEchelon};
use crate::scalar::{Scalar, Sign, MAX_PRECISION};
use crate::tl::all_diagrams;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtlError {
    #[error("source element is not killed by every cap")]
    NotLowWeight,
    #[error("Gram matrix is singular")]
    SingularGram,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty family")]
    Empty,
    #[error(transparent)]
    Gpa(#[from] GpaError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Elements of `P_n` killed by every cap and orthogonal to Temperley-Lieb.
///
/// The basis is in reduced echelon form over the loop coordinates: basis
/// vector `k` is 1 at loop `coords[k]` and 0 at the other `coords`, so the
/// coordinates of a member are read off at `coords`.
#[derive(Clone, Debug)]
pub struct LowWeightSpace {
    pub n: usize,
    pub shading: Shading,
    pub basis: Vec<GpaElement>,
    pub coords: Vec<usize>,
}

fn constraint_rows(ctx: &Arc<Gpa>, n: usize, shading: Shading) -> Result<Vec<Vec<(usize, Scalar)>>, AtlError> {
    let mut rows: Vec<Vec<(usize, Scalar)>> = Vec::new();
    for i in 1..=2 * n {
        let mut by_target: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
        for (src, dst, f) in ctx.cap_map(n, shading, i)? {
            by_target.entry(dst).or_default().push((src, f));
        }
        rows.extend(by_target.into_values());
    }
    let w = ctx.loop_weights(n, shading);
    // orthogonality to TL: <x, d> = sum_k x_k d_k w_k is linear in x
    for d in all_diagrams(n) {
        let e = ctx.tl_embed(&d, shading);
        rows.push(e.entries().iter().map(|(k, v)| (*k, &v.conj() * &w[*k])).collect());
    }
    Ok(rows)
}

impl LowWeightSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `x` in the basis, assuming `x` lies in the space.
    pub fn coordinates(&self, x: &GpaElement) -> Vec<Scalar> {
        self.coords.iter().map(|&c| x.get(c)).collect()
    }

    pub fn contains(&self, x: &GpaElement) -> bool {
        let c = self.coordinates(x);
        let mut y = x.clone();
        for (b, s) in self.basis.iter().zip(&c) {
            y = y.sub(&b.scale(s));
        }
        y.is_zero()
    }

    pub fn combine(&self, coeffs: &[Scalar]) -> GpaElement {
        let ctx = self.basis[0].ctx().clone();
        let mut out = ctx.zero(self.n, self.shading);
        for (b, c) in self.basis.iter().zip(coeffs) {
            if !c.is_zero() {
                out = out.add(&b.scale(c));
            }
        }
        out
    }

    /// Matrix of the rotation in this basis (column `j` holds `rho(b_j)`).
    pub fn rotation_matrix(&self) -> Matrix {
        let k = self.dim();
        let mut m = Matrix::zeros(k, k);
        for (j, b) in self.basis.iter().enumerate() {
            let r = b.rotate();
            for (i, v) in self.coordinates(&r).into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }
}

/// Nullspace of the stacked cap maps and the TL-orthogonality functionals.
pub fn low_weight_space(ctx: &Arc<Gpa>, n: usize, shading: Shading) -> Result<LowWeightSpace, AtlError> {
    let sp = ctx.space(n, shading);
    let mut e = SparseEchelon::new(sp.len());
    for row in constraint_rows(ctx, n, shading)? {
        e.insert(row);
    }
    let pivots: HashSet<usize> = e.pivots().collect();
    let coords: Vec<usize> = (0..sp.len()).filter(|c| !pivots.contains(c)).collect();
    let basis = e.nullspace().into_iter().map(|v| ctx.from_entries(n, shading, v)).collect();
    Ok(LowWeightSpace { n, shading, basis, coords })
}

/// Independent oracle for `dim low_weight_space`: the number of loops minus
/// the rank of the constraint matrix, with the rank certified by interval
/// elimination at `bits` precision.
pub fn low_weight_dimension_interval(ctx: &Arc<Gpa>, n: usize, shading: Shading, bits: u32) -> Result<usize, AtlError> {
    let sp = ctx.space(n, shading);
    let mut e = SparseEchelon::new(sp.len());
    for row in constraint_rows(ctx, n, shading)? {
        e.insert(row.into_iter().map(|(c, v)| (c, Scalar::Interval(v.to_interval(bits)))).collect());
    }
    Ok(sp.len() - e.rank())
}

/// Invariant subspace of the rotation belonging to the primitive roots of
/// unity of one order `d`. For `d <= 2` the eigenvalue itself is exact;
/// otherwise the subspace is a sum of invariant 2-planes on which the
/// rotation acts by angles `2 pi k / d` with `gcd(k, d) = 1`.
#[derive(Clone, Debug)]
pub struct RotationEigenspace {
    pub order: usize,
    pub eigenvalue: Option<Scalar>,
    pub basis: Vec<GpaElement>,
    /// Coordinates of `basis` in the low-weight basis.
    pub coords: Vec<Vec<Scalar>>,
}

impl RotationEigenspace {
    pub fn label(&self) -> String {
        match self.order {
            1 => "1".into(),
            2 => "-1".into(),
            d => format!("primitive {d}th roots of unity"),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// `Phi_d` by dividing `x^d - 1` by the lower cyclotomic factors.
pub fn cyclotomic(d: usize) -> Poly {
    let mut c = vec![0i64; d + 1];
    c[0] = -1;
    c[d] = 1;
    let mut p = Poly::from_ints(&c);
    for e in 1..d {
        if d % e == 0 {
            p = p.div_rem(&cyclotomic(e)).0;
        }
    }
    p
}

/// Splits the space by the orders of the rotation eigenvalues, using kernels
/// of `Phi_d(rho)` for each divisor `d` of `n`.
pub fn rotation_eigenspaces(space: &LowWeightSpace) -> Result<Vec<RotationEigenspace>, AtlError> {
    if space.dim() == 0 {
        return Ok(Vec::new());
    }
    let m = space.rotation_matrix();
    let mut out = Vec::new();
    for d in (1..=space.n).filter(|d| space.n % d == 0) {
        let ker = nullspace(&cyclotomic(d).eval_matrix(&m)?)?;
        if ker.is_empty() {
            continue;
        }
        let basis = ker.iter().map(|c| space.combine(c)).collect();
        let eigenvalue = match d {
            1 => Some(Scalar::one()),
            2 => Some(Scalar::int(-1)),
            _ => None,
        };
        out.push(RotationEigenspace { order: d, eigenvalue, basis, coords: ker });
    }
    Ok(out)
}

/// One step of an annular word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnnularStep {
    Cup(usize),
    Rotate,
}

#[derive(Clone, Debug)]
pub struct AnnularFamily {
    pub source: GpaElement,
    pub images: Vec<(Vec<AnnularStep>, GpaElement)>,
}

impl AnnularFamily {
    pub fn elements(&self) -> Vec<GpaElement> {
        self.images.iter().map(|(_, e)| e.clone()).collect()
    }
}

pub fn apply_word(x: &GpaElement, word: &[AnnularStep]) -> Result<GpaElement, GpaError> {
    let mut y = x.clone();
    for s in word {
        y = match s {
            AnnularStep::Cup(i) => y.cup(*i)?,
            AnnularStep::Rotate => y.rotate(),
        };
    }
    Ok(y)
}

/// Label of one outer boundary point of an annular tangle around the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Point {
    Source(usize),
    Arc(usize),
}

/// The boundary data of an annular tangle, read from the base point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Descriptor(Vec<Point>);

impl Descriptor {
    fn cup(&self, i: usize, fresh: usize) -> Descriptor {
        let mut v = self.0.clone();
        v.insert(i - 1, Point::Arc(fresh));
        v.insert(i, Point::Arc(fresh));
        Descriptor(v)
    }

    fn rotate(&self) -> Descriptor {
        let mut v = self.0.clone();
        if !v.is_empty() {
            v.rotate_left(2);
        }
        Descriptor(v)
    }

    /// Arc ids renumbered by first appearance; when the source is a rotation
    /// eigenvector, source labels are shifted by an even amount so the first
    /// one is 0 or 1.
    fn canonical(&self, m0: usize, eigen: bool) -> Descriptor {
        let mut ids = HashMap::new();
        let shift = if eigen {
            self.0.iter().find_map(|p| if let Point::Source(j) = p { Some(j - j % 2) } else { None }).unwrap_or(0)
        } else {
            0
        };
        let v = self
            .0
            .iter()
            .map(|p| match p {
                Point::Source(j) => Point::Source((j + 2 * m0 - shift) % (2 * m0).max(1)),
                Point::Arc(a) => {
                    let next = ids.len();
                    Point::Arc(*ids.entry(*a).or_insert(next))
                }
            })
            .collect();
        Descriptor(v)
    }
}

/// No cap has a certainly nonzero entry (for exact data: every cap is zero).
fn is_low_weight(x: &GpaElement) -> Result<bool, GpaError> {
    for i in 1..=2 * x.n() {
        if x.cap(i)?.entries().values().any(|v| v.is_certainly_nonzero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `rho(x)` is a scalar multiple of `x`.
pub fn is_rotation_eigenvector(x: &GpaElement) -> bool {
    let r = x.rotate();
    let Some((k, v)) = x.entries().iter().next() else { return true };
    let Ok(w) = r.get(*k).checked_div(v) else { return false };
    r == x.scale(&w)
}

/// Images of a low-weight `source` in `P_target` under annular tangles,
/// enumerated as words of cups at shading-preserving positions followed by
/// rotations, deduplicated by their boundary data and filtered to an
/// independent family.
pub fn annular_consequences(source: &GpaElement, target_n: usize) -> Result<AnnularFamily, AtlError> {
    let m0 = source.n();
    if target_n < m0 {
        return Err(AtlError::ShapeMismatch(format!("target {target_n} below source size {m0}")));
    }
    if !is_low_weight(source)? {
        return Err(AtlError::NotLowWeight);
    }
    let eigen = is_rotation_eigenvector(source);
    let start = Descriptor((0..2 * m0).map(Point::Source).collect());
    let mut seen: HashSet<Descriptor> = HashSet::new();
    seen.insert(start.canonical(m0, eigen));
    let mut level: Vec<(Vec<AnnularStep>, Descriptor, GpaElement)> = vec![(Vec::new(), start.clone(), source.clone())];
    let mut rots = vec![(Vec::new(), start, source.clone())];
    // rotations at the source level
    if !eigen {
        let (w0, d0, x0) = rots[0].clone();
        let (mut w, mut d, mut x) = (w0, d0, x0);
        for _ in 1..m0.max(1) {
            w.push(AnnularStep::Rotate);
            d = d.rotate();
            x = x.rotate();
            if seen.insert(d.canonical(m0, eigen)) {
                rots.push((w.clone(), d.clone(), x.clone()));
            }
        }
        level = rots;
    }
    let mut fresh = 0;
    for m in m0..target_n {
        let mut next = Vec::new();
        for (w, d, x) in &level {
            for i in 1..=2 * m + 1 {
                let di = d.cup(i, fresh);
                fresh += 1;
                let mut wi = w.clone();
                wi.push(AnnularStep::Cup(i));
                let mut pending: Vec<(Vec<AnnularStep>, Descriptor, usize)> = Vec::new();
                let (mut wr, mut dr) = (wi, di);
                for r in 0..=m {
                    if seen.insert(dr.canonical(m0, eigen)) {
                        pending.push((wr.clone(), dr.clone(), r));
                    }
                    wr.push(AnnularStep::Rotate);
                    dr = dr.rotate();
                }
                if pending.is_empty() {
                    continue;
                }
                let mut y = x.cup(i)?;
                let mut r_at = 0;
                for (wp, dp, r) in pending {
                    while r_at < r {
                        y = y.rotate();
                        r_at += 1;
                    }
                    next.push((wp, dp, y.clone()));
                }
            }
        }
        level = next;
    }
    let images = independent_subset(level.into_iter().map(|(w, _, x)| (w, x)).collect());
    Ok(AnnularFamily { source: source.clone(), images })
}

/// Keeps a maximal independent subfamily, in order. Independence is first
/// tested on the loops at the lowest-index start vertex and only falls back
/// to all coordinates for vectors that look dependent there.
pub fn independent_subset<T>(items: Vec<(T, GpaElement)>) -> Vec<(T, GpaElement)> {
    let Some((_, first)) = items.first() else { return Vec::new() };
    let sp = first.space().clone();
    let local = local_coordinates(first);
    let pos: HashMap<usize, usize> = local.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut small = SparseEchelon::new(local.len());
    let mut full = SparseEchelon::new(sp.len());
    let mut kept = Vec::new();
    let mut deferred = Vec::new();
    for (t, x) in items {
        let row: Vec<(usize, Scalar)> = x.entries().iter().filter_map(|(k, v)| pos.get(k).map(|p| (*p, v.clone()))).collect();
        if small.insert(row).is_some() {
            kept.push((t, x));
        } else {
            deferred.push((t, x));
        }
    }
    if deferred.is_empty() {
        return kept;
    }
    for (_, x) in &kept {
        full.insert(x.entries().iter().map(|(k, v)| (*k, v.clone())).collect());
    }
    for (t, x) in deferred {
        if full.insert(x.entries().iter().map(|(k, v)| (*k, v.clone())).collect()).is_some() {
            kept.push((t, x));
        }
    }
    kept
}

/// Loop indices starting at the first vertex of the element's shading.
fn local_coordinates(x: &GpaElement) -> Vec<usize> {
    let sp = x.space();
    let Some(first) = sp.loops().first() else { return Vec::new() };
    let s0 = first.start;
    sp.loops().iter().enumerate().take_while(|(_, l)| l.start == s0).map(|(i, _)| i).collect()
}

/// A family together with its Gram matrix, the inverse, and the dual family
/// `duals[j] = sum_i (G^-1)_(ji) vectors[i]`, so that `<v_k, dual_j> = [k = j]`.
#[derive(Clone, Debug)]
pub struct DualBasisData {
    pub vectors: Vec<GpaElement>,
    pub gram: Matrix,
    pub gram_inverse: Matrix,
    pub duals: Vec<GpaElement>,
}

pub fn gram_matrix(vectors: &[GpaElement]) -> Result<Matrix, AtlError> {
    let k = vectors.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = vectors[i].inner_product(&vectors[j])?;
            if i != j {
                g.set(j, i, v.conj());
            }
            g.set(i, j, v);
        }
    }
    Ok(g)
}

pub fn dual_basis(vectors: &[GpaElement]) -> Result<DualBasisData, AtlError> {
    if vectors.is_empty() {
        return Err(AtlError::Empty);
    }
    let gram = gram_matrix(vectors)?;
    let gram_inverse = inverse(&gram).map_err(|e| match e {
        LinalgError::Singular | LinalgError::UncertifiableDeterminant => AtlError::SingularGram,
        e => AtlError::Linalg(e),
    })?;
    let ctx = vectors[0].ctx().clone();
    let (n, sh) = (vectors[0].n(), vectors[0].shading());
    let mut duals = Vec::with_capacity(vectors.len());
    for j in 0..vectors.len() {
        let mut d = ctx.zero(n, sh);
        for (i, v) in vectors.iter().enumerate() {
            let c = gram_inverse.get(j, i);
            if !c.is_zero() {
                d = d.add(&v.scale(c));
            }
        }
        duals.push(d);
    }
    Ok(DualBasisData { vectors: vectors.to_vec(), gram, gram_inverse, duals })
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub coefficients: Vec<Scalar>,
    pub residual: GpaElement,
}

/// Orthogonal projection: `c_i = <x, dual_i>`, residual `x - sum c_i v_i`.
pub fn project_onto_span(x: &GpaElement, basis: &DualBasisData) -> Result<Projection, AtlError> {
    let mut coefficients = Vec::with_capacity(basis.vectors.len());
    let mut residual = x.clone();
    for (v, d) in basis.vectors.iter().zip(&basis.duals) {
        let c = x.inner_product(d)?;
        if !c.is_zero() {
            residual = residual.sub(&v.scale(&c));
        }
        coefficients.push(c);
    }
    Ok(Projection { coefficients, residual })
}

/// Span membership by elimination over loop coordinates, for families too
/// large for an exact Gram inverse. Coefficients are solved on the loops at
/// one start vertex (more start vertices are added if those do not separate
/// the family) and then checked on every loop.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    vectors: Vec<GpaElement>,
    coords: Vec<usize>,
    echelon: SparseEchelon,
}

impl SpanSolver {
    /// Fails with `SingularGram` when the family is dependent.
    pub fn new(vectors: Vec<GpaElement>) -> Result<Self, AtlError> {
        let first = vectors.first().ok_or(AtlError::Empty)?;
        let sp = first.space().clone();
        let k = vectors.len();
        let mut starts: Vec<usize> = Vec::new();
        for l in sp.loops() {
            if starts.last() != Some(&l.start) {
                starts.push(l.start);
            }
        }
        for take in 1..=starts.len() {
            let coords: Vec<usize> = sp.loops().iter().enumerate().filter(|(_, l)| starts[..take].contains(&l.start)).map(|(i, _)| i).collect();
            let pos: HashMap<usize, usize> = coords.iter().enumerate().map(|(i, c)| (*c, i)).collect();
            // columns 0..k are tags, k.. are coordinates, so pivots land on coordinates
            let mut e = SparseEchelon::new(k + coords.len());
            let mut full_rank = true;
            for (i, v) in vectors.iter().enumerate() {
                let mut row = vec![(i, Scalar::one())];
                row.extend(v.entries().iter().filter_map(|(c, s)| pos.get(c).map(|p| (k + p, s.clone()))));
                match e.insert(row) {
                    Some(p) if p >= k => {}
                    _ => {
                        full_rank = false;
                        break;
                    }
                }
            }
            if full_rank {
                return Ok(SpanSolver { vectors, coords, echelon: e });
            }
        }
        Err(AtlError::SingularGram)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Coefficients matching `x` on the solver's coordinates, and the exact
    /// residual `x - sum c_i v_i` over all loops.
    pub fn solve(&self, x: &GpaElement) -> Result<Projection, AtlError> {
        let k = self.vectors.len();
        let pos: HashMap<usize, usize> = self.coords.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let row: Vec<(usize, Scalar)> = x.entries().iter().filter_map(|(c, s)| pos.get(c).map(|p| (k + p, s.clone()))).collect();
        let red = self.echelon.reduce(row.iter().map(|(c, v)| (*c, v)));
        let mut coefficients = vec![Scalar::zero(); k];
        for (c, v) in &red {
            if *c < k {
                coefficients[*c] = -v;
            }
        }
        let mut residual = x.clone();
        for (v, c) in self.vectors.iter().zip(&coefficients) {
            if !c.is_zero() {
                residual = residual.sub(&v.scale(c));
            }
        }
        Ok(Projection { coefficients, residual })
    }
}

/// Certified positivity of a real scalar.
pub fn certainly_positive(s: &Scalar) -> bool {
    matches!(s.certified_sign(MAX_PRECISION), Ok(Sign::Positive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{haagerup_graph, BipartiteGraph};

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic(1), Poly::from_ints(&[-1, 1]));
        assert_eq!(cyclotomic(2), Poly::from_ints(&[1, 1]));
        assert_eq!(cyclotomic(4), Poly::from_ints(&[1, 0, 1]));
        assert_eq!(cyclotomic(6), Poly::from_ints(&[1, -1, 1]));
    }

    #[test]
    fn single_edge_has_no_low_weight() {
        let ctx = Gpa::new(BipartiteGraph::path(2)).unwrap();
        for n in 1..=4 {
            assert_eq!(low_weight_space(&ctx, n, Shading::Plus).unwrap().dim(), 0);
        }
    }

    #[test]
    fn haagerup_low_weight_dimensions() {
        let ctx = Gpa::new(haagerup_graph()).unwrap();
        let dims: Vec<usize> = (1..=4).map(|n| low_weight_space(&ctx, n, Shading::Plus).unwrap().dim()).collect();
        assert_eq!(dims, [0, 1, 5, 13]);
        assert_eq!(low_weight_dimension_interval(&ctx, 4, Shading::Plus, 512).unwrap(), 13);
    }

    #[test]
    fn haagerup_rotation_spectrum_at_four() {
        let ctx = Gpa::new(haagerup_graph()).unwrap();
        let lw = low_weight_space(&ctx, 4, Shading::Plus).unwrap();
        let m = lw.rotation_matrix();
        assert_eq!(m.pow(4).unwrap(), Matrix::identity(13));
        let sp: Vec<(usize, usize)> = rotation_eigenspaces(&lw).unwrap().iter().map(|e| (e.order, e.dim())).collect();
        assert_eq!(sp, [(1, 3), (2, 4), (4, 6)]);
        for b in &lw.basis {
            assert!(is_low_weight(b).unwrap());
        }
    }

    #[test]
    fn dual_basis_single_and_projection() {
        let ctx = Gpa::new(haagerup_graph()).unwrap();
        let u = ctx.unit(2, Shading::Plus);
        let db = dual_basis(std::slice::from_ref(&u)).unwrap();
        let uu = u.inner_product(&u).unwrap();
        assert_eq!(db.duals[0], u.scale(&uu.inv().unwrap()));
        let p = project_onto_span(&u.scale(&Scalar::int(3)), &db).unwrap();
        assert!(p.residual.is_zero());
        assert_eq!(p.coefficients, vec![Scalar::int(3)]);
    }

    #[test]
    fn span_solver_matches_dual_basis() {
        let ctx = Gpa::new(haagerup_graph()).unwrap();
        let tl: Vec<GpaElement> = all_diagrams(3).iter().map(|d| ctx.tl_embed(d, Shading::Plus)).collect();
        let x = tl[1].scale(&Scalar::int(2)).add(&tl[4].scale(ctx.delta()));
        let s = SpanSolver::new(tl.clone()).unwrap();
        let p = s.solve(&x).unwrap();
        assert!(p.residual.is_zero());
        let db = dual_basis(&tl).unwrap();
        assert_eq!(project_onto_span(&x, &db).unwrap().coefficients, p.coefficients);
    }
}
