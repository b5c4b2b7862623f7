//! The Haagerup generator `T` and the checks run against it.

pub mod expr;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::{json, Value};
use thiserror::Error;

use crate::atl::{annular_consequences, dual_basis, low_weight_space, project_onto_span, rotation_eigenspaces, AnnularStep, AtlError, SpanSolver};
use crate::gpa::{Gpa, GpaElement, GpaError};
use crate::graph::{count_loops, BipartiteGraph, GraphError, LoopPath, Shading};
use crate::linalg::SparseEchelon;
use crate::scalar::{Dyadic, Scalar, ScalarError, Sign, DEFAULT_MAX_DEPTH, MAX_PRECISION};
use crate::tl::{all_diagrams, catalan, quantum_integer, TLDiagram, TlError};

pub use expr::{Expr, GeneratorSpec, Manifest, RelationSpec, Rhs, SpanPart};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HaagerupError {
    #[error("no candidate: {0}")]
    NoCandidate(String),
    #[error("ambiguous candidate: {0} free parameters remain")]
    AmbiguousCandidate(usize),
    #[error("relation {id}: nonzero residual ({detail})")]
    NonzeroResidual { id: String, detail: String },
    #[error("relation {id}: residual not certified at the current precision")]
    Undecided { id: String },
    #[error("manifest has no relations")]
    ManifestMissing,
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Gpa(#[from] GpaError),
    #[error(transparent)]
    Atl(#[from] AtlError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Tl(#[from] TlError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Residuals below `2^-60` certify zero for interval data.
pub const RESIDUAL_BITS: i64 = 60;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certification {
    ExactZero,
    IntervalBounded(Dyadic),
    Nonzero,
    Undecided(Dyadic),
}

impl Certification {
    pub fn passed(&self) -> bool {
        matches!(self, Certification::ExactZero | Certification::IntervalBounded(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            Certification::ExactZero => json!({"kind": "exact-zero"}),
            Certification::IntervalBounded(b) => json!({"kind": "interval-bounded", "bound": b.to_hex()}),
            Certification::Nonzero => json!({"kind": "nonzero"}),
            Certification::Undecided(b) => json!({"kind": "undecided", "bound": b.to_hex()}),
        }
    }

    fn describe(&self) -> String {
        match self {
            Certification::ExactZero => "exact zero".into(),
            Certification::IntervalBounded(b) => format!("|r| <= {}", b.to_f64()),
            Certification::Nonzero => "certified nonzero".into(),
            Certification::Undecided(b) => format!("undecided, |r| <= {}", b.to_f64()),
        }
    }
}

fn threshold() -> Dyadic {
    Dyadic::new(BigInt::from(1), -RESIDUAL_BITS)
}

fn certify_scalars<'a>(vals: impl IntoIterator<Item = &'a Scalar>) -> Certification {
    let mut bound = Dyadic::zero();
    let mut exact = true;
    for v in vals {
        if v.is_exact() {
            if !v.is_zero() {
                return Certification::Nonzero;
            }
            continue;
        }
        exact = false;
        let e = v.enclosure(0);
        if !e.contains_zero() {
            return Certification::Nonzero;
        }
        let b = e.abs_upper();
        if b > bound {
            bound = b;
        }
    }
    if exact {
        Certification::ExactZero
    } else if bound <= threshold() {
        Certification::IntervalBounded(bound)
    } else {
        Certification::Undecided(bound)
    }
}

/// One verified identity: the coefficients found for the right-hand side,
/// `<r, r>` for the residual `r`, and how `r = 0` was certified.
#[derive(Clone, Debug)]
pub struct RelationReport {
    pub id: String,
    pub coefficients: Vec<(String, Scalar)>,
    /// Squared norm `<r, r>` of the residual.
    pub residual_norm: Scalar,
    pub certification: Certification,
    /// Derived quantities recorded alongside the relation.
    pub extras: Vec<(String, Scalar)>,
}

impl RelationReport {
    fn for_element(id: &str, r: &GpaElement) -> Result<RelationReport, HaagerupError> {
        Ok(RelationReport {
            id: id.into(),
            coefficients: Vec::new(),
            residual_norm: r.inner_product(r)?,
            certification: certify_scalars(r.entries().values()),
            extras: Vec::new(),
        })
    }

    fn for_scalar(id: &str, r: &Scalar) -> RelationReport {
        RelationReport {
            id: id.into(),
            coefficients: Vec::new(),
            residual_norm: r * &r.conj(),
            certification: certify_scalars([r]),
            extras: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.certification.passed()
    }

    pub fn to_json(&self) -> Value {
        let pairs = |v: &[(String, Scalar)]| Value::Array(v.iter().map(|(k, s)| json!({"term": k, "value": s.to_json()})).collect());
        json!({
            "id": self.id,
            "certification": self.certification.to_json(),
            "residual_norm": self.residual_norm.to_json(),
            "coefficients": pairs(&self.coefficients),
            "extras": pairs(&self.extras),
        })
    }

    fn fail(&self) -> HaagerupError {
        if let Certification::Undecided(_) = self.certification {
            return HaagerupError::Undecided { id: self.id.clone() };
        }
        HaagerupError::NonzeroResidual { id: self.id.clone(), detail: self.certification.describe() }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorCandidate {
    pub element: GpaElement,
    pub rotation_eigenvalue: Scalar,
    pub normalization: Scalar,
    pub selection_note: String,
    pub eigenspace_dim: usize,
    pub square: String,
}

impl GeneratorCandidate {
    pub fn to_json(&self) -> Value {
        json!({
            "element": self.element.to_json(),
            "rotation_eigenvalue": self.rotation_eigenvalue.to_json(),
            "normalization": self.normalization.to_json(),
            "selection_note": self.selection_note,
            "eigenspace_dim": self.eigenspace_dim,
            "square": self.square,
        })
    }

    /// Same candidate with entry `k` (in entry order) shifted by `amount`.
    pub fn perturbed(&self, k: usize, amount: &Scalar) -> GeneratorCandidate {
        let mut e = self.element.entries().clone();
        let key = *e.keys().nth(k % e.len().max(1)).unwrap_or(&0);
        let v = e.get(&key).cloned().unwrap_or_else(Scalar::zero);
        e.insert(key, &v + amount);
        let x = self.element.ctx().from_entries(self.element.n(), self.element.shading(), e);
        GeneratorCandidate { element: x, ..self.clone() }
    }

    /// Same candidate with entries replaced by enclosures at `bits` precision.
    pub fn to_interval(&self, bits: u32) -> GeneratorCandidate {
        let e: BTreeMap<usize, Scalar> = self.element.entries().iter().map(|(k, v)| (*k, Scalar::Interval(v.to_interval(bits)))).collect();
        let x = self.element.ctx().from_entries(self.element.n(), self.element.shading(), e);
        GeneratorCandidate { element: x, ..self.clone() }
    }
}

/// Signs of the real and imaginary parts of an exact scalar.
fn part_signs(s: &Scalar) -> Result<(Sign, Sign), ScalarError> {
    let c = s.conj();
    let re = (s + &c) * Scalar::ratio(1, 2);
    let re_sign = re.certified_sign(MAX_PRECISION)?;
    let d = s - &c;
    if d.is_zero() {
        return Ok((re_sign, Sign::Zero));
    }
    let mut p = 64;
    while p <= MAX_PRECISION {
        if let Some(im) = d.enclosure(p).im {
            if let Some(sg) = im.sign() {
                return Ok((re_sign, if sg > 0 { Sign::Positive } else { Sign::Negative }));
            }
        }
        p *= 2;
    }
    Err(ScalarError::Undecided(MAX_PRECISION))
}

/// Moves an exact scalar into the tower of `ctx` so later roots extend it.
fn lift(ctx: &Gpa, s: &Scalar) -> Scalar {
    match (s, ctx.tower()) {
        (Scalar::Rational(_), Some(t)) => Scalar::from_tower(s.in_tower(&t)),
        _ => s.clone(),
    }
}

fn lift_to(s: &Scalar, like: &Scalar) -> Scalar {
    match (s, like.tower()) {
        (Scalar::Rational(_), Some(t)) => Scalar::from_tower(s.in_tower(t)),
        _ => s.clone(),
    }
}

fn loop_label(x: &GpaElement, k: usize) -> String {
    let g = x.ctx().graph();
    let l: &LoopPath = &x.space().loops()[k];
    format!("{}:{}", g.vertex_id(l.start), l.labels(g).join(","))
}

/// Roots of `a t^2 + b t + c`, adjoining a square root when needed.
fn quadratic_roots(ctx: &Gpa, a: &Scalar, b: &Scalar, c: &Scalar) -> Result<Vec<Scalar>, HaagerupError> {
    if a.is_zero() {
        if b.is_zero() {
            return Ok(Vec::new());
        }
        return Ok(vec![-(c.checked_div(b)?)]);
    }
    let disc = b * b - Scalar::int(4) * a * c;
    let two_a = Scalar::int(2) * a;
    if disc.is_zero() {
        return Ok(vec![-(b.checked_div(&two_a)?)]);
    }
    let r = lift(ctx, &disc).sqrt_signed(DEFAULT_MAX_DEPTH)?;
    Ok(vec![(&r - b).checked_div(&two_a)?, (-&r - b).checked_div(&two_a)?])
}

/// The element of `P_n` in the rotation eigenspace named by `spec`, with
/// square equal to `spec.square`, fixed up to the remaining sign and complex
/// conjugation by: the first nonzero entry has positive real part (positive
/// imaginary part if it is imaginary), then the first entry with a nonzero
/// imaginary part has positive imaginary part.
pub fn find_generator(ctx: &Arc<Gpa>, spec: &GeneratorSpec) -> Result<GeneratorCandidate, HaagerupError> {
    let shading = Shading::parse(&spec.shading).ok_or_else(|| HaagerupError::Manifest(format!("bad shading {}", spec.shading)))?;
    let order = match spec.eigenvalue {
        1 => 1,
        -1 => 2,
        v => return Err(HaagerupError::Manifest(format!("unsupported eigenvalue {v}"))),
    };
    let lw = low_weight_space(ctx, spec.n, shading)?;
    if lw.dim() == 0 {
        return Err(HaagerupError::NoCandidate(format!("no low-weight vectors at n = {}", spec.n)));
    }
    let eig = rotation_eigenspaces(&lw)?;
    let Some(space) = eig.into_iter().find(|e| e.order == order) else {
        return Err(HaagerupError::NoCandidate(format!("rotation eigenvalue {} does not occur", spec.eigenvalue)));
    };
    let basis = &space.basis;
    let d = basis.len();
    let target = Expr::parse(&spec.square)?.eval(ctx, &HashMap::new())?;
    if target.n() != spec.n || target.shading() != shading {
        return Err(HaagerupError::Manifest("square has the wrong shape".into()));
    }

    // T = sum z_k B_k, so T^2 is linear in w_kl = z_k z_l (k <= l)
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|k| (k..d).map(move |l| (k, l))).collect();
    let mut prods = Vec::with_capacity(pairs.len());
    for &(k, l) in &pairs {
        let kl = basis[k].multiply(&basis[l])?;
        prods.push(if k == l { kl } else { kl.add(&basis[l].multiply(&basis[k])?) });
    }
    // column 0 carries -target so that a solution has a 1 there
    let m = pairs.len();
    let mut rows: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
    for (k, v) in target.entries() {
        rows.entry(*k).or_default().push((0, -v));
    }
    for (u, p) in prods.iter().enumerate() {
        for (k, v) in p.entries() {
            rows.entry(*k).or_default().push((u + 1, v.clone()));
        }
    }
    let mut ech = SparseEchelon::new(m + 1);
    for r in rows.into_values() {
        ech.insert(r);
    }
    let null = ech.nullspace();
    let Some(particular) = null.iter().find(|v| v.get(&0).is_some_and(|s| s.is_one())) else {
        return Err(HaagerupError::NoCandidate("the square cannot be reached in this eigenspace".into()));
    };
    let homogeneous: Vec<_> = null.iter().filter(|v| !v.contains_key(&0)).collect();
    if homogeneous.len() > 1 {
        return Err(HaagerupError::AmbiguousCandidate(homogeneous.len()));
    }
    let coef = |v: &BTreeMap<usize, Scalar>, u: usize| v.get(&(u + 1)).cloned().unwrap_or_else(Scalar::zero);
    let idx = |k: usize, l: usize| pairs.iter().position(|&p| p == (k.min(l), k.max(l))).unwrap();
    let w0: Vec<Scalar> = (0..m).map(|u| coef(particular, u)).collect();
    let w1: Vec<Scalar> = (0..m).map(|u| homogeneous.first().map_or_else(Scalar::zero, |h| coef(h, u))).collect();

    // rank one: every 2x2 minor w_ij w_kl - w_il w_kj vanishes
    let mut ts: Vec<Scalar> = vec![Scalar::zero()];
    if !homogeneous.is_empty() {
        let mut found = None;
        'outer: for i in 0..d {
            for j in 0..d {
                for k in i + 1..d {
                    for l in j + 1..d {
                        let (ij, kl, il, kj) = (idx(i, j), idx(k, l), idx(i, l), idx(k, j));
                        let a = &w1[ij] * &w1[kl] - &w1[il] * &w1[kj];
                        let b = &w0[ij] * &w1[kl] + &w1[ij] * &w0[kl] - &w0[il] * &w1[kj] - &w1[il] * &w0[kj];
                        let c = &w0[ij] * &w0[kl] - &w0[il] * &w0[kj];
                        if !(a.is_zero() && b.is_zero()) {
                            found = Some(quadratic_roots(ctx, &a, &b, &c)?);
                            break 'outer;
                        }
                        if !c.is_zero() {
                            return Err(HaagerupError::NoCandidate("no rank-one solution".into()));
                        }
                    }
                }
            }
        }
        ts = found.ok_or(HaagerupError::AmbiguousCandidate(1))?;
    }

    let mut cands: Vec<GpaElement> = Vec::new();
    for t in &ts {
        let w: Vec<Scalar> = (0..m).map(|u| lift_to(&(&w0[u] + &(t * &w1[u])), t)).collect();
        let Some(k0) = (0..d).find(|&k| !w[idx(k, k)].is_zero()) else { continue };
        let root = match lift(ctx, &w[idx(k0, k0)]).sqrt_signed(DEFAULT_MAX_DEPTH) {
            Ok(r) => r,
            Err(ScalarError::TowerDepthExceeded(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let z: Vec<Scalar> = (0..d).map(|l| w[idx(k0, l)].checked_div(&root)).collect::<Result<_, _>>()?;
        if !pairs.iter().enumerate().all(|(u, &(k, l))| &z[k] * &z[l] == w[u]) {
            continue;
        }
        let mut x = ctx.zero(spec.n, shading);
        for (b, c) in basis.iter().zip(&z) {
            x = x.add(&b.scale(c));
        }
        if x.multiply(&x)? != target {
            continue;
        }
        let first = x.entries().values().next().cloned().unwrap_or_else(Scalar::zero);
        let (re, im) = part_signs(&first)?;
        if re == Sign::Negative || (re == Sign::Zero && im == Sign::Negative) {
            x = x.neg();
        }
        if !cands.contains(&x) {
            cands.push(x);
        }
    }
    let n_sol = cands.len();
    let mut chosen = Vec::new();
    let mut conj_at = None;
    for x in cands {
        let mut pick = true;
        for (k, v) in x.entries() {
            let (_, im) = part_signs(v)?;
            if im != Sign::Zero {
                pick = im == Sign::Positive;
                conj_at = Some(*k);
                break;
            }
        }
        if pick {
            chosen.push(x);
        }
    }
    let x = match chosen.len() {
        0 => return Err(HaagerupError::NoCandidate("no solution in the available tower".into())),
        1 => chosen.pop().unwrap(),
        k => return Err(HaagerupError::AmbiguousCandidate(k)),
    };
    let first = *x.entries().keys().next().expect("nonzero generator");
    let mut note = format!("{n_sol} solution(s) up to sign; sign fixed at loop {}", loop_label(&x, first));
    if let Some(k) = conj_at {
        note += &format!("; conjugate fixed by positive imaginary part at loop {}", loop_label(&x, k));
    }
    Ok(GeneratorCandidate {
        rotation_eigenvalue: Scalar::int(spec.eigenvalue),
        normalization: quantum_integer(spec.normalization, ctx.delta()),
        selection_note: note,
        eigenspace_dim: d,
        square: spec.square.clone(),
        element: x,
    })
}

/// Self-adjointness, the cap kills, the rotation eigenrelation, the square
/// and the normalization, each as its own report.
pub fn verify_generator(c: &GeneratorCandidate) -> Result<Vec<RelationReport>, HaagerupError> {
    let t = &c.element;
    let ctx = t.ctx();
    let mut out = vec![RelationReport::for_element("self-adjoint", &t.adjoint().sub(t))?];
    for i in 1..=2 * t.n() {
        out.push(RelationReport::for_element(&format!("cap-{i}"), &t.cap(i)?)?);
    }
    out.push(RelationReport::for_element("rotation", &t.rotate().sub(&t.scale(&c.rotation_eigenvalue)))?);
    let sq = Expr::parse(&c.square)?.eval(ctx, &HashMap::new())?;
    out.push(RelationReport::for_element("square", &t.multiply(t)?.sub(&sq))?);
    let mut norm = RelationReport::for_scalar("normalization", &(&t.inner_product(t)? - &c.normalization));
    norm.extras.push(("<T,T>".into(), t.inner_product(t)?));
    out.push(norm);
    Ok(out)
}

fn word_label(w: &[AnnularStep]) -> String {
    if w.is_empty() {
        return "T".into();
    }
    let parts: Vec<String> = w
        .iter()
        .map(|s| match s {
            AnnularStep::Cup(i) => format!("cup{i}"),
            AnnularStep::Rotate => "rot".into(),
        })
        .collect();
    parts.join(".")
}

fn tl_label(d: &TLDiagram) -> String {
    let v: Vec<String> = d.to_one_based().iter().map(|x| x.to_string()).collect();
    format!("tl[{}]", v.join(","))
}

/// TL diagrams at the shape of `x`, then annular consequences of each named source.
fn span_family(x: &GpaElement, parts: &[SpanPart], env: &HashMap<String, GpaElement>) -> Result<Vec<(String, GpaElement)>, HaagerupError> {
    let ctx = x.ctx();
    let mut fam = Vec::new();
    for p in parts {
        match p {
            SpanPart::Tl => {
                for d in all_diagrams(x.n()) {
                    fam.push((tl_label(&d), ctx.tl_embed(&d, x.shading())));
                }
            }
            SpanPart::Ann(name) => {
                let src = env.get(name).ok_or_else(|| HaagerupError::Manifest(format!("unknown input {name}")))?;
                for (w, e) in annular_consequences(src, x.n())?.images {
                    if e.shading() == x.shading() {
                        fam.push((format!("{name}:{}", word_label(&w)), e));
                    }
                }
            }
        }
    }
    Ok(fam)
}

/// Largest family size for which the exact Gram inverse is also computed.
pub const GRAM_ROUTE_LIMIT: usize = 60;

/// Expands `x` over `fam` by elimination and, for small families, also by
/// the dual basis. The two coefficient lists must agree.
fn span_report(id: &str, x: &GpaElement, fam: Vec<(String, GpaElement)>) -> Result<RelationReport, HaagerupError> {
    let (labels, vecs): (Vec<String>, Vec<GpaElement>) = fam.into_iter().unzip();
    let solver = SpanSolver::new(vecs.clone())?;
    let p = solver.solve(x)?;
    let mut rep = RelationReport::for_element(id, &p.residual)?;
    if vecs.len() <= GRAM_ROUTE_LIMIT {
        let db = dual_basis(&vecs)?;
        let q = project_onto_span(x, &db)?;
        let agree = certify_scalars(p.coefficients.iter().zip(&q.coefficients).map(|(a, b)| a - b).collect::<Vec<_>>().iter());
        match agree {
            Certification::Undecided(_) => return Err(HaagerupError::Undecided { id: id.into() }),
            Certification::Nonzero => {
                return Err(HaagerupError::NonzeroResidual { id: id.into(), detail: "elimination and dual basis disagree".into() });
            }
            _ => {}
        }
        rep.extras.push(("gram-route-residual".into(), q.residual.inner_product(&q.residual)?));
    }
    rep.coefficients = labels.into_iter().zip(p.coefficients).filter(|(_, c)| !c.is_zero()).collect();
    Ok(rep)
}

/// `T^2` expanded over Temperley-Lieb and the annular consequences of `T`
/// in `P_4`. Records `trace(T^3)` as implied by the coefficients.
pub fn relation_4box(c: &GeneratorCandidate) -> Result<RelationReport, HaagerupError> {
    let t = &c.element;
    let x = t.multiply(t)?;
    let env = HashMap::from([("T".to_string(), t.clone())]);
    let fam = span_family(&x, &[SpanPart::Tl, SpanPart::Ann("T".into())], &env)?;
    let traces: HashMap<String, Scalar> = fam.iter().map(|(k, v)| Ok((k.clone(), t.multiply(v)?.trace()))).collect::<Result<_, GpaError>>()?;
    let mut rep = span_report("four-box", &x, fam)?;
    if !rep.passed() {
        return Err(rep.fail());
    }
    let mut implied = Scalar::zero();
    for (k, v) in &rep.coefficients {
        implied += &(v * &traces[k]);
    }
    rep.extras.push(("trace(T^3) from coefficients".into(), implied));
    Ok(rep)
}

/// Evaluates every manifest relation with `T` bound to the candidate.
pub fn relations_56(c: &GeneratorCandidate, manifest: &Manifest) -> Result<Vec<RelationReport>, HaagerupError> {
    if manifest.relations.is_empty() {
        return Err(HaagerupError::ManifestMissing);
    }
    let ctx = c.element.ctx();
    let mut env = HashMap::from([("T".to_string(), c.element.clone())]);
    for d in &manifest.definitions {
        let v = Expr::parse(&d.expr)?.eval(ctx, &env)?;
        env.insert(d.name.clone(), v);
    }
    let mut out = Vec::new();
    for r in &manifest.relations {
        let lhs = Expr::parse(&r.lhs)?.eval(ctx, &env)?;
        let rep = match Rhs::parse(&r.rhs)? {
            Rhs::Expr(e) => RelationReport::for_element(&r.id, &lhs.sub(&e.eval(ctx, &env)?))?,
            Rhs::Span(parts) => span_report(&r.id, &lhs, span_family(&lhs, &parts, &env)?)?,
        };
        if !rep.passed() {
            return Err(rep.fail());
        }
        out.push(rep);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentTable {
    pub entries: BTreeMap<usize, Scalar>,
}

impl MomentTable {
    pub fn to_json(&self) -> Value {
        Value::Object(self.entries.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect())
    }
}

/// `trace(T^k)` for `k = 1..=max_k` by repeated multiplication.
pub fn moments(c: &GeneratorCandidate, max_k: usize) -> Result<MomentTable, HaagerupError> {
    let t = &c.element;
    let mut entries = BTreeMap::new();
    let mut p = t.clone();
    for k in 1..=max_k {
        if k > 1 {
            p = p.multiply(t)?;
        }
        entries.insert(k, p.trace());
    }
    Ok(MomentTable { entries })
}

/// `trace(x^k)` as a sum over closed configurations: cyclic sequences of
/// paths `p_0, ..., p_(k-1)` from `v0` to `vn`, each consecutive pair read
/// as one loop of `x`.
pub fn trace_power_brute_force(x: &GpaElement, k: usize) -> Scalar {
    let ctx = x.ctx();
    let g = ctx.graph();
    let spin = ctx.spin();
    let n = x.n();
    let sp = x.space();
    if k == 0 {
        return ctx.unit(n, x.shading()).trace();
    }
    // paths of length n grouped by endpoints
    let mut paths: BTreeMap<(usize, usize), Vec<Vec<usize>>> = BTreeMap::new();
    let starts: Vec<usize> = g.vertices_of_parity(x.shading().start_parity()).collect();
    for &v0 in &starts {
        let mut stack = vec![(v0, Vec::new())];
        while let Some((v, p)) = stack.pop() {
            if p.len() == n {
                paths.entry((v0, v)).or_default().push(p);
                continue;
            }
            for &s in g.incident(v) {
                let mut q = p.clone();
                q.push(s);
                stack.push((g.strand(s).other(v), q));
            }
        }
    }
    let interior = |v0: usize, p: &[usize]| -> Scalar {
        let mut acc = Scalar::one();
        let mut v = v0;
        for (i, s) in p.iter().enumerate() {
            v = g.strand(*s).other(v);
            if i + 1 < p.len() {
                acc = &acc * &spin.mu_inv[v];
            }
        }
        acc
    };
    let value = |v0: usize, p: &[usize], q: &[usize]| -> Scalar {
        let mut edges = p.to_vec();
        edges.extend(q.iter().rev());
        sp.index_of(&LoopPath { start: v0, edges }).map_or_else(Scalar::zero, |i| x.get(i))
    };
    let mut total = Scalar::zero();
    for ((v0, vn), ps) in &paths {
        let w = &(&spin.perron.mu[*v0] * &spin.perron.mu[*vn]) * &spin.z_inv;
        let m = ps.len();
        let inv: Vec<Scalar> = ps.iter().map(|p| interior(*v0, p)).collect();
        let mat: Vec<Vec<Scalar>> = ps.iter().map(|p| ps.iter().map(|q| value(*v0, p, q)).collect()).collect();
        // sum over index sequences i_0 .. i_(k-1)
        let mut idx = vec![0usize; k];
        loop {
            let mut term = w.clone();
            for j in 0..k {
                let a = idx[j];
                let b = idx[(j + 1) % k];
                if mat[a][b].is_zero() {
                    term = Scalar::zero();
                    break;
                }
                term = &(&term * &mat[a][b]) * &inv[a];
            }
            if !term.is_zero() {
                total += &term;
            }
            let mut j = 0;
            while j < k {
                idx[j] += 1;
                if idx[j] < m {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditRow {
    pub n: usize,
    pub catalan: u64,
    pub tl_dim: usize,
    pub span_dim: usize,
    pub star_loops: BigInt,
}

impl AuditRow {
    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "catalan": self.catalan, "tl_dim": self.tl_dim, "span_dim": self.span_dim, "star_loops": self.star_loops.to_string()})
    }
}

fn rank_of(vs: &[GpaElement], cols: usize) -> usize {
    let mut e = SparseEchelon::new(cols);
    for v in vs {
        e.insert(v.entries().iter().map(|(k, s)| (*k, s.clone())).collect());
    }
    e.rank()
}

/// Dimension of the span of TL, the annular consequences of `T`, and all
/// pairwise products of those, against the number of loops at the base vertex.
pub fn dimension_audit(c: &GeneratorCandidate, max_n: usize) -> Result<Vec<AuditRow>, HaagerupError> {
    let t = &c.element;
    let ctx = t.ctx();
    let sh = t.shading();
    let mut out = Vec::new();
    for n in 0..=max_n {
        let sp = ctx.space(n, sh);
        let tl: Vec<GpaElement> = all_diagrams(n).iter().map(|d| ctx.tl_embed(d, sh)).collect();
        let mut gens = tl.clone();
        if n >= t.n() {
            gens.extend(annular_consequences(t, n)?.elements());
        }
        let mut all = gens.clone();
        for a in &gens {
            for b in &gens {
                all.push(a.multiply(b)?);
            }
        }
        out.push(AuditRow {
            n,
            catalan: catalan(n),
            tl_dim: rank_of(&tl, sp.len()),
            span_dim: rank_of(&all, sp.len()),
            star_loops: count_loops(ctx.graph(), n, ctx.graph().base()),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ScanLevel {
    pub n: usize,
    pub shading: Shading,
    pub loops: usize,
    pub low_weight_dim: usize,
    /// `(order of the eigenvalues, dimension)` per rotation eigenspace.
    pub eigenspaces: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub graph_hash: String,
    pub delta: Scalar,
    pub delta_squared: Scalar,
    pub sub_two: bool,
    pub levels: Vec<ScanLevel>,
}

impl ScanReport {
    pub fn to_json(&self) -> Value {
        json!({
            "graph_hash": self.graph_hash,
            "delta": self.delta.to_json(),
            "delta_decimal": self.delta.to_decimal(30),
            "sub_two": self.sub_two,
            "levels": self.levels.iter().map(|l| json!({
                "n": l.n,
                "shading": l.shading.symbol(),
                "loops": l.loops,
                "low_weight_dim": l.low_weight_dim,
                "eigenspaces": l.eigenspaces.iter().map(|(o, d)| json!({"order": o, "dim": d})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Low-weight dimensions and rotation spectra for `n <= n_max`, both shadings.
pub fn scan_graph(g: &BipartiteGraph, n_max: usize) -> Result<ScanReport, HaagerupError> {
    let ctx = Gpa::new(g.clone())?;
    let delta = ctx.delta().clone();
    let delta_squared = &delta * &delta;
    let sub_two = matches!((Scalar::int(4) - &delta_squared).certified_sign(MAX_PRECISION), Ok(Sign::Positive));
    let mut levels = Vec::new();
    for n in 1..=n_max {
        for sh in [Shading::Plus, Shading::Minus] {
            let lw = low_weight_space(&ctx, n, sh)?;
            let eigenspaces = rotation_eigenspaces(&lw)?.iter().map(|e| (e.order, e.dim())).collect();
            levels.push(ScanLevel { n, shading: sh, loops: ctx.space(n, sh).len(), low_weight_dim: lw.dim(), eigenspaces });
        }
    }
    Ok(ScanReport { graph_hash: g.hash(), delta, delta_squared, sub_two, levels })
}

/// Exact equality, or an overlap of enclosures narrower than the residual threshold.
pub fn scalars_agree(a: &Scalar, b: &Scalar) -> bool {
    certify_scalars([&(a - b)]).passed()
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub max_k: usize,
    pub max_n: usize,
    /// Interval precision for the relation checks; `None` keeps `T` exact.
    pub interval_bits: Option<u32>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { max_k: 4, max_n: 4, interval_bits: None }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub candidate: GeneratorCandidate,
    pub generator: Vec<RelationReport>,
    pub four_box: RelationReport,
    pub higher: Vec<RelationReport>,
    pub moments: MomentTable,
    pub moment_checks: Vec<RelationReport>,
    pub audit: Vec<AuditRow>,
}

impl PipelineReport {
    pub fn first_failure(&self) -> Option<&str> {
        self.generator
            .iter()
            .chain(std::iter::once(&self.four_box))
            .chain(&self.higher)
            .chain(&self.moment_checks)
            .find(|r| !r.passed())
            .map(|r| r.id.as_str())
    }

    pub fn to_json(&self) -> Value {
        let reps = |v: &[RelationReport]| v.iter().map(|r| r.to_json()).collect::<Vec<_>>();
        json!({
            "candidate": self.candidate.to_json(),
            "generator": reps(&self.generator),
            "four_box": self.four_box.to_json(),
            "relations": reps(&self.higher),
            "moments": self.moments.to_json(),
            "moment_checks": reps(&self.moment_checks),
            "audit": self.audit.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Moment identities: `trace(T) = 0`, `trace(T^2) = <T,T>`,
/// `trace(T^3)` against the 4-box relation, and the brute-force sums.
pub fn moment_checks(c: &GeneratorCandidate, table: &MomentTable, four_box: &RelationReport) -> Result<Vec<RelationReport>, HaagerupError> {
    let t = &c.element;
    let mut out = Vec::new();
    if let Some(t1) = table.entries.get(&1) {
        out.push(RelationReport::for_scalar("trace(T)", t1));
    }
    if let Some(t2) = table.entries.get(&2) {
        out.push(RelationReport::for_scalar("trace(T^2) = <T,T>", &(t2 - &t.inner_product(t)?)));
    }
    if let (Some(t3), Some((_, implied))) = (table.entries.get(&3), four_box.extras.iter().find(|(k, _)| k.starts_with("trace(T^3)"))) {
        out.push(RelationReport::for_scalar("trace(T^3) vs four-box", &(t3 - implied)));
    }
    for (k, v) in &table.entries {
        if *k <= 4 {
            out.push(RelationReport::for_scalar(&format!("trace(T^{k}) brute force"), &(v - &trace_power_brute_force(t, *k))));
        }
    }
    Ok(out)
}

/// The full chain: generator, its properties, the relations, the moments
/// and the dimension audit. Verification failures are left in the reports;
/// errors are reserved for failures that stop the chain.
pub fn verify_all(ctx: &Arc<Gpa>, manifest: &Manifest, opts: &PipelineOptions) -> Result<PipelineReport, HaagerupError> {
    let exact = find_generator(ctx, &manifest.generator)?;
    let candidate = match opts.interval_bits {
        Some(b) => exact.to_interval(b),
        None => exact.clone(),
    };
    let generator = verify_generator(&candidate)?;
    let four_box = relation_4box(&candidate)?;
    let higher = relations_56(&candidate, manifest)?;
    let moments = moments(&candidate, opts.max_k)?;
    let moment_checks = moment_checks(&candidate, &moments, &four_box)?;
    let audit = dimension_audit(&exact, opts.max_n)?;
    Ok(PipelineReport { candidate, generator, four_box, higher, moments, moment_checks, audit })
}
