use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use sha2::{Digest, Sha256};

use planar_core::gpa::{Gpa, GpaElement};
use planar_core::graph::{haagerup_graph, BipartiteGraph, GraphData, LoopPath};
use planar_core::haagerup::{find_generator, verify_generator, GeneratorCandidate, Manifest};
use planar_core::scalar::{CertInterval, Scalar};

fn candidate() -> &'static GeneratorCandidate {
    static C: OnceLock<GeneratorCandidate> = OnceLock::new();
    C.get_or_init(|| {
        let ctx = Gpa::new(haagerup_graph()).unwrap();
        find_generator(&ctx, &Manifest::bundled().generator).unwrap()
    })
}

/// Same graph with vertices and edges listed in a different order.
fn shuffled() -> BipartiteGraph {
    let d = haagerup_graph().data().clone();
    let vorder = [7, 3, 9, 0, 5, 2, 8, 1, 6, 4];
    let eorder = [5, 8, 2, 0, 7, 3, 6, 1, 4];
    BipartiteGraph::new(GraphData {
        vertices: vorder.iter().map(|&i| d.vertices[i].clone()).collect(),
        edges: eorder.iter().map(|&i| d.edges[i].clone()).collect(),
        base: d.base,
    })
    .unwrap()
}

/// Transports `x` onto `ctx` by strand labels, renaming each label through `rename`.
fn transport(x: &GpaElement, ctx: &Arc<Gpa>, rename: &dyn Fn(&str) -> String) -> GpaElement {
    let (src, dst) = (x.ctx().graph(), ctx.graph());
    assert!(x.n() > 0);
    let loops = x.space().loops();
    let mut out = BTreeMap::new();
    for (i, v) in x.entries() {
        let l = &loops[*i];
        let labels: Vec<String> = l.labels(src).iter().map(|s| rename(s)).collect();
        let nl = LoopPath::from_labels(dst, &labels, None, x.shading()).expect("loop survives relabeling");
        let idx = ctx.space(x.n(), x.shading()).index_of(&nl).unwrap();
        out.insert(idx, v.clone());
    }
    ctx.from_entries(x.n(), x.shading(), out)
}

/// The arm swap `d <-> d'`, `e <-> e'`, `f <-> f'` on strand labels.
fn arm_swap(s: &str) -> String {
    match s {
        "e3" => "e4",
        "e4" => "e3",
        "e5" => "e6",
        "e6" => "e5",
        "e7" => "e8",
        "e8" => "e7",
        o => o,
    }
    .to_string()
}

fn close(a: &Scalar, b: &Scalar) -> bool {
    let (x, y) = (a.to_interval(256), b.to_interval(256));
    let near = |p: &CertInterval, q: &CertInterval| p.sub(q).mag().to_f64() < 1e-60;
    near(&x.re, &y.re) && near(&x.imag(), &y.imag())
}

fn same(x: &GpaElement, y: &GpaElement, sign: &Scalar, conj: bool) -> bool {
    let keys: std::collections::BTreeSet<_> = x.entries().keys().chain(y.entries().keys()).collect();
    keys.into_iter().all(|k| {
        let b = if conj { y.get(*k).conj() } else { y.get(*k) };
        close(&x.get(*k), &(sign * &b))
    })
}

#[test]
fn frozen_generator_shape() {
    let c = candidate();
    assert_eq!(c.element.nnz(), 222);
    assert_eq!(c.eigenspace_dim, 4);
    assert_eq!(c.rotation_eigenvalue, Scalar::int(-1));
    assert!(c.selection_note.contains("2 solution(s) up to sign"));
    assert!(c.element.entries().values().any(|v| v.tower().is_some_and(|t| t.has_imaginary())));
    let d = c.element.ctx().delta();
    let tr2 = c.element.multiply(&c.element).unwrap().trace();
    assert_eq!(tr2, &(&(d * d) * &Scalar::int(2)) - &Scalar::int(2));
}

#[test]
fn frozen_generator_digest() {
    let json = candidate().element.to_json().to_string();
    let digest = hex::encode(Sha256::digest(json.as_bytes()));
    assert_eq!(&digest[..16], GOLDEN_DIGEST);
}

const GOLDEN_DIGEST: &str = "be145e46b9d4f9b4";

#[test]
fn relabeling_reproduces_generator() {
    let t = &candidate().element;
    let ctx = Gpa::new(shuffled()).unwrap();
    let u = find_generator(&ctx, &Manifest::bundled().generator).unwrap();
    let back = transport(&u.element, t.ctx(), &|s: &str| s.to_string());
    let swapped = transport(&back, t.ctx(), &arm_swap);
    let mut hits = 0;
    for y in [&back, &swapped] {
        for sign in [Scalar::one(), Scalar::int(-1)] {
            for conj in [false, true] {
                hits += same(t, y, &sign, conj) as usize;
            }
        }
    }
    assert!(hits >= 1, "relabeled generator is not a symmetry image of T");
}

#[test]
fn arm_swap_is_a_symmetry_up_to_the_solution_set() {
    let t = &candidate().element;
    let s = transport(t, t.ctx(), &arm_swap);
    let sols = [(Scalar::one(), false), (Scalar::int(-1), false), (Scalar::one(), true), (Scalar::int(-1), true)];
    assert!(sols.iter().any(|(sg, cj)| same(t, &s, sg, *cj)));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn perturbations_fail_verification(k in 0usize..222, num in 1i64..=50, den in 1i64..=1000) {
        let p = candidate().perturbed(k, &Scalar::ratio(num, den));
        let reports = verify_generator(&p).unwrap();
        prop_assert!(reports.iter().any(|r| !r.passed()));
    }
}
