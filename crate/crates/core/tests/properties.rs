use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use planar_core::gpa::Gpa;
use planar_core::graph::{count_loops, enumerate_loops, graph_norm, haagerup_graph, BipartiteGraph, EdgeSpec, GraphData, Parity, Shading, VertexSpec};
use planar_core::linalg::{nullspace, rank, Matrix};
use planar_core::scalar::Scalar;
use planar_core::tl::{all_diagrams, compose, TLDiagram};

fn delta() -> &'static Scalar {
    static D: OnceLock<Scalar> = OnceLock::new();
    D.get_or_init(|| graph_norm(&haagerup_graph()))
}

fn haagerup() -> &'static Arc<Gpa> {
    static G: OnceLock<Arc<Gpa>> = OnceLock::new();
    G.get_or_init(|| Gpa::new(haagerup_graph()).unwrap())
}

fn field_element() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((-6i64..=6, 1i64..=4), 4).prop_map(|c| {
        let d = delta();
        let mut acc = Scalar::zero();
        let mut p = Scalar::one();
        for (n, m) in c {
            acc += &(&p * &Scalar::ratio(n, m));
            p = &p * d;
        }
        acc
    })
}

fn diagram(n: usize) -> impl Strategy<Value = TLDiagram> {
    let all = all_diagrams(n);
    (0..all.len()).prop_map(move |i| all[i].clone())
}

/// Random connected bipartite graph: a spanning path plus extra edges.
fn small_graph() -> impl Strategy<Value = BipartiteGraph> {
    (2usize..=6, prop::collection::vec((0usize..6, 0usize..6, 1u32..=2), 0..4)).prop_map(|(k, extra)| {
        let vertices = (0..k).map(|i| VertexSpec { id: format!("v{i}"), parity: if i % 2 == 0 { Parity::Even } else { Parity::Odd } }).collect();
        let mut edges = Vec::new();
        let add = |a: usize, b: usize, mult: u32, edges: &mut Vec<EdgeSpec>| {
            let (e, o) = if a % 2 == 0 { (a, b) } else { (b, a) };
            edges.push(EdgeSpec { id: format!("e{}", edges.len()), even: format!("v{e}"), odd: format!("v{o}"), mult });
        };
        for i in 0..k - 1 {
            add(i, i + 1, 1, &mut edges);
        }
        for (a, b, m) in extra {
            let (a, b) = (a % k, b % k);
            if (a + b) % 2 == 1 {
                add(a, b, m, &mut edges);
            }
        }
        BipartiteGraph::new(GraphData { vertices, edges, base: "v0".into() }).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn tower_field_axioms(a in field_element(), b in field_element(), c in field_element()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inv().unwrap(), Scalar::one());
        }
    }

    #[test]
    fn interval_encloses_exact(a in field_element(), b in field_element()) {
        let exact = (&a * &b).to_interval(200);
        let iv = Scalar::Interval(a.to_interval(80)) * Scalar::Interval(b.to_interval(80));
        let e = iv.to_interval(80);
        prop_assert!(e.re.lower() <= exact.re.lower() && exact.re.upper() <= e.re.upper());
    }

    #[test]
    fn nullspace_is_annihilated(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 5), 1..5)) {
        let m = Matrix::from_ints(&rows);
        let ns = nullspace(&m).unwrap();
        prop_assert_eq!(rank(&m).unwrap() + ns.len(), 5);
        for v in ns {
            prop_assert!(m.mul_vec(&v).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn loop_counts_match_adjacency_powers(g in small_graph(), n in 0usize..=3) {
        let at_base = enumerate_loops(&g, n, Shading::Plus).iter().filter(|l| l.start == g.base()).count();
        prop_assert_eq!(count_loops(&g, n, g.base()), BigInt::from(at_base));
        let back = BipartiteGraph::from_json_str(&g.to_json_string()).unwrap();
        prop_assert_eq!(back.to_json_string(), g.to_json_string());
    }

    #[test]
    fn tl_composition_associative(a in diagram(4), b in diagram(4), c in diagram(4)) {
        let (ab, l1) = compose(&a, &b).unwrap();
        let (abc, l2) = compose(&ab, &c).unwrap();
        let (bc, l3) = compose(&b, &c).unwrap();
        let (abc2, l4) = compose(&a, &bc).unwrap();
        prop_assert_eq!(abc, abc2);
        prop_assert_eq!(l1 + l2, l3 + l4);
    }

    #[test]
    fn tl_rotation_and_adjoint(d in diagram(5)) {
        let mut r = d.clone();
        for _ in 0..5 {
            r = r.rotate();
        }
        prop_assert_eq!(&r, &d);
        prop_assert_eq!(d.adjoint().adjoint(), d.clone());
        let (dd, _) = compose(&d, &d.adjoint()).unwrap();
        prop_assert_eq!(dd.adjoint(), dd);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn gpa_star_algebra(seed in any::<u64>(), n in 1usize..=3) {
        let ctx = haagerup();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ctx.random_element(n, Shading::Plus, 0.3, 4, &mut rng);
        let y = ctx.random_element(n, Shading::Plus, 0.3, 4, &mut rng);
        let xy = x.multiply(&y).unwrap();
        prop_assert_eq!(xy.adjoint(), y.adjoint().multiply(&x.adjoint()).unwrap());
        prop_assert_eq!(x.inner_product(&y).unwrap(), x.multiply(&y.adjoint()).unwrap().trace());
        prop_assert_eq!(xy.trace(), y.multiply(&x).unwrap().trace());
        let xx = x.inner_product(&x).unwrap();
        prop_assert!(xx.is_zero() || matches!(xx.certified_sign(256), Ok(planar_core::scalar::Sign::Positive)));
    }

    #[test]
    fn gpa_rotation_and_caps(seed in any::<u64>(), n in 1usize..=3) {
        let ctx = haagerup();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ctx.random_element(n, Shading::Plus, 0.3, 4, &mut rng);
        prop_assert_eq!(x.rotate_by(n), x.clone());
        prop_assert_eq!(x.rotate().adjoint(), x.adjoint().rotate_by(n - 1));
        for i in 1..=2 * n + 2 {
            prop_assert_eq!(x.cup(i).unwrap().cap(i).unwrap(), x.scale(ctx.delta()));
        }
    }
}
