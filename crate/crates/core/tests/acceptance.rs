//! End-to-end acceptance run: one line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use planar_core::gpa::{Gpa, GpaElement};
use planar_core::graph::{graph_norm, haagerup_graph, BipartiteGraph, Shading};
use planar_core::haagerup::{self, Certification, Manifest, PipelineOptions};
use planar_core::linalg::{charpoly, Poly};
use planar_core::scalar::{CertInterval, Dyadic, Scalar};
use planar_core::tl::{all_diagrams, catalan, jones_wenzl, quantum_integer, TLDiagram, TLElement};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, format!("took {:?}, limit {limit:?}", t.elapsed()))
}

fn graph_norm_certification() -> Check {
    let t = Instant::now();
    let g = haagerup_graph();
    let p = charpoly(&g.adjacency_matrix()).map_err(|e| e.to_string())?;
    let min = Poly::from_ints(&[3, 0, -5, 0, 1]);
    let (_, r) = p.div_rem(&min);
    ensure(r.is_zero(), "charpoly not divisible by x^4 - 5x^2 + 3")?;
    let delta = graph_norm(&g);
    ensure(delta.is_exact(), "delta is not exact")?;
    // sqrt((5 + sqrt 13) / 2) in plain interval arithmetic
    let prec = 256;
    let q = |n: i64| CertInterval::from_rational(&BigRational::from_integer(BigInt::from(n)), prec);
    let indep = q(5).add(&q(13).sqrt().unwrap()).div(&q(2)).unwrap().sqrt().unwrap();
    let ours = delta.to_interval(110).re;
    let tol = Dyadic::new(BigInt::from(1), -100);
    ensure(ours.overlaps(&indep), "enclosures of delta are disjoint")?;
    ensure(ours.width() <= tol && indep.width() <= tol, "enclosure wider than 2^-100")?;
    let gap = ours.midpoint().sub(&indep.midpoint()).abs();
    ensure(gap <= tol, "midpoints differ by more than 2^-100")?;
    within(t, Duration::from_secs(1))?;
    Ok(format!("delta = {}", delta.to_decimal(30)))
}

fn temperley_lieb_suite() -> Check {
    let t = Instant::now();
    for n in 0..=8 {
        ensure(all_diagrams(n).len() as u64 == catalan(n), format!("catalan mismatch at n = {n}"))?;
    }
    ensure((0..=8).map(catalan).collect::<Vec<_>>() == [1, 1, 2, 5, 14, 42, 132, 429, 1430], "catalan values")?;
    let delta = graph_norm(&haagerup_graph());
    for n in 1..=6 {
        let f = jones_wenzl(n, &delta).map_err(|e| e.to_string())?;
        ensure(f.multiply(&f, &delta).unwrap() == f, format!("f{n} not idempotent"))?;
        for i in 1..n {
            let e = TLElement::diagram(TLDiagram::e(n, i));
            ensure(e.multiply(&f, &delta).unwrap().is_zero(), format!("e{i} f{n} != 0"))?;
            ensure(f.multiply(&e, &delta).unwrap().is_zero(), format!("f{n} e{i} != 0"))?;
        }
        ensure(f.markov_trace(&delta) == quantum_integer(n + 1, &delta), format!("trace f{n} != [{}]", n + 1))?;
    }
    within(t, Duration::from_secs(30))?;
    Ok("catalan n <= 8, f1..f6 idempotent, cap-killed, trace [n+1]".into())
}

fn gpa_axiom_suite() -> Check {
    let t = Instant::now();
    let ctx = Gpa::new(haagerup_graph()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut count = 0;
    for n in 1..=3 {
        let sh = Shading::Plus;
        let tl = all_diagrams(n);
        for k in 0..100 {
            let r = |rng: &mut ChaCha8Rng, n, sh| ctx.random_element(n, sh, 0.3, 4, rng);
            let (x, y, z) = (r(&mut rng, n, sh), r(&mut rng, n, sh), r(&mut rng, n, sh));
            let m = |a: &GpaElement, b: &GpaElement| a.multiply(b).unwrap();
            ensure(m(&m(&x, &y), &z) == m(&x, &m(&y, &z)), format!("associativity n = {n}"))?;
            ensure(m(&x, &y).trace() == m(&y, &x).trace(), format!("trace cyclicity n = {n}"))?;
            ensure(x.rotate_by(n) == x, format!("rho^n n = {n}"))?;
            ensure(x.rotate().inner_product(&y.rotate()).unwrap() == x.inner_product(&y).unwrap(), format!("rho unitary n = {n}"))?;
            let i = 1 + k % (2 * n);
            ensure(x.cup(i + 1).unwrap().cap(i).unwrap() == x, format!("zig-zag n = {n} i = {i}"))?;
            let w = r(&mut rng, n - 1, if i == 2 * n { sh.flip() } else { sh });
            ensure(x.cap(i).unwrap().inner_product(&w).unwrap() == x.inner_product(&w.cup(i).unwrap()).unwrap(), format!("cap/cup adjoint n = {n} i = {i}"))?;
            let (a, b) = (&tl[k % tl.len()], &tl[(3 * k + 1) % tl.len()]);
            let ab = TLElement::diagram(a.clone()).multiply(&TLElement::diagram(b.clone()), ctx.delta()).unwrap();
            ensure(m(&ctx.tl_embed(a, sh), &ctx.tl_embed(b, sh)) == ctx.tl_embed_element(&ab, sh), format!("TL homomorphism n = {n}"))?;
            count += 1;
        }
    }
    within(t, Duration::from_secs(300))?;
    Ok(format!("{count} random elements, all identities exact ({:?})", t.elapsed()))
}

fn generator_reconstruction(ctx: &Arc<Gpa>, m: &Manifest) -> Check {
    let c = haagerup::find_generator(ctx, &m.generator).map_err(|e| e.to_string())?;
    let reps = haagerup::verify_generator(&c).map_err(|e| e.to_string())?;
    for r in &reps {
        ensure(r.certification == Certification::ExactZero, format!("{} not exactly zero", r.id))?;
    }
    let caps = reps.iter().filter(|r| r.id.starts_with("cap-")).count();
    ensure(caps == 8, format!("{caps} cap checks"))?;
    let fresh = Gpa::new(haagerup_graph()).map_err(|e| e.to_string())?;
    let again = haagerup::find_generator(&fresh, &m.generator).map_err(|e| e.to_string())?;
    let (s1, s2) = (c.element.to_json().to_string(), again.element.to_json().to_string());
    ensure(s1 == s2, "serialization differs between runs")?;
    Ok(format!("{} checks exact, {} nonzero entries, serialization stable", reps.len(), c.element.nnz()))
}

fn relation_verification(ctx: &Arc<Gpa>, m: &Manifest) -> Check {
    let t = Instant::now();
    let rep = haagerup::verify_all(ctx, m, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    ensure(rep.four_box.certification == Certification::ExactZero, "four-box residual")?;
    for r in &rep.higher {
        ensure(r.certification == Certification::ExactZero, format!("{} residual", r.id))?;
    }
    ensure(rep.first_failure().is_none(), format!("pipeline failure at {:?}", rep.first_failure()))?;
    let elapsed = t.elapsed();
    let bumped = rep.candidate.perturbed(0, &Scalar::ratio(1, 1000));
    let gen_fail = haagerup::verify_generator(&bumped).map_err(|e| e.to_string())?.iter().any(|r| !r.passed());
    let rel_fail = haagerup::relation_4box(&bumped).is_err();
    ensure(gen_fail || rel_fail, "perturbed T passed every check")?;
    ensure(elapsed < Duration::from_secs(600), format!("pipeline took {elapsed:?}"))?;
    Ok(format!("four-box and {} manifest relations exact, perturbation rejected, pipeline {elapsed:?}", rep.higher.len()))
}

fn trace_consistency(ctx: &Arc<Gpa>, m: &Manifest) -> Check {
    let c = haagerup::find_generator(ctx, &m.generator).map_err(|e| e.to_string())?;
    let table = haagerup::moments(&c, 4).map_err(|e| e.to_string())?;
    let t = &c.element;
    ensure(table.entries[&2] == t.inner_product(t).unwrap(), "trace(T^2) != <T,T>")?;
    let four = haagerup::relation_4box(&c).map_err(|e| e.to_string())?;
    let implied = &four.extras.iter().find(|(k, _)| k.starts_with("trace(T^3)")).ok_or("no implied trace")?.1;
    ensure(&table.entries[&3] == implied, "trace(T^3) disagrees with the four-box coefficients")?;
    for k in 1..=4 {
        ensure(table.entries[&k] == haagerup::trace_power_brute_force(t, k), format!("trace(T^{k}) vs brute force"))?;
    }
    Ok(format!("trace(T^k), k = 1..4: {}", table.entries.values().map(|v| v.to_decimal(6)).collect::<Vec<_>>().join(", ")))
}

fn dimension_audit(ctx: &Arc<Gpa>, m: &Manifest) -> Check {
    let c = haagerup::find_generator(ctx, &m.generator).map_err(|e| e.to_string())?;
    let a = haagerup::dimension_audit(&c, 4).map_err(|e| e.to_string())?;
    let b = haagerup::dimension_audit(&c, 4).map_err(|e| e.to_string())?;
    let ser = |v: &[haagerup::AuditRow]| v.iter().map(|r| r.to_json().to_string()).collect::<Vec<_>>().join("\n");
    ensure(ser(&a) == ser(&b), "audit not reproducible")?;
    for r in &a {
        ensure(r.tl_dim as u64 == r.catalan, format!("TL rank {} != Catalan {} at n = {}", r.tl_dim, r.catalan, r.n))?;
    }
    ensure(a[4].span_dim > a[4].catalan as usize, "n = 4 span does not exceed Catalan(4)")?;
    Ok(a.iter().map(|r| format!("n={}: span {} loops {}", r.n, r.span_dim, r.star_loops)).collect::<Vec<_>>().join("; "))
}

fn graph_scan() -> Check {
    let t = Instant::now();
    for k in [2, 3] {
        let r = haagerup::scan_graph(&BipartiteGraph::path(k), 3).map_err(|e| e.to_string())?;
        ensure(r.levels.iter().all(|l| l.low_weight_dim == 0), format!("A{k} has low-weight vectors"))?;
    }
    let h = haagerup::scan_graph(&haagerup_graph(), 4).map_err(|e| e.to_string())?;
    let four = h.levels.iter().find(|l| l.n == 4 && l.shading == Shading::Plus).ok_or("no n = 4 level")?;
    ensure(four.low_weight_dim > 0, "Haagerup n = 4 low-weight space is zero")?;
    within(t, Duration::from_secs(60))?;
    Ok(format!("A2, A3 empty for n <= 3; Haagerup n = 4 low weight {}", four.low_weight_dim))
}

fn main() -> ExitCode {
    let ctx = Gpa::new(haagerup_graph()).expect("bundled graph");
    let m = Manifest::bundled();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("1 graph norm certification", Box::new(graph_norm_certification)),
        ("2 Temperley-Lieb suite", Box::new(temperley_lieb_suite)),
        ("3 GPA axiom suite", Box::new(gpa_axiom_suite)),
        ("4 generator reconstruction", Box::new(|| generator_reconstruction(&ctx, &m))),
        ("5 relation verification", Box::new(|| relation_verification(&ctx, &m))),
        ("6 trace consistency", Box::new(|| trace_consistency(&ctx, &m))),
        ("7 dimension audit", Box::new(|| dimension_audit(&ctx, &m))),
        ("8 graph scan", Box::new(graph_scan)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let t = Instant::now();
        match f() {
            Ok(msg) => println!("PASS  {name}  [{:.1?}]  {msg}", t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}  [{:.1?}]  {msg}", t.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
