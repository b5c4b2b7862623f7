use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use planar_core::gpa::Gpa;
use planar_core::graph::{count_loops, enumerate_loops, haagerup_graph, perron_vector, BipartiteGraph, Shading};
use planar_core::haagerup::{self, HaagerupError, Manifest, PipelineOptions};
use planar_core::scalar::MAX_PRECISION;
use planar_core::tl::{all_diagrams, TLElement};

#[derive(Parser)]
#[command(name = "hpa", version, about = "Graph planar algebra checks for the Haagerup generator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Graph JSON file (default: bundled Haagerup graph)
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Relation manifest (default: bundled)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Interval precision in bits
    #[arg(long, global = true, default_value_t = 256, value_parser = clap::value_parser!(u32).range(64..=4096))]
    precision: u32,
    #[arg(long, global = true, value_enum, default_value_t = Mode::ExactPreferred)]
    mode: Mode,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 20240601)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    ExactPreferred,
    IntervalOnly,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generator, relations, moments and dimension audit
    VerifyAll {
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        max_k: usize,
    },
    /// Norm, Perron vector and hash of the graph
    GraphInfo,
    /// Loop counts against adjacency powers
    Loops {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "+")]
        shading: String,
    },
    /// Low-weight dimensions and rotation spectra
    Lowweight {
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
    /// Moments trace(T^k) of the generator
    Traces {
        #[arg(long, default_value_t = 4)]
        max_k: usize,
    },
    /// Seeded random checks of the planar algebra axioms
    Axioms {
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

enum Failure {
    Verify(String),
    Input(String),
}

impl From<HaagerupError> for Failure {
    fn from(e: HaagerupError) -> Self {
        match e {
            HaagerupError::Manifest(_) | HaagerupError::Graph(_) => Failure::Input(e.to_string()),
            e => Failure::Verify(e.to_string()),
        }
    }
}

struct Outcome {
    text: String,
    json: Value,
    failure: Option<String>,
}

fn load_graph(c: &Common) -> Result<BipartiteGraph, Failure> {
    match &c.graph {
        None => Ok(haagerup_graph()),
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            BipartiteGraph::from_json_str(&s).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
        }
    }
}

fn load_manifest(c: &Common) -> Result<Manifest, Failure> {
    match &c.manifest {
        None => Ok(Manifest::bundled()),
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            Manifest::from_json_str(&s).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
        }
    }
}

fn context(c: &Common) -> Result<Arc<Gpa>, Failure> {
    Gpa::new(load_graph(c)?).map_err(|e| Failure::Input(e.to_string()))
}

fn verify_all(c: &Common, max_n: usize, max_k: usize) -> Result<Outcome, Failure> {
    let ctx = context(c)?;
    let manifest = load_manifest(c)?;
    let mut bits = (c.mode == Mode::IntervalOnly).then_some(c.precision);
    let rep = loop {
        let opts = PipelineOptions { max_n, max_k, interval_bits: bits };
        match haagerup::verify_all(&ctx, &manifest, &opts) {
            Err(HaagerupError::Undecided { .. }) if bits.is_some_and(|b| b < MAX_PRECISION) => {
                bits = bits.map(|b| b * 2);
            }
            r => break r?,
        }
    };
    let mut text = String::new();
    text += &format!("generator: {} (eigenspace dim {})\n", rep.candidate.selection_note, rep.candidate.eigenspace_dim);
    for r in rep.generator.iter().chain([&rep.four_box]).chain(&rep.higher).chain(&rep.moment_checks) {
        text += &format!("{:<32} {}\n", r.id, if r.passed() { "ok" } else { "FAIL" });
    }
    for (k, v) in &rep.moments.entries {
        text += &format!("trace(T^{k}) = {}\n", v.to_decimal(20));
    }
    text += "n  catalan  tl  span  loops\n";
    for a in &rep.audit {
        text += &format!("{}  {}  {}  {}  {}\n", a.n, a.catalan, a.tl_dim, a.span_dim, a.star_loops);
    }
    let mut js = rep.to_json();
    if let Some(b) = bits {
        js["interval_bits"] = json!(b);
    }
    Ok(Outcome { text, json: js, failure: rep.first_failure().map(String::from) })
}

fn graph_info(c: &Common) -> Result<Outcome, Failure> {
    let g = load_graph(c)?;
    let p = perron_vector(&g).map_err(|e| Failure::Input(e.to_string()))?;
    let d2 = &p.delta * &p.delta;
    let mut text = format!("graph {g}\nhash {}\ndelta = {}\n      ~ {}\ndelta^2 = {}\n        ~ {}\n", g.hash(), p.delta, p.delta.to_decimal(60), d2, d2.to_decimal(60));
    for (id, m) in p.ids.iter().zip(&p.mu) {
        text += &format!("mu({id}) = {m}\n");
    }
    let json = json!({
        "hash": g.hash(),
        "delta": p.delta.to_json(),
        "delta_decimal": p.delta.to_decimal(60),
        "delta_squared": d2.to_json(),
        "delta_squared_decimal": d2.to_decimal(60),
        "perron": p.ids.iter().zip(&p.mu).map(|(i, m)| json!({"vertex": i, "value": m.to_json()})).collect::<Vec<_>>(),
    });
    Ok(Outcome { text, json, failure: None })
}

fn loops(c: &Common, n: usize, shading: &str) -> Result<Outcome, Failure> {
    let g = load_graph(c)?;
    let sh = Shading::parse(shading).ok_or_else(|| Failure::Input(format!("bad shading {shading}")))?;
    let ls = enumerate_loops(&g, n, sh);
    let at_base = ls.iter().filter(|l| l.start == g.base()).count();
    let oracle = count_loops(&g, n, g.base());
    let ok = g.parity(g.base()) != sh.start_parity() || oracle == at_base.into();
    let text = format!("n = {n} shading {}: {} loops, {at_base} at base, adjacency power {oracle}\n", sh.symbol(), ls.len());
    let json = json!({"n": n, "shading": sh.symbol(), "loops": ls.len(), "at_base": at_base, "adjacency_power": oracle.to_string()});
    Ok(Outcome { text, json, failure: (!ok).then(|| "loop count".to_string()) })
}

fn lowweight(c: &Common, max_n: usize) -> Result<Outcome, Failure> {
    let g = load_graph(c)?;
    let r = haagerup::scan_graph(&g, max_n)?;
    let mut text = format!("delta ~ {}{}\n", r.delta.to_decimal(30), if r.sub_two { " (below 2)" } else { "" });
    for l in &r.levels {
        let eig: Vec<String> = l.eigenspaces.iter().map(|(o, d)| format!("order {o}: {d}")).collect();
        text += &format!("n = {} {}  loops {}  low weight {}  [{}]\n", l.n, l.shading.symbol(), l.loops, l.low_weight_dim, eig.join(", "));
    }
    Ok(Outcome { text, json: r.to_json(), failure: None })
}

fn traces(c: &Common, max_k: usize) -> Result<Outcome, Failure> {
    let ctx = context(c)?;
    let m = load_manifest(c)?;
    let cand = haagerup::find_generator(&ctx, &m.generator)?;
    let table = haagerup::moments(&cand, max_k)?;
    let norm = cand.element.inner_product(&cand.element).map_err(|e| Failure::Verify(e.to_string()))?;
    let mut text = String::new();
    for (k, v) in &table.entries {
        text += &format!("trace(T^{k}) = {v}\n            ~ {}\n", v.to_decimal(30));
    }
    text += &format!("<T,T> = {norm}\n");
    let fail = table.entries.get(&2).is_some_and(|t2| !haagerup::scalars_agree(t2, &norm));
    Ok(Outcome { text, json: json!({"moments": table.to_json(), "norm": norm.to_json()}), failure: fail.then(|| "trace(T^2) = <T,T>".into()) })
}

fn axioms(c: &Common, max_n: usize, count: usize) -> Result<Outcome, Failure> {
    let ctx = context(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 1..=max_n {
        let sh = Shading::Plus;
        let tl: Vec<_> = all_diagrams(n);
        for trial in 0..count {
            let x = ctx.random_element(n, sh, 0.3, 5, &mut rng);
            let y = ctx.random_element(n, sh, 0.3, 5, &mut rng);
            let z = ctx.random_element(n, sh, 0.3, 5, &mut rng);
            let m = |a: &planar_core::gpa::GpaElement, b: &planar_core::gpa::GpaElement| a.multiply(b).expect("same shape");
            let mut check = |name: &str, ok: bool| {
                checked += 1;
                if !ok {
                    failures.push(format!("n = {n}: {name}"));
                }
            };
            check("associativity", m(&m(&x, &y), &z) == m(&x, &m(&y, &z)));
            check("trace cyclicity", m(&x, &y).trace() == m(&y, &x).trace());
            check("rotation order", x.rotate_by(n) == x);
            check("rotation unitarity", x.rotate().inner_product(&y.rotate()).ok() == x.inner_product(&y).ok());
            for i in 1..=2 * n {
                let w = ctx.random_element(n - 1, if i == 2 * n { sh.flip() } else { sh }, 0.5, 5, &mut rng);
                let lhs = x.cap(i).and_then(|cx| cx.inner_product(&w)).ok();
                let rhs = w.cup(i).and_then(|cw| x.inner_product(&cw)).ok();
                check("cap/cup adjointness", lhs.is_some() && lhs == rhs);
            }
            let i = 1 + (trial % (2 * n));
            check("zig-zag", x.cup(i + 1).and_then(|u| u.cap(i)).ok() == Some(x.clone()));
            let a = TLElement::diagram(tl[trial % tl.len()].clone());
            let b = TLElement::diagram(tl[(trial * 7 + 3) % tl.len()].clone());
            let ab = a.multiply(&b, ctx.delta()).expect("same size");
            let lhs = m(&ctx.tl_embed_element(&a, sh), &ctx.tl_embed_element(&b, sh));
            check("TL homomorphism", lhs == ctx.tl_embed_element(&ab, sh));
        }
    }
    let text = format!("{checked} checks, {} failures (seed {})\n{}", failures.len(), c.seed, failures.join("\n"));
    let json = json!({"seed": c.seed, "checks": checked, "failures": failures});
    Ok(Outcome { text, json, failure: failures.first().cloned() })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let res = match &cli.cmd {
        Cmd::VerifyAll { max_n, max_k } => verify_all(c, *max_n, *max_k),
        Cmd::GraphInfo => graph_info(c),
        Cmd::Loops { n, shading } => loops(c, *n, shading),
        Cmd::Lowweight { max_n } => lowweight(c, *max_n),
        Cmd::Traces { max_k } => traces(c, *max_k),
        Cmd::Axioms { max_n, count } => axioms(c, *max_n, *count),
    };
    let out = match res {
        Ok(o) => o,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Verify(e)) => {
            eprintln!("verification failed: {e}");
            return ExitCode::from(1);
        }
    };
    let body = match c.output {
        Output::Text => out.text,
        Output::Json => serde_json::to_string_pretty(&out.json).expect("json") + "\n",
    };
    match &c.report {
        Some(p) => {
            if let Err(e) = fs::write(p, body) {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    match out.failure {
        Some(id) => {
            eprintln!("verification failed: {id}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
