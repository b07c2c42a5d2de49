//! `incidence`: command-line access to incidence rings, their unit groups,
//! lazy matrices, poset recovery and the incidence functor.

mod experiment;
mod load;

use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use incidence_core::functor_cat::{self, FccMap};
use incidence_core::io;
use incidence_core::recovery::{self, RecoveryMode};
use incidence_core::{glgroup, lazy, Error, GroupElement, IncMatrix, Proset, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "incidence", version, about = "Exact computation in incidence rings of preordered sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prosets and families: intervals, neighborhoods, convexity, windows.
    #[command(subcommand)]
    Proset(ProsetCmd),
    /// Arithmetic in a finite incidence ring.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// The unit group `GL_Λ(P)`.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Matrices over infinite families, through finite windows.
    #[command(subcommand)]
    Lazy(LazyCmd),
    /// Recover a poset from a structure-constants bundle.
    Recover {
        #[arg(long)]
        input: String,
        #[arg(long, default_value = "exhaustive", value_parser = ["exhaustive", "witness"])]
        mode: String,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit the structure constants of a scrambled `M_Λ(P)`.
    Scramble {
        #[arg(long)]
        proset: String,
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// FCC maps and colimits.
    #[command(subcommand)]
    Functor(FunctorCmd),
    /// Run an experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ProsetCmd {
    /// Relations, classes and components of a finite proset.
    Info {
        #[arg(long)]
        proset: String,
    },
    /// The interval `[from, to]`.
    Intervals {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        proset: Option<String>,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// `N_n(s)`.
    Neighborhood {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        proset: Option<String>,
        #[arg(long)]
        element: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Whether a set is convex, and its interval closure.
    Convex {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        proset: Option<String>,
        #[arg(long)]
        window: String,
    },
    /// A cofinal chain of finite convex windows.
    Windows {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        proset: Option<String>,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Isomorphism test between two finite prosets.
    Iso {
        #[arg(long)]
        proset: String,
        #[arg(long)]
        other: String,
    },
    /// Pushout tree over two-block leaves.
    Decompose {
        #[arg(long)]
        proset: String,
    },
}

#[derive(Subcommand)]
enum AlgebraCmd {
    Add {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    Sub {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    Mul {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    Pow {
        #[arg(long)]
        a: String,
        #[arg(long)]
        exp: u64,
    },
    Invert {
        #[arg(long)]
        a: String,
    },
    /// The quotient `M_Λ → M_{Λ'}` onto a convex subset.
    Project {
        #[arg(long)]
        a: String,
        #[arg(long)]
        window: String,
    },
    Random {
        #[arg(long)]
        proset: String,
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    Order {
        #[arg(long)]
        proset: String,
        #[arg(long)]
        ring: String,
    },
    Center {
        #[arg(long)]
        proset: String,
        #[arg(long)]
        ring: String,
    },
    /// Whether a given unit is central.
    Central {
        #[arg(long)]
        a: String,
    },
    Commutator {
        #[arg(long)]
        proset: String,
        #[arg(long)]
        ring: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Dickson {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum LazyCmd {
    Get {
        #[arg(long)]
        input: String,
        #[arg(long)]
        row: String,
        #[arg(long)]
        col: String,
    },
    Project {
        #[arg(long)]
        input: String,
        #[arg(long)]
        window: String,
    },
    /// Product; finitary results are emitted whole, others on `--window`.
    Mul {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        window: Option<String>,
    },
    Invert {
        #[arg(long)]
        input: String,
        #[arg(long)]
        window: Option<String>,
    },
    /// Density of the groups `G_S` in a window of the unit group.
    Qz {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        proset: Option<String>,
        #[arg(long)]
        ring: String,
        #[arg(long)]
        window: String,
        #[arg(long)]
        inner: String,
    },
}

#[derive(Subcommand)]
enum FunctorCmd {
    Validate {
        #[arg(long)]
        map: String,
    },
    /// `M[f](A)`.
    Apply {
        #[arg(long)]
        map: String,
        #[arg(long)]
        matrix: String,
    },
    /// `g ∘ f`.
    Compose {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    Pushout {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    Coeq {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Also run the equalizer check over this ring.
        #[arg(long)]
        ring: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn matrix(arg: &str) -> Result<IncMatrix> {
    io::matrix_from_json(&load::value(arg)?)
}

fn fcc(arg: &str) -> Result<FccMap> {
    io::map_from_json(&load::value(arg)?)
}

fn finite_proset(arg: &str) -> Result<Arc<Proset>> {
    Ok(load::proset(arg)?.finite()?.clone())
}

fn proset_info(p: &Proset) -> Value {
    let names = |set: &[usize]| set.iter().map(|&s| p.name(s).to_string()).collect::<Vec<_>>();
    let mut out = io::proset_to_json(p);
    let obj = out.as_object_mut().expect("object");
    obj.insert("classes".into(), json!(p.classes().iter().map(|c| names(c)).collect::<Vec<_>>()));
    obj.insert("components".into(), json!(p.components().iter().map(|c| names(c)).collect::<Vec<_>>()));
    obj.insert("is_poset".into(), json!(p.is_poset()));
    obj.insert("irreducible".into(), json!(p.is_irreducible()));
    out
}

fn run_proset(cmd: ProsetCmd) -> Result<Value> {
    match cmd {
        ProsetCmd::Info { proset } => Ok(proset_info(finite_proset(&proset)?.as_ref())),
        ProsetCmd::Intervals { family, proset, from, to } => {
            let fam = load::family(family.as_deref(), proset.as_deref())?;
            let (a, b) = (fam.parse_element(&from)?, fam.parse_element(&to)?);
            Ok(json!({ "from": from, "to": to, "interval": load::names(&fam, &fam.interval(a, b)?) }))
        }
        ProsetCmd::Neighborhood { family, proset, element, n } => {
            let fam = load::family(family.as_deref(), proset.as_deref())?;
            let s = fam.parse_element(&element)?;
            Ok(json!({ "element": element, "n": n, "neighborhood": load::names(&fam, &fam.neighborhood(s, n)?) }))
        }
        ProsetCmd::Convex { family, proset, window } => {
            let fam = load::family(family.as_deref(), proset.as_deref())?;
            let set = load::window(&fam, &window)?;
            Ok(json!({
                "set": load::names(&fam, &set),
                "convex": fam.is_convex(&set)?,
                "interval_closure": load::names(&fam, &fam.interval_closure(&set)?),
            }))
        }
        ProsetCmd::Windows { family, proset, count } => {
            let fam = load::family(family.as_deref(), proset.as_deref())?;
            let ws = fam.windows(count).ok_or_else(|| Error::Format("this family has no built-in windows".into()))?;
            let ws: Vec<Vec<String>> = ws.iter().map(|w| load::names(&fam, w)).collect();
            Ok(json!({ "windows": ws }))
        }
        ProsetCmd::Iso { proset, other } => {
            let (a, b) = (finite_proset(&proset)?, finite_proset(&other)?);
            let map = a.poset_isomorphic(&b).map(|m| {
                m.iter().enumerate().map(|(i, &j)| (a.name(i).to_string(), b.name(j).to_string())).collect::<std::collections::BTreeMap<_, _>>()
            });
            Ok(json!({ "isomorphic": map.is_some(), "map": map }))
        }
        ProsetCmd::Decompose { proset } => {
            let p = finite_proset(&proset)?;
            let tree = functor_cat::generation_decompose(&p)?;
            let ok = functor_cat::same_by_names(tree.reassemble()?.as_ref(), &p);
            Ok(json!({ "leaves": tree.leaves(), "reassembles": ok, "tree": tree }))
        }
    }
}

fn run_algebra(cmd: AlgebraCmd) -> Result<Value> {
    let out = match cmd {
        AlgebraCmd::Add { a, b } => matrix(&a)?.try_add(&matrix(&b)?)?,
        AlgebraCmd::Sub { a, b } => matrix(&a)?.try_sub(&matrix(&b)?)?,
        AlgebraCmd::Mul { a, b } => matrix(&a)?.try_mul(&matrix(&b)?)?,
        AlgebraCmd::Pow { a, exp } => matrix(&a)?.pow(exp),
        AlgebraCmd::Invert { a } => glgroup::invert_matrix(&matrix(&a)?)?,
        AlgebraCmd::Project { a, window } => {
            let m = matrix(&a)?;
            let fam = incidence_core::ProsetFamily::Finite(m.proset().clone());
            let set: Vec<usize> = load::window(&fam, &window)?.into_iter().map(|x| x as usize).collect();
            m.project(&set)?
        }
        AlgebraCmd::Random { proset, ring, density, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            IncMatrix::random(&finite_proset(&proset)?, load::ring(&ring)?, density, &mut rng)
        }
    };
    Ok(io::matrix_to_json(&out))
}

fn run_group(cmd: GroupCmd) -> Result<Value> {
    match cmd {
        GroupCmd::Order { proset, ring } => {
            let order = glgroup::gl_order(finite_proset(&proset)?.as_ref(), load::ring(&ring)?);
            Ok(json!({ "order": order.map(|o| o.to_string()) }))
        }
        GroupCmd::Center { proset, ring } => {
            let c = glgroup::center(&finite_proset(&proset)?, load::ring(&ring)?)?;
            let elems: Vec<Value> = c.iter().map(|g| io::matrix_to_json(g.matrix())).collect();
            Ok(json!({ "size": c.len(), "elements": elems }))
        }
        GroupCmd::Central { a } => {
            let g = GroupElement::new(matrix(&a)?)?;
            Ok(serde_json::to_value(glgroup::is_central(&g)).expect("plain data"))
        }
        GroupCmd::Commutator { proset, ring, depth, trials, seed } => {
            let r = glgroup::iterated_commutator_sample(&finite_proset(&proset)?, load::ring(&ring)?, depth, trials, seed)?;
            Ok(serde_json::to_value(r).expect("plain data"))
        }
        GroupCmd::Dickson { n, q, seed } => {
            Ok(serde_json::to_value(glgroup::dickson_normal_closure(n, q, seed)?).expect("plain data"))
        }
    }
}

fn run_lazy(cmd: LazyCmd) -> Result<Value> {
    let lazy_of = |arg: &str| io::lazy_from_json(&load::value(arg)?);
    let emit = |m: &lazy::LazyMatrix, window: Option<&str>| -> Result<Value> {
        match window {
            Some(w) => Ok(io::matrix_to_json(&m.project(&load::window(m.family(), w)?)?)),
            None => io::lazy_to_json(m),
        }
    };
    match cmd {
        LazyCmd::Get { input, row, col } => {
            let m = lazy_of(&input)?;
            let (a, b) = (m.family().parse_element(&row)?, m.family().parse_element(&col)?);
            Ok(json!({ "row": row, "col": col, "value": m.get(a, b)?.to_string() }))
        }
        LazyCmd::Project { input, window } => emit(&lazy_of(&input)?, Some(&window)),
        LazyCmd::Mul { a, b, window } => emit(&lazy_of(&a)?.mul(&lazy_of(&b)?)?, window.as_deref()),
        LazyCmd::Invert { input, window } => emit(&lazy_of(&input)?.invert()?, window.as_deref()),
        LazyCmd::Qz { family, proset, ring, window, inner } => {
            let fam = load::family(family.as_deref(), proset.as_deref())?;
            let (alpha, beta) = (load::window(&fam, &window)?, load::window(&fam, &inner)?);
            let r = lazy::qz_window_check(&fam, &alpha, &beta, load::ring(&ring)?)?;
            Ok(serde_json::to_value(r).expect("plain data"))
        }
    }
}

fn run_functor(cmd: FunctorCmd) -> Result<Value> {
    match cmd {
        FunctorCmd::Validate { map } => {
            let f = fcc(&map)?;
            Ok(json!({ "valid": true, "kinds": f.kinds(), "surjective": f.is_surjective() }))
        }
        FunctorCmd::Apply { map, matrix: m } => Ok(io::matrix_to_json(&fcc(&map)?.induced_hom(&matrix(&m)?)?)),
        FunctorCmd::Compose { f, g } => Ok(io::map_to_json(&fcc(&f)?.then(&fcc(&g)?)?)),
        FunctorCmd::Pushout { f, g } => {
            let po = functor_cat::pushout(&fcc(&f)?, &fcc(&g)?)?;
            Ok(json!({
                "proset": io::proset_to_json(&po.proset),
                "p1": po.p1.named_mapping(),
                "p2": po.p2.named_mapping(),
            }))
        }
        FunctorCmd::Coeq { f, g, ring, seed } => {
            let (f1, f2) = (fcc(&f)?, fcc(&g)?);
            let co = functor_cat::coequalizer(&f1, &f2)?;
            let mut out = json!({ "proset": io::proset_to_json(&co.proset), "p": co.p.named_mapping() });
            if let Some(r) = ring {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rep = functor_cat::equalizer_check(&f1, &f2, load::ring(&r)?, 10, &mut rng)?;
                out["equalizer"] = serde_json::to_value(rep).expect("plain data");
            }
            Ok(out)
        }
    }
}

fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Proset(c) => run_proset(c),
        Command::Algebra(c) => run_algebra(c),
        Command::Group(c) => run_group(c),
        Command::Lazy(c) => run_lazy(c),
        Command::Recover { input, mode, budget, seed } => {
            let sc = io::bundle_from_json(&load::value(&input)?)?;
            let rec = match mode.as_str() {
                "witness" => recovery::recover_witness(&sc, budget, seed)?,
                _ => recovery::recover_exhaustive(&sc, budget)?,
            };
            debug_assert!(matches!(rec.mode, RecoveryMode::Exhaustive | RecoveryMode::Witness));
            let mut out = serde_json::to_value(&rec).expect("plain data");
            out["proset"] = io::proset_to_json(&rec.proset);
            Ok(out)
        }
        Command::Scramble { proset, ring, seed } => {
            let sc = recovery::scramble(finite_proset(&proset)?.as_ref(), load::ring(&ring)?, seed)?;
            Ok(io::bundle_to_json(&sc))
        }
        Command::Functor(c) => run_functor(c),
        Command::Experiment { config, seed } => experiment::run(&load::value(&config)?, seed),
    }
}

fn emit(report: &Value) {
    let text = serde_json::to_string_pretty(report).expect("serializable");
    let mut out = std::io::stdout().lock();
    // A closed pipe downstream is not our failure.
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let invocation = args[1..].join(" ");
    match run(cli) {
        Ok(result) => {
            let report = json!({ "invocation": invocation, "version": incidence_core::VERSION, "result": result });
            emit(&report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = json!({ "error": e.name(), "message": e.to_string() });
            emit(&report);
            ExitCode::from(1)
        }
    }
}
