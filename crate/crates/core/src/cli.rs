//! Command-line front end.
//!
//! Exit codes: 0 success or verdict true, 1 verdict false (a witness is
//! printed), 64 usage or parse error, 65 failed precondition, 2 internal error.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::cyclo_ring::{power_identity_check, solve_lemma_1_11};
use crate::error::Error;
use crate::graphkit::{
    build_spielberg, build_strand_graph, delete_strand, is_irreducible, to_dot, validate_automorphism, GadgetGraph,
    GraphSpecInput,
};
use crate::intlinalg::{quotient_invariants, IntMatrix, IntVec, Lattice};
use crate::ktheory::{compute_k, induced_action, stabilization_check, verify_theorem_2_1};
use crate::lattice_props::{
    check_lemma_1_7, check_t_condition, diagram_cor_1_18, find_equivariant_projection, impurity_witness,
    quotient_is_free, DiagramOutcome, InclusionPair,
};
use crate::presentation::{build_aug, find_invariant_basis, SearchOptions};
use crate::zmod::{build, FinMod, ModSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PRECONDITION: i32 = 65;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "cyclat", version, about = "Z[C_p]-module presentations and graph K-theory with prime-order symmetry")]
pub struct Cli {
    /// Prime order of the acting group.
    #[arg(long, global = true, default_value_t = 2)]
    pub p: usize,
    /// Depth to which rays are instantiated.
    #[arg(long, global = true, default_value_t = 3)]
    pub depth: usize,
    /// Seed for the invariant-basis search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of free summands adjoined during the search.
    #[arg(long, global = true, default_value_t = 3)]
    pub kmax: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ring identities h, f, g in Z[x]/(x^p - 1).
    Ring {
        /// Largest exponent k in the power identity.
        #[arg(long, default_value_t = 3)]
        kmax_power: usize,
    },
    /// Finite modules.
    Module {
        #[command(subcommand)]
        action: ModuleAction,
    },
    /// A submodule M0 of M and the induced N_{M0} in N_M.
    Inclusion {
        #[command(subcommand)]
        action: InclusionAction,
    },
    /// Realization and strand graphs.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ModuleAction {
    /// Order, rank and action of the module.
    Build { spec: String },
    /// The presentation 0 -> N_M -> ZM -> M -> 0.
    Present { spec: String },
    /// Invariant basis of N_M, stabilizing if needed.
    InvariantBasis { spec: String },
    /// Whether ker(s) ∩ N_M = tN_M.
    CheckNoncyc { spec: String },
}

#[derive(Debug, Args)]
pub struct InclusionArgs {
    pub spec: String,
    /// Named submodule: t (tM), fixed, all, zero.
    #[arg(long, conflicts_with = "gens")]
    pub sub: Option<String>,
    /// Generators of M0, e.g. "(1,0);(0,1)".
    #[arg(long)]
    pub gens: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum InclusionAction {
    /// Decide (tM) ∩ M0 = tM0.
    Check(InclusionArgs),
    /// Impurity witness, or the equivariant projection when none exists.
    Witness(InclusionArgs),
    /// The diagram with exact rows, or a refusal with witness.
    Diagram(InclusionArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[command(subcommand)]
    pub source: GraphSource,
}

#[derive(Debug, Subcommand)]
pub enum GraphSource {
    /// Realization graph for a module spec, or for a JSON input file via --input.
    #[command(visible_alias = "spielberg")]
    Realization {
        spec: Option<String>,
        /// JSON file holding a full graph input (group, A, π_0, B).
        #[arg(long)]
        input: Option<String>,
    },
    /// Center emitter with m strands.
    Strand {
        m: usize,
        /// Strands from this index on are cycled; the rest are fixed.
        #[arg(long)]
        cycled_from: Option<usize>,
        /// Strand to delete after building.
        #[arg(long)]
        delete: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GraphAction {
    /// Vertex and edge counts, emitters, automorphism order.
    Build(GraphArgs),
    /// K0 and K1 at the chosen depth, with the induced automorphism.
    Ktheory(GraphArgs),
    /// Check every property of a realization graph against its input.
    Verify(GraphArgs),
    /// Graphviz export of the instantiated graph.
    Dot(GraphArgs),
}

/// Output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    verdict: Option<bool>,
    text: String,
    data: Value,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::NotPrime(_) => EXIT_USAGE,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_PRECONDITION,
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok(rep) => {
            let code = match rep.verdict {
                Some(false) => EXIT_FALSE,
                _ => EXIT_OK,
            };
            let stdout = match cli.format {
                Format::Text => rep.text,
                Format::Structured => {
                    let doc = json!({
                        "p": cli.p,
                        "verdict": rep.verdict,
                        "result": rep.data,
                    });
                    serde_json::to_string_pretty(&doc).expect("json") + "\n"
                }
            };
            Outcome { code, stdout, stderr: String::new() }
        }
        Err(e) => Outcome { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn opts(cli: &Cli) -> SearchOptions {
    SearchOptions { seed: cli.seed, kmax: cli.kmax, ..SearchOptions::default() }
}

fn dispatch(cli: &Cli) -> Result<Report, Error> {
    crate::check_prime(cli.p)?;
    if cli.depth < 2 {
        return Err(Error::Parse("--depth must be at least 2".into()));
    }
    match &cli.command {
        Command::Ring { kmax_power } => cmd_ring(cli.p, *kmax_power),
        Command::Module { action } => cmd_module(cli, action),
        Command::Inclusion { action } => cmd_inclusion(cli, action),
        Command::Graph { action } => cmd_graph(cli, action),
    }
}

/// Reads a spec argument, which may name a file holding the expression.
fn load_spec(arg: &str) -> Result<ModSpec, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{arg}: {e}")))?;
        let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join(" ");
        ModSpec::parse(&body)
    } else {
        ModSpec::parse(arg)
    }
}

fn load_module(arg: &str, p: usize) -> Result<FinMod, Error> {
    build(&load_spec(arg)?, p)
}

fn vec_str(v: &[BigInt]) -> String {
    format!("({})", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
}

fn mat_json(m: &IntMatrix) -> Value {
    json!(m.row_vecs().iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn vecs_json(vs: &[IntVec]) -> Value {
    json!(vs.iter().map(|v| v.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn cmd_ring(p: usize, kmax: usize) -> Result<Report, Error> {
    let l = solve_lemma_1_11(p)?;
    let mut text = String::new();
    writeln!(text, "p = {p}").ok();
    writeln!(text, "h = {}", l.h).ok();
    writeln!(text, "f = {}", l.f).ok();
    writeln!(text, "g = {}", l.g).ok();
    writeln!(text, "t^(p-1) = p h + s: ok").ok();
    writeln!(text, "p = -t^(p-1) + t^p f + s g: ok").ok();
    let mut powers = Vec::new();
    for k in 1..=kmax {
        let ok = power_identity_check(p, k)?;
        if !ok {
            return Err(Error::Internal(format!("power identity fails at k = {k}")));
        }
        powers.push(k);
    }
    writeln!(text, "power identity checked for k = 1..{kmax}").ok();
    let data = json!({
        "h": l.h.to_string(),
        "f": l.f.to_string(),
        "g": l.g.to_string(),
        "beta": l.beta.to_string(),
        "power_identity_k": powers,
    });
    Ok(Report { verdict: Some(true), text, data })
}

fn cmd_module(cli: &Cli, action: &ModuleAction) -> Result<Report, Error> {
    let p = cli.p;
    match action {
        ModuleAction::Build { spec } => {
            let m = load_module(spec, p)?;
            let inv = quotient_invariants(&Lattice::full(m.rank()), m.relations())?;
            let order = m.order().map(|o| o.to_string()).unwrap_or_else(|| "infinite".into());
            let text = format!(
                "module {}\norder {order}\nabelian group {}\ncoordinate rank {}\naction order {}\n",
                m.spec().map(ToString::to_string).unwrap_or_default(),
                inv.describe(),
                m.rank(),
                m.action_order()
            );
            let data = json!({
                "spec": m.spec().map(ToString::to_string),
                "order": order,
                "group": inv.describe(),
                "rank": m.rank(),
                "action": mat_json(m.action()),
                "action_order": m.action_order(),
            });
            Ok(Report { verdict: None, text, data })
        }
        ModuleAction::Present { spec } => {
            let m = load_module(spec, p)?;
            let pres = build_aug(&m)?;
            let ml = pres.mod_lattice();
            let noncyc = ml.is_noncyclotomic();
            let index = pres.n.index().map(|i| i.to_string()).unwrap_or_else(|| "infinite".into());
            let text = format!(
                "|M| = {}\nrank N_M = {}\n[ZM : N_M] = {index}\nnoncyclotomic {noncyc}\n",
                pres.size(),
                pres.n.rank()
            );
            let data = json!({
                "size": pres.size(),
                "rank": pres.n.rank(),
                "index": index,
                "noncyclotomic": noncyc,
                "elements": pres.elements.iter().map(|x| m.format_element(x)).collect::<Vec<_>>(),
                "basis": vecs_json(pres.n.vectors()),
            });
            Ok(Report { verdict: None, text, data })
        }
        ModuleAction::InvariantBasis { spec } => {
            let m = load_module(spec, p)?;
            let pres = build_aug(&m)?;
            let found = find_invariant_basis(&pres, true, &opts(cli))?;
            let b = &found.basis;
            let mut text = format!(
                "rank {} basis: {} orbit(s) + {} fixed, method {:?}, stabilization k = {}\n",
                b.rank(),
                b.orbits.len(),
                b.fixed.len(),
                found.method,
                found.k
            );
            for (i, o) in b.orbits.iter().enumerate() {
                writeln!(text, "orbit {i}: {}", o.iter().map(|v| vec_str(v)).collect::<Vec<_>>().join(" -> ")).ok();
            }
            for (i, f) in b.fixed.iter().enumerate() {
                writeln!(text, "fixed {i}: {}", vec_str(f)).ok();
            }
            let data = json!({
                "rank": b.rank(),
                "k": found.k,
                "method": format!("{:?}", found.method),
                "orbits": b.orbits.iter().map(|o| vecs_json(o)).collect::<Vec<_>>(),
                "fixed": vecs_json(&b.fixed),
            });
            Ok(Report { verdict: None, text, data })
        }
        ModuleAction::CheckNoncyc { spec } => {
            let m = load_module(spec, p)?;
            let pres = build_aug(&m)?;
            let ml = pres.mod_lattice();
            let ok = ml.is_noncyclotomic();
            let text = format!("ker(s) ∩ N_M = tN_M: {ok}\n");
            let data = json!({
                "noncyclotomic": ok,
                "t_lattice_rank": ml.t_lattice().rank(),
                "s_kernel_rank": ml.s_kernel().rank(),
            });
            Ok(Report { verdict: Some(ok), text, data })
        }
    }
}

fn parse_gens(text: &str, rank: usize) -> Result<Vec<IntVec>, Error> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|g| {
            let inner = g.trim_start_matches('(').trim_end_matches(')');
            let v = inner
                .split(',')
                .map(|c| c.trim().parse::<BigInt>().map_err(|_| Error::Parse(format!("bad generator {g}"))))
                .collect::<Result<IntVec, Error>>()?;
            if v.len() != rank {
                return Err(Error::Parse(format!("generator {g} needs {rank} coordinates")));
            }
            Ok(v)
        })
        .collect()
}

fn load_pair(cli: &Cli, args: &InclusionArgs) -> Result<InclusionPair, Error> {
    let m = load_module(&args.spec, cli.p)?;
    let sub = match (&args.sub, &args.gens) {
        (Some(name), _) => match name.as_str() {
            "t" => m.t_image(),
            "fixed" => m.fixed_submodule(),
            "all" => Lattice::full(m.rank()),
            "zero" => m.relations().clone(),
            other => return Err(Error::Parse(format!("unknown submodule {other}; use t, fixed, all or zero"))),
        },
        (None, Some(g)) => m.submodule_generated(&parse_gens(g, m.rank())?)?,
        (None, None) => return Err(Error::Parse("give --sub or --gens".into())),
    };
    InclusionPair::new(&m, sub)
}

fn cmd_inclusion(cli: &Cli, action: &InclusionAction) -> Result<Report, Error> {
    match action {
        InclusionAction::Check(args) => {
            let pair = load_pair(cli, args)?;
            let t = check_t_condition(&pair)?;
            let l17 = check_lemma_1_7(&pair)?;
            let free = quotient_is_free(&pair)?;
            let text = format!(
                "|M0| = {}\n|(tM) ∩ M0| = {}, |tM0| = {}\n(tM) ∩ M0 = tM0: {}\n(tN_M) ∩ N_M0 = tN_M0: {}\nN_M/N_M0 torsion-free: {free}\n",
                pair.sub_indices.len(),
                t.left_order,
                t.right_order,
                t.holds,
                l17.holds
            );
            let data = json!({
                "sub_order": pair.sub_indices.len(),
                "left_order": t.left_order.to_string(),
                "right_order": t.right_order.to_string(),
                "condition": t.holds,
                "lattice_identity": l17.holds,
                "quotient_torsion_free": free,
            });
            Ok(Report { verdict: Some(t.holds), text, data })
        }
        InclusionAction::Witness(args) => {
            let pair = load_pair(cli, args)?;
            match impurity_witness(&pair)? {
                Some(w) => {
                    let m = &pair.module;
                    let text = format!(
                        "condition fails\nz = {}\nxi = {}\nlambda = s\ns xi = {} lies in N_M0 but not in s N_M0\n",
                        m.format_element(&w.z),
                        vec_str(&w.xi),
                        vec_str(&w.s_xi)
                    );
                    let data = json!({
                        "z": m.format_element(&w.z),
                        "xi": vecs_json(std::slice::from_ref(&w.xi))[0],
                        "s_xi": vecs_json(std::slice::from_ref(&w.s_xi))[0],
                        "lambda": "s",
                    });
                    Ok(Report { verdict: Some(false), text, data })
                }
                None => {
                    let proj = find_equivariant_projection(&pair.n(), &pair.n0)?
                        .ok_or_else(|| Error::Internal("condition holds but no projection".into()))?;
                    let text = "condition holds; equivariant projection N_M -> N_M0 found\n".to_string();
                    Ok(Report { verdict: Some(true), text, data: json!({ "projection": mat_json(&proj.matrix) }) })
                }
            }
        }
        InclusionAction::Diagram(args) => {
            let pair = load_pair(cli, args)?;
            match diagram_cor_1_18(&pair, &opts(cli))? {
                DiagramOutcome::Diagram(d) => {
                    let text = format!(
                        "diagram verified\ntop: |M| = {}, N rank {}, P rank {}\nbottom: |M0| = {}, N0 rank {}, P0 rank {}\nfree summands k = {}\n",
                        d.top.presentation.size(),
                        d.top.n1.basis.rank(),
                        d.top.n2.rank(),
                        d.bottom.presentation.size(),
                        d.bottom.n1.basis.rank(),
                        d.bottom.n2.rank(),
                        d.top.k
                    );
                    let data = json!({
                        "k": d.top.k,
                        "top": {"size": d.top.presentation.size(), "n_rank": d.top.n1.basis.rank(), "p_rank": d.top.n2.rank()},
                        "bottom": {"size": d.bottom.presentation.size(), "n_rank": d.bottom.n1.basis.rank(), "p_rank": d.bottom.n2.rank()},
                        "inclusion": d.inclusion,
                    });
                    Ok(Report { verdict: Some(true), text, data })
                }
                DiagramOutcome::Refusal(w) => {
                    let text = format!(
                        "no such diagram: s-impurity witness z = {}, xi = {}\n",
                        pair.module.format_element(&w.z),
                        vec_str(&w.xi)
                    );
                    Ok(Report { verdict: Some(false), text, data: json!({ "z": pair.module.format_element(&w.z) }) })
                }
            }
        }
    }
}

fn load_graph(cli: &Cli, src: &GraphSource) -> Result<(GadgetGraph, Option<GraphSpecInput>), Error> {
    match src {
        GraphSource::Realization { spec, input } => {
            let inp = match (spec, input) {
                (_, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
                    let raw: GraphSpecInput =
                        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
                    GraphSpecInput::new(raw.group, raw.a_labels, raw.a_perm, raw.pi0, raw.b)?
                }
                (Some(s), None) => GraphSpecInput::from_module(&load_module(s, cli.p)?, &opts(cli))?,
                (None, None) => return Err(Error::Parse("give a module spec or --input".into())),
            };
            Ok((build_spielberg(&inp)?, Some(inp)))
        }
        GraphSource::Strand { m, cycled_from, delete } => {
            let from = cycled_from.unwrap_or(if *m > cli.p { m - cli.p } else { 0 });
            let mut g = build_strand_graph(*m, from)?;
            if let Some(i) = delete {
                g = delete_strand(&g, *i)?;
            }
            Ok((g, None))
        }
    }
}

fn cmd_graph(cli: &Cli, action: &GraphAction) -> Result<Report, Error> {
    let depth = cli.depth;
    match action {
        GraphAction::Build(a) => {
            let (g, inp) = load_graph(cli, &a.source)?;
            let auto = validate_automorphism(&g)?;
            let irr = is_irreducible(&g)?;
            let text = format!(
                "core vertices {}\nrays {}\ninfinite emitters {}\nautomorphism order {}{}\nirreducible {irr}\nvertices at depth {depth}: {}\n",
                g.vertices.len(),
                g.rays.len(),
                g.emitters().len(),
                auto.order,
                if auto.degenerate { " (degenerate)" } else { "" },
                g.vertex_count(depth)
            );
            let data = json!({
                "core_vertices": g.vertices.iter().map(|v| v.label.clone()).collect::<Vec<_>>(),
                "rays": g.rays.iter().map(|r| r.family.clone()).collect::<Vec<_>>(),
                "automorphism_order": auto.order,
                "degenerate": auto.degenerate,
                "irreducible": irr,
                "input": inp.map(|i| serde_json::to_value(i).expect("json")),
            });
            Ok(Report { verdict: None, text, data })
        }
        GraphAction::Ktheory(a) => {
            let (g, _) = load_graph(cli, &a.source)?;
            let kr = induced_action(&g, compute_k(&g, depth)?)?;
            let stab = stabilization_check(&g, &[depth, depth + 1])?;
            let mut text = format!("K-theory {}\nstable across depths {:?}: {}\n", kr.describe(), stab.depths, stab.stable);
            if let Some(m) = &kr.induced_k1 {
                if m.rows() > 0 {
                    writeln!(text, "induced K1 action {:?}", m.row_vecs().iter().map(|r| vec_str(r)).collect::<Vec<_>>()).ok();
                }
            }
            let data = json!({
                "k0": kr.k0.describe(),
                "k1_rank": kr.k1_rank(),
                "k0_orders": kr.k0_orders.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "induced_k0": kr.induced_k0.as_ref().map(mat_json),
                "induced_k1": kr.induced_k1.as_ref().map(mat_json),
                "stable": stab.stable,
            });
            Ok(Report { verdict: Some(stab.stable), text, data })
        }
        GraphAction::Verify(a) => {
            let (g, inp) = load_graph(cli, &a.source)?;
            let Some(inp) = inp else {
                return Err(Error::Precondition("verify applies to realization graphs".into()));
            };
            let rep = verify_theorem_2_1(&g, &inp, depth)?;
            let k1 = if rep.k1_zero { "0" } else { "nonzero" };
            let map = if rep.class_map_ok { "OK" } else { "FAILED" };
            let mut text = format!("K0 = {}, K1 = {k1}, map {map}\n", rep.k0.describe());
            for f in &rep.failures {
                writeln!(text, "failed: {f}").ok();
            }
            if rep.degenerate_order {
                writeln!(text, "note: automorphism has order 1").ok();
            }
            let data = serde_json::to_value(&rep).expect("json");
            Ok(Report { verdict: Some(rep.all_pass()), text, data })
        }
        GraphAction::Dot(a) => {
            let (g, _) = load_graph(cli, &a.source)?;
            let text = to_dot(&g, depth)?;
            Ok(Report { verdict: None, data: json!({ "dot": text }), text })
        }
    }
}
