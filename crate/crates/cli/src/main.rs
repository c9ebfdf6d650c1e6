use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use cdga::algebra::{Algebra, Expr};
use cdga::document::{DocFlags, Document, Loaded};
use cdga::lefschetz::{lefschetz_test, universal_lefschetz_obstruction};
use cdga::massey::{a_massey, higher_massey, triple_massey, MasseyReport, Verdict};
use cdga::minmodel::{build_minimal_model, formality_verdict, s_formality_check, Formality, FormalityOptions, SFormality};
use cdga::models::{self, circle_bundle, preset_ids};
use cdga::{verify, CohomologyRing, CycScalar};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "cdga", version, about = "Exact computations with differential graded algebras")]
struct Cli {
    /// Override the degree cap of the input algebra.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    cap: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Exit with status 2 when a verdict is inconclusive.
    #[arg(long, global = true)]
    strict: bool,
    /// Search budget for Massey products and triple scans.
    #[arg(long, global = true, default_value_t = 2000)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a document and report its shape.
    Validate { input: Option<String> },
    /// Betti numbers and class representatives.
    Cohomology {
        input: Option<String>,
        /// Ignore an invariant model and use the whole algebra.
        #[arg(long)]
        parent: bool,
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Cohomology of the invariant subcomplex of the declared action.
    Invariants {
        input: Option<String>,
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Triple Massey product of three classes.
    Massey {
        input: Option<String>,
        /// Class selector: a class name, generator name or inline JSON expression.
        #[arg(long = "class", num_args = 1, required = true)]
        classes: Vec<String>,
    },
    /// a-Massey product; defaults to the hints stored in the document.
    Amassey {
        input: Option<String>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long = "b")]
        bs: Vec<String>,
    },
    /// Massey product of order 4 to 6.
    HigherMassey {
        input: Option<String>,
        #[arg(long = "class", num_args = 1, required = true)]
        classes: Vec<String>,
    },
    /// Hard Lefschetz ranks for a degree-2 class, or the class-free obstruction.
    Lefschetz {
        input: Option<String>,
        #[arg(long, default_value = "omega")]
        omega: String,
        #[arg(long)]
        half_dim: Option<usize>,
        #[arg(long)]
        universal: bool,
        #[arg(long, default_value_t = 1)]
        degree: usize,
    },
    /// Adjoin a degree-1 generator whose differential is the given class.
    CircleBundle {
        input: Option<String>,
        #[arg(long)]
        euler: String,
        #[arg(long, default_value = "x")]
        name: String,
    },
    /// Graded tensor product of two documents.
    Tensor { left: String, right: String },
    /// Minimal model through a degree bound.
    MinimalModel {
        input: Option<String>,
        #[arg(long)]
        bound: usize,
        /// Also run the s-formality check.
        #[arg(long)]
        s: Option<usize>,
    },
    /// Formality verdict with its certificate.
    Formality {
        input: Option<String>,
        #[arg(long)]
        poincare_dim: Option<usize>,
        #[arg(long)]
        simply_connected: bool,
    },
    /// Emit a preset document.
    Preset {
        id: Option<String>,
        /// Parameter assignment such as n=4.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        list: bool,
    },
    /// Run the built-in preset checks.
    VerifyPaper,
}

struct Output {
    text: String,
    json: serde_json::Value,
    inconclusive: bool,
    failed: bool,
}

impl Output {
    fn new<T: Serialize>(text: String, value: &T) -> anyhow::Result<Self> {
        Ok(Output {
            text,
            json: serde_json::to_value(value)?,
            inconclusive: false,
            failed: false,
        })
    }
}

fn read_input(path: Option<&str>) -> anyhow::Result<String> {
    let mut s = String::new();
    match path {
        None | Some("-") => {
            io::stdin().read_to_string(&mut s).context("reading standard input")?;
        }
        Some(p) => s = std::fs::read_to_string(p).with_context(|| format!("reading {p}"))?,
    }
    Ok(s)
}

fn load(cli: &Cli, path: Option<&str>) -> anyhow::Result<Loaded> {
    let doc = Document::from_json(&read_input(path)?)?;
    Ok(Loaded::with_cap(doc, cli.cap.map(|c| c as usize))?)
}

fn expr_text(alg: &Algebra, e: &Expr) -> String {
    match alg.parse_expr(e, None) {
        Ok(x) => alg.fmt(&x),
        Err(_) => serde_json::to_string(e).unwrap_or_default(),
    }
}

fn vec_text(v: &[CycScalar]) -> String {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn ring_text(title: &str, h: &CohomologyRing) -> String {
    let alg = h.algebra();
    let mut s = format!("{title}\nbetti: {}\n", join(&h.betti_numbers()));
    for k in 0..=h.max_degree() {
        let reps: Vec<String> = h.reps(k).iter().map(|r| alg.fmt(r)).collect();
        s += &format!("H^{k}: {}\n", if reps.is_empty() { "0".into() } else { reps.join(", ") });
    }
    if h.volume().is_some() {
        s += &format!("poincare pairing: {}\n", if h.report().pairing_ok { "non-degenerate" } else { "degenerate" });
    }
    s
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn massey_text(alg: &Algebra, r: &MasseyReport) -> String {
    let mut s = format!("verdict: {}\n", verdict_name(r.verdict));
    s += &format!("degree: {}\n", r.degree);
    if let Some(o) = &r.obstruction {
        s += &format!("obstruction: {} = {}\n", o.name, expr_text(alg, &o.value));
    }
    if let Some(rep) = &r.representative {
        s += &format!("representative: {}\n", expr_text(alg, rep));
    }
    if let Some(c) = &r.class {
        s += &format!("class: {}\n", vec_text(c));
    }
    s += &format!("indeterminacy dimension: {}\n", r.indeterminacy.len());
    for v in &r.indeterminacy {
        s += &format!("  {}\n", vec_text(v));
    }
    for c in &r.certificate {
        s += &format!("{} = {}\n", c.name, expr_text(alg, &c.value));
    }
    s += &format!("route: {}\n", r.route);
    s
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Nonzero => "NONZERO",
        Verdict::Zero => "ZERO",
        Verdict::Inconclusive => "INCONCLUSIVE",
        Verdict::Undefined => "UNDEFINED",
    }
}

fn massey_output(alg: &Algebra, r: &MasseyReport) -> anyhow::Result<Output> {
    let mut out = Output::new(massey_text(alg, r), r)?;
    out.inconclusive = r.verdict == Verdict::Inconclusive;
    Ok(out)
}

fn parse_params(raw: &[String]) -> anyhow::Result<BTreeMap<String, usize>> {
    raw.iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("parameter {p:?} is not of the form name=value"))?;
            let v = v.trim().parse::<usize>().with_context(|| format!("parameter {p:?}"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let budget = cli.budget.max(1);
    match &cli.command {
        Command::Validate { input } => {
            let l = load(cli, input.as_deref())?;
            let alg = &l.alg;
            let value = serde_json::json!({
                "valid": true,
                "name": l.label(),
                "generators": alg.ngens(),
                "degrees": (0..alg.ngens()).map(|i| alg.gen_degree(i)).collect::<Vec<_>>(),
                "cap": alg.cap(),
                "zeta": alg.modulus(),
                "action_order": l.action.as_ref().map(|a| a.order()),
                "minimal": alg.flags().is_minimal,
            });
            let text = format!(
                "valid: {} ({} generators, degree cap {}, Q(zeta_{}){})\n",
                l.label(),
                alg.ngens(),
                alg.cap(),
                alg.modulus(),
                l.action.as_ref().map_or(String::new(), |a| format!(", action of order {}", a.order()))
            );
            Output::new(text, &value)
        }
        Command::Cohomology { input, parent, max_degree } => {
            let l = load(cli, input.as_deref())?;
            let h = if *parent { l.parent_ring(*max_degree)? } else { l.ring(*max_degree)? };
            Output::new(ring_text(l.label(), &h), &h.report())
        }
        Command::Invariants { input, max_degree } => {
            let l = load(cli, input.as_deref())?;
            let h = l.invariant_ring(*max_degree)?;
            Output::new(ring_text(&format!("{} (invariant subcomplex)", l.label()), &h), &h.report())
        }
        Command::Massey { input, classes } => {
            let l = load(cli, input.as_deref())?;
            if classes.len() != 3 {
                bail!("a triple product needs exactly three --class arguments");
            }
            let xs = classes.iter().map(|c| l.class(c)).collect::<cdga::Result<Vec<_>>>()?;
            let h = l.ring(None)?;
            massey_output(&l.alg, &triple_massey(&h, &xs[0], &xs[1], &xs[2])?)
        }
        Command::Amassey { input, a, bs } => {
            let l = load(cli, input.as_deref())?;
            let (a, bs) = match a {
                Some(a) => (a.clone(), bs.clone()),
                None => {
                    let hint = l.doc.amassey.first().ok_or_else(|| anyhow!("no --a given and the document has no a-Massey hint"))?;
                    (hint.a.clone(), hint.bs.clone())
                }
            };
            if bs.is_empty() {
                bail!("an a-Massey product needs at least one --b");
            }
            let ae = l.class(&a)?;
            let be = bs.iter().map(|b| l.class(b)).collect::<cdga::Result<Vec<_>>>()?;
            let h = l.ring(None)?;
            let r = a_massey(&h, &ae, &be, budget)?;
            let mut out = massey_output(&l.alg, &r)?;
            if r.is_nonzero() {
                if let (Some(rep), Some(_)) = (&r.rep_element, h.volume()) {
                    if rep.degree() == h.top_degree() {
                        let int = h.integrate_element(rep)?;
                        out.text += &format!("integral: {int}\n");
                        out.json["integral"] = serde_json::to_value(&int)?;
                    }
                }
            }
            Ok(out)
        }
        Command::HigherMassey { input, classes } => {
            let l = load(cli, input.as_deref())?;
            let xs = classes.iter().map(|c| l.class(c)).collect::<cdga::Result<Vec<_>>>()?;
            let h = l.ring(None)?;
            massey_output(&l.alg, &higher_massey(&h, &xs, budget)?)
        }
        Command::Lefschetz {
            input,
            omega,
            half_dim,
            universal,
            degree,
        } => {
            let l = load(cli, input.as_deref())?;
            let h = l.ring(None)?;
            if *universal {
                let r = universal_lefschetz_obstruction(&h, *degree)?;
                let mut text = format!("degree {} of half dimension {}\nwitnesses: {}\n", r.k, r.half_dim, r.witnesses.len());
                for e in &r.witness_elements {
                    text += &format!("  {}\n", expr_text(&l.alg, e));
                }
                return Output::new(text, &r);
            }
            let w = l.class(omega)?;
            let n = half_dim.unwrap_or(h.top_degree() / 2);
            let r = lefschetz_test(&h, &w, n)?;
            let mut text = format!("omega: {}\n", l.alg.fmt(&w));
            for d in &r.per_degree {
                text += &format!(
                    "k={}: rank {} ({} -> {}){}\n",
                    d.k,
                    d.rank,
                    d.source_dim,
                    d.target_dim,
                    if d.iso { "" } else { "  not an isomorphism" }
                );
                for e in &d.kernel_elements {
                    text += &format!("  kernel: {}\n", expr_text(&l.alg, e));
                }
            }
            text += &format!("hard lefschetz: {}\n", if r.overall { "holds" } else { "fails" });
            Output::new(text, &r)
        }
        Command::CircleBundle { input, euler, name } => {
            let l = load(cli, input.as_deref())?;
            let e = l.class(euler)?;
            let spec = circle_bundle(&l.alg, &e, name)?;
            let mut doc = l.doc.clone();
            doc.algebra = spec;
            doc.name = Some(format!("{} circle bundle", l.label()));
            if let Some(act) = &mut doc.action {
                act.images.insert(name.clone(), vec![cdga::Term::unit(&[name])]);
            }
            if let Some(v) = &mut doc.volume {
                v.push(name.clone());
            }
            doc.amassey.clear();
            doc.flags = DocFlags {
                poincare_dim: doc.flags.poincare_dim.map(|p| p + 1),
                simply_connected: false,
            };
            Loaded::new(doc.clone())?;
            document_output(&doc)
        }
        Command::Tensor { left, right } => {
            let a = load(cli, Some(left))?;
            let b = load(cli, Some(right))?;
            if a.doc.action.is_some() || b.doc.action.is_some() {
                bail!("tensor products of documents with actions are not supported");
            }
            let mut doc = Document::new(models::tensor(&a.doc.algebra, &b.doc.algebra)?);
            doc.name = Some(format!("{} x {}", a.label(), b.label()));
            for (k, v) in a.doc.classes.iter().chain(&b.doc.classes) {
                if doc.classes.insert(k.clone(), v.clone()).is_some() {
                    bail!("class name {k:?} appears in both factors");
                }
            }
            if let (Some(x), Some(y)) = (&a.doc.volume, &b.doc.volume) {
                doc.volume = Some(x.iter().chain(y).cloned().collect());
            }
            doc.flags = DocFlags {
                poincare_dim: a.doc.flags.poincare_dim.zip(b.doc.flags.poincare_dim).map(|(p, q)| p + q),
                simply_connected: a.doc.flags.simply_connected && b.doc.flags.simply_connected,
            };
            Loaded::new(doc.clone())?;
            document_output(&doc)
        }
        Command::MinimalModel { input, bound, s } => {
            let l = load(cli, input.as_deref())?;
            let h = l.ring(None)?;
            let mm = build_minimal_model(&h, *bound)?;
            let m = mm.algebra();
            let mut text = format!("bound: {}\ndegrees: {}\n", bound, join(&mm.degrees()));
            for g in mm.generators() {
                text += &format!(
                    "{} (degree {}, {}): d = {}, image = {}\n",
                    g.name,
                    g.degree,
                    if g.closed { "C" } else { "N" },
                    expr_text(m, &g.differential),
                    expr_text(&l.alg, &g.image)
                );
            }
            let ranks = mm.cohomology_ranks(&h)?;
            for (k, (rank, bm, bt)) in ranks.iter().enumerate() {
                text += &format!("H^{k}: rank {rank}, model {bm}, target {bt}\n");
            }
            let mut value = serde_json::to_value(mm.report())?;
            value["cohomology_ranks"] = serde_json::to_value(&ranks)?;
            let mut out = Output {
                text,
                json: value,
                inconclusive: false,
                failed: false,
            };
            if let Some(s) = s {
                let sf = s_formality_check(&mm, *s)?;
                out.text += &format!("{s}-formality: {:?} ({})\n", sf.verdict, sf.route);
                out.inconclusive = sf.verdict == SFormality::Inconclusive;
                out.json["s_formality"] = serde_json::to_value(&sf)?;
            }
            Ok(out)
        }
        Command::Formality {
            input,
            poincare_dim,
            simply_connected,
        } => {
            let l = load(cli, input.as_deref())?;
            let opts = FormalityOptions {
                budget,
                poincare_dim: *poincare_dim,
                simply_connected: simply_connected.then_some(true),
            };
            let r = formality_verdict(&l, &opts)?;
            let name = match r.verdict {
                Formality::Formal => "FORMAL",
                Formality::NotFormal => "NOT_FORMAL",
                Formality::Unknown => "UNKNOWN",
            };
            let mut text = format!("{}: {name}\nroute: {}\n", l.label(), r.route);
            if let Some(m) = &r.massey {
                text += &massey_text(&l.alg, m);
            }
            if let Some(sf) = &r.s_formality {
                text += &format!("{}-formality: {:?} ({})\n", sf.s, sf.verdict, sf.route);
            }
            for n in &r.notes {
                text += &format!("note: {n}\n");
            }
            let mut out = Output::new(text, &r)?;
            out.inconclusive = r.verdict == Formality::Unknown;
            Ok(out)
        }
        Command::Preset { id, params, list } => {
            if *list {
                let ids = preset_ids();
                return Output::new(ids.join("\n") + "\n", &ids);
            }
            let id = id.as_deref().ok_or_else(|| anyhow!("give a preset id or --list"))?;
            let mut doc = models::preset(id, &parse_params(params)?)?;
            if let Some(c) = cli.cap {
                doc.algebra.degree_cap = Some(c as usize);
                Loaded::new(doc.clone())?;
            }
            document_output(&doc)
        }
        Command::VerifyPaper => {
            let checks = verify::run_all(budget);
            let mut text = String::new();
            for c in &checks {
                text += &format!("{:>2}  {}  {}\n", c.id, if c.passed { "PASS" } else { "FAIL" }, c.label);
                for d in &c.details {
                    text += &format!("      {d}\n");
                }
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            text += &format!("{passed}/{} checks passed\n", checks.len());
            let mut out = Output::new(text, &checks)?;
            out.failed = passed != checks.len();
            Ok(out)
        }
    }
}

/// Documents are always written as JSON so that commands can be piped.
fn document_output(doc: &Document) -> anyhow::Result<Output> {
    let json = serde_json::to_value(doc)?;
    Ok(Output {
        text: doc.to_json() + "\n",
        json,
        inconclusive: false,
        failed: false,
    })
}

fn error_code(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<cdga::Error>() {
        Some(err) => err.code(),
        None if e.downcast_ref::<io::Error>().is_some() => "IO",
        None => "USAGE",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut stdout = io::stdout().lock();
    match run(&cli) {
        Ok(out) => {
            let is_doc = matches!(cli.command, Command::Preset { list: false, .. } | Command::CircleBundle { .. } | Command::Tensor { .. });
            let body = if cli.format == Format::Json && !is_doc {
                serde_json::to_string_pretty(&out.json).expect("reports serialize") + "\n"
            } else {
                out.text
            };
            let _ = stdout.write_all(body.as_bytes());
            if out.failed {
                ExitCode::from(1)
            } else if cli.strict && out.inconclusive {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            let code = error_code(&e);
            let message = format!("{e:#}");
            let mut stderr = io::stderr().lock();
            let _ = match cli.format {
                Format::Json => writeln!(stderr, "{}", serde_json::json!({"error": {"code": code, "message": message}})),
                Format::Text => writeln!(stderr, "error[{code}]: {message}"),
            };
            ExitCode::from(1)
        }
    }
}
