//! Command-line front end: lattice inspection, term evaluation, the
//! extension principle, assessment aggregation, and cognitive map runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mvcm_core::aggregation::{difference, nary_mean, MeanKind};
use mvcm_core::lattice::Lattice;
use mvcm_core::mvcm::{run, Combine, RenderFormat, RunConfig, WeightMode};
use mvcm_core::mvset::{classical_extend, extend};
use mvcm_core::textio::{load, parse, LoadConfig, Model};

#[derive(Parser)]
#[command(name = "mvcm", version, about = "Finite-lattice algebra and multi-valued cognitive maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect lattices declared in a document
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Evaluate a term at a valuation in a lattice
    Eval(EvalArgs),
    /// Apply the extension principle to multi-valued sets
    Extend(ExtendArgs),
    /// Pessimistic or optimistic mean of assessment sets
    Mean(MeanArgs),
    /// Difference measure of two assessment sets
    Diff(DiffArgs),
    /// Cognitive map operations
    #[command(subcommand)]
    Map(MapCmd),
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Validate and report structure (distributive, atomic, residuated, ...)
    Check(SelectArgs),
    /// Print elements, bounds, covers, and atoms
    Show(SelectArgs),
}

#[derive(Args)]
struct SelectArgs {
    /// DSL document
    file: PathBuf,
    /// Only this lattice (default: all in the document)
    #[arg(long)]
    name: Option<String>,
    /// Skip the cubic validation sweeps (large lattices)
    #[arg(long)]
    skip_exhaustive: bool,
}

#[derive(Args)]
struct EvalArgs {
    file: PathBuf,
    /// Term name declared in the document
    #[arg(long)]
    term: String,
    /// Lattice to evaluate in
    #[arg(long)]
    lattice: String,
    /// Valuation, e.g. `x=a,y=b`
    #[arg(long)]
    at: String,
}

#[derive(Args)]
struct ExtendArgs {
    file: PathBuf,
    /// Term name declared in the document
    #[arg(long)]
    term: String,
    /// Multi-valued set names, one per term parameter
    #[arg(long, num_args = 1.., required = true)]
    args: Vec<String>,
    /// Use the classical sup-min rule instead (for comparison)
    #[arg(long)]
    classical: bool,
}

#[derive(Args)]
struct MeanArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Assessment set names (two or more)
    #[arg(long, num_args = 2.., required = true)]
    sets: Vec<String>,
}

#[derive(Args)]
struct DiffArgs {
    file: PathBuf,
    /// Exactly two assessment set names
    #[arg(long, num_args = 2, required = true)]
    sets: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pessimistic,
    Optimistic,
}

impl From<KindArg> for MeanKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Pessimistic => MeanKind::Pessimistic,
            KindArg::Optimistic => MeanKind::Optimistic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CombineArg {
    Join,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Tsv,
    Markdown,
}

#[derive(Subcommand)]
enum MapCmd {
    /// Iterate a map to a fixed point and print the trace table
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    /// Map name (default: the only map in the document)
    #[arg(long)]
    map: Option<String>,
    #[arg(long, value_enum, default_value = "join")]
    combine: CombineArg,
    /// `single:<i>` (1-based), `enumerate`, `pessimistic`, or `optimistic`
    #[arg(long, default_value = "single:1", value_parser = parse_weights)]
    weights: WeightMode,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Matrix-choice forking depth in enumerate mode
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, value_enum, default_value = "tsv")]
    format: FormatArg,
    /// Write the trace here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_weights(s: &str) -> Result<WeightMode, String> {
    match s {
        "enumerate" => Ok(WeightMode::Enumerate),
        "pessimistic" => Ok(WeightMode::Pessimistic),
        "optimistic" => Ok(WeightMode::Optimistic),
        other => {
            let idx = other
                .strip_prefix("single:")
                .ok_or_else(|| {
                    "expected single:<i>, enumerate, pessimistic or optimistic".to_string()
                })?
                .parse::<usize>()
                .map_err(|e| format!("bad matrix number: {e}"))?;
            if idx == 0 {
                return Err("matrix numbers are 1-based".to_string());
            }
            Ok(WeightMode::Single(idx - 1))
        }
    }
}

fn load_config(skip_exhaustive: bool) -> Result<LoadConfig> {
    let mut config = LoadConfig {
        skip_exhaustive,
        ..LoadConfig::default()
    };
    if let Ok(cap) = std::env::var("MVCM_MAX_LATTICE") {
        config.max_elements = cap
            .parse()
            .with_context(|| format!("MVCM_MAX_LATTICE must be a number, got `{cap}`"))?;
    }
    Ok(config)
}

fn load_model(file: &PathBuf, skip_exhaustive: bool) -> Result<Model> {
    let text = fs::read_to_string(file)
        .with_context(|| format!("cannot read `{}`", file.display()))?;
    let doc = parse(&text)?;
    Ok(load(&doc, &load_config(skip_exhaustive)?)?)
}

fn labels(l: &Lattice, elems: &[mvcm_core::lattice::Elem]) -> String {
    let mut out: Vec<&str> = elems.iter().map(|&e| l.label(e).unwrap_or("?")).collect();
    out.sort_unstable();
    out.join(" ")
}

fn check_report(name: &str, l: &Lattice) -> String {
    let mut out = String::new();
    out.push_str(&format!("lattice {name}: {} elements\n", l.len()));
    out.push_str(&format!(
        "  top: {}  bottom: {}\n",
        l.label(l.top()).unwrap_or("?"),
        l.label(l.bottom()).unwrap_or("?")
    ));
    out.push_str(&format!("  atoms: {}\n", labels(l, &l.atoms())));
    out.push_str(&format!("  generators: {}\n", labels(l, &l.generators())));
    out.push_str(&format!("  distributive: {}\n", l.is_distributive()));
    out.push_str(&format!(
        "  atomic (pairwise generator meets are bottom): {}\n",
        l.is_atomic()
    ));
    out.push_str(&format!(
        "  atomistic (every element is a join of atoms): {}\n",
        l.is_atomistic()
    ));
    out.push_str(&format!(
        "  implication: {}\n",
        if l.is_brouwer() { "available" } else { "unavailable (not Brouwer)" }
    ));
    match l.unit() {
        None => out.push_str("  residuated: no multiplication declared\n"),
        Some(unit) => {
            out.push_str(&format!(
                "  residuated: {} (unit {})\n",
                l.is_residuated(),
                l.label(unit).unwrap_or("?")
            ));
            out.push_str(&format!(
                "  integrally closed: {}\n",
                l.is_integrally_closed()
                    .map(|b| b.to_string())
                    .unwrap_or_else(|_| "n/a (not residuated)".to_string())
            ));
            out.push_str(&format!(
                "  integral: {}\n",
                l.is_integral()
                    .map(|b| b.to_string())
                    .unwrap_or_else(|_| "n/a".to_string())
            ));
        }
    }
    out.push_str(&format!(
        "  atom representation (ring sum, set difference): {}\n",
        if l.has_atom_repr() { "available" } else { "unavailable" }
    ));
    out
}

fn show_report(name: &str, l: &Lattice) -> String {
    let mut out = String::new();
    out.push_str(&format!("lattice {name}: {} elements\n", l.len()));
    out.push_str("  elements:");
    for e in l.elements() {
        out.push_str(&format!(" {}", l.label(e).unwrap_or("?")));
    }
    out.push('\n');
    out.push_str("  covers:");
    for (lo, hi) in l.cover_pairs() {
        out.push_str(&format!(
            " {}<{}",
            l.label(lo).unwrap_or("?"),
            l.label(hi).unwrap_or("?")
        ));
    }
    out.push('\n');
    out.push_str(&format!("  atoms: {}\n", labels(l, &l.atoms())));
    out
}

fn selected_lattices<'m>(
    model: &'m Model,
    name: &Option<String>,
) -> Result<Vec<(&'m String, &'m std::sync::Arc<Lattice>)>> {
    match name {
        Some(n) => {
            let l = model
                .lattices
                .get(n)
                .ok_or_else(|| anyhow!("no lattice `{n}` in the document"))?;
            Ok(vec![(
                model.lattices.get_key_value(n).map(|(k, _)| k).unwrap(),
                l,
            )])
        }
        None => {
            if model.lattices.is_empty() {
                bail!("the document declares no lattices");
            }
            Ok(model.lattices.iter().collect())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Lattice(LatticeCmd::Check(args)) => {
            let model = load_model(&args.file, args.skip_exhaustive)?;
            for (name, l) in selected_lattices(&model, &args.name)? {
                print!("{}", check_report(name, l));
            }
            Ok(())
        }
        Command::Lattice(LatticeCmd::Show(args)) => {
            let model = load_model(&args.file, args.skip_exhaustive)?;
            for (name, l) in selected_lattices(&model, &args.name)? {
                print!("{}", show_report(name, l));
            }
            Ok(())
        }
        Command::Eval(args) => {
            let model = load_model(&args.file, false)?;
            let def = model
                .terms
                .get(&args.term)
                .ok_or_else(|| anyhow!("no term `{}` in the document", args.term))?;
            let lattice = model
                .lattices
                .get(&args.lattice)
                .ok_or_else(|| anyhow!("no lattice `{}` in the document", args.lattice))?;
            let mut valuation = BTreeMap::new();
            for part in args.at.split(',') {
                let (var, label) = part
                    .split_once('=')
                    .ok_or_else(|| anyhow!("bad valuation entry `{part}` (use x=a,y=b)"))?;
                valuation.insert(var.trim().to_string(), lattice.element(label.trim())?);
            }
            let ordered: Vec<_> = def
                .params()
                .iter()
                .map(|p| {
                    valuation
                        .get(p)
                        .copied()
                        .ok_or_else(|| anyhow!("valuation misses parameter `{p}`"))
                })
                .collect::<Result<_>>()?;
            let result = def.eval(lattice, &ordered)?;
            println!("{}", lattice.label(result)?);
            Ok(())
        }
        Command::Extend(args) => {
            let model = load_model(&args.file, false)?;
            let def = model
                .terms
                .get(&args.term)
                .ok_or_else(|| anyhow!("no term `{}` in the document", args.term))?;
            let sets: Vec<_> = args
                .args
                .iter()
                .map(|n| {
                    model
                        .mvsets
                        .get(n)
                        .cloned()
                        .ok_or_else(|| anyhow!("no mvset `{n}` in the document"))
                })
                .collect::<Result<_>>()?;
            let out = if args.classical {
                classical_extend(def, &sets)?
            } else {
                extend(def, &sets)?
            };
            println!("{out}");
            Ok(())
        }
        Command::Mean(args) => {
            let model = load_model(&args.file, false)?;
            let sets: Vec<_> = args
                .sets
                .iter()
                .map(|n| {
                    model
                        .sets
                        .get(n)
                        .cloned()
                        .ok_or_else(|| anyhow!("no set `{n}` in the document"))
                })
                .collect::<Result<_>>()?;
            let out = nary_mean(args.kind.into(), &sets)?;
            println!("{out}");
            Ok(())
        }
        Command::Diff(args) => {
            let model = load_model(&args.file, false)?;
            let get = |n: &String| {
                model
                    .sets
                    .get(n)
                    .ok_or_else(|| anyhow!("no set `{n}` in the document"))
            };
            let out = difference(get(&args.sets[0])?, get(&args.sets[1])?)?;
            println!("{out}");
            Ok(())
        }
        Command::Map(MapCmd::Run(args)) => {
            let model = load_model(&args.file, false)?;
            let spec = match &args.map {
                Some(n) => model
                    .maps
                    .get(n)
                    .ok_or_else(|| anyhow!("no map `{n}` in the document"))?,
                None => {
                    if model.maps.len() != 1 {
                        bail!(
                            "the document declares {} maps; pick one with --map",
                            model.maps.len()
                        );
                    }
                    model.maps.values().next().unwrap()
                }
            };
            let combine = match args.combine {
                CombineArg::Join => Combine::Join,
                CombineArg::Sum => Combine::Sum,
            };
            let config = RunConfig::new(combine, args.weights)
                .max_iter(args.max_iter)
                .fork_depth(args.depth);
            let outcome = run(spec, &config)?;
            let rendered = outcome.trace.render(match args.format {
                FormatArg::Tsv => RenderFormat::Tsv,
                FormatArg::Markdown => RenderFormat::Markdown,
            });
            match &args.out {
                Some(path) => fs::write(path, rendered)
                    .with_context(|| format!("cannot write `{}`", path.display()))?,
                None => print!("{rendered}"),
            }
            if !outcome.converged() {
                bail!("run did not converge within {} iterations", args.max_iter);
            }
            Ok(())
        }
    }
}
