//! Command-line front end. Every subcommand reads files, delegates to the
//! library, and reports through an injected writer, so the whole surface is
//! testable without spawning the binary.
//!
//! Exit codes follow BSD sysexits where they are not verdicts: verdict
//! commands (`check`, `bisim`) exit 0 for a positive answer, 1 for a
//! negative one and 2 for `unknown`; 64 flags a usage error, 65 bad input
//! data, 66 a missing or unreadable file, and 70 an internal fault.
//!
//! With `--format structured`, output is line-delimited records under a
//! one-line schema header; identical invocations produce byte-identical
//! output.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bisim::{bisim, default_observation, BisimResult, Verdict as BisimVerdict};
use crate::logic::{check, parse_formula, CheckContext, Verdict};
use crate::ocap::{parse_js, translate_program};
use crate::parse::parse_program;
use crate::reduce::{run as run_trace, state_graph};
use crate::sugar::desugar;
use crate::syntax::{canonicalize, free_names, pretty, pretty_name, Name, NameSet, Proc};

pub const EX_OK: i32 = 0;
pub const EX_USAGE: i32 = 64;
pub const EX_DATA: i32 = 65;
pub const EX_NOINPUT: i32 = 66;
pub const EX_INTERNAL: i32 = 70;

/// Schema version stamped as the first line of structured output.
pub const SCHEMA: &str = "rhopol/1";

#[derive(Parser)]
#[command(name = "rhopol", version, about = "Process-calculus workbench: reduction, policy checking, bisimulation, and object-capability translation", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a .rho file and print its canonical form
    Parse(ParseCmd),
    /// Run one seeded reduction trace
    Run(RunCmd),
    /// Explore the reachable states and summarize them
    Reduce(ReduceCmd),
    /// Check a .nsl formula against a process
    Check(CheckCmd),
    /// Compare two processes for weak barbed bisimilarity
    Bisim(BisimCmd),
    /// Translate a .js object-capability program to .rho
    Translate(TranslateCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args)]
struct ParseCmd {
    /// Input .rho file
    #[arg(long = "proc", value_name = "FILE")]
    proc_path: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct RunCmd {
    /// Input .rho file
    #[arg(long = "proc", value_name = "FILE")]
    proc_path: PathBuf,
    /// Scheduler seed; defaults to $RHOPOL_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-steps", default_value_t = 64)]
    max_steps: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct ReduceCmd {
    /// Input .rho file
    #[arg(long = "proc", value_name = "FILE")]
    proc_path: PathBuf,
    /// Exploration depth bound
    #[arg(long, default_value_t = 16)]
    depth: usize,
    #[arg(long = "max-states", default_value_t = 10_000)]
    max_states: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct CheckCmd {
    /// Subject .rho file
    #[arg(long = "proc", value_name = "FILE")]
    proc_path: PathBuf,
    /// Formula .nsl file
    #[arg(long = "formula", value_name = "FILE")]
    formula_path: PathBuf,
    /// Fixpoint and reachability depth bound
    #[arg(long, default_value_t = 32)]
    depth: usize,
    #[arg(long = "max-states", default_value_t = 10_000)]
    max_states: usize,
    /// Comma-separated identifiers replacing the default quantifier universe
    #[arg(long, value_name = "IDENTS", value_delimiter = ',')]
    universe: Vec<String>,
    /// .rho file whose parallel components form the rely-guarantee
    /// environment suite
    #[arg(long = "env-suite", value_name = "FILE")]
    env_suite: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct BisimCmd {
    /// Left .rho file
    #[arg(long, value_name = "FILE")]
    left: PathBuf,
    /// Right .rho file
    #[arg(long, value_name = "FILE")]
    right: PathBuf,
    /// Game depth bound
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long = "max-states", default_value_t = 10_000)]
    max_states: usize,
    /// Comma-separated identifiers replacing the default observation set
    #[arg(long, value_name = "IDENTS", value_delimiter = ',')]
    names: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct TranslateCmd {
    /// Input .js file
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output .rho path; `-` writes to stdout, default swaps the extension
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// A failure that terminates the invocation: exit code plus message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Display) -> Failure {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

/// Entry point used by the binary and the CLI tests. Returns the process
/// exit code; all output goes through the two writers.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{}", e.render());
            return EX_OK;
        }
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return EX_USAGE;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Parse(c) => cmd_parse(c, out),
        Command::Run(c) => cmd_run(c, out),
        Command::Reduce(c) => cmd_reduce(c, out),
        Command::Check(c) => cmd_check(c, out),
        Command::Bisim(c) => cmd_bisim(c, out),
        Command::Translate(c) => cmd_translate(c, out),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EX_NOINPUT, format!("cannot read {}: {e}", path.display())))
}

fn load_proc(path: &Path) -> Result<Proc, Failure> {
    let src = read_file(path)?;
    let surface = parse_program(&src)
        .map_err(|e| Failure::new(EX_DATA, format!("{}: {e}", path.display())))?;
    desugar(&surface).map_err(|e| Failure::new(EX_DATA, format!("{}: {e}", path.display())))
}

/// Resolve the scheduler seed: flag, then RHOPOL_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("RHOPOL_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::new(EX_USAGE, format!("RHOPOL_SEED is not an integer: {v:?}"))
        }),
        Err(_) => Ok(0),
    }
}

fn ident_names(idents: &[String]) -> NameSet {
    idents.iter().map(|s| Name::var(s.trim())).collect()
}

fn canonical_line(p: &Proc) -> String {
    pretty(&canonicalize(p).to_proc())
}

fn names_line(ns: &NameSet) -> String {
    let mut parts: Vec<String> = ns.iter().map(pretty_name).collect();
    parts.sort();
    parts.join(",")
}

fn schema(out: &mut dyn Write, command: &str) {
    let _ = writeln!(out, "{SCHEMA} {command}");
}

fn cmd_parse(c: ParseCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_proc(&c.proc_path)?;
    match c.format {
        Format::Text => {
            let _ = writeln!(out, "{}", canonical_line(&p));
            let _ = writeln!(out, "free names: {}", names_line(&free_names(&p)));
        }
        Format::Structured => {
            schema(out, "parse");
            let _ = writeln!(out, "proc\t{}", canonical_line(&p));
            let _ = writeln!(out, "free\t{}", names_line(&free_names(&p)));
        }
    }
    Ok(EX_OK)
}

fn cmd_run(c: RunCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_proc(&c.proc_path)?;
    let seed = resolve_seed(c.seed)?;
    let trace = run_trace(&p, seed, c.max_steps);
    match c.format {
        Format::Text => {
            let _ = writeln!(out, "seed {seed}");
            let _ = writeln!(out, "init {}", pretty(&trace.initial));
            for (i, (redex, state)) in trace.steps.iter().enumerate() {
                let _ = writeln!(out, "{:4}  {}  ->  {}", i + 1, redex.describe(), pretty(state));
            }
            if trace.terminated {
                let _ = writeln!(out, "terminated after {} steps", trace.steps.len());
            } else {
                let _ = writeln!(out, "stopped at the step bound ({})", c.max_steps);
            }
        }
        Format::Structured => {
            schema(out, "run");
            let _ = writeln!(out, "seed\t{seed}");
            let _ = writeln!(out, "init\t{}", canonical_line(&trace.initial));
            for (i, (redex, state)) in trace.steps.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "step\t{}\t{}\t{}",
                    i + 1,
                    pretty_name(redex.channel()),
                    canonical_line(state)
                );
            }
            let status = if trace.terminated { "terminated" } else { "bounded" };
            let _ = writeln!(out, "end\t{status}\t{}", trace.steps.len());
        }
    }
    Ok(EX_OK)
}

fn cmd_reduce(c: ReduceCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_proc(&c.proc_path)?;
    let graph = state_graph(&p, c.depth, c.max_states);
    let edge_count: usize = graph.edges.iter().map(Vec::len).sum();
    let terminal = graph
        .edges
        .iter()
        .enumerate()
        .filter(|(_, es)| es.is_empty())
        .count();
    match c.format {
        Format::Text => {
            let _ = writeln!(
                out,
                "{} states, {} transitions, {} terminal, truncated: {}",
                graph.states.len(),
                edge_count,
                terminal,
                graph.truncated
            );
            for (i, state) in graph.states.iter().enumerate() {
                let _ = writeln!(out, "{i:4}  {}", pretty(state));
            }
        }
        Format::Structured => {
            schema(out, "reduce");
            let _ = writeln!(out, "states\t{}", graph.states.len());
            let _ = writeln!(out, "edges\t{edge_count}");
            let _ = writeln!(out, "terminal\t{terminal}");
            let _ = writeln!(out, "truncated\t{}", graph.truncated);
            for (i, state) in graph.states.iter().enumerate() {
                let _ = writeln!(out, "state\t{i}\t{}", canonical_line(state));
            }
        }
    }
    Ok(EX_OK)
}

fn load_env_suite(path: &Path) -> Result<Vec<Proc>, Failure> {
    let p = load_proc(path)?;
    Ok(match p {
        Proc::Par(ps) => ps,
        other => vec![other],
    })
}

fn cmd_check(c: CheckCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_proc(&c.proc_path)?;
    let formula_src = read_file(&c.formula_path)?;
    let formula = parse_formula(&formula_src)
        .map_err(|e| Failure::new(EX_DATA, format!("{}: {e}", c.formula_path.display())))?;
    let mut ctx = if c.universe.is_empty() {
        CheckContext::for_check(&p, &formula, c.depth)
    } else {
        CheckContext::new(ident_names(&c.universe), c.depth)
    };
    ctx.max_states = c.max_states;
    if let Some(path) = &c.env_suite {
        ctx.env_suite = load_env_suite(path)?;
    }
    let result = check(&p, &formula, &ctx).map_err(|e| Failure::new(EX_DATA, e))?;
    match c.format {
        Format::Text => {
            let _ = writeln!(out, "verdict: {}", result.verdict);
            let _ = writeln!(out, "reason: {}", result.reason);
            if let Some(w) = &result.witness {
                let _ = writeln!(out, "witness: {}", pretty(w));
            }
        }
        Format::Structured => {
            schema(out, "check");
            let _ = writeln!(out, "verdict\t{}", result.verdict);
            let _ = writeln!(out, "reason\t{}", result.reason);
            if let Some(w) = &result.witness {
                let _ = writeln!(out, "witness\t{}", canonical_line(w));
            }
        }
    }
    Ok(match result.verdict {
        Verdict::Holds => 0,
        Verdict::Fails => 1,
        Verdict::Unknown => 2,
    })
}

fn emit_bisim(result: &BisimResult, names: &NameSet, format: Format, out: &mut dyn Write) {
    match format {
        Format::Text => {
            let _ = writeln!(out, "verdict: {} (depth {})", result.verdict, result.depth_checked);
            let _ = writeln!(out, "names: {}", names_line(names));
            if let Some(d) = &result.distinguishing {
                let _ = writeln!(out, "distinguished: {}", d.reason);
                for m in &d.moves {
                    let _ = writeln!(out, "  {} fires {}", m.side, m.redex.describe());
                }
                let _ = writeln!(out, "  {} alone exhibits {}", d.barb_side, pretty_name(&d.barb));
            }
            if let Some(r) = &result.reason {
                let _ = writeln!(out, "unknown: {r}");
            }
        }
        Format::Structured => {
            let _ = writeln!(out, "verdict\t{}", result.verdict);
            let _ = writeln!(out, "depth\t{}", result.depth_checked);
            let _ = writeln!(out, "names\t{}", names_line(names));
            if let Some(d) = &result.distinguishing {
                for m in &d.moves {
                    let _ = writeln!(out, "move\t{}\t{}", m.side, pretty_name(m.redex.channel()));
                }
                let _ = writeln!(out, "barb\t{}\t{}", d.barb_side, pretty_name(&d.barb));
                let _ = writeln!(out, "cause\t{}", d.reason);
            }
            if let Some(r) = &result.reason {
                let _ = writeln!(out, "cause\t{r}");
            }
        }
    }
}

fn cmd_bisim(c: BisimCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let left = load_proc(&c.left)?;
    let right = load_proc(&c.right)?;
    let names = if c.names.is_empty() {
        default_observation(&left, &right)
    } else {
        ident_names(&c.names)
    };
    let result = bisim(&left, &right, &names, c.depth, c.max_states);
    if c.format == Format::Structured {
        schema(out, "bisim");
    }
    emit_bisim(&result, &names, c.format, out);
    Ok(match result.verdict {
        BisimVerdict::Equivalent => 0,
        BisimVerdict::Distinguished => 1,
        BisimVerdict::Unknown => 2,
    })
}

fn cmd_translate(c: TranslateCmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let src = read_file(&c.input)?;
    let ast = parse_js(&src)
        .map_err(|e| Failure::new(EX_DATA, format!("{}: {e}", c.input.display())))?;
    let surface = translate_program(&ast)
        .map_err(|e| Failure::new(EX_DATA, format!("{}: {e}", c.input.display())))?;
    let rho = surface.to_source();
    let to_stdout = c.output.as_deref() == Some(Path::new("-"));
    let target = c
        .output
        .clone()
        .unwrap_or_else(|| c.input.with_extension("rho"));
    if !to_stdout {
        std::fs::write(&target, &rho).map_err(|e| {
            Failure::new(EX_NOINPUT, format!("cannot write {}: {e}", target.display()))
        })?;
    }
    match c.format {
        Format::Text => {
            if to_stdout {
                let _ = write!(out, "{rho}");
            } else {
                let _ = writeln!(out, "wrote {}", target.display());
            }
        }
        Format::Structured => {
            schema(out, "translate");
            if to_stdout {
                for line in rho.lines() {
                    let _ = writeln!(out, "line\t{line}");
                }
            } else {
                let _ = writeln!(out, "wrote\t{}", target.display());
            }
        }
    }
    Ok(EX_OK)
}
