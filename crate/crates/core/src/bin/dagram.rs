use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Deserialize;

use dag_grammar::corpus::{parse_sentences, parse_token_blocks};
use dag_grammar::derive::{replay, trace, Feasibility};
use dag_grammar::drs::{boxes_to_graph, graph_to_boxes, parse_clause_corpus, print_clause_corpus};
use dag_grammar::eval::{corpus_eval, DEFAULT_RESTARTS};
use dag_grammar::grammar::{build_grammar, extract_derivation, read_grammar, write_grammar};
use dag_grammar::graph::{parse_corpus, parse_corpus_lenient, print_corpus, print_penman, Graph};
use dag_grammar::scorer::{train, Model, ParseOptions, TrainConfig};

const DEFAULT_SEED: u64 = 2019;

#[derive(Parser)]
#[command(name = "dagram", version, about = "DAG grammar toolkit for DRS graph parsing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between clause files and PENMAN graph files.
    Convert(ConvertArgs),
    /// Extract a grammar from a PENMAN corpus.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print grammar statistics.
    Stats {
        grammar: PathBuf,
        /// Average rank over production occurrences instead of types.
        #[arg(long)]
        per_token: bool,
    },
    /// Extract, replay and match every graph of a corpus; fails unless F1 = 1.
    Roundtrip {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Sample derivations from a grammar.
    Sample {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        depth_cap: usize,
        /// Print action traces instead of graphs.
        #[arg(long)]
        trace: bool,
    },
    /// Train a scorer from a TOML run file.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parse token blocks with a trained scorer.
    Parse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Score all productions and fall back to a feasible one on a rank mismatch.
        #[arg(long)]
        no_restrict: bool,
        #[arg(long, default_value_t = 20)]
        depth_cap: usize,
    },
    /// Score predicted graphs against gold graphs.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        fine_grained: bool,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("direction").required(true).args(["to_graph", "to_boxes"])))]
struct ConvertArgs {
    /// Clause file to PENMAN.
    #[arg(long)]
    to_graph: bool,
    /// PENMAN file to clauses.
    #[arg(long)]
    to_boxes: bool,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `train` run file: data paths plus a `[train]` table of hyperparameters.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    corpus: PathBuf,
    model: PathBuf,
    #[serde(default)]
    train: TrainConfig,
}

enum Failure {
    Data(anyhow::Error),
    Assertion(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str, out: &mut String) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            out.push_str(text);
            Ok(())
        }
    }
}

fn graphs(path: &Path) -> anyhow::Result<Vec<Graph>> {
    parse_corpus(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Runs one subcommand, collecting its standard output in `out`.
fn run(command: Command, out: &mut String) -> Result<(), Failure> {
    match command {
        Command::Convert(a) if a.to_graph => {
            let docs = parse_clause_corpus(&read(&a.input)?).context("parsing clauses")?;
            let mut done = Vec::new();
            for (i, d) in docs.iter().enumerate() {
                match boxes_to_graph(d) {
                    Ok(c) => done.push(c.value),
                    Err(e) => log::warn!("document {i}: {e}"),
                }
            }
            eprintln!("converted {}/{} documents", done.len(), docs.len());
            emit(a.out.as_deref(), &print_corpus(&done), out)?;
        }
        Command::Convert(a) => {
            let gs = graphs(&a.input)?;
            let mut done = Vec::new();
            for (i, g) in gs.iter().enumerate() {
                match graph_to_boxes(g) {
                    Ok(c) => done.push(c.value),
                    Err(e) => log::warn!("graph {i}: {e}"),
                }
            }
            eprintln!("converted {}/{} graphs", done.len(), gs.len());
            emit(a.out.as_deref(), &print_clause_corpus(&done), out)?;
        }
        Command::Extract { corpus, out: target } => {
            let gs = graphs(&corpus)?;
            let (grammar, failures) = build_grammar(&gs);
            for f in &failures {
                log::warn!("graph {}: {}", f.index, f.error);
            }
            emit(Some(&target), &write_grammar(&grammar), out)?;
            let _ = write!(out, "{}", grammar.stats().table(false));
        }
        Command::Stats { grammar, per_token } => {
            let g = read_grammar(&read(&grammar)?).context("parsing grammar")?;
            let _ = write!(out, "{}", g.stats().table(per_token));
        }
        Command::Roundtrip { corpus, restarts, seed } => {
            let gs = graphs(&corpus)?;
            let mut preds = Vec::with_capacity(gs.len());
            for (i, g) in gs.iter().enumerate() {
                let d = extract_derivation(g).with_context(|| format!("graph {i}"))?;
                let replayed = replay(&d.actions).map_err(anyhow::Error::from).and_then(|s| Ok(s.finish()?));
                preds.push(replayed.map_err(|e| log::warn!("graph {i}: {e}")).ok());
            }
            let r = corpus_eval(&preds, &gs, restarts, seed, false).map_err(anyhow::Error::from)?;
            let _ = writeln!(out, "graphs={}\nF1={:.3}", r.pairs, r.f1);
            if r.f1 != 1.0 {
                return Err(Failure::Assertion(format!("round trip F1 {} below 1", r.f1)));
            }
        }
        Command::Sample { grammar, seed, count, depth_cap, trace: traces } => {
            let g = read_grammar(&read(&grammar)?).context("parsing grammar")?;
            let f = Feasibility::new(&g);
            for i in 0..count {
                let (actions, graph) = f.sample(&g, seed.wrapping_add(i as u64), depth_cap).context("sampling")?;
                if traces {
                    let _ = writeln!(out, "{}", trace(&actions).context("tracing")?);
                } else {
                    let _ = writeln!(out, "{}\n", print_penman(&graph));
                }
            }
        }
        Command::Train { config } => {
            let run: RunFile = toml::from_str(&read(&config)?).context("parsing run file")?;
            let sentences = parse_sentences(&read(&run.corpus)?).context("parsing corpus")?;
            let (model, stats) = train(&sentences, &run.train).context("training")?;
            if let Some(s) = stats.last() {
                let _ = writeln!(out, "epochs={}\nloss={:.4}\naccuracy={:.4}", s.epoch, s.loss, s.accuracy);
            }
            model.save(&run.model).with_context(|| format!("writing {}", run.model.display()))?;
        }
        Command::Parse { model, input, out: target, no_restrict, depth_cap } => {
            let m = Model::load(&model).context("loading model")?;
            let opts = ParseOptions { restrict: !no_restrict, depth_cap: Some(depth_cap), ..ParseOptions::default() };
            let mut graphs = Vec::new();
            for (i, tokens) in parse_token_blocks(&read(&input)?).iter().enumerate() {
                let p = m.parse(tokens, &opts).with_context(|| format!("sentence {i}"))?;
                if p.rejected > 0 {
                    log::info!("sentence {i}: {} infeasible choices replaced", p.rejected);
                }
                graphs.push(p.graph);
            }
            emit(target.as_deref(), &print_corpus(&graphs), out)?;
        }
        Command::Eval { pred, gold, restarts, seed, fine_grained } => {
            let golds = graphs(&gold)?;
            let preds: Vec<Option<Graph>> = parse_corpus_lenient(&read(&pred)?).into_iter().map(Result::ok).collect();
            let r = corpus_eval(&preds, &golds, restarts, seed, fine_grained).map_err(anyhow::Error::from)?;
            let _ = writeln!(out, "{:<14} {:>7} {:>7} {:>7}", "", "P", "R", "F1");
            let _ = writeln!(out, "{:<14} {:>7.3} {:>7.3} {:>7.3}", "all", r.precision, r.recall, r.f1);
            if let Some(fine) = &r.fine {
                let _ = write!(out, "\n{fine}");
            }
            out.push('\n');
            let _ = write!(out, "{}", r.records());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DAGRAM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut out = String::new();
    let result = run(cli.command, &mut out);
    if let Err(e) = std::io::stdout().lock().write_all(out.as_bytes()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(m)) => {
            eprintln!("assertion failed: {m}");
            ExitCode::from(3)
        }
    }
}
