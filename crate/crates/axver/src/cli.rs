//! Command-line interface: parse a file, dispatch, print a JSON report.
//!
//! Exit codes: 0 verified/coherent, 1 refuted (or infeasible trace),
//! 2 incoherent, 3 unsupported axioms, 4 parse error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::axioms::AxiomSet;
use crate::exec::letter::Execution;
use crate::syntax::{self, ParsedFile, ParsedTrace, ParsedUnit};
use crate::verifier::{self, ExploreOptions, Outcome, Stats, VerifierError};
use crate::vocab::Vocab;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCOHERENT: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

#[derive(Parser)]
#[command(name = "axver", about = "Verifier for uninterpreted coherent programs modulo axioms")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Input file.
    file: PathBuf,
    /// Compact single-line JSON instead of pretty-printed.
    #[arg(long)]
    json: bool,
    /// Dump the instrumented execution automaton to stderr.
    #[arg(long)]
    dump_nfa: bool,
    /// Abort exploration after this many product states.
    #[arg(long)]
    max_states: Option<u64>,
    /// Worker threads for product exploration.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check coherence, then verify the postcondition.
    Verify(Common),
    /// Check that every execution is coherent modulo the axioms.
    CheckCoherence(Common),
    /// Analyze a single trace: oracle and automaton verdicts side by side.
    CheckTrace(Common),
    /// Print the instrumented execution automaton.
    Instrument(Common),
    /// Report sizes: variables, automaton states and edges, pipeline.
    Stats(Common),
}

fn axioms_echo(ax: &AxiomSet, vocab: &Vocab) -> Value {
    let mut rels = serde_json::Map::new();
    for r in ax.declared_rels() {
        let props: Vec<String> = ax.rel_props(r).map(|p| p.name().to_string()).collect();
        rels.insert(vocab.rel_name(r).to_string(), json!(props));
    }
    let mut funs = serde_json::Map::new();
    for f in ax.declared_funs() {
        let props: Vec<String> = ax.fn_props(f).map(|p| p.name().to_string()).collect();
        funs.insert(vocab.fun_name(f).to_string(), json!(props));
    }
    json!({ "relations": rels, "functions": funs })
}

fn letters_json(exec: &Execution, vocab: &Vocab) -> Value {
    json!(exec
        .letters
        .iter()
        .map(|l| format!("{}", l.display(vocab)))
        .collect::<Vec<_>>())
}

fn stats_json(stats: &Stats) -> Value {
    json!({
        "states": stats.states,
        "frontier_peak": stats.frontier_peak,
        "millis": stats.millis,
    })
}

fn emit(report: &Value, compact: bool) {
    if compact {
        println!("{report}");
    } else {
        println!("{}", serde_json::to_string_pretty(report).unwrap());
    }
}

fn error_exit(kind: &str, message: String, code: i32, compact: bool) -> i32 {
    let report = json!({ "outcome": kind, "error": message });
    emit(&report, compact);
    code
}

fn verifier_error_exit(err: &VerifierError, compact: bool) -> i32 {
    match err {
        VerifierError::Axioms(_) => {
            error_exit("unsupported", err.to_string(), EXIT_UNSUPPORTED, compact)
        }
        VerifierError::Instrument(_) | VerifierError::Oracle(_) => {
            error_exit("unsupported", err.to_string(), EXIT_UNSUPPORTED, compact)
        }
        other => error_exit("error", other.to_string(), EXIT_UNSUPPORTED, compact),
    }
}

struct LoadedProgram {
    vocab: Vocab,
    axioms: AxiomSet,
    program: crate::syntax::ast::Program,
    post: Option<crate::syntax::ast::PostCondition>,
}

fn load_program(unit: ParsedUnit) -> LoadedProgram {
    let ParsedUnit { mut vocab, axioms, program, post } = unit;
    let core = syntax::desugar(&program, &mut vocab);
    let post = post.as_ref().map(syntax::desugar_post);
    LoadedProgram { vocab, axioms, program: core, post }
}

fn read_file(common: &Common) -> Result<String, i32> {
    std::fs::read_to_string(&common.file).map_err(|e| {
        error_exit(
            "error",
            format!("cannot read {}: {e}", common.file.display()),
            EXIT_PARSE,
            common.json,
        )
    })
}

fn parse_program_file(common: &Common) -> Result<LoadedProgram, i32> {
    let source = read_file(common)?;
    match syntax::parse_program(&source) {
        Ok(unit) => Ok(load_program(unit)),
        Err(e) => Err(error_exit("parse-error", e.to_string(), EXIT_PARSE, common.json)),
    }
}

fn parse_trace_file(common: &Common) -> Result<ParsedTrace, i32> {
    let source = read_file(common)?;
    match syntax::parse_file(&source) {
        Ok(ParsedFile::Trace(t)) => Ok(t),
        Ok(ParsedFile::Program(_)) => Err(error_exit(
            "parse-error",
            "expected a trace file with a `trace { ... }` section".to_string(),
            EXIT_PARSE,
            common.json,
        )),
        Err(e) => Err(error_exit("parse-error", e.to_string(), EXIT_PARSE, common.json)),
    }
}

fn opts(common: &Common) -> ExploreOptions {
    ExploreOptions { threads: common.threads.max(1), max_states: common.max_states }
}

fn run_verify(common: &Common, coherence_only: bool) -> i32 {
    let mut loaded = match parse_program_file(common) {
        Ok(l) => l,
        Err(code) => return code,
    };
    if common.dump_nfa {
        match verifier::instrumented_view(&loaded.program, &loaded.axioms, &mut loaded.vocab) {
            Ok(view) => eprint!("{}", view.instrumented.dump(&loaded.vocab)),
            Err(e) => return verifier_error_exit(&e, common.json),
        }
    }
    let result = if coherence_only {
        verifier::check_coherence(&loaded.program, &loaded.axioms, &mut loaded.vocab, &opts(common))
    } else {
        let post = match &loaded.post {
            Some(p) => p.clone(),
            None => {
                return error_exit(
                    "parse-error",
                    "verify requires a `post:` clause".to_string(),
                    EXIT_PARSE,
                    common.json,
                )
            }
        };
        verifier::verify(&loaded.program, &post, &loaded.axioms, &mut loaded.vocab, &opts(common))
    };
    match result {
        Ok(verdict) => {
            let outcome = match (coherence_only, verdict.outcome) {
                (true, Outcome::Verified) => "coherent",
                (_, o) => o.as_str(),
            };
            let report = json!({
                "outcome": outcome,
                "counterexample": verdict
                    .counterexample
                    .as_ref()
                    .map(|c| letters_json(c, &loaded.vocab)),
                "violation": verdict.violation.map(|(pos, kind)| json!({
                    "position": pos,
                    "kind": match kind {
                        crate::scc::CohViolation::Memoizing => "memoizing",
                        crate::scc::CohViolation::EarlyAssume => "early-assume",
                    },
                })),
                "stats": stats_json(&verdict.stats),
                "axioms_echo": axioms_echo(&loaded.axioms, &loaded.vocab),
            });
            emit(&report, common.json);
            match verdict.outcome {
                Outcome::Verified => EXIT_OK,
                Outcome::Refuted => EXIT_REFUTED,
                Outcome::Incoherent => EXIT_INCOHERENT,
            }
        }
        Err(e) => verifier_error_exit(&e, common.json),
    }
}

fn run_check_trace(common: &Common) -> i32 {
    let ParsedTrace { mut vocab, axioms, exec } = match parse_trace_file(common) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match verifier::check_trace(&exec, &axioms, &mut vocab) {
        Ok(report) => {
            let outcome = if !report.oracle_coherence.coherent {
                "incoherent"
            } else if !report.oracle_feasible {
                "infeasible"
            } else {
                "feasible"
            };
            let value = json!({
                "outcome": outcome,
                "trace_length": exec.len(),
                "oracle": {
                    "feasible": report.oracle_feasible,
                    "coherent": report.oracle_coherence.coherent,
                    "violation": report.oracle_coherence.violation.as_ref().map(|v| json!({
                        "position": v.position,
                        "kind": match v.kind {
                            crate::oracle::ViolationKind::Memoizing => "memoizing",
                            crate::oracle::ViolationKind::EarlyAssume => "early-assume",
                        },
                        "witness": v.witness,
                    })),
                },
                "automaton": {
                    "feasible": report.automaton_feasible,
                    "violation": report.automaton_violation.map(|(pos, kind)| json!({
                        "position": pos,
                        "kind": match kind {
                            crate::scc::CohViolation::Memoizing => "memoizing",
                            crate::scc::CohViolation::EarlyAssume => "early-assume",
                        },
                    })),
                },
                "agreement": report.agreement,
                "conflict": report.conflict,
                "axioms_echo": axioms_echo(&axioms, &vocab),
            });
            emit(&value, common.json);
            if !report.oracle_coherence.coherent {
                EXIT_INCOHERENT
            } else if !report.oracle_feasible {
                EXIT_REFUTED
            } else {
                EXIT_OK
            }
        }
        Err(e) => verifier_error_exit(&e, common.json),
    }
}

fn run_instrument(common: &Common) -> i32 {
    let mut loaded = match parse_program_file(common) {
        Ok(l) => l,
        Err(code) => return code,
    };
    match verifier::instrumented_view(&loaded.program, &loaded.axioms, &mut loaded.vocab) {
        Ok(view) => {
            print!("{}", view.instrumented.dump(&loaded.vocab));
            EXIT_OK
        }
        Err(e) => verifier_error_exit(&e, common.json),
    }
}

fn run_stats(common: &Common) -> i32 {
    let mut loaded = match parse_program_file(common) {
        Ok(l) => l,
        Err(code) => return code,
    };
    match verifier::instrumented_view(&loaded.program, &loaded.axioms, &mut loaded.vocab) {
        Ok(view) => {
            let report = json!({
                "outcome": "stats",
                "variables": loaded.vocab.num_vars(),
                "functions": loaded.vocab.num_funs(),
                "relations": loaded.vocab.num_rels(),
                "base_nfa": {
                    "states": view.base.num_states,
                    "edges": verifier::edge_count(&view.base),
                },
                "instrumented_nfa": {
                    "states": view.instrumented.num_states,
                    "edges": verifier::edge_count(&view.instrumented),
                },
                "pipeline": {
                    "homomorphisms": view
                        .pipeline
                        .homs
                        .iter()
                        .map(|h| h.describe(&loaded.vocab))
                        .collect::<Vec<_>>(),
                    "preamble_letters": view.pipeline.preamble.len(),
                    "translated_sto": view
                        .pipeline
                        .translate_sto
                        .iter()
                        .map(|r| loaded.vocab.rel_name(*r).to_string())
                        .collect::<Vec<_>>(),
                    "residual_transitive": view
                        .pipeline
                        .residual_trans
                        .iter()
                        .map(|r| loaded.vocab.rel_name(*r).to_string())
                        .collect::<Vec<_>>(),
                },
                "axioms_echo": axioms_echo(&loaded.axioms, &loaded.vocab),
            });
            emit(&report, common.json);
            EXIT_OK
        }
        Err(e) => verifier_error_exit(&e, common.json),
    }
}

/// Entry point; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    match &cli.command {
        Command::Verify(c) => run_verify(c, false),
        Command::CheckCoherence(c) => run_verify(c, true),
        Command::CheckTrace(c) => run_check_trace(c),
        Command::Instrument(c) => run_instrument(c),
        Command::Stats(c) => run_stats(c),
    }
}
