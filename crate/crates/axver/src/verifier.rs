//! Top-level decision procedures: coherence checking and verification of
//! programs modulo validated axiom sets by on-the-fly exploration of the
//! product of the instrumented execution automaton with the streaming
//! congruence-closure automata, plus single-trace analysis.
//!
//! Exploration is breadth-first by pre-image length: instrumentation-inserted
//! letters extend a node within its layer, program letters advance to the
//! next one. Witnesses are therefore shortest in the program's own alphabet,
//! and layer-wise expansion with an ordered merge makes outcomes independent
//! of the thread count.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::axioms::{validate_axioms, AxiomError, AxiomSet};
use crate::exec::letter::{ExecLetter, Execution};
use crate::exec::nfa::{append_post_violation, build_exec_nfa, ExecNfa, NfaEdge, StateId};
use crate::instrument::{build_pipeline, instrument, instrument_execution, InstrumentError, Pipeline};
use crate::oracle::{self, CoherenceVerdict, OracleError};
use crate::scc::{self, CohState, CohViolation, SccState};
use crate::syntax::ast::{PostCondition, Program};
use crate::vocab::Vocab;

#[derive(Clone, Debug, Error)]
pub enum VerifierError {
    #[error(transparent)]
    Axioms(#[from] AxiomError),
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("state limit of {limit} reached after exploring {explored} product states")]
    StateLimit { limit: u64, explored: u64 },
    #[error("internal self-check failed: {0}")]
    SelfCheck(String),
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Outcome {
    Verified,
    Refuted,
    Incoherent,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Verified => "verified",
            Outcome::Refuted => "refuted",
            Outcome::Incoherent => "incoherent",
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Product states explored.
    pub states: u64,
    /// Largest layer of the breadth-first frontier.
    pub frontier_peak: u64,
    pub millis: u128,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    /// For refuted and incoherent outcomes: a shortest witness, as a word of
    /// pre-instrumentation letters.
    pub counterexample: Option<Execution>,
    /// For incoherent outcomes: position and kind of the violation within
    /// the counterexample.
    pub violation: Option<(usize, CohViolation)>,
    pub stats: Stats,
}

#[derive(Copy, Clone, Debug)]
pub struct ExploreOptions {
    pub threads: usize,
    pub max_states: Option<u64>,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { threads: 1, max_states: None }
    }
}

/// Per-node search interface of the two automata.
trait ProductAutomaton: Sync {
    type State: Clone + Eq + std::hash::Hash + Send + Sync;
    fn initial(&self) -> Self::State;
    /// `None` prunes the branch (absorbing reject).
    fn step(&self, q: &Self::State, l: &ExecLetter) -> Option<(Self::State, Option<CohViolation>)>;
}

struct FeasibilityAutomaton<'a> {
    ax: &'a AxiomSet,
    nvars: usize,
}

impl ProductAutomaton for FeasibilityAutomaton<'_> {
    type State = SccState;

    fn initial(&self) -> SccState {
        scc::initial_state(self.nvars)
    }

    fn step(&self, q: &SccState, l: &ExecLetter) -> Option<(SccState, Option<CohViolation>)> {
        match scc::step(q, l, self.ax) {
            SccState::Reject => None,
            live => Some((live, None)),
        }
    }
}

/// Coherence exploration pruned by feasibility. An execution with an
/// infeasible prefix collapses its assumption set, so the coherence clauses
/// stop being meaningful there; the feasibility automaton's reject is a sound
/// infeasibility proof on any prefix, and every prefix explored before the
/// first violation is coherent, which is exactly where the feasibility
/// automaton is exact. Program coherence therefore quantifies over feasible
/// executions.
struct CoherenceAutomaton<'a> {
    ax: &'a AxiomSet,
    nvars: usize,
    vstar: Option<crate::vocab::Var>,
}

impl ProductAutomaton for CoherenceAutomaton<'_> {
    type State = (SccState, CohState);

    fn initial(&self) -> Self::State {
        (scc::initial_state(self.nvars), scc::initial_coh_state(self.nvars))
    }

    fn step(&self, q: &Self::State, l: &ExecLetter) -> Option<(Self::State, Option<CohViolation>)> {
        let (next, violation) = scc::coh_step(&q.1, l, self.ax, self.vstar);
        if violation.is_some() {
            // Report the violation even when the same letter also rejects.
            return Some(((q.0.clone(), next), violation));
        }
        match scc::step(&q.0, l, self.ax) {
            SccState::Reject => None,
            live => Some(((live, next), None)),
        }
    }
}

struct Node<S> {
    nfa: StateId,
    aut: S,
    parent: Option<(usize, Option<ExecLetter>)>,
    accepting: bool,
}

enum SearchHit {
    /// Node index whose path is the witness (acceptance search).
    Accepting(usize),
    /// Parent node, the origin of the violating edge, and the kind.
    Violation(usize, Option<ExecLetter>, CohViolation),
}

struct SearchResult<S> {
    nodes: Vec<Node<S>>,
    hit: Option<SearchHit>,
    frontier_peak: u64,
}

/// Layered breadth-first product exploration. A layer holds all nodes with
/// the same pre-image length; edges without an origin (instrumentation
/// inserted letters and the preamble) stay within the layer. Expansion of a
/// round is parallelizable; the merge is sequential and ordered, so the
/// result does not depend on the thread count.
fn explore<A: ProductAutomaton>(
    nfa: &ExecNfa,
    aut: &A,
    opts: &ExploreOptions,
    stop_on_accept: bool,
    stop_on_violation: bool,
) -> Result<SearchResult<A::State>, VerifierError> {
    let adj = nfa.adjacency();
    let mut nodes: Vec<Node<A::State>> = Vec::new();
    let mut index: HashMap<(StateId, A::State), usize> = HashMap::new();
    let init = aut.initial();
    nodes.push(Node {
        nfa: nfa.initial,
        aut: init.clone(),
        parent: None,
        accepting: nfa.accepting.contains(&nfa.initial),
    });
    index.insert((nfa.initial, init), 0);
    let mut hit = None;
    if stop_on_accept && nodes[0].accepting {
        hit = Some(SearchHit::Accepting(0));
    }
    let mut frontier_peak = 1u64;
    let mut layer: Vec<usize> = vec![0];
    let pool = (opts.threads > 1)
        .then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.threads)
                .build()
                .expect("thread pool")
        });

    type Expansion<S> = Vec<(StateId, S, Option<ExecLetter>, Option<CohViolation>, bool)>;
    while !layer.is_empty() && hit.is_none() {
        let mut next_layer: Vec<usize> = Vec::new();
        let mut round: Vec<usize> = layer.clone();
        let mut layer_size = layer.len() as u64;
        while !round.is_empty() && hit.is_none() {
            let expand = |&node_idx: &usize| -> Expansion<A::State> {
                let node = &nodes[node_idx];
                let mut out = Vec::new();
                for e in &adj[node.nfa.0 as usize] {
                    let letter = e.label.as_ref().expect("ε-free product input");
                    if let Some((next, violation)) = aut.step(&node.aut, letter) {
                        let accepting = nfa.accepting.contains(&e.to);
                        out.push((e.to, next, e.origin.clone(), violation, accepting));
                    }
                }
                out
            };
            let expansions: Vec<Expansion<A::State>> = match &pool {
                Some(p) => p.install(|| round.par_iter().map(expand).collect()),
                None => round.iter().map(expand).collect(),
            };
            let mut new_round = Vec::new();
            'merge: for (src_pos, children) in expansions.into_iter().enumerate() {
                let src_idx = round[src_pos];
                for (to, aut_state, origin, violation, accepting) in children {
                    if stop_on_violation {
                        if let Some(kind) = violation {
                            hit = Some(SearchHit::Violation(src_idx, origin, kind));
                            break 'merge;
                        }
                    }
                    let key = (to, aut_state.clone());
                    if index.contains_key(&key) {
                        continue;
                    }
                    let idx = nodes.len();
                    if let Some(limit) = opts.max_states {
                        if idx as u64 >= limit {
                            return Err(VerifierError::StateLimit {
                                limit,
                                explored: idx as u64,
                            });
                        }
                    }
                    nodes.push(Node {
                        nfa: to,
                        aut: aut_state,
                        parent: Some((src_idx, origin.clone())),
                        accepting,
                    });
                    index.insert(key, idx);
                    if accepting && stop_on_accept {
                        hit = Some(SearchHit::Accepting(idx));
                        break 'merge;
                    }
                    if origin.is_some() {
                        next_layer.push(idx);
                    } else {
                        new_round.push(idx);
                    }
                }
            }
            layer_size += new_round.len() as u64;
            round = new_round;
        }
        frontier_peak = frontier_peak.max(layer_size).max(next_layer.len() as u64);
        layer = next_layer;
    }
    Ok(SearchResult { nodes, hit, frontier_peak })
}

/// The pre-instrumentation word leading to a node: the origin tags along its
/// parent chain.
fn preimage<S>(nodes: &[Node<S>], mut idx: usize) -> Execution {
    let mut letters = Vec::new();
    loop {
        match &nodes[idx].parent {
            Some((p, origin)) => {
                if let Some(l) = origin {
                    letters.push(l.clone());
                }
                idx = *p;
            }
            None => break,
        }
    }
    letters.reverse();
    Execution::new(letters)
}

/// Check whether every execution of the program is coherent modulo the
/// axioms, by exploring the instrumented execution automaton with the
/// coherence automaton over every reachable prefix.
pub fn check_coherence(
    program: &Program,
    ax: &AxiomSet,
    vocab: &mut Vocab,
    opts: &ExploreOptions,
) -> Result<Verdict, VerifierError> {
    let start = Instant::now();
    validate_axioms(ax, vocab)?;
    let pipeline = build_pipeline(ax, vocab)?;
    let nfa = build_exec_nfa(program, ax);
    let instrumented = instrument(&nfa, &pipeline);
    let aut = CoherenceAutomaton { ax, nvars: vocab.num_vars(), vstar: pipeline.vstar };
    let result = explore(&instrumented, &aut, opts, false, true)?;
    let stats = Stats {
        states: result.nodes.len() as u64,
        frontier_peak: result.frontier_peak,
        millis: start.elapsed().as_millis(),
    };
    match result.hit {
        Some(SearchHit::Violation(parent, origin, kind)) => {
            let mut wit = preimage(&result.nodes, parent);
            if let Some(l) = origin {
                wit.push(l);
            }
            let pos = wit.len().saturating_sub(1);
            let check = oracle::is_coherent(&wit, ax, vocab)?;
            if check.coherent {
                return Err(VerifierError::SelfCheck(format!(
                    "coherence witness of length {} not confirmed by the oracle",
                    wit.len()
                )));
            }
            Ok(Verdict {
                outcome: Outcome::Incoherent,
                counterexample: Some(wit),
                violation: Some((pos, kind)),
                stats,
            })
        }
        Some(SearchHit::Accepting(_)) => unreachable!("coherence search ignores acceptance"),
        None => Ok(Verdict {
            outcome: Outcome::Verified,
            counterexample: None,
            violation: None,
            stats,
        }),
    }
}

/// Verify the program against its postcondition modulo the axioms. Coherence
/// gates verification: the feasibility automaton is only trusted on coherent
/// programs.
pub fn verify(
    program: &Program,
    post: &PostCondition,
    ax: &AxiomSet,
    vocab: &mut Vocab,
    opts: &ExploreOptions,
) -> Result<Verdict, VerifierError> {
    let start = Instant::now();
    let coh = check_coherence(program, ax, vocab, opts)?;
    if coh.outcome == Outcome::Incoherent {
        return Ok(coh);
    }
    let pipeline = build_pipeline(ax, vocab)?;
    let nfa = build_exec_nfa(program, ax);
    let with_post = append_post_violation(&nfa, post, ax);
    let instrumented = instrument(&with_post, &pipeline);
    let aut = FeasibilityAutomaton { ax, nvars: vocab.num_vars() };
    let result = explore(&instrumented, &aut, opts, true, false)?;
    let stats = Stats {
        states: result.nodes.len() as u64 + coh.stats.states,
        frontier_peak: result.frontier_peak.max(coh.stats.frontier_peak),
        millis: start.elapsed().as_millis(),
    };
    match result.hit {
        Some(SearchHit::Accepting(idx)) => {
            let wit = preimage(&result.nodes, idx);
            // A refutation must be a real execution of s; assume(¬φ) and
            // feasible at the term level.
            if !with_post.accepts(&wit.letters) {
                return Err(VerifierError::SelfCheck(
                    "refutation witness rejected by the execution automaton".to_string(),
                ));
            }
            if !oracle::is_feasible(&wit, ax, vocab)? {
                return Err(VerifierError::SelfCheck(
                    "refutation witness infeasible per the oracle".to_string(),
                ));
            }
            Ok(Verdict {
                outcome: Outcome::Refuted,
                counterexample: Some(wit),
                violation: None,
                stats,
            })
        }
        Some(SearchHit::Violation(..)) => unreachable!("feasibility search has no violations"),
        None => Ok(Verdict {
            outcome: Outcome::Verified,
            counterexample: None,
            violation: None,
            stats,
        }),
    }
}

/// Verdicts for one execution: the oracle's and the automata's, side by
/// side. `agreement` is true when the coherence verdicts (and positions)
/// match and, on executions the oracle deems coherent, the feasibility
/// verdicts match as well; the feasibility automaton promises nothing on
/// incoherent executions.
#[derive(Clone, Debug)]
pub struct TraceReport {
    pub oracle_feasible: bool,
    pub oracle_coherence: CoherenceVerdict,
    pub automaton_feasible: bool,
    /// Position (in the pre-image) and kind of the first violation found by
    /// the coherence automaton.
    pub automaton_violation: Option<(usize, CohViolation)>,
    pub agreement: bool,
    /// The violated atom when the trace is infeasible.
    pub conflict: Option<String>,
}

/// Analyze a single trace: oracle verdicts, automaton verdicts over the
/// instrumented image, and their agreement.
pub fn check_trace(
    exec: &Execution,
    ax: &AxiomSet,
    vocab: &mut Vocab,
) -> Result<TraceReport, VerifierError> {
    validate_axioms(ax, vocab)?;
    let model = oracle::minimal_model(exec, ax, vocab)?;
    let oracle_feasible = model.consistent;
    let conflict = model.conflict.as_ref().map(|c| match c {
        oracle::Conflict::NeqMerged(s) => s.clone(),
        oracle::Conflict::PosNegOverlap(s) => s.clone(),
        oracle::Conflict::IrrefDiagonal(s) => s.clone(),
    });
    let oracle_coherence = oracle::is_coherent(exec, ax, vocab)?;
    let pipeline = build_pipeline(ax, vocab)?;
    let (image, src) = instrument_execution(exec, &pipeline, vocab)?;
    let automaton_feasible = scc::is_feasible_state(&scc::run(
        &image.letters,
        vocab.num_vars(),
        ax,
    ));
    let automaton_violation = scc::coh_run(&image.letters, vocab.num_vars(), ax, pipeline.vstar)
        .map(|(img_pos, kind)| (src[img_pos], kind));
    let coherence_agrees = match (&oracle_coherence.violation, &automaton_violation) {
        (None, None) => true,
        (Some(o), Some((pos, _))) => o.position == *pos,
        _ => false,
    };
    let feasibility_agrees =
        !oracle_coherence.coherent || oracle_feasible == automaton_feasible;
    Ok(TraceReport {
        oracle_feasible,
        oracle_coherence,
        automaton_feasible,
        automaton_violation,
        agreement: coherence_agrees && feasibility_agrees,
        conflict,
    })
}

/// Instrumented-automaton view of a program, for the `instrument` and
/// `stats` commands and for tests.
pub struct InstrumentedView {
    pub pipeline: Pipeline,
    pub base: ExecNfa,
    pub instrumented: ExecNfa,
}

pub fn instrumented_view(
    program: &Program,
    ax: &AxiomSet,
    vocab: &mut Vocab,
) -> Result<InstrumentedView, VerifierError> {
    validate_axioms(ax, vocab)?;
    let pipeline = build_pipeline(ax, vocab)?;
    let base = build_exec_nfa(program, ax);
    let instrumented = instrument(&base, &pipeline);
    Ok(InstrumentedView { pipeline, base, instrumented })
}

/// Number of letter edges, for reports.
pub fn edge_count(n: &ExecNfa) -> usize {
    n.edges.iter().filter(|e: &&NfaEdge| e.label.is_some()).count()
}
