//! Axiom elimination by instrumentation: the letter-to-word homomorphisms
//! for reflexivity, irreflexivity, symmetry, commutativity and idempotence,
//! and the ordered pipeline that applies them. Relational homomorphisms run
//! before functional ones; transitivity has no homomorphism and stays with
//! the automaton, and strict total orders are handled by the execution
//! translation plus their strict-partial-order part.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::axioms::{AxiomError, AxiomSet, FnProp, RelProp};
use crate::exec::letter::{ExecLetter, Execution};
use crate::exec::nfa::{apply_homomorphism, ExecNfa};
use crate::vocab::{Fun, Rel, Var, Vocab};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum InstrumentError {
    #[error(transparent)]
    Axioms(#[from] AxiomError),
    #[error("no homomorphism eliminates {0}; it is handled by the automaton")]
    NoHomomorphism(String),
    #[error(
        "letter `{0}` assigns a {1}-constrained function to one of its own operands; such \
         assignments must go through a temporary"
    )]
    SelfOperand(String, String),
}

/// A letter-to-word map over the alphabet, identity outside its trigger.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Homomorphism {
    /// `x := f(z⃗)  ↦  x := f(z⃗) · assume(R(x,x))`
    Refl(Rel),
    /// `x := f(z⃗)  ↦  x := f(z⃗) · assume(¬R(x,x))`
    Irref(Rel),
    /// `assume(R(x,y))  ↦  assume(R(x,y)) · assume(R(y,x))`, and the same
    /// with both atoms negated.
    Symm(Rel),
    /// `z := f(x,y)  ↦  z := f(x,y) · v* := f(y,x) · assume(z = v*)`
    Comm(Fun),
    /// `y := f(x)  ↦  y := f(x) · v* := f(y) · assume(y = v*)`
    Idem(Fun),
}

impl Homomorphism {
    /// The image word of a single letter. `vstar` is required for the
    /// functional homomorphisms.
    pub fn apply(&self, a: &ExecLetter, vstar: Option<Var>) -> Vec<ExecLetter> {
        match self {
            Homomorphism::Refl(r) => match a {
                ExecLetter::AssignFn(x, _, _) => {
                    vec![a.clone(), ExecLetter::AssumeRel(*r, vec![*x, *x])]
                }
                _ => vec![a.clone()],
            },
            Homomorphism::Irref(r) => match a {
                ExecLetter::AssignFn(x, _, _) => {
                    vec![a.clone(), ExecLetter::AssumeNegRel(*r, vec![*x, *x])]
                }
                _ => vec![a.clone()],
            },
            Homomorphism::Symm(r) => match a {
                ExecLetter::AssumeRel(r2, args) if r2 == r && args.len() == 2 => {
                    vec![a.clone(), ExecLetter::AssumeRel(*r, vec![args[1], args[0]])]
                }
                ExecLetter::AssumeNegRel(r2, args) if r2 == r && args.len() == 2 => {
                    vec![a.clone(), ExecLetter::AssumeNegRel(*r, vec![args[1], args[0]])]
                }
                _ => vec![a.clone()],
            },
            Homomorphism::Comm(f) => match a {
                ExecLetter::AssignFn(z, f2, args) if f2 == f => {
                    let v = vstar.expect("v* must exist for functional homomorphisms");
                    vec![
                        a.clone(),
                        ExecLetter::AssignFn(v, *f, vec![args[1], args[0]]),
                        ExecLetter::AssumeEq(*z, v),
                    ]
                }
                _ => vec![a.clone()],
            },
            Homomorphism::Idem(f) => match a {
                ExecLetter::AssignFn(y, f2, args) if f2 == f => {
                    let v = vstar.expect("v* must exist for functional homomorphisms");
                    vec![
                        a.clone(),
                        ExecLetter::AssignFn(v, *f, vec![*y]),
                        ExecLetter::AssumeEq(*y, v),
                    ]
                }
                _ => vec![a.clone()],
            },
        }
    }

    pub fn is_functional(&self) -> bool {
        matches!(self, Homomorphism::Comm(_) | Homomorphism::Idem(_))
    }

    pub fn describe(&self, vocab: &Vocab) -> String {
        match self {
            Homomorphism::Refl(r) => format!("refl({})", vocab.rel_name(*r)),
            Homomorphism::Irref(r) => format!("irref({})", vocab.rel_name(*r)),
            Homomorphism::Symm(r) => format!("symm({})", vocab.rel_name(*r)),
            Homomorphism::Comm(f) => format!("comm({})", vocab.fun_name(*f)),
            Homomorphism::Idem(f) => format!("idem({})", vocab.fun_name(*f)),
        }
    }
}

/// The homomorphism eliminating one axiom. Transitivity and totality have
/// none: the automaton and the execution translation carry them.
pub fn homomorphism_for_rel(prop: RelProp, r: Rel) -> Result<Homomorphism, InstrumentError> {
    match prop {
        RelProp::Refl => Ok(Homomorphism::Refl(r)),
        RelProp::Irref => Ok(Homomorphism::Irref(r)),
        RelProp::Symm => Ok(Homomorphism::Symm(r)),
        RelProp::Trans => Err(InstrumentError::NoHomomorphism("transitivity".to_string())),
        RelProp::Sto => Err(InstrumentError::NoHomomorphism("totality".to_string())),
    }
}

pub fn homomorphism_for_fn(prop: FnProp, f: Fun) -> Homomorphism {
    match prop {
        FnProp::Comm => Homomorphism::Comm(f),
        FnProp::Idem => Homomorphism::Idem(f),
    }
}

/// The ordered elimination plan for a validated axiom set.
#[derive(Clone, Debug)]
pub struct Pipeline {
    /// Relations whose negative assumes are translated away while building
    /// the execution automaton.
    pub translate_sto: BTreeSet<Rel>,
    /// Diagonal assumes prepended to every instrumented word. The
    /// homomorphisms bless each term as it is computed by an assignment, but
    /// initial values are never assigned, so reflexivity and irreflexivity
    /// facts about them have to be asserted up front.
    pub preamble: Vec<ExecLetter>,
    /// All relational homomorphisms, then all functional ones; within each
    /// tier ordered by symbol, then property. Symmetry sorts after
    /// reflexivity and irreflexivity on the same relation.
    pub homs: Vec<Homomorphism>,
    /// Transitive relations (including strict orders) left for the
    /// automaton.
    pub residual_trans: BTreeSet<Rel>,
    /// The shared auxiliary variable, present iff a functional homomorphism
    /// is.
    pub vstar: Option<Var>,
}

impl Pipeline {
    pub fn is_identity(&self) -> bool {
        self.homs.is_empty() && self.preamble.is_empty()
    }

    /// Apply the whole homomorphism sequence to one letter.
    pub fn apply_letter(&self, a: &ExecLetter) -> Vec<ExecLetter> {
        let mut word = vec![a.clone()];
        for h in &self.homs {
            let mut next = Vec::with_capacity(word.len());
            for l in &word {
                next.extend(h.apply(l, self.vstar));
            }
            word = next;
        }
        word
    }
}

fn rel_prop_rank(p: RelProp) -> u8 {
    match p {
        RelProp::Refl => 0,
        RelProp::Irref => 1,
        // Symmetry last: eliminating it while reflexivity or irreflexivity
        // of the same relation is still pending is not covered by the
        // preservation lemmas.
        RelProp::Symm => 2,
        RelProp::Trans | RelProp::Sto => 3,
    }
}

/// Build the elimination pipeline: strict total orders contribute the
/// execution translation plus their irreflexive and transitive parts, the
/// refl/irref/symm homomorphisms come first, the comm/idem ones after, and
/// transitivity stays residual. Requires a validated axiom set and creates
/// `v*` when a functional homomorphism is needed.
pub fn build_pipeline(ax: &AxiomSet, vocab: &mut Vocab) -> Result<Pipeline, InstrumentError> {
    crate::axioms::validate_axioms(ax, vocab)?;
    let mut translate_sto = BTreeSet::new();
    let mut residual_trans = BTreeSet::new();
    let mut rel_homs: Vec<(String, u8, Homomorphism)> = Vec::new();
    for r in ax.declared_rels() {
        let name = vocab.rel_name(r).to_string();
        if ax.is_sto(r) {
            translate_sto.insert(r);
        }
        if ax.is_transitive(r) {
            residual_trans.insert(r);
        }
        for p in ax.rel_props(r) {
            match p {
                RelProp::Refl | RelProp::Irref | RelProp::Symm => {
                    rel_homs.push((name.clone(), rel_prop_rank(p), homomorphism_for_rel(p, r)?));
                }
                RelProp::Trans => {}
                RelProp::Sto => {
                    // The strict-partial-order part of a total order.
                    rel_homs.push((
                        name.clone(),
                        rel_prop_rank(RelProp::Irref),
                        Homomorphism::Irref(r),
                    ));
                }
            }
        }
    }
    rel_homs.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    rel_homs.dedup_by(|a, b| a.2 == b.2);
    let mut fn_homs: Vec<(String, Homomorphism)> = Vec::new();
    for f in ax.declared_funs() {
        for p in ax.fn_props(f) {
            fn_homs.push((vocab.fun_name(f).to_string(), homomorphism_for_fn(p, f)));
        }
    }
    fn_homs.sort_by(|a, b| a.0.cmp(&b.0));
    // Initial values are never assigned, so their diagonal facts are
    // asserted once up front rather than by a trigger.
    let mut preamble = Vec::new();
    for (_, _, h) in &rel_homs {
        match h {
            Homomorphism::Refl(r) => {
                preamble.extend(vocab.vars().map(|x| ExecLetter::AssumeRel(*r, vec![x, x])));
            }
            Homomorphism::Irref(r) => {
                preamble
                    .extend(vocab.vars().map(|x| ExecLetter::AssumeNegRel(*r, vec![x, x])));
            }
            _ => {}
        }
    }
    let mut homs: Vec<Homomorphism> = rel_homs.into_iter().map(|(_, _, h)| h).collect();
    homs.extend(fn_homs.into_iter().map(|(_, h)| h));
    let vstar = if homs.iter().any(Homomorphism::is_functional) {
        Some(vocab.ensure_vstar())
    } else {
        None
    };
    Ok(Pipeline { translate_sto, preamble, homs, residual_trans, vstar })
}

/// Fold the homomorphism sequence over an automaton built with the STO
/// translation already applied, then prepend the preamble.
pub fn instrument(n: &ExecNfa, pipeline: &Pipeline) -> ExecNfa {
    let mut cur = n.clone();
    for h in &pipeline.homs {
        cur = apply_homomorphism(&cur, |a| h.apply(a, pipeline.vstar));
    }
    if !pipeline.preamble.is_empty() {
        let mut entry = cur.fresh();
        let new_initial = entry;
        for l in &pipeline.preamble {
            let next = cur.fresh();
            // Preamble letters have no source letter; they never appear in
            // reported counterexamples.
            cur.edges.push(crate::exec::nfa::NfaEdge {
                from: entry,
                label: Some(l.clone()),
                to: next,
                origin: None,
            });
            entry = next;
        }
        cur.eps(entry, cur.initial);
        cur.initial = new_initial;
        cur = cur.eliminate_eps();
    }
    cur
}

/// Instrument a single execution. Returns the image word and, per image
/// letter, the index of the source letter it descends from.
///
/// Fails when a comm/idem-constrained function is assigned to one of its own
/// operands: a string homomorphism would read post-assignment values there.
/// Program desugaring rules such letters out; raw traces must do the same.
pub fn instrument_execution(
    exec: &Execution,
    pipeline: &Pipeline,
    vocab: &Vocab,
) -> Result<(Execution, Vec<usize>), InstrumentError> {
    for l in &exec.letters {
        if let ExecLetter::AssignFn(x, f, zs) = l {
            if zs.contains(x) {
                for h in &pipeline.homs {
                    let clash = match h {
                        Homomorphism::Comm(g) | Homomorphism::Idem(g) => g == f,
                        _ => false,
                    };
                    if clash {
                        return Err(InstrumentError::SelfOperand(
                            format!("{}", l.display(vocab)),
                            h.describe(vocab),
                        ));
                    }
                }
            }
        }
    }
    let mut letters = Vec::new();
    let mut src = Vec::new();
    for l in &pipeline.preamble {
        letters.push(l.clone());
        src.push(usize::MAX); // preamble letters have no source position
    }
    for (i, l) in exec.letters.iter().enumerate() {
        for img in pipeline.apply_letter(l) {
            letters.push(img);
            src.push(i);
        }
    }
    Ok((Execution::new(letters), src))
}
