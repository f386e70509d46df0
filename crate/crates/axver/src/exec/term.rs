//! Ground terms computed by executions, and the term-level semantics of the
//! alphabet: the term stored in each variable after a word, the ground atoms
//! a word accumulates, and the set of all terms it computes.

use std::collections::HashMap;
use std::fmt;

use crate::exec::letter::{ExecLetter, Execution};
use crate::vocab::{Fun, Rel, Var, Vocab};

/// Handle into a [`TermArena`]. Hash-consed: structurally equal terms get the
/// same id within one arena.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TermId(pub u32);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TermNode {
    /// The initial-value constant `x̂` of a variable.
    Init(Var),
    /// A function application over previously built terms.
    App(Fun, Vec<TermId>),
}

#[derive(Clone, Debug, Default)]
pub struct TermArena {
    nodes: Vec<TermNode>,
    memo: HashMap<TermNode, TermId>,
}

impl TermArena {
    pub fn new() -> Self {
        TermArena::default()
    }

    pub fn init(&mut self, v: Var) -> TermId {
        self.intern(TermNode::Init(v))
    }

    pub fn app(&mut self, f: Fun, args: Vec<TermId>) -> TermId {
        self.intern(TermNode::App(f, args))
    }

    fn intern(&mut self, node: TermNode) -> TermId {
        if let Some(&id) = self.memo.get(&node) {
            return id;
        }
        let id = TermId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.memo.insert(node, id);
        id
    }

    pub fn node(&self, t: TermId) -> &TermNode {
        &self.nodes[t.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn display<'a>(&'a self, t: TermId, vocab: &'a Vocab) -> TermDisplay<'a> {
        TermDisplay { arena: self, term: t, vocab }
    }
}

pub struct TermDisplay<'a> {
    arena: &'a TermArena,
    term: TermId,
    vocab: &'a Vocab,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.arena.node(self.term) {
            TermNode::Init(v) => write!(f, "{}^", self.vocab.var_name(*v)),
            TermNode::App(g, args) => {
                write!(f, "{}(", self.vocab.fun_name(*g))?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", self.arena.display(*a, self.vocab))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A ground atom accumulated by an execution.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GroundAtom {
    Eq(TermId, TermId),
    Neq(TermId, TermId),
    Rel(Rel, Vec<TermId>),
    NegRel(Rel, Vec<TermId>),
}

/// Replay of an execution at the term level: the variable environment after
/// every prefix, the computed-term set, and the accumulated atoms together
/// with the prefix length at which each was assumed.
#[derive(Clone, Debug)]
pub struct Replay {
    pub arena: TermArena,
    /// `envs[i]` maps each variable to its term after the length-`i` prefix.
    pub envs: Vec<Vec<TermId>>,
    /// Terms in order of first computation; subterm-closed by construction.
    pub computed: Vec<TermId>,
    /// `(i, atom)`: atom assumed by letter `i` (0-based), evaluated in `envs[i]`.
    pub atoms: Vec<(usize, GroundAtom)>,
}

impl Replay {
    pub fn new(exec: &Execution, vocab: &Vocab) -> Self {
        let mut arena = TermArena::new();
        let nvars = vocab.num_vars();
        let mut env: Vec<TermId> = Vec::with_capacity(nvars);
        let mut computed = Vec::new();
        let mut seen = vec![false; 0];
        let mark = |t: TermId, computed: &mut Vec<TermId>, seen: &mut Vec<bool>| {
            if t.0 as usize >= seen.len() {
                seen.resize(t.0 as usize + 1, false);
            }
            if !seen[t.0 as usize] {
                seen[t.0 as usize] = true;
                computed.push(t);
            }
        };
        for v in vocab.vars() {
            let t = arena.init(v);
            env.push(t);
            mark(t, &mut computed, &mut seen);
        }
        let mut envs = vec![env.clone()];
        let mut atoms = Vec::new();
        for (i, letter) in exec.letters.iter().enumerate() {
            match letter {
                ExecLetter::Assign(x, y) => {
                    env[x.0 as usize] = env[y.0 as usize];
                }
                ExecLetter::AssignFn(x, f, zs) => {
                    let args: Vec<TermId> = zs.iter().map(|z| env[z.0 as usize]).collect();
                    let t = arena.app(*f, args);
                    env[x.0 as usize] = t;
                    mark(t, &mut computed, &mut seen);
                }
                ExecLetter::AssumeEq(x, y) => {
                    atoms.push((i, GroundAtom::Eq(env[x.0 as usize], env[y.0 as usize])));
                }
                ExecLetter::AssumeNeq(x, y) => {
                    atoms.push((i, GroundAtom::Neq(env[x.0 as usize], env[y.0 as usize])));
                }
                ExecLetter::AssumeRel(r, zs) => {
                    let args = zs.iter().map(|z| env[z.0 as usize]).collect();
                    atoms.push((i, GroundAtom::Rel(*r, args)));
                }
                ExecLetter::AssumeNegRel(r, zs) => {
                    let args = zs.iter().map(|z| env[z.0 as usize]).collect();
                    atoms.push((i, GroundAtom::NegRel(*r, args)));
                }
            }
            envs.push(env.clone());
        }
        Replay { arena, envs, computed, atoms }
    }

    /// Terms computed by the length-`len` prefix, in first-computation order.
    pub fn computed_upto(&self, len: usize) -> Vec<TermId> {
        // `computed` is ordered by first appearance; cut it at the last term
        // introduced within the prefix.
        let mut live = Vec::new();
        let mut seen = vec![false; self.arena.len()];
        for env in &self.envs[..=len] {
            for &t in env {
                if !seen[t.0 as usize] {
                    seen[t.0 as usize] = true;
                }
            }
        }
        for &t in &self.computed {
            if seen[t.0 as usize] {
                live.push(t);
            }
        }
        live
    }

    pub fn atoms_upto(&self, len: usize) -> impl Iterator<Item = &GroundAtom> {
        self.atoms.iter().filter(move |(i, _)| *i < len).map(|(_, a)| a)
    }

    pub fn eq_atoms_upto(&self, len: usize) -> Vec<(TermId, TermId)> {
        self.atoms_upto(len)
            .filter_map(|a| match a {
                GroundAtom::Eq(s, t) => Some((*s, *t)),
                _ => None,
            })
            .collect()
    }
}

/// The term stored in `x` after `exec`: `teval(ε, x) = x̂`, assignments follow
/// the four-case induction on the last letter.
pub fn teval(exec: &Execution, x: Var, vocab: &Vocab) -> (Replay, TermId) {
    let replay = Replay::new(exec, vocab);
    let t = replay.envs[exec.len()][x.0 as usize];
    (replay, t)
}

/// The ground atoms accumulated by `exec`.
pub fn kappa(exec: &Execution, vocab: &Vocab) -> (Replay, Vec<GroundAtom>) {
    let replay = Replay::new(exec, vocab);
    let atoms = replay.atoms.iter().map(|(_, a)| a.clone()).collect();
    (replay, atoms)
}

/// The set of terms computed by `exec`: every variable's value at every
/// prefix.
pub fn computed_terms(exec: &Execution, vocab: &Vocab) -> (Replay, Vec<TermId>) {
    let replay = Replay::new(exec, vocab);
    let terms = replay.computed.clone();
    (replay, terms)
}
