//! Reference semantics at the term level: congruence closure over the
//! computed-term universe, minimal-model construction with relational
//! closures, and per-execution feasibility and coherence verdicts.
//!
//! Everything here is deliberately naive and quadratic. The automaton in
//! [`crate::scc`] is tested against these verdicts, never the other way
//! around.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::axioms::{validate_axioms, AxiomError, AxiomSet};
use crate::exec::letter::{ExecLetter, Execution};
use crate::exec::term::{GroundAtom, Replay, TermArena, TermId, TermNode};
use crate::vocab::{Rel, Var, Vocab};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Axioms(#[from] AxiomError),
    #[error(
        "negative assume on strict-total-order relation {0}: executions over a strict total \
         order must branch into the reversed positive assume and an equality instead"
    )]
    NegativeStoAssume(String),
}

/// Union-find over a finite, subterm-closed set of terms, congruence-closed
/// and saturated under commutativity swaps and idempotence collapses for the
/// declared functions. Saturation only ever relates terms that are present;
/// no new terms are invented.
#[derive(Clone, Debug)]
pub struct TermPartition {
    universe: Vec<TermId>,
    index: HashMap<TermId, usize>,
    parent: Vec<usize>,
}

impl TermPartition {
    pub fn universe(&self) -> &[TermId] {
        &self.universe
    }

    pub fn contains(&self, t: TermId) -> bool {
        self.index.contains_key(&t)
    }

    fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Root at the smaller index so representatives are deterministic.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    /// Representative index of a term's class.
    pub fn class_of(&self, t: TermId) -> usize {
        self.find(self.index[&t])
    }

    pub fn same_class(&self, s: TermId, t: TermId) -> bool {
        self.class_of(s) == self.class_of(t)
    }

    pub fn num_classes(&self) -> usize {
        (0..self.parent.len()).filter(|&i| self.parent[i] == i).count()
    }

    pub fn class_members(&self, root: usize) -> Vec<TermId> {
        (0..self.parent.len())
            .filter(|&i| self.find(i) == root)
            .map(|i| self.universe[i])
            .collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|&i| self.parent[i] == i).collect()
    }
}

/// Least partition of `universe` containing `eqs`, closed under congruence
/// and under the comm-swap and idem-collapse rules for declared functions.
/// `universe` must be subterm-closed.
pub fn closure(
    universe: &[TermId],
    eqs: &[(TermId, TermId)],
    ax: &AxiomSet,
    arena: &TermArena,
) -> TermPartition {
    let mut index = HashMap::with_capacity(universe.len());
    for (i, &t) in universe.iter().enumerate() {
        index.insert(t, i);
    }
    let mut part = TermPartition {
        universe: universe.to_vec(),
        index,
        parent: (0..universe.len()).collect(),
    };
    for &(s, t) in eqs {
        let (a, b) = (part.index[&s], part.index[&t]);
        part.union(a, b);
    }
    // Applications present in the universe, with local argument indices.
    let apps: Vec<(usize, crate::vocab::Fun, Vec<usize>)> = universe
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| match arena.node(t) {
            TermNode::App(f, args) => {
                let locals = args.iter().map(|a| part.index[a]).collect();
                Some((i, *f, locals))
            }
            TermNode::Init(_) => None,
        })
        .collect();
    loop {
        let mut changed = false;
        for (i, (ni, fi, ai)) in apps.iter().enumerate() {
            for (nj, fj, aj) in apps.iter().skip(i + 1) {
                if fi != fj {
                    continue;
                }
                let direct = ai.len() == aj.len()
                    && ai.iter().zip(aj).all(|(&a, &b)| part.find(a) == part.find(b));
                let swapped = ax.is_commutative(*fi)
                    && ai.len() == 2
                    && part.find(ai[0]) == part.find(aj[1])
                    && part.find(ai[1]) == part.find(aj[0]);
                let idem = ax.is_idempotent(*fi)
                    && (part.find(ai[0]) == part.find(*nj) || part.find(aj[0]) == part.find(*ni));
                if direct || swapped || idem {
                    changed |= part.union(*ni, *nj);
                }
            }
        }
        if !changed {
            break;
        }
    }
    part
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conflict {
    /// A disequality atom whose two sides ended up in one class.
    NeqMerged(String),
    /// A tuple asserted both positively and negatively for the relation.
    PosNegOverlap(String),
    /// An irreflexive relation holding on a diagonal tuple.
    IrrefDiagonal(String),
}

/// The term-quotient structure generated by an execution's atoms, with
/// relations holding only where assumed plus the declared closures.
#[derive(Clone, Debug)]
pub struct MinimalModel {
    pub partition: TermPartition,
    pub rel_pos: BTreeMap<Rel, BTreeSet<(usize, usize)>>,
    pub rel_neg: BTreeMap<Rel, BTreeSet<(usize, usize)>>,
    /// Relations of arity other than 2 carry no axioms; their tuples are
    /// stored verbatim.
    pub rel_pos_wide: BTreeMap<Rel, BTreeSet<Vec<usize>>>,
    pub rel_neg_wide: BTreeMap<Rel, BTreeSet<Vec<usize>>>,
    pub consistent: bool,
    pub conflict: Option<Conflict>,
}

fn close_relations(
    ax: &AxiomSet,
    all_classes: &[usize],
    pos: &mut BTreeMap<Rel, BTreeSet<(usize, usize)>>,
    neg: &mut BTreeMap<Rel, BTreeSet<(usize, usize)>>,
) {
    let rels: BTreeSet<Rel> = pos.keys().chain(neg.keys()).copied().collect();
    for r in rels {
        let p = pos.entry(r).or_default();
        if ax.is_reflexive(r) {
            for &c in all_classes {
                p.insert((c, c));
            }
        }
        let n = neg.entry(r).or_default();
        loop {
            let mut added = false;
            if ax.is_symmetric(r) {
                let swaps: Vec<_> = p.iter().map(|&(a, b)| (b, a)).collect();
                for t in swaps {
                    added |= p.insert(t);
                }
                let nswaps: Vec<_> = n.iter().map(|&(a, b)| (b, a)).collect();
                for t in nswaps {
                    added |= n.insert(t);
                }
            }
            if ax.is_transitive(r) {
                let cur: Vec<_> = p.iter().copied().collect();
                for &(a, b) in &cur {
                    for &(b2, c) in &cur {
                        if b == b2 {
                            added |= p.insert((a, c));
                        }
                    }
                }
                // Derived negatives: R(a,b) ∧ ¬R(a,c) gives ¬R(b,c), and
                // R(b,c) ∧ ¬R(a,c) gives ¬R(a,b).
                let curp: Vec<_> = p.iter().copied().collect();
                let curn: Vec<_> = n.iter().copied().collect();
                for &(a, b) in &curp {
                    for &(a2, c) in &curn {
                        if a == a2 {
                            added |= n.insert((b, c));
                        }
                        if b == c {
                            added |= n.insert((a2, a));
                        }
                    }
                }
            }
            if !added {
                break;
            }
        }
    }
}

/// Build the minimal model of an execution modulo a validated axiom set.
/// Strict total orders are treated as strict partial orders; the execution
/// must not contain negative assumes on them.
pub fn minimal_model(
    exec: &Execution,
    ax: &AxiomSet,
    vocab: &Vocab,
) -> Result<MinimalModel, OracleError> {
    validate_axioms(ax, vocab)?;
    for l in &exec.letters {
        if let ExecLetter::AssumeNegRel(r, _) = l {
            if ax.is_sto(*r) {
                return Err(OracleError::NegativeStoAssume(vocab.rel_name(*r).to_string()));
            }
        }
    }
    let replay = Replay::new(exec, vocab);
    Ok(minimal_model_of_replay(&replay, exec.len(), ax, vocab))
}

pub(crate) fn minimal_model_of_replay(
    replay: &Replay,
    len: usize,
    ax: &AxiomSet,
    vocab: &Vocab,
) -> MinimalModel {
    let universe = replay.computed_upto(len);
    let eqs = replay.eq_atoms_upto(len);
    let part = closure(&universe, &eqs, ax, &replay.arena);

    let mut pos: BTreeMap<Rel, BTreeSet<(usize, usize)>> = BTreeMap::new();
    let mut neg: BTreeMap<Rel, BTreeSet<(usize, usize)>> = BTreeMap::new();
    let mut pos_wide: BTreeMap<Rel, BTreeSet<Vec<usize>>> = BTreeMap::new();
    let mut neg_wide: BTreeMap<Rel, BTreeSet<Vec<usize>>> = BTreeMap::new();
    let mut neq_atoms: Vec<(TermId, TermId)> = Vec::new();
    for atom in replay.atoms_upto(len) {
        match atom {
            GroundAtom::Eq(..) => {}
            GroundAtom::Neq(s, t) => neq_atoms.push((*s, *t)),
            GroundAtom::Rel(r, args) => {
                let cls: Vec<usize> = args.iter().map(|t| part.class_of(*t)).collect();
                if cls.len() == 2 {
                    pos.entry(*r).or_default().insert((cls[0], cls[1]));
                } else {
                    pos_wide.entry(*r).or_default().insert(cls);
                }
            }
            GroundAtom::NegRel(r, args) => {
                let cls: Vec<usize> = args.iter().map(|t| part.class_of(*t)).collect();
                if cls.len() == 2 {
                    neg.entry(*r).or_default().insert((cls[0], cls[1]));
                } else {
                    neg_wide.entry(*r).or_default().insert(cls);
                }
            }
        }
    }
    let all_classes = part.roots();
    close_relations(ax, &all_classes, &mut pos, &mut neg);

    let mut consistent = true;
    let mut conflict = None;
    for (s, t) in &neq_atoms {
        if part.same_class(*s, *t) {
            consistent = false;
            conflict = Some(Conflict::NeqMerged(format!(
                "{} ≠ {}",
                replay.arena.display(*s, vocab),
                replay.arena.display(*t, vocab)
            )));
            break;
        }
    }
    if consistent {
        'outer: for (r, p) in &pos {
            if let Some(n) = neg.get(r) {
                if let Some(t) = p.intersection(n).next() {
                    consistent = false;
                    conflict = Some(Conflict::PosNegOverlap(format!(
                        "{}{:?}",
                        vocab.rel_name(*r),
                        t
                    )));
                    break 'outer;
                }
            }
            if ax.is_irreflexive(*r) {
                if let Some(&(a, _)) = p.iter().find(|&&(a, b)| a == b) {
                    consistent = false;
                    conflict =
                        Some(Conflict::IrrefDiagonal(format!("{}({a},{a})", vocab.rel_name(*r))));
                    break 'outer;
                }
            }
        }
    }
    if consistent {
        for (r, p) in &pos_wide {
            if let Some(n) = neg_wide.get(r) {
                if let Some(t) = p.intersection(n).next() {
                    consistent = false;
                    conflict = Some(Conflict::PosNegOverlap(format!(
                        "{}{:?}",
                        vocab.rel_name(*r),
                        t
                    )));
                    break;
                }
            }
        }
    }
    MinimalModel {
        partition: part,
        rel_pos: pos,
        rel_neg: neg,
        rel_pos_wide: pos_wide,
        rel_neg_wide: neg_wide,
        consistent,
        conflict,
    }
}

/// An execution is feasible modulo the axioms iff its minimal model is
/// consistent.
pub fn is_feasible(exec: &Execution, ax: &AxiomSet, vocab: &Vocab) -> Result<bool, OracleError> {
    Ok(minimal_model(exec, ax, vocab)?.consistent)
}

/// Whether the equality atoms of the execution (together with the functional
/// axioms) entail `t1 = t2`. Both terms must be computed by the execution.
/// Disequality and relational atoms never contribute; the relation is the
/// generated congruence even when the execution is infeasible.
pub fn entails_eq(
    exec: &Execution,
    ax: &AxiomSet,
    vocab: &Vocab,
    t1: TermId,
    t2: TermId,
) -> bool {
    let replay = Replay::new(exec, vocab);
    let universe = replay.computed_upto(exec.len());
    let eqs = replay.eq_atoms_upto(exec.len());
    let part = closure(&universe, &eqs, ax, &replay.arena);
    part.same_class(t1, t2)
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    Memoizing,
    EarlyAssume,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    /// 0-based index of the offending letter.
    pub position: usize,
    pub kind: ViolationKind,
    /// Rendered witness terms: the recomputed term, or the dropped term and
    /// its new equal.
    pub witness: Vec<String>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoherenceVerdict {
    pub coherent: bool,
    pub violation: Option<Violation>,
}

impl CoherenceVerdict {
    fn coherent() -> Self {
        CoherenceVerdict { coherent: true, violation: None }
    }
}

/// Coherence check for the single letter at `pos` given everything before it.
/// Returns the violation if the memoizing or early-assumes clause fails.
pub fn violation_at(
    replay: &Replay,
    letter: &ExecLetter,
    pos: usize,
    ax: &AxiomSet,
    vocab: &Vocab,
) -> Option<Violation> {
    match letter {
        ExecLetter::AssignFn(x, _, _) => {
            let t = replay.envs[pos + 1][x.0 as usize];
            let before = replay.computed_upto(pos);
            let mut universe = before.clone();
            if !universe.contains(&t) {
                universe.push(t);
            }
            let eqs = replay.eq_atoms_upto(pos);
            let part = closure(&universe, &eqs, ax, &replay.arena);
            let recomputed = before.iter().any(|&t2| part.same_class(t2, t));
            if !recomputed {
                return None;
            }
            let held = replay.envs[pos]
                .iter()
                .any(|&cur| part.contains(cur) && part.same_class(cur, t));
            if held {
                None
            } else {
                Some(Violation {
                    position: pos,
                    kind: ViolationKind::Memoizing,
                    witness: vec![format!("{}", replay.arena.display(t, vocab))],
                })
            }
        }
        ExecLetter::AssumeEq(x, y) => {
            let universe = replay.computed_upto(pos);
            let eqs_before = replay.eq_atoms_upto(pos);
            let before = closure(&universe, &eqs_before, ax, &replay.arena);
            let new_atom =
                (replay.envs[pos][x.0 as usize], replay.envs[pos][y.0 as usize]);
            if before.same_class(new_atom.0, new_atom.1) {
                return None;
            }
            let mut eqs_after = eqs_before;
            eqs_after.push(new_atom);
            let after = closure(&universe, &eqs_after, ax, &replay.arena);
            let dropped: Vec<TermId> = universe
                .iter()
                .copied()
                .filter(|&t| {
                    !replay.envs[pos].iter().any(|&cur| before.same_class(cur, t))
                })
                .collect();
            for &t in &dropped {
                for &t2 in &universe {
                    if after.same_class(t, t2) && !before.same_class(t, t2) {
                        return Some(Violation {
                            position: pos,
                            kind: ViolationKind::EarlyAssume,
                            witness: vec![
                                format!("{}", replay.arena.display(t, vocab)),
                                format!("{}", replay.arena.display(t2, vocab)),
                            ],
                        });
                    }
                }
            }
            None
        }
        // Disequality and relational assumes entail no new term equalities
        // under the supported axiom classes, and plain assignments carry no
        // obligation.
        _ => None,
    }
}

/// Full coherence verdict: first violating position, if any.
pub fn is_coherent(
    exec: &Execution,
    ax: &AxiomSet,
    vocab: &Vocab,
) -> Result<CoherenceVerdict, OracleError> {
    validate_axioms(ax, vocab)?;
    for l in &exec.letters {
        if let ExecLetter::AssumeNegRel(r, _) = l {
            if ax.is_sto(*r) {
                return Err(OracleError::NegativeStoAssume(vocab.rel_name(*r).to_string()));
            }
        }
    }
    let replay = Replay::new(exec, vocab);
    for (pos, letter) in exec.letters.iter().enumerate() {
        if let Some(v) = violation_at(&replay, letter, pos, ax, vocab) {
            return Ok(CoherenceVerdict { coherent: false, violation: Some(v) });
        }
    }
    Ok(CoherenceVerdict::coherent())
}

/// Convenience for tests: a variable by index.
pub fn var(i: u32) -> Var {
    Var(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{FnProp, RelProp};
    use crate::exec::letter::ExecLetter::*;

    struct Fx {
        vb: Vocab,
        x: Var,
        y: Var,
        z: Var,
        z1: Var,
        z2: Var,
        z3: Var,
        z4: Var,
        z5: Var,
        z6: Var,
        f: crate::vocab::Fun,
        g: crate::vocab::Fun,
        u: crate::vocab::Fun,
        r: Rel,
    }

    fn fx() -> Fx {
        let mut vb = Vocab::new();
        let x = vb.add_var("x", false);
        let y = vb.add_var("y", false);
        let z = vb.add_var("z", false);
        let z1 = vb.add_var("z1", false);
        let z2 = vb.add_var("z2", false);
        let z3 = vb.add_var("z3", false);
        let z4 = vb.add_var("z4", false);
        let z5 = vb.add_var("z5", false);
        let z6 = vb.add_var("z6", false);
        let f = vb.add_fun("f", 2);
        let g = vb.add_fun("g", 1);
        let u = vb.add_fun("u", 1);
        let r = vb.add_rel("R", 2);
        Fx { vb, x, y, z, z1, z2, z3, z4, z5, z6, f, g, u, r }
    }

    fn no_axioms() -> AxiomSet {
        AxiomSet::new()
    }

    #[test]
    fn closure_merges_equated_initial_values() {
        let fx = fx();
        let exec = Execution::new(vec![AssumeEq(fx.x, fx.y)]);
        let replay = Replay::new(&exec, &fx.vb);
        let part = closure(
            &replay.computed_upto(1),
            &replay.eq_atoms_upto(1),
            &no_axioms(),
            &replay.arena,
        );
        let tx = replay.envs[0][fx.x.0 as usize];
        let ty = replay.envs[0][fx.y.0 as usize];
        assert!(part.same_class(tx, ty));
    }

    #[test]
    fn commutativity_saturation_lifts_through_congruence() {
        // g(f(x̂,ŷ)) and g(f(ŷ,x̂)) collapse modulo commutativity of f.
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_fun(fx.f, FnProp::Comm);
        let exec = Execution::new(vec![
            AssignFn(fx.z1, fx.f, vec![fx.x, fx.y]),
            AssignFn(fx.z2, fx.f, vec![fx.y, fx.x]),
            AssignFn(fx.z3, fx.g, vec![fx.z1]),
            AssignFn(fx.z4, fx.g, vec![fx.z2]),
        ]);
        let (replay, _) = crate::exec::term::computed_terms(&exec, &fx.vb);
        let t3 = replay.envs[4][fx.z3.0 as usize];
        let t4 = replay.envs[4][fx.z4.0 as usize];
        assert!(entails_eq(&exec, &ax, &fx.vb, t3, t4));
        assert!(!entails_eq(&exec, &no_axioms(), &fx.vb, t3, t4));
    }

    #[test]
    fn idempotence_saturation_collapses_nested_application() {
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_fun(fx.u, FnProp::Idem);
        let exec = Execution::new(vec![
            AssignFn(fx.z1, fx.u, vec![fx.x]),
            AssignFn(fx.z2, fx.u, vec![fx.z1]),
        ]);
        let replay = Replay::new(&exec, &fx.vb);
        let t1 = replay.envs[2][fx.z1.0 as usize];
        let t2 = replay.envs[2][fx.z2.0 as usize];
        assert!(entails_eq(&exec, &ax, &fx.vb, t1, t2));
        assert!(!entails_eq(&exec, &no_axioms(), &fx.vb, t1, t2));
    }

    #[test]
    fn minimal_model_merges_and_stays_consistent() {
        let fx = fx();
        let exec = Execution::new(vec![AssumeEq(fx.x, fx.y)]);
        let m = minimal_model(&exec, &no_axioms(), &fx.vb).unwrap();
        assert!(m.consistent);
        assert!(m.conflict.is_none());
    }

    #[test]
    fn irreflexive_transitive_cycle_is_inconsistent() {
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_rel(fx.r, RelProp::Irref);
        ax.declare_rel(fx.r, RelProp::Trans);
        let exec = Execution::new(vec![
            AssumeRel(fx.r, vec![fx.x, fx.y]),
            AssumeRel(fx.r, vec![fx.y, fx.x]),
        ]);
        let m = minimal_model(&exec, &ax, &fx.vb).unwrap();
        assert!(!m.consistent);
        assert!(matches!(m.conflict, Some(Conflict::IrrefDiagonal(_))));
        // Modulo no axioms the same two assumes are satisfiable.
        assert!(is_feasible(&exec, &no_axioms(), &fx.vb).unwrap());
    }

    #[test]
    fn derived_negative_transitivity_conflicts() {
        // R(x,y) and ¬R(x,z) derive ¬R(y,z); asserting R(y,z) then clashes.
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_rel(fx.r, RelProp::Trans);
        let exec = Execution::new(vec![
            AssumeRel(fx.r, vec![fx.x, fx.y]),
            AssumeNegRel(fx.r, vec![fx.x, fx.z]),
            AssumeRel(fx.r, vec![fx.y, fx.z]),
        ]);
        assert!(!is_feasible(&exec, &ax, &fx.vb).unwrap());
        assert!(is_feasible(&exec, &no_axioms(), &fx.vb).unwrap());
        // Second derived rule: R(y,z) and ¬R(x,z) derive ¬R(x,y).
        let exec2 = Execution::new(vec![
            AssumeRel(fx.r, vec![fx.y, fx.z]),
            AssumeNegRel(fx.r, vec![fx.x, fx.z]),
            AssumeRel(fx.r, vec![fx.x, fx.y]),
        ]);
        assert!(!is_feasible(&exec2, &ax, &fx.vb).unwrap());
        assert!(is_feasible(&exec2, &no_axioms(), &fx.vb).unwrap());
    }

    #[test]
    fn contradictory_equality_assumes_are_infeasible() {
        let fx = fx();
        let exec = Execution::new(vec![AssumeEq(fx.x, fx.y), AssumeNeq(fx.x, fx.y)]);
        let m = minimal_model(&exec, &no_axioms(), &fx.vb).unwrap();
        assert!(!m.consistent);
        assert!(matches!(m.conflict, Some(Conflict::NeqMerged(_))));
    }

    #[test]
    fn congruence_entails_equal_images() {
        let fx = fx();
        let exec = Execution::new(vec![
            AssumeEq(fx.x, fx.y),
            AssignFn(fx.z1, fx.u, vec![fx.x]),
            AssignFn(fx.z2, fx.u, vec![fx.y]),
        ]);
        let replay = Replay::new(&exec, &fx.vb);
        let t1 = replay.envs[3][fx.z1.0 as usize];
        let t2 = replay.envs[3][fx.z2.0 as usize];
        assert!(entails_eq(&exec, &no_axioms(), &fx.vb, t1, t2));
        let tx = replay.envs[0][fx.x.0 as usize];
        let ty = replay.envs[0][fx.y.0 as usize];
        assert!(!entails_eq(&Execution::empty(), &no_axioms(), &fx.vb, tx, ty));
    }

    #[test]
    fn swapped_commutative_arguments_entail_equality() {
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_fun(fx.f, FnProp::Comm);
        let exec = Execution::new(vec![
            AssignFn(fx.z1, fx.f, vec![fx.x, fx.y]),
            AssignFn(fx.z2, fx.f, vec![fx.y, fx.x]),
        ]);
        let replay = Replay::new(&exec, &fx.vb);
        let t1 = replay.envs[2][fx.z1.0 as usize];
        let t2 = replay.envs[2][fx.z2.0 as usize];
        assert!(entails_eq(&exec, &ax, &fx.vb, t1, t2));
    }

    /// The first worked example: re-assuming x = y after computing f(f(x))
    /// and f(f(y)) is an early assume, because the new equalities were
    /// already derivable inside the window.
    #[test]
    fn re_assumed_equality_is_early() {
        let fx = fx();
        let (x, y, z1, z2) = (fx.x, fx.y, fx.z1, fx.z2);
        let exec = Execution::new(vec![
            AssumeEq(x, y),
            AssignFn(z1, fx.u, vec![x]),
            AssignFn(z2, fx.u, vec![y]),
            AssignFn(z1, fx.u, vec![z1]),
            AssignFn(z2, fx.u, vec![z2]),
            AssumeEq(x, y),
        ]);
        let verdict = is_coherent(&exec, &no_axioms(), &fx.vb).unwrap();
        assert!(verdict.coherent, "violation: {:?}", verdict.violation);
    }

    /// The second worked example: z6 := g(z1) recomputes g(f(x̂,ŷ)) after
    /// z3 dropped it, a memoizing violation modulo no axioms, repaired by
    /// commutativity of f (z4 still holds g(f(ŷ,x̂))).
    #[test]
    fn dropped_recomputation_violates_memoizing_without_commutativity() {
        let fx = fx();
        let exec = Execution::new(vec![
            AssignFn(fx.z1, fx.f, vec![fx.x, fx.y]),
            AssignFn(fx.z2, fx.f, vec![fx.y, fx.x]),
            AssignFn(fx.z3, fx.g, vec![fx.z1]),
            AssignFn(fx.z4, fx.g, vec![fx.z2]),
            Assign(fx.z3, fx.z5),
            AssignFn(fx.z6, fx.g, vec![fx.z1]),
        ]);
        let verdict = is_coherent(&exec, &no_axioms(), &fx.vb).unwrap();
        assert!(!verdict.coherent);
        let v = verdict.violation.unwrap();
        assert_eq!(v.position, 5);
        assert_eq!(v.kind, ViolationKind::Memoizing);

        let mut ax = AxiomSet::new();
        ax.declare_fun(fx.f, FnProp::Comm);
        let verdict = is_coherent(&exec, &ax, &fx.vb).unwrap();
        assert!(verdict.coherent, "violation: {:?}", verdict.violation);
    }

    #[test]
    fn self_application_alone_is_coherent() {
        let fx = fx();
        let exec = Execution::new(vec![AssignFn(fx.x, fx.u, vec![fx.x])]);
        assert!(is_coherent(&exec, &no_axioms(), &fx.vb).unwrap().coherent);
    }

    #[test]
    fn coherent_executions_have_coherent_prefixes() {
        let fx = fx();
        let exec = Execution::new(vec![
            AssumeEq(fx.x, fx.y),
            AssignFn(fx.z1, fx.u, vec![fx.x]),
            AssignFn(fx.z2, fx.u, vec![fx.y]),
            AssumeRel(fx.r, vec![fx.z1, fx.z2]),
        ]);
        assert!(is_coherent(&exec, &no_axioms(), &fx.vb).unwrap().coherent);
        for len in 0..exec.len() {
            assert!(is_coherent(&exec.prefix(len), &no_axioms(), &fx.vb).unwrap().coherent);
        }
    }

    #[test]
    fn sto_treated_as_spo_rejects_negative_assumes() {
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_rel(fx.r, RelProp::Sto);
        let bad = Execution::new(vec![AssumeNegRel(fx.r, vec![fx.x, fx.y])]);
        assert!(matches!(
            is_feasible(&bad, &ax, &fx.vb),
            Err(OracleError::NegativeStoAssume(_))
        ));
        let cycle = Execution::new(vec![
            AssumeRel(fx.r, vec![fx.x, fx.y]),
            AssumeRel(fx.r, vec![fx.y, fx.x]),
        ]);
        assert!(!is_feasible(&cycle, &ax, &fx.vb).unwrap());
    }

    #[test]
    fn reflexivity_closure_feeds_consistency_checks() {
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_rel(fx.r, RelProp::Refl);
        let exec = Execution::new(vec![
            AssumeNegRel(fx.r, vec![fx.x, fx.y]),
            AssumeEq(fx.x, fx.y),
        ]);
        assert!(!is_feasible(&exec, &ax, &fx.vb).unwrap());
        assert!(is_feasible(&exec, &no_axioms(), &fx.vb).unwrap());
    }

    #[test]
    fn closure_is_a_fixpoint_and_monotone() {
        let fx = fx();
        let mut ax = AxiomSet::new();
        ax.declare_fun(fx.f, FnProp::Comm);
        let exec = Execution::new(vec![
            AssignFn(fx.z1, fx.f, vec![fx.x, fx.y]),
            AssignFn(fx.z2, fx.f, vec![fx.y, fx.x]),
            AssignFn(fx.z3, fx.g, vec![fx.z1]),
            AssumeEq(fx.z, fx.x),
        ]);
        let replay = Replay::new(&exec, &fx.vb);
        let universe = replay.computed_upto(exec.len());
        let eqs = replay.eq_atoms_upto(exec.len());
        let part = closure(&universe, &eqs, &ax, &replay.arena);
        // Fixpoint: rebuilding with the classes already merged changes
        // nothing.
        let part2 = closure(&universe, &eqs, &ax, &replay.arena);
        for &a in &universe {
            for &b in &universe {
                assert_eq!(part.same_class(a, b), part2.same_class(a, b));
            }
        }
        // Monotone: adding an equality never splits a class.
        let mut more = eqs.clone();
        more.push((universe[0], universe[1]));
        let bigger = closure(&universe, &more, &ax, &replay.arena);
        for &a in &universe {
            for &b in &universe {
                if part.same_class(a, b) {
                    assert!(bigger.same_class(a, b));
                }
            }
        }
    }

    #[test]
    fn entailment_ignores_disequalities_and_relational_assumes() {
        let fx = fx();
        let with_rels = Execution::new(vec![
            AssumeEq(fx.x, fx.y),
            AssumeNeq(fx.z, fx.x),
            AssumeRel(fx.r, vec![fx.x, fx.z]),
            AssignFn(fx.z1, fx.u, vec![fx.x]),
            AssignFn(fx.z2, fx.u, vec![fx.y]),
            AssumeNegRel(fx.r, vec![fx.z1, fx.z2]),
        ]);
        let stripped = Execution::new(
            with_rels
                .letters
                .iter()
                .filter(|l| {
                    !matches!(
                        l,
                        AssumeNeq(..) | AssumeRel(..) | AssumeNegRel(..)
                    )
                })
                .cloned()
                .collect(),
        );
        let ra = Replay::new(&with_rels, &fx.vb);
        let terms = ra.computed_upto(with_rels.len());
        for &a in &terms {
            for &b in &terms {
                assert_eq!(
                    entails_eq(&with_rels, &no_axioms(), &fx.vb, a, b),
                    entails_eq(&stripped, &no_axioms(), &fx.vb, a, b)
                );
            }
        }
    }
}
