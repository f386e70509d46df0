//! Nondeterministic finite automata over the execution alphabet: the
//! language `Exec(s)` of a core program, the postcondition-violation suffix,
//! and images under letter-to-word homomorphisms.
//!
//! ε-transitions are used internally by the construction and eliminated on
//! demand. Every letter edge carries the pre-instrumentation letter it
//! descends from, so product exploration can report counterexamples in the
//! program's own alphabet.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::axioms::AxiomSet;
use crate::exec::letter::ExecLetter;
use crate::syntax::ast::{
    atomic_literal, Atom, Expr, Literal, PostCondition, PostFormula, Program, Stmt, StmtKind,
};
use crate::vocab::Vocab;

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct StateId(pub u32);

#[derive(Clone, Debug)]
pub struct NfaEdge {
    pub from: StateId,
    /// `None` is an ε-transition.
    pub label: Option<ExecLetter>,
    pub to: StateId,
    /// The original program letter this edge descends from. Set on the first
    /// letter of a homomorphism image, `None` on inserted instrumentation
    /// letters and ε-edges.
    pub origin: Option<ExecLetter>,
}

#[derive(Clone, Debug, Default)]
pub struct ExecNfa {
    pub num_states: u32,
    pub initial: StateId,
    pub accepting: BTreeSet<StateId>,
    pub edges: Vec<NfaEdge>,
}

impl ExecNfa {
    pub(crate) fn fresh(&mut self) -> StateId {
        let s = StateId(self.num_states);
        self.num_states += 1;
        s
    }

    pub(crate) fn eps(&mut self, from: StateId, to: StateId) {
        self.edges.push(NfaEdge { from, label: None, to, origin: None });
    }

    pub(crate) fn letter(&mut self, from: StateId, l: ExecLetter, to: StateId) {
        self.edges.push(NfaEdge { from, label: Some(l.clone()), to, origin: Some(l) });
    }

    /// Copy with every state accepting; its language is the set of prefixes
    /// of the original language (plus words leading into dead ends, which
    /// the product exploration never extends to acceptance anyway).
    pub fn prefix_closure(&self) -> ExecNfa {
        let mut n = self.clone();
        n.accepting = (0..n.num_states).map(StateId).collect();
        n
    }

    fn eps_closure(&self, adj_eps: &HashMap<StateId, Vec<StateId>>, s: StateId) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![s];
        while let Some(t) = stack.pop() {
            if !seen.insert(t) {
                continue;
            }
            if let Some(nexts) = adj_eps.get(&t) {
                stack.extend(nexts.iter().copied());
            }
        }
        seen
    }

    /// Remove ε-transitions, then drop states unreachable from the initial
    /// state. The language is unchanged.
    pub fn eliminate_eps(&self) -> ExecNfa {
        let mut adj_eps: HashMap<StateId, Vec<StateId>> = HashMap::new();
        for e in &self.edges {
            if e.label.is_none() {
                adj_eps.entry(e.from).or_default().push(e.to);
            }
        }
        let mut out = ExecNfa {
            num_states: self.num_states,
            initial: self.initial,
            accepting: BTreeSet::new(),
            edges: Vec::new(),
        };
        let mut seen_edges = HashSet::new();
        for s in (0..self.num_states).map(StateId) {
            let closure = self.eps_closure(&adj_eps, s);
            if closure.iter().any(|t| self.accepting.contains(t)) {
                out.accepting.insert(s);
            }
            for e in &self.edges {
                if e.label.is_some() && closure.contains(&e.from) {
                    let key = (s, e.label.clone(), e.to);
                    if seen_edges.insert(key) {
                        out.edges.push(NfaEdge {
                            from: s,
                            label: e.label.clone(),
                            to: e.to,
                            origin: e.origin.clone(),
                        });
                    }
                }
            }
        }
        out.trim()
    }

    /// Drop unreachable states and renumber.
    pub fn trim(&self) -> ExecNfa {
        let mut adj: HashMap<StateId, Vec<usize>> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            adj.entry(e.from).or_default().push(i);
        }
        let mut order = Vec::new();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([self.initial]);
        seen.insert(self.initial);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            if let Some(es) = adj.get(&s) {
                for &i in es {
                    let t = self.edges[i].to;
                    if seen.insert(t) {
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut remap: HashMap<StateId, StateId> = HashMap::new();
        for (new, old) in order.iter().enumerate() {
            remap.insert(*old, StateId(new as u32));
        }
        ExecNfa {
            num_states: order.len() as u32,
            initial: remap[&self.initial],
            accepting: self
                .accepting
                .iter()
                .filter_map(|s| remap.get(s).copied())
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| remap.contains_key(&e.from) && remap.contains_key(&e.to))
                .map(|e| NfaEdge {
                    from: remap[&e.from],
                    label: e.label.clone(),
                    to: remap[&e.to],
                    origin: e.origin.clone(),
                })
                .collect(),
        }
    }

    /// Outgoing letter edges grouped by source state; ε-edges must already be
    /// eliminated.
    pub fn adjacency(&self) -> Vec<Vec<&NfaEdge>> {
        let mut adj: Vec<Vec<&NfaEdge>> = vec![Vec::new(); self.num_states as usize];
        for e in &self.edges {
            debug_assert!(e.label.is_some(), "adjacency over ε-free automata only");
            adj[e.from.0 as usize].push(e);
        }
        adj
    }

    /// Subset-simulation membership test. Works with ε-edges present.
    pub fn accepts(&self, word: &[ExecLetter]) -> bool {
        let mut adj_eps: HashMap<StateId, Vec<StateId>> = HashMap::new();
        for e in &self.edges {
            if e.label.is_none() {
                adj_eps.entry(e.from).or_default().push(e.to);
            }
        }
        let mut cur = self.eps_closure(&adj_eps, self.initial);
        for l in word {
            let mut next = BTreeSet::new();
            for e in &self.edges {
                if cur.contains(&e.from) && e.label.as_ref() == Some(l) {
                    next.extend(self.eps_closure(&adj_eps, e.to));
                }
            }
            cur = next;
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|s| self.accepting.contains(s))
    }

    /// All accepted words of length at most `maxlen`. Exponential; test use
    /// only.
    pub fn enumerate_words(&self, maxlen: usize) -> Vec<Vec<ExecLetter>> {
        let n = self.eliminate_eps();
        let adj = n.adjacency();
        let mut out = Vec::new();
        let start: BTreeSet<StateId> = [n.initial].into();
        let mut stack: Vec<(BTreeSet<StateId>, Vec<ExecLetter>)> = vec![(start, Vec::new())];
        while let Some((subset, word)) = stack.pop() {
            if subset.iter().any(|s| n.accepting.contains(s)) {
                out.push(word.clone());
            }
            if word.len() == maxlen {
                continue;
            }
            let mut letters: BTreeSet<ExecLetter> = BTreeSet::new();
            for s in &subset {
                for e in &adj[s.0 as usize] {
                    letters.insert(e.label.clone().unwrap());
                }
            }
            for l in letters {
                let mut next = BTreeSet::new();
                for s in &subset {
                    for e in &adj[s.0 as usize] {
                        if e.label.as_ref() == Some(&l) {
                            next.insert(e.to);
                        }
                    }
                }
                let mut w = word.clone();
                w.push(l);
                stack.push((next, w));
            }
        }
        out
    }

    /// Line-oriented debug dump: one edge per line, letters in the alphabet's
    /// own syntax.
    pub fn dump(&self, vocab: &Vocab) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "initial: {}", self.initial.0);
        let accepting: Vec<String> =
            self.accepting.iter().map(|a| a.0.to_string()).collect();
        let _ = writeln!(s, "accepting: {}", accepting.join(" "));
        let mut lines: Vec<String> = self
            .edges
            .iter()
            .map(|e| {
                let label = match &e.label {
                    Some(l) => format!("{}", l.display(vocab)),
                    None => "ε".to_string(),
                };
                format!("{} -- {} --> {}", e.from.0, label, e.to.0)
            })
            .collect();
        lines.sort();
        for l in lines {
            s.push_str(&l);
            s.push('\n');
        }
        s
    }
}

/// Expand a core literal into the alphabet letters of its assume, applying
/// the strict-total-order translation: a negative assume on an STO relation
/// becomes the branch `assume(R(y,x)) + assume(x = y)`.
pub fn literal_letters(lit: &Literal, ax: &AxiomSet) -> Vec<ExecLetter> {
    match (&lit.atom, lit.positive) {
        (Atom::Eq(x, y), true) => vec![ExecLetter::AssumeEq(*x, *y)],
        (Atom::Eq(x, y), false) => vec![ExecLetter::AssumeNeq(*x, *y)],
        (Atom::Rel(r, zs), true) => vec![ExecLetter::AssumeRel(*r, zs.clone())],
        (Atom::Rel(r, zs), false) => {
            if ax.is_sto(*r) {
                vec![
                    ExecLetter::AssumeRel(*r, vec![zs[1], zs[0]]),
                    ExecLetter::AssumeEq(zs[0], zs[1]),
                ]
            } else {
                vec![ExecLetter::AssumeNegRel(*r, zs.clone())]
            }
        }
    }
}

fn guard(stmt: &Stmt, cond: &crate::syntax::ast::Cond) -> Literal {
    atomic_literal(cond).unwrap_or_else(|| {
        panic!("non-atomic condition at {} in a supposedly core program", stmt.span)
    })
}

fn build_stmt(nfa: &mut ExecNfa, stmt: &Stmt, ax: &AxiomSet) -> (StateId, StateId) {
    match &stmt.kind {
        StmtKind::Skip => {
            let s = nfa.fresh();
            (s, s)
        }
        StmtKind::Assign(x, e) => {
            let (a, b) = (nfa.fresh(), nfa.fresh());
            let letter = match e {
                Expr::V(y) => ExecLetter::Assign(*x, *y),
                Expr::App(f, args) => {
                    let zs: Vec<_> = args
                        .iter()
                        .map(|a| a.as_var().expect("core operands are variables"))
                        .collect();
                    ExecLetter::AssignFn(*x, *f, zs)
                }
            };
            nfa.letter(a, letter, b);
            (a, b)
        }
        StmtKind::Assume(c) => {
            let lit = guard(stmt, c);
            let (a, b) = (nfa.fresh(), nfa.fresh());
            for l in literal_letters(&lit, ax) {
                nfa.letter(a, l, b);
            }
            (a, b)
        }
        StmtKind::Seq(ss) => {
            let entry = nfa.fresh();
            let mut cur = entry;
            for s in ss {
                let (e, x) = build_stmt(nfa, s, ax);
                nfa.eps(cur, e);
                cur = x;
            }
            (entry, cur)
        }
        StmtKind::Choice(ss) => {
            let (entry, exit) = (nfa.fresh(), nfa.fresh());
            for s in ss {
                let (e, x) = build_stmt(nfa, s, ax);
                nfa.eps(entry, e);
                nfa.eps(x, exit);
            }
            (entry, exit)
        }
        StmtKind::If(c, then_s, else_s) => {
            let lit = guard(stmt, c);
            let (entry, exit) = (nfa.fresh(), nfa.fresh());
            let (te, tx) = build_stmt(nfa, then_s, ax);
            let else_s = else_s.as_ref().expect("core if has an else branch");
            let (ee, ex) = build_stmt(nfa, else_s, ax);
            for l in literal_letters(&lit, ax) {
                nfa.letter(entry, l, te);
            }
            for l in literal_letters(&lit.negated(), ax) {
                nfa.letter(entry, l, ee);
            }
            nfa.eps(tx, exit);
            nfa.eps(ex, exit);
            (entry, exit)
        }
        StmtKind::While(c, body) => {
            let lit = guard(stmt, c);
            let head = nfa.fresh();
            let exit = nfa.fresh();
            let (be, bx) = build_stmt(nfa, body, ax);
            for l in literal_letters(&lit, ax) {
                nfa.letter(head, l, be);
            }
            nfa.eps(bx, head);
            for l in literal_letters(&lit.negated(), ax) {
                nfa.letter(head, l, exit);
            }
            (head, exit)
        }
    }
}

/// The execution language of a desugared program as an ε-free automaton.
/// Negative assumes on STO relations are translated away during
/// construction, so no edge of the result carries one.
pub fn build_exec_nfa(p: &Program, ax: &AxiomSet) -> ExecNfa {
    let mut nfa = ExecNfa::default();
    let (entry, exit) = build_stmt(&mut nfa, &p.stmt, ax);
    nfa.initial = entry;
    nfa.accepting = [exit].into();
    nfa.eliminate_eps()
}

/// Negation-normal form of a postcondition, for compiling its violation.
enum Nnf {
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn nnf(formula: &PostFormula, negate: bool) -> Nnf {
    match formula {
        PostFormula::Lit(l) => {
            let mut l = l.clone();
            if negate {
                l.positive = !l.positive;
            }
            Nnf::Lit(l)
        }
        PostFormula::Or(a, b) => {
            let (na, nb) = (nnf(a, negate), nnf(b, negate));
            if negate {
                Nnf::And(vec![na, nb])
            } else {
                Nnf::Or(vec![na, nb])
            }
        }
        PostFormula::Not(a) => nnf(a, !negate),
    }
}

fn build_nnf(nfa: &mut ExecNfa, n: &Nnf, ax: &AxiomSet) -> (StateId, StateId) {
    match n {
        Nnf::Lit(lit) => {
            let (a, b) = (nfa.fresh(), nfa.fresh());
            for l in literal_letters(lit, ax) {
                nfa.letter(a, l, b);
            }
            (a, b)
        }
        Nnf::And(parts) => {
            let entry = nfa.fresh();
            let mut cur = entry;
            for p in parts {
                let (e, x) = build_nnf(nfa, p, ax);
                nfa.eps(cur, e);
                cur = x;
            }
            (entry, cur)
        }
        Nnf::Or(parts) => {
            let (entry, exit) = (nfa.fresh(), nfa.fresh());
            for p in parts {
                let (e, x) = build_nnf(nfa, p, ax);
                nfa.eps(entry, e);
                nfa.eps(x, exit);
            }
            (entry, exit)
        }
    }
}

/// Append the compiled violation of the postcondition: the result accepts
/// `Exec(s; assume(¬φ))`. The STO translation applies to negated atoms over
/// STO relations here as well.
pub fn append_post_violation(n: &ExecNfa, post: &PostCondition, ax: &AxiomSet) -> ExecNfa {
    let mut nfa = n.clone();
    let neg = nnf(&post.formula, true);
    let (entry, exit) = build_nnf(&mut nfa, &neg, ax);
    let old_accepting = std::mem::take(&mut nfa.accepting);
    for s in old_accepting {
        nfa.eps(s, entry);
    }
    nfa.accepting = [exit].into();
    nfa.eliminate_eps()
}

/// Image of the automaton under a letter-to-word map: each edge is replaced
/// by a fresh path spelling the image word. The first edge of the path keeps
/// the original edge's origin tag; inserted letters carry none.
pub fn apply_homomorphism(
    n: &ExecNfa,
    h: impl Fn(&ExecLetter) -> Vec<ExecLetter>,
) -> ExecNfa {
    let mut out = ExecNfa {
        num_states: n.num_states,
        initial: n.initial,
        accepting: n.accepting.clone(),
        edges: Vec::new(),
    };
    for e in &n.edges {
        let Some(label) = &e.label else {
            out.edges.push(e.clone());
            continue;
        };
        let word = h(label);
        assert!(!word.is_empty(), "homomorphism images must be nonempty");
        let mut cur = e.from;
        for (i, l) in word.iter().enumerate() {
            let next = if i + 1 == word.len() { e.to } else { out.fresh() };
            out.edges.push(NfaEdge {
                from: cur,
                label: Some(l.clone()),
                to: next,
                origin: if i == 0 { e.origin.clone() } else { None },
            });
            cur = next;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::axioms::{AxiomSet, RelProp};
    use crate::exec::letter::ExecLetter::{self, *};
    use crate::syntax::{parse_program, desugar, desugar_post};
    use crate::vocab::Vocab;

    /// Independent oracle for the execution language: the defining equations,
    /// computed by direct recursion with bounded length. Kept separate from
    /// the automaton construction on purpose.
    fn exec_lang(stmt: &Stmt, ax: &AxiomSet, maxlen: usize) -> BTreeSet<Vec<ExecLetter>> {
        fn lit_words(lit: &Literal, ax: &AxiomSet) -> BTreeSet<Vec<ExecLetter>> {
            literal_letters(lit, ax).into_iter().map(|l| vec![l]).collect()
        }
        fn concat(
            a: &BTreeSet<Vec<ExecLetter>>,
            b: &BTreeSet<Vec<ExecLetter>>,
            maxlen: usize,
        ) -> BTreeSet<Vec<ExecLetter>> {
            let mut out = BTreeSet::new();
            for wa in a {
                for wb in b {
                    if wa.len() + wb.len() <= maxlen {
                        let mut w = wa.clone();
                        w.extend(wb.iter().cloned());
                        out.insert(w);
                    }
                }
            }
            out
        }
        fn go(stmt: &Stmt, ax: &AxiomSet, maxlen: usize) -> BTreeSet<Vec<ExecLetter>> {
            match &stmt.kind {
                StmtKind::Skip => [vec![]].into(),
                StmtKind::Assign(x, e) => {
                    let letter = match e {
                        Expr::V(y) => Assign(*x, *y),
                        Expr::App(f, args) => AssignFn(
                            *x,
                            *f,
                            args.iter().map(|a| a.as_var().unwrap()).collect(),
                        ),
                    };
                    [vec![letter]].into()
                }
                StmtKind::Assume(c) => lit_words(&atomic_literal(c).unwrap(), ax),
                StmtKind::Seq(ss) => {
                    let mut acc: BTreeSet<Vec<ExecLetter>> = [vec![]].into();
                    for s in ss {
                        acc = concat(&acc, &go(s, ax, maxlen), maxlen);
                    }
                    acc
                }
                StmtKind::Choice(ss) => {
                    ss.iter().flat_map(|s| go(s, ax, maxlen)).collect()
                }
                StmtKind::If(c, t, e) => {
                    let lit = atomic_literal(c).unwrap();
                    let mut out = concat(&lit_words(&lit, ax), &go(t, ax, maxlen), maxlen);
                    out.extend(concat(
                        &lit_words(&lit.negated(), ax),
                        &go(e.as_ref().unwrap(), ax, maxlen),
                        maxlen,
                    ));
                    out
                }
                StmtKind::While(c, body) => {
                    let lit = atomic_literal(c).unwrap();
                    let enter = lit_words(&lit, ax);
                    let exit = lit_words(&lit.negated(), ax);
                    let body_lang = go(body, ax, maxlen);
                    let mut acc = exit.clone();
                    let mut unrolled: BTreeSet<Vec<ExecLetter>> = [vec![]].into();
                    loop {
                        unrolled = concat(&concat(&unrolled, &enter, maxlen), &body_lang, maxlen);
                        if unrolled.is_empty() {
                            break;
                        }
                        acc.extend(concat(&unrolled, &exit, maxlen));
                    }
                    acc
                }
            }
        }
        go(stmt, ax, maxlen).into_iter().filter(|w| w.len() <= maxlen).collect()
    }

    fn parse_core(src: &str) -> (Vocab, AxiomSet, Program) {
        let mut unit = parse_program(src).unwrap();
        let core = desugar(&unit.program, &mut unit.vocab);
        (unit.vocab, unit.axioms, core)
    }

    #[test]
    fn while_loop_language_matches_the_equation() {
        // while (x != y) skip accepts assume(x≠y)^n · assume(x=y).
        let (vb, ax, core) = parse_core("vars x, y; program { while (x != y) skip; }");
        let nfa = build_exec_nfa(&core, &ax);
        let (x, y) = (vb.var("x").unwrap(), vb.var("y").unwrap());
        for n in 0..4 {
            let mut w = vec![AssumeNeq(x, y); n];
            w.push(AssumeEq(x, y));
            assert!(nfa.accepts(&w));
        }
        assert!(!nfa.accepts(&[AssumeNeq(x, y)]));
        assert!(!nfa.accepts(&[AssumeEq(x, y), AssumeEq(x, y)]));
    }

    #[test]
    fn nfa_language_equals_direct_enumeration() {
        let (_, ax, core) = parse_core(
            "vars a, b, c; program { while (a != b) { if (a == c) then a := f(b); else b := a; } \
             assume(r(a, b) || a == b); }",
        );
        let nfa = build_exec_nfa(&core, &ax);
        let direct = exec_lang(&core.stmt, &ax, 8);
        let enumerated: BTreeSet<Vec<ExecLetter>> =
            nfa.enumerate_words(8).into_iter().collect();
        assert_eq!(direct, enumerated);
    }

    #[test]
    fn sto_negative_assumes_become_two_branches() {
        let (vb, ax, core) = parse_core(
            "axioms { relation lt: strict_total_order; } vars x, y; \
             program { assume(!lt(x, y)); }",
        );
        let nfa = build_exec_nfa(&core, &ax);
        let (x, y) = (vb.var("x").unwrap(), vb.var("y").unwrap());
        let lt = vb.rel("lt").unwrap();
        assert!(nfa.accepts(&[AssumeRel(lt, vec![y, x])]));
        assert!(nfa.accepts(&[AssumeEq(x, y)]));
        assert!(!nfa.accepts(&[AssumeNegRel(lt, vec![x, y])]));
        // No reachable edge carries a negative assume on the STO relation.
        for e in &nfa.edges {
            assert!(!matches!(e.label, Some(AssumeNegRel(r, _)) if ax.is_sto(r)));
        }
    }

    #[test]
    fn sto_translation_applies_to_branch_negations_too() {
        let (vb, ax, core) = parse_core(
            "axioms { relation lt: strict_total_order; } vars x, y, z; \
             program { if (lt(x, y)) then z := x; else z := y; }",
        );
        let nfa = build_exec_nfa(&core, &ax);
        let (x, y, z) = (vb.var("x").unwrap(), vb.var("y").unwrap(), vb.var("z").unwrap());
        let lt = vb.rel("lt").unwrap();
        assert!(nfa.accepts(&[AssumeRel(lt, vec![x, y]), Assign(z, x)]));
        assert!(nfa.accepts(&[AssumeRel(lt, vec![y, x]), Assign(z, y)]));
        assert!(nfa.accepts(&[AssumeEq(x, y), Assign(z, y)]));
    }

    #[test]
    fn post_violation_of_equality_is_a_single_disequality() {
        let (vb, ax, core) = parse_core("vars x, y; program { skip; } post: x == y;");
        let mut unit = parse_program("vars x, y; program { skip; } post: x == y;").unwrap();
        let post = desugar_post(unit.post.as_ref().unwrap());
        let _ = &mut unit;
        let nfa = build_exec_nfa(&core, &ax);
        let with_post = append_post_violation(&nfa, &post, &ax);
        let words = with_post.enumerate_words(3);
        let (x, y) = (vb.var("x").unwrap(), vb.var("y").unwrap());
        assert_eq!(words, vec![vec![AssumeNeq(x, y)]]);
    }

    #[test]
    fn post_violation_translates_sto_atoms() {
        let (vb, ax, core) = parse_core(
            "axioms { relation lt: strict_total_order; } vars x, y; program { skip; } \
             post: lt(x, y);",
        );
        let unit = parse_program(
            "axioms { relation lt: strict_total_order; } vars x, y; program { skip; } \
             post: lt(x, y);",
        )
        .unwrap();
        let post = desugar_post(unit.post.as_ref().unwrap());
        let nfa = build_exec_nfa(&core, &ax);
        let with_post = append_post_violation(&nfa, &post, &ax);
        let words: BTreeSet<_> = with_post.enumerate_words(3).into_iter().collect();
        let (x, y) = (vb.var("x").unwrap(), vb.var("y").unwrap());
        let lt = vb.rel("lt").unwrap();
        let expected: BTreeSet<_> =
            [vec![AssumeRel(lt, vec![y, x])], vec![AssumeEq(x, y)]].into();
        assert_eq!(words, expected);
    }

    #[test]
    fn implication_post_violation_ends_with_both_assumes() {
        let src = "consts T; vars sorted, found, exists; program { skip; } \
                   post: sorted == T => found == exists;";
        let (vb, ax, core) = parse_core(src);
        let unit = parse_program(src).unwrap();
        let post = desugar_post(unit.post.as_ref().unwrap());
        let nfa = build_exec_nfa(&core, &ax);
        let with_post = append_post_violation(&nfa, &post, &ax);
        let words = with_post.enumerate_words(4);
        let sorted = vb.var("sorted").unwrap();
        let t = vb.var("T").unwrap();
        let found = vb.var("found").unwrap();
        let exists = vb.var("exists").unwrap();
        assert_eq!(words, vec![vec![AssumeEq(sorted, t), AssumeNeq(found, exists)]]);
    }

    #[test]
    fn homomorphism_replaces_edges_by_paths() {
        let mut vb = Vocab::new();
        let x = vb.add_var("x", false);
        let y = vb.add_var("y", false);
        let f = vb.add_fun("f", 1);
        let r = vb.add_rel("R", 2);
        let mut nfa = ExecNfa::default();
        let (a, b) = (nfa.fresh(), nfa.fresh());
        nfa.letter(a, AssignFn(x, f, vec![y]), b);
        nfa.initial = a;
        nfa.accepting = [b].into();
        let image = apply_homomorphism(&nfa, |l| match l {
            AssignFn(x, _, _) => vec![l.clone(), AssumeRel(r, vec![*x, *x])],
            other => vec![other.clone()],
        });
        let words = image.enumerate_words(3);
        assert_eq!(
            words,
            vec![vec![AssignFn(x, f, vec![y]), AssumeRel(r, vec![x, x])]]
        );
        // The inserted letter carries no origin; the first keeps its letter.
        let origins: Vec<_> = image.edges.iter().map(|e| e.origin.clone()).collect();
        assert_eq!(origins.iter().filter(|o| o.is_some()).count(), 1);
    }

    #[test]
    fn empty_language_stays_empty_under_homomorphisms() {
        let mut nfa = ExecNfa::default();
        let a = nfa.fresh();
        nfa.initial = a;
        // No accepting states at all.
        let image = apply_homomorphism(&nfa, |l| vec![l.clone()]);
        assert!(image.enumerate_words(4).is_empty());
    }

    #[test]
    fn homomorphic_image_language_is_the_image_of_the_language() {
        let (vb, ax, core) = parse_core(
            "vars a, b; program { while (a != b) { a := f(a, b); } }",
        );
        let nfa = build_exec_nfa(&core, &ax);
        let r = {
            let mut vb2 = vb.clone();
            vb2.add_rel("Q", 2)
        };
        let h = |l: &ExecLetter| match l {
            AssignFn(x, _, _) => vec![l.clone(), AssumeRel(r, vec![*x, *x])],
            other => vec![other.clone()],
        };
        let image = apply_homomorphism(&nfa, h);
        let words: BTreeSet<_> = nfa.enumerate_words(5).into_iter().collect();
        let image_words: BTreeSet<_> = image.enumerate_words(10).into_iter().collect();
        let mapped: BTreeSet<_> = words
            .iter()
            .map(|w| w.iter().flat_map(h).collect::<Vec<_>>())
            .filter(|w| w.len() <= 10)
            .collect();
        // Every mapped word is accepted; every accepted image word of bounded
        // pre-image length is a mapped word.
        for w in &mapped {
            assert!(image_words.contains(w), "missing image word");
        }
        for w in image_words {
            if w.len() <= 7 {
                assert!(mapped.contains(&w), "spurious image word {w:?}");
            }
        }
    }

    #[test]
    fn dump_is_line_oriented_and_stable() {
        let (vb, ax, core) = parse_core("vars x, y; program { x := y; }");
        let nfa = build_exec_nfa(&core, &ax);
        let dump = nfa.dump(&vb);
        assert!(dump.contains("initial: 0"));
        assert!(dump.contains("-- x := y -->"));
    }
}
