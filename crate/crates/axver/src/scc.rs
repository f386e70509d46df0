//! The streaming congruence-closure automaton: finite-state abstraction of an
//! execution as a partition of the live variables, a disequality relation and
//! a partial function table over its classes, plus positive/negative
//! relational facts kept closed under transitivity and its two derived
//! negative rules.
//!
//! States are canonical by construction: classes are ordered by their
//! smallest member and all tables are ordered maps, so structural equality is
//! key equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::axioms::AxiomSet;
use crate::exec::letter::ExecLetter;
use crate::vocab::{Fun, Rel, Var, Vocab};

type ClassId = u32;

/// Partition of the variable set. Blocks are sorted internally and ordered by
/// their smallest member, so equal partitions are structurally equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Partition {
    class_of: Vec<ClassId>,
    classes: Vec<Vec<Var>>,
}

impl Partition {
    pub fn identity(nvars: usize) -> Self {
        Partition {
            class_of: (0..nvars as u32).collect(),
            classes: (0..nvars as u32).map(|i| vec![Var(i)]).collect(),
        }
    }

    pub fn class_of(&self, x: Var) -> ClassId {
        self.class_of[x.0 as usize]
    }

    pub fn members(&self, c: ClassId) -> &[Var] {
        &self.classes[c as usize]
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// True when the class holds nothing but the auxiliary variable, i.e. its
    /// term is outside the coherence window.
    fn is_ghost(&self, c: ClassId, vstar: Option<Var>) -> bool {
        match vstar {
            Some(v) => self.classes[c as usize] == [v],
            None => false,
        }
    }

    /// Canonicalize a list of blocks (each sorted, possibly tagged with the
    /// old class id they descend from). Returns the partition and the remap
    /// from old class ids to new ones; dead classes map to `None`.
    fn rebuild(
        nvars: usize,
        old_count: usize,
        blocks: Vec<(Option<ClassId>, Vec<Var>)>,
    ) -> (Partition, Vec<Option<ClassId>>, Option<ClassId>) {
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by_key(|&i| blocks[i].1[0]);
        let mut remap: Vec<Option<ClassId>> = vec![None; old_count];
        let mut fresh = None;
        let mut class_of = vec![0u32; nvars];
        let mut classes = Vec::with_capacity(blocks.len());
        for (new_id, &bi) in order.iter().enumerate() {
            let (src, members) = &blocks[bi];
            match src {
                Some(old) => remap[*old as usize] = Some(new_id as ClassId),
                None => fresh = Some(new_id as ClassId),
            }
            for &v in members {
                class_of[v.0 as usize] = new_id as ClassId;
            }
            classes.push(members.clone());
        }
        (Partition { class_of, classes }, remap, fresh)
    }
}

/// The congruence window shared by the feasibility and coherence automata:
/// the variable partition plus the partial function table over classes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Window {
    part: Partition,
    p: BTreeMap<(Fun, Vec<ClassId>), ClassId>,
}

enum MoveTarget {
    Class(ClassId),
    Fresh,
}

struct MoveOutcome {
    win: Window,
    remap: Vec<Option<ClassId>>,
    fresh: Option<ClassId>,
}

struct MergeOutcome {
    win: Window,
    /// Total remap: merging never kills a class.
    remap: Vec<ClassId>,
}

impl Window {
    fn identity(nvars: usize) -> Self {
        Window { part: Partition::identity(nvars), p: BTreeMap::new() }
    }

    fn remap_p(
        p: &BTreeMap<(Fun, Vec<ClassId>), ClassId>,
        remap: impl Fn(ClassId) -> Option<ClassId>,
    ) -> BTreeMap<(Fun, Vec<ClassId>), ClassId> {
        let mut out = BTreeMap::new();
        'entry: for ((f, tuple), res) in p {
            let mut t2 = Vec::with_capacity(tuple.len());
            for &c in tuple {
                match remap(c) {
                    Some(n) => t2.push(n),
                    None => continue 'entry,
                }
            }
            let Some(r2) = remap(*res) else { continue };
            let prev = out.insert((*f, t2), r2);
            debug_assert!(prev.is_none_or(|p| p == r2), "congruence collision in P");
        }
        out
    }

    /// Move `x` out of its class into `target`. Classes left empty die and
    /// every table entry touching them is dropped.
    fn move_var(&self, x: Var, target: MoveTarget) -> MoveOutcome {
        let nvars = self.part.class_of.len();
        let mut blocks: Vec<(Option<ClassId>, Vec<Var>)> = Vec::new();
        for (i, members) in self.part.classes.iter().enumerate() {
            let i = i as ClassId;
            let mut m: Vec<Var> = members.iter().copied().filter(|&v| v != x).collect();
            if let MoveTarget::Class(c) = target {
                if c == i {
                    m.push(x);
                    m.sort();
                }
            }
            if !m.is_empty() {
                blocks.push((Some(i), m));
            }
        }
        if let MoveTarget::Fresh = target {
            blocks.push((None, vec![x]));
        }
        let (part, remap, fresh) =
            Partition::rebuild(nvars, self.part.classes.len(), blocks);
        let p = Self::remap_p(&self.p, |c| remap[c as usize]);
        MoveOutcome { win: Window { part, p }, remap, fresh }
    }

    /// Merge the classes of `x` and `y` and run the local congruence closure:
    /// entries of the table applying one function to componentwise-equal
    /// tuples force their result classes together, to fixpoint.
    fn merge(&self, x: Var, y: Var) -> MergeOutcome {
        let nold = self.part.classes.len();
        let mut uf: Vec<ClassId> = (0..nold as u32).collect();
        fn find(uf: &mut Vec<ClassId>, mut i: ClassId) -> ClassId {
            while uf[i as usize] != i {
                let up = uf[uf[i as usize] as usize];
                uf[i as usize] = up;
                i = up;
            }
            i
        }
        fn union(uf: &mut Vec<ClassId>, a: ClassId, b: ClassId) -> bool {
            let (ra, rb) = (find(uf, a), find(uf, b));
            if ra == rb {
                return false;
            }
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            uf[hi as usize] = lo;
            true
        }
        union(&mut uf, self.part.class_of(x), self.part.class_of(y));
        loop {
            let mut sigs: BTreeMap<(Fun, Vec<ClassId>), ClassId> = BTreeMap::new();
            let mut changed = false;
            for ((f, tuple), res) in &self.p {
                let key: Vec<ClassId> = tuple.iter().map(|&c| find(&mut uf, c)).collect();
                let r = find(&mut uf, *res);
                if let Some(&r0) = sigs.get(&(*f, key.clone())) {
                    if r0 != r {
                        union(&mut uf, r0, r);
                        changed = true;
                    }
                } else {
                    sigs.insert((*f, key), r);
                }
            }
            if !changed {
                break;
            }
        }
        let mut grouped: BTreeMap<ClassId, Vec<Var>> = BTreeMap::new();
        for (i, members) in self.part.classes.iter().enumerate() {
            let root = find(&mut uf, i as ClassId);
            grouped.entry(root).or_default().extend(members.iter().copied());
        }
        let blocks: Vec<(Option<ClassId>, Vec<Var>)> = grouped
            .into_iter()
            .map(|(root, mut members)| {
                members.sort();
                (Some(root), members)
            })
            .collect();
        let (part, root_remap, _) =
            Partition::rebuild(self.part.class_of.len(), nold, blocks);
        let remap: Vec<ClassId> = (0..nold as u32)
            .map(|i| root_remap[find(&mut uf, i) as usize].expect("merge keeps classes"))
            .collect();
        let p = Self::remap_p(&self.p, |c| Some(remap[c as usize]));
        MergeOutcome { win: Window { part, p }, remap }
    }
}

/// The feasibility automaton state: either the absorbing reject state or the
/// live window with disequalities and relational facts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SccState {
    Reject,
    Live(SccCore),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SccCore {
    win: Window,
    d: BTreeSet<(ClassId, ClassId)>,
    rel_pos: BTreeMap<Rel, BTreeSet<Vec<ClassId>>>,
    rel_neg: BTreeMap<Rel, BTreeSet<Vec<ClassId>>>,
}

/// Identity partition, everything else empty.
pub fn initial_state(nvars: usize) -> SccState {
    SccState::Live(SccCore {
        win: Window::identity(nvars),
        d: BTreeSet::new(),
        rel_pos: BTreeMap::new(),
        rel_neg: BTreeMap::new(),
    })
}

pub fn is_feasible_state(q: &SccState) -> bool {
    !matches!(q, SccState::Reject)
}

fn norm_pair(a: ClassId, b: ClassId) -> (ClassId, ClassId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn remap_tuples(
    rels: &BTreeMap<Rel, BTreeSet<Vec<ClassId>>>,
    remap: impl Fn(ClassId) -> Option<ClassId>,
) -> BTreeMap<Rel, BTreeSet<Vec<ClassId>>> {
    let mut out: BTreeMap<Rel, BTreeSet<Vec<ClassId>>> = BTreeMap::new();
    for (r, tuples) in rels {
        let set = out.entry(*r).or_default();
        'tup: for tuple in tuples {
            let mut t2 = Vec::with_capacity(tuple.len());
            for &c in tuple {
                match remap(c) {
                    Some(n) => t2.push(n),
                    None => continue 'tup,
                }
            }
            set.insert(t2);
        }
    }
    out.retain(|_, s| !s.is_empty());
    out
}

/// Close `pos` transitively and `neg` under the two derived rules
/// R(a,b) ∧ ¬R(a,c) ⇒ ¬R(b,c) and R(b,c) ∧ ¬R(a,c) ⇒ ¬R(a,b), jointly to
/// fixpoint. Tuples are binary here; validation rejects transitivity on
/// other arities.
fn saturate_trans(pos: &mut BTreeSet<Vec<ClassId>>, neg: &mut BTreeSet<Vec<ClassId>>) {
    loop {
        let mut added = false;
        let cur_pos: Vec<(ClassId, ClassId)> =
            pos.iter().map(|t| (t[0], t[1])).collect();
        for &(a, b) in &cur_pos {
            for &(b2, c) in &cur_pos {
                if b == b2 {
                    added |= pos.insert(vec![a, c]);
                }
            }
        }
        let cur_pos: Vec<(ClassId, ClassId)> =
            pos.iter().map(|t| (t[0], t[1])).collect();
        let cur_neg: Vec<(ClassId, ClassId)> =
            neg.iter().map(|t| (t[0], t[1])).collect();
        for &(a, b) in &cur_pos {
            for &(a2, c) in &cur_neg {
                if a == a2 {
                    added |= neg.insert(vec![b, c]);
                }
                if b == c {
                    added |= neg.insert(vec![a2, a]);
                }
            }
        }
        if !added {
            break;
        }
    }
}

impl SccCore {
    fn rels_consistent(&self) -> bool {
        for (r, p) in &self.rel_pos {
            if let Some(n) = self.rel_neg.get(r) {
                if !p.is_disjoint(n) {
                    return false;
                }
            }
        }
        true
    }

    fn saturate(&mut self, ax: &AxiomSet, touched: Rel) {
        if ax.is_transitive(touched) {
            let pos = self.rel_pos.entry(touched).or_default();
            let neg = self.rel_neg.entry(touched).or_default();
            saturate_trans(pos, neg);
            if pos.is_empty() {
                self.rel_pos.remove(&touched);
            }
            if self.rel_neg.get(&touched).is_some_and(|s| s.is_empty()) {
                self.rel_neg.remove(&touched);
            }
        }
    }

    fn saturate_all(&mut self, ax: &AxiomSet) {
        let rels: Vec<Rel> =
            self.rel_pos.keys().chain(self.rel_neg.keys()).copied().collect();
        for r in rels {
            self.saturate(ax, r);
        }
    }

    fn apply_partial_remap(&mut self, remap: &[Option<ClassId>]) {
        self.d = self
            .d
            .iter()
            .filter_map(|&(a, b)| {
                let (a2, b2) = (remap[a as usize]?, remap[b as usize]?);
                Some(norm_pair(a2, b2))
            })
            .collect();
        self.rel_pos = remap_tuples(&self.rel_pos, |c| remap[c as usize]);
        self.rel_neg = remap_tuples(&self.rel_neg, |c| remap[c as usize]);
    }
}

/// One transition of the feasibility automaton. Reject is absorbing; every
/// contradiction (a disequality inside one class, or a relational tuple both
/// asserted and refuted after closure) leads to it.
pub fn step(q: &SccState, letter: &ExecLetter, ax: &AxiomSet) -> SccState {
    let SccState::Live(core) = q else { return SccState::Reject };
    match letter {
        ExecLetter::Assign(x, y) => {
            if core.win.part.class_of(*x) == core.win.part.class_of(*y) {
                return q.clone();
            }
            let target = core.win.part.class_of(*y);
            let mv = core.win.move_var(*x, MoveTarget::Class(target));
            let mut next = SccCore {
                win: mv.win,
                d: core.d.clone(),
                rel_pos: core.rel_pos.clone(),
                rel_neg: core.rel_neg.clone(),
            };
            next.apply_partial_remap(&mv.remap);
            SccState::Live(next)
        }
        ExecLetter::AssignFn(x, f, zs) => {
            let tuple: Vec<ClassId> =
                zs.iter().map(|z| core.win.part.class_of(*z)).collect();
            let defined = core.win.p.get(&(*f, tuple.clone())).copied();
            match defined {
                Some(res) => {
                    if core.win.part.class_of(*x) == res {
                        return q.clone();
                    }
                    let mv = core.win.move_var(*x, MoveTarget::Class(res));
                    let mut next = SccCore {
                        win: mv.win,
                        d: core.d.clone(),
                        rel_pos: core.rel_pos.clone(),
                        rel_neg: core.rel_neg.clone(),
                    };
                    next.apply_partial_remap(&mv.remap);
                    SccState::Live(next)
                }
                None => {
                    let mv = core.win.move_var(*x, MoveTarget::Fresh);
                    let fresh = mv.fresh.expect("fresh class exists");
                    let mut next = SccCore {
                        win: mv.win,
                        d: core.d.clone(),
                        rel_pos: core.rel_pos.clone(),
                        rel_neg: core.rel_neg.clone(),
                    };
                    next.apply_partial_remap(&mv.remap);
                    // Record the application when every argument class
                    // survived; an argument held only by x was dropped with
                    // the assignment and cannot be named any more.
                    let mut t2 = Vec::with_capacity(tuple.len());
                    let mut alive = true;
                    for &c in &tuple {
                        match mv.remap[c as usize] {
                            Some(n) => t2.push(n),
                            None => {
                                alive = false;
                                break;
                            }
                        }
                    }
                    if alive {
                        next.win.p.insert((*f, t2), fresh);
                    }
                    SccState::Live(next)
                }
            }
        }
        ExecLetter::AssumeEq(x, y) => {
            if core.win.part.class_of(*x) == core.win.part.class_of(*y) {
                return q.clone();
            }
            let mg = core.win.merge(*x, *y);
            let mut next = SccCore {
                win: mg.win,
                d: BTreeSet::new(),
                rel_pos: BTreeMap::new(),
                rel_neg: BTreeMap::new(),
            };
            for &(a, b) in &core.d {
                let (a2, b2) = (mg.remap[a as usize], mg.remap[b as usize]);
                if a2 == b2 {
                    return SccState::Reject;
                }
                next.d.insert(norm_pair(a2, b2));
            }
            next.rel_pos = remap_tuples(&core.rel_pos, |c| Some(mg.remap[c as usize]));
            next.rel_neg = remap_tuples(&core.rel_neg, |c| Some(mg.remap[c as usize]));
            next.saturate_all(ax);
            if !next.rels_consistent() {
                return SccState::Reject;
            }
            SccState::Live(next)
        }
        ExecLetter::AssumeNeq(x, y) => {
            let (cx, cy) = (core.win.part.class_of(*x), core.win.part.class_of(*y));
            if cx == cy {
                return SccState::Reject;
            }
            let mut next = core.clone();
            next.d.insert(norm_pair(cx, cy));
            SccState::Live(next)
        }
        ExecLetter::AssumeRel(r, zs) => {
            let tuple: Vec<ClassId> =
                zs.iter().map(|z| core.win.part.class_of(*z)).collect();
            let mut next = core.clone();
            next.rel_pos.entry(*r).or_default().insert(tuple);
            next.saturate(ax, *r);
            if !next.rels_consistent() {
                return SccState::Reject;
            }
            SccState::Live(next)
        }
        ExecLetter::AssumeNegRel(r, zs) => {
            let tuple: Vec<ClassId> =
                zs.iter().map(|z| core.win.part.class_of(*z)).collect();
            let mut next = core.clone();
            next.rel_neg.entry(*r).or_default().insert(tuple);
            next.saturate(ax, *r);
            if !next.rels_consistent() {
                return SccState::Reject;
            }
            SccState::Live(next)
        }
    }
}

/// Run the automaton over a whole word.
pub fn run(letters: &[ExecLetter], nvars: usize, ax: &AxiomSet) -> SccState {
    let mut q = initial_state(nvars);
    for l in letters {
        q = step(&q, l, ax);
    }
    q
}

/// Deterministic textual key for a state: classes named by their sorted
/// variable memberships, every table rendered in sorted order.
pub fn canonicalize(q: &SccState, vocab: &Vocab) -> String {
    let core = match q {
        SccState::Reject => return "⊥".to_string(),
        SccState::Live(c) => c,
    };
    let mut s = String::new();
    let class_name = |c: ClassId| -> String {
        let mut n = String::from("{");
        for (i, v) in core.win.part.members(c).iter().enumerate() {
            if i > 0 {
                n.push(',');
            }
            n.push_str(vocab.var_name(*v));
        }
        n.push('}');
        n
    };
    for c in 0..core.win.part.num_classes() as u32 {
        s.push_str(&class_name(c));
    }
    s.push_str(" d:");
    for (a, b) in &core.d {
        let _ = write!(s, "({},{})", class_name(*a), class_name(*b));
    }
    s.push_str(" P:");
    for ((f, tuple), res) in &core.win.p {
        let _ = write!(s, "{}(", vocab.fun_name(*f));
        for (i, c) in tuple.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&class_name(*c));
        }
        let _ = write!(s, ")={}", class_name(*res));
    }
    for (label, rels) in [("+", &core.rel_pos), ("-", &core.rel_neg)] {
        let _ = write!(s, " rel{label}:");
        for (r, tuples) in rels {
            for tuple in tuples {
                let _ = write!(s, "{}{}(", vocab.rel_name(*r), label);
                for (i, c) in tuple.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    s.push_str(&class_name(*c));
                }
                s.push(')');
            }
        }
    }
    s
}

/// Kind of coherence violation detected by the coherence automaton.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum CohViolation {
    Memoizing,
    EarlyAssume,
}

/// The coherence automaton state. It shares the window with the feasibility
/// automaton but keeps, per function, the set of argument tuples the function
/// has been applied to while all argument classes stayed live. There is no
/// reject state: coherence of an execution does not depend on feasibility,
/// so tracking continues past contradictions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CohState {
    win: Window,
    hist: BTreeMap<Fun, BTreeSet<Vec<ClassId>>>,
}

pub fn initial_coh_state(nvars: usize) -> CohState {
    CohState { win: Window::identity(nvars), hist: BTreeMap::new() }
}

fn remap_hist(
    hist: &BTreeMap<Fun, BTreeSet<Vec<ClassId>>>,
    remap: impl Fn(ClassId) -> Option<ClassId>,
) -> BTreeMap<Fun, BTreeSet<Vec<ClassId>>> {
    let mut out: BTreeMap<Fun, BTreeSet<Vec<ClassId>>> = BTreeMap::new();
    for (f, tuples) in hist {
        let set = out.entry(*f).or_default();
        'tup: for tuple in tuples {
            let mut t2 = Vec::with_capacity(tuple.len());
            for &c in tuple {
                match remap(c) {
                    Some(n) => t2.push(n),
                    None => continue 'tup,
                }
            }
            set.insert(t2);
        }
    }
    out.retain(|_, s| !s.is_empty());
    out
}

/// One transition of the coherence automaton.
///
/// `vstar` is the instrumentation auxiliary, when present. Classes holding
/// only `v*` lie outside the coherence window: a function-table result in
/// such a class does not discharge the memoizing obligation, because no
/// program variable holds the term.
pub fn coh_step(
    q: &CohState,
    letter: &ExecLetter,
    _ax: &AxiomSet,
    vstar: Option<Var>,
) -> (CohState, Option<CohViolation>) {
    match letter {
        ExecLetter::Assign(x, y) => {
            if q.win.part.class_of(*x) == q.win.part.class_of(*y) {
                return (q.clone(), None);
            }
            let target = q.win.part.class_of(*y);
            let mv = q.win.move_var(*x, MoveTarget::Class(target));
            let hist = remap_hist(&q.hist, |c| mv.remap[c as usize]);
            (CohState { win: mv.win, hist }, None)
        }
        ExecLetter::AssignFn(x, f, zs) => {
            let tuple: Vec<ClassId> = zs.iter().map(|z| q.win.part.class_of(*z)).collect();
            let defined = q.win.p.get(&(*f, tuple.clone())).copied();
            let violation = match defined {
                // A result held only by v* is a dropped term: recomputation.
                Some(res) if q.win.part.is_ghost(res, vstar) => Some(CohViolation::Memoizing),
                Some(_) => None,
                None => {
                    if q.hist.get(f).is_some_and(|s| s.contains(&tuple)) {
                        Some(CohViolation::Memoizing)
                    } else {
                        None
                    }
                }
            };
            let (win, remap, fresh) = match defined {
                Some(res) => {
                    if q.win.part.class_of(*x) == res {
                        let n = q.win.part.num_classes() as u32;
                        let mv_remap: Vec<Option<ClassId>> = (0..n).map(Some).collect();
                        (q.win.clone(), mv_remap, None)
                    } else {
                        let mv = q.win.move_var(*x, MoveTarget::Class(res));
                        (mv.win, mv.remap, None)
                    }
                }
                None => {
                    let mv = q.win.move_var(*x, MoveTarget::Fresh);
                    (mv.win, mv.remap, mv.fresh)
                }
            };
            let mut hist = remap_hist(&q.hist, |c| remap[c as usize]);
            let mut win = win;
            let mut t2 = Vec::with_capacity(tuple.len());
            let mut alive = true;
            for &c in &tuple {
                match remap[c as usize] {
                    Some(n) => t2.push(n),
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                if let Some(fresh) = fresh {
                    win.p.insert((*f, t2.clone()), fresh);
                }
                hist.entry(*f).or_default().insert(t2);
            }
            (CohState { win, hist }, violation)
        }
        ExecLetter::AssumeEq(x, y) => {
            if q.win.part.class_of(*x) == q.win.part.class_of(*y) {
                return (q.clone(), None);
            }
            let mg = q.win.merge(*x, *y);
            // Early-assume: two previously distinct applications of one
            // function become argument-wise equal. If either result is
            // dropped (absent from the table, or held only by v*), the new
            // equality involves a dropped term.
            let mut violation = None;
            'scan: for (f, tuples) in &q.hist {
                let mut by_image: BTreeMap<Vec<ClassId>, Vec<&Vec<ClassId>>> = BTreeMap::new();
                for tuple in tuples {
                    let img: Vec<ClassId> =
                        tuple.iter().map(|&c| mg.remap[c as usize]).collect();
                    by_image.entry(img).or_default().push(tuple);
                }
                for (_, group) in by_image {
                    if group.len() < 2 {
                        continue;
                    }
                    let all_held = group.iter().all(|tuple| {
                        q.win
                            .p
                            .get(&(*f, (*tuple).clone()))
                            .is_some_and(|&res| !q.win.part.is_ghost(res, vstar))
                    });
                    if !all_held {
                        violation = Some(CohViolation::EarlyAssume);
                        break 'scan;
                    }
                }
            }
            let hist = remap_hist(&q.hist, |c| Some(mg.remap[c as usize]));
            (CohState { win: mg.win, hist }, violation)
        }
        // Disequality and relational assumes entail no term equalities under
        // the supported axiom classes, so they carry no early obligation.
        ExecLetter::AssumeNeq(..)
        | ExecLetter::AssumeRel(..)
        | ExecLetter::AssumeNegRel(..) => (q.clone(), None),
    }
}

/// Run the coherence automaton, returning the position and kind of the first
/// violation.
pub fn coh_run(
    letters: &[ExecLetter],
    nvars: usize,
    ax: &AxiomSet,
    vstar: Option<Var>,
) -> Option<(usize, CohViolation)> {
    let mut q = initial_coh_state(nvars);
    let mut first = None;
    for (i, l) in letters.iter().enumerate() {
        let (next, v) = coh_step(&q, l, ax, vstar);
        if first.is_none() {
            if let Some(kind) = v {
                first = Some((i, kind));
            }
        }
        q = next;
    }
    first
}

/// Canonical key for a coherence state.
pub fn canonicalize_coh(q: &CohState, vocab: &Vocab) -> String {
    let mut s = String::new();
    let class_name = |c: ClassId| -> String {
        let mut n = String::from("{");
        for (i, v) in q.win.part.members(c).iter().enumerate() {
            if i > 0 {
                n.push(',');
            }
            n.push_str(vocab.var_name(*v));
        }
        n.push('}');
        n
    };
    for c in 0..q.win.part.num_classes() as u32 {
        s.push_str(&class_name(c));
    }
    s.push_str(" P:");
    for ((f, tuple), res) in &q.win.p {
        let _ = write!(s, "{}(", vocab.fun_name(*f));
        for (i, c) in tuple.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&class_name(*c));
        }
        let _ = write!(s, ")={}", class_name(*res));
    }
    s.push_str(" hist:");
    for (f, tuples) in &q.hist {
        for tuple in tuples {
            let _ = write!(s, "{}(", vocab.fun_name(*f));
            for (i, c) in tuple.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&class_name(*c));
            }
            s.push(')');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{AxiomSet, RelProp};
    use crate::exec::letter::ExecLetter::*;

    struct Fx {
        vb: Vocab,
        x: Var,
        y: Var,
        z: Var,
        f: Fun,
        r: Rel,
    }

    fn fx() -> Fx {
        let mut vb = Vocab::new();
        let x = vb.add_var("x", false);
        let y = vb.add_var("y", false);
        let z = vb.add_var("z", false);
        let f = vb.add_fun("f", 1);
        let r = vb.add_rel("R", 2);
        Fx { vb, x, y, z, f, r }
    }

    fn trans_r(fx: &Fx) -> AxiomSet {
        let mut ax = AxiomSet::new();
        ax.declare_rel(fx.r, RelProp::Trans);
        ax
    }

    #[test]
    fn initial_state_is_identity_partition() {
        let fx = fx();
        let q = initial_state(3);
        assert!(is_feasible_state(&q));
        assert_eq!(
            canonicalize(&q, &fx.vb),
            "{x}{y}{z} d: P: rel+: rel-:"
        );
    }

    #[test]
    fn self_disequality_rejects() {
        let fx = fx();
        let q = initial_state(3);
        let q = step(&q, &AssumeNeq(fx.x, fx.x), &AxiomSet::new());
        assert_eq!(q, SccState::Reject);
    }

    #[test]
    fn reject_is_absorbing() {
        let fx = fx();
        let ax = AxiomSet::new();
        let letters = [
            Assign(fx.x, fx.y),
            AssignFn(fx.z, fx.f, vec![fx.x]),
            AssumeEq(fx.x, fx.z),
            AssumeRel(fx.r, vec![fx.x, fx.y]),
        ];
        for l in &letters {
            assert_eq!(step(&SccState::Reject, l, &ax), SccState::Reject);
        }
    }

    #[test]
    fn transitive_positive_closure_accumulates() {
        let fx = fx();
        let ax = trans_r(&fx);
        let q = run(
            &[AssumeRel(fx.r, vec![fx.x, fx.y]), AssumeRel(fx.r, vec![fx.y, fx.z])],
            3,
            &ax,
        );
        let SccState::Live(core) = &q else { panic!("rejected") };
        let pos = core.rel_pos.get(&fx.r).unwrap();
        assert_eq!(pos.len(), 3, "x<y, y<z and the transitive x<z");
    }

    #[test]
    fn derived_negative_rule_one_rejects() {
        // R(x,y), ¬R(x,z) derive ¬R(y,z); assuming R(y,z) rejects.
        let fx = fx();
        let ax = trans_r(&fx);
        let q = run(
            &[
                AssumeRel(fx.r, vec![fx.x, fx.y]),
                AssumeNegRel(fx.r, vec![fx.x, fx.z]),
                AssumeRel(fx.r, vec![fx.y, fx.z]),
            ],
            3,
            &ax,
        );
        assert_eq!(q, SccState::Reject);
    }

    #[test]
    fn derived_negative_rule_two_rejects() {
        // R(y,z), ¬R(x,z) derive ¬R(x,y); assuming R(x,y) rejects.
        let fx = fx();
        let ax = trans_r(&fx);
        let q = run(
            &[
                AssumeRel(fx.r, vec![fx.y, fx.z]),
                AssumeNegRel(fx.r, vec![fx.x, fx.z]),
                AssumeRel(fx.r, vec![fx.x, fx.y]),
            ],
            3,
            &ax,
        );
        assert_eq!(q, SccState::Reject);
    }

    #[test]
    fn without_transitivity_no_derived_rejection() {
        let fx = fx();
        let ax = AxiomSet::new();
        let q = run(
            &[
                AssumeRel(fx.r, vec![fx.x, fx.y]),
                AssumeNegRel(fx.r, vec![fx.x, fx.z]),
                AssumeRel(fx.r, vec![fx.y, fx.z]),
            ],
            3,
            &ax,
        );
        assert!(is_feasible_state(&q));
    }

    #[test]
    fn congruence_closure_fires_on_merge() {
        // z := f(x) · x := y ... no: u := f(x), v := f(y), assume(x=y)
        // forces u ≡ v; a prior disequality u ≠ v then rejects.
        let fx = fx();
        let ax = AxiomSet::new();
        let mut vb = fx.vb.clone();
        let u = vb.add_var("u", false);
        let v = vb.add_var("v", false);
        let q = run(
            &[
                AssignFn(u, fx.f, vec![fx.x]),
                AssignFn(v, fx.f, vec![fx.y]),
                AssumeNeq(u, v),
                AssumeEq(fx.x, fx.y),
            ],
            5,
            &ax,
        );
        assert_eq!(q, SccState::Reject);
    }

    #[test]
    fn self_operand_assignment_keeps_tracking() {
        // assume(u=w) · u := f(u) · v := f(w) · assume(u ≠ v) is infeasible:
        // both applications read the same argument class, so u and v share a
        // class when the disequality arrives.
        let mut vb = Vocab::new();
        let u = vb.add_var("u", false);
        let v = vb.add_var("v", false);
        let w = vb.add_var("w", false);
        let f = vb.add_fun("f", 1);
        let ax = AxiomSet::new();
        let q = run(
            &[
                AssumeEq(u, w),
                AssignFn(u, f, vec![u]),
                AssignFn(v, f, vec![w]),
                AssumeNeq(u, v),
            ],
            3,
            &ax,
        );
        assert_eq!(q, SccState::Reject);
    }

    #[test]
    fn canonical_keys_identify_merge_orders() {
        let fx = fx();
        let ax = AxiomSet::new();
        let a = run(&[AssumeEq(fx.x, fx.y), AssumeEq(fx.y, fx.z)], 3, &ax);
        let b = run(&[AssumeEq(fx.y, fx.z), AssumeEq(fx.x, fx.y)], 3, &ax);
        assert_eq!(a, b);
        assert_eq!(canonicalize(&a, &fx.vb), canonicalize(&b, &fx.vb));
        let c = run(
            &[AssumeEq(fx.x, fx.y), AssumeEq(fx.y, fx.z), AssumeRel(fx.r, vec![fx.x, fx.x])],
            3,
            &ax,
        );
        assert_ne!(canonicalize(&a, &fx.vb), canonicalize(&c, &fx.vb));
    }

    #[test]
    fn coherence_flags_the_recomputation_of_a_dropped_term() {
        let mut vb = Vocab::new();
        let x = vb.add_var("x", false);
        let y = vb.add_var("y", false);
        let xp = vb.add_var("x'", false);
        let xq = vb.add_var("x''", false);
        let f = vb.add_fun("f", 1);
        let ax = AxiomSet::new();
        let letters = [
            AssignFn(xp, f, vec![x]),
            Assign(xp, y),
            AssignFn(xq, f, vec![x]),
        ];
        assert_eq!(coh_run(&letters, 4, &ax, None), Some((2, CohViolation::Memoizing)));
    }

    #[test]
    fn memoized_recomputation_is_fine() {
        let fx = fx();
        let ax = AxiomSet::new();
        let mut vb = fx.vb.clone();
        let u = vb.add_var("u", false);
        let letters = [
            AssignFn(fx.z, fx.f, vec![fx.x]),
            AssignFn(u, fx.f, vec![fx.x]),
        ];
        assert_eq!(coh_run(&letters, 5, &ax, None), None);
    }

    #[test]
    fn early_assume_on_dropped_superterms_is_flagged() {
        // u := f(x) · v := f(y) · u := z · v := z · assume(x = y): the merge
        // equates the two dropped applications.
        let mut vb = Vocab::new();
        let x = vb.add_var("x", false);
        let y = vb.add_var("y", false);
        let z = vb.add_var("z", false);
        let u = vb.add_var("u", false);
        let v = vb.add_var("v", false);
        let f = vb.add_fun("f", 1);
        let _ = (&vb, u, v);
        let ax = AxiomSet::new();
        let letters = [
            AssignFn(u, f, vec![x]),
            AssignFn(v, f, vec![y]),
            Assign(u, z),
            Assign(v, z),
            AssumeEq(x, y),
        ];
        assert_eq!(coh_run(&letters, 5, &ax, None), Some((4, CohViolation::EarlyAssume)));
        // Held superterms make the same assume early enough.
        let held = [
            AssignFn(u, f, vec![x]),
            AssignFn(v, f, vec![y]),
            AssumeEq(x, y),
        ];
        assert_eq!(coh_run(&held, 5, &ax, None), None);
    }

    #[test]
    fn ghost_classes_do_not_discharge_memoizing() {
        // With v* outside the window, a function-table result held only by
        // v* counts as dropped.
        let mut vb = Vocab::new();
        let x = vb.add_var("x", false);
        let y = vb.add_var("y", false);
        let z = vb.add_var("z", false);
        let f = vb.add_fun("f", 2);
        let vstar = vb.ensure_vstar();
        let ax = AxiomSet::new();
        // Image of z := f(x,y) · z := y · z := f(x,y) under the commutative
        // instrumentation, by hand.
        let letters = [
            AssignFn(z, f, vec![x, y]),
            AssignFn(vstar, f, vec![y, x]),
            AssumeEq(z, vstar),
            Assign(z, y),
            AssignFn(z, f, vec![x, y]),
        ];
        let verdict = coh_run(&letters, vb.num_vars(), &ax, Some(vstar));
        assert_eq!(verdict, Some((4, CohViolation::Memoizing)));
    }

    #[test]
    fn closure_is_idempotent_after_every_step() {
        let fx = fx();
        let ax = trans_r(&fx);
        let letters = [
            AssumeRel(fx.r, vec![fx.x, fx.y]),
            AssumeRel(fx.r, vec![fx.y, fx.z]),
            AssumeNegRel(fx.r, vec![fx.x, fx.z]),
        ];
        // The third letter contradicts the transitive closure.
        let mut q = initial_state(3);
        for (i, l) in letters.iter().enumerate() {
            q = step(&q, l, &ax);
            if let SccState::Live(core) = &q {
                let mut pos = core.rel_pos.get(&fx.r).cloned().unwrap_or_default();
                let mut neg = core.rel_neg.get(&fx.r).cloned().unwrap_or_default();
                let before = (pos.clone(), neg.clone());
                saturate_trans(&mut pos, &mut neg);
                assert_eq!((pos, neg), before, "not closed after letter {i}");
            }
        }
        assert_eq!(q, SccState::Reject);
    }
}
