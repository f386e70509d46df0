//! Lowering to the core form: atomic conditions, variable-only operands, an
//! else branch on every if, and disjunctive assumes compiled into
//! nondeterministic choice.
//!
//! Function applications inside conditions are hoisted into fresh
//! temporaries named `__t0, __t1, ...` in source order, deduplicated per
//! statement, so two parses of the same source produce identical core
//! programs. Loop guards re-evaluate their hoisted applications at the end
//! of each iteration. Assignments whose operand mentions the assigned
//! variable are routed through a temporary so instrumentation homomorphisms
//! always read pre-assignment operands.

use std::collections::HashMap;

use crate::syntax::ast::{
    Atom, Cond, Expr, Literal, PostCondition, PostFormula, Program, Span, Stmt, StmtKind,
};
use crate::vocab::{Var, Vocab, TEMP_PREFIX};

struct Ctx<'a> {
    vocab: &'a mut Vocab,
    counter: usize,
}

impl Ctx<'_> {
    fn fresh_temp(&mut self) -> Var {
        let name = format!("{}{}", TEMP_PREFIX, self.counter);
        self.counter += 1;
        self.vocab.add_var(&name, false)
    }
}

/// Hoisting environment for one statement site: identical application
/// expressions share a single temporary.
type Memo = HashMap<Expr, Var>;

fn flatten_expr(e: &Expr, ctx: &mut Ctx, hoists: &mut Vec<Stmt>, memo: &mut Memo, span: Span) -> Var {
    match e {
        Expr::V(v) => *v,
        Expr::App(f, args) => {
            if let Some(&t) = memo.get(e) {
                return t;
            }
            let flat: Vec<Var> = args
                .iter()
                .map(|a| flatten_expr(a, ctx, hoists, memo, span))
                .collect();
            let t = ctx.fresh_temp();
            hoists.push(Stmt::new(
                span,
                StmtKind::Assign(t, Expr::App(*f, flat.into_iter().map(Expr::V).collect())),
            ));
            memo.insert(e.clone(), t);
            t
        }
    }
}

fn flatten_cond(c: &Cond, ctx: &mut Ctx, hoists: &mut Vec<Stmt>, memo: &mut Memo, span: Span) -> Cond {
    match c {
        Cond::Eq(a, b) => {
            let va = flatten_expr(a, ctx, hoists, memo, span);
            let vb = flatten_expr(b, ctx, hoists, memo, span);
            Cond::Eq(Expr::V(va), Expr::V(vb))
        }
        Cond::Rel(r, args) => {
            let flat = args
                .iter()
                .map(|a| Expr::V(flatten_expr(a, ctx, hoists, memo, span)))
                .collect();
            Cond::Rel(*r, flat)
        }
        Cond::Not(inner) => Cond::Not(Box::new(flatten_cond(inner, ctx, hoists, memo, span))),
        Cond::Or(a, b) => Cond::Or(
            Box::new(flatten_cond(a, ctx, hoists, memo, span)),
            Box::new(flatten_cond(b, ctx, hoists, memo, span)),
        ),
        Cond::And(a, b) => Cond::And(
            Box::new(flatten_cond(a, ctx, hoists, memo, span)),
            Box::new(flatten_cond(b, ctx, hoists, memo, span)),
        ),
    }
}

enum Nnf {
    Lit(Literal),
    Or(Box<Nnf>, Box<Nnf>),
    And(Box<Nnf>, Box<Nnf>),
}

/// Negation normal form of a condition whose atoms are variable-only.
fn nnf(c: &Cond, neg: bool) -> Nnf {
    match c {
        Cond::Eq(a, b) => Nnf::Lit(Literal {
            positive: !neg,
            atom: Atom::Eq(a.as_var().unwrap(), b.as_var().unwrap()),
        }),
        Cond::Rel(r, args) => Nnf::Lit(Literal {
            positive: !neg,
            atom: Atom::Rel(*r, args.iter().map(|a| a.as_var().unwrap()).collect()),
        }),
        Cond::Not(inner) => nnf(inner, !neg),
        Cond::Or(a, b) => {
            let (na, nb) = (Box::new(nnf(a, neg)), Box::new(nnf(b, neg)));
            if neg {
                Nnf::And(na, nb)
            } else {
                Nnf::Or(na, nb)
            }
        }
        Cond::And(a, b) => {
            let (na, nb) = (Box::new(nnf(a, neg)), Box::new(nnf(b, neg)));
            if neg {
                Nnf::Or(na, nb)
            } else {
                Nnf::And(na, nb)
            }
        }
    }
}

fn dnf(n: &Nnf) -> Vec<Vec<Literal>> {
    match n {
        Nnf::Lit(l) => vec![vec![l.clone()]],
        Nnf::Or(a, b) => {
            let mut d = dnf(a);
            d.extend(dnf(b));
            d
        }
        Nnf::And(a, b) => {
            let (da, db) = (dnf(a), dnf(b));
            let mut out = Vec::with_capacity(da.len() * db.len());
            for ca in &da {
                for cb in &db {
                    let mut c = ca.clone();
                    c.extend(cb.iter().cloned());
                    out.push(c);
                }
            }
            out
        }
    }
}

fn lit_to_cond(l: &Literal) -> Cond {
    let atom = match &l.atom {
        Atom::Eq(x, y) => Cond::Eq(Expr::V(*x), Expr::V(*y)),
        Atom::Rel(r, args) => Cond::Rel(*r, args.iter().map(|v| Expr::V(*v)).collect()),
    };
    if l.positive {
        atom
    } else {
        Cond::Not(Box::new(atom))
    }
}

fn assume_of_literal(l: &Literal, span: Span) -> Stmt {
    Stmt::new(span, StmtKind::Assume(lit_to_cond(l)))
}

fn seq_or_single(mut stmts: Vec<Stmt>, span: Span) -> Stmt {
    match stmts.len() {
        0 => Stmt::skip(span),
        1 => stmts.pop().unwrap(),
        _ => Stmt::new(span, StmtKind::Seq(stmts)),
    }
}

/// Disjunctions in assumes become nondeterministic branches of atomic
/// assume sequences, keeping the alphabet exactly the assume letters.
fn compile_assume(n: &Nnf, span: Span) -> Stmt {
    let disjuncts = dnf(n);
    let mut branches: Vec<Stmt> = disjuncts
        .into_iter()
        .map(|conj| {
            seq_or_single(conj.iter().map(|l| assume_of_literal(l, span)).collect(), span)
        })
        .collect();
    if branches.len() == 1 {
        branches.pop().unwrap()
    } else {
        Stmt::new(span, StmtKind::Choice(branches))
    }
}

/// Boolean structure in branch conditions compiles to nested if-then-else.
fn compile_if(n: &Nnf, then_s: Stmt, else_s: Stmt, span: Span) -> Stmt {
    match n {
        Nnf::Lit(l) => Stmt::new(
            span,
            StmtKind::If(lit_to_cond(l), Box::new(then_s), Some(Box::new(else_s))),
        ),
        Nnf::Or(a, b) => {
            let inner = compile_if(b, then_s.clone(), else_s, span);
            compile_if(a, then_s, inner, span)
        }
        Nnf::And(a, b) => {
            let inner = compile_if(b, then_s, else_s.clone(), span);
            compile_if(a, inner, else_s, span)
        }
    }
}

fn desugar_stmt(stmt: &Stmt, ctx: &mut Ctx) -> Stmt {
    let span = stmt.span;
    match &stmt.kind {
        StmtKind::Skip => Stmt::skip(span),
        StmtKind::Assign(x, e) => match e {
            Expr::V(_) => stmt.clone(),
            Expr::App(f, args) => {
                let mut hoists = Vec::new();
                let mut memo = Memo::new();
                let flat: Vec<Var> = args
                    .iter()
                    .map(|a| flatten_expr(a, ctx, &mut hoists, &mut memo, span))
                    .collect();
                let app = Expr::App(*f, flat.iter().map(|v| Expr::V(*v)).collect());
                if flat.contains(x) {
                    let t = ctx.fresh_temp();
                    hoists.push(Stmt::new(span, StmtKind::Assign(t, app)));
                    hoists.push(Stmt::new(span, StmtKind::Assign(*x, Expr::V(t))));
                } else {
                    hoists.push(Stmt::new(span, StmtKind::Assign(*x, app)));
                }
                seq_or_single(hoists, span)
            }
        },
        StmtKind::Assume(c) => {
            let mut hoists = Vec::new();
            let mut memo = Memo::new();
            let flat = flatten_cond(c, ctx, &mut hoists, &mut memo, span);
            let assume = compile_assume(&nnf(&flat, false), span);
            if hoists.is_empty() {
                assume
            } else {
                hoists.push(assume);
                Stmt::new(span, StmtKind::Seq(hoists))
            }
        }
        StmtKind::Seq(ss) => Stmt::new(
            span,
            StmtKind::Seq(ss.iter().map(|s| desugar_stmt(s, ctx)).collect()),
        ),
        StmtKind::Choice(ss) => Stmt::new(
            span,
            StmtKind::Choice(ss.iter().map(|s| desugar_stmt(s, ctx)).collect()),
        ),
        StmtKind::If(c, then_s, else_s) => {
            let mut hoists = Vec::new();
            let mut memo = Memo::new();
            let flat = flatten_cond(c, ctx, &mut hoists, &mut memo, span);
            let then_d = desugar_stmt(then_s, ctx);
            let else_d = match else_s {
                Some(e) => desugar_stmt(e, ctx),
                None => Stmt::skip(span),
            };
            let if_stmt = compile_if(&nnf(&flat, false), then_d, else_d, span);
            if hoists.is_empty() {
                if_stmt
            } else {
                hoists.push(if_stmt);
                Stmt::new(span, StmtKind::Seq(hoists))
            }
        }
        StmtKind::While(c, body) => {
            let mut hoists = Vec::new();
            let mut memo = Memo::new();
            let flat = flatten_cond(c, ctx, &mut hoists, &mut memo, span);
            let lit = match nnf(&flat, false) {
                Nnf::Lit(l) => l,
                // The parser rejects compound loop guards.
                _ => unreachable!("compound while guard survived parsing"),
            };
            let body_d = desugar_stmt(body, ctx);
            let body_full = if hoists.is_empty() {
                body_d
            } else {
                // Guard temporaries are recomputed before each re-test.
                let mut ss = vec![body_d];
                ss.extend(hoists.iter().cloned());
                Stmt::new(span, StmtKind::Seq(ss))
            };
            let w = Stmt::new(
                span,
                StmtKind::While(lit_to_cond(&lit), Box::new(body_full)),
            );
            if hoists.is_empty() {
                w
            } else {
                hoists.push(w);
                Stmt::new(span, StmtKind::Seq(hoists))
            }
        }
    }
}

/// Lower a parsed program to core form. Fresh temporaries are appended to
/// the vocabulary deterministically; running the pass again is a no-op.
pub fn desugar(program: &Program, vocab: &mut Vocab) -> Program {
    let mut ctx = Ctx { vocab, counter: 0 };
    Program { stmt: desugar_stmt(&program.stmt, &mut ctx) }
}

/// Lower a parsed postcondition (atoms already variable-only) into the
/// assertion language: conjunction is expressed through negation and
/// disjunction.
pub fn desugar_post(c: &Cond) -> PostCondition {
    fn go(c: &Cond) -> PostFormula {
        match c {
            Cond::Eq(a, b) => PostFormula::Lit(Literal {
                positive: true,
                atom: Atom::Eq(a.as_var().unwrap(), b.as_var().unwrap()),
            }),
            Cond::Rel(r, args) => PostFormula::Lit(Literal {
                positive: true,
                atom: Atom::Rel(*r, args.iter().map(|a| a.as_var().unwrap()).collect()),
            }),
            Cond::Not(inner) => PostFormula::Not(Box::new(go(inner))),
            Cond::Or(a, b) => PostFormula::Or(Box::new(go(a)), Box::new(go(b))),
            Cond::And(a, b) => PostFormula::Not(Box::new(PostFormula::Or(
                Box::new(PostFormula::Not(Box::new(go(a)))),
                Box::new(PostFormula::Not(Box::new(go(b)))),
            ))),
        }
    }
    PostCondition { formula: go(c) }
}
