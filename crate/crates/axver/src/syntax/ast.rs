//! Program syntax: the statement grammar, conditions, and postconditions.
//!
//! One statement type serves both the parsed and the desugared form. The
//! desugarer guarantees the core shape: every condition is a single literal,
//! every function argument and comparison operand is a variable, `if` always
//! has an else branch, and compound assumes have been compiled into `Choice`
//! branches of atomic assumes.

use crate::vocab::{Fun, Rel, Var};

#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    V(Var),
    App(Fun, Vec<Expr>),
}

impl Expr {
    pub fn as_var(&self) -> Option<Var> {
        match self {
            Expr::V(v) => Some(*v),
            Expr::App(..) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Cond {
    Eq(Expr, Expr),
    Rel(Rel, Vec<Expr>),
    Not(Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    And(Box<Cond>, Box<Cond>),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Stmt {
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StmtKind {
    Skip,
    /// `x := e`; a core program has `e` of the form `y` or `f(z⃗)` with the
    /// assigned variable not among the operands.
    Assign(Var, Expr),
    Assume(Cond),
    Seq(Vec<Stmt>),
    /// Nondeterministic branch. Produced by desugaring disjunctive assumes;
    /// not part of the surface grammar.
    Choice(Vec<Stmt>),
    If(Cond, Box<Stmt>, Option<Box<Stmt>>),
    While(Cond, Box<Stmt>),
}

impl Stmt {
    pub fn new(span: Span, kind: StmtKind) -> Self {
        Stmt { span, kind }
    }

    pub fn skip(span: Span) -> Self {
        Stmt { span, kind: StmtKind::Skip }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Program {
    pub stmt: Stmt,
}

/// An atomic condition over variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Atom {
    Eq(Var, Var),
    Rel(Rel, Vec<Var>),
}

/// A possibly negated atom: the condition shape of core programs.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn negated(&self) -> Literal {
        Literal { positive: !self.positive, atom: self.atom.clone() }
    }
}

/// View a core condition as a literal. Returns `None` on compound conditions
/// or non-variable operands.
pub fn atomic_literal(cond: &Cond) -> Option<Literal> {
    fn atom(cond: &Cond) -> Option<Atom> {
        match cond {
            Cond::Eq(a, b) => Some(Atom::Eq(a.as_var()?, b.as_var()?)),
            Cond::Rel(r, args) => {
                let vars: Option<Vec<Var>> = args.iter().map(Expr::as_var).collect();
                Some(Atom::Rel(*r, vars?))
            }
            _ => None,
        }
    }
    match cond {
        Cond::Not(inner) => Some(Literal { positive: false, atom: atom(inner)? }),
        other => Some(Literal { positive: true, atom: atom(other)? }),
    }
}

/// Postconditions: `x = y | R(z⃗) | φ ∨ φ | ¬φ` over program variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PostCondition {
    pub formula: PostFormula,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PostFormula {
    Lit(Literal),
    Or(Box<PostFormula>, Box<PostFormula>),
    Not(Box<PostFormula>),
}

/// True when every condition in the statement tree is a single (possibly
/// negated) atom over variables; the invariant desugaring establishes.
pub fn all_conditions_atomic(stmt: &Stmt) -> bool {
    match &stmt.kind {
        StmtKind::Skip => true,
        StmtKind::Assign(x, e) => match e {
            Expr::V(_) => true,
            Expr::App(_, args) => {
                args.iter().all(|a| a.as_var().is_some())
                    && args.iter().all(|a| a.as_var() != Some(*x))
            }
        },
        StmtKind::Assume(c) => atomic_literal(c).is_some(),
        StmtKind::Seq(ss) | StmtKind::Choice(ss) => ss.iter().all(all_conditions_atomic),
        StmtKind::If(c, t, e) => {
            atomic_literal(c).is_some()
                && all_conditions_atomic(t)
                && e.as_ref().is_some_and(|e| all_conditions_atomic(e))
        }
        StmtKind::While(c, b) => atomic_literal(c).is_some() && all_conditions_atomic(b),
    }
}
