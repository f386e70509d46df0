//! Recursive descent parser for program and trace files.
//!
//! A file consists of optional `axioms { ... }`, `consts ...;` and
//! `vars ...;` headers followed by either `program { ... }` with an optional
//! `post: ...;`, or `trace { ... }` holding one alphabet letter per line.
//!
//! Variables must be declared in programs and are inferred in traces.
//! Function and relation symbols are inferred from use; arities must stay
//! consistent. The token `<` doubles as a relation name so the ordered
//! examples read naturally, and `a <= b` is shorthand for `a < b || a == b`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::axioms::{AxiomSet, FnProp, RejectedDecl, RelProp};
use crate::exec::letter::{ExecLetter, Execution};
use crate::syntax::ast::{Cond, Expr, Program, Span, Stmt, StmtKind};
use crate::syntax::lexer::{lex, LexError, Tok};
use crate::vocab::{Fun, Rel, Var, Vocab, TEMP_PREFIX};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("unexpected token at {span}: expected {expected}, found {found}")]
    Unexpected { expected: String, found: String, span: Span },
    #[error("unknown variable `{name}` at {span}; declare it under vars or consts")]
    UnknownVariable { name: String, span: Span },
    #[error("`{name}` used as a {used_as} at {span}, but it is a {declared_as}")]
    SymbolKind { name: String, used_as: String, declared_as: String, span: Span },
    #[error("arity mismatch for `{name}` at {span}: declared with {expected}, used with {found}")]
    Arity { name: String, expected: usize, found: usize, span: Span },
    #[error("`{name}` at {span} is reserved")]
    ReservedName { name: String, span: Span },
    #[error("cannot assign to constant `{name}` at {span}")]
    AssignToConst { name: String, span: Span },
    #[error("duplicate declaration of `{name}` at {span}")]
    Duplicate { name: String, span: Span },
    #[error(
        "compound while guard at {span}: loop conditions must be a single possibly negated \
         atom; rewrite the loop with nested ifs"
    )]
    CompoundWhileGuard { span: Span },
    #[error("unknown axiom property `{name}` at {span}")]
    UnknownProperty { name: String, span: Span },
    #[error("postcondition at {span} is outside the assertion language: {reason}")]
    PostOutsideL { reason: String, span: Span },
    #[error("nullary symbol `{name}` at {span}: functions and relations take arguments")]
    Nullary { name: String, span: Span },
}

#[derive(Clone, Debug)]
pub struct ParsedUnit {
    pub vocab: Vocab,
    pub axioms: AxiomSet,
    pub program: Program,
    pub post: Option<Cond>,
}

#[derive(Clone, Debug)]
pub struct ParsedTrace {
    pub vocab: Vocab,
    pub axioms: AxiomSet,
    pub exec: Execution,
}

#[derive(Clone, Debug)]
pub enum ParsedFile {
    Program(ParsedUnit),
    Trace(ParsedTrace),
}

const KEYWORDS: &[&str] = &[
    "skip", "assume", "if", "then", "else", "while", "vars", "consts", "program", "post",
    "axioms", "relation", "function", "axiom", "trace",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum PropKw {
    Rel(RelProp),
    Fn(FnProp),
    Assoc,
    AntiSym,
    Spo,
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    vocab: Vocab,
    /// Properties recorded by name until the symbol's arity is known.
    rel_decls: BTreeMap<String, Vec<RelProp>>,
    fn_decls: BTreeMap<String, Vec<FnProp>>,
    rejected: Vec<RejectedDecl>,
    /// In traces, variables are created on first use.
    infer_vars: bool,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(source)?,
            pos: 0,
            vocab: Vocab::new(),
            rel_decls: BTreeMap::new(),
            fn_decls: BTreeMap::new(),
            rejected: Vec::new(),
            infer_vars: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        let (t, span) = self.next();
        if t == tok {
            Ok(span)
        } else {
            Err(ParseError::Unexpected {
                expected: format!("{tok}"),
                found: format!("{t}"),
                span,
            })
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(i) if i == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, ParseError> {
        let (t, span) = self.next();
        match t {
            Tok::Ident(ref i) if i == kw => Ok(span),
            other => Err(ParseError::Unexpected {
                expected: format!("`{kw}`"),
                found: format!("{other}"),
                span,
            }),
        }
    }

    /// An identifier, or `<` in positions that accept relation names.
    fn name(&mut self, allow_lt: bool) -> Result<(String, Span), ParseError> {
        let (t, span) = self.next();
        match t {
            Tok::Ident(i) => Ok((i, span)),
            Tok::Lt if allow_lt => Ok(("<".to_string(), span)),
            other => Err(ParseError::Unexpected {
                expected: "a name".to_string(),
                found: format!("{other}"),
                span,
            }),
        }
    }

    fn check_fresh_name(&self, name: &str, span: Span) -> Result<(), ParseError> {
        // Temporaries are reserved in programs so desugaring cannot collide;
        // trace files may mention them freely.
        if KEYWORDS.contains(&name) || (!self.infer_vars && name.starts_with(TEMP_PREFIX)) {
            return Err(ParseError::ReservedName { name: name.to_string(), span });
        }
        Ok(())
    }

    fn resolve_var(&mut self, name: &str, span: Span) -> Result<Var, ParseError> {
        if self.vocab.fun(name).is_some() || self.fn_decls.contains_key(name) {
            return Err(ParseError::SymbolKind {
                name: name.to_string(),
                used_as: "variable".to_string(),
                declared_as: "function".to_string(),
                span,
            });
        }
        if self.vocab.rel(name).is_some() || self.rel_decls.contains_key(name) {
            return Err(ParseError::SymbolKind {
                name: name.to_string(),
                used_as: "variable".to_string(),
                declared_as: "relation".to_string(),
                span,
            });
        }
        match self.vocab.var(name) {
            Some(v) => Ok(v),
            None if self.infer_vars => {
                self.check_fresh_name(name, span)?;
                Ok(self.vocab.add_var(name, false))
            }
            None => Err(ParseError::UnknownVariable { name: name.to_string(), span }),
        }
    }

    fn resolve_fun(&mut self, name: &str, arity: usize, span: Span) -> Result<Fun, ParseError> {
        if arity == 0 {
            return Err(ParseError::Nullary { name: name.to_string(), span });
        }
        if self.vocab.var(name).is_some() {
            return Err(ParseError::SymbolKind {
                name: name.to_string(),
                used_as: "function".to_string(),
                declared_as: "variable".to_string(),
                span,
            });
        }
        if self.vocab.rel(name).is_some() || self.rel_decls.contains_key(name) {
            return Err(ParseError::SymbolKind {
                name: name.to_string(),
                used_as: "function".to_string(),
                declared_as: "relation".to_string(),
                span,
            });
        }
        if let Some(f) = self.vocab.fun(name) {
            let declared = self.vocab.fun_arity(f);
            if declared != arity {
                return Err(ParseError::Arity {
                    name: name.to_string(),
                    expected: declared,
                    found: arity,
                    span,
                });
            }
            return Ok(f);
        }
        self.check_fresh_name(name, span)?;
        Ok(self.vocab.add_fun(name, arity))
    }

    fn resolve_rel(&mut self, name: &str, arity: usize, span: Span) -> Result<Rel, ParseError> {
        if arity == 0 {
            return Err(ParseError::Nullary { name: name.to_string(), span });
        }
        if self.vocab.var(name).is_some() {
            return Err(ParseError::SymbolKind {
                name: name.to_string(),
                used_as: "relation".to_string(),
                declared_as: "variable".to_string(),
                span,
            });
        }
        if self.vocab.fun(name).is_some() || self.fn_decls.contains_key(name) {
            return Err(ParseError::SymbolKind {
                name: name.to_string(),
                used_as: "relation".to_string(),
                declared_as: "function".to_string(),
                span,
            });
        }
        if let Some(r) = self.vocab.rel(name) {
            let declared = self.vocab.rel_arity(r);
            if declared != arity {
                return Err(ParseError::Arity {
                    name: name.to_string(),
                    expected: declared,
                    found: arity,
                    span,
                });
            }
            return Ok(r);
        }
        if name != "<" {
            self.check_fresh_name(name, span)?;
        }
        Ok(self.vocab.add_rel(name, arity))
    }

    // ----- headers -----

    fn parse_headers(&mut self) -> Result<(), ParseError> {
        loop {
            if self.is_kw("axioms") {
                self.next();
                self.expect(Tok::LBrace)?;
                while !self.eat(&Tok::RBrace) {
                    self.parse_axiom_decl()?;
                }
            } else if self.is_kw("vars") {
                self.next();
                self.parse_var_list(false)?;
            } else if self.is_kw("consts") {
                self.next();
                self.parse_var_list(true)?;
            } else {
                return Ok(());
            }
        }
    }

    fn parse_var_list(&mut self, read_only: bool) -> Result<(), ParseError> {
        loop {
            let (name, span) = self.name(false)?;
            self.check_fresh_name(&name, span)?;
            if self.vocab.var(&name).is_some() {
                return Err(ParseError::Duplicate { name, span });
            }
            self.vocab.add_var(&name, read_only);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        Ok(())
    }

    fn prop_keyword(&self, name: &str, span: Span) -> Result<PropKw, ParseError> {
        Ok(match name {
            "reflexive" => PropKw::Rel(RelProp::Refl),
            "irreflexive" => PropKw::Rel(RelProp::Irref),
            "symmetric" => PropKw::Rel(RelProp::Symm),
            "transitive" => PropKw::Rel(RelProp::Trans),
            "strict_total_order" => PropKw::Rel(RelProp::Sto),
            "strict_partial_order" => PropKw::Spo,
            "commutative" => PropKw::Fn(FnProp::Comm),
            "idempotent" => PropKw::Fn(FnProp::Idem),
            "associative" => PropKw::Assoc,
            "antisymmetric" => PropKw::AntiSym,
            other => {
                return Err(ParseError::UnknownProperty { name: other.to_string(), span })
            }
        })
    }

    fn parse_axiom_decl(&mut self) -> Result<(), ParseError> {
        if self.is_kw("relation") {
            self.next();
            let (name, span) = self.name(true)?;
            if name != "<" {
                self.check_fresh_name(&name, span)?;
            }
            let mut props = Vec::new();
            if self.eat(&Tok::Colon) {
                loop {
                    let (p, pspan) = self.name(false)?;
                    match self.prop_keyword(&p, pspan)? {
                        PropKw::Rel(rp) => props.push(rp),
                        PropKw::Spo => {
                            props.push(RelProp::Irref);
                            props.push(RelProp::Trans);
                        }
                        PropKw::AntiSym => {
                            self.rejected.push(RejectedDecl::AntiSym(name.clone()));
                        }
                        PropKw::Fn(_) | PropKw::Assoc => {
                            return Err(ParseError::UnknownProperty { name: p, span: pspan })
                        }
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::Semi)?;
            self.rel_decls.entry(name).or_default().extend(props);
        } else if self.is_kw("function") {
            self.next();
            let (name, span) = self.name(false)?;
            self.check_fresh_name(&name, span)?;
            let mut props = Vec::new();
            if self.eat(&Tok::Colon) {
                loop {
                    let (p, pspan) = self.name(false)?;
                    match self.prop_keyword(&p, pspan)? {
                        PropKw::Fn(fp) => props.push(fp),
                        PropKw::Assoc => {
                            self.rejected.push(RejectedDecl::Assoc(name.clone()));
                        }
                        PropKw::Rel(_) | PropKw::Spo | PropKw::AntiSym => {
                            return Err(ParseError::UnknownProperty { name: p, span: pspan })
                        }
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::Semi)?;
            self.fn_decls.entry(name).or_default().extend(props);
        } else if self.is_kw("axiom") {
            // Free-form quantified sentence: consumed for the diagnostic and
            // rejected by validation as general EPR.
            self.next();
            let mut text = String::new();
            while self.peek() != &Tok::Semi && self.peek() != &Tok::Eof {
                let (t, _) = self.next();
                if !text.is_empty() {
                    text.push(' ');
                }
                match t {
                    Tok::Ident(i) => text.push_str(&i),
                    other => text.push_str(format!("{other}").trim_matches('`')),
                }
            }
            self.expect(Tok::Semi)?;
            self.rejected.push(RejectedDecl::Epr(text));
        } else {
            let (t, span) = self.next();
            return Err(ParseError::Unexpected {
                expected: "`relation`, `function` or `axiom`".to_string(),
                found: format!("{t}"),
                span,
            });
        }
        Ok(())
    }

    /// Resolve declared-by-name properties into the axiom set, defaulting
    /// arities for declared but unused symbols.
    fn finish_axioms(&mut self) -> AxiomSet {
        let mut ax = AxiomSet::new();
        let rel_decls = std::mem::take(&mut self.rel_decls);
        for (name, props) in rel_decls {
            let r = match self.vocab.rel(&name) {
                Some(r) => r,
                None => self.vocab.add_rel(&name, 2),
            };
            for p in props {
                ax.declare_rel(r, p);
            }
        }
        let fn_decls = std::mem::take(&mut self.fn_decls);
        for (name, props) in fn_decls {
            let default_arity = if props.contains(&FnProp::Idem) { 1 } else { 2 };
            let f = match self.vocab.fun(&name) {
                Some(f) => f,
                None => self.vocab.add_fun(&name, default_arity),
            };
            for p in props {
                ax.declare_fun(f, p);
            }
        }
        for rej in std::mem::take(&mut self.rejected) {
            ax.reject(rej);
        }
        ax
    }

    // ----- expressions and conditions -----

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let (name, span) = self.name(false)?;
        if self.eat(&Tok::LParen) {
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    args.push(self.parse_expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
            let f = self.resolve_fun(&name, args.len(), span)?;
            Ok(Expr::App(f, args))
        } else {
            Ok(Expr::V(self.resolve_var(&name, span)?))
        }
    }

    fn parse_cond(&mut self) -> Result<Cond, ParseError> {
        let lhs = self.parse_cond_or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.parse_cond()?;
            Ok(Cond::Or(Box::new(Cond::Not(Box::new(lhs))), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_cond_or(&mut self) -> Result<Cond, ParseError> {
        let mut lhs = self.parse_cond_and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.parse_cond_and()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_cond_and(&mut self) -> Result<Cond, ParseError> {
        let mut lhs = self.parse_cond_unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.parse_cond_unary()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_cond_unary(&mut self) -> Result<Cond, ParseError> {
        if self.eat(&Tok::Bang) {
            let inner = self.parse_cond_unary()?;
            return Ok(Cond::Not(Box::new(inner)));
        }
        if self.peek() == &Tok::LParen {
            self.next();
            let inner = self.parse_cond()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        self.parse_cond_atom()
    }

    /// `expr (==|!=|<|<=) expr`, or a relation atom `R(args)`.
    fn parse_cond_atom(&mut self) -> Result<Cond, ParseError> {
        let (name, span) = self.name(false)?;
        let mut args: Option<Vec<Expr>> = None;
        if self.eat(&Tok::LParen) {
            let mut a = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    a.push(self.parse_expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
            args = Some(a);
        }
        let cmp = match self.peek() {
            Tok::Eq => Some(Tok::Eq),
            Tok::Ne => Some(Tok::Ne),
            Tok::Lt => Some(Tok::Lt),
            Tok::Le => Some(Tok::Le),
            _ => None,
        };
        match cmp {
            Some(op) => {
                self.next();
                let lhs = match args {
                    Some(a) => Expr::App(self.resolve_fun(&name, a.len(), span)?, a),
                    None => Expr::V(self.resolve_var(&name, span)?),
                };
                let rhs = self.parse_expr()?;
                self.build_cmp(op, lhs, rhs, span)
            }
            None => match args {
                Some(a) => {
                    let r = self.resolve_rel(&name, a.len(), span)?;
                    Ok(Cond::Rel(r, a))
                }
                None => Err(ParseError::Unexpected {
                    expected: "a comparison or relation atom".to_string(),
                    found: format!("{}", self.peek()),
                    span: self.span(),
                }),
            },
        }
    }

    fn build_cmp(&mut self, op: Tok, lhs: Expr, rhs: Expr, span: Span) -> Result<Cond, ParseError> {
        match op {
            Tok::Eq => Ok(Cond::Eq(lhs, rhs)),
            Tok::Ne => Ok(Cond::Not(Box::new(Cond::Eq(lhs, rhs)))),
            Tok::Lt => {
                let r = self.resolve_rel("<", 2, span)?;
                Ok(Cond::Rel(r, vec![lhs, rhs]))
            }
            Tok::Le => {
                // a <= b is shorthand for a < b || a = b.
                let r = self.resolve_rel("<", 2, span)?;
                Ok(Cond::Or(
                    Box::new(Cond::Rel(r, vec![lhs.clone(), rhs.clone()])),
                    Box::new(Cond::Eq(lhs, rhs)),
                ))
            }
            _ => unreachable!(),
        }
    }

    // ----- statements -----

    fn parse_block(&mut self) -> Result<Stmt, ParseError> {
        let span = self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            stmts.push(self.parse_stmt()?);
        }
        Ok(Stmt::new(span, StmtKind::Seq(stmts)))
    }

    fn parse_stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        if self.peek() == &Tok::LBrace {
            return self.parse_block();
        }
        if self.is_kw("skip") {
            self.next();
            self.expect(Tok::Semi)?;
            return Ok(Stmt::skip(span));
        }
        if self.is_kw("assume") {
            self.next();
            self.expect(Tok::LParen)?;
            let cond = self.parse_cond()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Semi)?;
            return Ok(Stmt::new(span, StmtKind::Assume(cond)));
        }
        if self.is_kw("if") {
            self.next();
            self.expect(Tok::LParen)?;
            let cond = self.parse_cond()?;
            self.expect(Tok::RParen)?;
            self.expect_kw("then")?;
            let then_s = Box::new(self.parse_stmt()?);
            let else_s = if self.is_kw("else") {
                self.next();
                Some(Box::new(self.parse_stmt()?))
            } else {
                None
            };
            return Ok(Stmt::new(span, StmtKind::If(cond, then_s, else_s)));
        }
        if self.is_kw("while") {
            self.next();
            self.expect(Tok::LParen)?;
            let gspan = self.span();
            let cond = self.parse_cond()?;
            self.expect(Tok::RParen)?;
            if !simple_guard(&cond) {
                return Err(ParseError::CompoundWhileGuard { span: gspan });
            }
            let body = Box::new(self.parse_stmt()?);
            return Ok(Stmt::new(span, StmtKind::While(cond, body)));
        }
        // Assignment.
        let (name, nspan) = self.name(false)?;
        let lhs = self.resolve_var(&name, nspan)?;
        if self.vocab.is_read_only(lhs) {
            return Err(ParseError::AssignToConst { name, span: nspan });
        }
        self.expect(Tok::Walrus)?;
        let rhs = self.parse_expr()?;
        self.expect(Tok::Semi)?;
        Ok(Stmt::new(span, StmtKind::Assign(lhs, rhs)))
    }

    fn parse_post(&mut self) -> Result<Option<Cond>, ParseError> {
        if !self.is_kw("post") {
            return Ok(None);
        }
        self.next();
        self.expect(Tok::Colon)?;
        let span = self.span();
        let cond = self.parse_cond()?;
        self.eat(&Tok::Semi);
        check_post_in_l(&cond, span)?;
        Ok(Some(cond))
    }

    // ----- traces -----

    fn parse_trace_letters(&mut self) -> Result<Execution, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut letters = Vec::new();
        while !self.eat(&Tok::RBrace) {
            letters.push(self.parse_letter()?);
            self.eat(&Tok::Semi);
        }
        Ok(Execution::new(letters))
    }

    fn parse_letter(&mut self) -> Result<ExecLetter, ParseError> {
        if self.is_kw("assume") {
            self.next();
            self.expect(Tok::LParen)?;
            let negated = self.eat(&Tok::Bang);
            let parenthesized = negated && self.eat(&Tok::LParen);
            let (name, span) = self.name(true)?;
            let letter = if self.peek() == &Tok::LParen {
                self.next();
                let mut args = Vec::new();
                loop {
                    let (an, aspan) = self.name(false)?;
                    args.push(self.resolve_var(&an, aspan)?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                let r = self.resolve_rel(&name, args.len(), span)?;
                if negated {
                    ExecLetter::AssumeNegRel(r, args)
                } else {
                    ExecLetter::AssumeRel(r, args)
                }
            } else {
                let x = self.resolve_var(&name, span)?;
                let (op, ospan) = self.next();
                let positive = match op {
                    Tok::Eq => true,
                    Tok::Ne => false,
                    Tok::Lt => {
                        // Infix positive atom over the `<` relation.
                        let (yn, yspan) = self.name(false)?;
                        let y = self.resolve_var(&yn, yspan)?;
                        let r = self.resolve_rel("<", 2, ospan)?;
                        if parenthesized {
                            self.expect(Tok::RParen)?;
                        }
                        self.expect(Tok::RParen)?;
                        return Ok(if negated {
                            ExecLetter::AssumeNegRel(r, vec![x, y])
                        } else {
                            ExecLetter::AssumeRel(r, vec![x, y])
                        });
                    }
                    other => {
                        return Err(ParseError::Unexpected {
                            expected: "`=`, `!=` or `<`".to_string(),
                            found: format!("{other}"),
                            span: ospan,
                        })
                    }
                };
                let (yn, yspan) = self.name(false)?;
                let y = self.resolve_var(&yn, yspan)?;
                match (positive, negated) {
                    (true, false) | (false, true) => ExecLetter::AssumeEq(x, y),
                    _ => ExecLetter::AssumeNeq(x, y),
                }
            };
            if parenthesized {
                self.expect(Tok::RParen)?;
            }
            self.expect(Tok::RParen)?;
            Ok(letter)
        } else {
            let (name, span) = self.name(false)?;
            let x = self.resolve_var(&name, span)?;
            self.expect(Tok::Walrus)?;
            let (rhs, rspan) = self.name(false)?;
            if self.peek() == &Tok::LParen {
                self.next();
                let mut args = Vec::new();
                loop {
                    let (an, aspan) = self.name(false)?;
                    args.push(self.resolve_var(&an, aspan)?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                let f = self.resolve_fun(&rhs, args.len(), rspan)?;
                Ok(ExecLetter::AssignFn(x, f, args))
            } else {
                let y = self.resolve_var(&rhs, rspan)?;
                Ok(ExecLetter::Assign(x, y))
            }
        }
    }
}

/// Loop guards must be a single possibly negated atom. `<=` expands to a
/// disjunction, so it is rejected here as well.
fn simple_guard(c: &Cond) -> bool {
    match c {
        Cond::Eq(..) | Cond::Rel(..) => true,
        Cond::Not(inner) => simple_guard(inner),
        Cond::Or(..) | Cond::And(..) => false,
    }
}

fn check_post_in_l(c: &Cond, span: Span) -> Result<(), ParseError> {
    match c {
        Cond::Eq(a, b) => {
            if a.as_var().is_none() || b.as_var().is_none() {
                return Err(ParseError::PostOutsideL {
                    reason: "function applications are not allowed in postconditions; bind \
                             them to variables in the program"
                        .to_string(),
                    span,
                });
            }
            Ok(())
        }
        Cond::Rel(_, args) => {
            if args.iter().any(|a| a.as_var().is_none()) {
                return Err(ParseError::PostOutsideL {
                    reason: "function applications are not allowed in postconditions; bind \
                             them to variables in the program"
                        .to_string(),
                    span,
                });
            }
            Ok(())
        }
        Cond::Not(inner) => check_post_in_l(inner, span),
        Cond::Or(a, b) | Cond::And(a, b) => {
            check_post_in_l(a, span)?;
            check_post_in_l(b, span)
        }
    }
}

/// Parse a program file: headers, `program { ... }`, optional `post:`.
pub fn parse_program(source: &str) -> Result<ParsedUnit, ParseError> {
    let mut p = Parser::new(source)?;
    p.parse_headers()?;
    p.expect_kw("program")?;
    let stmt = p.parse_block()?;
    let post = p.parse_post()?;
    p.expect(Tok::Eof)?;
    let axioms = p.finish_axioms();
    Ok(ParsedUnit { vocab: p.vocab, axioms, program: Program { stmt }, post })
}

/// Parse a trace file: headers then `trace { ... }` with one letter per line.
/// Variables are inferred from use.
pub fn parse_trace(source: &str) -> Result<ParsedTrace, ParseError> {
    let mut p = Parser::new(source)?;
    p.infer_vars = true;
    p.parse_headers()?;
    p.expect_kw("trace")?;
    let exec = p.parse_trace_letters()?;
    p.expect(Tok::Eof)?;
    let axioms = p.finish_axioms();
    Ok(ParsedTrace { vocab: p.vocab, axioms, exec })
}

/// Parse either kind of file, deciding by the section keyword.
pub fn parse_file(source: &str) -> Result<ParsedFile, ParseError> {
    let mut probe = Parser::new(source)?;
    probe.infer_vars = true;
    probe.parse_headers()?;
    if probe.is_kw("trace") {
        Ok(ParsedFile::Trace(parse_trace(source)?))
    } else {
        Ok(ParsedFile::Program(parse_program(source)?))
    }
}
