//! The execution alphabet: assignments and atomic assumes over program
//! variables, plus the word type built from it.

use std::fmt;

use crate::vocab::{Fun, Rel, Var, Vocab};

/// One symbol of the execution alphabet.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ExecLetter {
    /// `x := y`
    Assign(Var, Var),
    /// `x := f(z1, ..., zk)`
    AssignFn(Var, Fun, Vec<Var>),
    /// `assume(x = y)`
    AssumeEq(Var, Var),
    /// `assume(x ≠ y)`
    AssumeNeq(Var, Var),
    /// `assume(R(z1, ..., zk))`
    AssumeRel(Rel, Vec<Var>),
    /// `assume(¬R(z1, ..., zk))`
    AssumeNegRel(Rel, Vec<Var>),
}

impl ExecLetter {
    /// All variables the letter mentions, assigned variable first.
    pub fn vars(&self) -> Vec<Var> {
        match self {
            ExecLetter::Assign(x, y) => vec![*x, *y],
            ExecLetter::AssignFn(x, _, zs) => {
                let mut v = vec![*x];
                v.extend_from_slice(zs);
                v
            }
            ExecLetter::AssumeEq(x, y) | ExecLetter::AssumeNeq(x, y) => vec![*x, *y],
            ExecLetter::AssumeRel(_, zs) | ExecLetter::AssumeNegRel(_, zs) => zs.clone(),
        }
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> LetterDisplay<'a> {
        LetterDisplay { letter: self, vocab }
    }
}

/// A finite word over the execution alphabet. Prefixes of executions are
/// themselves executions.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Execution {
    pub letters: Vec<ExecLetter>,
}

impl Execution {
    pub fn new(letters: Vec<ExecLetter>) -> Self {
        Execution { letters }
    }

    pub fn empty() -> Self {
        Execution { letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Execution {
        Execution { letters: self.letters[..len].to_vec() }
    }

    pub fn push(&mut self, l: ExecLetter) {
        self.letters.push(l);
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> ExecutionDisplay<'a> {
        ExecutionDisplay { exec: self, vocab }
    }
}

pub struct LetterDisplay<'a> {
    letter: &'a ExecLetter,
    vocab: &'a Vocab,
}

impl fmt::Display for LetterDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vb = self.vocab;
        let args = |zs: &[Var]| {
            zs.iter()
                .map(|z| vb.var_name(*z).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self.letter {
            ExecLetter::Assign(x, y) => {
                write!(f, "{} := {}", vb.var_name(*x), vb.var_name(*y))
            }
            ExecLetter::AssignFn(x, g, zs) => {
                write!(f, "{} := {}({})", vb.var_name(*x), vb.fun_name(*g), args(zs))
            }
            ExecLetter::AssumeEq(x, y) => {
                write!(f, "assume({} = {})", vb.var_name(*x), vb.var_name(*y))
            }
            ExecLetter::AssumeNeq(x, y) => {
                write!(f, "assume({} ≠ {})", vb.var_name(*x), vb.var_name(*y))
            }
            ExecLetter::AssumeRel(r, zs) => {
                write!(f, "assume({}({}))", vb.rel_name(*r), args(zs))
            }
            ExecLetter::AssumeNegRel(r, zs) => {
                write!(f, "assume(¬{}({}))", vb.rel_name(*r), args(zs))
            }
        }
    }
}

pub struct ExecutionDisplay<'a> {
    exec: &'a Execution,
    vocab: &'a Vocab,
}

impl fmt::Display for ExecutionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.exec.letters.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", l.display(self.vocab))?;
        }
        Ok(())
    }
}
