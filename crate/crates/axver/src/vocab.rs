//! Symbol table shared by every stage: program variables, function and
//! relation symbols with their arities.
//!
//! Constants of the surface language are registered here as read-only
//! variables, and desugaring appends its fresh temporaries in source order,
//! so the variable numbering of a given source file is reproducible.

use std::collections::BTreeMap;
use std::fmt;

/// Index of a program variable (including constants-as-variables, desugaring
/// temporaries and the instrumentation auxiliary `v*`).
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

/// Index of a function symbol.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Fun(pub u32);

/// Index of a relation symbol.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rel(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Name of the shared instrumentation auxiliary variable.
pub const VSTAR_NAME: &str = "v*";

/// Prefix reserved for desugaring temporaries.
pub const TEMP_PREFIX: &str = "__t";

#[derive(Clone, Debug, Default)]
pub struct Vocab {
    vars: Vec<String>,
    var_ids: BTreeMap<String, Var>,
    /// Variables that stand for surface constants; assignments to them are
    /// rejected by the parser.
    read_only: Vec<bool>,
    funs: Vec<(String, usize)>,
    fun_ids: BTreeMap<String, Fun>,
    rels: Vec<(String, usize)>,
    rel_ids: BTreeMap<String, Rel>,
    vstar: Option<Var>,
}

impl Vocab {
    pub fn new() -> Self {
        Vocab::default()
    }

    /// A vocabulary with `n` anonymous variables `x0..`, used by tests and
    /// trace harnesses.
    pub fn with_vars(n: usize) -> Self {
        let mut v = Vocab::new();
        for i in 0..n {
            v.add_var(&format!("x{i}"), false);
        }
        v
    }

    pub fn add_var(&mut self, name: &str, read_only: bool) -> Var {
        if let Some(&v) = self.var_ids.get(name) {
            return v;
        }
        let v = Var(self.vars.len() as u32);
        self.vars.push(name.to_string());
        self.read_only.push(read_only);
        self.var_ids.insert(name.to_string(), v);
        v
    }

    pub fn add_fun(&mut self, name: &str, arity: usize) -> Fun {
        if let Some(&f) = self.fun_ids.get(name) {
            return f;
        }
        let f = Fun(self.funs.len() as u32);
        self.funs.push((name.to_string(), arity));
        self.fun_ids.insert(name.to_string(), f);
        f
    }

    pub fn add_rel(&mut self, name: &str, arity: usize) -> Rel {
        if let Some(&r) = self.rel_ids.get(name) {
            return r;
        }
        let r = Rel(self.rels.len() as u32);
        self.rels.push((name.to_string(), arity));
        self.rel_ids.insert(name.to_string(), r);
        r
    }

    /// Materialize the auxiliary variable `v*`. Idempotent.
    pub fn ensure_vstar(&mut self) -> Var {
        if let Some(v) = self.vstar {
            return v;
        }
        let v = self.add_var(VSTAR_NAME, false);
        self.vstar = Some(v);
        v
    }

    pub fn vstar(&self) -> Option<Var> {
        self.vstar
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.var_ids.get(name).copied()
    }

    pub fn fun(&self, name: &str) -> Option<Fun> {
        self.fun_ids.get(name).copied()
    }

    pub fn rel(&self, name: &str) -> Option<Rel> {
        self.rel_ids.get(name).copied()
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.vars[v.0 as usize]
    }

    pub fn fun_name(&self, f: Fun) -> &str {
        &self.funs[f.0 as usize].0
    }

    pub fn rel_name(&self, r: Rel) -> &str {
        &self.rels[r.0 as usize].0
    }

    pub fn fun_arity(&self, f: Fun) -> usize {
        self.funs[f.0 as usize].1
    }

    pub fn rel_arity(&self, r: Rel) -> usize {
        self.rels[r.0 as usize].1
    }

    pub fn is_read_only(&self, v: Var) -> bool {
        self.read_only[v.0 as usize]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_funs(&self) -> usize {
        self.funs.len()
    }

    pub fn num_rels(&self) -> usize {
        self.rels.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.vars.len() as u32).map(Var)
    }

    pub fn funs(&self) -> impl Iterator<Item = Fun> {
        (0..self.funs.len() as u32).map(Fun)
    }

    pub fn rels(&self) -> impl Iterator<Item = Rel> {
        (0..self.rels.len() as u32).map(Rel)
    }
}
