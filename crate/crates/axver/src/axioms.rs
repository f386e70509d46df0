//! Axiom sets: per-relation and per-function property flags, plus validation
//! against the decidable combinations the verifier supports.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::vocab::{Fun, Rel, Vocab};

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RelProp {
    Refl,
    Irref,
    Symm,
    Trans,
    /// Strict total order: irreflexive, transitive and total. Executions of
    /// programs over such a relation are built without negative assumes on it.
    Sto,
}

impl RelProp {
    pub fn name(self) -> &'static str {
        match self {
            RelProp::Refl => "reflexive",
            RelProp::Irref => "irreflexive",
            RelProp::Symm => "symmetric",
            RelProp::Trans => "transitive",
            RelProp::Sto => "strict_total_order",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FnProp {
    Comm,
    Idem,
}

impl FnProp {
    pub fn name(self) -> &'static str {
        match self {
            FnProp::Comm => "commutative",
            FnProp::Idem => "idempotent",
        }
    }
}

/// Declarations that name recognizably undecidable or excluded axiom classes.
/// They are kept for diagnostics and make validation fail.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RejectedDecl {
    Assoc(String),
    AntiSym(String),
    Epr(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomSet {
    rel_props: BTreeMap<Rel, BTreeSet<RelProp>>,
    fn_props: BTreeMap<Fun, BTreeSet<FnProp>>,
    rejected: Vec<RejectedDecl>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AxiomError {
    #[error("unsupported axiom: {0}")]
    Unsupported(String),
    #[error("contradictory axioms on relation {0}: {1}")]
    Contradictory(String, String),
    #[error("axiom {prop} requires a {need}, but {symbol} has arity {arity}")]
    Arity {
        prop: String,
        need: String,
        symbol: String,
        arity: usize,
    },
}

impl AxiomSet {
    pub fn new() -> Self {
        AxiomSet::default()
    }

    pub fn declare_rel(&mut self, r: Rel, prop: RelProp) {
        self.rel_props.entry(r).or_default().insert(prop);
    }

    pub fn declare_fun(&mut self, f: Fun, prop: FnProp) {
        self.fn_props.entry(f).or_default().insert(prop);
    }

    pub fn reject(&mut self, decl: RejectedDecl) {
        self.rejected.push(decl);
    }

    pub fn rejected(&self) -> &[RejectedDecl] {
        &self.rejected
    }

    pub fn rel_props(&self, r: Rel) -> impl Iterator<Item = RelProp> + '_ {
        self.rel_props.get(&r).into_iter().flatten().copied()
    }

    pub fn fn_props(&self, f: Fun) -> impl Iterator<Item = FnProp> + '_ {
        self.fn_props.get(&f).into_iter().flatten().copied()
    }

    pub fn has_rel_prop(&self, r: Rel, p: RelProp) -> bool {
        self.rel_props.get(&r).is_some_and(|s| s.contains(&p))
    }

    pub fn has_fn_prop(&self, f: Fun, p: FnProp) -> bool {
        self.fn_props.get(&f).is_some_and(|s| s.contains(&p))
    }

    pub fn is_sto(&self, r: Rel) -> bool {
        self.has_rel_prop(r, RelProp::Sto)
    }

    /// Transitive either by declaration or as part of a strict total order.
    pub fn is_transitive(&self, r: Rel) -> bool {
        self.has_rel_prop(r, RelProp::Trans) || self.is_sto(r)
    }

    pub fn is_irreflexive(&self, r: Rel) -> bool {
        self.has_rel_prop(r, RelProp::Irref) || self.is_sto(r)
    }

    pub fn is_reflexive(&self, r: Rel) -> bool {
        self.has_rel_prop(r, RelProp::Refl)
    }

    pub fn is_symmetric(&self, r: Rel) -> bool {
        self.has_rel_prop(r, RelProp::Symm)
    }

    pub fn is_commutative(&self, f: Fun) -> bool {
        self.has_fn_prop(f, FnProp::Comm)
    }

    pub fn is_idempotent(&self, f: Fun) -> bool {
        self.has_fn_prop(f, FnProp::Idem)
    }

    pub fn declared_rels(&self) -> impl Iterator<Item = Rel> + '_ {
        self.rel_props.keys().copied()
    }

    pub fn declared_funs(&self) -> impl Iterator<Item = Fun> + '_ {
        self.fn_props.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.rel_props.values().all(|s| s.is_empty())
            && self.fn_props.values().all(|s| s.is_empty())
            && self.rejected.is_empty()
    }

    pub fn has_fn_axioms(&self) -> bool {
        self.fn_props.values().any(|s| !s.is_empty())
    }
}

/// Check that every declaration lies in the decidable matrix: any subset of
/// {reflexive, irreflexive, symmetric, transitive} per relation (minus the
/// contradictory pair), strict total orders, and commutative or idempotent
/// functions. Returns the set unchanged on success.
pub fn validate_axioms(a: &AxiomSet, vocab: &Vocab) -> Result<AxiomSet, AxiomError> {
    for rej in &a.rejected {
        return Err(match rej {
            RejectedDecl::Assoc(name) => AxiomError::Unsupported(format!(
                "associativity of {name}: feasibility of even a single execution modulo an \
                 associative function is undecidable (word problem for semigroups); supported \
                 function axioms are commutativity and idempotence"
            )),
            RejectedDecl::AntiSym(name) => AxiomError::Unsupported(format!(
                "anti-symmetry of {name}: anti-symmetric relations force equalities between \
                 terms, which breaks streaming congruence closure; use a strict order instead"
            )),
            RejectedDecl::Epr(text) => AxiomError::Unsupported(format!(
                "free-form quantified axiom `{text}`: verification modulo arbitrary EPR \
                 sentences is undecidable; declare per-symbol properties instead"
            )),
        });
    }
    for (&r, props) in &a.rel_props {
        let name = vocab.rel_name(r);
        let arity = vocab.rel_arity(r);
        for &p in props {
            if arity != 2 {
                return Err(AxiomError::Arity {
                    prop: p.name().to_string(),
                    need: "binary relation".to_string(),
                    symbol: name.to_string(),
                    arity,
                });
            }
        }
        if props.contains(&RelProp::Refl) && props.contains(&RelProp::Irref) {
            return Err(AxiomError::Contradictory(
                name.to_string(),
                "reflexive and irreflexive cannot hold together on a nonempty universe"
                    .to_string(),
            ));
        }
        if props.contains(&RelProp::Sto) {
            if props.contains(&RelProp::Refl) {
                return Err(AxiomError::Contradictory(
                    name.to_string(),
                    "a strict total order is irreflexive; reflexivity contradicts it".to_string(),
                ));
            }
            if props.contains(&RelProp::Symm) {
                return Err(AxiomError::Contradictory(
                    name.to_string(),
                    "a symmetric strict total order collapses on any two distinct elements"
                        .to_string(),
                ));
            }
            // irref/trans alongside sto are redundant but harmless.
        }
    }
    for (&f, props) in &a.fn_props {
        let name = vocab.fun_name(f);
        let arity = vocab.fun_arity(f);
        for &p in props {
            match p {
                FnProp::Comm if arity != 2 => {
                    return Err(AxiomError::Arity {
                        prop: "commutative".to_string(),
                        need: "binary function".to_string(),
                        symbol: name.to_string(),
                        arity,
                    });
                }
                FnProp::Idem if arity != 1 => {
                    return Err(AxiomError::Arity {
                        prop: "idempotent".to_string(),
                        need: "unary function".to_string(),
                        symbol: name.to_string(),
                        arity,
                    });
                }
                _ => {}
            }
        }
    }
    Ok(a.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocab {
        let mut v = Vocab::new();
        v.add_var("x", false);
        v.add_fun("f", 2);
        v.add_fun("g", 1);
        v.add_rel("R", 2);
        v.add_rel("lt", 2);
        v
    }

    #[test]
    fn preorder_combination_is_accepted() {
        let vb = vocab();
        let r = vb.rel("R").unwrap();
        let mut ax = AxiomSet::new();
        ax.declare_rel(r, RelProp::Refl);
        ax.declare_rel(r, RelProp::Trans);
        assert!(validate_axioms(&ax, &vb).is_ok());
    }

    #[test]
    fn associativity_is_rejected() {
        let vb = vocab();
        let mut ax = AxiomSet::new();
        ax.reject(RejectedDecl::Assoc("f".to_string()));
        let err = validate_axioms(&ax, &vb).unwrap_err();
        assert!(matches!(err, AxiomError::Unsupported(_)));
    }

    #[test]
    fn reflexive_irreflexive_is_contradictory() {
        let vb = vocab();
        let r = vb.rel("R").unwrap();
        let mut ax = AxiomSet::new();
        ax.declare_rel(r, RelProp::Refl);
        ax.declare_rel(r, RelProp::Irref);
        let err = validate_axioms(&ax, &vb).unwrap_err();
        assert!(matches!(err, AxiomError::Contradictory(..)));
    }

    #[test]
    fn sto_requires_binary_and_excludes_refl_symm() {
        let vb = vocab();
        let lt = vb.rel("lt").unwrap();
        let mut ax = AxiomSet::new();
        ax.declare_rel(lt, RelProp::Sto);
        assert!(validate_axioms(&ax, &vb).is_ok());
        ax.declare_rel(lt, RelProp::Symm);
        assert!(validate_axioms(&ax, &vb).is_err());
    }

    #[test]
    fn commutativity_needs_binary_function() {
        let vb = vocab();
        let g = vb.fun("g").unwrap();
        let mut ax = AxiomSet::new();
        ax.declare_fun(g, FnProp::Comm);
        assert!(matches!(validate_axioms(&ax, &vb), Err(AxiomError::Arity { .. })));
    }
}
