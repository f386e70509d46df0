//! Surface language: parsing, axiom declarations, and desugaring to the core
//! statement form.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;

pub use ast::{Atom, Cond, Expr, Literal, PostCondition, PostFormula, Program, Stmt, StmtKind};
pub use desugar::{desugar, desugar_post};
pub use parser::{parse_file, parse_program, parse_trace, ParseError, ParsedFile, ParsedTrace, ParsedUnit};

#[cfg(test)]
mod tests {
    use super::ast::*;
    use super::*;
    use crate::axioms::validate_axioms;

    #[test]
    fn smallest_program_parses() {
        let unit = parse_program("program { skip; }").unwrap();
        match &unit.program.stmt.kind {
            StmtKind::Seq(ss) => assert!(matches!(ss[0].kind, StmtKind::Skip)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_assignment_is_a_parse_error() {
        let err = parse_program("vars x; program { x := ; }").unwrap_err();
        assert!(matches!(err, ParseError::Unexpected { .. }));
    }

    #[test]
    fn unknown_variables_are_rejected_in_programs() {
        let err = parse_program("program { x := y; }").unwrap_err();
        assert!(matches!(err, ParseError::UnknownVariable { .. }));
    }

    #[test]
    fn inconsistent_arity_is_an_error() {
        let err = parse_program(
            "vars x, y; program { x := f(y); x := f(y, y); }",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Arity { .. }));
    }

    #[test]
    fn constants_become_read_only_variables() {
        let err = parse_program("consts NIL; program { NIL := NIL; }").unwrap_err();
        assert!(matches!(err, ParseError::AssignToConst { .. }));
        let unit =
            parse_program("consts NIL; vars x; program { x := NIL; }").unwrap();
        assert!(unit.vocab.is_read_only(unit.vocab.var("NIL").unwrap()));
    }

    #[test]
    fn ordered_comparison_expands_to_disjunction_over_a_temp() {
        // k <= key(x) reads as (k < kx || k = kx) over one hoisted temp.
        let mut unit = parse_program(
            "axioms { relation <: strict_total_order; } vars k, x, stop, T; \
             program { if (k <= key(x)) then stop := T; }",
        )
        .unwrap();
        let core = desugar(&unit.program, &mut unit.vocab);
        assert!(all_conditions_atomic(&core.stmt));
        let t0 = unit.vocab.var("__t0").expect("hoisted temp");
        let key = unit.vocab.fun("key").unwrap();
        fn count_assigns(s: &Stmt, t: crate::vocab::Var, f: crate::vocab::Fun) -> usize {
            match &s.kind {
                StmtKind::Assign(x, Expr::App(g, _)) if *x == t && *g == f => 1,
                StmtKind::Seq(ss) | StmtKind::Choice(ss) => {
                    ss.iter().map(|s| count_assigns(s, t, f)).sum()
                }
                StmtKind::If(_, a, b) => {
                    count_assigns(a, t, f)
                        + b.as_ref().map_or(0, |b| count_assigns(b, t, f))
                }
                StmtKind::While(_, b) => count_assigns(b, t, f),
                _ => 0,
            }
        }
        assert_eq!(count_assigns(&core.stmt, t0, key), 1);
    }

    #[test]
    fn if_without_else_gains_skip() {
        let mut unit = parse_program(
            "vars x, y; program { if (x == y) then x := y; }",
        )
        .unwrap();
        let core = desugar(&unit.program, &mut unit.vocab);
        fn find_if(s: &Stmt) -> Option<&Stmt> {
            match &s.kind {
                StmtKind::If(..) => Some(s),
                StmtKind::Seq(ss) => ss.iter().find_map(find_if),
                _ => None,
            }
        }
        let if_stmt = find_if(&core.stmt).unwrap();
        match &if_stmt.kind {
            StmtKind::If(_, _, else_s) => {
                assert!(matches!(else_s.as_ref().unwrap().kind, StmtKind::Skip))
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn compound_assume_arguments_are_hoisted() {
        let mut unit = parse_program(
            "vars k, x; program { assume(k == key(x)); }",
        )
        .unwrap();
        let core = desugar(&unit.program, &mut unit.vocab);
        assert!(all_conditions_atomic(&core.stmt));
        // Shape: __t0 := key(x); assume(k = __t0).
        let t0 = unit.vocab.var("__t0").unwrap();
        match &core.stmt.kind {
            StmtKind::Seq(outer) => match &outer[0].kind {
                StmtKind::Seq(ss) => {
                    assert!(matches!(&ss[0].kind, StmtKind::Assign(t, Expr::App(..)) if *t == t0));
                    assert!(matches!(&ss[1].kind, StmtKind::Assume(_)));
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn desugar_is_idempotent_and_deterministic() {
        let src = "axioms { relation r: transitive; } vars a, b, c; \
                   program { while (a != b) { if (r(a, b) || a == c) then a := g(b); else skip; \
                   assume(g(a) == b && !(a == c)); } } post: a == b || r(a, c);";
        let mut u1 = parse_program(src).unwrap();
        let d1 = desugar(&u1.program, &mut u1.vocab);
        let d2 = desugar(&d1, &mut u1.vocab);
        assert_eq!(d1, d2);
        assert!(all_conditions_atomic(&d1.stmt));
        let mut u2 = parse_program(src).unwrap();
        let e1 = desugar(&u2.program, &mut u2.vocab);
        assert_eq!(d1, e1);
    }

    #[test]
    fn disjunctive_assumes_become_choices_of_atomic_assumes() {
        let mut unit = parse_program(
            "vars a, b, c; program { assume(a == b || b == c); }",
        )
        .unwrap();
        let core = desugar(&unit.program, &mut unit.vocab);
        fn find_choice(s: &Stmt) -> Option<usize> {
            match &s.kind {
                StmtKind::Choice(ss) => Some(ss.len()),
                StmtKind::Seq(ss) => ss.iter().find_map(find_choice),
                _ => None,
            }
        }
        assert_eq!(find_choice(&core.stmt), Some(2));
    }

    #[test]
    fn compound_while_guards_are_rejected() {
        let err = parse_program(
            "vars a, b, c; program { while (a == b || a == c) skip; }",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::CompoundWhileGuard { .. }));
        // A negated atom is fine.
        assert!(parse_program("vars a, b; program { while (!(a == b)) { a := b; } }").is_ok());
    }

    #[test]
    fn loop_guard_temporaries_recompute_each_iteration() {
        let mut unit = parse_program(
            "vars x, k; program { while (k != key(x)) { x := next(x); } }",
        )
        .unwrap();
        let core = desugar(&unit.program, &mut unit.vocab);
        // Core shape: __t0 := key(x); while (k != __t0) { x := next(x); __t0 := key(x); }
        let t0 = unit.vocab.var("__t0").unwrap();
        fn while_body(s: &Stmt) -> Option<&Stmt> {
            match &s.kind {
                StmtKind::While(_, b) => Some(b),
                StmtKind::Seq(ss) => ss.iter().find_map(while_body),
                _ => None,
            }
        }
        let body = while_body(&core.stmt).expect("while survives desugaring");
        let rendered = format!("{body:?}");
        assert!(rendered.contains(&format!("{t0:?}")), "guard temp not recomputed in body");
    }

    #[test]
    fn posts_reject_function_applications() {
        let err = parse_program(
            "vars x, y; program { skip; } post: x == key(y);",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::PostOutsideL { .. }));
    }

    #[test]
    fn implication_in_posts_is_sugar() {
        let unit = parse_program(
            "consts T; vars sorted, found, exists; program { skip; } \
             post: sorted == T => found == exists;",
        )
        .unwrap();
        let post = desugar_post(unit.post.as_ref().unwrap());
        match &post.formula {
            PostFormula::Or(a, _) => assert!(matches!(**a, PostFormula::Not(_))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn preorder_axioms_validate() {
        let unit = parse_program(
            "axioms { relation r: reflexive, transitive; } vars x, y; \
             program { assume(r(x, y)); }",
        )
        .unwrap();
        assert!(validate_axioms(&unit.axioms, &unit.vocab).is_ok());
    }

    #[test]
    fn associativity_declaration_is_recorded_and_rejected() {
        let unit = parse_program(
            "axioms { function f: associative; } vars x; program { skip; }",
        )
        .unwrap();
        assert_eq!(unit.axioms.rejected().len(), 1);
        assert!(validate_axioms(&unit.axioms, &unit.vocab).is_err());
    }

    #[test]
    fn free_form_epr_axioms_are_rejected() {
        let unit = parse_program(
            "axioms { axiom forall x, y . r(x, y) => r(y, x); } vars a; program { skip; }",
        )
        .unwrap();
        assert!(validate_axioms(&unit.axioms, &unit.vocab).is_err());
    }

    #[test]
    fn traces_infer_variables_and_symbols() {
        let t = parse_trace(
            "axioms { relation <: strict_total_order; } \
             trace { x := next(y) \n assume(k < x) \n assume(!(k = y)) }",
        )
        .unwrap();
        assert_eq!(t.exec.len(), 3);
        assert!(t.vocab.var("k").is_some());
        assert!(matches!(t.exec.letters[2], crate::exec::ExecLetter::AssumeNeq(..)));
    }

    #[test]
    fn self_operand_assignments_route_through_a_temp() {
        let mut unit = parse_program(
            "vars x, y; program { x := f(x, y); }",
        )
        .unwrap();
        let core = desugar(&unit.program, &mut unit.vocab);
        assert!(all_conditions_atomic(&core.stmt));
        let t0 = unit.vocab.var("__t0").unwrap();
        fn assigns_from_temp(s: &Stmt, x: crate::vocab::Var, t: crate::vocab::Var) -> bool {
            match &s.kind {
                StmtKind::Assign(lhs, Expr::V(rhs)) => *lhs == x && *rhs == t,
                StmtKind::Seq(ss) | StmtKind::Choice(ss) => {
                    ss.iter().any(|s| assigns_from_temp(s, x, t))
                }
                _ => false,
            }
        }
        let x = unit.vocab.var("x").unwrap();
        assert!(assigns_from_temp(&core.stmt, x, t0));
    }
}
