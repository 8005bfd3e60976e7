mod common;

use common::{program, query};
use proptest::prelude::*;
use termpred::engine::{build_tree, Derivation, EngineLimits, GeneralizedTree, NoObserver};
use termpred::loops::{find_lp_prefix, is_loop_goal, loops_into};
use termpred::predictor::LpObserver;
use termpred::symbols::{is_projection, Symbol, SymbolString};
use termpred::term::{Var, VarId};
use termpred::{unify, Atom, NodeId, Pruning, Term, VarKind};

fn cases() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

fn var(id: u32) -> Term {
    let kind = if id < 2 { VarKind::Input } else { VarKind::Ordinary };
    Term::Var(Var::new(VarId(id), kind, format!("V{id}")))
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0u32..6).prop_map(var),
        prop_oneof![Just("a"), Just("b")].prop_map(Term::constant),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::func("f", vec![t])),
            (inner.clone(), inner).prop_map(|(x, y)| Term::func("g", vec![x, y])),
        ]
    })
}

fn atom() -> impl Strategy<Value = Atom> {
    (term(), term()).prop_map(|(x, y)| Atom::new("p", vec![x, y]))
}

fn symbols() -> impl Strategy<Value = SymbolString> {
    prop::collection::vec(
        prop_oneof![Just(Symbol::Var), Just(Symbol::Name("f".into())), Just(Symbol::Name("a".into()))],
        0..8,
    )
    .prop_map(SymbolString)
}

/// Naive subsequence test by recursion.
fn subsequence(a: &[Symbol], b: &[Symbol]) -> bool {
    match (a.split_first(), b.split_first()) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some((x, xs)), Some((y, ys))) => (x == y && subsequence(xs, ys)) || subsequence(a, ys),
    }
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn unifier_unifies_and_is_idempotent(a in atom(), b in atom()) {
        if let Ok(theta) = unify(&a, &b) {
            let (ta, tb) = (theta.apply_atom(&a), theta.apply_atom(&b));
            prop_assert_eq!(&ta, &tb);
            prop_assert_eq!(theta.apply_atom(&ta), ta);
        }
    }

    #[test]
    fn input_never_bound_to_ordinary_variable(a in atom(), b in atom()) {
        if let Ok(theta) = unify(&a, &b) {
            for (v, t) in theta.bindings() {
                let input = v.is_input() || theta.promoted().contains(&v.id);
                prop_assert!(!(input && matches!(t, Term::Var(w) if !w.is_input())), "{v}/{t}");
            }
            let ta = theta.apply_atom(&a);
            // every variable under an input binding is input afterwards
            for (v, t) in theta.bindings() {
                if v.is_input() {
                    t.for_each_var(&mut |w| assert!(w.is_input()));
                }
            }
            ta.for_each_var(&mut |w| {
                if theta.promoted().contains(&w.id) {
                    assert!(w.is_input());
                }
            });
        }
    }

    #[test]
    fn loops_into_does_not_shrink(a in atom(), b in atom()) {
        if loops_into(&a, &b) {
            prop_assert!(a.size() <= b.size());
        }
    }

    #[test]
    fn projection_matches_naive_subsequence(s in symbols(), t in symbols()) {
        prop_assert_eq!(is_projection(&s, &t), subsequence(&s.0, &t.0));
    }

    #[test]
    fn projection_reflexive_and_transitive(s in symbols(), t in symbols(), u in symbols()) {
        prop_assert!(is_projection(&s, &s));
        if is_projection(&s, &t) && is_projection(&t, &u) {
            prop_assert!(is_projection(&s, &u));
        }
    }
}

const INPUTS: &[(&str, &str)] = &[
    ("p1", "p(i)"),
    ("p2", "append(o,i,o)"),
    ("p2", "append(i,o,o)"),
    ("p3", "mult(i,o,o)"),
    ("p3", "add(o,i,o)"),
    ("p4", "subset1(o,i)"),
    ("p5", "p(i)"),
    ("p6", "f(i)"),
];

fn plain(i: usize, nodes: usize) -> (termpred::Program, GeneralizedTree) {
    let (name, q) = INPUTS[i];
    let p = program(name);
    let t = build_tree(&p, &query(q), &mut NoObserver, EngineLimits::nodes(nodes));
    (p, t)
}

/// Every increasing r-tuple of positions of `d` ending at `end`, in
/// lexicographic order.
fn tuples(end: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, end: usize, left: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 1 {
            acc.push(end);
            out.push(acc.clone());
            acc.pop();
            return;
        }
        for k in start..end {
            acc.push(k);
            go(k + 1, end, left - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(0, end, r, &mut Vec::new(), &mut out);
    out
}

/// LP-check by exhaustive search, using only ancestor sets and symbol strings.
fn brute_force(tree: &GeneralizedTree, d: &Derivation, r: usize) -> Option<Vec<NodeId>> {
    let applied = d.applied_clauses(tree);
    let nodes = d.nodes();
    for k in 0..nodes.len() {
        let Some(c) = applied[k] else { continue };
        for tup in tuples(k, r) {
            let ok = tup.iter().all(|&j| applied[j] == Some(c))
                && tup.windows(2).all(|w| {
                    let (a, b) = (tree.node(nodes[w[0]]), tree.node(nodes[w[1]]));
                    match (a.selected(), b.selected()) {
                        (Some(la), Some(lb)) if !la.is_negative() && !lb.is_negative() => {
                            lb.ancestors.iter().any(|x| x.node == a.id)
                                && la.atom.pred == lb.atom.pred
                                && la.atom.args.len() == lb.atom.args.len()
                                && subsequence(
                                    &SymbolString::of_atom(&la.atom).0,
                                    &SymbolString::of_atom(&lb.atom).0,
                                )
                        }
                        _ => false,
                    }
                });
            if ok {
                return Some(tup.iter().map(|&j| nodes[j]).collect());
            }
        }
    }
    None
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn lp_prefix_matches_exhaustive_search(i in 0..INPUTS.len(), r in 2usize..5, pick in any::<prop::sample::Index>()) {
        let (_, t) = plain(i, 60);
        let leaves: Vec<NodeId> = t.leaves().map(|n| n.id).collect();
        let leaf = leaves[pick.index(leaves.len())];
        let d = t.derivation_to(leaf);
        let fast = find_lp_prefix(&t, &d, r).map(|w| w.positions);
        prop_assert_eq!(fast, brute_force(&t, &d, r));
    }

    #[test]
    fn witnesses_are_transitive_loop_goal_chains(i in 0..INPUTS.len(), r in 2usize..5, pruning in 0usize..3) {
        let (name, q) = INPUTS[i];
        let pruning = [Pruning::None, Pruning::Variants, Pruning::LoopGoals][pruning];
        let mut obs = LpObserver::new(r, pruning);
        let t = build_tree(&program(name), &query(q), &mut obs, EngineLimits::default());
        let witnesses = obs.cuts.iter().map(|(_, w)| w).chain(obs.offending.as_ref().map(|(w, _)| w));
        for w in witnesses {
            prop_assert_eq!(w.positions.len(), r);
            for x in 0..r {
                for y in x + 1..r {
                    prop_assert!(is_loop_goal(&t, w.positions[x], w.positions[y]));
                }
            }
        }
    }
}
