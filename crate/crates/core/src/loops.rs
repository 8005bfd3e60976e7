//! Loop goals, LP-check and the term-size decrease property.

use serde::Serialize;

use crate::engine::{Derivation, Edge, GeneralizedTree};
use crate::ids::{ClauseIdx, NodeId};
use crate::term::{Atom, Term, Var};

/// Same predicate and arity, and the symbol string of `a1` is a projection of
/// that of `a2`.
pub fn loops_into(a1: &Atom, a2: &Atom) -> bool {
    a1.same_predicate(a2)
        && crate::symbols::is_projection(
            &crate::symbols::SymbolString::of_atom(a1),
            &crate::symbols::SymbolString::of_atom(a2),
        )
}

fn node_loops_into(tree: &GeneralizedTree, a: NodeId, b: NodeId) -> bool {
    let (na, nb) = (tree.node(a), tree.node(b));
    match (na.selected(), nb.selected(), na.selected_symbols(), nb.selected_symbols()) {
        (Some(la), Some(lb), Some(sa), Some(sb)) => {
            la.atom.same_predicate(&lb.atom) && sa.is_projection_of(sb)
        }
        _ => false,
    }
}

/// Whether the goal at `j` is a loop goal of the goal at `i`: the selected
/// subgoal at `i` is an ancestor of the one at `j` and loops into it.
pub fn is_loop_goal(tree: &GeneralizedTree, i: NodeId, j: NodeId) -> bool {
    if i == j {
        return false;
    }
    let Some(lj) = tree.node(j).selected() else {
        return false;
    };
    lj.ancestors.iter().any(|a| a.node == i) && node_loops_into(tree, i, j)
}

/// Positions `g_1 < ... < g_r` of an LP prefix and its looping clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpWitness {
    pub positions: Vec<NodeId>,
    pub clause: ClauseIdx,
    pub r: usize,
}

impl LpWitness {
    pub fn last(&self) -> NodeId {
        *self.positions.last().expect("non-empty witness")
    }
}

/// LP-check at the node under expansion.
///
/// `path` is the current derivation (its last node is being expanded) and
/// `applied[k]` the clause applied at `path[k]`; `clause` is the clause about
/// to be applied at the last node. Among the selected-subgoal ancestors of the
/// last node, looks for `r` consecutive loop goals expanded by `clause`, ending
/// at the last node. The witness with the earliest positions is returned.
pub fn lp_check(
    tree: &GeneralizedTree,
    path: &[NodeId],
    applied: &[Option<ClauseIdx>],
    clause: ClauseIdx,
    r: usize,
) -> Option<LpWitness> {
    assert!(r >= 2, "repetition number must be at least 2");
    let &n = path.last()?;
    let node = tree.node(n);
    let sel = node.selected().filter(|l| !l.is_negative())?;
    if sel.ancestors.len() + 1 < r {
        return None;
    }
    // Candidates oldest first, ending with the current node.
    let mut cands: Vec<NodeId> = sel
        .ancestors
        .iter()
        .map(|a| a.node)
        .filter(|&a| {
            let d = tree.node(a).depth;
            d < applied.len()
                && path.get(d) == Some(&a)
                && applied[d] == Some(clause)
                && node_loops_into(tree, a, n)
        })
        .collect();
    cands.reverse();
    if cands.len() + 1 < r {
        return None;
    }
    cands.push(n);
    let m = cands.len();

    // reach[k]: longest loops-into chain from cands[k] to n.
    let mut reach = vec![0usize; m];
    reach[m - 1] = 1;
    for k in (0..m - 1).rev() {
        reach[k] = (k + 1..m)
            .filter(|&j| reach[j] > 0 && node_loops_into(tree, cands[k], cands[j]))
            .map(|j| reach[j] + 1)
            .max()
            .unwrap_or(0);
    }

    let start = (0..m - 1).find(|&k| reach[k] >= r)?;
    let mut positions = vec![cands[start]];
    let mut prev = start;
    for need in (1..r).rev() {
        let next = if need == 1 {
            m - 1
        } else {
            (prev + 1..m - 1)
                .find(|&j| reach[j] >= need && node_loops_into(tree, cands[prev], cands[j]))?
        };
        if !node_loops_into(tree, cands[prev], cands[next]) {
            return None;
        }
        positions.push(cands[next]);
        prev = next;
    }
    Some(LpWitness {
        positions,
        clause,
        r,
    })
}

/// Batch LP-check over a finished derivation: the first position at which a
/// prefix of `d` satisfies LP-check, replaying the clauses applied along `d`.
pub fn find_lp_prefix(tree: &GeneralizedTree, d: &Derivation, r: usize) -> Option<LpWitness> {
    let applied = d.applied_clauses(tree);
    (0..d.len()).find_map(|k| {
        let clause = applied[k]?;
        lp_check(tree, &d.nodes()[..=k], &applied[..k], clause, r).map(|mut w| {
            w.clause = clause;
            w
        })
    })
}

/// One derivation step's bindings, with every bound variable carrying its kind
/// at binding time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// The node this step produced.
    pub node: NodeId,
    pub bindings: Vec<(Var, Term)>,
}

/// Per-step mgus along a derivation; `steps[k]` produced `d[k + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubstitutionTrace {
    pub steps: Vec<TraceStep>,
}

impl SubstitutionTrace {
    pub fn of_derivation(tree: &GeneralizedTree, d: &Derivation) -> Self {
        let steps = d
            .nodes()
            .iter()
            .skip(1)
            .map(|&id| {
                let bindings = tree
                    .node(id)
                    .parent
                    .as_ref()
                    .and_then(Edge::mgu)
                    .map(|mgu| {
                        mgu.bindings()
                            .iter()
                            .map(|(v, t)| {
                                let v = if mgu.promoted().contains(&v.id) {
                                    v.with_kind(crate::term::VarKind::Input)
                                } else {
                                    v.clone()
                                };
                                (v, t.clone())
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                TraceStep { node: id, bindings }
            })
            .collect();
        SubstitutionTrace { steps }
    }
}

/// Term-size decrease: between every two consecutive witness positions some
/// step binds an input variable to a compound term containing a variable of
/// the later position's selected subgoal.
///
/// `d` must start at the main root and contain the witness positions; `trace`
/// is its substitution trace.
pub fn has_term_size_decrease(
    w: &LpWitness,
    trace: &SubstitutionTrace,
    d: &Derivation,
    tree: &GeneralizedTree,
) -> bool {
    let index = |id: NodeId| d.nodes().iter().position(|&n| n == id);
    w.positions.windows(2).all(|pair| {
        let (Some(a), Some(b)) = (index(pair[0]), index(pair[1])) else {
            return false;
        };
        let Some(sel) = tree.node(pair[1]).selected() else {
            return false;
        };
        trace.steps[a..b].iter().any(|step| {
            step.bindings.iter().any(|(x, t)| {
                x.is_input() && matches!(t, Term::Func(..)) && {
                    let mut hit = false;
                    t.for_each_var(&mut |y| hit |= sel.atom.contains_var(y.id));
                    hit
                }
            })
        })
    })
}
