//! Substitutions and unification with input variables.
//!
//! Orientation rules for variable/variable pairs:
//! - an ordinary variable is always bound to an input variable;
//! - otherwise the later-created variable is bound to the earlier one. Clause
//!   variables are renamed apart with fresh ids, so a goal variable always
//!   substitutes for a clause variable.
//!
//! Input variables are never bound to ordinary variables. Once an input
//! variable is bound to a compound term, every variable of that term becomes
//! an input variable too.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{Atom, Goal, Literal, Term, Var, VarId, VarKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("symbol clash")]
    Clash,
    #[error("occurs check: {0} occurs in {1}")]
    OccursCheck(String, String),
}

/// An idempotent substitution in solved form, plus the set of variables that
/// were promoted to input kind.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution {
    bindings: Vec<(Var, Term)>,
    promoted: BTreeSet<VarId>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a substitution from raw bindings without normalizing them.
    pub fn from_bindings(bindings: Vec<(Var, Term)>) -> Self {
        Substitution {
            bindings,
            promoted: BTreeSet::new(),
        }
    }

    pub fn bindings(&self) -> &[(Var, Term)] {
        &self.bindings
    }

    pub fn promoted(&self) -> &BTreeSet<VarId> {
        &self.promoted
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty() && self.promoted.is_empty()
    }

    pub fn lookup(&self, id: VarId) -> Option<&Term> {
        self.bindings
            .iter()
            .find(|(v, _)| v.id == id)
            .map(|(_, t)| t)
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| match self.lookup(v.id) {
            Some(bound) => bound.clone(),
            None if self.promoted.contains(&v.id) => Term::Var(v.with_kind(VarKind::Input)),
            None => Term::Var(v.clone()),
        })
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom {
            pred: a.pred.clone(),
            args: a.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal {
            polarity: l.polarity,
            atom: self.apply_atom(&l.atom),
            ancestors: l.ancestors.clone(),
        }
    }

    pub fn apply_goal(&self, g: &Goal) -> Goal {
        Goal(g.0.iter().map(|l| self.apply_literal(l)).collect())
    }

    /// Adds `var -> term`, keeping the substitution in solved form.
    fn bind(&mut self, var: Var, term: Term) {
        for (_, existing) in &mut self.bindings {
            if existing.contains_var(var.id) {
                *existing = existing.map_vars(&mut |v| {
                    if v.id == var.id {
                        term.clone()
                    } else {
                        Term::Var(v.clone())
                    }
                });
            }
        }
        self.bindings.push((var, term));
    }
}

/// Which variable of a variable/variable pair gets bound: returns
/// `(bound, replacement)`.
fn orient(a: Var, b: Var) -> (Var, Var) {
    match (a.kind, b.kind) {
        (VarKind::Ordinary, VarKind::Input) => (a, b),
        (VarKind::Input, VarKind::Ordinary) => (b, a),
        _ if a.id > b.id => (a, b),
        _ => (b, a),
    }
}

/// Most general unifier of `goal` (a selected subgoal) and `head` (a renamed
/// clause head), with input kinds already propagated.
pub fn unify(goal: &Atom, head: &Atom) -> Result<Substitution, UnifyError> {
    if !goal.same_predicate(head) {
        return Err(UnifyError::Clash);
    }
    let mut pairs: Vec<(Term, Term)> = goal
        .args
        .iter()
        .cloned()
        .zip(head.args.iter().cloned())
        .rev()
        .collect();
    let mut subst = Substitution::new();
    while let Some((a, b)) = pairs.pop() {
        let a = subst.apply_term(&a);
        let b = subst.apply_term(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x.id == y.id => {}
            (Term::Var(x), Term::Var(y)) => {
                let (bound, to) = orient(x, y);
                subst.bind(bound, Term::Var(to));
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.contains_var(x.id) {
                    return Err(UnifyError::OccursCheck(x.to_string(), t.to_string()));
                }
                subst.bind(x, t);
            }
            (Term::Const(c), Term::Const(d)) => {
                if c != d {
                    return Err(UnifyError::Clash);
                }
            }
            (Term::Func(f, xs), Term::Func(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Err(UnifyError::Clash);
                }
                pairs.extend(xs.into_iter().zip(ys).rev());
            }
            _ => return Err(UnifyError::Clash),
        }
    }
    Ok(propagate_input_kind(&subst))
}

/// Marks every variable occurring in a term bound to an input variable as an
/// input variable, transitively, and rewrites the bound terms accordingly.
pub fn propagate_input_kind(theta: &Substitution) -> Substitution {
    let mut promoted = theta.promoted.clone();
    loop {
        let mut grew = false;
        for (v, t) in &theta.bindings {
            if v.is_input() || promoted.contains(&v.id) {
                t.for_each_var(&mut |w| {
                    if !w.is_input() && promoted.insert(w.id) {
                        grew = true;
                    }
                });
            }
        }
        if !grew {
            break;
        }
    }
    let relabel = |t: &Term| {
        t.map_vars(&mut |w| {
            if promoted.contains(&w.id) {
                Term::Var(w.with_kind(VarKind::Input))
            } else {
                Term::Var(w.clone())
            }
        })
    };
    let bindings = theta
        .bindings
        .iter()
        .map(|(v, t)| (v.clone(), relabel(t)))
        .collect();
    Substitution { bindings, promoted }
}

/// Applies `theta` to `t`. Replacement is simultaneous.
pub fn apply(theta: &Substitution, t: &Term) -> Term {
    theta.apply_term(t)
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}/{t}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(id: u32, kind: VarKind, name: &str) -> Var {
        Var::new(VarId(id), kind, name)
    }

    fn t(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    #[test]
    fn input_bound_to_clause_function() {
        // goal p(I), head p(f(X2))
        let i = var(0, VarKind::Input, "I");
        let x2 = var(1, VarKind::Ordinary, "X2");
        let goal = Atom::new("p", vec![t(&i)]);
        let head = Atom::new("p", vec![Term::func("f", vec![t(&x2)])]);
        let theta = unify(&goal, &head).unwrap();
        assert_eq!(theta.bindings().len(), 1);
        assert_eq!(theta.bindings()[0].0.id, i.id);
        assert!(theta.promoted().contains(&x2.id));
        let applied = theta.apply_atom(&goal);
        assert_eq!(applied.to_string(), "p(f(@X2))");
    }

    #[test]
    fn clause_variable_bound_to_goal_variable() {
        let x = var(0, VarKind::Ordinary, "X");
        let y = var(1, VarKind::Ordinary, "Y");
        let theta = unify(&Atom::new("p", vec![t(&x)]), &Atom::new("p", vec![t(&y)])).unwrap();
        assert_eq!(theta.bindings(), &[(y, t(&x))]);
    }

    #[test]
    fn clash() {
        let x = var(0, VarKind::Ordinary, "X");
        let r = unify(
            &Atom::new("p", vec![Term::constant("a")]),
            &Atom::new("p", vec![Term::func("f", vec![t(&x)])]),
        );
        assert_eq!(r, Err(UnifyError::Clash));
    }

    #[test]
    fn occurs_check_is_distinct_failure() {
        let x = var(0, VarKind::Ordinary, "X");
        let r = unify(
            &Atom::new("p", vec![t(&x)]),
            &Atom::new("p", vec![Term::func("f", vec![t(&x)])]),
        );
        assert!(matches!(r, Err(UnifyError::OccursCheck(..))));
    }

    #[test]
    fn ordinary_bound_to_input_regardless_of_side() {
        let x = var(0, VarKind::Ordinary, "X");
        let i = var(5, VarKind::Input, "I");
        let theta = unify(&Atom::new("p", vec![t(&x)]), &Atom::new("p", vec![t(&i)])).unwrap();
        assert_eq!(theta.bindings(), &[(x.clone(), t(&i))]);
        let theta = unify(&Atom::new("p", vec![t(&i)]), &Atom::new("p", vec![t(&x)])).unwrap();
        assert_eq!(theta.bindings(), &[(x, t(&i))]);
    }

    #[test]
    fn input_input_binds_later_to_earlier() {
        let i1 = var(1, VarKind::Input, "I1");
        let i2 = var(2, VarKind::Input, "I2");
        let theta = unify(&Atom::new("p", vec![t(&i2)]), &Atom::new("p", vec![t(&i1)])).unwrap();
        assert_eq!(theta.bindings(), &[(i2, t(&i1))]);
    }

    #[test]
    fn propagation_examples() {
        let i = var(0, VarKind::Input, "I");
        let y = var(1, VarKind::Ordinary, "Y");
        let z = var(2, VarKind::Ordinary, "Z");
        let w = var(3, VarKind::Ordinary, "W");
        let x = var(4, VarKind::Ordinary, "X");

        let s = propagate_input_kind(&Substitution::from_bindings(vec![(
            i.clone(),
            Term::func("f", vec![t(&y), t(&z)]),
        )]));
        assert_eq!(s.promoted(), &BTreeSet::from([y.id, z.id]));

        let s = propagate_input_kind(&Substitution::from_bindings(vec![(
            x,
            Term::constant("a"),
        )]));
        assert!(s.promoted().is_empty());

        let s = propagate_input_kind(&Substitution::from_bindings(vec![(
            i,
            Term::func("g", vec![Term::func("f", vec![t(&w)])]),
        )]));
        assert_eq!(s.promoted(), &BTreeSet::from([w.id]));
    }

    #[test]
    fn apply_examples() {
        let x = var(0, VarKind::Ordinary, "X");
        let theta = Substitution::from_bindings(vec![(x.clone(), Term::constant("a"))]);
        let a = Atom::new("p", vec![t(&x), t(&x)]);
        assert_eq!(theta.apply_atom(&a).to_string(), "p(a,a)");
        assert_eq!(Substitution::new().apply_atom(&a), a);
    }

    #[test]
    fn promotion_reaches_rest_of_goal() {
        // goal p(I,Z) with head p(f(W),W): Z becomes input everywhere.
        let i = var(0, VarKind::Input, "I");
        let z = var(1, VarKind::Ordinary, "Z");
        let w = var(2, VarKind::Ordinary, "W");
        let theta = unify(
            &Atom::new("p", vec![t(&i), t(&z)]),
            &Atom::new("p", vec![Term::func("f", vec![t(&w)]), t(&w)]),
        )
        .unwrap();
        let rest = Atom::new("r", vec![t(&z)]);
        assert_eq!(theta.apply_atom(&rest).to_string(), "r(@Z)");
    }
}
