//! Terms, atoms and literals.
//!
//! Variables carry a [`VarKind`]: ordinary variables behave as in plain
//! SLDNF-resolution, input variables stand for an arbitrary ground term and may
//! only be bound to constants or compound terms.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Identity of a variable within one analysis session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Ordinary,
    Input,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Var {
    pub id: VarId,
    pub kind: VarKind,
    pub name: Arc<str>,
}

impl Var {
    pub fn new(id: VarId, kind: VarKind, name: impl Into<Arc<str>>) -> Self {
        Var {
            id,
            kind,
            name: name.into(),
        }
    }

    pub fn is_input(&self) -> bool {
        self.kind == VarKind::Input
    }

    pub fn with_kind(&self, kind: VarKind) -> Var {
        Var {
            id: self.id,
            kind,
            name: self.name.clone(),
        }
    }
}

/// Hands out fresh variable identities. One generator per analysis session.
#[derive(Debug, Clone, Default)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn new() -> Self {
        VarGen { next: 0 }
    }

    /// Start allocating at `next`.
    pub fn starting_at(next: u32) -> Self {
        VarGen { next }
    }

    pub fn peek(&self) -> u32 {
        self.next
    }

    pub fn fresh(&mut self, kind: VarKind, name: impl Into<Arc<str>>) -> Var {
        let id = self.reserve(1);
        Var::new(VarId(id), kind, name)
    }

    /// Reserve `n` consecutive ids and return the first.
    pub fn reserve(&mut self, n: u32) -> u32 {
        let first = self.next;
        self.next = self
            .next
            .checked_add(n)
            .expect("variable id space exhausted");
        first
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(Arc<str>),
    /// Compound term; the argument list is never empty.
    Func(Arc<str>, Vec<Term>),
}

pub const NIL: &str = "[]";
pub const CONS: &str = ".";

impl Term {
    pub fn constant(name: impl Into<Arc<str>>) -> Term {
        Term::Const(name.into())
    }

    /// Builds a compound term, or a constant when `args` is empty.
    pub fn func(name: impl Into<Arc<str>>, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Const(name.into())
        } else {
            Term::Func(name.into(), args)
        }
    }

    pub fn nil() -> Term {
        Term::Const(NIL.into())
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Func(CONS.into(), vec![head, tail])
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Number of occurrences of function symbols, variables and constants.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::Func(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Nesting depth: constants and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Func(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn contains_var(&self, id: VarId) -> bool {
        match self {
            Term::Var(v) => v.id == id,
            Term::Const(_) => false,
            Term::Func(_, args) => args.iter().any(|a| a.contains_var(id)),
        }
    }

    /// Visits variable occurrences left to right.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::Const(_) => {}
            Term::Func(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    pub fn var_ids(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.for_each_var(&mut |v| {
            out.insert(v.id);
        });
        out
    }

    /// Rewrites every variable occurrence.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Const(c) => Term::Const(c.clone()),
            Term::Func(name, args) => {
                Term::Func(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: Arc<str>,
    pub args: Vec<Term>,
}

/// Predicate name and arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredKey {
    pub name: Arc<str>,
    pub arity: usize,
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl Atom {
    pub fn new(pred: impl Into<Arc<str>>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn key(&self) -> PredKey {
        PredKey {
            name: self.pred.clone(),
            arity: self.args.len(),
        }
    }

    pub fn same_predicate(&self, other: &Atom) -> bool {
        self.pred == other.pred && self.args.len() == other.args.len()
    }

    /// Size of the atom: the predicate symbol is not counted.
    pub fn size(&self) -> usize {
        self.args.iter().map(Term::size).sum()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        self.args.iter().for_each(|a| a.for_each_var(f));
    }

    pub fn var_ids(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.for_each_var(&mut |v| {
            out.insert(v.id);
        });
        out
    }

    pub fn contains_var(&self, id: VarId) -> bool {
        self.args.iter().any(|a| a.contains_var(id))
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| a.map_vars(f)).collect(),
        }
    }

    /// One-way matching: true iff some substitution for the variables of
    /// `self` turns it into `instance`.
    pub fn subsumes(&self, instance: &Atom) -> bool {
        if !self.same_predicate(instance) {
            return false;
        }
        let mut bound: Vec<(VarId, &Term)> = Vec::new();
        self.args
            .iter()
            .zip(&instance.args)
            .all(|(g, i)| match_term(g, i, &mut bound))
    }
}

fn match_term<'a>(general: &Term, instance: &'a Term, bound: &mut Vec<(VarId, &'a Term)>) -> bool {
    match general {
        Term::Var(v) => match bound.iter().find(|(id, _)| *id == v.id) {
            Some((_, t)) => *t == instance,
            None => {
                bound.push((v.id, instance));
                true
            }
        },
        Term::Const(c) => matches!(instance, Term::Const(d) if c == d),
        Term::Func(name, args) => match instance {
            Term::Func(iname, iargs) if iname == name && iargs.len() == args.len() => args
                .iter()
                .zip(iargs)
                .all(|(g, i)| match_term(g, i, bound)),
            _ => false,
        },
    }
}

pub use crate::ids::NodeId;

/// A selected-subgoal occurrence: the literal at `position` of the goal at
/// `node`. Selection is left-most, so `position` is 0 for every ancestor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubgoalRef {
    pub node: NodeId,
    pub position: usize,
}

impl SubgoalRef {
    pub fn selected_at(node: NodeId) -> Self {
        SubgoalRef { node, position: 0 }
    }
}

/// Persistent ancestor set of a literal occurrence.
///
/// Every ancestor set is its parent literal's set plus the parent itself, so
/// sets form chains and are shared between all body literals of one step.
#[derive(Clone, Default)]
pub struct Ancestors(Option<Arc<AncestorLink>>);

struct AncestorLink {
    at: SubgoalRef,
    len: usize,
    rest: Ancestors,
}

impl Ancestors {
    pub fn empty() -> Self {
        Ancestors(None)
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |l| l.len)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// The set extended with `at`.
    pub fn with(&self, at: SubgoalRef) -> Ancestors {
        Ancestors(Some(Arc::new(AncestorLink {
            at,
            len: self.len() + 1,
            rest: self.clone(),
        })))
    }

    /// Newest ancestor first.
    pub fn iter(&self) -> AncestorIter<'_> {
        AncestorIter(self.0.as_deref())
    }

    pub fn contains(&self, at: SubgoalRef) -> bool {
        self.iter().any(|a| a == at)
    }

    /// Oldest ancestor first.
    pub fn to_vec(&self) -> Vec<SubgoalRef> {
        let mut v: Vec<_> = self.iter().collect();
        v.reverse();
        v
    }
}

pub struct AncestorIter<'a>(Option<&'a AncestorLink>);

impl Iterator for AncestorIter<'_> {
    type Item = SubgoalRef;

    fn next(&mut self) -> Option<SubgoalRef> {
        let link = self.0?;
        self.0 = link.rest.0.as_deref();
        Some(link.at)
    }
}

impl PartialEq for Ancestors {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Some(a), Some(b)) if Arc::ptr_eq(a, b) => true,
            _ => self.len() == other.len() && self.iter().eq(other.iter()),
        }
    }
}

impl Eq for Ancestors {}

impl fmt::Debug for Ancestors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.to_vec()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub polarity: Polarity,
    pub atom: Atom,
    pub ancestors: Ancestors,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal {
            polarity: Polarity::Positive,
            atom,
            ancestors: Ancestors::empty(),
        }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal {
            polarity: Polarity::Negative,
            atom,
            ancestors: Ancestors::empty(),
        }
    }

    pub fn is_negative(&self) -> bool {
        self.polarity == Polarity::Negative
    }

    pub fn with_ancestors(mut self, ancestors: Ancestors) -> Self {
        self.ancestors = ancestors;
        self
    }
}

/// A goal; the selected subgoal is always the left-most literal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Goal(pub Vec<Literal>);

impl Goal {
    pub fn new(literals: Vec<Literal>) -> Self {
        Goal(literals)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    /// The left-most subgoal, if any.
    pub fn selected(&self) -> Option<&Literal> {
        self.0.first()
    }
}

/// Depth-first left-most selection.
///
/// # Panics
/// On the empty goal, which has no subgoal to select.
pub fn select_subgoal(goal: &Goal) -> &Literal {
    goal.selected()
        .expect("select_subgoal called on the empty goal")
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Ordinary => write!(f, "{}", self.name),
            VarKind::Input => write!(f, "@{}", self.name),
        }
    }
}

fn write_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    let plain = name == NIL
        || name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
            && name.chars().all(|c| c.is_alphanumeric() || c == '_');
    if plain {
        f.write_str(name)
    } else {
        write!(f, "'{}'", name.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write_name(f, c),
            Term::Func(name, args) if &**name == CONS && args.len() == 2 => {
                f.write_str("[")?;
                write!(f, "{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::Func(n, a) if &**n == CONS && a.len() == 2 => {
                            write!(f, ",{}", a[0])?;
                            tail = &a[1];
                        }
                        Term::Const(c) if &**c == NIL => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_str("]")
            }
            Term::Func(name, args) => {
                write_name(f, name)?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, &self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negative() {
            f.write_str("\\+ ")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("[]");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u32, name: &str) -> Term {
        Term::Var(Var::new(VarId(id), VarKind::Ordinary, name))
    }

    #[test]
    fn sizes() {
        assert_eq!(Term::constant("a").size(), 1);
        // f(X,g(X,f(a,Y)))
        let t = Term::func(
            "f",
            vec![
                v(0, "X"),
                Term::func(
                    "g",
                    vec![v(0, "X"), Term::func("f", vec![Term::constant("a"), v(1, "Y")])],
                ),
            ],
        );
        assert_eq!(t.size(), 7);
        let atom = Atom::new("p", vec![Term::func("f", vec![v(0, "X")])]);
        assert_eq!(atom.size(), 2);
    }

    #[test]
    fn list_display() {
        let l = Term::cons(Term::constant("a"), Term::cons(v(0, "X"), v(1, "T")));
        assert_eq!(l.to_string(), "[a,X|T]");
        let l = Term::cons(Term::constant("a"), Term::nil());
        assert_eq!(l.to_string(), "[a]");
    }

    #[test]
    fn ancestor_chain() {
        let a = Ancestors::empty();
        let b = a.with(SubgoalRef::selected_at(NodeId(0)));
        let c = b.with(SubgoalRef::selected_at(NodeId(2)));
        assert_eq!(c.len(), 2);
        assert!(c.contains(SubgoalRef::selected_at(NodeId(0))));
        assert!(!b.contains(SubgoalRef::selected_at(NodeId(2))));
        assert_eq!(
            c.to_vec(),
            vec![SubgoalRef::selected_at(NodeId(0)), SubgoalRef::selected_at(NodeId(2))]
        );
    }

    #[test]
    fn subsumption() {
        let general = Atom::new("p", vec![v(0, "X"), v(0, "X")]);
        let inst = Atom::new("p", vec![Term::constant("a"), Term::constant("a")]);
        let other = Atom::new("p", vec![Term::constant("a"), Term::constant("b")]);
        assert!(general.subsumes(&inst));
        assert!(!general.subsumes(&other));
    }

    #[test]
    fn select_left_most() {
        let g = Goal::new(vec![
            Literal::positive(Atom::new("a", vec![])),
            Literal::positive(Atom::new("b", vec![])),
        ]);
        assert_eq!(select_subgoal(&g).atom.pred.as_ref(), "a");
    }

    #[test]
    #[should_panic]
    fn select_on_empty_goal() {
        select_subgoal(&Goal::default());
    }
}
