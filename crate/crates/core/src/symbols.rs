//! Symbol strings, projection and variant tests.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::term::{Atom, Term, VarId};

/// One element of a symbol string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// Placeholder for any variable occurrence, ordinary or input.
    Var,
    Name(Arc<str>),
}

/// Left-to-right sequence of the predicate, function and constant symbols of
/// a term or atom, with each variable occurrence replaced by [`Symbol::Var`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SymbolString(pub Vec<Symbol>);

impl SymbolString {
    pub fn of_term(t: &Term) -> Self {
        let mut out = Vec::with_capacity(t.size());
        push_term(t, &mut out);
        SymbolString(out)
    }

    pub fn of_atom(a: &Atom) -> Self {
        let mut out = Vec::with_capacity(a.size() + 1);
        out.push(Symbol::Name(a.pred.clone()));
        for t in &a.args {
            push_term(t, &mut out);
        }
        SymbolString(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff `self` can be obtained from `other` by deleting zero or more
    /// elements.
    pub fn is_projection_of(&self, other: &SymbolString) -> bool {
        is_projection(self, other)
    }
}

fn push_term(t: &Term, out: &mut Vec<Symbol>) {
    match t {
        Term::Var(_) => out.push(Symbol::Var),
        Term::Const(c) => out.push(Symbol::Name(c.clone())),
        Term::Func(f, args) => {
            out.push(Symbol::Name(f.clone()));
            for a in args {
                push_term(a, out);
            }
        }
    }
}

pub fn symbol_string(t: &Term) -> SymbolString {
    SymbolString::of_term(t)
}

pub fn atom_symbol_string(a: &Atom) -> SymbolString {
    SymbolString::of_atom(a)
}

/// Order-preserving subsequence test.
pub fn is_projection(s1: &SymbolString, s2: &SymbolString) -> bool {
    if s1.len() > s2.len() {
        return false;
    }
    let mut rest = s2.0.iter();
    s1.0.iter().all(|sym| rest.any(|other| other == sym))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantMode {
    /// A variable-renaming bijection exists.
    Exact,
    /// The atoms have equal symbol strings.
    SymbolString,
}

pub fn is_variant(a: &Atom, b: &Atom, mode: VariantMode) -> bool {
    match mode {
        VariantMode::SymbolString => SymbolString::of_atom(a) == SymbolString::of_atom(b),
        VariantMode::Exact => {
            if !a.same_predicate(b) {
                return false;
            }
            let mut fwd = HashMap::new();
            let mut back = HashMap::new();
            a.args
                .iter()
                .zip(&b.args)
                .all(|(x, y)| renames(x, y, &mut fwd, &mut back))
        }
    }
}

fn renames(
    a: &Term,
    b: &Term,
    fwd: &mut HashMap<VarId, VarId>,
    back: &mut HashMap<VarId, VarId>,
) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let f = *fwd.entry(x.id).or_insert(y.id);
            let g = *back.entry(y.id).or_insert(x.id);
            f == y.id && g == x.id
        }
        (Term::Const(c), Term::Const(d)) => c == d,
        (Term::Func(f, xs), Term::Func(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| renames(x, y, fwd, back))
        }
        _ => false,
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\u{b7}")?;
            }
            match s {
                Symbol::Var => f.write_str("\u{1d4b3}")?,
                Symbol::Name(n) => f.write_str(n)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{Var, VarKind};

    fn var(id: u32, kind: VarKind) -> Term {
        Term::Var(Var::new(VarId(id), kind, format!("V{id}")))
    }

    fn name(s: &str) -> Symbol {
        Symbol::Name(s.into())
    }

    #[test]
    fn constant_string() {
        assert_eq!(symbol_string(&Term::constant("a")).0, vec![name("a")]);
    }

    #[test]
    fn nested_string() {
        // f(X,g(X,f(a,Y)))
        let x = var(0, VarKind::Ordinary);
        let y = var(1, VarKind::Ordinary);
        let t = Term::func(
            "f",
            vec![
                x.clone(),
                Term::func("g", vec![x, Term::func("f", vec![Term::constant("a"), y])]),
            ],
        );
        assert_eq!(
            symbol_string(&t).0,
            vec![
                name("f"),
                Symbol::Var,
                name("g"),
                Symbol::Var,
                name("f"),
                name("a"),
                Symbol::Var
            ]
        );
    }

    #[test]
    fn kinds_collapse() {
        let a = Atom::new("p", vec![Term::func("f", vec![var(0, VarKind::Input)])]);
        assert_eq!(
            atom_symbol_string(&a).0,
            vec![name("p"), name("f"), Symbol::Var]
        );
    }

    #[test]
    fn projection_examples() {
        let px = SymbolString(vec![name("p"), Symbol::Var]);
        let pfx = SymbolString(vec![name("p"), name("f"), Symbol::Var]);
        assert!(is_projection(&px, &pfx));
        assert!(is_projection(&pfx, &pfx));
        assert!(!is_projection(&pfx, &px));
    }

    #[test]
    fn variant_examples() {
        let o = VarKind::Ordinary;
        let pxy = Atom::new("p", vec![var(0, o), var(1, o)]);
        let puv = Atom::new("p", vec![var(2, o), var(3, o)]);
        let pxx = Atom::new("p", vec![var(0, o), var(0, o)]);
        for mode in [VariantMode::Exact, VariantMode::SymbolString] {
            assert!(is_variant(&pxy, &puv, mode));
            assert!(!is_variant(
                &Atom::new("p", vec![Term::constant("a")]),
                &Atom::new("p", vec![Term::constant("b")]),
                mode
            ));
        }
        assert!(!is_variant(&pxx, &puv, VariantMode::Exact));
        assert!(is_variant(&pxx, &puv, VariantMode::SymbolString));
    }
}
