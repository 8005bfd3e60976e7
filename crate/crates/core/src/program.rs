//! Clauses, programs and queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::ids::ClauseIdx;
use crate::term::{Atom, Literal, PredKey, Term, Var, VarGen, VarId, VarKind};

/// A program clause `head :- body`. Variables use clause-local ids
/// `0..var_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub label: String,
    pub head: Atom,
    pub body: Vec<Literal>,
    pub var_count: u32,
}

impl Clause {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.var_count == 0
    }
}

/// Standardizes `clause` apart: every variable is replaced by a fresh
/// ordinary variable drawn from `gen`. Deterministic given the generator state.
pub fn rename_apart(clause: &Clause, gen: &mut VarGen) -> Clause {
    if clause.var_count == 0 {
        return clause.clone();
    }
    let base = gen.reserve(clause.var_count);
    let suffix = base;
    let mut rename = |v: &Var| {
        Term::Var(Var::new(
            VarId(base + v.id.0),
            VarKind::Ordinary,
            format!("{}_{}", v.name, suffix),
        ))
    };
    Clause {
        label: clause.label.clone(),
        head: clause.head.map_vars(&mut rename),
        body: clause
            .body
            .iter()
            .map(|l| Literal {
                polarity: l.polarity,
                atom: l.atom.map_vars(&mut rename),
                ancestors: l.ancestors.clone(),
            })
            .collect(),
        var_count: clause.var_count,
    }
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    clauses: Vec<Clause>,
    predicates: BTreeMap<PredKey, Vec<ClauseIdx>>,
    /// Function symbols and constants (arity 0) occurring in clauses.
    signature: BTreeSet<(Arc<str>, usize)>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Self {
        let mut predicates: BTreeMap<PredKey, Vec<ClauseIdx>> = BTreeMap::new();
        let mut signature = BTreeSet::new();
        for (i, c) in clauses.iter().enumerate() {
            predicates.entry(c.head.key()).or_default().push(ClauseIdx(i));
            collect_signature(&c.head, &mut signature);
            for l in &c.body {
                predicates.entry(l.atom.key()).or_default();
                collect_signature(&l.atom, &mut signature);
            }
        }
        Program {
            clauses,
            predicates,
            signature,
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, idx: ClauseIdx) -> &Clause {
        &self.clauses[idx.0]
    }

    pub fn label(&self, idx: ClauseIdx) -> &str {
        &self.clauses[idx.0].label
    }

    /// Clauses for a predicate in source order; undefined predicates have none.
    pub fn clauses_for(&self, key: &PredKey) -> &[ClauseIdx] {
        self.predicates.get(key).map_or(&[], Vec::as_slice)
    }

    /// Every predicate that occurs in the program, defined or not.
    pub fn predicates(&self) -> impl Iterator<Item = &PredKey> {
        self.predicates.keys()
    }

    pub fn is_defined(&self, key: &PredKey) -> bool {
        !self.clauses_for(key).is_empty()
    }

    /// Predicates used in a body but never defined; calls to them fail.
    pub fn undefined_predicates(&self) -> Vec<&PredKey> {
        self.predicates
            .iter()
            .filter(|(_, cs)| cs.is_empty())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn signature(&self) -> &BTreeSet<(Arc<str>, usize)> {
        &self.signature
    }

    pub fn constants(&self) -> Vec<Arc<str>> {
        self.signature
            .iter()
            .filter(|(_, n)| *n == 0)
            .map(|(c, _)| c.clone())
            .collect()
    }

    pub fn functions(&self) -> Vec<(Arc<str>, usize)> {
        self.signature
            .iter()
            .filter(|(_, n)| *n > 0)
            .cloned()
            .collect()
    }

    pub fn find_label(&self, label: &str) -> Option<ClauseIdx> {
        self.clauses
            .iter()
            .position(|c| c.label == label)
            .map(ClauseIdx)
    }
}

fn collect_signature(a: &Atom, out: &mut BTreeSet<(Arc<str>, usize)>) {
    fn walk(t: &Term, out: &mut BTreeSet<(Arc<str>, usize)>) {
        match t {
            Term::Var(_) => {}
            Term::Const(c) => {
                out.insert((c.clone(), 0));
            }
            Term::Func(f, args) => {
                out.insert((f.clone(), args.len()));
                args.iter().for_each(|a| walk(a, out));
            }
        }
    }
    a.args.iter().for_each(|t| walk(t, out));
}

/// One argument of a query: a term, or an input mode standing for any
/// ground term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryArg {
    Term(Term),
    InputMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Concrete,
    Moded,
}

/// A concrete or moded query. Variables use query-local ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub pred: Arc<str>,
    pub args: Vec<QueryArg>,
    pub var_count: u32,
}

impl Query {
    pub fn kind(&self) -> QueryKind {
        if self.args.iter().any(|a| matches!(a, QueryArg::InputMode)) {
            QueryKind::Moded
        } else {
            QueryKind::Concrete
        }
    }

    pub fn is_moded(&self) -> bool {
        self.kind() == QueryKind::Moded
    }

    pub fn key(&self) -> PredKey {
        PredKey {
            name: self.pred.clone(),
            arity: self.args.len(),
        }
    }

    /// Positions of the input modes.
    pub fn input_positions(&self) -> Vec<usize> {
        self.args
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, QueryArg::InputMode))
            .map(|(i, _)| i)
            .collect()
    }

    /// The most general moded query with input modes at `inputs` and
    /// distinct fresh variables elsewhere.
    pub fn most_general(pred: impl Into<Arc<str>>, inputs: &[bool]) -> Query {
        let mut next = 0;
        let args = inputs
            .iter()
            .enumerate()
            .map(|(i, &input)| {
                if input {
                    QueryArg::InputMode
                } else {
                    next += 1;
                    QueryArg::Term(Term::Var(Var::new(
                        VarId(next - 1),
                        VarKind::Ordinary,
                        format!("V{}", i + 1),
                    )))
                }
            })
            .collect();
        Query {
            pred: pred.into(),
            args,
            var_count: next,
        }
    }

    /// The top-goal atom. Query variables and one distinct input variable per
    /// input mode are drawn fresh from `gen`.
    pub fn to_atom(&self, gen: &mut VarGen) -> Atom {
        let base = gen.reserve(self.var_count);
        let inputs = self.input_positions().len();
        let mut seen = 0;
        let args = self
            .args
            .iter()
            .map(|a| match a {
                QueryArg::Term(t) => t.map_vars(&mut |v| {
                    Term::Var(Var::new(VarId(base + v.id.0), VarKind::Ordinary, v.name.clone()))
                }),
                QueryArg::InputMode => {
                    seen += 1;
                    let name = if inputs == 1 {
                        "I".to_string()
                    } else {
                        format!("I{seen}")
                    };
                    Term::Var(gen.fresh(VarKind::Input, name))
                }
            })
            .collect();
        Atom::new(self.pred.clone(), args)
    }

    /// The concrete query obtained by replacing the input modes, in order, by
    /// `grounds`.
    pub fn instantiate(&self, grounds: &[Term]) -> Query {
        let mut it = grounds.iter();
        let args = self
            .args
            .iter()
            .map(|a| match a {
                QueryArg::Term(t) => QueryArg::Term(t.clone()),
                QueryArg::InputMode => QueryArg::Term(
                    it.next()
                        .expect("one ground term per input mode")
                        .clone(),
                ),
            })
            .collect();
        Query {
            pred: self.pred.clone(),
            args,
            var_count: self.var_count,
        }
    }

    /// Mode notation: `i` for input modes, `o` for variables, the term itself
    /// otherwise.
    pub fn mode_string(&self) -> String {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| match a {
                QueryArg::InputMode => "i".to_string(),
                QueryArg::Term(Term::Var(_)) => "o".to_string(),
                QueryArg::Term(t) => t.to_string(),
            })
            .collect();
        if args.is_empty() {
            self.pred.to_string()
        } else {
            format!("{}({})", self.pred, args.join(","))
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "{}", self.pred);
        }
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| match a {
                QueryArg::InputMode => "i".to_string(),
                QueryArg::Term(t) => t.to_string(),
            })
            .collect();
        write!(f, "{}({})", self.pred, args.join(","))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn rename_shares_fresh_variables() {
        let p = parse_program("p(X) :- q(X).").unwrap();
        let mut gen = VarGen::starting_at(10);
        let c = rename_apart(p.clause(ClauseIdx(0)), &mut gen);
        assert_eq!(c.head.args[0], c.body[0].atom.args[0]);
        assert_eq!(c.head.args[0].as_var().unwrap().id, VarId(10));
        assert_eq!(gen.peek(), 11);
    }

    #[test]
    fn rename_ground_clause_unchanged() {
        let p = parse_program("p(a) :- q(b).").unwrap();
        let mut gen = VarGen::new();
        let c = rename_apart(p.clause(ClauseIdx(0)), &mut gen);
        assert_eq!(&c, p.clause(ClauseIdx(0)));
        assert_eq!(gen.peek(), 0);
    }

    #[test]
    fn rename_append_recursive_clause() {
        let p = parse_program(
            "append([],X,X).\nappend([X|Y],U,[X|Z]) :- append(Y,U,Z).",
        )
        .unwrap();
        let mut gen = VarGen::new();
        let c = rename_apart(p.clause(ClauseIdx(1)), &mut gen);
        let head = c.head.var_ids();
        let body = c.body[0].atom.var_ids();
        assert_eq!(head.len(), 4);
        assert!(body.is_subset(&head));
        assert_eq!(body.len(), 3);
        assert_eq!(gen.peek(), 4);
    }

    #[test]
    fn predicate_table() {
        let p = parse_program("p(X) :- q(X), r.\nq(a).").unwrap();
        let q = PredKey { name: "q".into(), arity: 1 };
        let r = PredKey { name: "r".into(), arity: 0 };
        assert_eq!(p.clauses_for(&q), &[ClauseIdx(1)]);
        assert!(p.clauses_for(&r).is_empty());
        assert_eq!(p.undefined_predicates(), vec![&r]);
    }

    #[test]
    fn query_atom_uses_input_variables() {
        let q = Query::most_general("append", &[false, true, false]);
        let mut gen = VarGen::new();
        let atom = q.to_atom(&mut gen);
        assert_eq!(atom.to_string(), "append(V1,@I,V3)");
        assert_eq!(q.mode_string(), "append(o,i,o)");
    }
}
