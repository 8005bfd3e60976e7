//! Reference interpreter and moded-query forest sampler.
//!
//! The interpreter shares no resolution code with [`crate::engine`]: it keeps
//! bindings in a store with a trail and backtracks through choice points. It
//! applies no loop check, so an infinite tree shows up as a spent budget.

use std::rc::Rc;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::program::{Program, Query};
use crate::term::{Atom, Goal, Literal, Polarity, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleOutcome {
    /// The whole search space was explored.
    Halted { successes: usize },
    BudgetExceeded { at: usize },
}

impl OracleOutcome {
    pub fn halted(self) -> bool {
        matches!(self, OracleOutcome::Halted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("floundering: non-ground negative subgoal `{0}`")]
    Flounder(String),
    #[error("the Herbrand universe is empty; add a constant to the program")]
    EmptyUniverse,
    #[error("query `{0}` is not moded")]
    NotModed(String),
    #[error("query `{0}` contains input modes")]
    NotConcrete(String),
}

/// Deepest nesting of negative subgoals before giving up.
const MAX_NEGATION_NESTING: usize = 256;

#[derive(Debug, Clone)]
enum Cell {
    Var(usize),
    Const(Arc<str>),
    Func(Arc<str>, Rc<[Cell]>),
}

#[derive(Debug)]
struct GoalList {
    negative: bool,
    pred: Arc<str>,
    args: Rc<[Cell]>,
    next: Option<Rc<GoalList>>,
}

impl Drop for GoalList {
    // Unlinks the tail iteratively so long goal lists do not overflow the stack.
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut g) => next = g.next.take(),
                Err(_) => break,
            }
        }
    }
}

struct Choice {
    goal: Rc<GoalList>,
    cursor: usize,
    trail_mark: usize,
    var_mark: usize,
}

struct Machine<'p> {
    program: &'p Program,
    store: Vec<Option<Cell>>,
    trail: Vec<usize>,
    nodes: usize,
    budget: usize,
    steps: Vec<String>,
    trace: bool,
}

enum Halt {
    Budget,
    Flounder(String),
}

fn cell_of(t: &Term, offset: usize) -> Cell {
    match t {
        Term::Var(v) => Cell::Var(offset + v.id.0 as usize),
        Term::Const(c) => Cell::Const(c.clone()),
        Term::Func(f, args) => Cell::Func(f.clone(), args.iter().map(|a| cell_of(a, offset)).collect()),
    }
}

impl<'p> Machine<'p> {
    fn new(program: &'p Program, budget: usize) -> Self {
        Machine {
            program,
            store: Vec::new(),
            trail: Vec::new(),
            nodes: 0,
            budget,
            steps: Vec::new(),
            trace: false,
        }
    }

    fn deref(&self, c: &Cell) -> Cell {
        let mut cur = c.clone();
        while let Cell::Var(i) = cur {
            match &self.store[i] {
                Some(next) => cur = next.clone(),
                None => return Cell::Var(i),
            }
        }
        cur
    }

    fn resolve(&self, c: &Cell) -> Cell {
        match self.deref(c) {
            Cell::Func(f, args) => Cell::Func(f, args.iter().map(|a| self.resolve(a)).collect()),
            other => other,
        }
    }

    fn is_ground(&self, c: &Cell) -> bool {
        let mut todo = vec![c.clone()];
        while let Some(c) = todo.pop() {
            match self.deref(&c) {
                Cell::Var(_) => return false,
                Cell::Const(_) => {}
                Cell::Func(_, args) => todo.extend(args.iter().cloned()),
            }
        }
        true
    }

    fn occurs(&self, var: usize, c: &Cell) -> bool {
        let mut todo = vec![c.clone()];
        while let Some(c) = todo.pop() {
            match self.deref(&c) {
                Cell::Var(i) if i == var => return true,
                Cell::Func(_, args) => todo.extend(args.iter().cloned()),
                _ => {}
            }
        }
        false
    }

    fn bind(&mut self, var: usize, c: Cell) {
        self.store[var] = Some(c);
        self.trail.push(var);
    }

    /// Whether `var` occurs in `c` without passing through a variable older
    /// than `fresh`.
    fn occurs_above(&self, var: usize, c: &Cell, fresh: usize) -> bool {
        let mut todo = vec![c.clone()];
        while let Some(c) = todo.pop() {
            match c {
                Cell::Var(i) if i == var => return true,
                Cell::Var(i) if i < fresh => {}
                Cell::Var(i) => todo.extend(self.store[i].iter().cloned()),
                Cell::Func(_, args) => todo.extend(args.iter().cloned()),
                Cell::Const(_) => {}
            }
        }
        false
    }

    /// Collects the unbound variables of `c` not older than `fresh`, stopping
    /// at older variables.
    fn fresh_vars(&self, c: &Cell, fresh: usize, out: &mut Vec<usize>) {
        let mut todo = vec![c.clone()];
        while let Some(c) = todo.pop() {
            match c {
                Cell::Var(i) if i < fresh => {}
                Cell::Var(i) => match &self.store[i] {
                    Some(b) => todo.push(b.clone()),
                    None => out.push(i),
                },
                Cell::Func(_, args) => todo.extend(args.iter().cloned()),
                Cell::Const(_) => {}
            }
        }
    }

    /// Unifies goal arguments `a` with the head arguments `b` of a clause
    /// renamed from `fresh` upwards.
    ///
    /// `exposed` holds the fresh variables reachable from older ones. Any
    /// other fresh variable can only occur in the head-side part of a term,
    /// so its occurs check never walks into goal-side terms.
    fn unify_head(&mut self, a: &[Cell], b: &[Cell], fresh: usize) -> bool {
        let mut todo: Vec<(Cell, Cell)> = a.iter().cloned().zip(b.iter().cloned()).rev().collect();
        let mut exposed: Vec<usize> = Vec::new();
        while let Some((a, b)) = todo.pop() {
            let (a, b) = (self.deref(&a), self.deref(&b));
            match (&a, &b) {
                (Cell::Var(i), Cell::Var(j)) if i == j => {}
                (Cell::Var(i), Cell::Var(j)) => {
                    let (young, old) = if i > j { (*i, *j) } else { (*j, *i) };
                    if old >= fresh && exposed.contains(&young) {
                        exposed.push(old);
                    }
                    self.bind(young, Cell::Var(old));
                }
                (Cell::Var(v), t) | (t, Cell::Var(v)) => {
                    let v = *v;
                    let cyclic = if v < fresh || exposed.contains(&v) {
                        self.occurs(v, t)
                    } else {
                        self.occurs_above(v, t, fresh)
                    };
                    if cyclic {
                        return false;
                    }
                    if v < fresh {
                        self.fresh_vars(t, fresh, &mut exposed);
                    }
                    self.bind(v, t.clone());
                }
                (Cell::Const(c), Cell::Const(d)) if c == d => {}
                (Cell::Func(f, xs), Cell::Func(g, ys)) if f == g && xs.len() == ys.len() => {
                    todo.extend(xs.iter().cloned().zip(ys.iter().cloned()).rev());
                }
                _ => return false,
            }
        }
        true
    }

    fn undo(&mut self, trail_mark: usize, var_mark: usize) {
        while self.trail.len() > trail_mark {
            let v = self.trail.pop().expect("trail entry");
            self.store[v] = None;
        }
        self.store.truncate(var_mark);
    }

    fn fresh(&mut self, n: usize) -> usize {
        let base = self.store.len();
        self.store.resize(base + n, None);
        base
    }

    fn show(&self, pred: &str, args: &[Cell]) -> String {
        fn go(m: &Machine<'_>, c: &Cell, out: &mut String) {
            match m.deref(c) {
                Cell::Var(i) => out.push_str(&format!("_G{i}")),
                Cell::Const(c) => out.push_str(&c),
                Cell::Func(f, args) => {
                    out.push_str(&f);
                    out.push('(');
                    for (k, a) in args.iter().enumerate() {
                        if k > 0 {
                            out.push(',');
                        }
                        go(m, a, out);
                    }
                    out.push(')');
                }
            }
        }
        let mut out = pred.to_string();
        if !args.is_empty() {
            out.push('(');
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                go(self, a, &mut out);
            }
            out.push(')');
        }
        out
    }

    fn count_node(&mut self) -> Result<(), Halt> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(Halt::Budget)
        } else {
            Ok(())
        }
    }

    /// Explores the tree of `goal` depth-first. Stops at the first success
    /// when `first_only`. Returns the number of successes found.
    fn solve(&mut self, goal: Option<Rc<GoalList>>, first_only: bool, nesting: usize) -> Result<usize, Halt> {
        if nesting > MAX_NEGATION_NESTING {
            return Err(Halt::Budget);
        }
        let mut successes = 0;
        let mut stack: Vec<Choice> = Vec::new();
        let base_trail = self.trail.len();
        let base_vars = self.store.len();
        if let Some(found) = self.arrive(goal, &mut stack, nesting)? {
            successes += found;
            if first_only && successes > 0 {
                self.undo(base_trail, base_vars);
                return Ok(successes);
            }
        }
        while let Some(top) = stack.last_mut() {
            let g = top.goal.clone();
            let (trail_mark, var_mark) = (top.trail_mark, top.var_mark);
            let clauses = self.program.clauses_for(&crate::term::PredKey {
                name: g.pred.clone(),
                arity: g.args.len(),
            });
            let Some(&ci) = clauses.get(top.cursor) else {
                stack.pop();
                continue;
            };
            top.cursor += 1;
            self.undo(trail_mark, var_mark);
            let clause = self.program.clause(ci);
            let offset = self.fresh(clause.var_count as usize);
            let head: Vec<Cell> = clause.head.args.iter().map(|t| cell_of(t, offset)).collect();
            if !self.unify_head(&g.args, &head, offset) {
                continue;
            }
            self.count_node()?;
            let mut next = g.next.clone();
            for l in clause.body.iter().rev() {
                next = Some(Rc::new(GoalList {
                    negative: l.polarity == Polarity::Negative,
                    pred: l.atom.pred.clone(),
                    args: l.atom.args.iter().map(|t| cell_of(t, offset)).collect(),
                    next,
                }));
            }
            if self.trace {
                let line = match &next {
                    Some(n) => self.show(&n.pred, &n.args),
                    None => "[]".to_string(),
                };
                self.steps.push(format!("{} => {line}", clause.label));
            }
            if let Some(found) = self.arrive(next, &mut stack, nesting)? {
                successes += found;
                if first_only && successes > 0 {
                    break;
                }
            }
        }
        self.undo(base_trail, base_vars);
        Ok(successes)
    }

    /// Handles a newly reached goal: success, negative subgoals, or a new
    /// choice point. Returns `Some(1)` on success.
    fn arrive(
        &mut self,
        mut goal: Option<Rc<GoalList>>,
        stack: &mut Vec<Choice>,
        nesting: usize,
    ) -> Result<Option<usize>, Halt> {
        loop {
            let Some(g) = goal else {
                return Ok(Some(1));
            };
            if !g.negative {
                stack.push(Choice {
                    goal: g,
                    cursor: 0,
                    trail_mark: self.trail.len(),
                    var_mark: self.store.len(),
                });
                return Ok(None);
            }
            if !g.args.iter().all(|a| self.is_ground(a)) {
                return Err(Halt::Flounder(format!("\\+ {}", self.show(&g.pred, &g.args))));
            }
            let inner = Rc::new(GoalList {
                negative: false,
                pred: g.pred.clone(),
                args: g.args.iter().map(|a| self.resolve(a)).collect(),
                next: None,
            });
            self.count_node()?;
            if self.solve(Some(inner), true, nesting + 1)? > 0 {
                return Ok(None);
            }
            self.count_node()?;
            goal = g.next.clone();
        }
    }
}

fn goal_list(goal: &Goal, offset: usize) -> Option<Rc<GoalList>> {
    let mut next = None;
    for l in goal.literals().iter().rev() {
        next = Some(Rc::new(GoalList {
            negative: l.is_negative(),
            pred: l.atom.pred.clone(),
            args: l.atom.args.iter().map(|t| cell_of(t, offset)).collect(),
            next,
        }));
    }
    next
}

fn var_span(goal: &Goal) -> usize {
    let mut n = 0;
    for l in goal.literals() {
        l.atom.for_each_var(&mut |v| n = n.max(v.id.0 as usize + 1));
    }
    n
}

/// Plain depth-first SLDNF evaluation of `goal` with at most `budget`
/// derivation steps.
pub fn bounded_interpret(program: &Program, goal: &Goal, budget: usize) -> Result<OracleOutcome, OracleError> {
    run(program, goal, budget, false).map(|(o, _)| o)
}

/// As [`bounded_interpret`], also returning one line per derivation step in
/// visitation order.
pub fn bounded_interpret_traced(
    program: &Program,
    goal: &Goal,
    budget: usize,
) -> Result<(OracleOutcome, Vec<String>), OracleError> {
    run(program, goal, budget, true)
}

fn run(program: &Program, goal: &Goal, budget: usize, trace: bool) -> Result<(OracleOutcome, Vec<String>), OracleError> {
    let mut m = Machine::new(program, budget);
    m.trace = trace;
    m.fresh(var_span(goal));
    m.nodes = 1;
    let outcome = match m.solve(goal_list(goal, 0), false, 0) {
        Ok(successes) => OracleOutcome::Halted { successes },
        Err(Halt::Budget) => OracleOutcome::BudgetExceeded { at: m.nodes },
        Err(Halt::Flounder(lit)) => return Err(OracleError::Flounder(lit)),
    };
    Ok((outcome, m.steps))
}

/// Runs a concrete query.
pub fn interpret_query(program: &Program, query: &Query, budget: usize) -> Result<OracleOutcome, OracleError> {
    if query.is_moded() {
        return Err(OracleError::NotConcrete(query.to_string()));
    }
    let atom = query.to_atom(&mut crate::term::VarGen::new());
    bounded_interpret(program, &Goal::new(vec![Literal::positive(atom)]), budget)
}

/// Ground terms of `HU(P)` up to a nesting depth, constants having depth 0.
#[derive(Debug, Clone)]
pub struct HerbrandEnumerator {
    constants: Vec<Arc<str>>,
    functions: Vec<(Arc<str>, usize)>,
    depth: usize,
}

impl HerbrandEnumerator {
    pub fn new(program: &Program, depth: usize) -> Result<Self, OracleError> {
        let constants = program.constants();
        if constants.is_empty() {
            return Err(OracleError::EmptyUniverse);
        }
        Ok(HerbrandEnumerator {
            constants,
            functions: program.functions(),
            depth,
        })
    }

    /// All terms of depth at most the bound: by depth, then by symbol, then
    /// by arguments in order.
    pub fn terms(&self) -> Vec<Term> {
        let mut all: Vec<Term> = self.constants.iter().map(|c| Term::constant(c.clone())).collect();
        let mut frontier_start = 0;
        for _ in 0..self.depth {
            let mut layer = Vec::new();
            for (f, arity) in &self.functions {
                for args in tuples(&all, *arity) {
                    if args[..].iter().any(|a| all[frontier_start..].contains(a)) {
                        layer.push(Term::func(f.clone(), args));
                    }
                }
            }
            frontier_start = all.len();
            all.extend(layer);
        }
        all
    }
}

fn tuples(pool: &[Term], n: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pool.iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Grounds every input mode of `query` with every term of depth at most `d`
/// and runs the interpreter on each instance.
pub fn sample_forest(
    program: &Program,
    query: &Query,
    d: usize,
    budget: usize,
) -> Result<Vec<(Query, OracleOutcome)>, OracleError> {
    if !query.is_moded() {
        return Err(OracleError::NotModed(query.to_string()));
    }
    let terms = HerbrandEnumerator::new(program, d)?.terms();
    let k = query.input_positions().len();
    tuples(&terms, k)
        .into_par_iter()
        .map(|grounds| {
            let inst = query.instantiate(&grounds);
            interpret_query(program, &inst, budget).map(|o| (inst, o))
        })
        .collect()
}

/// Convenience for tests: the instance atom text.
pub fn instance_text(q: &Query) -> String {
    let atom: Atom = q.to_atom(&mut crate::term::VarGen::new());
    atom.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};

    #[test]
    fn loop_exceeds_budget() {
        let p = parse_program("q :- q.").unwrap();
        let out = interpret_query(&p, &parse_query("q").unwrap(), 1000).unwrap();
        assert!(!out.halted());
    }

    #[test]
    fn two_step_proof() {
        let p = parse_program("p(a).\np(f(X)) :- p(X).").unwrap();
        let out = interpret_query(&p, &parse_query("p(f(a))").unwrap(), 1000).unwrap();
        assert_eq!(out, OracleOutcome::Halted { successes: 1 });
    }

    #[test]
    fn empty_universe() {
        let p = parse_program("f(X) :- g(s(X)).").unwrap();
        assert_eq!(
            sample_forest(&p, &parse_query("f(i)").unwrap(), 2, 10).unwrap_err(),
            OracleError::EmptyUniverse
        );
    }

    #[test]
    fn depth_zero_is_constants() {
        let p = parse_program("p(a).\np(f(X)) :- p(X).").unwrap();
        let terms = HerbrandEnumerator::new(&p, 0).unwrap().terms();
        assert_eq!(terms, vec![Term::constant("a")]);
    }

    fn successes(src: &str, goal: &str) -> OracleOutcome {
        let p = parse_program(src).unwrap();
        interpret_query(&p, &parse_query(goal).unwrap(), 1000).unwrap()
    }

    #[test]
    fn occurs_check_through_head() {
        assert_eq!(successes("p(X, f(X)).", "p(Y, Y)"), OracleOutcome::Halted { successes: 0 });
        assert_eq!(successes("p(X, X).", "p(Y, f(Y))"), OracleOutcome::Halted { successes: 0 });
        assert_eq!(successes("p(X, Y, X) :- q.\nq.", "p(Z, Z, f(Z))"), OracleOutcome::Halted { successes: 0 });
        assert_eq!(successes("p(f(X), X).", "p(Y, Z)"), OracleOutcome::Halted { successes: 1 });
    }

    #[test]
    fn occurs_check_through_exposed_variable() {
        // Z is bound to g(X) first, then X must not take a term containing Z.
        let src = "p(g(X), X).";
        assert_eq!(successes(src, "p(Z, f(Z))"), OracleOutcome::Halted { successes: 0 });
        assert_eq!(successes(src, "p(Z, f(W))"), OracleOutcome::Halted { successes: 1 });
    }

    #[test]
    fn long_chains_stay_linear() {
        let p = parse_program("add(s(X), Y, s(Z)) :- add(X, Y, Z).\nadd(0, Y, Y).").unwrap();
        let out = interpret_query(&p, &parse_query("add(A, A, B)").unwrap(), 20_000).unwrap();
        assert_eq!(out, OracleOutcome::BudgetExceeded { at: 20_001 });
    }
}
