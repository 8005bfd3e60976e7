//! Termination prediction driven by LP-check and the term-size decrease test.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    build_tree, BuildStatus, Derivation, Directive, EngineLimits, GeneralizedTree, Observer,
    SearchView, StepProposal,
};
use crate::ids::{ClauseIdx, NodeId};
use crate::loops::{has_term_size_decrease, lp_check, LpWitness, SubstitutionTrace};
use crate::program::{Program, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Terminating,
    PredictedTerminating,
    PredictedNonTerminating,
    ResourceExceeded,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Terminating => "terminating",
            Verdict::PredictedTerminating => "predicted-terminating",
            Verdict::PredictedNonTerminating => "predicted-non-terminating",
            Verdict::ResourceExceeded => "resource-exceeded",
        }
    }

    /// Terminating or predicted-terminating.
    pub fn is_terminating(self) -> bool {
        matches!(self, Verdict::Terminating | Verdict::PredictedTerminating)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Pruning {
    None,
    #[default]
    Variants,
    LoopGoals,
}

impl Pruning {
    pub fn as_str(self) -> &'static str {
        match self {
            Pruning::None => "none",
            Pruning::Variants => "variants",
            Pruning::LoopGoals => "loop-goals",
        }
    }
}

impl fmt::Display for Pruning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pruning {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Pruning::None),
            "variants" => Ok(Pruning::Variants),
            "loop-goals" => Ok(Pruning::LoopGoals),
            other => Err(format!("unknown pruning mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictorConfig {
    pub r: usize,
    pub pruning: Pruning,
    pub limits: EngineLimits,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig {
            r: 3,
            pruning: Pruning::Variants,
            limits: EngineLimits::default(),
        }
    }
}

impl PredictorConfig {
    pub fn with_r(r: usize) -> Self {
        PredictorConfig {
            r,
            ..Self::default()
        }
    }

    pub fn pruning(mut self, pruning: Pruning) -> Self {
        self.pruning = pruning;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("floundering: non-ground negative subgoal `{literal}` selected at {node}")]
    Flounder { node: NodeId, literal: String },
    #[error("repetition number must be at least 2, got {0}")]
    BadRepetition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DerivationStep {
    pub node_id: usize,
    pub goal: String,
    /// Label of the clause that produced this node.
    pub clause: Option<String>,
    pub mgu: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub positions: Vec<usize>,
    pub clause: String,
    pub derivation: Vec<DerivationStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutEvent {
    pub node: usize,
    pub clause: String,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PruneEvent {
    pub node: usize,
    pub clause: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub query: String,
    pub verdict: Verdict,
    pub r: usize,
    pub pruning: Pruning,
    pub node_count: usize,
    pub elapsed_ms: u64,
    pub witness: Option<WitnessReport>,
    pub cuts: Vec<CutEvent>,
    pub prunes: Vec<PruneEvent>,
}

impl Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "query:   {}\nverdict: {}\nr: {}  pruning: {}  nodes: {}  time: {} ms\ncuts: {}  prunes: {}\n",
            self.query,
            self.verdict,
            self.r,
            self.pruning,
            self.node_count,
            self.elapsed_ms,
            self.cuts.len(),
            self.prunes.len()
        );
        for c in &self.cuts {
            out.push_str(&format!(
                "  cut {} at N{} (loop goals at {})\n",
                c.clause,
                c.node,
                join_nodes(&c.positions)
            ));
        }
        if let Some(w) = &self.witness {
            out.push_str(&format!(
                "witness: {} applied at {}\n",
                w.clause,
                join_nodes(&w.positions)
            ));
            for s in &w.derivation {
                match (&s.clause, &s.mgu) {
                    (Some(c), Some(m)) => {
                        out.push_str(&format!("  => {c} {m}\n  N{}: {}\n", s.node_id, s.goal))
                    }
                    _ => out.push_str(&format!("  N{}: {}\n", s.node_id, s.goal)),
                }
            }
        }
        out
    }
}

fn join_nodes(ids: &[usize]) -> String {
    ids.iter().map(|i| format!("N{i}")).collect::<Vec<_>>().join(", ")
}

/// The observer running LP-check and pruning during one build.
pub struct LpObserver {
    r: usize,
    pruning: Pruning,
    skip_sets: HashMap<NodeId, BTreeSet<ClauseIdx>>,
    pub cuts: Vec<(NodeId, LpWitness)>,
    pub prunes: Vec<(NodeId, ClauseIdx)>,
    /// Witness without term-size decrease, with the derivation it lies on.
    pub offending: Option<(LpWitness, Derivation)>,
}

impl LpObserver {
    pub fn new(r: usize, pruning: Pruning) -> Self {
        LpObserver {
            r,
            pruning,
            skip_sets: HashMap::new(),
            cuts: Vec::new(),
            prunes: Vec::new(),
            offending: None,
        }
    }

    /// Clause `clause` is being applied at the current node `m`: record it in
    /// the skip sets of every ancestor whose goal `m`'s goal is a loop goal of.
    fn note_applied(&mut self, view: &SearchView<'_>, m: NodeId, clause: ClauseIdx) {
        if self.pruning == Pruning::None {
            return;
        }
        for n in prune_targets(view.tree, m, self.pruning) {
            self.skip_sets.entry(n).or_default().insert(clause);
        }
    }
}

/// Ancestor nodes at which clauses applied at `m` are skipped.
pub fn prune_targets(tree: &GeneralizedTree, m: NodeId, mode: Pruning) -> Vec<NodeId> {
    if mode == Pruning::None {
        return Vec::new();
    }
    let node = tree.node(m);
    let (Some(lm), Some(sm)) = (node.selected(), node.selected_symbols()) else {
        return Vec::new();
    };
    lm.ancestors
        .iter()
        .map(|a| a.node)
        .filter(|&n| {
            let other = tree.node(n);
            let (Some(ln), Some(sn)) = (other.selected(), other.selected_symbols()) else {
                return false;
            };
            ln.atom.same_predicate(&lm.atom)
                && sn.is_projection_of(sm)
                && (mode == Pruning::LoopGoals || sn == sm)
        })
        .collect()
}

/// Clauses to skip at `n` given the clauses applied at nodes of `d` after `n`.
pub fn prune_filter(tree: &GeneralizedTree, n: NodeId, d: &Derivation, mode: Pruning) -> BTreeSet<ClauseIdx> {
    let mut out = BTreeSet::new();
    let applied = d.applied_clauses(tree);
    let Some(start) = d.nodes().iter().position(|&x| x == n) else {
        return out;
    };
    for (k, &m) in d.nodes().iter().enumerate().skip(start + 1) {
        if prune_targets(tree, m, mode).contains(&n) {
            out.extend(applied[k]);
            out.extend(tree.node(m).cuts.iter().copied());
        }
    }
    out
}

impl Observer for LpObserver {
    fn skip_clause(&mut self, _view: &SearchView<'_>, node: NodeId, clause: ClauseIdx) -> bool {
        let skip = self
            .skip_sets
            .get(&node)
            .is_some_and(|s| s.contains(&clause));
        if skip {
            self.prunes.push((node, clause));
        }
        skip
    }

    fn on_step(&mut self, view: &SearchView<'_>, step: &StepProposal<'_>) -> Directive {
        let Some(w) = lp_check(view.tree, view.path, view.applying, step.clause, self.r) else {
            self.note_applied(view, step.node, step.clause);
            return Directive::Continue;
        };
        let d = view.derivation();
        let trace = SubstitutionTrace::of_derivation(view.tree, &d);
        if has_term_size_decrease(&w, &trace, &d, view.tree) {
            self.note_applied(view, step.node, step.clause);
            self.cuts.push((step.node, w));
            Directive::Cut
        } else {
            self.offending = Some((w, d));
            Directive::Halt
        }
    }
}

/// Predicts termination of `query` over `program`.
pub fn predict(program: &Program, query: &Query, cfg: &PredictorConfig) -> Result<Report, PredictError> {
    predict_traced(program, query, cfg).map(|(r, _)| r)
}

/// As [`predict`], also returning the tree as built at verdict time.
pub fn predict_traced(
    program: &Program,
    query: &Query,
    cfg: &PredictorConfig,
) -> Result<(Report, GeneralizedTree), PredictError> {
    if cfg.r < 2 {
        return Err(PredictError::BadRepetition(cfg.r));
    }
    let started = Instant::now();
    let mut obs = LpObserver::new(cfg.r, cfg.pruning);
    let tree = build_tree(program, query, &mut obs, cfg.limits);
    let elapsed_ms = started.elapsed().as_millis() as u64;

    let verdict = match tree.status {
        BuildStatus::Floundered(node) => {
            let literal = tree
                .node(node)
                .selected()
                .map(|l| l.to_string())
                .unwrap_or_default();
            return Err(PredictError::Flounder { node, literal });
        }
        BuildStatus::Halted => Verdict::PredictedNonTerminating,
        BuildStatus::ResourceExceeded(_) => Verdict::ResourceExceeded,
        BuildStatus::Exhausted if obs.cuts.is_empty() => Verdict::Terminating,
        BuildStatus::Exhausted => Verdict::PredictedTerminating,
    };

    let label = |c: ClauseIdx| program.label(c).to_string();
    let witness = obs.offending.as_ref().map(|(w, d)| WitnessReport {
        positions: w.positions.iter().map(|n| n.0).collect(),
        clause: label(w.clause),
        derivation: d
            .nodes()
            .iter()
            .map(|&id| {
                let n = tree.node(id);
                let edge = n.parent.as_ref();
                DerivationStep {
                    node_id: id.0,
                    goal: n.goal.to_string(),
                    clause: edge.and_then(|e| e.clause()).map(label),
                    mgu: edge.and_then(|e| e.mgu()).map(|m| m.to_string()),
                }
            })
            .collect(),
    });
    let report = Report {
        query: query.to_string(),
        verdict,
        r: cfg.r,
        pruning: cfg.pruning,
        node_count: tree.len(),
        elapsed_ms,
        witness,
        cuts: obs
            .cuts
            .iter()
            .map(|(n, w)| CutEvent {
                node: n.0,
                clause: label(w.clause),
                positions: w.positions.iter().map(|p| p.0).collect(),
            })
            .collect(),
        prunes: obs
            .prunes
            .iter()
            .map(|(n, c)| PruneEvent {
                node: n.0,
                clause: label(*c),
            })
            .collect(),
    };
    Ok((report, tree))
}
