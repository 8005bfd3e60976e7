//! Generalized SLDNF-trees under the depth-first, left-most strategy.
//!
//! A build produces one arena of [`TreeNode`]s holding the main tree and every
//! subsidiary tree created for a ground negative subgoal. Subsidiary trees are
//! joined to their parent node by a negation arc and stop at their first
//! success leaf. Node ids are handed out in visitation order.
//!
//! An [`Observer`] sees every derivation step before the child node exists and
//! can let it through, cut it, or halt the whole build. It may also veto
//! clauses at a node before they are tried.

mod render;
mod search;

use std::time::Duration;

use serde::Serialize;

use crate::ids::{ClauseIdx, NodeId, TreeId};
use crate::program::Program;
use crate::subst::Substitution;
use crate::symbols::SymbolString;
use crate::term::{Goal, Literal, SubgoalRef};

pub use render::{tree_to_dot, tree_to_json};
pub use search::{build_goal_tree, build_tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineLimits {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub time_budget: Duration,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            max_nodes: 1_000_000,
            max_depth: 100_000,
            time_budget: Duration::from_secs(240),
        }
    }
}

impl EngineLimits {
    pub fn nodes(max_nodes: usize) -> Self {
        EngineLimits {
            max_nodes,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeKind {
    /// Resolution step with a program clause.
    Clause { clause: ClauseIdx, mgu: Substitution },
    /// From a node selecting `\+ A` to the root `A` of its subsidiary tree.
    NegationArc,
    /// From a node selecting `\+ A` to the rest of its goal, after the
    /// subsidiary tree failed finitely.
    NegationSucceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub parent: NodeId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn clause(&self) -> Option<ClauseIdx> {
        match self.kind {
            EdgeKind::Clause { clause, .. } => Some(clause),
            _ => None,
        }
    }

    pub fn mgu(&self) -> Option<&Substitution> {
        match &self.kind {
            EdgeKind::Clause { mgu, .. } => Some(mgu),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    /// Created but never expanded.
    Open,
    /// Has at least one child.
    Expanded,
    Success,
    /// No clause applies, or `\+ A` failed.
    Failure,
    /// Every applicable clause was cut or pruned.
    Cut,
    Flounder,
}

/// Outcome of the negative literal `\+ A` solved by a subsidiary tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegationOutcome {
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub id: NodeId,
    pub goal: Goal,
    pub tree: TreeId,
    /// Position on its generalized derivation from the main root.
    pub depth: usize,
    pub parent: Option<Edge>,
    pub status: NodeStatus,
    pub children: Vec<NodeId>,
    /// Clauses whose step at this node was cut by the observer.
    pub cuts: Vec<ClauseIdx>,
    /// Clauses skipped at this node before being tried.
    pub pruned: Vec<ClauseIdx>,
    /// Subsidiary tree built for a negative selected subgoal.
    pub subsidiary: Option<TreeId>,
    pub(crate) selected_symbols: Option<SymbolString>,
}

impl TreeNode {
    pub fn selected(&self) -> Option<&Literal> {
        self.goal.selected()
    }

    pub fn selected_ref(&self) -> SubgoalRef {
        SubgoalRef::selected_at(self.id)
    }

    /// Symbol string of the selected subgoal, cached at creation.
    pub fn selected_symbols(&self) -> Option<&SymbolString> {
        self.selected_symbols.as_ref()
    }

    /// Clauses applied here: those that produced a child or were cut.
    pub fn applied_clauses<'a>(&'a self, tree: &'a GeneralizedTree) -> impl Iterator<Item = ClauseIdx> + 'a {
        self.children
            .iter()
            .filter_map(move |c| tree.node(*c).parent.as_ref().and_then(Edge::clause))
            .chain(self.cuts.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsidiaryTree {
    pub id: TreeId,
    pub root: NodeId,
    /// The node whose negative subgoal this tree solves; `None` for the main tree.
    pub negation_node: Option<NodeId>,
    pub outcome: Option<NegationOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    Nodes,
    Depth,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildStatus {
    /// Every branch was explored, cut or pruned.
    Exhausted,
    /// The observer stopped the build.
    Halted,
    ResourceExceeded(LimitKind),
    /// A non-ground negative subgoal was selected at this node.
    Floundered(NodeId),
}

/// A root-to-node path, crossing negation arcs where present.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Derivation(pub Vec<NodeId>);

impl Derivation {
    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<NodeId> {
        self.0.last().copied()
    }

    /// Clause applied at each node towards the next one on this derivation.
    pub fn applied_clauses(&self, tree: &GeneralizedTree) -> Vec<Option<ClauseIdx>> {
        let mut out: Vec<Option<ClauseIdx>> = self
            .0
            .windows(2)
            .map(|w| tree.node(w[1]).parent.as_ref().and_then(Edge::clause))
            .collect();
        out.push(None);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedTree {
    pub nodes: Vec<TreeNode>,
    /// `trees[0]` is the main tree.
    pub trees: Vec<SubsidiaryTree>,
    pub status: BuildStatus,
}

impl GeneralizedTree {
    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id.0]
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Success leaves of the main tree.
    pub fn success_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.tree == TreeId::MAIN && n.status == NodeStatus::Success)
            .count()
    }

    pub fn derivation_to(&self, id: NodeId) -> Derivation {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(edge) = &self.node(cur).parent {
            cur = edge.parent;
            path.push(cur);
        }
        path.reverse();
        Derivation(path)
    }

    /// Nodes without children, in id order.
    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    pub fn cut_count(&self) -> usize {
        self.nodes.iter().map(|n| n.cuts.len()).sum()
    }

    pub fn describe_step(&self, program: &Program, id: NodeId) -> String {
        let n = self.node(id);
        match n.parent.as_ref().map(|e| &e.kind) {
            Some(EdgeKind::Clause { clause, mgu }) => {
                format!("{} => {}: {} {}", program.label(*clause), n.id, n.goal, mgu)
            }
            Some(EdgeKind::NegationArc) => format!("negation arc => {}: {}", n.id, n.goal),
            Some(EdgeKind::NegationSucceeded) => format!("negation succeeded => {}: {}", n.id, n.goal),
            None => format!("{}: {}", n.id, n.goal),
        }
    }
}

/// The state visible to an [`Observer`]: the tree so far and the current
/// derivation from the main root to the node being expanded.
pub struct SearchView<'a> {
    pub tree: &'a GeneralizedTree,
    pub program: &'a Program,
    /// Nodes of the current derivation; the last one is being expanded.
    pub path: &'a [NodeId],
    /// Clause currently applied at each path node (`None` at the last node
    /// and at negation nodes).
    pub applying: &'a [Option<ClauseIdx>],
}

impl SearchView<'_> {
    pub fn derivation(&self) -> Derivation {
        Derivation(self.path.to_vec())
    }

    pub fn current(&self) -> NodeId {
        *self.path.last().expect("non-empty path")
    }
}

/// A derivation step about to be taken: `node` resolved with `clause`.
pub struct StepProposal<'a> {
    pub node: NodeId,
    pub clause: ClauseIdx,
    pub mgu: &'a Substitution,
    pub resolvent: &'a Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directive {
    Continue,
    /// Drop this step; the node keeps trying its remaining clauses.
    Cut,
    /// Stop building altogether.
    Halt,
}

pub trait Observer {
    /// Return `true` to skip `clause` at `node` without trying it.
    fn skip_clause(&mut self, _view: &SearchView<'_>, _node: NodeId, _clause: ClauseIdx) -> bool {
        false
    }

    fn on_step(&mut self, _view: &SearchView<'_>, _step: &StepProposal<'_>) -> Directive {
        Directive::Continue
    }
}

/// Lets every step through.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl Observer for NoObserver {}
