use std::time::Instant;

use crate::ids::{ClauseIdx, NodeId, TreeId};
use crate::program::{rename_apart, Program, Query};
use crate::subst::{unify, Substitution};
use crate::symbols::SymbolString;
use crate::term::{Goal, Literal, Polarity, SubgoalRef, VarGen};

use super::{
    BuildStatus, Directive, Edge, EdgeKind, EngineLimits, GeneralizedTree, LimitKind,
    NegationOutcome, NodeStatus, Observer, SearchView, StepProposal, SubsidiaryTree, TreeNode,
};

#[derive(Debug, Clone, Copy)]
enum Frame {
    Resolve { node: NodeId, cursor: usize },
    Negation { node: NodeId, stage: NegStage },
}

impl Frame {
    fn node(&self) -> NodeId {
        match *self {
            Frame::Resolve { node, .. } | Frame::Negation { node, .. } => node,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NegStage {
    Pending,
    Waiting(TreeId),
    Done,
}

enum Next {
    Child(NodeId),
    Exhausted,
}

type Stop = BuildStatus;

/// Builds the generalized SLDNF-tree of `query` depth-first, left to right,
/// consulting `observer` at every step.
pub fn build_tree<O: Observer + ?Sized>(
    program: &Program,
    query: &Query,
    observer: &mut O,
    limits: EngineLimits,
) -> GeneralizedTree {
    let mut gen = VarGen::new();
    let atom = query.to_atom(&mut gen);
    Search::new(program, observer, limits, gen).run(Goal::new(vec![Literal::positive(atom)]))
}

/// Like [`build_tree`] but starting from an arbitrary goal.
pub fn build_goal_tree<O: Observer + ?Sized>(
    program: &Program,
    goal: Goal,
    observer: &mut O,
    limits: EngineLimits,
) -> GeneralizedTree {
    let mut next = 0;
    for l in goal.literals() {
        l.atom.for_each_var(&mut |v| next = next.max(v.id.0 + 1));
    }
    Search::new(program, observer, limits, VarGen::starting_at(next)).run(goal)
}

struct Search<'a, O: Observer + ?Sized> {
    program: &'a Program,
    observer: &'a mut O,
    limits: EngineLimits,
    started: Instant,
    ticks: u64,
    gen: VarGen,
    tree: GeneralizedTree,
    frames: Vec<Frame>,
    path: Vec<NodeId>,
    applying: Vec<Option<ClauseIdx>>,
}

impl<'a, O: Observer + ?Sized> Search<'a, O> {
    fn new(program: &'a Program, observer: &'a mut O, limits: EngineLimits, gen: VarGen) -> Self {
        Search {
            program,
            observer,
            limits,
            started: Instant::now(),
            ticks: 0,
            gen,
            tree: GeneralizedTree {
                nodes: Vec::new(),
                trees: Vec::new(),
                status: BuildStatus::Exhausted,
            },
            frames: Vec::new(),
            path: Vec::new(),
            applying: Vec::new(),
        }
    }

    fn run(mut self, goal: Goal) -> GeneralizedTree {
        let status = match self.drive(goal) {
            Ok(()) => BuildStatus::Exhausted,
            Err(stop) => stop,
        };
        self.tree.status = status;
        self.tree
    }

    fn drive(&mut self, goal: Goal) -> Result<(), Stop> {
        let root = self.alloc(goal, TreeId::MAIN, 0, None)?;
        self.tree.trees.push(SubsidiaryTree {
            id: TreeId::MAIN,
            root,
            negation_node: None,
            outcome: None,
        });
        self.enter(root)?;
        while let Some(top) = self.frames.last().copied() {
            self.tick()?;
            match top {
                Frame::Resolve { node, .. } => match self.next_child(node)? {
                    Next::Child(child) => self.enter(child)?,
                    Next::Exhausted => self.pop(),
                },
                Frame::Negation { node, stage } => match stage {
                    NegStage::Pending => self.start_negation(node)?,
                    NegStage::Waiting(tid) => self.negation_succeeded(node, tid)?,
                    NegStage::Done => self.pop(),
                },
            }
        }
        Ok(())
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.ticks += 1;
        if self.ticks % 64 == 0 && self.started.elapsed() > self.limits.time_budget {
            return Err(BuildStatus::ResourceExceeded(LimitKind::Time));
        }
        Ok(())
    }

    fn alloc(
        &mut self,
        goal: Goal,
        tree: TreeId,
        depth: usize,
        parent: Option<Edge>,
    ) -> Result<NodeId, Stop> {
        if self.tree.nodes.len() >= self.limits.max_nodes {
            return Err(BuildStatus::ResourceExceeded(LimitKind::Nodes));
        }
        let id = NodeId(self.tree.nodes.len());
        let selected_symbols = goal
            .selected()
            .filter(|l| !l.is_negative())
            .map(|l| SymbolString::of_atom(&l.atom));
        self.tree.nodes.push(TreeNode {
            id,
            goal,
            tree,
            depth,
            parent,
            status: NodeStatus::Open,
            children: Vec::new(),
            cuts: Vec::new(),
            pruned: Vec::new(),
            subsidiary: None,
            selected_symbols,
        });
        Ok(id)
    }

    /// Makes `id` the node under expansion, or settles it as a success leaf.
    fn enter(&mut self, id: NodeId) -> Result<(), Stop> {
        let node = &mut self.tree.nodes[id.0];
        let Some(sel) = node.goal.selected() else {
            node.status = NodeStatus::Success;
            let tree = node.tree;
            if tree != TreeId::MAIN {
                self.subsidiary_success(tree)?;
            }
            return Ok(());
        };
        if node.depth > self.limits.max_depth {
            return Err(BuildStatus::ResourceExceeded(LimitKind::Depth));
        }
        let frame = if sel.is_negative() {
            Frame::Negation {
                node: id,
                stage: NegStage::Pending,
            }
        } else {
            Frame::Resolve { node: id, cursor: 0 }
        };
        self.frames.push(frame);
        self.path.push(id);
        self.applying.push(None);
        Ok(())
    }

    fn pop(&mut self) {
        if let Some(frame) = self.frames.pop() {
            self.path.pop();
            self.applying.pop();
            self.settle(frame.node());
        }
        if let Some(last) = self.applying.last_mut() {
            *last = None;
        }
    }

    fn settle(&mut self, id: NodeId) {
        let node = &mut self.tree.nodes[id.0];
        if node.status != NodeStatus::Open {
            return;
        }
        node.status = if !node.children.is_empty() {
            NodeStatus::Expanded
        } else if !node.cuts.is_empty() || !node.pruned.is_empty() {
            NodeStatus::Cut
        } else {
            NodeStatus::Failure
        };
    }

    fn next_child(&mut self, node: NodeId) -> Result<Next, Stop> {
        let lit = self.tree.nodes[node.0].goal.0[0].clone();
        let cands = self.program.clauses_for(&lit.atom.key());
        loop {
            let Some(Frame::Resolve { cursor, .. }) = self.frames.last_mut() else {
                unreachable!("resolve frame on top");
            };
            let Some(&clause) = cands.get(*cursor) else {
                return Ok(Next::Exhausted);
            };
            *cursor += 1;

            let view = SearchView {
                tree: &self.tree,
                program: self.program,
                path: &self.path,
                applying: &self.applying,
            };
            if self.observer.skip_clause(&view, node, clause) {
                self.tree.nodes[node.0].pruned.push(clause);
                continue;
            }
            let renamed = rename_apart(self.program.clause(clause), &mut self.gen);
            let Ok(mgu) = unify(&lit.atom, &renamed.head) else {
                continue;
            };
            let resolvent = resolvent(&self.tree.nodes[node.0].goal, node, &renamed.body, &mgu);
            let view = SearchView {
                tree: &self.tree,
                program: self.program,
                path: &self.path,
                applying: &self.applying,
            };
            let directive = self.observer.on_step(
                &view,
                &StepProposal {
                    node,
                    clause,
                    mgu: &mgu,
                    resolvent: &resolvent,
                },
            );
            match directive {
                Directive::Continue => {}
                Directive::Cut => {
                    self.tree.nodes[node.0].cuts.push(clause);
                    continue;
                }
                Directive::Halt => return Err(BuildStatus::Halted),
            }
            let depth = self.tree.nodes[node.0].depth + 1;
            let tree = self.tree.nodes[node.0].tree;
            let edge = Edge {
                parent: node,
                kind: EdgeKind::Clause { clause, mgu },
            };
            let child = self.alloc(resolvent, tree, depth, Some(edge))?;
            self.tree.nodes[node.0].children.push(child);
            *self.applying.last_mut().expect("path node") = Some(clause);
            return Ok(Next::Child(child));
        }
    }

    fn start_negation(&mut self, node: NodeId) -> Result<(), Stop> {
        let n = &self.tree.nodes[node.0];
        let lit = &n.goal.0[0];
        if !lit.atom.is_ground() {
            self.tree.nodes[node.0].status = NodeStatus::Flounder;
            return Err(BuildStatus::Floundered(node));
        }
        let root_goal = Goal::new(vec![Literal {
            polarity: Polarity::Positive,
            atom: lit.atom.clone(),
            ancestors: lit.ancestors.clone(),
        }]);
        let depth = n.depth + 1;
        let tid = TreeId(self.tree.trees.len());
        let root = self.alloc(
            root_goal,
            tid,
            depth,
            Some(Edge {
                parent: node,
                kind: EdgeKind::NegationArc,
            }),
        )?;
        self.tree.trees.push(SubsidiaryTree {
            id: tid,
            root,
            negation_node: Some(node),
            outcome: None,
        });
        self.tree.nodes[node.0].subsidiary = Some(tid);
        self.set_stage(NegStage::Waiting(tid));
        self.enter(root)
    }

    /// The subsidiary tree `tid` finished without a success leaf, so the
    /// negative subgoal holds and the rest of the goal is carried on.
    fn negation_succeeded(&mut self, node: NodeId, tid: TreeId) -> Result<(), Stop> {
        self.tree.trees[tid.0].outcome = Some(NegationOutcome::Succeeded);
        self.set_stage(NegStage::Done);
        let n = &self.tree.nodes[node.0];
        let rest = Goal::new(n.goal.0[1..].to_vec());
        let (tree, depth) = (n.tree, n.depth + 1);
        let child = self.alloc(
            rest,
            tree,
            depth,
            Some(Edge {
                parent: node,
                kind: EdgeKind::NegationSucceeded,
            }),
        )?;
        self.tree.nodes[node.0].children.push(child);
        self.enter(child)
    }

    /// First success in subsidiary tree `tid`: the negative subgoal fails.
    /// Untried alternatives inside the tree are recorded as open nodes and the
    /// tree is abandoned.
    fn subsidiary_success(&mut self, tid: TreeId) -> Result<(), Stop> {
        let k = self
            .frames
            .iter()
            .rposition(|f| matches!(f, Frame::Negation { stage: NegStage::Waiting(t), .. } if *t == tid))
            .expect("negation frame for subsidiary tree");
        for i in (k + 1..self.frames.len()).rev() {
            if let Frame::Resolve { node, cursor } = self.frames[i] {
                self.materialize_rest(node, cursor)?;
            }
            self.settle(self.frames[i].node());
        }
        self.frames.truncate(k + 1);
        self.path.truncate(k + 1);
        self.applying.truncate(k + 1);
        self.applying[k] = None;
        self.tree.trees[tid.0].outcome = Some(NegationOutcome::Failed);
        self.set_stage(NegStage::Done);
        Ok(())
    }

    fn materialize_rest(&mut self, node: NodeId, cursor: usize) -> Result<(), Stop> {
        let lit = self.tree.nodes[node.0].goal.0[0].clone();
        let cands = self.program.clauses_for(&lit.atom.key());
        for &clause in cands.iter().skip(cursor) {
            let renamed = rename_apart(self.program.clause(clause), &mut self.gen);
            let Ok(mgu) = unify(&lit.atom, &renamed.head) else {
                continue;
            };
            let n = &self.tree.nodes[node.0];
            let resolvent = resolvent(&n.goal, node, &renamed.body, &mgu);
            let (tree, depth) = (n.tree, n.depth + 1);
            let child = self.alloc(
                resolvent,
                tree,
                depth,
                Some(Edge {
                    parent: node,
                    kind: EdgeKind::Clause { clause, mgu },
                }),
            )?;
            self.tree.nodes[node.0].children.push(child);
        }
        Ok(())
    }

    fn set_stage(&mut self, new: NegStage) {
        let k = self
            .frames
            .iter()
            .rposition(|f| matches!(f, Frame::Negation { .. }))
            .expect("negation frame");
        if let Frame::Negation { stage, .. } = &mut self.frames[k] {
            *stage = new;
        }
    }
}

/// `(B1,...,Bm, L2,...,Lk)θ` for the clause body `B1..Bm` resolved against the
/// selected literal of `goal`. Body literals get the selected literal and its
/// ancestors as their ancestor set.
fn resolvent(goal: &Goal, node: NodeId, body: &[Literal], mgu: &Substitution) -> Goal {
    let sel = &goal.0[0];
    let anc = sel.ancestors.with(SubgoalRef::selected_at(node));
    let mut lits = Vec::with_capacity(body.len() + goal.len() - 1);
    lits.extend(body.iter().map(|l| Literal {
        polarity: l.polarity,
        atom: mgu.apply_atom(&l.atom),
        ancestors: anc.clone(),
    }));
    lits.extend(goal.0[1..].iter().map(|l| mgu.apply_literal(l)));
    Goal(lits)
}
