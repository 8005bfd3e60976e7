use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::program::Program;

use super::{BuildStatus, EdgeKind, GeneralizedTree, NodeStatus};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Negation arcs are dashed; cut and pruned clauses hang
/// off their node as dotted markers.
pub fn tree_to_dot(tree: &GeneralizedTree, program: &Program) -> String {
    let mut out = String::from("digraph sldnf {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in &tree.nodes {
        let extra = match n.status {
            NodeStatus::Success => ", peripheries=2",
            NodeStatus::Cut => ", color=red",
            NodeStatus::Open => ", style=dashed",
            NodeStatus::Flounder => ", color=orange",
            _ => "",
        };
        let _ = writeln!(
            out,
            "  n{} [label=\"{}: {}\"{}];",
            n.id.0,
            n.id,
            escape(&n.goal.to_string()),
            extra
        );
        if let Some(edge) = &n.parent {
            let attrs = match &edge.kind {
                EdgeKind::Clause { clause, mgu } => {
                    format!("label=\"{} {}\"", program.label(*clause), escape(&mgu.to_string()))
                }
                EdgeKind::NegationArc => "style=dashed, label=\"not\"".to_string(),
                EdgeKind::NegationSucceeded => "label=\"not ok\"".to_string(),
            };
            let _ = writeln!(out, "  n{} -> n{} [{}];", edge.parent.0, n.id.0, attrs);
        }
        for (i, c) in n.cuts.iter().enumerate() {
            let _ = writeln!(
                out,
                "  cut{0}_{1} [shape=plaintext, label=\"cut {2}\"];\n  n{0} -> cut{0}_{1} [style=dotted];",
                n.id.0,
                i,
                program.label(*c)
            );
        }
        for (i, c) in n.pruned.iter().enumerate() {
            let _ = writeln!(
                out,
                "  pruned{0}_{1} [shape=plaintext, label=\"pruned {2}\"];\n  n{0} -> pruned{0}_{1} [style=dotted];",
                n.id.0,
                i,
                program.label(*c)
            );
        }
    }
    out.push_str("}\n");
    out
}

pub fn tree_to_json(tree: &GeneralizedTree, program: &Program) -> Value {
    let nodes: Vec<Value> = tree
        .nodes
        .iter()
        .map(|n| {
            let edge = n.parent.as_ref().map(|e| match &e.kind {
                EdgeKind::Clause { clause, mgu } => json!({
                    "kind": "clause",
                    "from": e.parent.0,
                    "clause": program.label(*clause),
                    "mgu": mgu.to_string(),
                }),
                EdgeKind::NegationArc => json!({ "kind": "negation", "from": e.parent.0 }),
                EdgeKind::NegationSucceeded => {
                    json!({ "kind": "negation-succeeded", "from": e.parent.0 })
                }
            });
            json!({
                "id": n.id.0,
                "tree": n.tree.0,
                "depth": n.depth,
                "goal": n.goal.to_string(),
                "status": n.status,
                "edge": edge,
                "cuts": n.cuts.iter().map(|c| program.label(*c)).collect::<Vec<_>>(),
                "pruned": n.pruned.iter().map(|c| program.label(*c)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let trees: Vec<Value> = tree
        .trees
        .iter()
        .map(|t| {
            json!({
                "id": t.id.0,
                "root": t.root.0,
                "negationNode": t.negation_node.map(|n| n.0),
                "outcome": t.outcome,
            })
        })
        .collect();
    let status = match tree.status {
        BuildStatus::Exhausted => json!("exhausted"),
        BuildStatus::Halted => json!("halted"),
        BuildStatus::ResourceExceeded(kind) => json!({ "resourceExceeded": kind }),
        BuildStatus::Floundered(n) => json!({ "floundered": n.0 }),
    };
    json!({ "status": status, "nodes": nodes, "trees": trees })
}
