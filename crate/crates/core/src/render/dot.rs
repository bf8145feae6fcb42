use std::fmt::Write as _;

use crate::criteria::{CriteriaTable, Criterion};
use crate::model::{ElementId, GraphBody, KnowledgeBase};

use super::{plan, RenderError, RenderPlan};

/// Graphviz description of the same view: one node per element, contexts
/// as clusters, arcs as edges labelled with their position.
pub fn render_dot(kb: &KnowledgeBase, table: Option<&CriteriaTable>, criterion: Option<Criterion>) -> Result<String, RenderError> {
    let plan = plan(kb, table, criterion)?;
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(kb.version_label()));
    out.push_str("  node [style=filled, fontname=\"Helvetica\"];\n");
    if let Some(l) = &plan.legend {
        let _ = writeln!(out, "  label={};", quote(&format!("criterion: {} (max {:.1})", l.criterion, l.max_count)));
    }
    write_body(&mut out, kb, &plan, kb.root(), 1);
    for e in &plan.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            quote(e.relation_id.as_str()),
            quote(e.concept_id.as_str()),
            e.position
        );
    }
    out.push_str("}\n");
    Ok(out)
}

fn write_body(out: &mut String, kb: &KnowledgeBase, plan: &RenderPlan, body: &GraphBody, depth: usize) {
    let pad = "  ".repeat(depth);
    for id in body.element_ids() {
        let Some(el) = kb.element(id) else { continue };
        match &el.nested {
            Some(nested) if el.is_context() => {
                let node = plan.node(id).expect("planned");
                let _ = writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{id}")));
                let _ = writeln!(out, "{pad}  label={};", quote(&node.label));
                let _ = writeln!(out, "{pad}  style=\"rounded\";");
                let _ = writeln!(out, "{pad}  color=\"#7f7f7f\";");
                write_node(out, plan, id, &format!("{pad}  "), "box", "filled,rounded");
                write_body(out, kb, plan, nested, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
            _ => {
                let shape = match el.kind {
                    crate::model::ElementKind::Concept => "box",
                    crate::model::ElementKind::Relation => "ellipse",
                };
                write_node(out, plan, id, &pad, shape, "filled");
            }
        }
    }
}

fn write_node(out: &mut String, plan: &RenderPlan, id: &ElementId, pad: &str, shape: &str, style: &str) {
    let node = plan.node(id).expect("planned");
    let fill = &plan.fills[id];
    let _ = writeln!(
        out,
        "{pad}{} [shape={shape}, style=\"{style}\", label={}, fillcolor=\"{}\", fontcolor=\"{}\"];",
        quote(id.as_str()),
        quote(&node.label),
        fill.hex(),
        fill.text_hex()
    );
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
