//! Spatial views of a knowledge base.
//!
//! Concepts are drawn as rectangles, relations as ellipses, arcs as lines
//! labelled with their argument position, and contexts as rounded boxes
//! around their members. With a criterion selected, each element's fill
//! lightness grows with its normalized counter, so the most updated
//! elements are the lightest.

mod color;
mod dot;
mod layout;
mod svg;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::criteria::{column_max, normalize, CriteriaTable, Criterion, NodeType, RowKey};
use crate::model::{describe, ElementId, ElementKind, KnowledgeBase};

pub use color::{colorize, ColorSpec, BASE_LIGHTNESS, CONCEPT_HUE, MAX_LIGHTNESS, RELATION_HUE, SATURATION};
pub use dot::render_dot;
pub use layout::{layout, LayoutPoint, Shape, PITCH_X, PITCH_Y};
pub use svg::render_svg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("normalized value {0} is outside [0, 1]")]
    NormOutOfRange(f64),
    #[error("a criterion was selected without a criteria table")]
    MissingTable,
    #[error("criteria table does not match the knowledge base at `{id}`: {reason}")]
    InconsistentTable { id: ElementId, reason: &'static str },
}

/// Default concept box size when no presentation size is stored.
pub const CONCEPT_SIZE: (f64, f64) = (120.0, 44.0);
/// Default relation ellipse size (full width, full height).
pub const RELATION_SIZE: (f64, f64) = (100.0, 40.0);
const CONTEXT_PADDING: f64 = 14.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub relation_id: ElementId,
    pub concept_id: ElementId,
    pub position: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Legend {
    pub criterion: Criterion,
    pub max_count: f64,
}

/// Axis-aligned rectangle, `x0 <= x1`, `y0 <= y1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Bounds {
    fn around(x: f64, y: f64, w: f64, h: f64) -> Self {
        Bounds {
            x0: x - w / 2.0,
            y0: y - h / 2.0,
            x1: x + w / 2.0,
            y1: y + h / 2.0,
        }
    }

    fn union(self, o: Bounds) -> Self {
        Bounds {
            x0: self.x0.min(o.x0),
            y0: self.y0.min(o.y0),
            x1: self.x1.max(o.x1),
            y1: self.y1.max(o.y1),
        }
    }

    fn pad(self, p: f64) -> Self {
        Bounds {
            x0: self.x0 - p,
            y0: self.y0 - p,
            x1: self.x1 + p,
            y1: self.y1 + p,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// One drawable element.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: ElementId,
    pub kind: ElementKind,
    pub label: String,
    /// Shape extent; for contexts the enclosing box.
    pub bounds: Bounds,
    pub is_context: bool,
    pub depth: usize,
}

/// Everything the SVG and DOT exporters draw, resolved once.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderPlan {
    pub version: String,
    pub layout: Vec<LayoutPoint>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub fills: BTreeMap<ElementId, ColorSpec>,
    pub legend: Option<Legend>,
}

impl RenderPlan {
    pub fn point(&self, id: &ElementId) -> Option<&LayoutPoint> {
        self.layout
            .binary_search_by(|p| p.id.cmp(id))
            .ok()
            .map(|i| &self.layout[i])
    }

    pub fn node(&self, id: &ElementId) -> Option<&Node> {
        self.nodes.binary_search_by(|n| n.id.cmp(id)).ok().map(|i| &self.nodes[i])
    }

    /// Extent of the whole drawing.
    pub fn bounds(&self) -> Bounds {
        self.nodes
            .iter()
            .map(|n| n.bounds)
            .reduce(Bounds::union)
            .unwrap_or(Bounds {
                x0: 0.0,
                y0: 0.0,
                x1: 0.0,
                y1: 0.0,
            })
    }
}

fn check_table(kb: &KnowledgeBase, table: &CriteriaTable) -> Result<(), RenderError> {
    for el in kb.elements() {
        let inconsistent = |reason| RenderError::InconsistentTable {
            id: el.id.clone(),
            reason,
        };
        let row = table.row(RowKey::Element(el.id.clone())).ok_or_else(|| inconsistent("missing row"))?;
        let ok = match row.nodetype {
            NodeType::Concept => el.kind == ElementKind::Concept,
            NodeType::Relation => el.kind == ElementKind::Relation,
            NodeType::Context => el.is_context(),
            NodeType::Graph => false,
        };
        if !ok {
            return Err(inconsistent("node type differs from the element kind"));
        }
    }
    Ok(())
}

/// Resolves layout, shapes and fills. With no criterion the table is ignored
/// and every fill sits at the base lightness.
pub fn plan(kb: &KnowledgeBase, table: Option<&CriteriaTable>, criterion: Option<Criterion>) -> Result<RenderPlan, RenderError> {
    let (norm, legend) = match criterion {
        None => (BTreeMap::new(), None),
        Some(c) => {
            let table = table.ok_or(RenderError::MissingTable)?;
            check_table(kb, table)?;
            let legend = Legend {
                criterion: c,
                max_count: column_max(table, c),
            };
            (normalize(table, c), Some(legend))
        }
    };

    let points = layout(kb);
    let mut fills = BTreeMap::new();
    for el in kb.elements() {
        let v = norm.get(&el.id).copied().unwrap_or(0.0);
        fills.insert(el.id.clone(), colorize(v, el.kind)?);
    }

    // Leaf shapes first, then context boxes from the innermost outwards.
    let mut bounds: BTreeMap<ElementId, Bounds> = BTreeMap::new();
    for (el, p) in kb.elements().iter().zip(&points) {
        let (dw, dh) = match el.kind {
            ElementKind::Concept => CONCEPT_SIZE,
            ElementKind::Relation => RELATION_SIZE,
        };
        let pres = el.presentation.as_ref();
        let w = pres.and_then(|p| p.width).unwrap_or(dw);
        let h = pres.and_then(|p| p.height).unwrap_or(dh);
        bounds.insert(el.id.clone(), Bounds::around(p.x, p.y, w, h));
    }
    let mut contexts: Vec<_> = kb.contexts().map(|e| (kb.depth(&e.id), &e.id)).collect();
    contexts.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    for (_, ctx) in &contexts {
        let nested = kb.element(ctx).and_then(|e| e.nested.as_ref()).expect("context");
        let mut b = bounds[*ctx];
        for member in nested.element_ids() {
            if let Some(mb) = bounds.get(member) {
                b = b.union(*mb);
            }
        }
        bounds.insert((*ctx).clone(), b.pad(CONTEXT_PADDING));
    }

    let nodes = kb
        .elements()
        .iter()
        .map(|el| Node {
            id: el.id.clone(),
            kind: el.kind,
            label: describe(kb, &el.id).unwrap_or_else(|_| el.type_label.clone()),
            bounds: bounds[&el.id],
            is_context: el.is_context(),
            depth: kb.depth(&el.id),
        })
        .collect();

    let mut edges: Vec<Edge> = kb
        .arcs()
        .map(|a| Edge {
            relation_id: a.relation_id.clone(),
            concept_id: a.concept_id.clone(),
            position: a.position,
        })
        .collect();
    edges.sort_by(|a, b| (&a.relation_id, a.position).cmp(&(&b.relation_id, b.position)));

    Ok(RenderPlan {
        version: kb.version_label().to_owned(),
        layout: points,
        nodes,
        edges,
        fills,
        legend,
    })
}
