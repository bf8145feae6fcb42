use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ElementId, ElementKind, GraphBody, KnowledgeBase};

/// Horizontal distance between fallback grid cells.
pub const PITCH_X: f64 = 160.0;
/// Vertical distance between fallback grid rows (one row per nesting depth).
pub const PITCH_Y: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Rectangle,
    Ellipse,
}

impl From<ElementKind> for Shape {
    fn from(k: ElementKind) -> Self {
        match k {
            ElementKind::Concept => Shape::Rectangle,
            ElementKind::Relation => Shape::Ellipse,
        }
    }
}

/// Center of an element's shape.
#[derive(Clone, Debug, PartialEq)]
pub struct LayoutPoint {
    pub id: ElementId,
    pub x: f64,
    pub y: f64,
    pub shape: Shape,
}

/// Positions for every element, in id order.
///
/// Stored presentation coordinates are kept as is. Elements without them go
/// on a grid: row = nesting depth, columns filled left to right in a
/// depth-first walk of the containment tree (siblings by id), skipping cells
/// already taken by a stored position.
pub fn layout(kb: &KnowledgeBase) -> Vec<LayoutPoint> {
    let mut occupied: BTreeSet<(i64, i64)> = BTreeSet::new();
    for el in kb.elements() {
        if let Some(p) = &el.presentation {
            occupied.insert(((p.x / PITCH_X).round() as i64, (p.y / PITCH_Y).round() as i64));
        }
    }
    let mut placed: BTreeMap<ElementId, (f64, f64)> = BTreeMap::new();
    let mut cursor: BTreeMap<usize, i64> = BTreeMap::new();
    let mut visited = BTreeSet::new();
    place(kb, kb.root(), 0, &mut occupied, &mut cursor, &mut placed, &mut visited);

    kb.elements()
        .iter()
        .map(|el| {
            let (x, y) = match &el.presentation {
                Some(p) => (p.x, p.y),
                None => placed.get(&el.id).copied().unwrap_or((0.0, 0.0)),
            };
            LayoutPoint {
                id: el.id.clone(),
                x,
                y,
                shape: el.kind.into(),
            }
        })
        .collect()
}

fn place<'a>(
    kb: &'a KnowledgeBase,
    body: &'a GraphBody,
    depth: usize,
    occupied: &mut BTreeSet<(i64, i64)>,
    cursor: &mut BTreeMap<usize, i64>,
    placed: &mut BTreeMap<ElementId, (f64, f64)>,
    visited: &mut BTreeSet<&'a ElementId>,
) {
    for id in body.element_ids() {
        let Some(el) = kb.element(id) else { continue };
        if !visited.insert(id) {
            continue;
        }
        if el.presentation.is_none() {
            let row = depth as i64;
            let col = cursor.entry(depth).or_insert(0);
            while occupied.contains(&(*col, row)) {
                *col += 1;
            }
            occupied.insert((*col, row));
            placed.insert(id.clone(), (*col as f64 * PITCH_X, row as f64 * PITCH_Y));
            *col += 1;
        }
        if let Some(nested) = &el.nested {
            place(kb, nested, depth + 1, occupied, cursor, placed, visited);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Element, KbBuilder, Presentation};

    fn xy(points: &[LayoutPoint]) -> Vec<(&str, f64, f64)> {
        points.iter().map(|p| (p.id.as_str(), p.x, p.y)).collect()
    }

    #[test]
    fn stored_positions_pass_through() {
        let mut b = KbBuilder::new("v");
        b.add_root(Element::concept("a", "A").with_presentation(Presentation::at(3.5, -7.0)))
            .add_root(Element::relation("r", "R").with_presentation(Presentation::at(100.0, 20.0)));
        let pts = layout(&b.build().unwrap());
        assert_eq!(xy(&pts), [("a", 3.5, -7.0), ("r", 100.0, 20.0)]);
        assert_eq!(pts[1].shape, Shape::Ellipse);
    }

    #[test]
    fn fallback_grid_in_id_order() {
        let mut b = KbBuilder::new("v");
        b.add_root(Element::concept("c3", "C"))
            .add_root(Element::concept("c1", "A"))
            .add_root(Element::relation("c2", "B"));
        let pts = layout(&b.build().unwrap());
        assert_eq!(xy(&pts), [("c1", 0.0, 0.0), ("c2", 160.0, 0.0), ("c3", 320.0, 0.0)]);
    }

    #[test]
    fn mixed_skips_occupied_cells() {
        let mut b = KbBuilder::new("v");
        b.add_root(Element::concept("a", "A").with_presentation(Presentation::at(160.0, 0.0)))
            .add_root(Element::concept("b", "B"))
            .add_root(Element::concept("c", "C"))
            .add_root(Element::concept("d", "D").with_presentation(Presentation::at(490.0, 10.0)));
        let pts = layout(&b.build().unwrap());
        // cells: a -> col 1, d -> col 3 (490/160 rounds to 3); b, c fill 0 and 2
        assert_eq!(xy(&pts), [("a", 160.0, 0.0), ("b", 0.0, 0.0), ("c", 320.0, 0.0), ("d", 490.0, 10.0)]);
    }

    #[test]
    fn nested_rows_follow_depth() {
        let mut b = KbBuilder::new("v");
        b.add_root(Element::context("box", "Box"))
            .add_root(Element::concept("z", "Z"))
            .add_in("box", Element::concept("in1", "I"))
            .add_in("box", Element::concept("in2", "J"));
        let pts = layout(&b.build().unwrap());
        assert_eq!(
            xy(&pts),
            [("box", 0.0, 0.0), ("in1", 0.0, 100.0), ("in2", 160.0, 100.0), ("z", 160.0, 0.0)]
        );
    }
}
