use std::fmt::Write as _;

use crate::criteria::{CriteriaTable, Criterion};
use crate::io::{escape, num};
use crate::model::{ElementKind, KnowledgeBase};

use super::{plan, Bounds, RenderError, RenderPlan};

const MARGIN: f64 = 24.0;
const CONTEXT_STROKE: &str = "#7f7f7f";
const LEGEND_HEIGHT: f64 = 28.0;

/// SVG 1.1 view. Identical inputs give identical bytes.
pub fn render_svg(kb: &KnowledgeBase, table: Option<&CriteriaTable>, criterion: Option<Criterion>) -> Result<Vec<u8>, RenderError> {
    Ok(write_svg(&plan(kb, table, criterion)?).into_bytes())
}

/// Where the segment from `a` to `c` first enters `b`; `c` itself when `a`
/// already lies inside.
fn box_entry(a: (f64, f64), c: (f64, f64), b: Bounds) -> (f64, f64) {
    let mut t = 0.0_f64;
    for (p, d, lo, hi) in [(a.0, c.0 - a.0, b.x0, b.x1), (a.1, c.1 - a.1, b.y0, b.y1)] {
        if d != 0.0 {
            t = t.max(((lo - p) / d).min((hi - p) / d));
        }
    }
    if t <= 0.0 || t > 1.0 {
        return c;
    }
    (a.0 + t * (c.0 - a.0), a.1 + t * (c.1 - a.1))
}

pub(crate) fn write_svg(plan: &RenderPlan) -> String {
    let b = plan.bounds();
    let (x0, y0) = (b.x0 - MARGIN, b.y0 - MARGIN);
    let (w, h) = (b.width() + 2.0 * MARGIN, b.height() + 2.0 * MARGIN + LEGEND_HEIGHT);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"13\">",
        num(w),
        num(h),
        num(x0),
        num(y0),
        num(w),
        num(h)
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(&plan.version));

    // Outer contexts first so inner ones and members paint over them.
    let mut contexts: Vec<_> = plan.nodes.iter().filter(|n| n.is_context).collect();
    contexts.sort_by(|a, b| a.depth.cmp(&b.depth).then_with(|| a.id.cmp(&b.id)));
    for n in contexts {
        let fill = &plan.fills[&n.id];
        let bx = n.bounds;
        let _ = writeln!(out, "  <g id=\"{}\" class=\"context\">", escape(n.id.as_str()));
        let _ = writeln!(
            out,
            "    <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"12\" ry=\"12\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            num(bx.x0),
            num(bx.y0),
            num(bx.width()),
            num(bx.height()),
            fill.hex(),
            CONTEXT_STROKE
        );
        let _ = writeln!(
            out,
            "    <text x=\"{}\" y=\"{}\" font-weight=\"bold\">{}</text>",
            num(bx.x0 + 8.0),
            num(bx.y0 + 16.0),
            escape(&n.label)
        );
        out.push_str("  </g>\n");
    }

    for e in &plan.edges {
        let (Some(a), Some(c)) = (plan.point(&e.relation_id), plan.point(&e.concept_id)) else {
            continue;
        };
        let (a, c) = ((a.x, a.y), (c.x, c.y));
        // a context is drawn only as its box, so stop at the box edge
        let c = match plan.node(&e.concept_id) {
            Some(n) if n.is_context => box_entry(a, c, n.bounds),
            _ => c,
        };
        let _ = writeln!(
            out,
            "  <g class=\"arc\">\n    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n    <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#333333\">{}</text>\n  </g>",
            num(a.0),
            num(a.1),
            num(c.0),
            num(c.1),
            num((a.0 + c.0) / 2.0),
            num((a.1 + c.1) / 2.0 - 4.0),
            e.position
        );
    }

    for n in plan.nodes.iter().filter(|n| !n.is_context) {
        let fill = &plan.fills[&n.id];
        let p = plan.point(&n.id).expect("every node is laid out");
        let bx = n.bounds;
        let class = n.kind.as_str();
        let _ = writeln!(out, "  <g id=\"{}\" class=\"{}\">", escape(n.id.as_str()), class);
        match n.kind {
            ElementKind::Concept => {
                let _ = writeln!(
                    out,
                    "    <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#222222\"/>",
                    num(bx.x0),
                    num(bx.y0),
                    num(bx.width()),
                    num(bx.height()),
                    fill.hex()
                );
            }
            ElementKind::Relation => {
                let _ = writeln!(
                    out,
                    "    <ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"{}\" stroke=\"#222222\"/>",
                    num(p.x),
                    num(p.y),
                    num(bx.width() / 2.0),
                    num(bx.height() / 2.0),
                    fill.hex()
                );
            }
        }
        let _ = writeln!(
            out,
            "    <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"{}\">{}</text>",
            num(p.x),
            num(p.y + 4.5),
            fill.text_hex(),
            escape(&n.label)
        );
        out.push_str("  </g>\n");
    }

    let legend = match &plan.legend {
        Some(l) => format!("criterion: {} (max {:.1})", l.criterion, l.max_count),
        None => "criterion: none".to_owned(),
    };
    let _ = writeln!(
        out,
        "  <text class=\"legend\" x=\"{}\" y=\"{}\" fill=\"#333333\">{}</text>",
        num(b.x0),
        num(b.y1 + MARGIN + LEGEND_HEIGHT / 2.0),
        escape(&legend)
    );
    out.push_str("</svg>\n");
    out
}
