//! The `.cgx` knowledge-base file format.
//!
//! ```text
//! <kb version="v1">
//!   <concept id="cn10" t="Person" x="40" y="60"/>
//!   <concept id="cn12" t="Picture">
//!     <graph>
//!       <concept id="cn15" t="Person" ref="John"/>
//!     </graph>
//!   </concept>
//!   <relation id="cn11" t="think"/>
//!   <arc rel="cn11" pos="1" con="cn10"/>
//! </kb>
//! ```
//!
//! Optional presentation attributes are `x`, `y`, `w`, `h` and `color`; `x`
//! and `y` must come together. The writer emits a canonical form: members of
//! each body sorted by id, then the body's arcs sorted by (relation,
//! position), two-space indentation, LF line endings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use roxmltree::{Document, Node, NodeType, TextPos};

use crate::model::{
    validate, Arc, Element, ElementId, ElementKind, GraphBody, KnowledgeBase, Parent, Presentation,
};

/// A located problem in a `.cgx` input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub rule: String,
    pub message: String,
}

impl ParseError {
    fn at(pos: TextPos, rule: &str, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.row,
            column: pos.col,
            rule: rule.to_owned(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.rule, self.message)
    }
}

impl std::error::Error for ParseError {}

const CONCEPT_ATTRS: &[&str] = &["id", "t", "ref", "x", "y", "w", "h", "color"];
const RELATION_ATTRS: &[&str] = &["id", "t", "x", "y", "w", "h", "color"];
const ARC_ATTRS: &[&str] = &["rel", "pos", "con"];

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    errors: Vec<ParseError>,
    elements: Vec<(Parent, Element, TextPos)>,
    arcs: Vec<(Parent, Arc, TextPos)>,
}

impl<'a, 'input> Reader<'a, 'input> {
    fn pos(&self, node: Node) -> TextPos {
        self.doc.text_pos_at(node.range().start)
    }

    fn error(&mut self, node: Node, rule: &str, message: impl Into<String>) {
        let pos = self.pos(node);
        self.errors.push(ParseError::at(pos, rule, message));
    }

    fn check_attrs(&mut self, node: Node, allowed: &[&str]) {
        for attr in node.attributes() {
            if attr.namespace().is_some() || !allowed.contains(&attr.name()) {
                let msg = format!("unexpected attribute `{}` on <{}>", attr.name(), node.tag_name().name());
                self.error(node, "unknown-attribute", msg);
            }
        }
    }

    fn required(&mut self, node: Node, name: &str) -> Option<String> {
        let value = node.attribute(name).map(str::to_owned);
        if value.is_none() {
            let msg = format!("<{}> is missing attribute `{}`", node.tag_name().name(), name);
            self.error(node, "missing-attribute", msg);
        }
        value
    }

    fn number(&mut self, node: Node, name: &str) -> Option<f64> {
        let raw = node.attribute(name)?;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.error(node, "bad-number", format!("attribute `{name}` is not a finite number: `{raw}`"));
                None
            }
        }
    }

    fn presentation(&mut self, node: Node) -> Option<Presentation> {
        let has = |n: &str| node.attribute(n).is_some();
        if !["x", "y", "w", "h", "color"].iter().any(|n| has(n)) {
            return None;
        }
        if !(has("x") && has("y")) {
            self.error(node, "incomplete-presentation", "presentation needs both `x` and `y`");
            return None;
        }
        let x = self.number(node, "x")?;
        let y = self.number(node, "y")?;
        let width = self.number(node, "w");
        let height = self.number(node, "h");
        for (name, v) in [("w", width), ("h", height)] {
            if matches!(v, Some(v) if v <= 0.0) {
                self.error(node, "bad-number", format!("attribute `{name}` must be positive"));
            }
        }
        Some(Presentation {
            x,
            y,
            width,
            height,
            color: node.attribute("color").map(str::to_owned),
        })
    }

    fn body(&mut self, container: Node, parent: &Parent) {
        for child in container.children() {
            match child.node_type() {
                NodeType::Element => {}
                NodeType::Text => {
                    if !child.text().unwrap_or("").trim().is_empty() {
                        self.error(child, "unexpected-text", "text content is not allowed here");
                    }
                    continue;
                }
                _ => continue,
            }
            if child.tag_name().namespace().is_some() {
                self.error(child, "unknown-element", format!("unexpected element <{}>", child.tag_name().name()));
                continue;
            }
            match child.tag_name().name() {
                "concept" => self.concept(child, parent),
                "relation" => self.relation(child, parent),
                "arc" => self.arc(child, parent),
                other => self.error(child, "unknown-element", format!("unexpected element <{other}>")),
            }
        }
    }

    fn labelled(&mut self, node: Node, kind: ElementKind) -> Option<Element> {
        let id = self.required(node, "id");
        let t = self.required(node, "t");
        let (id, t) = (id?, t?);
        let (id, t) = (id.as_str(), t.as_str());
        if id.is_empty() {
            self.error(node, "empty-id", "`id` must not be empty");
        }
        if t.is_empty() {
            self.error(node, "empty-type-label", "`t` must not be empty");
        }
        let mut el = match kind {
            ElementKind::Concept => Element::concept(id, t),
            ElementKind::Relation => Element::relation(id, t),
        };
        el.presentation = self.presentation(node);
        Some(el)
    }

    fn concept(&mut self, node: Node, parent: &Parent) {
        self.check_attrs(node, CONCEPT_ATTRS);
        let Some(mut el) = self.labelled(node, ElementKind::Concept) else {
            return;
        };
        el.referent = node.attribute("ref").map(str::to_owned);
        let mut graph = None;
        for child in node.children() {
            match child.node_type() {
                NodeType::Element if child.has_tag_name("graph") && graph.is_none() => graph = Some(child),
                NodeType::Element => {
                    self.error(child, "unknown-element", "a concept may only wrap a single <graph>");
                }
                NodeType::Text if !child.text().unwrap_or("").trim().is_empty() => {
                    self.error(child, "unexpected-text", "text content is not allowed here");
                }
                _ => {}
            }
        }
        let pos = self.pos(node);
        if let Some(graph) = graph {
            self.check_attrs(graph, &[]);
            el.nested = Some(GraphBody::default());
            let ctx = Parent::Context(el.id.clone());
            self.elements.push((parent.clone(), el, pos));
            self.body(graph, &ctx);
        } else {
            self.elements.push((parent.clone(), el, pos));
        }
    }

    fn relation(&mut self, node: Node, parent: &Parent) {
        self.check_attrs(node, RELATION_ATTRS);
        if node.children().any(|c| {
            c.is_element() || (c.is_text() && !c.text().unwrap_or("").trim().is_empty())
        }) {
            self.error(node, "unexpected-content", "<relation> must be empty");
        }
        if let Some(el) = self.labelled(node, ElementKind::Relation) {
            let pos = self.pos(node);
            self.elements.push((parent.clone(), el, pos));
        }
    }

    fn arc(&mut self, node: Node, parent: &Parent) {
        self.check_attrs(node, ARC_ATTRS);
        let rel = self.required(node, "rel");
        let pos = self.required(node, "pos");
        let con = self.required(node, "con");
        let (Some(rel), Some(raw_pos), Some(con)) = (rel, pos, con) else {
            return;
        };
        let position = match raw_pos.parse::<u32>() {
            Ok(p) if p > 0 => p,
            _ => {
                self.error(node, "bad-position", format!("`pos` must be a positive integer, got `{raw_pos}`"));
                return;
            }
        };
        let at = self.pos(node);
        self.arcs.push((parent.clone(), Arc::new(rel.as_str(), position, con.as_str()), at));
    }
}

/// Parses a `.cgx` document. On success the knowledge base passes
/// [`validate`].
pub fn parse_kb(bytes: &[u8]) -> Result<KnowledgeBase, Vec<ParseError>> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let prefix = &bytes[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
        let column = (prefix.len() - prefix.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1)) as u32 + 1;
        vec![ParseError {
            line,
            column,
            rule: "encoding".into(),
            message: "input is not valid UTF-8".into(),
        }]
    })?;
    let doc = Document::parse(text).map_err(|e| vec![ParseError::at(e.pos(), "xml", e.to_string())])?;
    let root = doc.root_element();
    let mut reader = Reader {
        doc: &doc,
        errors: Vec::new(),
        elements: Vec::new(),
        arcs: Vec::new(),
    };
    if !root.has_tag_name("kb") || root.tag_name().namespace().is_some() {
        reader.error(root, "unknown-element", format!("root element must be <kb>, found <{}>", root.tag_name().name()));
        return Err(reader.errors);
    }
    reader.check_attrs(root, &["version"]);
    let version = reader.required(root, "version").unwrap_or_default();
    reader.body(root, &Parent::Root);

    let Reader {
        mut errors,
        elements,
        arcs,
        ..
    } = reader;

    // Duplicate ids: keep the first, report the rest.
    let mut located: BTreeMap<ElementId, TextPos> = BTreeMap::new();
    let mut kinds: BTreeMap<ElementId, ElementKind> = BTreeMap::new();
    let mut kept = Vec::new();
    for (parent, el, pos) in elements {
        if let Some(first) = located.get(&el.id) {
            errors.push(ParseError::at(
                pos,
                "duplicate-id",
                format!("id `{}` already declared at {}:{}", el.id, first.row, first.col),
            ));
            continue;
        }
        located.insert(el.id.clone(), pos);
        kinds.insert(el.id.clone(), el.kind);
        kept.push((parent, el));
    }

    let mut slots: BTreeMap<(ElementId, u32), TextPos> = BTreeMap::new();
    let mut kept_arcs = Vec::new();
    for (parent, arc, pos) in arcs {
        let mut ok = true;
        for end in [&arc.relation_id, &arc.concept_id] {
            if !kinds.contains_key(end) {
                errors.push(ParseError::at(pos, "dangling-arc", format!("arc endpoint `{end}` is not declared")));
                ok = false;
            }
        }
        let key = (arc.relation_id.clone(), arc.position);
        if let Some(first) = slots.get(&key) {
            errors.push(ParseError::at(
                pos,
                "duplicate-slot",
                format!(
                    "slot {} of `{}` already bound at {}:{}",
                    arc.position, arc.relation_id, first.row, first.col
                ),
            ));
            ok = false;
        } else {
            slots.insert(key, pos);
        }
        if ok {
            kept_arcs.push((parent, arc, pos));
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let mut members: BTreeMap<Parent, Vec<ElementId>> = BTreeMap::new();
    for (parent, el) in &kept {
        members.entry(parent.clone()).or_default().push(el.id.clone());
    }
    let mut body_arcs: BTreeMap<Parent, Vec<Arc>> = BTreeMap::new();
    let mut arc_pos: BTreeMap<(ElementId, u32), TextPos> = BTreeMap::new();
    for (parent, arc, pos) in kept_arcs {
        arc_pos.insert((arc.relation_id.clone(), arc.position), pos);
        body_arcs.entry(parent).or_default().push(arc);
    }
    let mut all = Vec::with_capacity(kept.len());
    for (_, mut el) in kept {
        if el.nested.is_some() {
            let key = Parent::Context(el.id.clone());
            el.nested = Some(GraphBody::new(
                members.remove(&key).unwrap_or_default(),
                body_arcs.remove(&key).unwrap_or_default(),
            ));
        }
        all.push(el);
    }
    let root_body = GraphBody::new(
        members.remove(&Parent::Root).unwrap_or_default(),
        body_arcs.remove(&Parent::Root).unwrap_or_default(),
    );
    let kb = KnowledgeBase::from_parts(version, root_body, all);

    let violations = validate(&kb);
    if violations.is_empty() {
        return Ok(kb);
    }
    let origin = TextPos::new(1, 1);
    Err(violations
        .into_iter()
        .map(|v| {
            let pos = match &v {
                crate::model::Violation::DuplicateSlot(id, p) | crate::model::Violation::CrossContextArc(id, p) => {
                    arc_pos.get(&(id.clone(), *p)).copied()
                }
                other => other.subject().and_then(|id| located.get(id).copied()),
            }
            .unwrap_or(origin);
            ParseError::at(pos, v.rule(), v.to_string())
        })
        .collect())
}

/// Canonical serialization. Structurally equal knowledge bases produce
/// identical bytes, and [`parse_kb`] reproduces the input exactly.
pub fn serialize_kb(kb: &KnowledgeBase) -> Vec<u8> {
    let mut out = String::new();
    if kb.root().is_empty() {
        let _ = writeln!(out, "<kb version=\"{}\"/>", escape(kb.version_label()));
    } else {
        let _ = writeln!(out, "<kb version=\"{}\">", escape(kb.version_label()));
        write_body(&mut out, kb, kb.root(), 1, &mut BTreeSet::new());
        out.push_str("</kb>\n");
    }
    out.into_bytes()
}

fn write_body<'a>(out: &mut String, kb: &'a KnowledgeBase, body: &'a GraphBody, depth: usize, seen: &mut BTreeSet<&'a ElementId>) {
    let pad = "  ".repeat(depth);
    for id in body.element_ids() {
        let Some(el) = kb.element(id) else { continue };
        // Guards against cycles in unvalidated input.
        if !seen.insert(id) {
            continue;
        }
        let tag = match el.kind {
            ElementKind::Concept => "concept",
            ElementKind::Relation => "relation",
        };
        let _ = write!(out, "{pad}<{tag} id=\"{}\" t=\"{}\"", escape(id.as_str()), escape(&el.type_label));
        if let Some(r) = &el.referent {
            let _ = write!(out, " ref=\"{}\"", escape(r));
        }
        if let Some(p) = &el.presentation {
            let _ = write!(out, " x=\"{}\" y=\"{}\"", num(p.x), num(p.y));
            if let Some(w) = p.width {
                let _ = write!(out, " w=\"{}\"", num(w));
            }
            if let Some(h) = p.height {
                let _ = write!(out, " h=\"{}\"", num(h));
            }
            if let Some(c) = &p.color {
                let _ = write!(out, " color=\"{}\"", escape(c));
            }
        }
        match &el.nested {
            None => out.push_str("/>\n"),
            Some(nested) if nested.is_empty() => {
                let _ = write!(out, ">\n{pad}  <graph/>\n{pad}</{tag}>\n");
            }
            Some(nested) => {
                let _ = writeln!(out, ">\n{pad}  <graph>");
                write_body(out, kb, nested, depth + 2, seen);
                let _ = write!(out, "{pad}  </graph>\n{pad}</{tag}>\n");
            }
        }
    }
    for arc in body.arcs() {
        let _ = writeln!(
            out,
            "{pad}<arc rel=\"{}\" pos=\"{}\" con=\"{}\"/>",
            escape(arc.relation_id.as_str()),
            arc.position,
            escape(arc.concept_id.as_str())
        );
    }
}

/// Shortest decimal that parses back to the same value; `-0` is written as `0`.
pub(crate) fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else {
        format!("{v}")
    }
}

/// Escapes text for use inside a double-quoted XML attribute or element text.
pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}
