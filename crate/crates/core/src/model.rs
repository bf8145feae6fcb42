//! In-memory model of one knowledge-base version.
//!
//! A [`KnowledgeBase`] is a bipartite graph of concept and relation nodes.
//! Elements live in exactly one [`GraphBody`]: either the root body or the
//! nested body of a context concept. Arcs connect a relation's argument slot
//! to a concept and are stored in the body that holds both endpoints.
//!
//! Values are immutable once built. [`KbBuilder`] and
//! [`KnowledgeBase::from_parts`] never reject input on their own; call
//! [`validate`] (or [`KbBuilder::build`], which does) to check invariants.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Pseudo-id reserved for the whole graph in aggregated criteria tables.
pub const GRAPH_ID: &str = "GRAPH";

/// Stable element identifier.
///
/// Ordering is "natural": runs of ASCII digits compare by numeric value, so
/// `cn9 < cn10`. Ids that tie numerically (`cn01`, `cn1`) fall back to plain
/// byte order, which keeps the order total and consistent with `Eq`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(value: impl Into<String>) -> Self {
        ElementId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId(s.to_owned())
    }
}

impl From<String> for ElementId {
    fn from(s: String) -> Self {
        ElementId(s)
    }
}

impl PartialEq<str> for ElementId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for ElementId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

impl Ord for ElementId {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ElementId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].is_ascii_digit() && b[j].is_ascii_digit() {
            let si = i;
            while i < a.len() && a[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let da = trim_zeros(&a[si..i]);
            let db = trim_zeros(&b[sj..j]);
            let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
            if ord != Ordering::Equal {
                return ord;
            }
        } else {
            let ord = a[i].cmp(&b[j]);
            if ord != Ordering::Equal {
                return ord;
            }
            i += 1;
            j += 1;
        }
    }
    (a.len() - i).cmp(&(b.len() - j))
}

fn trim_zeros(digits: &[u8]) -> &[u8] {
    let start = digits.iter().position(|&d| d != b'0').unwrap_or(digits.len());
    &digits[start..]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Concept,
    Relation,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Concept => "concept",
            ElementKind::Relation => "relation",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Layout hints from an editor. Never part of an element's meaning.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Presentation {
    pub x: f64,
    pub y: f64,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub color: Option<String>,
}

impl Presentation {
    pub fn at(x: f64, y: f64) -> Self {
        Presentation {
            x,
            y,
            ..Default::default()
        }
    }
}

/// One argument slot of a relation bound to a concept. Positions are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub relation_id: ElementId,
    pub position: u32,
    pub concept_id: ElementId,
}

impl Arc {
    pub fn new(relation_id: impl Into<ElementId>, position: u32, concept_id: impl Into<ElementId>) -> Self {
        Arc {
            relation_id: relation_id.into(),
            position,
            concept_id: concept_id.into(),
        }
    }
}

/// Element ids and arcs of one context (or of the root).
///
/// Both lists are kept sorted; equal bodies compare equal regardless of the
/// order they were assembled in.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GraphBody {
    element_ids: Vec<ElementId>,
    arcs: Vec<Arc>,
}

impl GraphBody {
    pub fn new(mut element_ids: Vec<ElementId>, mut arcs: Vec<Arc>) -> Self {
        element_ids.sort();
        arcs.sort();
        GraphBody { element_ids, arcs }
    }

    pub fn element_ids(&self) -> &[ElementId] {
        &self.element_ids
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.element_ids.is_empty() && self.arcs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub id: ElementId,
    pub kind: ElementKind,
    pub type_label: String,
    pub referent: Option<String>,
    /// Present iff the concept is a context, even when the body is empty.
    pub nested: Option<GraphBody>,
    pub presentation: Option<Presentation>,
}

impl Element {
    pub fn concept(id: impl Into<ElementId>, type_label: impl Into<String>) -> Self {
        Element {
            id: id.into(),
            kind: ElementKind::Concept,
            type_label: type_label.into(),
            referent: None,
            nested: None,
            presentation: None,
        }
    }

    pub fn relation(id: impl Into<ElementId>, type_label: impl Into<String>) -> Self {
        Element {
            kind: ElementKind::Relation,
            ..Element::concept(id, type_label)
        }
    }

    /// A concept carrying an (initially empty) nested graph.
    pub fn context(id: impl Into<ElementId>, type_label: impl Into<String>) -> Self {
        Element {
            nested: Some(GraphBody::default()),
            ..Element::concept(id, type_label)
        }
    }

    pub fn with_referent(mut self, referent: impl Into<String>) -> Self {
        self.referent = Some(referent.into());
        self
    }

    pub fn with_presentation(mut self, presentation: Presentation) -> Self {
        self.presentation = Some(presentation);
        self
    }

    pub fn is_context(&self) -> bool {
        self.kind == ElementKind::Concept && self.nested.is_some()
    }
}

/// Where an element sits in the containment tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parent {
    Root,
    Context(ElementId),
}

impl Parent {
    pub fn context_id(&self) -> Option<&ElementId> {
        match self {
            Parent::Root => None,
            Parent::Context(id) => Some(id),
        }
    }
}

/// Scope of a containment query: the whole graph or one context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    Graph,
    Context(ElementId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown element id `{0}`")]
    UnknownId(ElementId),
    #[error("`{0}` is not a context")]
    NotAContext(ElementId),
    #[error("invalid knowledge base: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// A broken model invariant, named by rule and offending id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    EmptyId,
    ReservedId(ElementId),
    DuplicateId(ElementId),
    EmptyTypeLabel(ElementId),
    RelationWithReferent(ElementId),
    RelationWithNested(ElementId),
    /// A body lists an id that has no element.
    MissingElement(ElementId),
    /// An element that no body lists.
    Orphan(ElementId),
    MultipleParents(ElementId),
    ContainmentCycle(ElementId),
    DanglingArc(ElementId),
    ArcSourceNotRelation(ElementId),
    ArcTargetNotConcept(ElementId),
    ZeroPosition(ElementId),
    DuplicateSlot(ElementId, u32),
    CrossContextArc(ElementId, u32),
    BadPresentation(ElementId),
}

impl Violation {
    pub fn rule(&self) -> &'static str {
        match self {
            Violation::EmptyId => "empty-id",
            Violation::ReservedId(_) => "reserved-id",
            Violation::DuplicateId(_) => "duplicate-id",
            Violation::EmptyTypeLabel(_) => "empty-type-label",
            Violation::RelationWithReferent(_) => "relation-referent",
            Violation::RelationWithNested(_) => "relation-nested",
            Violation::MissingElement(_) => "missing-element",
            Violation::Orphan(_) => "orphan",
            Violation::MultipleParents(_) => "multiple-parents",
            Violation::ContainmentCycle(_) => "containment-cycle",
            Violation::DanglingArc(_) => "dangling-arc",
            Violation::ArcSourceNotRelation(_) => "arc-source-not-relation",
            Violation::ArcTargetNotConcept(_) => "arc-target-not-concept",
            Violation::ZeroPosition(_) => "zero-position",
            Violation::DuplicateSlot(..) => "duplicate-slot",
            Violation::CrossContextArc(..) => "cross-context-arc",
            Violation::BadPresentation(_) => "bad-presentation",
        }
    }

    /// The id the violation is about, if any.
    pub fn subject(&self) -> Option<&ElementId> {
        match self {
            Violation::EmptyId => None,
            Violation::ReservedId(id)
            | Violation::DuplicateId(id)
            | Violation::EmptyTypeLabel(id)
            | Violation::RelationWithReferent(id)
            | Violation::RelationWithNested(id)
            | Violation::MissingElement(id)
            | Violation::Orphan(id)
            | Violation::MultipleParents(id)
            | Violation::ContainmentCycle(id)
            | Violation::DanglingArc(id)
            | Violation::ArcSourceNotRelation(id)
            | Violation::ArcTargetNotConcept(id)
            | Violation::ZeroPosition(id)
            | Violation::DuplicateSlot(id, _)
            | Violation::CrossContextArc(id, _)
            | Violation::BadPresentation(id) => Some(id),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => f.write_str("empty-id"),
            Violation::DuplicateSlot(id, pos) | Violation::CrossContextArc(id, pos) => {
                write!(f, "{}({}:{})", self.rule(), id, pos)
            }
            other => write!(f, "{}({})", other.rule(), other.subject().expect("has subject")),
        }
    }
}

/// One immutable version of a conceptual-graph knowledge base.
#[derive(Clone, Debug, PartialEq)]
pub struct KnowledgeBase {
    version_label: String,
    root: GraphBody,
    /// Sorted by id. Duplicates are representable so that `validate` can
    /// report them.
    elements: Vec<Element>,
    parents: BTreeMap<ElementId, Parent>,
}

impl KnowledgeBase {
    /// Assembles a knowledge base without checking invariants.
    pub fn from_parts(version_label: impl Into<String>, root: GraphBody, mut elements: Vec<Element>) -> Self {
        elements.sort_by(|a, b| a.id.cmp(&b.id));
        let mut parents = BTreeMap::new();
        for id in root.element_ids() {
            parents.entry(id.clone()).or_insert(Parent::Root);
        }
        for el in &elements {
            if let Some(body) = &el.nested {
                for id in body.element_ids() {
                    parents
                        .entry(id.clone())
                        .or_insert_with(|| Parent::Context(el.id.clone()));
                }
            }
        }
        KnowledgeBase {
            version_label: version_label.into(),
            root,
            elements,
            parents,
        }
    }

    pub fn empty(version_label: impl Into<String>) -> Self {
        Self::from_parts(version_label, GraphBody::default(), Vec::new())
    }

    pub fn version_label(&self) -> &str {
        &self.version_label
    }

    pub fn root(&self) -> &GraphBody {
        &self.root
    }

    /// All elements in id order.
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        self.elements
            .binary_search_by(|e| e.id.cmp(id))
            .ok()
            .map(|i| &self.elements[i])
    }

    pub fn get(&self, id: &ElementId) -> Result<&Element, ModelError> {
        self.element(id).ok_or_else(|| ModelError::UnknownId(id.clone()))
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        self.element(id).is_some()
    }

    pub fn parent(&self, id: &ElementId) -> Option<&Parent> {
        self.parents.get(id)
    }

    /// Body holding the members of `parent`.
    pub fn body(&self, parent: &Parent) -> Option<&GraphBody> {
        match parent {
            Parent::Root => Some(&self.root),
            Parent::Context(id) => self.element(id).and_then(|e| e.nested.as_ref()),
        }
    }

    /// Every body in the graph, the root first, then contexts in id order.
    pub fn bodies(&self) -> impl Iterator<Item = (Parent, &GraphBody)> {
        std::iter::once((Parent::Root, &self.root)).chain(
            self.elements
                .iter()
                .filter_map(|e| e.nested.as_ref().map(|b| (Parent::Context(e.id.clone()), b))),
        )
    }

    /// Every arc of every body.
    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.bodies().flat_map(|(_, b)| b.arcs().iter())
    }

    pub fn contexts(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| e.is_context())
    }

    /// Number of enclosing contexts; root members have depth 0.
    pub fn depth(&self, id: &ElementId) -> usize {
        let mut depth = 0;
        let mut cur = self.parents.get(id);
        while let Some(Parent::Context(ctx)) = cur {
            depth += 1;
            if depth > self.elements.len() {
                break;
            }
            cur = self.parents.get(ctx);
        }
        depth
    }
}

/// Incremental construction of a [`KnowledgeBase`].
///
/// Elements are placed at the root or inside an existing concept, which then
/// becomes a context. Arcs are stored in the body of their relation.
#[derive(Debug, Clone)]
pub struct KbBuilder {
    version_label: String,
    entries: Vec<(Parent, Element)>,
    arcs: Vec<Arc>,
}

impl KbBuilder {
    pub fn new(version_label: impl Into<String>) -> Self {
        KbBuilder {
            version_label: version_label.into(),
            entries: Vec::new(),
            arcs: Vec::new(),
        }
    }

    pub fn add_root(&mut self, element: Element) -> &mut Self {
        self.entries.push((Parent::Root, element));
        self
    }

    pub fn add_in(&mut self, context: impl Into<ElementId>, element: Element) -> &mut Self {
        self.entries.push((Parent::Context(context.into()), element));
        self
    }

    pub fn add(&mut self, parent: Parent, element: Element) -> &mut Self {
        self.entries.push((parent, element));
        self
    }

    pub fn arc(&mut self, relation_id: impl Into<ElementId>, position: u32, concept_id: impl Into<ElementId>) -> &mut Self {
        self.arcs.push(Arc::new(relation_id, position, concept_id));
        self
    }

    /// Builds and validates.
    pub fn build(&self) -> Result<KnowledgeBase, ModelError> {
        let kb = self.build_unchecked();
        let violations = validate(&kb);
        if violations.is_empty() {
            Ok(kb)
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    pub fn build_unchecked(&self) -> KnowledgeBase {
        let mut members: BTreeMap<Parent, Vec<ElementId>> = BTreeMap::new();
        let mut rel_parent: BTreeMap<ElementId, Parent> = BTreeMap::new();
        for (parent, el) in &self.entries {
            members.entry(parent.clone()).or_default().push(el.id.clone());
            rel_parent.entry(el.id.clone()).or_insert_with(|| parent.clone());
        }
        let mut arcs: BTreeMap<Parent, Vec<Arc>> = BTreeMap::new();
        for arc in &self.arcs {
            let parent = rel_parent.get(&arc.relation_id).cloned().unwrap_or(Parent::Root);
            arcs.entry(parent).or_default().push(arc.clone());
        }
        let mut elements: Vec<Element> = self.entries.iter().map(|(_, e)| e.clone()).collect();
        for el in &mut elements {
            let key = Parent::Context(el.id.clone());
            let ids = members.remove(&key);
            let body_arcs = arcs.remove(&key);
            if ids.is_some() || body_arcs.is_some() || el.nested.is_some() {
                let mut ids = ids.unwrap_or_default();
                let mut body_arcs = body_arcs.unwrap_or_default();
                if let Some(existing) = el.nested.take() {
                    ids.extend(existing.element_ids);
                    body_arcs.extend(existing.arcs);
                }
                el.nested = Some(GraphBody::new(ids, body_arcs));
            }
        }
        let root = GraphBody::new(
            members.remove(&Parent::Root).unwrap_or_default(),
            arcs.remove(&Parent::Root).unwrap_or_default(),
        );
        // Members or arcs of an unknown parent end up in no body and are
        // reported as orphans / dangling arcs by `validate`.
        KnowledgeBase::from_parts(self.version_label.clone(), root, elements)
    }
}

/// Checks every model invariant. An empty result means the knowledge base
/// is well formed.
pub fn validate(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = BTreeSet::new();

    let mut duplicated = BTreeSet::new();
    for pair in kb.elements.windows(2) {
        if pair[0].id == pair[1].id {
            duplicated.insert(pair[0].id.clone());
        }
    }
    out.extend(duplicated.iter().cloned().map(Violation::DuplicateId));

    for el in &kb.elements {
        let id = &el.id;
        if id.as_str().is_empty() {
            out.insert(Violation::EmptyId);
        }
        if id.as_str() == GRAPH_ID {
            out.insert(Violation::ReservedId(id.clone()));
        }
        if el.type_label.is_empty() {
            out.insert(Violation::EmptyTypeLabel(id.clone()));
        }
        if el.kind == ElementKind::Relation {
            if el.referent.is_some() {
                out.insert(Violation::RelationWithReferent(id.clone()));
            }
            if el.nested.is_some() {
                out.insert(Violation::RelationWithNested(id.clone()));
            }
        }
        if let Some(p) = &el.presentation {
            let sizes_ok = [p.width, p.height]
                .iter()
                .all(|s| s.is_none_or(|v| v.is_finite() && v > 0.0));
            if !p.x.is_finite() || !p.y.is_finite() || !sizes_ok {
                out.insert(Violation::BadPresentation(id.clone()));
            }
        }
    }

    // Containment: each element listed by exactly one body, reachable from root.
    let mut listed: BTreeMap<&ElementId, usize> = BTreeMap::new();
    for (_, body) in kb.bodies() {
        for id in body.element_ids() {
            *listed.entry(id).or_default() += 1;
            if !kb.contains(id) {
                out.insert(Violation::MissingElement(id.clone()));
            }
        }
    }
    for el in &kb.elements {
        match listed.get(&el.id) {
            None => {
                out.insert(Violation::Orphan(el.id.clone()));
            }
            Some(&n) if n > 1 && !duplicated.contains(&el.id) => {
                out.insert(Violation::MultipleParents(el.id.clone()));
            }
            _ => {}
        }
    }
    let mut reachable = BTreeSet::new();
    let mut stack: Vec<&ElementId> = kb.root.element_ids().iter().collect();
    while let Some(id) = stack.pop() {
        if !reachable.insert(id) {
            continue;
        }
        if let Some(body) = kb.element(id).and_then(|e| e.nested.as_ref()) {
            stack.extend(body.element_ids());
        }
    }
    for el in &kb.elements {
        if listed.contains_key(&el.id) && !reachable.contains(&el.id) {
            out.insert(Violation::ContainmentCycle(el.id.clone()));
        }
    }

    // Arcs.
    let mut slots = BTreeSet::new();
    for (parent, body) in kb.bodies() {
        for arc in body.arcs() {
            let rel = kb.element(&arc.relation_id);
            let con = kb.element(&arc.concept_id);
            if rel.is_none() {
                out.insert(Violation::DanglingArc(arc.relation_id.clone()));
            }
            if con.is_none() {
                out.insert(Violation::DanglingArc(arc.concept_id.clone()));
            }
            if arc.position == 0 {
                out.insert(Violation::ZeroPosition(arc.relation_id.clone()));
            }
            if !slots.insert((&arc.relation_id, arc.position)) {
                out.insert(Violation::DuplicateSlot(arc.relation_id.clone(), arc.position));
            }
            if let Some(rel) = rel {
                if rel.kind != ElementKind::Relation {
                    out.insert(Violation::ArcSourceNotRelation(rel.id.clone()));
                }
            }
            if let Some(con) = con {
                if con.kind != ElementKind::Concept {
                    out.insert(Violation::ArcTargetNotConcept(con.id.clone()));
                }
            }
            if rel.is_some() && con.is_some() {
                let in_body = |id: &ElementId| kb.parent(id) == Some(&parent);
                if !in_body(&arc.relation_id) || !in_body(&arc.concept_id) {
                    out.insert(Violation::CrossContextArc(arc.relation_id.clone(), arc.position));
                }
            }
        }
    }

    out.into_iter().collect()
}

/// Textual description of an element: `Type` or `Type : referent`.
pub fn describe(kb: &KnowledgeBase, id: &ElementId) -> Result<String, ModelError> {
    let el = kb.get(id)?;
    Ok(match (&el.kind, &el.referent) {
        (ElementKind::Concept, Some(r)) => format!("{} : {}", el.type_label, r),
        _ => el.type_label.clone(),
    })
}

/// Textual description of an arc: `[relation -> concept] : position`.
pub fn describe_link(kb: &KnowledgeBase, arc: &Arc) -> Result<String, ModelError> {
    let rel = kb.get(&arc.relation_id)?;
    let con = describe(kb, &arc.concept_id)?;
    Ok(format!("[{} -> {}] : {}", rel.type_label, con, arc.position))
}

/// All elements transitively inside `scope`, excluding the context itself.
pub fn containment_closure(kb: &KnowledgeBase, scope: &Scope) -> Result<BTreeSet<ElementId>, ModelError> {
    let start = match scope {
        Scope::Graph => return Ok(kb.elements.iter().map(|e| e.id.clone()).collect()),
        Scope::Context(id) => {
            let el = kb.get(id)?;
            el.nested.as_ref().ok_or_else(|| ModelError::NotAContext(id.clone()))?
        }
    };
    let mut out = BTreeSet::new();
    let mut stack: Vec<&ElementId> = start.element_ids().iter().collect();
    while let Some(id) = stack.pop() {
        if !out.insert(id.clone()) {
            continue;
        }
        if let Some(body) = kb.element(id).and_then(|e| e.nested.as_ref()) {
            stack.extend(body.element_ids());
        }
    }
    if let Scope::Context(id) = scope {
        out.remove(id);
    }
    Ok(out)
}
