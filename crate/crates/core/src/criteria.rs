//! Update-activity robustness criteria.
//!
//! Every element is scored with three counters: how many times it was
//! added, deleted and modified across a version history. Contexts and the
//! whole graph get aggregate rows summing the counters of what they contain.
//! The counter group is labelled `c4` in the XML output.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::diff::{diff, ChangeType, DiffRecord, DiffReport, Subject};
use crate::io::escape;
use crate::model::{containment_closure, ElementId, ElementKind, KnowledgeBase, Scope, GRAPH_ID};

/// One column of the criteria table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    Add,
    Del,
    Mod,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Add, Criterion::Del, Criterion::Mod];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Add => "add",
            Criterion::Del => "del",
            Criterion::Mod => "mod",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "add" => Ok(Criterion::Add),
            "del" => Ok(Criterion::Del),
            "mod" => Ok(Criterion::Mod),
            other => Err(format!("unknown criterion `{other}` (expected add, del or mod)")),
        }
    }
}

impl From<ChangeType> for Criterion {
    fn from(c: ChangeType) -> Self {
        match c {
            ChangeType::Add => Criterion::Add,
            ChangeType::Del => Criterion::Del,
            ChangeType::Mod => Criterion::Mod,
        }
    }
}

/// Integer-valued counters stored as reals.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Counts {
    pub add: f64,
    pub del: f64,
    pub modified: f64,
}

impl Counts {
    pub fn new(add: f64, del: f64, modified: f64) -> Self {
        Counts { add, del, modified }
    }

    pub fn get(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Add => self.add,
            Criterion::Del => self.del,
            Criterion::Mod => self.modified,
        }
    }

    fn bump(&mut self, c: Criterion) {
        match c {
            Criterion::Add => self.add += 1.0,
            Criterion::Del => self.del += 1.0,
            Criterion::Mod => self.modified += 1.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.add == 0.0 && self.del == 0.0 && self.modified == 0.0
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.add += o.add;
        self.del += o.del;
        self.modified += o.modified;
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(mut self, o: Counts) -> Counts {
        self += o;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeType {
    Concept,
    Relation,
    /// Aggregate row of a context concept.
    Context,
    /// Aggregate row of the whole graph.
    Graph,
}

impl NodeType {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeType::Concept => "concept",
            NodeType::Relation => "relation",
            NodeType::Context => "context",
            NodeType::Graph => "graph",
        }
    }

    pub fn is_aggregate(self) -> bool {
        matches!(self, NodeType::Context | NodeType::Graph)
    }
}

impl From<ElementKind> for NodeType {
    fn from(k: ElementKind) -> Self {
        match k {
            ElementKind::Concept => NodeType::Concept,
            ElementKind::Relation => NodeType::Relation,
        }
    }
}

/// Row key; the whole-graph row sorts after every element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKey {
    Element(ElementId),
    Graph,
}

impl RowKey {
    pub fn as_str(&self) -> &str {
        match self {
            RowKey::Element(id) => id.as_str(),
            RowKey::Graph => GRAPH_ID,
        }
    }
}

impl From<ElementId> for RowKey {
    fn from(id: ElementId) -> Self {
        RowKey::Element(id)
    }
}

impl From<&str> for RowKey {
    fn from(s: &str) -> Self {
        RowKey::Element(ElementId::from(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriteriaRecord {
    pub nodetype: NodeType,
    pub counts: Counts,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CriteriaTable {
    pub first_version: String,
    pub last_version: String,
    rows: BTreeMap<RowKey, CriteriaRecord>,
    /// Own counters of contexts whose rows were replaced by aggregates.
    shadowed: BTreeMap<ElementId, Counts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error("diff record on `{id}` does not match version `{version}`: {reason}")]
    Mismatch { id: ElementId, version: String, reason: &'static str },
    #[error("a history needs at least two versions, got {0}")]
    TooShort(usize),
    #[error("criteria table has no row for `{0}`")]
    MissingRow(ElementId),
}

impl CriteriaTable {
    pub fn new(first_version: impl Into<String>, last_version: impl Into<String>) -> Self {
        CriteriaTable {
            first_version: first_version.into(),
            last_version: last_version.into(),
            ..Default::default()
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (&RowKey, &CriteriaRecord)> {
        self.rows.iter()
    }

    pub fn row(&self, key: impl Into<RowKey>) -> Option<&CriteriaRecord> {
        self.rows.get(&key.into())
    }

    pub fn counts(&self, key: impl Into<RowKey>) -> Option<Counts> {
        self.row(key).map(|r| r.counts)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, key: impl Into<RowKey>, record: CriteriaRecord) {
        self.rows.insert(key.into(), record);
    }

    /// The element's own counters, even when its row holds an aggregate.
    /// Zero for aggregate rows whose own counters are unknown.
    pub fn own_counts(&self, id: &ElementId) -> Option<Counts> {
        if let Some(c) = self.shadowed.get(id) {
            return Some(*c);
        }
        self.rows.get(&RowKey::Element(id.clone())).map(|r| {
            if r.nodetype.is_aggregate() {
                Counts::default()
            } else {
                r.counts
            }
        })
    }

    /// Element-wise sum. Node types of `other` win, so a history sum keeps
    /// each element's most recent kind.
    pub fn accumulate(&mut self, other: &CriteriaTable) {
        if self.rows.is_empty() && self.first_version.is_empty() {
            self.first_version = other.first_version.clone();
        }
        self.last_version = other.last_version.clone();
        for (key, rec) in &other.rows {
            let slot = self.rows.entry(key.clone()).or_insert(CriteriaRecord {
                nodetype: rec.nodetype,
                counts: Counts::default(),
            });
            slot.nodetype = rec.nodetype;
            slot.counts += rec.counts;
        }
        for (id, c) in &other.shadowed {
            *self.shadowed.entry(id.clone()).or_default() += *c;
        }
    }
}

/// Elements credited with a LINK record: the relation and the concept bound
/// to the slot (the new concept for ADD and MOD, the old one for DEL),
/// whenever they are present in `new`.
pub fn link_attribution(record: &DiffRecord, new: &KnowledgeBase) -> Vec<ElementId> {
    let Subject::Link {
        key,
        old_concept,
        new_concept,
    } = &record.subject
    else {
        return Vec::new();
    };
    let concept = match record.change {
        ChangeType::Add | ChangeType::Mod => new_concept,
        ChangeType::Del => old_concept,
    };
    std::iter::once(&key.relation_id)
        .chain(concept)
        .filter(|id| new.contains(id))
        .cloned()
        .collect()
}

/// Criteria of one version step. Every element of `new` gets a row, as does
/// every element deleted by the step.
pub fn eval_pair(report: &DiffReport, new: &KnowledgeBase) -> Result<CriteriaTable, CriteriaError> {
    let mut table = CriteriaTable::new(report.old_version.clone(), report.new_version.clone());
    for el in new.elements() {
        table.rows.insert(
            RowKey::Element(el.id.clone()),
            CriteriaRecord {
                nodetype: el.kind.into(),
                counts: Counts::default(),
            },
        );
    }
    let mismatch = |id: &ElementId, reason| CriteriaError::Mismatch {
        id: id.clone(),
        version: new.version_label().to_owned(),
        reason,
    };
    for record in &report.records {
        let criterion = Criterion::from(record.change);
        match &record.subject {
            Subject::Element { id, kind } => {
                let present = new.contains(id);
                match (record.change, present) {
                    (ChangeType::Del, true) => return Err(mismatch(id, "deleted element is still present")),
                    (ChangeType::Add | ChangeType::Mod, false) => {
                        return Err(mismatch(id, "element is absent from the new version"))
                    }
                    _ => {}
                }
                let row = table.rows.entry(RowKey::Element(id.clone())).or_insert(CriteriaRecord {
                    nodetype: (*kind).into(),
                    counts: Counts::default(),
                });
                row.counts.bump(criterion);
            }
            Subject::Link { key, new_concept, .. } => {
                if record.change != ChangeType::Del {
                    let rel_ok = new.contains(&key.relation_id);
                    let con_ok = new_concept.as_ref().is_some_and(|c| new.contains(c));
                    if !rel_ok || !con_ok {
                        return Err(mismatch(&key.relation_id, "link endpoint is absent from the new version"));
                    }
                }
                for id in link_attribution(record, new) {
                    if let Some(row) = table.rows.get_mut(&RowKey::Element(id)) {
                        row.counts.bump(criterion);
                    }
                }
            }
        }
    }
    Ok(table)
}

/// Sum of [`eval_pair`] over every consecutive pair of `versions`.
pub fn eval_history(versions: &[KnowledgeBase]) -> Result<CriteriaTable, CriteriaError> {
    if versions.len() < 2 {
        return Err(CriteriaError::TooShort(versions.len()));
    }
    let mut total = CriteriaTable::default();
    for pair in versions.windows(2) {
        let step = eval_pair(&diff(&pair[0], &pair[1]), &pair[1])?;
        total.accumulate(&step);
    }
    Ok(total)
}

/// Adds a row per context of `kb` and a `GRAPH` row, each the sum of the own
/// counters of the elements it contains. A context's own counters stay
/// available through [`CriteriaTable::own_counts`].
pub fn aggregate(table: &CriteriaTable, kb: &KnowledgeBase) -> Result<CriteriaTable, CriteriaError> {
    for el in kb.elements() {
        if !table.rows.contains_key(&RowKey::Element(el.id.clone())) {
            return Err(CriteriaError::MissingRow(el.id.clone()));
        }
    }
    let own = |id: &ElementId| table.own_counts(id).unwrap_or_default();
    let mut out = table.clone();
    for ctx in kb.contexts() {
        let closure = containment_closure(kb, &Scope::Context(ctx.id.clone())).expect("context has a body");
        let sum = closure.iter().fold(Counts::default(), |acc, id| acc + own(id));
        out.shadowed.insert(ctx.id.clone(), own(&ctx.id));
        out.rows.insert(
            RowKey::Element(ctx.id.clone()),
            CriteriaRecord {
                nodetype: NodeType::Context,
                counts: sum,
            },
        );
    }
    let total = table
        .rows
        .keys()
        .filter_map(|k| match k {
            RowKey::Element(id) => Some(own(id)),
            RowKey::Graph => None,
        })
        .fold(Counts::default(), |acc, c| acc + c);
    out.rows.insert(
        RowKey::Graph,
        CriteriaRecord {
            nodetype: NodeType::Graph,
            counts: total,
        },
    );
    Ok(out)
}

/// Counter of `c` scaled by the column maximum over non-aggregate rows.
/// An all-zero column maps every element to 0.
pub fn normalize(table: &CriteriaTable, c: Criterion) -> BTreeMap<ElementId, f64> {
    let plain: Vec<(&ElementId, f64)> = table
        .rows
        .iter()
        .filter_map(|(k, r)| match k {
            RowKey::Element(id) if !r.nodetype.is_aggregate() => Some((id, r.counts.get(c))),
            _ => None,
        })
        .collect();
    let max = plain.iter().map(|(_, v)| *v).fold(0.0_f64, f64::max);
    plain
        .into_iter()
        .map(|(id, v)| (id.clone(), if max > 0.0 { v / max } else { 0.0 }))
        .collect()
}

/// Largest non-aggregate counter in column `c`.
pub fn column_max(table: &CriteriaTable, c: Criterion) -> f64 {
    table
        .rows
        .values()
        .filter(|r| !r.nodetype.is_aggregate())
        .map(|r| r.counts.get(c))
        .fold(0.0, f64::max)
}

/// XML rendering rooted at `<robustness>`, one `<criteria>` per row in id
/// order with the `GRAPH` row last.
pub fn format_criteria(table: &CriteriaTable) -> String {
    if table.rows.is_empty() {
        return "<robustness/>\n".to_owned();
    }
    let mut out = String::from("<robustness>\n");
    for (key, rec) in &table.rows {
        let c = rec.counts;
        let _ = write!(
            out,
            "  <criteria>\n    <id>{}</id>\n    <nodetype>{}</nodetype>\n    <c4>\n      <add>{:.1}</add>\n      <del>{:.1}</del>\n      <mod>{:.1}</mod>\n    </c4>\n  </criteria>\n",
            escape(key.as_str()),
            rec.nodetype.as_str(),
            c.add,
            c.del,
            c.modified
        );
    }
    out.push_str("</robustness>\n");
    out
}

/// Flat export: `id<TAB>nodetype<TAB>add<TAB>del<TAB>mod` per row.
pub fn format_flat(table: &CriteriaTable) -> String {
    let mut out = String::new();
    for (key, rec) in &table.rows {
        let c = rec.counts;
        let _ = writeln!(
            out,
            "{}\t{}\t{:.1}\t{:.1}\t{:.1}",
            key.as_str(),
            rec.nodetype.as_str(),
            c.add,
            c.del,
            c.modified
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("criteria table, line {line}: {message}")]
pub struct TableParseError {
    pub line: u32,
    pub message: String,
}

fn parse_nodetype(s: &str) -> Option<NodeType> {
    Some(match s {
        "concept" => NodeType::Concept,
        "relation" => NodeType::Relation,
        "context" => NodeType::Context,
        "graph" => NodeType::Graph,
        _ => return None,
    })
}

fn parse_count(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0)
}

fn row_key(id: &str, nodetype: NodeType) -> RowKey {
    if id == GRAPH_ID && nodetype == NodeType::Graph {
        RowKey::Graph
    } else {
        RowKey::Element(ElementId::from(id))
    }
}

/// Reads a table written by [`format_criteria`] or [`format_flat`]; the
/// format is detected from the first non-blank character.
pub fn parse_criteria(text: &str) -> Result<CriteriaTable, TableParseError> {
    if text.trim_start().starts_with('<') {
        parse_criteria_xml(text)
    } else {
        parse_criteria_flat(text)
    }
}

fn parse_criteria_flat(text: &str) -> Result<CriteriaTable, TableParseError> {
    let mut table = CriteriaTable::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| TableParseError {
            line: n as u32 + 1,
            message: message.to_owned(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, nodetype, add, del, modified] = fields[..] else {
            return Err(err("expected five tab-separated fields"));
        };
        let nodetype = parse_nodetype(nodetype).ok_or_else(|| err("unknown nodetype"))?;
        let counts = match (parse_count(add), parse_count(del), parse_count(modified)) {
            (Some(a), Some(d), Some(m)) => Counts::new(a, d, m),
            _ => return Err(err("counters must be nonnegative numbers")),
        };
        table.rows.insert(row_key(id, nodetype), CriteriaRecord { nodetype, counts });
    }
    Ok(table)
}

fn parse_criteria_xml(text: &str) -> Result<CriteriaTable, TableParseError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| TableParseError {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let line_of = |n: roxmltree::Node| doc.text_pos_at(n.range().start).row;
    let err = |n: roxmltree::Node, message: String| TableParseError {
        line: line_of(n),
        message,
    };
    let root = doc.root_element();
    if !root.has_tag_name("robustness") {
        return Err(err(root, "root element must be <robustness>".into()));
    }
    let child_text = |n: roxmltree::Node, name: &str| -> Result<String, TableParseError> {
        n.children()
            .find(|c| c.has_tag_name(name))
            .map(|c| c.text().unwrap_or("").trim().to_owned())
            .ok_or_else(|| err(n, format!("missing <{name}>")))
    };
    let mut table = CriteriaTable::default();
    for crit in root.children().filter(|c| c.is_element()) {
        if !crit.has_tag_name("criteria") {
            return Err(err(crit, format!("unexpected <{}>", crit.tag_name().name())));
        }
        let id = child_text(crit, "id")?;
        let nodetype_raw = child_text(crit, "nodetype")?;
        let nodetype = parse_nodetype(&nodetype_raw).ok_or_else(|| err(crit, format!("unknown nodetype `{nodetype_raw}`")))?;
        let group = crit
            .children()
            .find(|c| c.has_tag_name("c4"))
            .ok_or_else(|| err(crit, "missing <c4>".into()))?;
        let mut values = [0.0; 3];
        for (slot, name) in values.iter_mut().zip(["add", "del", "mod"]) {
            let raw = child_text(group, name)?;
            *slot = parse_count(&raw).ok_or_else(|| err(group, format!("bad <{name}> value `{raw}`")))?;
        }
        table.rows.insert(
            row_key(&id, nodetype),
            CriteriaRecord {
                nodetype,
                counts: Counts::new(values[0], values[1], values[2]),
            },
        );
    }
    Ok(table)
}
