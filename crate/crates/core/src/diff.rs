//! Structural difference between two knowledge-base versions.
//!
//! Elements are matched by id only. An element present on one side only is
//! an ADD or DEL; an element on both sides is a MOD when its semantic
//! [`Fingerprint`] differs. Arcs are matched by their slot ([`LinkKey`]),
//! so binding an existing slot to another concept is a LINK MOD.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{describe, describe_link, Arc, ElementId, ElementKind, KnowledgeBase, ModelError, Parent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChangeType {
    Mod,
    Add,
    Del,
}

impl ChangeType {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeType::Mod => "MOD",
            ChangeType::Add => "ADD",
            ChangeType::Del => "DEL",
        }
    }

    /// ADD and DEL exchange places when the versions are swapped.
    pub fn reversed(self) -> Self {
        match self {
            ChangeType::Mod => ChangeType::Mod,
            ChangeType::Add => ChangeType::Del,
            ChangeType::Del => ChangeType::Add,
        }
    }
}

impl fmt::Display for ChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetKind {
    /// The change is on an element.
    Element,
    /// The change is on an arc slot.
    Link,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Element => "SELF",
            TargetKind::Link => "LINK",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identity of an arc: a relation's argument slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkKey {
    pub relation_id: ElementId,
    pub position: u32,
}

impl fmt::Display for LinkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.relation_id, self.position)
    }
}

/// What a record is about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    /// `kind` is taken from the newest version holding the element.
    Element { id: ElementId, kind: ElementKind },
    /// Concepts bound to the slot before and after.
    Link {
        key: LinkKey,
        old_concept: Option<ElementId>,
        new_concept: Option<ElementId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffRecord {
    pub subject: Subject,
    pub change: ChangeType,
    /// `None` iff the change is an ADD.
    pub from_desc: Option<String>,
    /// `None` iff the change is a DEL.
    pub to_desc: Option<String>,
}

impl DiffRecord {
    pub fn target(&self) -> TargetKind {
        match self.subject {
            Subject::Element { .. } => TargetKind::Element,
            Subject::Link { .. } => TargetKind::Link,
        }
    }

    /// Element id for SELF records, relation id for LINK records.
    pub fn subject_id(&self) -> &ElementId {
        match &self.subject {
            Subject::Element { id, .. } => id,
            Subject::Link { key, .. } => &key.relation_id,
        }
    }

    pub fn position(&self) -> Option<u32> {
        match &self.subject {
            Subject::Element { .. } => None,
            Subject::Link { key, .. } => Some(key.position),
        }
    }

    fn sort_key(&self) -> (TargetKind, ChangeType, &ElementId, u32) {
        (self.target(), self.change, self.subject_id(), self.position().unwrap_or(0))
    }
}

/// Canonical record order: SELF before LINK, then MOD, ADD, DEL, then subject
/// id and position.
pub fn canonical_cmp(a: &DiffRecord, b: &DiffRecord) -> std::cmp::Ordering {
    a.sort_key().cmp(&b.sort_key())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffReport {
    pub old_version: String,
    pub new_version: String,
    pub records: Vec<DiffRecord>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Digest of an element's semantic fields.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint([u8; 32]);

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({self})")
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// Fingerprint over kind, type label, referent and enclosing context.
/// Presentation and nested-body contents are not part of it.
pub fn fingerprint(kb: &KnowledgeBase, id: &ElementId) -> Result<Fingerprint, ModelError> {
    let el = kb.get(id)?;
    let mut h = Sha256::new();
    let mut field = |tag: u8, value: Option<&str>| {
        h.update([tag]);
        match value {
            None => h.update([0]),
            Some(v) => {
                h.update([1]);
                h.update((v.len() as u64).to_le_bytes());
                h.update(v.as_bytes());
            }
        }
    };
    field(b'k', Some(el.kind.as_str()));
    field(b't', Some(&el.type_label));
    field(b'r', el.referent.as_deref());
    let parent = match kb.parent(id) {
        Some(Parent::Context(ctx)) => Some(ctx.as_str()),
        _ => None,
    };
    field(b'p', parent);
    Ok(Fingerprint(h.finalize().into()))
}

fn desc(kb: &KnowledgeBase, id: &ElementId) -> String {
    describe(kb, id).unwrap_or_else(|_| id.to_string())
}

fn link_desc(kb: &KnowledgeBase, arc: &Arc) -> String {
    describe_link(kb, arc).unwrap_or_else(|_| format!("[{} -> {}] : {}", arc.relation_id, arc.concept_id, arc.position))
}

fn slots(kb: &KnowledgeBase) -> BTreeMap<LinkKey, &Arc> {
    kb.arcs()
        .map(|a| {
            let key = LinkKey {
                relation_id: a.relation_id.clone(),
                position: a.position,
            };
            (key, a)
        })
        .collect()
}

/// All changes turning `old` into `new`, in canonical order. Both inputs are
/// expected to be valid.
pub fn diff(old: &KnowledgeBase, new: &KnowledgeBase) -> DiffReport {
    let mut records = Vec::new();

    let ids: BTreeSet<&ElementId> = old.elements().iter().chain(new.elements()).map(|e| &e.id).collect();
    for id in ids {
        let record = match (old.element(id), new.element(id)) {
            (None, Some(el)) => DiffRecord {
                subject: Subject::Element { id: id.clone(), kind: el.kind },
                change: ChangeType::Add,
                from_desc: None,
                to_desc: Some(desc(new, id)),
            },
            (Some(el), None) => DiffRecord {
                subject: Subject::Element { id: id.clone(), kind: el.kind },
                change: ChangeType::Del,
                from_desc: Some(desc(old, id)),
                to_desc: None,
            },
            (Some(_), Some(el)) => {
                if fingerprint(old, id).ok() == fingerprint(new, id).ok() {
                    continue;
                }
                DiffRecord {
                    subject: Subject::Element { id: id.clone(), kind: el.kind },
                    change: ChangeType::Mod,
                    from_desc: Some(desc(old, id)),
                    to_desc: Some(desc(new, id)),
                }
            }
            (None, None) => unreachable!(),
        };
        records.push(record);
    }

    let (old_slots, new_slots) = (slots(old), slots(new));
    let keys: BTreeSet<&LinkKey> = old_slots.keys().chain(new_slots.keys()).collect();
    for key in keys {
        let before = old_slots.get(key).copied();
        let after = new_slots.get(key).copied();
        let change = match (before, after) {
            (None, Some(_)) => ChangeType::Add,
            (Some(_), None) => ChangeType::Del,
            (Some(a), Some(b)) if a.concept_id != b.concept_id => ChangeType::Mod,
            _ => continue,
        };
        records.push(DiffRecord {
            subject: Subject::Link {
                key: key.clone(),
                old_concept: before.map(|a| a.concept_id.clone()),
                new_concept: after.map(|a| a.concept_id.clone()),
            },
            change,
            from_desc: before.map(|a| link_desc(old, a)),
            to_desc: after.map(|a| link_desc(new, a)),
        });
    }

    records.sort_by(canonical_cmp);
    DiffReport {
        old_version: old.version_label().to_owned(),
        new_version: new.version_label().to_owned(),
        records,
    }
}

/// One line per record:
/// `Target : SELF / Type : MOD / From : Person / To : Person : John`.
pub fn format_diff(report: &DiffReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        out.push_str(&format_line(r));
        out.push('\n');
    }
    out
}

pub fn format_line(r: &DiffRecord) -> String {
    format!(
        "Target : {} / Type : {} / From : {} / To : {}",
        r.target(),
        r.change,
        r.from_desc.as_deref().unwrap_or("null"),
        r.to_desc.as_deref().unwrap_or("null")
    )
}

/// Fields recovered from one formatted diff line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffLine {
    pub target: TargetKind,
    pub change: ChangeType,
    pub from_desc: Option<String>,
    pub to_desc: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed diff line: {0}")]
pub struct DiffLineError(pub String);

/// Inverse of [`format_line`]. Descriptions must not themselves contain the
/// ` / From : ` or ` / To : ` separators.
pub fn parse_diff_line(line: &str) -> Result<DiffLine, DiffLineError> {
    let bad = || DiffLineError(line.to_owned());
    let rest = line.strip_prefix("Target : ").ok_or_else(bad)?;
    let (target, rest) = rest.split_once(" / Type : ").ok_or_else(bad)?;
    let (change, rest) = rest.split_once(" / From : ").ok_or_else(bad)?;
    let (from, to) = rest.split_once(" / To : ").ok_or_else(bad)?;
    let target = match target {
        "SELF" => TargetKind::Element,
        "LINK" => TargetKind::Link,
        _ => return Err(bad()),
    };
    let change = match change {
        "ADD" => ChangeType::Add,
        "DEL" => ChangeType::Del,
        "MOD" => ChangeType::Mod,
        _ => return Err(bad()),
    };
    let opt = |s: &str| (s != "null").then(|| s.to_owned());
    Ok(DiffLine {
        target,
        change,
        from_desc: opt(from),
        to_desc: opt(to),
    })
}

#[derive(Serialize)]
struct FlatRecord<'a> {
    target: &'static str,
    #[serde(rename = "type")]
    change: &'static str,
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pos: Option<u32>,
    from: Option<&'a str>,
    to: Option<&'a str>,
}

/// Machine-readable variant: one JSON object per line with the keys
/// `target`, `type`, `id`, `pos` (LINK only), `from` and `to`.
pub fn format_records(report: &DiffReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        let flat = FlatRecord {
            target: r.target().as_str(),
            change: r.change.as_str(),
            id: r.subject_id().as_str(),
            pos: r.position(),
            from: r.from_desc.as_deref(),
            to: r.to_desc.as_deref(),
        };
        out.push_str(&serde_json::to_string(&flat).expect("plain strings serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Element, KbBuilder, Presentation};

    fn id(s: &str) -> ElementId {
        ElementId::from(s)
    }

    #[test]
    fn fingerprint_ignores_presentation() {
        let mut a = KbBuilder::new("a");
        a.add_root(Element::concept("c", "Cat").with_presentation(Presentation::at(0.0, 0.0)));
        let mut b = KbBuilder::new("b");
        b.add_root(Element::concept("c", "Cat").with_presentation(Presentation {
            x: 40.0,
            y: 12.5,
            width: Some(3.0),
            height: None,
            color: Some("red".into()),
        }));
        let (a, b) = (a.build().unwrap(), b.build().unwrap());
        assert_eq!(fingerprint(&a, &id("c")).unwrap(), fingerprint(&b, &id("c")).unwrap());
        assert!(diff(&a, &b).is_empty());
    }

    #[test]
    fn fingerprint_sees_referent_and_parent() {
        let mut a = KbBuilder::new("a");
        a.add_root(Element::concept("cn13", "Person"))
            .add_root(Element::context("pic", "Picture"));
        let mut b = KbBuilder::new("b");
        b.add_root(Element::concept("cn13", "Person").with_referent("John"))
            .add_root(Element::context("pic", "Picture"));
        let mut c = KbBuilder::new("c");
        c.add_root(Element::context("pic", "Picture"))
            .add_in("pic", Element::concept("cn13", "Person"));
        let (a, b, c) = (a.build().unwrap(), b.build().unwrap(), c.build().unwrap());
        let fp = |kb: &KnowledgeBase| fingerprint(kb, &id("cn13")).unwrap();
        assert_ne!(fp(&a), fp(&b));
        assert_ne!(fp(&a), fp(&c));
        // the context itself is unchanged by gaining a child
        assert_eq!(fingerprint(&a, &id("pic")).unwrap(), fingerprint(&c, &id("pic")).unwrap());
        assert_eq!(fingerprint(&a, &id("zz")), Err(ModelError::UnknownId(id("zz"))));

        let r = diff(&a, &c);
        assert_eq!(format_diff(&r), "Target : SELF / Type : MOD / From : Person / To : Person\n");
    }

    #[test]
    fn single_deletion() {
        let mut a = KbBuilder::new("v1");
        a.add_root(Element::concept("c", "Cat"));
        let a = a.build().unwrap();
        let b = KnowledgeBase::empty("v2");
        let r = diff(&a, &b);
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].change, ChangeType::Del);
        assert_eq!(r.records[0].from_desc.as_deref(), Some("Cat"));
        assert_eq!(r.records[0].to_desc, None);
        assert_eq!(format_diff(&r), "Target : SELF / Type : DEL / From : Cat / To : null\n");
        assert!(diff(&a, &a).is_empty());
        assert_eq!(format_diff(&diff(&b, &b)), "");
    }

    #[test]
    fn link_slot_semantics() {
        let mut a = KbBuilder::new("a");
        a.add_root(Element::relation("r", "contain"))
            .add_root(Element::concept("x", "Lake"))
            .add_root(Element::concept("y", "Truit"))
            .arc("r", 1, "x")
            .arc("r", 2, "y");
        let mut b = KbBuilder::new("b");
        b.add_root(Element::relation("r", "contain"))
            .add_root(Element::concept("x", "Lake"))
            .add_root(Element::concept("y", "Truit"))
            .arc("r", 1, "y")
            .arc("r", 3, "x");
        let (a, b) = (a.build().unwrap(), b.build().unwrap());
        let text = format_diff(&diff(&a, &b));
        assert_eq!(
            text,
            "Target : LINK / Type : MOD / From : [contain -> Lake] : 1 / To : [contain -> Truit] : 1\n\
             Target : LINK / Type : ADD / From : null / To : [contain -> Lake] : 3\n\
             Target : LINK / Type : DEL / From : [contain -> Truit] : 2 / To : null\n"
        );
    }

    #[test]
    fn line_grammar_round_trips() {
        for line in [
            "Target : SELF / Type : ADD / From : null / To : Person : Peter",
            "Target : LINK / Type : ADD / From : null / To : [contain -> Lake] : 1",
            "Target : SELF / Type : MOD / From : Person / To : Person : John",
            "Target : LINK / Type : DEL / From : [on -> Mat] : 2 / To : null",
        ] {
            let parsed = parse_diff_line(line).unwrap();
            let rebuilt = format!(
                "Target : {} / Type : {} / From : {} / To : {}",
                parsed.target,
                parsed.change,
                parsed.from_desc.as_deref().unwrap_or("null"),
                parsed.to_desc.as_deref().unwrap_or("null")
            );
            assert_eq!(rebuilt, line);
        }
        assert!(parse_diff_line("Target : SELF / Type : XXX / From : a / To : b").is_err());
        assert!(parse_diff_line("garbage").is_err());
    }

    #[test]
    fn json_records() {
        let mut a = KbBuilder::new("a");
        a.add_root(Element::relation("r", "on")).add_root(Element::concept("c", "Cat"));
        let a = a.build().unwrap();
        let mut b = KbBuilder::new("b");
        b.add_root(Element::relation("r", "on"))
            .add_root(Element::concept("c", "Cat").with_referent("Tom"))
            .arc("r", 1, "c");
        let b = b.build().unwrap();
        assert_eq!(
            format_records(&diff(&a, &b)),
            "{\"target\":\"SELF\",\"type\":\"MOD\",\"id\":\"c\",\"from\":\"Cat\",\"to\":\"Cat : Tom\"}\n\
             {\"target\":\"LINK\",\"type\":\"ADD\",\"id\":\"r\",\"pos\":1,\"from\":null,\"to\":\"[on -> Cat : Tom] : 1\"}\n"
        );
    }
}
