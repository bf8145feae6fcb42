//! Random knowledge bases and edit scripts for the integration suites.
//!
//! A [`Draft`] is a plain, easily mutated description of one version. Edit
//! scripts are applied to drafts and carry their own expected counters, so
//! the criteria they are compared against are computed without touching the
//! library's diff.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use cg_robustness::{Element, ElementKind, KbBuilder, KnowledgeBase, Presentation};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub const MAX_DEPTH: usize = 3;

const LABELS: &[&str] = &[
    "Person", "Picture", "Scene", "Lake", "Fisherman", "on", "think", "contain", "Café", "a&b", "<tag>",
    "say \"hi\"", "it's", "tab\there", "line\nbreak", "Ünïcode", "x", "  padded  ",
];
const REFERENTS: &[&str] = &["John", "Peter", "#1", "*x", "O'Brien", "Zoë", "a > b"];
const PREFIXES: &[&str] = &["cn", "e", "n-", "", "x7y"];

#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub kind: ElementKind,
    pub label: String,
    pub referent: Option<String>,
    pub context: bool,
    /// `None` for root members.
    pub parent: Option<String>,
    pub presentation: Option<Presentation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Draft {
    pub version: String,
    pub items: BTreeMap<String, Item>,
    /// (relation, position) -> concept
    pub arcs: BTreeMap<(String, u32), String>,
}

impl Draft {
    pub fn depth(&self, id: &str) -> usize {
        let mut d = 0;
        let mut cur = self.items[id].parent.as_deref();
        while let Some(p) = cur {
            d += 1;
            cur = self.items[p].parent.as_deref();
        }
        d
    }

    /// True when `id` is `ancestor` or lies somewhere inside it.
    pub fn within(&self, id: &str, ancestor: &str) -> bool {
        let mut cur = Some(id);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.items[c].parent.as_deref();
        }
        false
    }

    /// Levels of nesting below `id`.
    pub fn height(&self, id: &str) -> usize {
        let base = self.depth(id);
        self.items
            .keys()
            .filter(|k| k.as_str() != id && self.within(k, id))
            .map(|k| self.depth(k) - base)
            .max()
            .unwrap_or(0)
    }

    pub fn members(&self, parent: Option<&str>) -> Vec<&String> {
        self.items
            .iter()
            .filter(|(_, it)| it.parent.as_deref() == parent)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn contexts(&self) -> Vec<&String> {
        self.items.iter().filter(|(_, it)| it.context).map(|(id, _)| id).collect()
    }

    pub fn has_arcs(&self, id: &str) -> bool {
        self.arcs.iter().any(|((r, _), c)| r == id || c == id)
    }

    /// Elements inside `ctx` at any depth, `ctx` excluded.
    pub fn closure(&self, ctx: &str) -> BTreeSet<String> {
        self.items
            .keys()
            .filter(|k| k.as_str() != ctx && self.within(k, ctx))
            .cloned()
            .collect()
    }

    fn element(&self, id: &str) -> Element {
        let it = &self.items[id];
        let mut el = match (it.kind, it.context) {
            (ElementKind::Relation, _) => Element::relation(id, it.label.clone()),
            (ElementKind::Concept, true) => Element::context(id, it.label.clone()),
            (ElementKind::Concept, false) => Element::concept(id, it.label.clone()),
        };
        el.referent = it.referent.clone();
        el.presentation = it.presentation.clone();
        el
    }

    fn builder(&self, ids: &[&String], arcs: &[(&(String, u32), &String)]) -> KbBuilder {
        let mut b = KbBuilder::new(self.version.clone());
        for id in ids {
            let el = self.element(id);
            match &self.items[id.as_str()].parent {
                None => b.add_root(el),
                Some(p) => b.add_in(p.as_str(), el),
            };
        }
        for ((r, pos), c) in arcs {
            b.arc(r.as_str(), *pos, c.as_str());
        }
        b
    }

    pub fn build(&self) -> KnowledgeBase {
        let ids: Vec<_> = self.items.keys().collect();
        let arcs: Vec<_> = self.arcs.iter().collect();
        self.builder(&ids, &arcs).build().expect("drafts are valid")
    }

    /// Same knowledge base, assembled in a random order.
    pub fn build_shuffled(&self, rng: &mut TestRng) -> KnowledgeBase {
        let mut ids: Vec<_> = self.items.keys().collect();
        let mut arcs: Vec<_> = self.arcs.iter().collect();
        ids.shuffle(rng);
        arcs.shuffle(rng);
        self.builder(&ids, &arcs).build().expect("drafts are valid")
    }
}

fn pick<'a>(rng: &mut TestRng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn label(rng: &mut TestRng) -> String {
    if rng.gen_bool(0.7) {
        pick(rng, LABELS).to_owned()
    } else {
        let n = rng.gen_range(1..8);
        (0..n).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
    }
}

fn presentation(rng: &mut TestRng) -> Option<Presentation> {
    if rng.gen_bool(0.25) {
        return None;
    }
    let coord = |rng: &mut TestRng| match rng.gen_range(0..3) {
        0 => rng.gen_range(-500..2000) as f64,
        1 => rng.gen_range(-500.0..2000.0),
        _ => rng.gen_range(0..4000) as f64 / 4.0,
    };
    let size = |rng: &mut TestRng| rng.gen_bool(0.3).then(|| rng.gen_range(1..300) as f64 + 0.5);
    Some(Presentation {
        x: coord(rng),
        y: coord(rng),
        width: size(rng),
        height: size(rng),
        color: rng.gen_bool(0.3).then(|| format!("#{:06x}", rng.gen_range(0..0x1000000))),
    })
}

fn fresh_id(rng: &mut TestRng, taken: &BTreeSet<String>) -> String {
    loop {
        let id = format!("{}{}", pick(rng, PREFIXES), rng.gen_range(0..10_000));
        if !taken.contains(&id) {
            return id;
        }
    }
}

fn new_item(rng: &mut TestRng, kind: ElementKind, parent: Option<String>, depth: usize) -> Item {
    Item {
        kind,
        label: label(rng),
        referent: (kind == ElementKind::Concept && rng.gen_bool(0.3)).then(|| pick(rng, REFERENTS).to_owned()),
        context: kind == ElementKind::Concept && depth < MAX_DEPTH && rng.gen_bool(0.25),
        parent,
        presentation: presentation(rng),
    }
}

/// A valid draft of at most `max_elements` elements with contexts nested at
/// most [`MAX_DEPTH`] deep.
pub fn random_draft(rng: &mut TestRng, max_elements: usize) -> Draft {
    let n = rng.gen_range(0..=max_elements);
    let mut draft = Draft {
        version: format!("v{}", rng.gen_range(0..100)),
        items: BTreeMap::new(),
        arcs: BTreeMap::new(),
    };
    let mut taken = BTreeSet::new();
    for _ in 0..n {
        let id = fresh_id(rng, &taken);
        taken.insert(id.clone());
        let contexts: Vec<String> = draft.contexts().into_iter().cloned().collect();
        let parent = if contexts.is_empty() || rng.gen_bool(0.4) {
            None
        } else {
            Some(contexts[rng.gen_range(0..contexts.len())].clone())
        };
        let depth = parent.as_deref().map_or(0, |p| draft.depth(p) + 1);
        let kind = if rng.gen_bool(0.6) { ElementKind::Concept } else { ElementKind::Relation };
        draft.items.insert(id, new_item(rng, kind, parent, depth));
    }
    let relations: Vec<String> = draft
        .items
        .iter()
        .filter(|(_, it)| it.kind == ElementKind::Relation)
        .map(|(id, _)| id.clone())
        .collect();
    for r in relations {
        let parent = draft.items[&r].parent.clone();
        let candidates: Vec<String> = draft
            .members(parent.as_deref())
            .into_iter()
            .filter(|id| draft.items[id.as_str()].kind == ElementKind::Concept)
            .cloned()
            .collect();
        if candidates.is_empty() {
            continue;
        }
        for pos in 1..=4u32 {
            if rng.gen_bool(0.55) {
                let c = candidates[rng.gen_range(0..candidates.len())].clone();
                draft.arcs.insert((r.clone(), pos), c);
            }
        }
    }
    draft
}

/// Moves, resizes, recolors and drops presentation hints, leaving everything
/// else alone.
pub fn perturb_presentation(rng: &mut TestRng, draft: &Draft) -> Draft {
    let mut out = draft.clone();
    for it in out.items.values_mut() {
        match rng.gen_range(0..4) {
            0 => it.presentation = None,
            1 => it.presentation = presentation(rng),
            2 => {
                let p = it.presentation.get_or_insert_with(Presentation::default);
                p.x += rng.gen_range(-50.0..50.0);
                p.y += rng.gen_range(-50.0..50.0);
            }
            _ => {}
        }
    }
    out
}

/// Per-element expected counters: add, del, mod.
pub type Expected = BTreeMap<String, [u32; 3]>;

pub const ADD: usize = 0;
pub const DEL: usize = 1;
pub const MOD: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Edit {
    AddElement(String),
    DeleteElement(String),
    /// Deletes a relation together with its arcs at these positions.
    DeleteRelation(String, Vec<u32>),
    Retype(String),
    Rereferent(String),
    Reparent(String, Option<String>),
    AddArc(String, u32, String),
    RemoveArc(String, u32),
    Retarget(String, u32, String),
}

/// (target, change, subject id, position) of one expected diff record.
pub type RecordKey = (&'static str, &'static str, String, Option<u32>);

impl Edit {
    /// Diff records this edit must produce.
    pub fn records(&self) -> Vec<RecordKey> {
        let el = |change, id: &String| ("SELF", change, id.clone(), None);
        let link = |change, id: &String, pos: &u32| ("LINK", change, id.clone(), Some(*pos));
        match self {
            Edit::AddElement(id) => vec![el("ADD", id)],
            Edit::DeleteElement(id) => vec![el("DEL", id)],
            Edit::DeleteRelation(id, slots) => std::iter::once(el("DEL", id))
                .chain(slots.iter().map(|p| link("DEL", id, p)))
                .collect(),
            Edit::Retype(id) | Edit::Rereferent(id) | Edit::Reparent(id, _) => vec![el("MOD", id)],
            Edit::AddArc(r, p, _) => vec![link("ADD", r, p)],
            Edit::RemoveArc(r, p) => vec![link("DEL", r, p)],
            Edit::Retarget(r, p, _) => vec![link("MOD", r, p)],
        }
    }
}

pub struct Step {
    pub new: Draft,
    pub edits: Vec<Edit>,
    pub expected: Expected,
}

#[derive(Default)]
struct Ledger {
    /// Element subjects already used by this script.
    subjects: BTreeSet<String>,
    slots: BTreeSet<(String, u32)>,
    /// Endpoints of link edits; these must survive in place.
    pinned: BTreeSet<String>,
    expected: Expected,
}

impl Ledger {
    fn credit(&mut self, id: &str, col: usize) {
        self.expected.entry(id.to_owned()).or_default()[col] += 1;
    }

    fn free(&self, id: &str) -> bool {
        !self.subjects.contains(id) && !self.pinned.contains(id)
    }
}

/// Applies a random script of distinct-subject edits to `old`, tracking the
/// counters each edit must produce.
pub fn random_step(rng: &mut TestRng, old: &Draft, version: &str) -> Step {
    let mut d = old.clone();
    d.version = version.to_owned();
    let mut ledger = Ledger::default();
    let mut edits = Vec::new();
    let mut taken: BTreeSet<String> = old.items.keys().cloned().collect();
    let original = |id: &str| old.items.contains_key(id);
    let wanted = rng.gen_range(1..=12);
    let mut attempts = 0;
    while edits.len() < wanted && attempts < 200 {
        attempts += 1;
        let ids: Vec<String> = d.items.keys().cloned().collect();
        let any = |rng: &mut TestRng| (!ids.is_empty()).then(|| ids[rng.gen_range(0..ids.len())].clone());
        match rng.gen_range(0..9) {
            0 => {
                let contexts: Vec<String> = d.contexts().into_iter().cloned().collect();
                let parent = if contexts.is_empty() || rng.gen_bool(0.5) {
                    None
                } else {
                    Some(contexts[rng.gen_range(0..contexts.len())].clone())
                };
                let depth = parent.as_deref().map_or(0, |p| d.depth(p) + 1);
                if depth > MAX_DEPTH {
                    continue;
                }
                let id = fresh_id(rng, &taken);
                taken.insert(id.clone());
                let kind = if rng.gen_bool(0.6) { ElementKind::Concept } else { ElementKind::Relation };
                d.items.insert(id.clone(), new_item(rng, kind, parent, depth));
                ledger.subjects.insert(id.clone());
                ledger.credit(&id, ADD);
                edits.push(Edit::AddElement(id));
            }
            1 => {
                let Some(id) = any(rng) else { continue };
                let empty = d.members(Some(&id)).is_empty();
                if !original(&id) || !ledger.free(&id) || old.has_arcs(&id) || d.has_arcs(&id) || !empty {
                    continue;
                }
                d.items.remove(&id);
                ledger.subjects.insert(id.clone());
                ledger.credit(&id, DEL);
                edits.push(Edit::DeleteElement(id));
            }
            2 => {
                let Some(id) = any(rng) else { continue };
                let slots: Vec<(u32, String)> = d
                    .arcs
                    .iter()
                    .filter(|((r, _), _)| *r == id)
                    .map(|((_, p), c)| (*p, c.clone()))
                    .collect();
                let intact = old.arcs.iter().filter(|((r, _), _)| *r == id).count() == slots.len()
                    && slots.iter().all(|(p, c)| old.arcs.get(&(id.clone(), *p)) == Some(c));
                if !original(&id)
                    || d.items[&id].kind != ElementKind::Relation
                    || !ledger.free(&id)
                    || slots.is_empty()
                    || !intact
                    || slots.iter().any(|(_, c)| ledger.subjects.contains(c))
                {
                    continue;
                }
                d.items.remove(&id);
                for (p, c) in &slots {
                    d.arcs.remove(&(id.clone(), *p));
                    ledger.slots.insert((id.clone(), *p));
                    ledger.pinned.insert(c.clone());
                    ledger.credit(c, DEL);
                }
                ledger.subjects.insert(id.clone());
                ledger.credit(&id, DEL);
                edits.push(Edit::DeleteRelation(id, slots.iter().map(|(p, _)| *p).collect()));
            }
            3 => {
                let Some(id) = any(rng) else { continue };
                if !original(&id) || ledger.subjects.contains(&id) {
                    continue;
                }
                let fresh = label(rng);
                if fresh == d.items[&id].label {
                    continue;
                }
                d.items.get_mut(&id).unwrap().label = fresh;
                ledger.subjects.insert(id.clone());
                ledger.credit(&id, MOD);
                edits.push(Edit::Retype(id));
            }
            4 => {
                let Some(id) = any(rng) else { continue };
                if !original(&id) || ledger.subjects.contains(&id) || d.items[&id].kind != ElementKind::Concept {
                    continue;
                }
                let it = d.items.get_mut(&id).unwrap();
                let fresh = if it.referent.is_some() && rng.gen_bool(0.4) {
                    None
                } else {
                    Some(pick(rng, REFERENTS).to_owned())
                };
                if fresh == it.referent {
                    continue;
                }
                it.referent = fresh;
                ledger.subjects.insert(id.clone());
                ledger.credit(&id, MOD);
                edits.push(Edit::Rereferent(id));
            }
            5 => {
                let Some(id) = any(rng) else { continue };
                if !original(&id) || !ledger.free(&id) || old.has_arcs(&id) || d.has_arcs(&id) {
                    continue;
                }
                let targets: Vec<Option<String>> = std::iter::once(None)
                    .chain(d.contexts().into_iter().map(|c| Some(c.clone())))
                    .filter(|t| *t != d.items[&id].parent)
                    .filter(|t| t.as_deref().is_none_or(|c| !d.within(c, &id)))
                    .filter(|t| t.as_deref().map_or(0, |c| d.depth(c) + 1) + d.height(&id) <= MAX_DEPTH)
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                let to = targets[rng.gen_range(0..targets.len())].clone();
                d.items.get_mut(&id).unwrap().parent = to.clone();
                ledger.subjects.insert(id.clone());
                ledger.credit(&id, MOD);
                edits.push(Edit::Reparent(id, to));
            }
            6..=8 => {
                let Some(r) = any(rng) else { continue };
                let moved = |id: &str| ledger.subjects.contains(id) && d.items.get(id).map(|i| &i.parent) != old.items.get(id).map(|i| &i.parent);
                if !original(&r) || d.items[&r].kind != ElementKind::Relation || moved(&r) {
                    continue;
                }
                let parent = d.items[&r].parent.clone();
                let concepts: Vec<String> = d
                    .members(parent.as_deref())
                    .into_iter()
                    .filter(|c| original(c) && d.items[c.as_str()].kind == ElementKind::Concept && !moved(c))
                    .cloned()
                    .collect();
                let pos = rng.gen_range(1..=5u32);
                let key = (r.clone(), pos);
                if ledger.slots.contains(&key) {
                    continue;
                }
                match d.arcs.get(&key).cloned() {
                    None => {
                        if concepts.is_empty() {
                            continue;
                        }
                        let c = concepts[rng.gen_range(0..concepts.len())].clone();
                        d.arcs.insert(key.clone(), c.clone());
                        ledger.credit(&r, ADD);
                        ledger.credit(&c, ADD);
                        ledger.pinned.extend([r.clone(), c.clone()]);
                        edits.push(Edit::AddArc(r, pos, c));
                    }
                    Some(old_c) if rng.gen_bool(0.5) => {
                        d.arcs.remove(&key);
                        ledger.credit(&r, DEL);
                        ledger.credit(&old_c, DEL);
                        ledger.pinned.extend([r.clone(), old_c]);
                        edits.push(Edit::RemoveArc(r, pos));
                    }
                    Some(old_c) => {
                        let others: Vec<&String> = concepts.iter().filter(|c| **c != old_c).collect();
                        if others.is_empty() {
                            continue;
                        }
                        let c = others[rng.gen_range(0..others.len())].clone();
                        d.arcs.insert(key.clone(), c.clone());
                        ledger.credit(&r, MOD);
                        ledger.credit(&c, MOD);
                        ledger.pinned.extend([r.clone(), c.clone(), old_c]);
                        edits.push(Edit::Retarget(r, pos, c));
                    }
                }
                ledger.slots.insert(key);
            }
            _ => unreachable!(),
        }
    }
    Step {
        new: d,
        edits,
        expected: ledger.expected,
    }
}
