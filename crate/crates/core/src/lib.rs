//! Update-activity robustness analysis for conceptual-graph knowledge bases.
//!
//! A knowledge base evolves through versions. This crate compares
//! successive versions element by element, counts how often each element
//! was added, deleted or modified, rolls those counts up through nested
//! contexts, and draws the graph with the most unstable zones highlighted.
//!
//! ```
//! use cg_robustness::{diff, eval_pair, format_diff, Element, KbBuilder};
//!
//! let mut v1 = KbBuilder::new("v1");
//! v1.add_root(Element::concept("cn1", "Person"));
//! let v1 = v1.build().unwrap();
//!
//! let mut v2 = KbBuilder::new("v2");
//! v2.add_root(Element::concept("cn1", "Person").with_referent("John"));
//! let v2 = v2.build().unwrap();
//!
//! let report = diff(&v1, &v2);
//! assert_eq!(
//!     format_diff(&report),
//!     "Target : SELF / Type : MOD / From : Person / To : Person : John\n"
//! );
//! let table = eval_pair(&report, &v2).unwrap();
//! assert_eq!(table.counts("cn1").unwrap().modified, 1.0);
//! ```
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cli;
pub mod criteria;
pub mod diff;
pub mod io;
pub mod model;
pub mod render;

pub use criteria::{
    aggregate, eval_history, eval_pair, format_criteria, format_flat, normalize, parse_criteria, Counts,
    CriteriaRecord, CriteriaTable, Criterion, NodeType, RowKey,
};
pub use diff::{diff, fingerprint, format_diff, format_records, ChangeType, DiffRecord, DiffReport, LinkKey, TargetKind};
pub use io::{load_manifest, parse_kb, serialize_kb, ParseError};
pub use model::{
    containment_closure, describe, describe_link, validate, Arc, Element, ElementId, ElementKind, GraphBody,
    KbBuilder, KnowledgeBase, Parent, Presentation, Scope, Violation, GRAPH_ID,
};
pub use render::{colorize, layout, render_dot, render_svg, ColorSpec, RenderPlan};
