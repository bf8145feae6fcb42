//! Evaluate add/del/mod counters over a version history and list the least
//! stable elements.
//!
//! ```text
//! cargo run --example evaluate_history [MANIFEST]
//! ```

use std::path::{Path, PathBuf};
use std::{env, fs};

use cg_robustness::{aggregate, eval_history, format_flat, load_manifest, parse_kb, Criterion, RowKey};

fn main() {
    let manifest = env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data/manifest.txt"));
    let base = manifest.parent().unwrap_or(Path::new("")).to_owned();
    let paths = load_manifest(&fs::read(&manifest).expect("readable manifest")).expect("valid manifest");
    let versions: Vec<_> = paths
        .iter()
        .map(|p| parse_kb(&fs::read(base.join(p)).expect("readable")).expect("valid knowledge base"))
        .collect();

    let table = eval_history(&versions).expect("at least two versions");
    print!("{}", format_flat(&table));

    let last = versions.last().unwrap();
    let rolled = aggregate(&table, last).unwrap();
    for c in Criterion::ALL {
        let mut rows: Vec<_> = table
            .rows()
            .map(|(k, r)| (r.counts.get(c), k.as_str().to_owned()))
            .filter(|(v, _)| *v > 0.0)
            .collect();
        rows.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let top: Vec<String> = rows.iter().take(3).map(|(v, id)| format!("{id}={v}")).collect();
        println!("{c:>3}: {}", top.join(" "));
    }
    let total = rolled.counts(RowKey::Graph).unwrap();
    println!("whole graph: add {} del {} mod {}", total.add, total.del, total.modified);
    for ctx in last.contexts() {
        let c = rolled.counts(ctx.id.clone()).unwrap();
        println!("context {} ({}): add {} del {} mod {}", ctx.id, ctx.type_label, c.add, c.del, c.modified);
    }
}
