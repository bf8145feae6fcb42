//! Compare two versions of a knowledge base.
//!
//! ```text
//! cargo run --example diff_versions [OLD.cgx NEW.cgx]
//! ```
//!
//! Without arguments the bundled picture fixture is used.

use std::{env, fs};

use cg_robustness::{diff, fingerprint, format_diff, format_records, parse_kb, KnowledgeBase};

fn load(path: &str) -> KnowledgeBase {
    parse_kb(&fs::read(path).expect("readable")).expect("valid knowledge base")
}

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let args: Vec<String> = env::args().skip(1).collect();
    let (old, new) = match args.as_slice() {
        [a, b] => (load(a), load(b)),
        _ => (load(&format!("{data}/picture-v1.cgx")), load(&format!("{data}/picture-v2.cgx"))),
    };

    let report = diff(&old, &new);
    println!("{} -> {}: {} changes", report.old_version, report.new_version, report.records.len());
    print!("{}", format_diff(&report));
    println!();
    print!("{}", format_records(&report));

    // cn10 only moved on the canvas, so its fingerprint is unchanged.
    if let (Ok(a), Ok(b)) = (fingerprint(&old, &"cn10".into()), fingerprint(&new, &"cn10".into())) {
        println!("\ncn10 fingerprint {a} (unchanged: {})", a == b);
    }
}
