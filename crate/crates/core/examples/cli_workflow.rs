//! The maintenance workflow driven through the command-line entry point:
//! validate, diff, evaluate, then render the modified zone.
//!
//! ```text
//! cargo run --example cli_workflow
//! ```
//!
//! The same commands are available from the `cgrobust` binary.

use std::env;

use cg_robustness::cli;

fn cgrobust(args: &[&str]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("cgrobust").chain(args.iter().copied()), &mut out, &mut err);
    let mut text = String::from_utf8_lossy(&out).into_owned();
    text.push_str(&String::from_utf8_lossy(&err));
    (code, text)
}

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let v1 = format!("{data}/picture-v1.cgx");
    let v2 = format!("{data}/picture-v2.cgx");
    let dir = env::temp_dir().join("cg-robustness-cli");
    std::fs::create_dir_all(&dir).unwrap();
    let table = dir.join("criteria.xml").to_string_lossy().into_owned();
    let svg = dir.join("mod.svg").to_string_lossy().into_owned();

    let steps: [&[&str]; 6] = [
        &["validate", &v1],
        &["diff", &v1, &v2],
        &["diff", "--quiet", &v1, &v2],
        &["eval", &v1, &v2, "--output", &table],
        &["eval", "--aggregate", "--out", "flat", &v1, &v2],
        &["render", &v2, "--criteria", &table, "--criterion", "mod", "--output", &svg],
    ];
    for args in steps {
        let (code, text) = cgrobust(args);
        println!("$ cgrobust {}  [exit {code}]", args.join(" "));
        print!("{text}");
    }
    println!("rendered {svg}");
}
