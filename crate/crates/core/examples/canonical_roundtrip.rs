//! Parse a `.cgx` file, print its canonical form and check that the
//! canonical form parses back to the same model.
//!
//! ```text
//! cargo run --example canonical_roundtrip [FILE.cgx]
//! ```

use std::{env, fs, process};

use cg_robustness::{parse_kb, serialize_kb};

fn main() {
    let path = env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/picture-v1.cgx").to_owned());
    let bytes = fs::read(&path).unwrap_or_else(|e| {
        eprintln!("{path}: {e}");
        process::exit(1)
    });
    let kb = match parse_kb(&bytes) {
        Ok(kb) => kb,
        Err(errors) => {
            for e in errors {
                eprintln!("{path}:{e}");
            }
            process::exit(1)
        }
    };
    let canonical = serialize_kb(&kb);
    print!("{}", String::from_utf8_lossy(&canonical));
    assert_eq!(parse_kb(&canonical).unwrap(), kb);
    eprintln!(
        "{} elements; input was {}canonical",
        kb.len(),
        if canonical == bytes { "" } else { "not " }
    );
}
