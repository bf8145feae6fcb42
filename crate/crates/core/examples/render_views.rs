//! Draw the picture fixture plain and once per criterion, as SVG and DOT.
//!
//! ```text
//! cargo run --example render_views [OUT_DIR]
//! ```

use std::path::PathBuf;
use std::{env, fs};

use cg_robustness::render::plan;
use cg_robustness::{diff, eval_pair, parse_kb, render_dot, render_svg, Criterion};

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let out = env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| env::temp_dir().join("cg-robustness-views"));
    fs::create_dir_all(&out).unwrap();

    let v1 = parse_kb(&fs::read(format!("{data}/picture-v1.cgx")).unwrap()).unwrap();
    let v2 = parse_kb(&fs::read(format!("{data}/picture-v2.cgx")).unwrap()).unwrap();
    let table = eval_pair(&diff(&v1, &v2), &v2).unwrap();

    fs::write(out.join("plain.svg"), render_svg(&v2, None, None).unwrap()).unwrap();
    for c in Criterion::ALL {
        fs::write(out.join(format!("{c}.svg")), render_svg(&v2, Some(&table), Some(c)).unwrap()).unwrap();
        fs::write(out.join(format!("{c}.dot")), render_dot(&v2, Some(&table), Some(c)).unwrap()).unwrap();

        let p = plan(&v2, Some(&table), Some(c)).unwrap();
        let lit: Vec<String> = p
            .fills
            .iter()
            .filter(|(_, f)| f.lightness > 0.30)
            .map(|(id, f)| format!("{id}:{:.2}", f.lightness))
            .collect();
        println!("{c}: {}", if lit.is_empty() { "-".to_owned() } else { lit.join(" ") });
    }
    println!("wrote views to {}", out.display());
}
