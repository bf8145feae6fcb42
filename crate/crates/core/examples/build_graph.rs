//! Build a small knowledge base in code, check it, and walk its contexts.
//!
//! ```text
//! cargo run --example build_graph
//! ```

use cg_robustness::{containment_closure, describe, validate, Element, KbBuilder, Presentation, Scope};

fn main() {
    let mut kb = KbBuilder::new("draft");
    kb.add_root(Element::concept("cn1", "Person").with_referent("Mary"))
        .add_root(Element::relation("cn2", "paint"))
        .add_root(Element::context("cn3", "Canvas").with_presentation(Presentation::at(300.0, 80.0)))
        .add_in("cn3", Element::concept("cn4", "Boat"))
        .add_in("cn3", Element::context("cn5", "Harbour"))
        .add_in("cn5", Element::concept("cn6", "Crane"))
        .arc("cn2", 1, "cn1")
        .arc("cn2", 2, "cn3");
    let kb = kb.build().expect("well formed");

    for el in kb.elements() {
        let indent = "  ".repeat(kb.depth(&el.id));
        println!("{indent}{} {} {}", el.id, el.kind, describe(&kb, &el.id).unwrap());
    }
    let inside = containment_closure(&kb, &Scope::Context("cn3".into())).unwrap();
    println!("inside cn3: {inside:?}");

    // A broken variant: the arc points at an element that does not exist.
    let mut broken = KbBuilder::new("broken");
    broken
        .add_root(Element::relation("r", "on"))
        .arc("r", 1, "nowhere");
    for v in validate(&broken.build_unchecked()) {
        println!("violation: {v}");
    }
}
