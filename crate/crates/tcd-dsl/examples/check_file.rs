//! Checks the code blocks of a document and prints one line per diagnostic.
//!
//! cargo run -p tcd-dsl --example check_file -- notes.md

use tcd_dsl::{check_document, error_count, Mode};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        eprintln!("usage: check_file <path> [whole|fenced]");
        std::process::exit(2);
    });
    let mode = match std::env::args().nth(2).as_deref() {
        Some("whole") => Mode::Whole,
        _ => Mode::Fenced,
    };
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        eprintln!("{path}: {e}");
        std::process::exit(2);
    });
    let doc = check_document(&text, mode);
    for d in &doc.diagnostics {
        println!("{}", d.render(&path));
    }
    println!(
        "{} block(s), {} error(s)",
        doc.blocks.len(),
        error_count(&doc.diagnostics)
    );
}
