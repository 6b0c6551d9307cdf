//! Regenerates the bundled data files under `data/`.
//!
//! ```text
//! cargo run --example make_corpus -- crates/core/data
//! ```

use std::path::PathBuf;

use dag_grammar::synth;

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")));
    std::fs::create_dir_all(&dir)?;
    for (name, text) in synth::bundled_files() {
        std::fs::write(dir.join(name), &text)?;
        println!("{} ({} blocks)", dir.join(name).display(), text.split("\n\n").filter(|b| !b.trim().is_empty()).count());
    }
    Ok(())
}
