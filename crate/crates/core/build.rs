use std::env;
use std::fs;
use std::path::PathBuf;

fn parse_block(text: &str, tag: &str) -> [[i64; 4]; 4] {
    let mut rows = Vec::new();
    let mut inside = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            inside = line == tag;
            continue;
        }
        if inside {
            let row: Vec<i64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse()
                        .unwrap_or_else(|_| panic!("bad entry {tok:?} in {tag}"))
                })
                .collect();
            assert_eq!(row.len(), 4, "generator rows need 4 entries");
            rows.push([row[0], row[1], row[2], row[3]]);
        }
    }
    assert_eq!(rows.len(), 4, "generator {tag} needs 4 rows");
    [rows[0], rows[1], rows[2], rows[3]]
}

fn main() {
    println!("cargo:rerun-if-env-changed=SPINEL_GENERATORS");
    let manifest = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let path = env::var("SPINEL_GENERATORS")
        .map(PathBuf::from)
        .unwrap_or_else(|_| manifest.join("data/generators.txt"));
    println!("cargo:rerun-if-changed={}", path.display());
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let a = parse_block(&text, "[A]");
    let b = parse_block(&text, "[B]");
    let out = PathBuf::from(env::var("OUT_DIR").unwrap()).join("generators.rs");
    fs::write(
        out,
        format!(
            "/// Base generator A (integer, det 1).\npub const BASE_A: [[i64; 4]; 4] = {a:?};\n\
             /// Base generator B (integer, det 1).\npub const BASE_B: [[i64; 4]; 4] = {b:?};\n"
        ),
    )
    .unwrap();
}
