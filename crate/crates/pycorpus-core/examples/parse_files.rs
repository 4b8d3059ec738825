// scratch harness used while developing the parser; removed before release
use pycorpus_core::pyparse::{parse_module_bytes, render_source, tree_equal, unparse_canonical};

fn main() {
    let mut ok = 0usize;
    let mut failed = 0usize;
    let mut broken_roundtrip = 0usize;
    for path in std::env::args().skip(1) {
        let bytes = std::fs::read(&path).unwrap();
        match parse_module_bytes(&bytes, &path) {
            Err(e) => {
                failed += 1;
                println!("PARSE-FAIL {}", e);
            }
            Ok(module) => {
                let lines = unparse_canonical(&module);
                let rendered = render_source(&lines);
                match parse_module_bytes(rendered.as_bytes(), &format!("{}<onepass>", path)) {
                    Err(e) => {
                        broken_roundtrip += 1;
                        println!("REPARSE-FAIL {}", e);
                    }
                    Ok(re) => {
                        if !tree_equal(&module, &re) {
                            broken_roundtrip += 1;
                            println!("TREE-DIFF {}", path);
                        } else {
                            let second = unparse_canonical(&re);
                            if second != lines {
                                broken_roundtrip += 1;
                                println!("NOT-IDEMPOTENT {}", path);
                            } else {
                                ok += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    println!(
        "ok={} parse_failed={} roundtrip_broken={}",
        ok, failed, broken_roundtrip
    );
}
