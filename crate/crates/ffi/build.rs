//! Regenerates include/newsjudge.h from the public extern "C" surface.
//! The header is committed so downstream consumers do not need cbindgen.

use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config =
        cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml parses");
    let header_path = crate_dir.join("include").join("newsjudge.h");
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            let mut out = Vec::new();
            bindings.write(&mut out);
            let unchanged = fs::read(&header_path)
                .map(|old| old == out)
                .unwrap_or(false);
            if !unchanged {
                fs::create_dir_all(header_path.parent().unwrap()).unwrap();
                fs::write(&header_path, out).expect("write header");
            }
        }
        // Parse errors fail the build; only keep going when the committed
        // header can stand in (e.g. cbindgen unavailable in odd setups).
        Err(err) => {
            if header_path.exists() {
                println!("cargo:warning=cbindgen failed ({err}); using committed header");
            } else {
                panic!("cbindgen failed and no committed header exists: {err}");
            }
        }
    }
}
