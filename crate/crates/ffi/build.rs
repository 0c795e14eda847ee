fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("cargo sets CARGO_MANIFEST_DIR");
    let header = std::path::Path::new(&crate_dir).join("include").join("rtt_qe.h");
    match cbindgen::generate(&crate_dir) {
        // write_to_file leaves an unchanged header untouched, so this does
        // not dirty incremental builds.
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(err) => panic!("header generation failed: {err}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
