use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = PathBuf::from(env::var("OUT_DIR").unwrap()).join("stormgrid.h");

    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(cbindgen::Config::from_file(format!("{crate_dir}/cbindgen.toml")).unwrap())
        .generate()
        .expect("cbindgen header generation failed");
    bindings.write_to_file(&out);

    // refresh the committed header on demand:
    //   STORMGRID_FFI_WRITE_HEADER=1 cargo build -p stormgrid-ffi
    if env::var("STORMGRID_FFI_WRITE_HEADER").is_ok() {
        bindings.write_to_file(PathBuf::from(&crate_dir).join("include/stormgrid.h"));
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    println!("cargo:rerun-if-env-changed=STORMGRID_FFI_WRITE_HEADER");
}
