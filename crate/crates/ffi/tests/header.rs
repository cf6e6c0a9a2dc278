//! Keep the committed header in sync with the exported surface.
//!
//! Regenerate with `STORMGRID_FFI_WRITE_HEADER=1 cargo build -p stormgrid-ffi`.

use std::path::Path;

const EXPORTS: &[&str] = &[
    "sg_version",
    "sg_last_error",
    "sg_string_free",
    "sg_assess_run",
    "sg_assessment_free",
    "sg_assessment_r_sys_mw",
    "sg_assessment_meets_target",
    "sg_assessment_scenario_count",
    "sg_assessment_j_max",
    "sg_assessment_corridor_count",
    "sg_assessment_corridor",
    "sg_wind_at",
];

#[test]
fn committed_header_declares_every_export() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/stormgrid.h");
    let header = std::fs::read_to_string(&path).expect("committed header exists");
    for symbol in EXPORTS {
        assert!(
            header.contains(&format!("{symbol}(")),
            "{symbol} missing from include/stormgrid.h; regenerate it"
        );
    }
    for token in ["SgStatus", "SgAssessment", "STORMGRID_H"] {
        assert!(header.contains(token), "{token} missing from header");
    }
}

#[test]
fn generated_header_matches_committed() {
    let generated = Path::new(env!("OUT_DIR")).join("stormgrid.h");
    let committed = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/stormgrid.h");
    let a = std::fs::read_to_string(generated).expect("build script wrote the header");
    let b = std::fs::read_to_string(committed).unwrap();
    assert_eq!(
        a, b,
        "committed header out of date; regenerate with STORMGRID_FFI_WRITE_HEADER=1"
    );
}

#[test]
fn header_compiles_as_c() {
    let committed = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/stormgrid.h");
    let dir = std::env::temp_dir();
    let src = dir.join("stormgrid_header_check.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ return 0; }}\n",
            committed.display()
        ),
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "header failed C compilation"),
        Err(_) => eprintln!("cc not available; skipping header compile check"),
    }
}
