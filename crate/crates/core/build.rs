fn main() {
    println!("cargo:rerun-if-changed=build.rs");
    // lapack-sys only declares symbols; the system OpenBLAS carries LAPACK.
    if std::env::var_os("CARGO_FEATURE_LAPACK").is_some() {
        println!("cargo:rustc-link-lib=openblas");
    }
}
