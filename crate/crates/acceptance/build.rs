// Links the drivers against the system Fortran BLAS when one is installed.

use std::path::Path;

const SEARCH: [&str; 5] =
    ["/usr/lib/x86_64-linux-gnu", "/usr/lib/aarch64-linux-gnu", "/usr/lib64", "/usr/lib", "/usr/local/lib"];

fn main() {
    println!("cargo::rustc-check-cfg=cfg(system_blas)");
    println!("cargo::rerun-if-env-changed=OZGEMM_BLAS_DIR");
    let mut dirs: Vec<String> = std::env::var("OZGEMM_BLAS_DIR").into_iter().collect();
    dirs.extend(SEARCH.iter().map(|s| s.to_string()));
    for dir in &dirs {
        for lib in ["blas", "openblas"] {
            if Path::new(dir).join(format!("lib{lib}.so")).exists() {
                println!("cargo::rustc-link-search=native={dir}");
                println!("cargo::rustc-link-arg-bins=-l{lib}");
                println!("cargo::rustc-cfg=system_blas");
                println!("cargo::rustc-env=OZGEMM_SYSTEM_BLAS=lib{lib}.so");
                return;
            }
        }
    }
    println!("cargo::warning=no system BLAS found; the preload drivers will report themselves unavailable");
}
