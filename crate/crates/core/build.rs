fn main() {
    // Symmetric eigensolves go through LAPACK's dsyev, provided by OpenBLAS.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
