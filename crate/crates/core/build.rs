fn main() {
    // System OpenBLAS bundles the reference LAPACK (zgeev/zheev/zgesv/zgemm).
    println!("cargo:rustc-link-lib=dylib=openblas");
}
