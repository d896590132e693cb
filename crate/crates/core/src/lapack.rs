//! Thin safe wrappers over the three LAPACK routines this crate needs.
//!
//! Matrices cross the FFI boundary in column-major order; the wrappers
//! convert from ndarray's row-major layout and back.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};

mod ffi {
    use num_complex::Complex64 as C64;
    extern "C" {
        pub fn zgeev_(
            jobvl: *const u8,
            jobvr: *const u8,
            n: *const i32,
            a: *mut C64,
            lda: *const i32,
            w: *mut C64,
            vl: *mut C64,
            ldvl: *const i32,
            vr: *mut C64,
            ldvr: *const i32,
            work: *mut C64,
            lwork: *const i32,
            rwork: *mut f64,
            info: *mut i32,
        );
        pub fn zheev_(
            jobz: *const u8,
            uplo: *const u8,
            n: *const i32,
            a: *mut C64,
            lda: *const i32,
            w: *mut f64,
            work: *mut C64,
            lwork: *const i32,
            rwork: *mut f64,
            info: *mut i32,
        );
        pub fn zgesv_(
            n: *const i32,
            nrhs: *const i32,
            a: *mut C64,
            lda: *const i32,
            ipiv: *mut i32,
            b: *mut C64,
            ldb: *const i32,
            info: *mut i32,
        );
        pub fn zgemm_(
            transa: *const u8,
            transb: *const u8,
            m: *const i32,
            n: *const i32,
            k: *const i32,
            alpha: *const C64,
            a: *const C64,
            lda: *const i32,
            b: *const C64,
            ldb: *const i32,
            beta: *const C64,
            c: *mut C64,
            ldc: *const i32,
        );
    }
}

fn to_col_major(a: &Array2<C64>) -> Vec<C64> {
    let (n, m) = a.dim();
    let mut out = Vec::with_capacity(n * m);
    for j in 0..m {
        for i in 0..n {
            out.push(a[[i, j]]);
        }
    }
    out
}

fn from_col_major(v: &[C64], n: usize, m: usize) -> Array2<C64> {
    let mut out = Array2::zeros((n, m));
    for j in 0..m {
        for i in 0..n {
            out[[i, j]] = v[j * n + i];
        }
    }
    out
}

/// Eigendecomposition of a general complex matrix.
///
/// Returns (eigenvalues, right eigenvectors as columns).
pub fn eig(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eig requires a square matrix");
    let ni = n as i32;
    let mut af = to_col_major(a);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vr = vec![C64::new(0.0, 0.0); n * n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    // workspace query
    let mut wkopt = C64::new(0.0, 0.0);
    unsafe {
        ffi::zgeev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni, af.as_mut_ptr(), &ni,
            w.as_mut_ptr(), std::ptr::null_mut(), &1, vr.as_mut_ptr(), &ni,
            &mut wkopt, &(-1i32), rwork.as_mut_ptr(), &mut info,
        );
    }
    let lwork = wkopt.re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    unsafe {
        ffi::zgeev_(
            b"N".as_ptr(), b"V".as_ptr(), &ni, af.as_mut_ptr(), &ni,
            w.as_mut_ptr(), std::ptr::null_mut(), &1, vr.as_mut_ptr(), &ni,
            work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::Lapack { routine: "zgeev", info });
    }
    Ok((Array1::from_vec(w), from_col_major(&vr, n, n)))
}

/// Eigenvalues only of a general complex matrix.
pub fn eigvals(a: &Array2<C64>) -> Result<Array1<C64>> {
    let n = a.nrows();
    let ni = n as i32;
    let mut af = to_col_major(a);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let mut wkopt = C64::new(0.0, 0.0);
    unsafe {
        ffi::zgeev_(
            b"N".as_ptr(), b"N".as_ptr(), &ni, af.as_mut_ptr(), &ni,
            w.as_mut_ptr(), std::ptr::null_mut(), &1, std::ptr::null_mut(), &1,
            &mut wkopt, &(-1i32), rwork.as_mut_ptr(), &mut info,
        );
    }
    let lwork = wkopt.re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    unsafe {
        ffi::zgeev_(
            b"N".as_ptr(), b"N".as_ptr(), &ni, af.as_mut_ptr(), &ni,
            w.as_mut_ptr(), std::ptr::null_mut(), &1, std::ptr::null_mut(), &1,
            work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::Lapack { routine: "zgeev", info });
    }
    Ok(Array1::from_vec(w))
}

/// Eigendecomposition of a Hermitian matrix (ascending eigenvalues).
///
/// Returns (eigenvalues, eigenvectors as columns).
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = a.nrows();
    let ni = n as i32;
    let mut af = to_col_major(a);
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; (3 * n).max(1)];
    let mut info = 0i32;
    let mut wkopt = C64::new(0.0, 0.0);
    unsafe {
        ffi::zheev_(
            b"V".as_ptr(), b"L".as_ptr(), &ni, af.as_mut_ptr(), &ni,
            w.as_mut_ptr(), &mut wkopt, &(-1i32), rwork.as_mut_ptr(), &mut info,
        );
    }
    let lwork = wkopt.re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    unsafe {
        ffi::zheev_(
            b"V".as_ptr(), b"L".as_ptr(), &ni, af.as_mut_ptr(), &ni,
            w.as_mut_ptr(), work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::Lapack { routine: "zheev", info });
    }
    Ok((Array1::from_vec(w), from_col_major(&af, n, n)))
}

/// Solve the linear system `a x = b` for one right-hand side.
pub fn solve(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    let x = solve_multi(a, &b.clone().insert_axis(ndarray::Axis(1)))?;
    Ok(x.index_axis(ndarray::Axis(1), 0).to_owned())
}

/// Solve `a X = B` for a matrix of right-hand sides.
pub fn solve_multi(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.nrows());
    let nrhs = b.ncols();
    let ni = n as i32;
    let nrhsi = nrhs as i32;
    let mut af = to_col_major(a);
    let mut bf = to_col_major(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        ffi::zgesv_(
            &ni, &nrhsi, af.as_mut_ptr(), &ni, ipiv.as_mut_ptr(),
            bf.as_mut_ptr(), &ni, &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::Lapack { routine: "zgesv", info });
    }
    Ok(from_col_major(&bf, n, nrhs))
}

/// BLAS-backed matrix product `a * b`.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (m, k) = a.dim();
    let (k2, n) = b.dim();
    assert_eq!(k, k2, "matmul dimension mismatch");
    // Row-major trick: C_row = A_row * B_row  <=>  C_col^T = (B_col^T)(A_col^T),
    // so call zgemm with swapped operands on the row-major buffers reinterpreted
    // as column-major transposes.
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut c = Array2::<C64>::zeros((m, n));
    let a_s = a.as_standard_layout();
    let b_s = b.as_standard_layout();
    unsafe {
        ffi::zgemm_(
            b"N".as_ptr(), b"N".as_ptr(), &ni, &mi, &ki, &one,
            b_s.as_ptr(), &ni, a_s.as_ptr(), &ki, &zero,
            c.as_mut_ptr(), &ni,
        );
    }
    c
}
