//! Thin wrapper over LAPACK's symmetric eigensolver.
//!
//! Eigenvalues-only dsyev on column-major storage, which is what
//! `nalgebra::DMatrix` uses. BLAS threading is pinned to one thread on first
//! use: sweeps parallelize across scales and trials instead, and
//! single-threaded kernels keep results bit-reproducible.

use std::os::raw::c_char;
use std::sync::Once;

use nalgebra::DMatrix;

use crate::{Error, Result};

extern "C" {
    fn dsyev_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );
    fn openblas_set_num_threads(n: i32);
}

static PIN_THREADS: Once = Once::new();

fn pin_blas_threads() {
    PIN_THREADS.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}

/// All eigenvalues of a symmetric matrix, ascending. The matrix is consumed
/// as scratch space; only its lower triangle is referenced.
pub fn symmetric_eigenvalues(mut a: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if n == 0 {
        return Ok(Vec::new());
    }
    pin_blas_threads();

    let jobz = b'N' as c_char;
    let uplo = b'L' as c_char;
    let ni = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;

    // Workspace query.
    let mut wkopt = 0.0f64;
    let query = -1i32;
    unsafe {
        dsyev_(&jobz, &uplo, &ni, a.as_mut_slice().as_mut_ptr(), &ni, w.as_mut_ptr(), &mut wkopt, &query, &mut info);
    }
    if info != 0 {
        return Err(Error::Eigensolver { n, info });
    }
    let lwork = wkopt as i32;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    unsafe {
        dsyev_(&jobz, &uplo, &ni, a.as_mut_slice().as_mut_ptr(), &ni, w.as_mut_ptr(), work.as_mut_ptr(), &lwork, &mut info);
    }
    if info != 0 {
        return Err(Error::Eigensolver { n, info });
    }
    Ok(w)
}
