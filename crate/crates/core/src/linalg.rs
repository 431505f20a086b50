//! Thin safe wrappers over the LAPACK routines used by the solver.

use nalgebra::DMatrix;

/// LU factorization with partial pivoting.
pub struct Lu {
    n: usize,
    a: DMatrix<f64>,
    ipiv: Vec<i32>,
    anorm1: f64,
}

impl Lu {
    /// Factors a square matrix; `None` if it is exactly singular.
    pub fn new(mut a: DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let anorm1 = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut ipiv = vec![0i32; n];
        let mut info = 0;
        let ni = n as i32;
        unsafe {
            lapack_sys::dgetrf_(&ni, &ni, a.as_mut_slice().as_mut_ptr(), &ni, ipiv.as_mut_ptr(), &mut info);
        }
        if info != 0 {
            return None;
        }
        Some(Self { n, a, ipiv, anorm1 })
    }

    /// Solves `A X = B` in place.
    pub fn solve_in_place(&self, b: &mut DMatrix<f64>) {
        assert_eq!(b.nrows(), self.n);
        let ni = self.n as i32;
        let nrhs = b.ncols() as i32;
        let mut info = 0;
        let trans = b'N' as libc_char;
        unsafe {
            lapack_sys::dgetrs_(
                &trans,
                &ni,
                &nrhs,
                self.a.as_slice().as_ptr(),
                &ni,
                self.ipiv.as_ptr(),
                b.as_mut_slice().as_mut_ptr(),
                &ni,
                &mut info,
            );
        }
        debug_assert_eq!(info, 0);
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }

    /// Estimated 1-norm condition number.
    pub fn condition(&self) -> f64 {
        let ni = self.n as i32;
        let mut rcond = 0.0;
        let mut work = vec![0.0; 4 * self.n];
        let mut iwork = vec![0i32; self.n];
        let mut info = 0;
        let norm = b'1' as libc_char;
        unsafe {
            lapack_sys::dgecon_(
                &norm,
                &ni,
                self.a.as_slice().as_ptr(),
                &ni,
                &self.anorm1,
                &mut rcond,
                work.as_mut_ptr(),
                iwork.as_mut_ptr(),
                &mut info,
            );
        }
        if info != 0 || rcond == 0.0 {
            f64::INFINITY
        } else {
            1.0 / rcond
        }
    }
}

#[allow(non_camel_case_types)]
type libc_char = std::os::raw::c_char;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
/// matrix; only the upper triangle is read.
pub fn symmetric_eigen(mut a: DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let ni = n as i32;
    let mut w = vec![0.0; n];
    let jobz = b'V' as libc_char;
    let uplo = b'L' as libc_char;
    let mut info = 0;
    let mut lwork = -1;
    let mut liwork = -1;
    let mut wq = [0.0];
    let mut iwq = [0i32];
    unsafe {
        lapack_sys::dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_slice().as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            wq.as_mut_ptr(),
            &lwork,
            iwq.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return None;
    }
    lwork = wq[0] as i32;
    liwork = iwq[0];
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_slice().as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return None;
    }
    Some((w, a))
}

/// The `k` smallest eigenvalues (ascending) and their eigenvectors of a
/// symmetric matrix; only the lower triangle is read.
pub fn symmetric_eigen_lowest(mut a: DMatrix<f64>, k: usize) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let k = k.min(n);
    if k == 0 {
        return Some((vec![], DMatrix::zeros(n, 0)));
    }
    let ni = n as i32;
    let (il, iu) = (1i32, k as i32);
    let jobz = b'V' as libc_char;
    let range = b'I' as libc_char;
    let uplo = b'L' as libc_char;
    let abstol = 0.0;
    let mut m = 0i32;
    let mut w = vec![0.0; n];
    let mut z = DMatrix::<f64>::zeros(n, k);
    let mut isuppz = vec![0i32; 2 * k];
    let mut info = 0;
    let mut wq = [0.0];
    let mut iwq = [0i32];
    let query = -1;
    unsafe {
        lapack_sys::dsyevr_(
            &jobz, &range, &uplo, &ni, a.as_mut_slice().as_mut_ptr(), &ni, &0.0, &0.0, &il, &iu, &abstol,
            &mut m, w.as_mut_ptr(), z.as_mut_slice().as_mut_ptr(), &ni, isuppz.as_mut_ptr(), wq.as_mut_ptr(),
            &query, iwq.as_mut_ptr(), &query, &mut info,
        );
    }
    if info != 0 {
        return None;
    }
    let lwork = wq[0] as i32;
    let liwork = iwq[0];
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevr_(
            &jobz, &range, &uplo, &ni, a.as_mut_slice().as_mut_ptr(), &ni, &0.0, &0.0, &il, &iu, &abstol,
            &mut m, w.as_mut_ptr(), z.as_mut_slice().as_mut_ptr(), &ni, isuppz.as_mut_ptr(), work.as_mut_ptr(),
            &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 || m as usize != k {
        return None;
    }
    w.truncate(k);
    Some((w, z))
}

/// Orthogonal reduction `A = Q H Q^T` to upper Hessenberg form.
pub struct Hessenberg {
    n: usize,
    /// `H` on and above the subdiagonal, reflectors below.
    packed: DMatrix<f64>,
    tau: Vec<f64>,
}

impl Hessenberg {
    pub fn new(mut a: DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let ni = n as i32;
        let mut tau = vec![0.0; n.max(2) - 1];
        let mut info = 0;
        let mut wq = [0.0];
        unsafe {
            lapack_sys::dgehrd_(&ni, &1, &ni, a.as_mut_slice().as_mut_ptr(), &ni, tau.as_mut_ptr(), wq.as_mut_ptr(), &-1, &mut info);
        }
        let lwork = (wq[0] as i32).max(1);
        let mut work = vec![0.0; lwork as usize];
        unsafe {
            lapack_sys::dgehrd_(&ni, &1, &ni, a.as_mut_slice().as_mut_ptr(), &ni, tau.as_mut_ptr(), work.as_mut_ptr(), &lwork, &mut info);
        }
        if info != 0 {
            return None;
        }
        Some(Self { n, packed: a, tau })
    }

    /// `H[i, j]`.
    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        if i > j + 1 {
            0.0
        } else {
            self.packed[(i, j)]
        }
    }

    /// Overwrites `c` with `Q c` or `Q^T c`.
    pub fn apply_q(&self, c: &mut DMatrix<f64>, transpose: bool) {
        assert_eq!(c.nrows(), self.n);
        if c.ncols() == 0 || self.n < 2 {
            return;
        }
        let ni = self.n as i32;
        let nc = c.ncols() as i32;
        let side = b'L' as libc_char;
        let trans = if transpose { b'T' } else { b'N' } as libc_char;
        let mut info = 0;
        let mut wq = [0.0];
        unsafe {
            lapack_sys::dormhr_(
                &side, &trans, &ni, &nc, &1, &ni, self.packed.as_slice().as_ptr(), &ni, self.tau.as_ptr(),
                c.as_mut_slice().as_mut_ptr(), &ni, wq.as_mut_ptr(), &-1, &mut info,
            );
        }
        let lwork = (wq[0] as i32).max(1);
        let mut work = vec![0.0; lwork as usize];
        unsafe {
            lapack_sys::dormhr_(
                &side, &trans, &ni, &nc, &1, &ni, self.packed.as_slice().as_ptr(), &ni, self.tau.as_ptr(),
                c.as_mut_slice().as_mut_ptr(), &ni, work.as_mut_ptr(), &lwork, &mut info,
            );
        }
        debug_assert_eq!(info, 0);
    }

    /// `H x` for each column of `x`.
    pub fn mul_h(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..n {
                let xj = x[(j, c)];
                if xj == 0.0 {
                    continue;
                }
                for i in 0..(j + 2).min(n) {
                    out[(i, c)] += self.h(i, j) * xj;
                }
            }
        }
        out
    }

    /// Solves `(H - sigma I) X = B` in place by Gaussian elimination with
    /// adjacent-row pivoting; `false` if the shifted matrix is singular.
    pub fn shifted_solve(&self, sigma: f64, b: &mut DMatrix<f64>) -> bool {
        let n = self.n;
        let mut u = DMatrix::from_fn(n, n, |i, j| self.h(i, j) - if i == j { sigma } else { 0.0 });
        for k in 0..n.saturating_sub(1) {
            if u[(k + 1, k)].abs() > u[(k, k)].abs() {
                u.swap_rows(k, k + 1);
                b.swap_rows(k, k + 1);
            }
            let piv = u[(k, k)];
            if piv == 0.0 {
                return false;
            }
            let l = u[(k + 1, k)] / piv;
            if l != 0.0 {
                for j in k..n {
                    let v = u[(k, j)];
                    u[(k + 1, j)] -= l * v;
                }
                for c in 0..b.ncols() {
                    let v = b[(k, c)];
                    b[(k + 1, c)] -= l * v;
                }
            }
        }
        for c in 0..b.ncols() {
            for i in (0..n).rev() {
                let mut s = b[(i, c)];
                for j in i + 1..n {
                    s -= u[(i, j)] * b[(j, c)];
                }
                if u[(i, i)] == 0.0 {
                    return false;
                }
                b[(i, c)] = s / u[(i, i)];
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_estimates_condition() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let b = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let lu = Lu::new(a.clone()).unwrap();
        let x = lu.solve(&b);
        assert!((&a * &x - &b).amax() < 1e-14);
        // oracle: exact inverse
        let inv = a.clone().try_inverse().unwrap();
        let norm1 = |m: &DMatrix<f64>| (0..3).map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let exact = norm1(&a) * norm1(&inv);
        let est = lu.condition();
        assert!(est <= exact * (1.0 + 1e-12) && est >= exact / 3.0, "{est} vs {exact}");
    }

    #[test]
    fn lowest_eigenpairs_match_full_decomposition() {
        let a = DMatrix::from_fn(8, 8, |i, j| if i == j { i as f64 + 1.0 } else { 0.1 / (1.0 + (i + j) as f64) });
        let (all, _) = symmetric_eigen(a.clone()).unwrap();
        let (low, v) = symmetric_eigen_lowest(a.clone(), 3).unwrap();
        for j in 0..3 {
            assert!((low[j] - all[j]).abs() < 1e-13);
            let col = v.column(j);
            assert!((&a * col - col * low[j]).amax() < 1e-12);
        }
    }

    #[test]
    fn hessenberg_reduction_and_shifted_solve() {
        let n = 7;
        let a = DMatrix::from_fn(n, n, |i, j| ((3 * i + 5 * j) % 7) as f64 - 2.5 + if i == j { 4.0 } else { 0.0 });
        let hs = Hessenberg::new(a.clone()).unwrap();
        // Q H Q^T x == A x
        let x = DMatrix::from_fn(n, 2, |i, j| (i + 2 * j) as f64 * 0.3 - 1.0);
        let mut y = x.clone();
        hs.apply_q(&mut y, true);
        let mut hy = hs.mul_h(&y);
        hs.apply_q(&mut hy, false);
        assert!((&hy - &a * &x).amax() < 1e-12);
        // (A - sigma) z = x through the Hessenberg form
        let sigma = 0.37;
        let mut z = x.clone();
        hs.apply_q(&mut z, true);
        assert!(hs.shifted_solve(sigma, &mut z));
        hs.apply_q(&mut z, false);
        let shifted = &a - DMatrix::identity(n, n) * sigma;
        assert!((&shifted * &z - &x).amax() < 1e-11);
    }

    #[test]
    fn singular_matrix_has_no_lu() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(Lu::new(a).is_none());
    }

    #[test]
    fn symmetric_eigen_matches_nalgebra() {
        let a = DMatrix::from_fn(5, 5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let (w, v) = symmetric_eigen(a.clone()).unwrap();
        let mut oracle: Vec<f64> = nalgebra::SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
        oracle.sort_by(|x, y| x.total_cmp(y));
        for (x, y) in w.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-13);
        }
        let r = &a * &v - &v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w));
        assert!(r.amax() < 1e-13);
    }
}
