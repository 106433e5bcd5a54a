//! Dense complex linear-algebra helpers used throughout the crate.
//!
//! Vectorization is column-stacking throughout: `vec(A rho B) = (B^T kron A) vec(rho)`.
//!
//! OpenBLAS is pinned to a single thread on first use: its threaded driver
//! keeps a scheduling queue on the calling thread's stack, which overflows
//! the 2 MB default of spawned threads, and single-threaded reductions keep
//! results bit-reproducible across runs.

use crate::error::{Error, Result};
use ndarray::prelude::*;
use ndarray_linalg::{Eig, Eigh, Solve, UPLO};
use num_complex::Complex64 as C64;
use std::sync::Once;

extern "C" {
    fn openblas_set_num_threads(num_threads: std::os::raw::c_int);
}

static BLAS_INIT: Once = Once::new();

/// Force single-threaded OpenBLAS (idempotent, called before BLAS-heavy work).
pub fn ensure_blas_single_thread() {
    BLAS_INIT.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Kronecker product of two dense complex matrices.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::<C64>::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij != ZERO {
                out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb])
                    .assign(&b.mapv(|x| x * aij));
            }
        }
    }
    out
}

/// Column-stacking vectorization: out[j*d + i] = m[i, j].
pub fn vec_cs(m: &Array2<C64>) -> Array1<C64> {
    let (d, dc) = m.dim();
    debug_assert_eq!(d, dc);
    let mut out = Array1::<C64>::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            out[j * d + i] = m[[i, j]];
        }
    }
    out
}

/// Inverse of [`vec_cs`].
pub fn unvec_cs(v: &Array1<C64>, d: usize) -> Array2<C64> {
    debug_assert_eq!(v.len(), d * d);
    let mut out = Array2::<C64>::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            out[[i, j]] = v[j * d + i];
        }
    }
    out
}

/// Conjugate transpose.
pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    let mut out = m.t().to_owned();
    out.mapv_inplace(|z| z.conj());
    out
}

/// Largest entry magnitude.
#[allow(dead_code)] // test helper across modules
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &Array1<C64>) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-norm of the anti-Hermitian part, `max |M - M^dag| / 2`-style residue.
pub fn hermiticity_residue(m: &Array2<C64>) -> f64 {
    let d = m.nrows();
    let mut res = 0.0f64;
    for i in 0..d {
        for j in i..d {
            res = res.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    res
}

/// Matrix 1-norm (max column sum of magnitudes).
pub fn one_norm(m: &Array2<C64>) -> f64 {
    let (r, c) = m.dim();
    let mut best = 0.0f64;
    for j in 0..c {
        let mut s = 0.0;
        for i in 0..r {
            s += m[[i, j]].norm();
        }
        best = best.max(s);
    }
    best
}

/// Matrix exponential by scaling-and-squaring with a Pade(13) approximant.
///
/// Scaling keeps the 1-norm below theta_13 = 5.37; the approximant then holds
/// to machine precision.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    ensure_blas_single_thread();
    const THETA_13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidInput("expm requires a square matrix".into()));
    }
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new((0.5f64).powi(s as i32), 0.0);
    let a1 = a.mapv(|z| z * scale);

    let eye = Array2::<C64>::eye(n);
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let b = |k: usize| C64::new(B[k], 0.0);
    let u_inner = a6.mapv(|z| z * b(13)) + a4.mapv(|z| z * b(11)) + a2.mapv(|z| z * b(9));
    let u_poly = a6.dot(&u_inner)
        + a6.mapv(|z| z * b(7))
        + a4.mapv(|z| z * b(5))
        + a2.mapv(|z| z * b(3))
        + eye.mapv(|z| z * b(1));
    let u = a1.dot(&u_poly);
    let v_inner = a6.mapv(|z| z * b(12)) + a4.mapv(|z| z * b(10)) + a2.mapv(|z| z * b(8));
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * b(6))
        + a4.mapv(|z| z * b(4))
        + a2.mapv(|z| z * b(2))
        + eye.mapv(|z| z * b(0));

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = solve_matrix(&lhs, &rhs)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Solve A X = B column-by-column through one LU factorization.
pub fn solve_matrix(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    ensure_blas_single_thread();
    use ndarray_linalg::Factorize;
    let f = a.factorize().map_err(Error::from)?;
    let n = b.nrows();
    let m = b.ncols();
    let mut out = Array2::<C64>::zeros((n, m));
    for j in 0..m {
        let col = b.column(j).to_owned();
        let x = f.solve(&col).map_err(Error::from)?;
        out.column_mut(j).assign(&x);
    }
    Ok(out)
}

/// Binary powering.
pub fn matrix_power(a: &Array2<C64>, mut k: usize) -> Array2<C64> {
    ensure_blas_single_thread();
    let n = a.nrows();
    let mut result = Array2::<C64>::eye(n);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = result.dot(&base);
        }
        k >>= 1;
        if k > 0 {
            base = base.dot(&base);
        }
    }
    result
}

/// Eigendecomposition of a Hermitian matrix, ascending eigenvalues.
///
/// Rejects inputs whose anti-Hermitian residue exceeds `herm_tol`.
pub fn eigh_checked(m: &Array2<C64>, herm_tol: f64) -> Result<(Array1<f64>, Array2<C64>)> {
    ensure_blas_single_thread();
    let res = hermiticity_residue(m);
    if res > herm_tol {
        return Err(Error::NonHermitian { residue: res });
    }
    let sym = m.mapv(|z| z); // eigh reads the lower triangle; pass as-is
    let (w, v) = sym.eigh(UPLO::Lower).map_err(Error::from)?;
    Ok((w, v))
}

/// General complex eigendecomposition (eigenvalues unsorted, right eigenvectors).
pub fn eig_general(m: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    ensure_blas_single_thread();
    let (w, v) = m.eig().map_err(Error::from)?;
    Ok((w, v))
}

/// Linear solve A x = b.
pub fn solve_vector(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    ensure_blas_single_thread();
    a.solve(b).map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_identity_blocks() {
        let a = Array2::<C64>::eye(2);
        let mut b = Array2::<C64>::zeros((2, 2));
        b[[0, 1]] = ONE;
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[[0, 1]], ONE);
        assert_eq!(k[[2, 3]], ONE);
        assert_eq!(k[[0, 3]], ZERO);
    }

    #[test]
    fn vec_roundtrip_column_stacking() {
        let mut m = Array2::<C64>::zeros((2, 2));
        m[[0, 0]] = ONE;
        m[[1, 0]] = C64::new(2.0, 0.0);
        m[[0, 1]] = C64::new(3.0, 0.0);
        m[[1, 1]] = C64::new(4.0, 0.0);
        let v = vec_cs(&m);
        // column stacking: (m00, m10, m01, m11)
        assert_eq!(v[0], ONE);
        assert_eq!(v[1], C64::new(2.0, 0.0));
        assert_eq!(v[2], C64::new(3.0, 0.0));
        assert_eq!(unvec_cs(&v, 2), m);
    }

    #[test]
    fn superop_convention_matches_kron_formula() {
        // vec(A rho B) = (B^T kron A) vec(rho) for random-ish small matrices
        let a = arr2(&[[C64::new(1.0, 0.5), C64::new(0.0, -1.0)], [C64::new(2.0, 0.0), C64::new(0.3, 0.1)]]);
        let b = arr2(&[[C64::new(0.2, 0.0), C64::new(1.5, -0.5)], [C64::new(0.0, 2.0), C64::new(1.0, 1.0)]]);
        let rho = arr2(&[[C64::new(0.7, 0.0), C64::new(0.1, 0.2)], [C64::new(0.1, -0.2), C64::new(0.3, 0.0)]]);
        let lhs = vec_cs(&a.dot(&rho).dot(&b));
        let sup = kron(&b.t().to_owned(), &a);
        let rhs = sup.dot(&vec_cs(&rho));
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Array2::<C64>::zeros((4, 4));
        let e = expm(&z).unwrap();
        assert!(max_abs(&(&e - &Array2::<C64>::eye(4))) < 1e-14);
    }

    #[test]
    fn expm_diagonal() {
        let mut d = Array2::<C64>::zeros((3, 3));
        d[[0, 0]] = C64::new(1.0, 0.0);
        d[[1, 1]] = C64::new(-2.0, 0.0);
        d[[2, 2]] = C64::new(0.0, 3.0);
        let e = expm(&d).unwrap();
        assert!((e[[0, 0]] - C64::new(1.0f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[[1, 1]] - C64::new((-2.0f64).exp(), 0.0)).norm() < 1e-13);
        assert!((e[[2, 2]] - C64::new(0.0, 3.0).exp()).norm() < 1e-13);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        // exp of 20 * skew matrix stays unitary
        let mut g = Array2::<C64>::zeros((2, 2));
        g[[0, 1]] = C64::new(20.0, 0.0);
        g[[1, 0]] = C64::new(-20.0, 0.0);
        let e = expm(&g).unwrap();
        let u = e.dot(&adjoint(&e));
        assert!(max_abs(&(&u - &Array2::<C64>::eye(2))) < 1e-12);
        assert!((e[[0, 0]].re - 20.0f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn matrix_power_matches_repeated_dot() {
        let a = arr2(&[[C64::new(0.5, 0.1), C64::new(0.2, 0.0)], [C64::new(0.0, 0.3), C64::new(0.9, 0.0)]]);
        let p5 = matrix_power(&a, 5);
        let mut r = Array2::<C64>::eye(2);
        for _ in 0..5 {
            r = r.dot(&a);
        }
        assert!(max_abs(&(&p5 - &r)) < 1e-13);
    }
}
