//! Dense complex-matrix helpers on top of `ndarray`.
//!
//! Everything operates on `Array2<Complex<T>>` with the scalar type left
//! generic. Eigenvalues are computed by a self-contained cyclic Jacobi
//! sweep; matrix dimensions in this crate are tiny (at most a few hundred),
//! so the quadratic-per-sweep cost is irrelevant and no external LAPACK
//! binding is needed.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar, C};

/// Complex identity matrix of dimension `d`.
pub fn identity<T: Scalar>(d: usize) -> Array2<C<T>> {
    Array2::from_diag_elem(d, Complex::new(T::one(), T::zero()))
}

/// Conjugate transpose.
pub fn adjoint<T: Scalar>(m: &Array2<C<T>>) -> Array2<C<T>> {
    m.t().mapv(|x| x.conj())
}

/// Matrix trace.
pub fn trace<T: Scalar>(m: &Array2<C<T>>) -> C<T> {
    m.diag().iter().copied().sum()
}

/// Kronecker product, with the left factor on the leading qubits.
pub fn kron<T: Scalar>(a: &Array2<C<T>>, b: &Array2<C<T>>) -> Array2<C<T>> {
    ndarray::linalg::kron(a, b)
}

/// Largest entrywise modulus.
pub fn max_abs<T: Scalar>(m: &Array2<C<T>>) -> T {
    m.iter().map(|x| x.norm()).fold(T::zero(), T::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff<T: Scalar>(a: &Array2<C<T>>, b: &Array2<C<T>>) -> T {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(T::zero(), T::max)
}

/// Frobenius norm.
pub fn frobenius_norm<T: Scalar>(m: &Array2<C<T>>) -> T {
    m.iter()
        .map(|x| x.norm_sqr())
        .fold(T::zero(), |acc, x| acc + x)
        .sqrt()
}

/// Whether `m` is Hermitian to entrywise tolerance `tol`.
pub fn is_hermitian<T: Scalar>(m: &Array2<C<T>>, tol: T) -> bool {
    let (r, c) = m.dim();
    if r != c {
        return false;
    }
    for i in 0..r {
        for j in i..c {
            if (m[[i, j]] - m[[j, i]].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Whether every entry of `m` has imaginary part at most `tol` in modulus.
pub fn is_real<T: Scalar>(m: &Array2<C<T>>, tol: T) -> bool {
    m.iter().all(|x| x.im.abs() <= tol)
}

/// Eigenvalues of a real symmetric matrix (passed as its real part), in
/// ascending order, via cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<T: Scalar>(m: &Array2<C<T>>) -> Result<Vec<T>> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {r}x{c}"
        )));
    }
    let mut a: Vec<Vec<T>> = (0..r)
        .map(|i| (0..c).map(|j| m[[i, j]].re).collect())
        .collect();
    jacobi_in_place(&mut a);
    let mut eig: Vec<T> = (0..r).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(eig)
}

/// Eigenvalues of a complex Hermitian matrix, in ascending order.
///
/// Works through the standard real doubling: with `H = R + iS`, the real
/// symmetric matrix `[[R, -S], [S, R]]` has the spectrum of `H` with every
/// eigenvalue doubled, so we diagonalize the doubled matrix and keep one
/// copy of each pair.
pub fn hermitian_eigenvalues<T: Scalar>(m: &Array2<C<T>>) -> Result<Vec<T>> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {r}x{c}"
        )));
    }
    if is_real(m, T::zero()) {
        return symmetric_eigenvalues(m);
    }
    let d = r;
    let mut a: Vec<Vec<T>> = vec![vec![T::zero(); 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            let x = m[[i, j]];
            a[i][j] = x.re;
            a[i + d][j + d] = x.re;
            a[i][j + d] = -x.im;
            a[i + d][j] = x.im;
        }
    }
    jacobi_in_place(&mut a);
    let mut eig: Vec<T> = (0..2 * d).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    // Adjacent entries are the doubled pairs; keep the even positions.
    Ok(eig.into_iter().step_by(2).collect())
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix, in place.
#[allow(clippy::needless_range_loop)]
fn jacobi_in_place<T: Scalar>(a: &mut [Vec<T>]) {
    let d = a.len();
    if d <= 1 {
        return;
    }
    let off = |a: &[Vec<T>]| -> T {
        let mut s = T::zero();
        for i in 0..d {
            for j in (i + 1)..d {
                s += a[i][j] * a[i][j];
            }
        }
        s.sqrt()
    };
    let scale = {
        let mut s = T::zero();
        for row in a.iter() {
            for &x in row {
                s += x * x;
            }
        }
        s.sqrt().max(T::one())
    };
    let tol = T::epsilon() * scale * real::<T>(d as f64);
    for _sweep in 0..64 {
        if off(a) <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p][q];
                if apq.abs() <= T::epsilon() * scale {
                    continue;
                }
                // Classic two-sided rotation zeroing a[p][q].
                let theta = (a[q][q] - a[p][p]) / (real::<T>(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let cos = T::one() / (t * t + T::one()).sqrt();
                let sin = t * cos;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cos * akp - sin * akq;
                    a[k][q] = sin * akp + cos * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cos * apk - sin * aqk;
                    a[q][k] = sin * apk + cos * aqk;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_of_x_and_z() {
        let x = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let z = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
        let xz = kron(&x, &z);
        let expected = array![
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ];
        assert_eq!(xz, expected);
    }

    #[test]
    fn trace_and_adjoint() {
        let m = array![[c(1.0, 2.0), c(3.0, -1.0)], [c(0.5, 0.0), c(-1.0, 1.0)]];
        assert_eq!(trace(&m), c(0.0, 3.0));
        let ma = adjoint(&m);
        assert_eq!(ma[[0, 1]], c(0.5, 0.0));
        assert_eq!(ma[[1, 0]], c(3.0, 1.0));
    }

    #[test]
    fn symmetric_eigenvalues_known_matrix() {
        let m = array![[c(2.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(2.0, 0.0)]];
        let eig = symmetric_eigenvalues(&m).unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_known_matrix() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = array![[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(1.0, 0.0)]];
        let eig = hermitian_eigenvalues(&m).unwrap();
        assert!(eig[0].abs() < 1e-12, "{eig:?}");
        assert!((eig[1] - 2.0).abs() < 1e-12, "{eig:?}");
    }

    #[test]
    fn eigenvalue_sums_match_trace_and_frobenius() {
        // Deterministic pseudo-random Hermitian matrix.
        let d = 6;
        let mut rng = crate::rng::CounterRng::new(77, 0);
        let mut m = Array2::from_elem((d, d), c(0.0, 0.0));
        for i in 0..d {
            for j in i..d {
                if i == j {
                    m[[i, i]] = c(rng.normal(), 0.0);
                } else {
                    let x = c(rng.normal(), rng.normal());
                    m[[i, j]] = x;
                    m[[j, i]] = x.conj();
                }
            }
        }
        let eig = hermitian_eigenvalues(&m).unwrap();
        let tr: f64 = eig.iter().sum();
        assert!((tr - trace(&m).re).abs() < 1e-10);
        let fr2: f64 = eig.iter().map(|x| x * x).sum();
        let fnorm = frobenius_norm(&m);
        assert!((fr2 - fnorm * fnorm).abs() < 1e-9);
    }

    #[test]
    fn hermitian_and_real_predicates() {
        let h = array![[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        assert!(is_hermitian(&h, 1e-15));
        assert!(!is_real(&h, 1e-15));
        let r = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(0.0, 0.0)]];
        assert!(is_real(&r, 1e-15));
    }

    #[test]
    fn max_abs_helpers() {
        let a = array![[c(1.0, 0.0), c(0.0, -3.0)]];
        let b = array![[c(1.0, 0.0), c(0.0, 0.0)]];
        assert_eq!(max_abs(&a), 3.0);
        assert_eq!(max_abs_diff(&a, &b), 3.0);
    }
}
