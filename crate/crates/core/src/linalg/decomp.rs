//! Small dense factorizations: one-sided Jacobi SVD, Hessenberg QR eigenvalues
//! and Gaussian elimination with partial pivoting.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::matrix::Matrix;

const MAX_JACOBI_SWEEPS: usize = 80;
const MAX_QR_ITERATIONS: usize = 30;

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
///
/// For an `m x n` input, `u` is `m x n`, `v` is `n x n` and `s` holds `n`
/// values sorted in decreasing order. Columns of `u` belonging to zero
/// singular values are left at zero.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub s: Vec<T>,
    pub v: Matrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    let (m, n) = (a.rows(), a.cols());
    // column-major working copies
    let mut w: Vec<Vec<T>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let eps = T::epsilon();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..m {
                    alpha = alpha + w[p][i] * w[p][i];
                    beta = beta + w[q][i] * w[q][i];
                    gamma = gamma + w[p][i] * w[q][i];
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = w.iter().map(|col| col.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));

    let s: Vec<T> = order.iter().map(|&k| norms[k]).collect();
    let u = Matrix::from_fn(m, n, |i, j| {
        let k = order[j];
        if norms[k] > T::zero() {
            w[k][i] / norms[k]
        } else {
            T::zero()
        }
    });
    let v = Matrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Svd { u, s, v }
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Vec<T> {
    // the singular values of A and Aᵀ agree; rotate over the shorter side
    if a.rows() < a.cols() {
        svd(&a.transpose()).s
    } else {
        svd(a).s
    }
}

/// Eigenvalues of a square matrix via balancing, reduction to Hessenberg form
/// and the Francis double-shift QR iteration.
pub fn eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    // 1-based working array keeps the classical index arithmetic readable
    let mut h = vec![vec![T::zero(); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a[(i, j)];
        }
    }
    balance(&mut h, n);
    to_hessenberg(&mut h, n);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            h[i][j] = T::zero();
        }
    }
    hessenberg_qr(&mut h, n)
}

fn balance<T: Scalar>(a: &mut [Vec<T>], n: usize) {
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let (mut c, mut r) = (T::zero(), T::zero());
            for j in 1..=n {
                if j != i {
                    c = c + a[j][i].abs();
                    r = r + a[i][j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f = f * radix;
                    c = c * sqrdx;
                }
                g = r * radix;
                while c > g {
                    f = f / radix;
                    c = c / sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 1..=n {
                        a[i][j] = a[i][j] * g;
                    }
                    for j in 1..=n {
                        a[j][i] = a[j][i] * f;
                    }
                }
            }
        }
    }
}

fn to_hessenberg<T: Scalar>(a: &mut [Vec<T>], n: usize) {
    for m in 2..n {
        let mut x = T::zero();
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let tmp = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = tmp;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if x != T::zero() {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != T::zero() {
                    y = y / x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] = a[i][j] - y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] = a[j][m] + y * a[j][i];
                    }
                }
            }
        }
    }
}

fn sign<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

#[allow(clippy::many_single_char_names)]
fn hessenberg_qr<T: Scalar>(a: &mut [Vec<T>], n: usize) -> Result<Vec<Complex<T>>> {
    let zero = T::zero();
    let mut wr = vec![zero; n + 1];
    let mut wi = vec![zero; n + 1];
    let mut anorm = zero;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm = anorm + a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = zero;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == zero {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = zero;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = zero;
                nn -= 1;
            } else {
                let mut y = a[nn - 1][nn - 1];
                let mut w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    let p = T::lit(0.5) * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x = x + t;
                    if q >= zero {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != zero {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = zero;
                        wi[nn] = zero;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_QR_ITERATIONS {
                        return Err(Error::EigenNoConvergence { iterations: its });
                    }
                    if its == 10 || its == 20 {
                        t = t + x;
                        for i in 1..=nn {
                            a[i][i] = a[i][i] - x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = T::lit(0.75) * s;
                        y = x;
                        w = T::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    let (mut p, mut q, mut r, mut z);
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p = p / s;
                        q = q / s;
                        r = r / s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = zero;
                        if i != m + 2 {
                            a[i][i - 3] = zero;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = zero;
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != zero {
                                p = p / x;
                                q = q / x;
                                r = r / x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != zero {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p = p + s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q = q / p;
                            r = r / p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p = p + r * a[k + 2][j];
                                    a[k + 2][j] = a[k + 2][j] - p * z;
                                }
                                a[k + 1][j] = a[k + 1][j] - p * y;
                                a[k][j] = a[k][j] - p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p = p + z * a[i][k + 2];
                                    a[i][k + 2] = a[i][k + 2] - p * r;
                                }
                                a[i][k + 1] = a[i][k + 1] - p * q;
                                a[i][k] = a[i][k] - p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `pivot_tol` times the largest entry of `A`.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, pivot_tol: T) -> Option<Matrix<T>> {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n, "solve: incompatible shapes");
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(T::min_positive_value());
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| lu[(i, col)].abs().partial_cmp(&lu[(j, col)].abs()).unwrap())?;
        if lu[(pivot_row, col)].abs() <= pivot_tol * scale {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            for j in 0..x.cols() {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(pivot_row, j)];
                x[(pivot_row, j)] = tmp;
            }
        }
        let pivot = lu[(col, col)];
        for i in (col + 1)..n {
            let factor = lu[(i, col)] / pivot;
            if factor == T::zero() {
                continue;
            }
            for j in col..n {
                lu[(i, j)] = lu[(i, j)] - factor * lu[(col, j)];
            }
            for j in 0..x.cols() {
                x[(i, j)] = x[(i, j)] - factor * x[(col, j)];
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = lu[(col, col)];
        for j in 0..x.cols() {
            let mut acc = x[(col, j)];
            for k in (col + 1)..n {
                acc = acc - lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / pivot;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_moduli(m: &Matrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = eigenvalues(m).unwrap().iter().map(|z| z.norm()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn svd_reconstructs() {
        let a = Matrix::<f64>::from_f64_rows(&[&[2.0, -1.0, 0.5], &[0.3, 1.0, 4.0], &[1.0, 1.0, 1.0]]);
        let Svd { u, s, v } = svd(&a);
        let sigma = Matrix::from_fn(3, 3, |i, j| if i == j { s[i] } else { 0.0 });
        let back = &(&u * &sigma) * &v.transpose();
        assert!((&back - &a).max_abs() < 1e-12);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_of_wide_matrix_exposes_nullspace() {
        let a = Matrix::<f64>::from_f64_rows(&[&[1.0, 2.0, 3.0]]);
        let Svd { s, v, .. } = svd(&a);
        assert!((s[0] - 14f64.sqrt()).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
        for k in 1..3 {
            let x = v.column(k);
            assert!((&a * &x).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_of_rotation_are_complex() {
        let (c, s) = (0.6, 0.8);
        let r = Matrix::<f64>::from_f64_rows(&[&[c, -s], &[s, c]]);
        let ev = eigenvalues(&r).unwrap();
        assert!(ev.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!(ev.iter().any(|z| (z.im - 0.8).abs() < 1e-12));
    }

    #[test]
    fn eigenvalues_companion_matrix() {
        // roots 1, 2, 3, 4 of (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24
        let c = Matrix::<f64>::from_f64_rows(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let got = sorted_moduli(&c);
        for (g, want) in got.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((g - want).abs() < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn eigenvalues_nilpotent_and_scalar() {
        assert_eq!(sorted_moduli(&Matrix::from_f64_rows(&[&[0.0, 1.0], &[0.0, 0.0]])), vec![0.0, 0.0]);
        assert_eq!(sorted_moduli(&Matrix::from_f64_rows(&[&[-0.5]])), vec![0.5]);
    }

    #[test]
    fn solve_recovers_inverse() {
        let a = Matrix::<f64>::from_f64_rows(&[&[4.0, 1.0], &[2.0, 3.0]]);
        let inv = solve(&a, &Matrix::identity(2), 1e-14).unwrap();
        assert!((&(&a * &inv) - &Matrix::identity(2)).max_abs() < 1e-14);
        let singular = Matrix::<f64>::from_f64_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(solve(&singular, &Matrix::identity(2), 1e-12).is_none());
    }
}
