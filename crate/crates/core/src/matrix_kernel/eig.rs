//! Complex eigendecomposition: Householder reduction to Hessenberg form,
//! shifted QR iteration to Schur form, back substitution for eigenvectors.

use super::{inverse, ComplexMatrix, ComplexVector, C64, INVERTIBLE_COND_MAX, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// Eigenvalues and right eigenvectors, `A V = V diag(values)`.
///
/// With `U = V^{-1}` this is the diagonalizing frame `U A U^{-1} = diag(values)`.
/// Values are sorted by real part, then imaginary part, then original index.
/// Eigenvector columns have unit 2-norm.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: ComplexVector,
    pub vectors: ComplexMatrix,
    /// 1-norm condition number of `vectors`.
    pub cond: f64,
}

impl Eigen {
    /// `U = V^{-1}`.
    pub fn diagonalizer(&self) -> Result<ComplexMatrix> {
        inverse(&self.vectors)
    }
}

/// Eigenvalues only, from the Schur form. Works for defective matrices.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<ComplexVector> {
    if !a.is_finite() {
        return Err(Error::NonFinite("eigenvalues argument"));
    }
    let (mut h, mut z) = hessenberg(a);
    schur_qr(&mut h, &mut z)?;
    Ok((0..a.n()).map(|i| h[(i, i)]).collect())
}

pub fn eig(a: &ComplexMatrix) -> Result<Eigen> {
    if !a.is_finite() {
        return Err(Error::NonFinite("eig argument"));
    }
    let n = a.n();
    let (mut h, mut z) = hessenberg(a);
    schur_qr(&mut h, &mut z)?;
    let y = triangular_eigenvectors(&h);
    let v = &z * &y;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (h[(i, i)], h[(j, j)]);
        a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)).then(i.cmp(&j))
    });

    let values: ComplexVector = order.iter().map(|&i| h[(i, i)]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let norm = (0..n).map(|r| v[(r, src)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)] / norm;
        }
    }

    let cond = vectors.cond_1();
    if !(cond < INVERTIBLE_COND_MAX) {
        return Err(Error::DegenerateSpectrum { cond });
    }
    Ok(Eigen { values, vectors, cond })
}

/// Unitary reduction `A = Q H Q^H` with `H` upper Hessenberg.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.n();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let mut u = x;
        u[0] += phase * alpha;
        let unorm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if unorm == 0.0 {
            continue;
        }
        u.iter_mut().for_each(|z| *z /= unorm);
        // H <- P H P with P = I - 2 u u^H acting on indices k+1..n.
        for j in 0..n {
            let s: C64 = (k + 1..n).map(|i| u[i - k - 1].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                h[(i, j)] -= u[i - k - 1] * s * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = (k + 1..n).map(|j| h[(i, j)] * u[j - k - 1]).sum();
            for j in k + 1..n {
                h[(i, j)] -= s * u[j - k - 1].conj() * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = (k + 1..n).map(|j| q[(i, j)] * u[j - k - 1]).sum();
            for j in k + 1..n {
                q[(i, j)] -= s * u[j - k - 1].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let r = a.norm().hypot(b.norm());
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> C64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Reduces Hessenberg `h` to upper triangular Schur form in place,
/// accumulating the unitary transformations into `z`.
fn schur_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<()> {
    let n = h.n();
    if n == 1 {
        return Ok(());
    }
    let norm = h.norm_fro().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;

    while hi > 0 {
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let small = if diag == 0.0 {
                f64::EPSILON * norm
            } else {
                f64::EPSILON * diag
            };
            if sub <= small {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if total > MAX_ITER_PER_EIGENVALUE * n {
            return Err(Error::DegenerateSpectrum { cond: f64::INFINITY });
        }
        let mu = if iter.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(h, hi)
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations.push((c, s));
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            let rows = (k + 2).min(hi + 1);
            for i in 0..rows {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + s.conj() * y;
                z[(i, k + 1)] = -s * x + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}

/// Eigenvectors of an upper triangular matrix, one column per diagonal entry.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.n();
    let small = f64::EPSILON * t.norm_fro().max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let s: C64 = (j + 1..=k).map(|m| t[(j, m)] * y[(m, k)]).sum();
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[(j, k)] = -s / d;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::{c, det};

    fn residual(a: &ComplexMatrix, e: &Eigen) -> f64 {
        let av = a * &e.vectors;
        let vd = &e.vectors * &ComplexMatrix::diag(&e.values);
        (&av - &vd).norm_fro()
    }

    #[test]
    fn diagonal_input() {
        let a = ComplexMatrix::diag(&[c(3.0, 0.0), c(1.0, 0.0)]);
        let e = eig(&a).unwrap();
        assert_eq!(e.values.0, vec![c(1.0, 0.0), c(3.0, 0.0)]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swap_matrix() {
        let a = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eig(&a).unwrap();
        assert!((e.values[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e.values[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(residual(&a, &e) < 1e-14);
    }

    #[test]
    fn rotation_has_complex_pair() {
        let a = ComplexMatrix::from_real(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let e = eig(&a).unwrap();
        assert!((e.values[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e.values[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_jordan_block() {
        let j = ComplexMatrix::from_real(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]]).unwrap();
        for v in eigenvalues(&j).unwrap().iter() {
            assert!((v - C64::new(2.0, 0.0)).norm() < 1e-4);
        }
    }

    #[test]
    fn jordan_block_is_degenerate() {
        let a = ComplexMatrix::from_real(&[&[2.0, 1.0], &[0.0, 2.0]]).unwrap();
        assert!(matches!(eig(&a), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn reconstruction_and_determinant() {
        let a = ComplexMatrix::from_fn(6, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) as f64 * 0.9).sin())
        });
        let e = eig(&a).unwrap();
        assert!(residual(&a, &e) < 1e-12 * a.norm_fro());
        let prod: C64 = e.values.iter().product();
        let d = det(&a);
        assert!((prod - d).norm() < 1e-10 * d.norm());
    }
}
