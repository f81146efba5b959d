use super::{ComplexMatrix, ComplexVector, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
///
/// `L` (unit diagonal) and `U` share the packed storage. A zero pivot is kept
/// rather than rejected so that `det` of a singular matrix is exactly zero.
#[derive(Clone, Debug)]
pub struct Lu {
    packed: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Self {
        let n = a.n();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;

        for k in 0..n {
            let (p, pivot_mag) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
            }
        }

        Self {
            packed: lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn det(&self) -> C64 {
        if self.singular {
            return ZERO;
        }
        let n = self.packed.n();
        (0..n).fold(C64::new(self.sign, 0.0), |acc, i| acc * self.packed[(i, i)])
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[C64]) -> Result<ComplexVector> {
        let n = self.packed.n();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        if self.singular {
            return Err(Error::Singular);
        }
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.packed[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.packed[(i, j)] * x[j];
            }
            x[i] = s / self.packed[(i, i)];
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(ComplexVector(x))
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        let n = self.packed.n();
        let mut inv = ComplexMatrix::zeros(n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = ONE;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// Determinant via partially pivoted LU. Singular input gives exactly zero.
pub fn det(a: &ComplexMatrix) -> C64 {
    match a.n() {
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        _ => Lu::new(a).det(),
    }
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Lu::new(a).inverse()
}

pub fn solve(a: &ComplexMatrix, b: &[C64]) -> Result<ComplexVector> {
    Lu::new(a).solve(b)
}

/// Classical adjoint, `A adj(A) = det(A) I`.
///
/// Well-conditioned input goes through `det(A) A^{-1}`; anything close to
/// singular falls back to explicit cofactors, which stay exact in the limit.
pub fn adjugate(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.n();
    if n == 1 {
        return ComplexMatrix::identity(1);
    }
    let lu = Lu::new(a);
    if let Ok(inv) = lu.inverse() {
        if a.norm_1() * inv.norm_1() < 1e8 {
            return inv.scale(lu.det());
        }
    }
    cofactor_adjugate(a)
}

fn cofactor_adjugate(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.n();
    let mut adj = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let minor = ComplexMatrix::from_fn(n - 1, |r, c| {
                let rr = if r < i { r } else { r + 1 };
                let cc = if c < j { c } else { c + 1 };
                a[(rr, cc)]
            });
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // adj(A)_{ji} = (-1)^{i+j} M_{ij}
            adj[(j, i)] = det(&minor) * sign;
        }
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::c;

    /// Brute-force Laplace expansion along the first row.
    fn cofactor_det(a: &ComplexMatrix) -> C64 {
        let n = a.n();
        if n == 1 {
            return a[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor = ComplexMatrix::from_fn(n - 1, |r, col| a[(r + 1, if col < j { col } else { col + 1 })]);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                a[(0, j)] * cofactor_det(&minor) * sign
            })
            .sum()
    }

    fn lcg_matrix(n: usize, mut state: u64) -> ComplexMatrix {
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(n, |_, _| c(next(), next()))
    }

    #[test]
    fn det_of_identity_and_diagonal() {
        assert_eq!(det(&ComplexMatrix::identity(3)), ONE);
        let d = ComplexMatrix::diag(&[c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(det(&d), c(6.0, 0.0));
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        for seed in 0..5 {
            let a = lcg_matrix(4, 17 + seed);
            let lu = det(&a);
            let brute = cofactor_det(&a);
            assert!((lu - brute).norm() <= 1e-12 * brute.norm(), "{lu} vs {brute}");
        }
    }

    #[test]
    fn singular_det_is_zero_and_solve_fails() {
        let a = ComplexMatrix::from_real(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[0.0, 1.0, 1.0]]).unwrap();
        assert!(det(&a).norm() < 1e-15);
        let z = ComplexMatrix::zeros(3);
        assert_eq!(det(&z), ZERO);
        assert!(solve(&z, &[ONE, ONE, ONE]).is_err());
    }

    #[test]
    fn adjugate_identity_and_diagonal() {
        assert_eq!(adjugate(&ComplexMatrix::identity(3)), ComplexMatrix::identity(3));
        let a = c(2.0, 1.0);
        let b = c(-3.0, 0.5);
        let adj = adjugate(&ComplexMatrix::diag(&[a, b]));
        assert!((adj[(0, 0)] - b).norm() < 1e-14);
        assert!((adj[(1, 1)] - a).norm() < 1e-14);
        assert!(adj[(0, 1)].norm() < 1e-14 && adj[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn adjugate_defining_identity() {
        let a = lcg_matrix(3, 99);
        let lhs = &a * &adjugate(&a);
        let rhs = ComplexMatrix::scalar(3, det(&a));
        assert!((&lhs - &rhs).norm_fro() < 1e-10 * rhs.norm_fro());
    }

    #[test]
    fn adjugate_of_singular_matrix_uses_cofactors() {
        let a = ComplexMatrix::from_real(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        let adj = adjugate(&a);
        let expected = ComplexMatrix::from_real(&[&[4.0, -2.0], &[-2.0, 1.0]]).unwrap();
        assert!((&adj - &expected).norm_fro() < 1e-14);
        assert_eq!(cofactor_adjugate(&a), expected);
    }
}
