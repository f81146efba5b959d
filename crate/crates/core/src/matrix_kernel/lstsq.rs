use super::{C64, ZERO};
use crate::error::{Error, Result};

/// Least-squares solution of an overdetermined system `rows * x ~= rhs`
/// by Householder QR. `rows` is the design matrix, one equation per row.
pub fn lstsq(rows: &[Vec<C64>], rhs: &[C64]) -> Result<Vec<C64>> {
    let m = rows.len();
    let p = rows.first().map_or(0, |r| r.len());
    if m != rhs.len() {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: rhs.len(),
        });
    }
    if p == 0 || m < p || rows.iter().any(|r| r.len() != p) {
        return Err(Error::precondition("least squares needs a full m x p design, m >= p"));
    }
    let mut a: Vec<Vec<C64>> = rows.to_vec();
    let mut b = rhs.to_vec();

    for k in 0..p {
        let alpha = (k..m).map(|i| a[i][k].norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            return Err(Error::Singular);
        }
        let x0 = a[k][k];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let mut u: Vec<C64> = (k..m).map(|i| a[i][k]).collect();
        u[0] += phase * alpha;
        let unorm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        u.iter_mut().for_each(|z| *z /= unorm);
        for j in k..p {
            let s: C64 = (k..m).map(|i| u[i - k].conj() * a[i][j]).sum();
            for i in k..m {
                a[i][j] -= u[i - k] * s * 2.0;
            }
        }
        let s: C64 = (k..m).map(|i| u[i - k].conj() * b[i]).sum();
        for i in k..m {
            b[i] -= u[i - k] * s * 2.0;
        }
    }

    let scale = (0..p).map(|k| a[k][k].norm()).fold(0.0, f64::max);
    let mut x = vec![ZERO; p];
    for k in (0..p).rev() {
        let d = a[k][k];
        if d.norm() <= 1e-14 * scale {
            return Err(Error::Singular);
        }
        let s: C64 = (k + 1..p).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / d;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::c;

    #[test]
    fn recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.5];
        let rows: Vec<Vec<C64>> = xs.iter().map(|&x| vec![c(1.0, 0.0), c(x, 0.0)]).collect();
        let rhs: Vec<C64> = xs.iter().map(|&x| c(2.0 - 0.5 * x, x)).collect();
        let sol = lstsq(&rows, &rhs).unwrap();
        assert!((sol[0] - c(2.0, 0.0)).norm() < 1e-13);
        assert!((sol[1] - c(-0.5, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let rows = vec![vec![c(1.0, 0.0), c(2.0, 0.0)]; 4];
        assert!(lstsq(&rows, &[c(1.0, 0.0); 4]).is_err());
    }
}
