use super::{ComplexMatrix, C64};

/// Singular values at or below `DEFAULT_RANK_TOL * sigma_max` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 60;

/// Singular values in descending order, by one-sided (Hestenes) Jacobi.
///
/// Columns are rotated pairwise until mutually orthogonal; the singular
/// values are then the column norms. Relative accuracy is good even for the
/// small singular values, which is what the rank decision depends on.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.n();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j).into_inner()).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so the inner product is real,
                // then apply the real Jacobi rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (left, right) = cols.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let yq = *y * phase.conj();
                    let xp = *x;
                    *x = xp * cs - yq * sn;
                    *y = xp * sn + yq * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values strictly above `tol * sigma_max`.
pub fn numerical_rank(a: &ComplexMatrix, tol: f64) -> usize {
    assert!(tol > 0.0, "rank tolerance must be positive");
    let sv = singular_values(a);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::{c, ComplexMatrix};

    #[test]
    fn zero_matrix_has_rank_zero() {
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3), DEFAULT_RANK_TOL), 0);
    }

    #[test]
    fn outer_product_has_rank_one() {
        let v = [c(1.0, 2.0), c(-0.5, 0.0), c(0.3, -1.0)];
        let w = [c(0.0, 1.0), c(2.0, 0.2), c(-1.0, -1.0)];
        let m = ComplexMatrix::outer(&v, &w);
        assert_eq!(numerical_rank(&m, DEFAULT_RANK_TOL), 1);
        let sv = singular_values(&m);
        let expected =
            (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * w.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        assert!((sv[0] - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn diagonal_singular_values() {
        let m = ComplexMatrix::diag(&[c(0.0, -3.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let sv = singular_values(&m);
        for (s, e) in sv.iter().zip([3.0, 2.0, 1.0]) {
            assert!((s - e).abs() < 1e-14);
        }
    }

    #[test]
    fn frobenius_norm_is_preserved() {
        let m = ComplexMatrix::from_fn(5, |i, j| {
            c((i * 3 + j) as f64 * 0.37 - 1.0, (i as f64 - j as f64).sin())
        });
        let sv = singular_values(&m);
        let fro: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((fro - m.norm_fro()).abs() < 1e-12 * fro);
    }
}
