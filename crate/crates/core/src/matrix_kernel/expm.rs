//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 3, 5, 7, 9 or 13 (Higham's 2005 selection thresholds).

use super::{ComplexMatrix, Lu, C64};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
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

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `sum_k coeffs[k] * powers[k]` where `powers[k]` is `A^{2k}` (or `I` for k = 0).
fn even_poly(coeffs: &[f64], powers: &[ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(powers[0].n());
    for (b, p) in coeffs.iter().zip(powers) {
        acc += &p.scale(re(*b));
    }
    acc
}

fn pade_low(a: &ComplexMatrix, m: usize) -> (ComplexMatrix, ComplexMatrix) {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let n = a.n();
    let a2 = a * a;
    let mut powers = vec![ComplexMatrix::identity(n), a2.clone()];
    while powers.len() < m.div_ceil(2) {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let odd: Vec<f64> = b.iter().skip(1).step_by(2).copied().collect();
    let even: Vec<f64> = b.iter().step_by(2).copied().collect();
    let u = a * &even_poly(&odd, &powers);
    let v = even_poly(&even, &powers);
    (u, v)
}

fn pade_13(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.n();
    let ident = ComplexMatrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| re(B13[k]);

    let mut inner_u = a6.scale(b(13));
    inner_u += &a4.scale(b(11));
    inner_u += &a2.scale(b(9));
    let mut u = &a6 * &inner_u;
    u += &a6.scale(b(7));
    u += &a4.scale(b(5));
    u += &a2.scale(b(3));
    u += &ident.scale(b(1));
    let u = a * &u;

    let mut inner_v = a6.scale(b(12));
    inner_v += &a4.scale(b(10));
    inner_v += &a2.scale(b(8));
    let mut v = &a6 * &inner_v;
    v += &a6.scale(b(6));
    v += &a4.scale(b(4));
    v += &a2.scale(b(2));
    v += &ident.scale(b(0));
    (u, v)
}

fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    let inv = Lu::new(&q).inverse()?;
    Ok(&inv * &p)
}

/// Matrix exponential.
///
/// Fails with [`Error::Overflow`] when the result would contain non-finite
/// entries instead of returning infinities.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFinite("expm argument"));
    }
    let norm = a.norm_1();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(a.n()));
    }
    let overflow = || Error::Overflow { norm };

    for &(m, theta) in &THETA {
        if norm <= theta {
            let (u, v) = pade_low(a, m);
            return solve_pade(&u, &v).map_err(|_| overflow());
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    if s > 1000 {
        return Err(overflow());
    }
    let scaled = a.scale(re(0.5f64.powi(s)));
    let (u, v) = pade_13(&scaled);
    let mut r = solve_pade(&u, &v).map_err(|_| overflow())?;
    for _ in 0..s {
        r = &r * &r;
        if !r.is_finite() {
            return Err(overflow());
        }
    }
    if !r.is_finite() {
        return Err(overflow());
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::{c, inverse};

    fn taylor_oracle(a: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let mut sum = ComplexMatrix::identity(a.n());
        let mut term = ComplexMatrix::identity(a.n());
        for k in 1..terms {
            term = (&term * a).scale(re(1.0 / k as f64));
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_and_diagonal() {
        assert_eq!(expm(&ComplexMatrix::zeros(3)).unwrap(), ComplexMatrix::identity(3));
        let d = [c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 3.0)];
        let e = expm(&ComplexMatrix::diag(&d)).unwrap();
        for (i, z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-13 * z.exp().norm());
        }
        assert!(e[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn nilpotent_jordan_block_is_finite_series() {
        let nil = ComplexMatrix::from_real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]).unwrap();
        let expected = &(&ComplexMatrix::identity(3) + &nil) + &(&nil * &nil).scale(re(0.5));
        let e = expm(&nil).unwrap();
        assert!((&e - &expected).norm_fro() < 1e-15);
    }

    #[test]
    fn agrees_with_taylor_for_moderate_norms() {
        for scale in [1e-3, 0.1, 0.6, 1.5, 4.0] {
            let a = ComplexMatrix::from_fn(4, |i, j| {
                c((i as f64 - 1.3 * j as f64).sin(), (0.7 * (i * j) as f64).cos()).scale(scale)
            });
            let e = expm(&a).unwrap();
            let t = taylor_oracle(&a, 80);
            assert!((&e - &t).norm_fro() < 1e-12 * t.norm_fro(), "scale {scale}");
        }
    }

    #[test]
    fn large_norm_accuracy_via_conjugated_diagonal() {
        // A = G D G^{-1}; exp(A) = G exp(D) G^{-1} exactly.
        let g = ComplexMatrix::from_real(&[&[1.0, 0.3, 0.0], &[0.2, 1.0, -0.4], &[0.0, 0.1, 1.0]]).unwrap();
        let gi = inverse(&g).unwrap();
        let d = [c(20.0, 3.0), c(-15.0, 1.0), c(5.0, -7.0)];
        let a = &(&g * &ComplexMatrix::diag(&d)) * &gi;
        let expected = &(&g * &ComplexMatrix::diag(&d.map(|z| z.exp()))) * &gi;
        let e = expm(&a).unwrap();
        assert!((&e - &expected).norm_fro() < 1e-12 * expected.norm_fro());
    }

    #[test]
    fn overflow_is_an_error() {
        let a = ComplexMatrix::diag(&[c(800.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(expm(&a), Err(Error::Overflow { .. })));
    }
}
