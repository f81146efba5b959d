use serde::Serialize;

use crate::error::Result;
use crate::matrix_kernel::{lstsq, C64};
use crate::rng::SeededRng;
use crate::time::TimeVector;
use crate::triples::rational_example;

use super::tau_hat;

const FIT_DEGREE: u32 = 4;
const TRAIN_POINTS: usize = 120;
const HOLDOUT_POINTS: usize = 60;

/// Polynomial fit of the gauge-normalized rational tau in `(x, y, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct RationalCheck {
    pub lambda: C64,
    /// Max holdout deviation of the degree-4 fit, relative to max `|tau_hat|`.
    pub fit_deviation: f64,
    /// Same measure for the polynomial as printed with the example.
    pub printed_deviation: f64,
    /// `((i, j, k), c)` for the monomial `x^i y^j t^k`, small terms dropped.
    pub coefficients: Vec<((u32, u32, u32), C64)>,
}

fn monomials() -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for d in 0..=FIT_DEGREE {
        for i in (0..=d).rev() {
            for j in (0..=d - i).rev() {
                out.push((i, j, d - i - j));
            }
        }
    }
    out
}

fn eval_monomial((i, j, k): (u32, u32, u32), p: [f64; 3]) -> f64 {
    p[0].powi(i as i32) * p[1].powi(j as i32) * p[2].powi(k as i32)
}

/// The printed expression
/// `1 + (3l^2 - 3l) t + (9/2) l^4 t^2 + x^2/2 + (6 l^3 t + 2l - 1) y + 2 l^2 y
///  + (1 + 3 l^2 t + 2 l y) x`.
pub fn printed_rational_polynomial(l: C64, x: f64, y: f64, t: f64) -> C64 {
    let one = C64::new(1.0, 0.0);
    one + (l * l * 3.0 - l * 3.0) * t
        + l.powu(4) * 4.5 * t * t
        + x * x / 2.0
        + (l.powu(3) * 6.0 * t + l * 2.0 - 1.0) * y
        + l * l * 2.0 * y
        + (one + l * l * 3.0 * t + l * 2.0 * y) * x
}

/// Fits `tau_hat` of `rational_example(lambda)` on seeded points of the cube
/// `[-1, 1]^3` and measures the fit and the printed polynomial on holdout
/// points.
pub fn rational_polynomial_check(lambda: C64, seed: u64) -> Result<RationalCheck> {
    let m = rational_example(lambda);
    let mut rng = SeededRng::new(seed);
    let mut draw = |count: usize| -> Result<Vec<([f64; 3], C64)>> {
        (0..count)
            .map(|_| {
                let p = [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)];
                Ok((p, tau_hat(&m, &TimeVector::xyt(p[0], p[1], p[2]))?))
            })
            .collect()
    };
    let train = draw(TRAIN_POINTS)?;
    let holdout = draw(HOLDOUT_POINTS)?;

    let monos = monomials();
    let design: Vec<Vec<C64>> = train
        .iter()
        .map(|(p, _)| monos.iter().map(|&e| C64::new(eval_monomial(e, *p), 0.0)).collect())
        .collect();
    let rhs: Vec<C64> = train.iter().map(|(_, v)| *v).collect();
    let coef = lstsq(&design, &rhs)?;

    let peak = holdout.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max).max(1e-300);
    let mut fit_dev: f64 = 0.0;
    let mut printed_dev: f64 = 0.0;
    for (p, v) in &holdout {
        let fit: C64 = monos.iter().zip(&coef).map(|(&e, &c)| c * eval_monomial(e, *p)).sum();
        fit_dev = fit_dev.max((fit - v).norm() / peak);
        printed_dev = printed_dev.max((printed_rational_polynomial(lambda, p[0], p[1], p[2]) - v).norm() / peak);
    }
    let cmax = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let coefficients = monos
        .into_iter()
        .zip(coef)
        .filter(|(_, c)| c.norm() > 1e-9 * cmax)
        .collect();
    Ok(RationalCheck {
        lambda,
        fit_deviation: fit_dev,
        printed_deviation: printed_dev,
        coefficients,
    })
}
