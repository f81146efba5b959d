//! Stationary Baker-Akhiezer function
//! `psi(x, z) = det(X (zI - Z) e^{xZ} + (zI - Y) e^{xY}) e^{xz} / (z^n det(X e^{xZ} + e^{xY}))`
//! and the polynomial `K(t, z)` of the wave operator.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix_kernel::{det, eig, expm, ComplexMatrix, C64};
use crate::tau_engine::{g_eval, miwa_shift_tau, tau, TimeVector};
use crate::triples::{soliton_triple, SpectralSolitonData, Triple};

/// `tau` below this fraction of the largest term magnitude counts as zero.
const SINGULAR_REL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BAEvaluation {
    pub x: f64,
    pub z: C64,
    pub psi: C64,
    /// `z^n e^{-xz} psi`, polynomial in `z`.
    pub psi_bar: C64,
}

/// Numerator and denominator of `psi_bar` at general times.
struct Pencil {
    xe: ComplexMatrix,
    ey: ComplexMatrix,
    z: ComplexMatrix,
    y: ComplexMatrix,
    tau: C64,
}

impl Pencil {
    fn new(m: &Triple, t: &TimeVector) -> Result<Self> {
        let ez = expm(&g_eval(m.z(), t))?;
        let ey = expm(&g_eval(m.y(), t))?;
        let xe = m.x() * &ez;
        let tau = det(&(&xe + &ey));
        let scale = xe.norm_fro().max(ey.norm_fro()).powi(m.n() as i32);
        if !(tau.norm() > SINGULAR_REL * scale) {
            return Err(Error::SingularTau { value: tau.norm() });
        }
        Ok(Self {
            xe,
            ey,
            z: m.z().clone(),
            y: m.y().clone(),
            tau,
        })
    }

    /// `det(X e^{g(Z)} (zI - Z) + e^{g(Y)} (zI - Y))`; the exponentials
    /// commute with `Z`, `Y` respectively.
    fn numerator(&self, z: C64) -> C64 {
        let n = self.z.n();
        let zz = &ComplexMatrix::scalar(n, z) - &self.z;
        let zy = &ComplexMatrix::scalar(n, z) - &self.y;
        det(&(&(&self.xe * &zz) + &(&self.ey * &zy)))
    }

    fn ratio(&self, z: C64) -> C64 {
        self.numerator(z) / self.tau
    }
}

/// `psi_bar(x, z)` without the `z^{-n}` factor, valid at `z = 0`.
pub fn psi_bar(m: &Triple, x: f64, z: C64) -> Result<C64> {
    Ok(Pencil::new(m, &TimeVector::first(C64::new(x, 0.0)))?.ratio(z))
}

pub fn psi(m: &Triple, x: f64, z: C64) -> Result<BAEvaluation> {
    if z.norm() == 0.0 {
        return Err(Error::precondition("psi is undefined at z = 0"));
    }
    let pb = psi_bar(m, x, z)?;
    let psi = pb * (z * x).exp() / z.powi(m.n() as i32);
    Ok(BAEvaluation { x, z, psi, psi_bar: pb })
}

/// `psi` from the tau quotient `tau(t - [1/z]) / tau(t) * e^{xz}` at
/// `t = (x, 0, ...)`.
pub fn psi_from_tau(m: &Triple, x: f64, z: C64) -> Result<C64> {
    let t = TimeVector::first(C64::new(x, 0.0));
    let denom = tau(m, &t)?;
    if denom.norm() == 0.0 {
        return Err(Error::SingularTau { value: 0.0 });
    }
    Ok(miwa_shift_tau(m, &t, z)? / denom * (z * x).exp())
}

/// Radius for interpolation nodes: one plus a bound on the spectral radii of
/// `Y` and `Z`.
pub fn node_radius(m: &Triple) -> f64 {
    1.0 + m.y().norm_fro().max(m.z().norm_fro())
}

/// `count` equally spaced points on the circle of radius `r`, rotated by
/// `phase` turns.
pub fn circle_nodes(r: f64, count: usize, phase: f64) -> Vec<C64> {
    (0..count)
        .map(|k| C64::from_polar(r, TAU * (k as f64 + phase) / count as f64))
        .collect()
}

/// Default nodes: `n + 1` on the node circle plus four holdout nodes on a
/// smaller circle.
pub fn default_nodes(m: &Triple) -> Vec<C64> {
    let r = node_radius(m);
    let mut nodes = circle_nodes(r, m.n() + 1, 0.0);
    nodes.extend(circle_nodes(0.6 * r, 4, 0.37));
    nodes
}

/// Newton divided differences through `(nodes[i], values[i])`.
fn newton_coeffs(nodes: &[C64], values: &[C64]) -> Vec<C64> {
    let mut coef = values.to_vec();
    for j in 1..nodes.len() {
        for i in (j..nodes.len()).rev() {
            coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - j]);
        }
    }
    coef
}

fn newton_eval(nodes: &[C64], coef: &[C64], z: C64) -> C64 {
    let mut acc = *coef.last().expect("non-empty");
    for i in (0..coef.len() - 1).rev() {
        acc = acc * (z - nodes[i]) + coef[i];
    }
    acc
}

/// Interpolates `psi_bar(x, .)` by a degree-n polynomial through the first
/// `n + 1` nodes and returns the largest holdout deviation relative to the
/// largest holdout value.
pub fn check_polynomiality(m: &Triple, x: f64, z_nodes: &[C64]) -> Result<f64> {
    let n = m.n();
    if z_nodes.len() < n + 4 {
        return Err(Error::precondition(format!(
            "need at least {} nodes (n + 1 interpolation, 3 holdout), got {}",
            n + 4,
            z_nodes.len()
        )));
    }
    for i in 0..z_nodes.len() {
        for j in i + 1..z_nodes.len() {
            if (z_nodes[i] - z_nodes[j]).norm() < 1e-12 {
                return Err(Error::precondition(format!("nodes {i} and {j} coincide")));
            }
        }
    }
    let pencil = Pencil::new(m, &TimeVector::first(C64::new(x, 0.0)))?;
    let (fit_nodes, holdout) = z_nodes.split_at(n + 1);
    let values: Vec<C64> = fit_nodes.iter().map(|&z| pencil.ratio(z)).collect();
    let coef = newton_coeffs(fit_nodes, &values);
    let held: Vec<(C64, C64)> = holdout.iter().map(|&z| (z, pencil.ratio(z))).collect();
    let peak = held.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    Ok(held
        .iter()
        .map(|&(z, v)| (newton_eval(fit_nodes, &coef, z) - v).norm() / peak)
        .fold(0.0, f64::max))
}

/// Coefficients `[k_0, ..., k_n]` of
/// `K(t, z) = det(X (zI - Z) e^{g(Z)} + (zI - Y) e^{g(Y)}) / tau(t)`,
/// recovered by a discrete Fourier transform over `n + 1` points of the node
/// circle.
pub fn k_poly_coeffs(m: &Triple, t: &TimeVector) -> Result<Vec<C64>> {
    let pencil = Pencil::new(m, t)?;
    let count = m.n() + 1;
    let r = node_radius(m);
    let nodes = circle_nodes(r, count, 0.0);
    let values: Vec<C64> = nodes.iter().map(|&z| pencil.ratio(z)).collect();
    Ok((0..count)
        .map(|k| {
            let s: C64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -TAU * (j * k) as f64 / count as f64))
                .sum();
            s / (count as f64 * r.powi(k as i32))
        })
        .collect())
}

/// Roots of `sum_k coeffs[k] z^k` as eigenvalues of the companion matrix.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    if lead.norm() == 0.0 {
        return Err(Error::precondition("leading coefficient is zero"));
    }
    let comp = ComplexMatrix::from_fn(deg, |i, j| {
        if i == 0 {
            -coeffs[deg - 1 - j] / lead
        } else if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(eig(&comp)?.values.to_vec())
}

/// Relative residuals of the soliton conditions
/// `k_i psi_bar(x, lambda_i) e^{x lambda_i} + psi_bar(x, mu_i) e^{x mu_i} = 0`
/// for the soliton triple of `data`, with
/// `k_i = c_i prod_{j != i} (mu_i - mu_j) / (lambda_i - mu_j)`.
pub fn soliton_conditions_residual(data: &SpectralSolitonData, x: f64) -> Result<Vec<f64>> {
    soliton_conditions_for_triple(&soliton_triple(data)?, data, x)
}

/// Soliton conditions of `data` evaluated on an arbitrary triple `m`, e.g.
/// a perturbed one.
pub fn soliton_conditions_for_triple(m: &Triple, data: &SpectralSolitonData, x: f64) -> Result<Vec<f64>> {
    let k = condition_coefficients(data);
    conditions(m, data, x, |i| (k[i], C64::new(1.0, 0.0)))
}

/// The same conditions with `(alpha_i, beta_i)` taken literally as the
/// coefficients. Reported for comparison; these do not vanish in general.
pub fn soliton_conditions_literal(data: &SpectralSolitonData, x: f64) -> Result<Vec<f64>> {
    let m = soliton_triple(data)?;
    conditions(&m, data, x, |i| (data.alpha[i], data.beta[i]))
}

/// `k_i = c_i prod_{j != i} (mu_i - mu_j) / (lambda_i - mu_j)`.
pub fn condition_coefficients(data: &SpectralSolitonData) -> Vec<C64> {
    let c = data.soliton_weights();
    let (lam, mu) = (&data.lambda, &data.mu);
    (0..data.n())
        .map(|i| {
            (0..data.n())
                .filter(|&j| j != i)
                .fold(c[i], |acc, j| acc * (mu[i] - mu[j]) / (lam[i] - mu[j]))
        })
        .collect()
}

fn conditions(m: &Triple, data: &SpectralSolitonData, x: f64, coef: impl Fn(usize) -> (C64, C64)) -> Result<Vec<f64>> {
    let pencil = Pencil::new(m, &TimeVector::first(C64::new(x, 0.0)))?;
    let full = |z: C64| pencil.ratio(z) * (z * x).exp();
    Ok((0..data.n())
        .map(|i| {
            let (p, q) = coef(i);
            let a = p * full(data.lambda[i]);
            let b = q * full(data.mu[i]);
            let scale = a.norm() + b.norm();
            if scale == 0.0 {
                0.0
            } else {
                (a + b).norm() / scale
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::c;
    use crate::rng::SeededRng;

    fn re(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn scalar(cc: C64, mu: C64, l: C64) -> Triple {
        Triple::new(
            ComplexMatrix::scalar(1, cc),
            ComplexMatrix::scalar(1, mu),
            ComplexMatrix::scalar(1, l),
        )
        .unwrap()
    }

    fn data3() -> SpectralSolitonData {
        SpectralSolitonData::new(
            vec![re(1.0), c(0.5, 0.3), re(-0.7)],
            vec![re(1.0), re(0.8), c(1.0, 0.5)],
            vec![re(0.9), c(0.2, 0.6), re(-0.3)],
            vec![re(-0.8), re(0.4), c(-0.1, -0.9)],
        )
        .unwrap()
    }

    #[test]
    fn scalar_psi_closed_form() {
        let (cc, mu, l) = (c(0.7, 0.1), re(-0.4), re(0.9));
        let m = scalar(cc, mu, l);
        let (x, z) = (0.6, c(1.2, 0.5));
        let expected = (cc * (z - l) * (x * l).exp() + (z - mu) * (x * mu).exp()) * (x * z).exp()
            / (z * (cc * (x * l).exp() + (x * mu).exp()));
        let e = psi(&m, x, z).unwrap();
        assert!((e.psi - expected).norm() < 1e-14 * expected.norm());
        assert!((e.psi_bar * (x * z).exp() / z - e.psi).norm() < 1e-14 * e.psi.norm());
    }

    #[test]
    fn psi_bar_is_monic_at_zero() {
        let m = soliton_triple(&data3()).unwrap();
        let k = k_poly_coeffs(&m, &TimeVector::zero()).unwrap();
        assert!((k[3] - re(1.0)).norm() < 1e-12);
        let nodes = default_nodes(&m);
        assert!(check_polynomiality(&m, 0.0, &nodes).unwrap() < 1e-12);
    }

    #[test]
    fn japanese_formula() {
        let mut rng = SeededRng::new(20);
        let m = soliton_triple(&data3()).unwrap();
        for _ in 0..20 {
            let x = rng.range(-2.0, 2.0);
            let z = rng.annulus(0.5, 3.0);
            let a = psi(&m, x, z).unwrap().psi;
            let b = psi_from_tau(&m, x, z).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_z_is_rejected_but_psi_bar_is_defined() {
        let m = soliton_triple(&data3()).unwrap();
        assert!(psi(&m, 0.0, re(0.0)).is_err());
        assert!(psi_bar(&m, 0.0, re(0.0)).unwrap().norm().is_finite());
    }

    #[test]
    fn polynomiality_scalar_and_soliton() {
        let m = scalar(re(0.5), re(-1.0), re(1.0));
        assert!(check_polynomiality(&m, 0.4, &default_nodes(&m)).unwrap() < 1e-12);
        let m = soliton_triple(&data3()).unwrap();
        for x in [-1.0, 0.5, 2.0] {
            assert!(check_polynomiality(&m, x, &default_nodes(&m)).unwrap() < 1e-8);
        }
    }

    #[test]
    fn polynomiality_full_rank_control_is_also_polynomial() {
        // The numerator det(X(zI-Z)E_Z + (zI-Y)E_Y) has degree n in z for any
        // triple, so the full-rank control does not deviate.
        let mut rng = SeededRng::new(21);
        let m = Triple::new(rng.matrix(3, 0.6), rng.matrix(3, 0.6), rng.matrix(3, 0.6)).unwrap();
        assert_eq!(m.kappa(), 3);
        assert!(check_polynomiality(&m, 0.3, &default_nodes(&m)).unwrap() < 1e-10);
    }

    #[test]
    fn too_few_nodes() {
        let m = soliton_triple(&data3()).unwrap();
        assert!(check_polynomiality(&m, 0.0, &circle_nodes(2.0, 5, 0.0)).is_err());
    }

    #[test]
    fn scalar_k_polynomial() {
        let (cc, mu, l) = (c(0.7, 0.1), re(-0.4), re(0.9));
        let m = scalar(cc, mu, l);
        let t = TimeVector::xyt(0.3, 0.2, -0.1);
        let (gl, gm) = (
            crate::tau_engine::g_scalar(l, &t).exp(),
            crate::tau_engine::g_scalar(mu, &t).exp(),
        );
        let den = cc * gl + gm;
        let k = k_poly_coeffs(&m, &t).unwrap();
        assert!((k[1] - re(1.0)).norm() < 1e-13);
        assert!((k[0] - (-cc * l * gl - mu * gm) / den).norm() < 1e-13);
    }

    #[test]
    fn k_roots_are_psi_bar_roots() {
        let m = soliton_triple(&data3()).unwrap();
        let x = 0.7;
        let k = k_poly_coeffs(&m, &TimeVector::first(re(x))).unwrap();
        let roots = polynomial_roots(&k).unwrap();
        assert_eq!(roots.len(), 3);
        for r in roots {
            let v = psi_bar(&m, x, r).unwrap();
            let scale = psi_bar(&m, x, re(r.norm() + 1.0)).unwrap().norm();
            assert!(v.norm() < 1e-10 * scale, "{r}: {v}");
        }
    }

    #[test]
    fn scalar_soliton_condition() {
        let data = SpectralSolitonData::new(vec![re(1.0)], vec![re(1.0)], vec![re(1.0)], vec![re(-1.0)]).unwrap();
        assert!(soliton_conditions_residual(&data, 0.0).unwrap()[0] < 1e-10);
        // The literal (alpha, beta) pairing is off by lambda - mu here.
        assert!(soliton_conditions_literal(&data, 0.0).unwrap()[0] > 0.1);
    }

    #[test]
    fn soliton_conditions_hold() {
        let data = data3();
        for x in [-1.0, 0.0, 2.0] {
            for r in soliton_conditions_residual(&data, x).unwrap() {
                assert!(r < 1e-8, "x={x}: {r}");
            }
        }
    }

    #[test]
    fn perturbed_triple_breaks_conditions() {
        let data = data3();
        let m = soliton_triple(&data).unwrap();
        let mut x = m.x().clone();
        x[(0, 0)] *= 1.1;
        let perturbed = m.with_x(x).unwrap();
        let worst = soliton_conditions_for_triple(&perturbed, &data, 0.5)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
    }
}
