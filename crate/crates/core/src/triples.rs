//! Matrix triples `(X, Y, Z)` and the rank `kappa = rank(XZ - YX)`.
//!
//! A triple with `kappa <= 1` is "almost intertwining": `XZ = YX + v w^T`.
//! Triples are immutable; every transformation returns a new value with its
//! rank recomputed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_kernel::{numerical_rank, ComplexMatrix, ComplexVector, C64, DEFAULT_RANK_TOL};
use crate::tau_engine::g_eval;
use crate::time::TimeVector;

#[derive(Clone, Debug, PartialEq)]
pub struct Triple {
    x: ComplexMatrix,
    y: ComplexMatrix,
    z: ComplexMatrix,
    kappa: usize,
}

impl Triple {
    pub fn new(x: ComplexMatrix, y: ComplexMatrix, z: ComplexMatrix) -> Result<Self> {
        x.check_same_dim(&y)?;
        x.check_same_dim(&z)?;
        let kappa = numerical_rank(&defect(&x, &y, &z), DEFAULT_RANK_TOL);
        Ok(Self { x, y, z, kappa })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }

    pub fn z(&self) -> &ComplexMatrix {
        &self.z
    }

    /// Cached rank of `XZ - YX` at [`DEFAULT_RANK_TOL`].
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn kappa_with_tol(&self, tol: f64) -> usize {
        numerical_rank(&self.defect(), tol)
    }

    /// `XZ - YX`.
    pub fn defect(&self) -> ComplexMatrix {
        defect(&self.x, &self.y, &self.z)
    }

    pub fn with_x(&self, x: ComplexMatrix) -> Result<Self> {
        Self::new(x, self.y.clone(), self.z.clone())
    }

    /// `(G X H^{-1}, G Y G^{-1}, H Z H^{-1})`.
    pub fn gl_action(&self, g: &ComplexMatrix, h: &ComplexMatrix) -> Result<Self> {
        self.x.check_same_dim(g)?;
        self.x.check_same_dim(h)?;
        let gi = g.checked_inverse()?;
        let hi = h.checked_inverse()?;
        Self::new(&(g * &self.x) * &hi, &(g * &self.y) * &gi, &(h * &self.z) * &hi)
    }

    /// Simultaneous conjugation, the diagonal of [`Triple::gl_action`].
    pub fn conjugate(&self, g: &ComplexMatrix) -> Result<Self> {
        self.gl_action(g, g)
    }

    /// `(Lambda X Omega, Y, Z)` for `[Lambda, Y] = 0` and `[Omega, Z] = 0`.
    pub fn lambda_omega_action(&self, lambda: &ComplexMatrix, omega: &ComplexMatrix) -> Result<Self> {
        self.x.check_same_dim(lambda)?;
        self.x.check_same_dim(omega)?;
        let commutes = |a: &ComplexMatrix, b: &ComplexMatrix| {
            let scale = a.norm_fro() * b.norm_fro();
            a.commutator(b).norm_fro() <= 1e-9 * scale.max(f64::MIN_POSITIVE)
        };
        if !commutes(lambda, &self.y) {
            return Err(Error::precondition("Lambda does not commute with Y"));
        }
        if !commutes(omega, &self.z) {
            return Err(Error::precondition("Omega does not commute with Z"));
        }
        self.with_x(&(lambda * &self.x) * omega)
    }

    /// KP flow on `X`: `X_t = exp(-g(Y)) X exp(g(Z))`, `Y` and `Z` fixed.
    pub fn flow(&self, t: &TimeVector) -> Result<Self> {
        if t.is_zero() {
            return Ok(self.clone());
        }
        let ey_inv = crate::matrix_kernel::expm(&-&g_eval(&self.y, t))?;
        let ez = crate::matrix_kernel::expm(&g_eval(&self.z, t))?;
        self.with_x(&(&ey_inv * &self.x) * &ez)
    }

    /// `(X^{-1}, Z, Y)`, which gives the same KP solution up to a constant.
    pub fn inverse_symmetry(&self) -> Result<Self> {
        let xi = self.x.checked_inverse()?;
        Self::new(xi, self.z.clone(), self.y.clone())
    }

    /// `(Y, X Z Y^{-1}, X)`, whose defect is `YX - XZ`, so `kappa` is unchanged.
    /// No KP interpretation is attached to it.
    pub fn swap_symmetry(&self) -> Result<Self> {
        let yi = self.y.checked_inverse()?;
        Self::new(self.y.clone(), &(&self.x * &self.z) * &yi, self.x.clone())
    }
}

fn defect(x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix) -> ComplexMatrix {
    &(x * z) - &(y * x)
}

/// Rank of `XZ - YX` at the default tolerance.
pub fn kappa(x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix) -> Result<usize> {
    x.check_same_dim(y)?;
    x.check_same_dim(z)?;
    Ok(numerical_rank(&defect(x, y, z), DEFAULT_RANK_TOL))
}

/// Spectral data `(alpha_i, beta_i, lambda_i, mu_i)` of an n-soliton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSolitonData {
    pub alpha: ComplexVector,
    pub beta: ComplexVector,
    pub lambda: ComplexVector,
    pub mu: ComplexVector,
}

impl SpectralSolitonData {
    pub fn new(alpha: Vec<C64>, beta: Vec<C64>, lambda: Vec<C64>, mu: Vec<C64>) -> Result<Self> {
        let data = Self {
            alpha: alpha.into(),
            beta: beta.into(),
            lambda: lambda.into(),
            mu: mu.into(),
        };
        data.validate()?;
        Ok(data)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alpha.len();
        if n == 0 {
            return Err(Error::format("alpha", "spectral data must be non-empty"));
        }
        for (name, v) in [("beta", &self.beta), ("lambda", &self.lambda), ("mu", &self.mu)] {
            if v.len() != n {
                return Err(Error::format(name, format!("expected {n} entries, found {}", v.len())));
            }
        }
        for (name, v) in [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("lambda", &self.lambda),
            ("mu", &self.mu),
        ] {
            if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::format(name, "non-finite entry"));
            }
        }
        if let Some(i) = self.beta.iter().position(|b| b.norm() == 0.0) {
            return Err(Error::format("beta", format!("beta[{i}] is zero")));
        }
        for i in 0..n {
            for j in 0..n {
                if self.lambda[j] == self.mu[i] {
                    return Err(Error::format("lambda", format!("lambda[{j}] coincides with mu[{i}]")));
                }
            }
        }
        for (name, v) in [("lambda", &self.lambda), ("mu", &self.mu)] {
            for i in 0..n {
                for j in i + 1..n {
                    if v[i] == v[j] {
                        return Err(Error::format(name, format!("entries {i} and {j} coincide")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `c_i = alpha_i / (beta_i (lambda_i - mu_i))`.
    pub fn soliton_weights(&self) -> Vec<C64> {
        (0..self.n())
            .map(|i| self.alpha[i] / (self.beta[i] * (self.lambda[i] - self.mu[i])))
            .collect()
    }
}

/// `X_ij = alpha_i / (beta_j (lambda_j - mu_i))`, `Y = diag(mu)`, `Z = diag(lambda)`.
pub fn soliton_triple(data: &SpectralSolitonData) -> Result<Triple> {
    data.validate()?;
    let n = data.n();
    let x = ComplexMatrix::from_fn(n, |i, j| data.alpha[i] / (data.beta[j] * (data.lambda[j] - data.mu[i])));
    Triple::new(x, ComplexMatrix::diag(&data.mu), ComplexMatrix::diag(&data.lambda))
}

/// True when `Y^N = Z^N` to relative tolerance `tol`.
pub fn is_nkdv(m: &Triple, n_power: u32, tol: f64) -> bool {
    assert!(n_power >= 1, "N must be at least 1");
    let yn = m.y.powi(n_power);
    let zn = m.z.powi(n_power);
    (&yn - &zn).norm_fro() <= tol * (yn.norm_fro() + zn.norm_fro() + 1.0)
}

/// The 3x3 rational (non-soliton) example: `X` fixed, `Y` an upper and `Z` a
/// lower Jordan block at `lambda`.
pub fn rational_example(lambda: C64) -> Triple {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let x = ComplexMatrix::from_real(&[&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]).expect("fixed 3x3");
    let y = ComplexMatrix::from_rows(vec![
        vec![lambda, one, zero],
        vec![zero, lambda, one],
        vec![zero, zero, lambda],
    ])
    .expect("finite lambda");
    let z = y.transpose();
    Triple::new(x, y, z).expect("dimensions agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::{c, singular_values};

    fn re(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn sample_data() -> SpectralSolitonData {
        SpectralSolitonData::new(
            vec![c(1.0, 0.2), c(-0.5, 1.0), c(0.7, -0.3)],
            vec![c(1.0, 0.0), c(0.4, 0.9), c(-1.2, 0.1)],
            vec![c(0.5, 0.1), c(1.1, -0.4), c(-0.3, 0.8)],
            vec![c(-0.6, 0.0), c(0.2, -1.0), c(-1.4, 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn kappa_zero_for_exact_intertwiner() {
        let a = ComplexMatrix::from_fn(3, |i, j| c(i as f64 + 0.5 * j as f64, 1.0 - j as f64));
        assert_eq!(kappa(&ComplexMatrix::identity(3), &a, &a).unwrap(), 0);
    }

    #[test]
    fn kappa_scalar() {
        let t = Triple::new(
            ComplexMatrix::diag(&[re(1.0)]),
            ComplexMatrix::diag(&[re(2.0)]),
            ComplexMatrix::diag(&[re(3.0)]),
        )
        .unwrap();
        assert_eq!(t.kappa(), 1);
    }

    #[test]
    fn kappa_generic_is_full() {
        let mut rng = crate::rng::SeededRng::new(11);
        let t = Triple::new(rng.matrix(4, 1.0), rng.matrix(4, 1.0), rng.matrix(4, 1.0)).unwrap();
        assert_eq!(t.kappa(), 4);
        let sv = singular_values(&t.defect());
        assert!(sv[3] > 1e-6 * sv[0]);
    }

    #[test]
    fn dimension_mismatch() {
        let r = Triple::new(
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(3),
            ComplexMatrix::identity(2),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn scalar_soliton_triple() {
        let data = SpectralSolitonData::new(vec![re(1.0)], vec![re(1.0)], vec![re(1.0)], vec![re(-1.0)]).unwrap();
        let t = soliton_triple(&data).unwrap();
        assert_eq!(t.x()[(0, 0)], re(0.5));
        assert_eq!(t.y()[(0, 0)], re(-1.0));
        assert_eq!(t.z()[(0, 0)], re(1.0));
        assert_eq!(t.kappa(), 1);
    }

    #[test]
    fn two_soliton_has_rank_one_defect() {
        let data = SpectralSolitonData::new(
            vec![re(1.0), re(1.0)],
            vec![re(1.0), re(1.0)],
            vec![re(1.0), re(2.0)],
            vec![re(-1.0), re(-2.0)],
        )
        .unwrap();
        assert_eq!(soliton_triple(&data).unwrap().kappa(), 1);
    }

    #[test]
    fn soliton_defect_is_alpha_outer_inverse_beta() {
        let data = sample_data();
        let t = soliton_triple(&data).unwrap();
        let expected = ComplexMatrix::outer(&data.alpha, &data.beta.iter().map(|b| b.inv()).collect::<Vec<_>>());
        assert!((&t.defect() - &expected).norm_fro() < 1e-13 * expected.norm_fro());
        let sv = singular_values(&t.defect());
        assert!(sv[1] < 1e-12 * sv[0]);
    }

    #[test]
    fn invalid_spectral_data() {
        let bad = SpectralSolitonData::new(vec![re(1.0)], vec![re(1.0)], vec![re(1.0)], vec![re(1.0)]);
        assert!(matches!(bad, Err(Error::Format { .. })));
        let zero_beta = SpectralSolitonData::new(vec![re(1.0)], vec![re(0.0)], vec![re(1.0)], vec![re(2.0)]);
        assert!(zero_beta.is_err());
    }

    #[test]
    fn gl_action_identity_and_rank() {
        let t = soliton_triple(&sample_data()).unwrap();
        let id = ComplexMatrix::identity(3);
        assert_eq!(t.gl_action(&id, &id).unwrap(), t);
        let g = ComplexMatrix::diag(&[c(2.0, 0.0), c(0.0, 1.0), c(-0.5, 0.5)]);
        let h = ComplexMatrix::diag(&[c(1.0, 1.0), c(3.0, 0.0), c(0.2, 0.0)]);
        assert_eq!(t.gl_action(&g, &h).unwrap().kappa(), 1);
    }

    #[test]
    fn gl_action_rejects_singular() {
        let t = soliton_triple(&sample_data()).unwrap();
        let g = ComplexMatrix::diag(&[re(1.0), re(0.0), re(1.0)]);
        assert!(t.gl_action(&g, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn lambda_omega_action() {
        let t = soliton_triple(&sample_data()).unwrap();
        let id = ComplexMatrix::identity(3);
        assert_eq!(t.lambda_omega_action(&id, &id).unwrap(), t);
        let moved = t.lambda_omega_action(&t.y().powi(2), &t.z().powi(3)).unwrap();
        assert!(moved.kappa() <= 1);
        let not_commuting = ComplexMatrix::from_real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]).unwrap();
        assert!(t.lambda_omega_action(&not_commuting, &id).is_err());
    }

    #[test]
    fn lambda_omega_reproduces_flow() {
        let t = soliton_triple(&sample_data()).unwrap();
        let time = TimeVector::from_slice(&[c(0.3, 0.1), c(-0.2, 0.0), c(0.1, 0.05)]).unwrap();
        let lam = crate::matrix_kernel::expm(&-&g_eval(t.y(), &time)).unwrap();
        let om = crate::matrix_kernel::expm(&g_eval(t.z(), &time)).unwrap();
        let a = t.lambda_omega_action(&lam, &om).unwrap();
        let b = t.flow(&time).unwrap();
        assert!((&a.x - &b.x).norm_fro() < 1e-13 * b.x.norm_fro());
    }

    #[test]
    fn nkdv_checks() {
        let z = ComplexMatrix::from_fn(3, |i, j| c((i + j) as f64 * 0.3, i as f64 - 0.2 * j as f64));
        let t = Triple::new(ComplexMatrix::identity(3), -&z, z.clone()).unwrap();
        assert!(is_nkdv(&t, 2, 1e-12));
        assert!(!is_nkdv(&t, 1, 1e-12));
        let same = Triple::new(ComplexMatrix::identity(3), z.clone(), z.clone()).unwrap();
        for n in 1..6 {
            assert!(is_nkdv(&same, n, 1e-12));
        }
        let data = SpectralSolitonData::new(
            vec![re(1.0), re(1.0)],
            vec![re(1.0), re(1.0)],
            vec![re(1.0), re(2.0)],
            vec![re(-1.0), re(3.0)],
        )
        .unwrap();
        assert!(!is_nkdv(&soliton_triple(&data).unwrap(), 2, 1e-9));
    }

    #[test]
    fn rational_example_is_almost_intertwining() {
        for lambda in [re(0.0), re(1.0), re(2.0), c(0.0, 1.0)] {
            assert!(rational_example(lambda).kappa() <= 1, "lambda = {lambda}");
        }
    }

    #[test]
    fn flow_basics() {
        let t = soliton_triple(&sample_data()).unwrap();
        assert_eq!(t.flow(&TimeVector::zero()).unwrap(), t);
        let scalar = Triple::new(
            ComplexMatrix::diag(&[c(0.7, 0.2)]),
            ComplexMatrix::diag(&[c(-0.4, 0.1)]),
            ComplexMatrix::diag(&[c(1.3, 0.0)]),
        )
        .unwrap();
        let s = 0.8;
        let moved = scalar.flow(&TimeVector::first(re(s))).unwrap();
        let expected = c(0.7, 0.2) * ((c(1.3, 0.0) - c(-0.4, 0.1)) * s).exp();
        assert!((moved.x()[(0, 0)] - expected).norm() < 1e-14);
        for s in [0.1, 1.0, 5.0] {
            assert_eq!(t.flow(&TimeVector::first(re(s))).unwrap().kappa(), 1);
        }
    }

    #[test]
    fn inverse_symmetry_is_an_involution() {
        let t = soliton_triple(&sample_data()).unwrap();
        let once = t.inverse_symmetry().unwrap();
        assert_eq!(once.kappa(), 1);
        let twice = once.inverse_symmetry().unwrap();
        assert!((&twice.x - &t.x).norm_fro() < 1e-10 * t.x.norm_fro());
        assert_eq!(twice.y, t.y);
        assert_eq!(twice.z, t.z);
    }

    #[test]
    fn swap_symmetry_keeps_rank_one() {
        let t = soliton_triple(&sample_data()).unwrap();
        assert_eq!(t.swap_symmetry().unwrap().kappa(), 1);
    }
}
