//! Tau-functions `tau(t) = det(X e^{g(Z)} + e^{g(Y)})` and the identities
//! they satisfy.
//!
//! Miwa shifts `t -> t - [1/a]` are applied exactly: `exp(-sum W^i / (i a^i))`
//! is the matrix `I - W/a`, so shifted tau values are finite determinants and
//! no logarithm series is ever truncated.

mod kp;
mod rational;
mod soliton;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix_kernel::{det, expm, ComplexMatrix, C64};
use crate::rng::SeededRng;
use crate::triples::Triple;

pub use crate::time::TimeVector;
pub use kp::{
    kp_residual, kp_residual_with_step, kp_residual_with_steps, u_field, u_value, GridValue, KpResidual, KP_BASE_STEP,
};
pub use rational::{rational_polynomial_check, RationalCheck};
pub use soliton::soliton_sum_tau;

/// `g(W) = sum_i t_i W^i`, Horner form over the support of `t`.
pub fn g_eval(w: &ComplexMatrix, t: &TimeVector) -> ComplexMatrix {
    let n = w.n();
    let top = t.support_max();
    if top == 0 {
        return ComplexMatrix::zeros(n);
    }
    let mut acc = ComplexMatrix::scalar(n, t.get(top));
    for i in (1..top).rev() {
        acc = &acc * w;
        let ti = t.get(i);
        if ti != C64::new(0.0, 0.0) {
            for k in 0..n {
                acc[(k, k)] += ti;
            }
        }
    }
    &acc * w
}

/// Scalar `g(z) = sum_i t_i z^i`.
pub fn g_scalar(z: C64, t: &TimeVector) -> C64 {
    t.iter().map(|(i, ti)| ti * z.powu(i as u32)).sum()
}

struct Exponentials {
    ez: ComplexMatrix,
    ey: ComplexMatrix,
}

fn exponentials(m: &Triple, t: &TimeVector) -> Result<Exponentials> {
    Ok(Exponentials {
        ez: expm(&g_eval(m.z(), t))?,
        ey: expm(&g_eval(m.y(), t))?,
    })
}

/// `I - W/a`.
fn miwa_factor(w: &ComplexMatrix, a: C64) -> ComplexMatrix {
    &ComplexMatrix::identity(w.n()) - &w.scale(a.inv())
}

fn check_shift_point(a: C64, name: &str) -> Result<()> {
    if a.norm() == 0.0 {
        return Err(Error::precondition(format!("shift point {name} must be nonzero")));
    }
    Ok(())
}

/// `det(X e^{g(Z)} + e^{g(Y)})`.
pub fn tau(m: &Triple, t: &TimeVector) -> Result<C64> {
    let e = exponentials(m, t)?;
    Ok(det(&(&(m.x() * &e.ez) + &e.ey)))
}

/// `tau` together with the Hadamard bound of its matrix (product of row
/// norms), a scale for deciding whether `tau` is numerically zero.
pub(crate) fn tau_with_bound(m: &Triple, t: &TimeVector) -> Result<(C64, f64)> {
    let e = exponentials(m, t)?;
    let a = &(m.x() * &e.ez) + &e.ey;
    let bound = (0..a.n())
        .map(|i| a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product();
    Ok((det(&a), bound))
}

/// Gauge-transformed tau, `det(X e^{g(Z)} e^{-g(Y)} + I) = tau e^{-tr g(Y)}`.
pub fn tau_hat(m: &Triple, t: &TimeVector) -> Result<C64> {
    let ez = expm(&g_eval(m.z(), t))?;
    let ey_inv = expm(&-&g_eval(m.y(), t))?;
    let a = &(&(m.x() * &ez) * &ey_inv) + &ComplexMatrix::identity(m.n());
    Ok(det(&a))
}

/// `tau(t - [1/a]) = det(X e^{g(Z)} (I - Z/a) + e^{g(Y)} (I - Y/a))`.
pub fn miwa_shift_tau(m: &Triple, t: &TimeVector, a: C64) -> Result<C64> {
    check_shift_point(a, "a")?;
    let e = exponentials(m, t)?;
    let lhs = &(&(m.x() * &e.ez) * &miwa_factor(m.z(), a));
    let rhs = &e.ey * &miwa_factor(m.y(), a);
    Ok(det(&(lhs + &rhs)))
}

/// `tau(t - [1/a] - [1/b])`.
pub fn double_miwa_shift_tau(m: &Triple, t: &TimeVector, a: C64, b: C64) -> Result<C64> {
    check_shift_point(a, "a")?;
    check_shift_point(b, "b")?;
    let e = exponentials(m, t)?;
    let zf = &miwa_factor(m.z(), a) * &miwa_factor(m.z(), b);
    let yf = &miwa_factor(m.y(), a) * &miwa_factor(m.y(), b);
    let lhs = &(m.x() * &e.ez) * &zf;
    let rhs = &e.ey * &yf;
    Ok(det(&(&lhs + &rhs)))
}

/// `X_hat = e^{-g(Y)} X e^{g(Z)}`, the matrix entering the H polynomial.
pub fn x_hat(m: &Triple, t: &TimeVector) -> Result<ComplexMatrix> {
    let ez = expm(&g_eval(m.z(), t))?;
    let ey_inv = expm(&-&g_eval(m.y(), t))?;
    Ok(&(&ey_inv * m.x()) * &ez)
}

/// `H_1(a) = det(X_hat (aI - Z) + (aI - Y))`.
pub fn h1(xhat: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix, a: C64) -> Result<C64> {
    xhat.check_same_dim(y)?;
    xhat.check_same_dim(z)?;
    let n = xhat.n();
    let za = &ComplexMatrix::scalar(n, a) - z;
    let ya = &ComplexMatrix::scalar(n, a) - y;
    Ok(det(&(&(xhat * &za) + &ya)))
}

/// `H_2(a, b) = (a - b) det(X_hat (aI - Z)(bI - Z) + (aI - Y)(bI - Y))`.
pub fn h2(xhat: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix, a: C64, b: C64) -> Result<C64> {
    xhat.check_same_dim(y)?;
    xhat.check_same_dim(z)?;
    let n = xhat.n();
    let shifted = |w: &ComplexMatrix, s: C64| &ComplexMatrix::scalar(n, s) - w;
    let zab = &shifted(z, a) * &shifted(z, b);
    let yab = &shifted(y, a) * &shifted(y, b);
    Ok((a - b) * det(&(&(xhat * &zab) + &yab)))
}

/// Value of `H(a,b,c) = H1(a)H2(b,c) - H1(b)H2(a,c) + H1(c)H2(a,b)` with the
/// largest of the three term magnitudes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HValue {
    pub value: C64,
    pub scale: f64,
}

impl HValue {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.value.norm() / self.scale
        }
    }
}

pub fn h_poly(xhat: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix, a: C64, b: C64, c: C64) -> Result<HValue> {
    let t1 = h1(xhat, y, z, a)? * h2(xhat, y, z, b, c)?;
    let t2 = h1(xhat, y, z, b)? * h2(xhat, y, z, a, c)?;
    let t3 = h1(xhat, y, z, c)? * h2(xhat, y, z, a, b)?;
    Ok(HValue {
        value: t1 - t2 + t3,
        scale: t1.norm().max(t2.norm()).max(t3.norm()),
    })
}

/// Closed form of `H` for 2x2 input:
/// `(a-b)(b-c)(a-c) det[(X_hat Z - Y X_hat)(Y - Z)]`.
///
/// The sign is fixed by the definition of `H` above; the commonly quoted
/// form with `(c-a)` in place of `(a-c)` equals `-H`.
pub fn h_poly_2x2_closed_form(
    xhat: &ComplexMatrix,
    y: &ComplexMatrix,
    z: &ComplexMatrix,
    a: C64,
    b: C64,
    c: C64,
) -> Result<C64> {
    if xhat.n() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: xhat.n(),
        });
    }
    xhat.check_same_dim(y)?;
    xhat.check_same_dim(z)?;
    let d = &(xhat * z) - &(y * xhat);
    Ok((a - b) * (b - c) * (a - c) * det(&(&d * &(y - z))))
}

/// One evaluation of the three-term Hirota identity in Miwa form.
///
/// `residual` and `scale` are divided by `det(e^{g(Y)})^2`, a factor common to
/// all three products; `log_gauge` is its logarithm, so the raw residual is
/// `residual * exp(log_gauge)`. The relative residual is unaffected.
#[derive(Clone, Debug, Serialize)]
pub struct HirotaSample {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub t: Vec<(usize, C64)>,
    pub residual: C64,
    pub scale: f64,
    pub log_gauge: C64,
}

impl HirotaSample {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.residual.norm() / self.scale
        }
    }

    pub fn raw_residual(&self) -> C64 {
        self.residual * self.log_gauge.exp()
    }
}

/// Shifted tau values in the frame `X_hat`, each divided by `det(e^{g(Y)})`.
struct ShiftFrame {
    xhat: ComplexMatrix,
    y: ComplexMatrix,
    z: ComplexMatrix,
}

impl ShiftFrame {
    fn new(m: &Triple, t: &TimeVector) -> Result<Self> {
        Ok(Self {
            xhat: x_hat(m, t)?,
            y: m.y().clone(),
            z: m.z().clone(),
        })
    }

    fn single(&self, a: C64) -> C64 {
        det(&(&(&self.xhat * &miwa_factor(&self.z, a)) + &miwa_factor(&self.y, a)))
    }

    fn double(&self, a: C64, b: C64) -> C64 {
        let zf = &miwa_factor(&self.z, a) * &miwa_factor(&self.z, b);
        let yf = &miwa_factor(&self.y, a) * &miwa_factor(&self.y, b);
        det(&(&(&self.xhat * &zf) + &yf))
    }
}

pub fn hirota_residual(m: &Triple, t: &TimeVector, a: C64, b: C64, c: C64) -> Result<HirotaSample> {
    check_shift_point(a, "a")?;
    check_shift_point(b, "b")?;
    check_shift_point(c, "c")?;
    let frame = ShiftFrame::new(m, t)?;
    let t1 = (b - c) * frame.single(a) * frame.double(b, c);
    let t2 = (a - c) * frame.single(b) * frame.double(a, c);
    let t3 = (a - b) * frame.single(c) * frame.double(a, b);
    let log_gauge = g_eval(m.y(), t).trace() * 2.0;
    Ok(HirotaSample {
        a,
        b,
        c,
        t: t.iter().collect(),
        residual: t1 - t2 + t3,
        scale: t1.norm().max(t2.norm()).max(t3.norm()),
        log_gauge,
    })
}

/// Draws `(a, b, c, t)` per the sampling protocol: `|a|, |b|, |c|` in
/// `[0.5, 4]`, pairwise at least 0.1 apart, and `t` supported on
/// `{1, 2, 3, 5}` with entries in the unit disk.
pub fn sample_hirota_point(rng: &mut SeededRng) -> (C64, C64, C64, TimeVector) {
    let (a, b, c) = loop {
        let a = rng.annulus(0.5, 4.0);
        let b = rng.annulus(0.5, 4.0);
        let c = rng.annulus(0.5, 4.0);
        if (a - b).norm() >= 0.1 && (b - c).norm() >= 0.1 && (a - c).norm() >= 0.1 {
            break (a, b, c);
        }
    };
    let mut t = TimeVector::zero();
    for i in [1, 2, 3, 5] {
        t.set(i, rng.disk(1.0)).expect("index in range");
    }
    (a, b, c, t)
}

/// Samples with a scale below this are redrawn.
pub const HIROTA_MIN_SCALE: f64 = 1e-12;

/// `count` Hirota samples for `m`, redrawing degenerate ones.
pub fn hirota_samples(m: &Triple, rng: &mut SeededRng, count: usize) -> Result<Vec<HirotaSample>> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(Error::precondition("could not draw non-degenerate Hirota samples"));
        }
        let (a, b, c, t) = sample_hirota_point(rng);
        let s = match hirota_residual(m, &t, a, b, c) {
            Ok(s) => s,
            Err(Error::Overflow { .. }) => continue,
            Err(e) => return Err(e),
        };
        if s.scale >= HIROTA_MIN_SCALE {
            out.push(s);
        }
    }
    Ok(out)
}

/// Relative deviation of `tau` from the N-KdV factorization
/// `tau(t) = tau(t with t_j = 0) det(exp(t_j Z^j))`.
///
/// `t` may only involve `t_1` and one `t_j` with `j` a multiple of `n_power`.
/// The deviation is computed whether or not `Y^N = Z^N`; it is small only
/// when that holds.
pub fn kdv_factorization_check(m: &Triple, n_power: u32, t: &TimeVector) -> Result<f64> {
    if n_power == 0 {
        return Err(Error::precondition("N must be at least 1"));
    }
    let others: Vec<usize> = t.iter().map(|(i, _)| i).filter(|&i| i != 1).collect();
    if others.len() > 1 {
        return Err(Error::InvalidTime(format!(
            "support must be within {{1, j}}, found extra indices {others:?}"
        )));
    }
    let Some(&j) = others.first() else {
        return Ok(0.0);
    };
    if j % n_power as usize != 0 {
        return Err(Error::InvalidTime(format!(
            "index {j} is not a multiple of N = {n_power}"
        )));
    }
    let tj = t.get(j);
    let full = tau(m, t)?;
    let mut reduced_t = t.clone();
    reduced_t.set(j, C64::new(0.0, 0.0))?;
    let reduced = tau(m, &reduced_t)?;
    let factor = det(&expm(&m.z().powi(j as u32).scale(tj))?);
    let denom = full.norm();
    if denom == 0.0 {
        return Err(Error::SingularTau { value: 0.0 });
    }
    Ok((full - reduced * factor).norm() / denom)
}
