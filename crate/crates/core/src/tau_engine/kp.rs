//! `u = factor * d^2/dx^2 log tau` on the real `(x, y, t) = (t_1, t_2, t_3)`
//! slice, and the KP residual
//! `(3/4) u_yy - (u_t - (1/4)(6 u u_x + u_xxx))_x`.
//!
//! Derivatives are fourth-order central differences with one Richardson
//! step. `log tau` is only ever differenced as `log(tau(p + s) / tau(p))`, so
//! the branch of the logarithm never matters for small steps.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix_kernel::{eigenvalues, C64};
use crate::time::TimeVector;
use crate::triples::Triple;

use super::tau_with_bound;

/// Centre of the step search, in units of the spectral scale.
pub const KP_BASE_STEP: f64 = 0.08;

/// Powers of two tried around the base step in each direction.
const LADDER: std::ops::RangeInclusive<i32> = -5..=2;

/// `tau` counts as zero when below this fraction of its Hadamard bound.
const SINGULAR_REL: f64 = 1e-8;

#[derive(Clone, Copy)]
struct Stencil {
    offsets: &'static [i32],
    weights: &'static [f64],
    denom: f64,
    order: i32,
}

const D1: Stencil = Stencil {
    offsets: &[-2, -1, 1, 2],
    weights: &[1.0, -8.0, 8.0, -1.0],
    denom: 12.0,
    order: 1,
};
const D2: Stencil = Stencil {
    offsets: &[-2, -1, 0, 1, 2],
    weights: &[-1.0, 16.0, -30.0, 16.0, -1.0],
    denom: 12.0,
    order: 2,
};
const D4: Stencil = Stencil {
    offsets: &[-3, -2, -1, 0, 1, 2, 3],
    weights: &[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0],
    denom: 6.0,
    order: 4,
};

fn apply(st: Stencil, units: i32, h: f64, f: &mut impl FnMut(i32) -> Result<C64>) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (&k, &w) in st.offsets.iter().zip(st.weights) {
        acc += f(k * units)? * w;
    }
    Ok(acc / (st.denom * (units as f64 * h).powi(st.order)))
}

/// Richardson-extrapolated stencil `(16 D(h) - D(2h)) / 15` on integer
/// offsets of step `h`.
fn derivative(st: Stencil, h: f64, mut f: impl FnMut(i32) -> Result<C64>) -> Result<C64> {
    let fine = apply(st, 1, h, &mut f)?;
    let coarse = apply(st, 2, h, &mut f)?;
    Ok((fine * 16.0 - coarse) / 15.0)
}

fn tau_xyt(m: &Triple, x: f64, y: f64, t: f64) -> Result<C64> {
    let (v, bound) = tau_with_bound(m, &TimeVector::xyt(x, y, t))?;
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite("tau"));
    }
    if v.norm() <= SINGULAR_REL * bound {
        return Err(Error::SingularTau { value: v.norm() });
    }
    Ok(v)
}

/// `tau` memoized on the lattice `origin + (i hx, j hy, k ht)`. Nested
/// stencils revisit the same points many times.
struct Lattice<'a> {
    m: &'a Triple,
    origin: [f64; 3],
    steps: [f64; 3],
    factor: f64,
    cache: HashMap<[i32; 3], C64>,
}

impl<'a> Lattice<'a> {
    fn new(m: &'a Triple, origin: [f64; 3], steps: [f64; 3], factor: f64) -> Result<Self> {
        if !steps.iter().all(|h| *h > 0.0 && h.is_finite()) {
            return Err(Error::precondition("finite-difference step must be positive"));
        }
        Ok(Self {
            m,
            origin,
            steps,
            factor,
            cache: HashMap::new(),
        })
    }

    fn tau(&mut self, p: [i32; 3]) -> Result<C64> {
        if let Some(v) = self.cache.get(&p) {
            return Ok(*v);
        }
        let [x, y, t] = std::array::from_fn(|d| self.origin[d] + p[d] as f64 * self.steps[d]);
        let v = tau_xyt(self.m, x, y, t)?;
        self.cache.insert(p, v);
        Ok(v)
    }

    /// `u` at lattice point `p`, differenced with the x-step.
    fn u(&mut self, p: [i32; 3]) -> Result<C64> {
        let center = self.tau(p)?;
        let d2 = derivative(D2, self.steps[0], |k| {
            if k == 0 {
                Ok(C64::new(0.0, 0.0))
            } else {
                Ok((self.tau([p[0] + k, p[1], p[2]])? / center).ln())
            }
        })?;
        Ok(d2 * self.factor)
    }

    /// `[u, u_x, u_xx, u_xxxx]` at the origin.
    fn x_terms(&mut self) -> Result<[C64; 4]> {
        let ux = derivative(D1, self.steps[0], |k| self.u([k, 0, 0]))?;
        let uxx = derivative(D2, self.steps[0], |k| self.u([k, 0, 0]))?;
        let uxxxx = derivative(D4, self.steps[0], |k| self.u([k, 0, 0]))?;
        Ok([self.u([0, 0, 0])?, ux, uxx, uxxxx])
    }

    fn u_yy(&mut self) -> Result<C64> {
        derivative(D2, self.steps[1], |k| self.u([0, k, 0]))
    }

    fn u_xt(&mut self) -> Result<C64> {
        let (hx, ht) = (self.steps[0], self.steps[2]);
        derivative(D1, ht, |k| derivative(D1, hx, |j| self.u([j, 0, k])))
    }
}

/// `u(x, y, t)` with x-step `h`.
pub fn u_value(m: &Triple, x: f64, y: f64, t: f64, factor: f64, h: f64) -> Result<C64> {
    Lattice::new(m, [x, y, t], [h, h, h], factor)?.u([0, 0, 0])
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridValue {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub value: C64,
}

/// `u` on the tensor grid `xs x ys x ts` (x fastest), step
/// `1e-3 * max(1, |x|)`.
pub fn u_field(m: &Triple, xs: &[f64], ys: &[f64], ts: &[f64], factor: f64) -> Result<Vec<GridValue>> {
    let mut out = Vec::with_capacity(xs.len() * ys.len() * ts.len());
    for &t in ts {
        for &y in ys {
            for &x in xs {
                let h = 1e-3 * x.abs().max(1.0);
                out.push(GridValue {
                    x,
                    y,
                    t,
                    value: u_value(m, x, y, t, factor, h)?,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct KpResidual {
    pub residual: C64,
    /// Largest magnitude among the four terms of the equation.
    pub scale: f64,
    pub u: C64,
    /// `(3/4) u_yy`, `u_xt`, `(3/2)(u_x^2 + u u_xx)`, `(1/4) u_xxxx`.
    pub terms: [C64; 4],
    pub steps: [f64; 3],
    /// Estimated error of the residual relative to `scale`, from the step
    /// search; `None` for fixed steps.
    pub error_estimate: Option<f64>,
}

impl KpResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.residual.norm() / self.scale
        }
    }
}

/// Largest wave number of `tau_hat` in `x`: the spread between the spectra
/// of `Z` and `Y`, at least 1.
fn spectral_scale(m: &Triple) -> Result<f64> {
    let (zs, ys) = (eigenvalues(m.z())?, eigenvalues(m.y())?);
    let spread = zs
        .iter()
        .flat_map(|z| ys.iter().map(move |y| (z - y).norm()))
        .fold(0.0, f64::max);
    Ok(spread.max(1.0))
}

/// Runs `eval` on each step of a ladder and returns the step whose value
/// moves least against both neighbours, with that relative change.
fn pick_step(ladder: &[f64], mut eval: impl FnMut(f64) -> Result<(C64, f64)>) -> Result<Option<(f64, f64)>> {
    let mut rungs = Vec::with_capacity(ladder.len());
    for &h in ladder {
        match eval(h) {
            Ok(v) => rungs.push(Some(v)),
            Err(Error::SingularTau { .. }) => rungs.push(None),
            Err(e) => return Err(e),
        }
    }
    let change = |p: (C64, f64), q: (C64, f64)| {
        let scale = p.1.max(q.1);
        if scale == 0.0 {
            0.0
        } else {
            (p.0 - q.0).norm() / scale
        }
    };
    let mut best: Option<(f64, f64)> = None;
    for (i, w) in rungs.windows(3).enumerate() {
        let (Some(a), Some(b), Some(c)) = (w[0], w[1], w[2]) else {
            continue;
        };
        let est = change(a, b).max(change(b, c));
        if best.is_none_or(|(_, e)| est < e) {
            best = Some((ladder[i + 1], est));
        }
    }
    Ok(best)
}

/// KP residual with steps chosen per direction. Each step comes from a
/// ladder of powers of two around `KP_BASE_STEP / s^k` (`s` the spectral
/// scale, `k` the time index): the x-step on the x-only terms, then the
/// y-step on `u_yy` and the t-step on `u_xt`. The chosen step is the one
/// whose term agrees best with both neighbouring steps, which sits between
/// the truncation and the rounding regimes.
pub fn kp_residual(m: &Triple, x: f64, y: f64, t: f64, factor: f64) -> Result<KpResidual> {
    let s = spectral_scale(m)?;
    let origin = [x, y, t];
    let ladder = |k: i32| -> Vec<f64> { LADDER.map(|j| KP_BASE_STEP / s.powi(k) * 2f64.powi(j)).collect() };
    let singular = || Error::SingularTau { value: 0.0 };

    let (hx, est_x) = pick_step(&ladder(1), |h| {
        let [u, ux, uxx, uxxxx] = Lattice::new(m, origin, [h, h, h], factor)?.x_terms()?;
        let (nl, disp) = ((ux * ux + u * uxx) * 1.5, uxxxx * 0.25);
        Ok((nl + disp, nl.norm().max(disp.norm())))
    })?
    .ok_or_else(singular)?;
    let (hy, est_y) = pick_step(&ladder(2), |h| {
        let v = Lattice::new(m, origin, [hx, h, h], factor)?.u_yy()? * 0.75;
        Ok((v, v.norm()))
    })?
    .ok_or_else(singular)?;
    let (ht, est_t) = pick_step(&ladder(3), |h| {
        let v = Lattice::new(m, origin, [hx, h, h], factor)?.u_xt()?;
        Ok((v, v.norm()))
    })?
    .ok_or_else(singular)?;

    let mut r = kp_residual_with_steps(m, x, y, t, factor, [hx, hy, ht])?;
    // Per-direction changes, rescaled to the full equation.
    let parts = [
        est_x * r.terms[2].norm().max(r.terms[3].norm()),
        est_y * r.terms[0].norm(),
        est_t * r.terms[1].norm(),
    ];
    r.error_estimate = Some(if r.scale == 0.0 {
        0.0
    } else {
        parts.iter().sum::<f64>() / r.scale
    });
    Ok(r)
}

/// KP residual with base step `h0`; the x, y, t steps are `h0/s`, `h0/s^2`,
/// `h0/s^3` for spectral scale `s`. `u` itself is differenced with the
/// x-step.
pub fn kp_residual_with_step(m: &Triple, x: f64, y: f64, t: f64, factor: f64, h0: f64) -> Result<KpResidual> {
    let s = spectral_scale(m)?;
    kp_residual_with_steps(m, x, y, t, factor, [h0 / s, h0 / (s * s), h0 / (s * s * s)])
}

/// KP residual with explicit x, y, t steps.
pub fn kp_residual_with_steps(m: &Triple, x: f64, y: f64, t: f64, factor: f64, steps: [f64; 3]) -> Result<KpResidual> {
    let mut lat = Lattice::new(m, [x, y, t], steps, factor)?;
    let [u0, ux, uxx, uxxxx] = lat.x_terms()?;
    let uyy = lat.u_yy()?;
    let uxt = lat.u_xt()?;

    let terms = [uyy * 0.75, uxt, (ux * ux + u0 * uxx) * 1.5, uxxxx * 0.25];
    let residual = terms[0] - terms[1] + terms[2] + terms[3];
    let scale = terms.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(KpResidual {
        residual,
        scale,
        u: u0,
        terms,
        steps,
        error_estimate: None,
    })
}
