//! Eigenvalue dynamics of `X_t = e^{-tY} X_0 e^{tZ}` under the first flow.
//!
//! With `XZ - YX = v w^T`, `U` diagonalizing `X_t` (`Q = U X_t U^{-1}`) and
//! hatted quantities `Y_hat = U Y U^{-1}`, `v_hat = U v_t`,
//! `w_hat^T = w_t^T U^{-1}`, the entrywise relation is
//! `Q_i Z_hat_ij - Q_j Y_hat_ij = v_hat_i w_hat_j`.

mod track;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix_kernel::{eig, expm, ComplexMatrix, ComplexVector, C64};
use crate::triples::Triple;

pub use track::{integrate_rs, track_eigenvalues, CollisionFlag, Trajectory, TrajectorySource};

/// Eigenvalues closer than this fraction of `max |Q|` count as colliding.
pub const COLLISION_REL: f64 = 1e-6;

/// `(v, w)` with `v w^T = XZ - YX`, `|w| = 1` and the first nonzero entry
/// of `w` real positive.
pub fn rank_one_factors(m: &Triple) -> Result<(ComplexVector, ComplexVector)> {
    let kappa = m.kappa();
    if kappa != 1 {
        return Err(Error::precondition(format!(
            "rank-one factors need kappa = 1, got {kappa}"
        )));
    }
    let d = m.defect();
    let n = d.n();
    let top = (0..n)
        .max_by(|&a, &b| {
            let na: f64 = d.row(a).iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = d.row(b).iter().map(|z| z.norm_sqr()).sum();
            na.total_cmp(&nb)
        })
        .expect("n >= 1");
    let row = d.row(top);
    let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let lead = row.iter().position(|z| z.norm() > 1e-12 * norm).expect("nonzero row");
    let phase = row[lead].conj() / row[lead].norm();
    let mut w: ComplexVector = row.iter().map(|z| z * phase / norm).collect();
    w[lead] = C64::new(row[lead].norm() / norm, 0.0);
    let wc: Vec<C64> = w.iter().map(|z| z.conj()).collect();
    let v = d.mul_vec(&wc);
    Ok((v, w))
}

/// Snapshot of the diagonalized flow at time `t`.
#[derive(Clone, Debug, Serialize)]
pub struct FlowState {
    pub t: f64,
    #[serde(rename = "Q")]
    pub big_q: ComplexVector,
    pub q: ComplexVector,
    pub u: ComplexMatrix,
    /// `U^{-1}`, columns are eigenvectors of `X_t`.
    pub v_mat: ComplexMatrix,
    pub yhat: ComplexMatrix,
    pub zhat: ComplexMatrix,
    pub vhat: ComplexVector,
    pub what: ComplexVector,
    pub x: ComplexMatrix,
}

pub(crate) fn min_separation(q: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            best = best.min((q[i] - q[j]).norm());
        }
    }
    best
}

pub(crate) fn check_collision(q: &[C64]) -> Result<()> {
    let sep = min_separation(q);
    let peak = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sep < COLLISION_REL * peak {
        return Err(Error::Collision { separation: sep });
    }
    Ok(())
}

/// `X_t = e^{-tY} X_0 e^{tZ}` and the transported factors
/// `v_t = e^{-tY} v`, `w_t^T = w^T e^{tZ}`.
pub(crate) fn transported(
    m0: &Triple,
    v: &[C64],
    w: &[C64],
    t: f64,
) -> Result<(ComplexMatrix, ComplexVector, ComplexVector)> {
    let ey = expm(&m0.y().scale(C64::new(-t, 0.0)))?;
    let ez = expm(&m0.z().scale(C64::new(t, 0.0)))?;
    let x = &(&ey * m0.x()) * &ez;
    Ok((x, ey.mul_vec(v), ez.vec_mul(w)))
}

pub fn flow_state(m0: &Triple, t: f64) -> Result<FlowState> {
    let (v, w) = rank_one_factors(m0)?;
    state_from_factors(m0, &v, &w, t)
}

pub(crate) fn state_from_factors(m0: &Triple, v: &[C64], w: &[C64], t: f64) -> Result<FlowState> {
    let (x, vt, wt) = transported(m0, v, w, t)?;
    let e = eig(&x)?;
    check_collision(&e.values)?;
    let u = e.diagonalizer()?;
    let v_mat = e.vectors.clone();
    Ok(FlowState {
        t,
        q: e.values.iter().map(|z| z.ln()).collect(),
        big_q: e.values,
        yhat: &(&u * m0.y()) * &v_mat,
        zhat: &(&u * m0.z()) * &v_mat,
        vhat: u.mul_vec(&vt),
        what: v_mat.vec_mul(&wt),
        u,
        v_mat,
        x,
    })
}

impl FlowState {
    pub fn n(&self) -> usize {
        self.big_q.len()
    }

    /// `max |Q_i Z_hat_ij - Q_j Y_hat_ij - v_hat_i w_hat_j|` relative to the
    /// largest term.
    pub fn linear1_residual(&self) -> f64 {
        let n = self.n();
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                let a = self.big_q[i] * self.zhat[(i, j)];
                let b = self.big_q[j] * self.yhat[(i, j)];
                let c = self.vhat[i] * self.what[j];
                worst = worst.max((a - b - c).norm());
                scale = scale.max(a.norm()).max(b.norm()).max(c.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// `|U X U^{-1} - diag(Q)| / |X|`.
    pub fn diagonalization_residual(&self) -> f64 {
        let d = &(&self.u * &self.x) * &self.v_mat;
        (&d - &ComplexMatrix::diag(&self.big_q)).norm_fro() / self.x.norm_fro().max(f64::MIN_POSITIVE)
    }

    /// `Q_dot_i = v_hat_i w_hat_i`.
    pub fn big_q_dot(&self) -> ComplexVector {
        (0..self.n()).map(|i| self.vhat[i] * self.what[i]).collect()
    }

    /// Rescales the rows of `U` so that `w_hat = (1, ..., 1)`; `Q` is
    /// unchanged.
    pub fn normalize_w_gauge(&self) -> Result<FlowState> {
        let peak = self.what.norm_max();
        if self.what.iter().any(|z| z.norm() <= 1e-12 * peak) {
            return Err(Error::precondition("w_hat has a (numerically) zero component"));
        }
        let d = ComplexMatrix::diag(&self.what);
        let d_inv = ComplexMatrix::diag(&self.what.iter().map(|z| z.inv()).collect::<Vec<_>>());
        Ok(FlowState {
            u: &d * &self.u,
            v_mat: &self.v_mat * &d_inv,
            yhat: &(&d * &self.yhat) * &d_inv,
            zhat: &(&d * &self.zhat) * &d_inv,
            vhat: d.mul_vec(&self.vhat),
            what: self.what.iter().map(|_| C64::new(1.0, 0.0)).collect(),
            ..self.clone()
        })
    }
}

/// `q_dot_i = (Z_hat - Y_hat)_ii`.
pub fn qdot(s: &FlowState) -> ComplexVector {
    (0..s.n()).map(|i| s.zhat[(i, i)] - s.yhat[(i, i)]).collect()
}

/// `M_ij = v_hat_i w_hat_j / (Q_i - Q_j)` off the diagonal, zero on it.
pub fn m_offdiag(s: &FlowState) -> Result<ComplexMatrix> {
    check_collision(&s.big_q)?;
    let q = &s.big_q;
    Ok(ComplexMatrix::from_fn(s.n(), |i, j| {
        if i == j {
            C64::new(0.0, 0.0)
        } else {
            s.vhat[i] * s.what[j] / (q[i] - q[j])
        }
    }))
}

/// `q_ddot` as `([M, Z_hat - Y_hat])_ii` and as the explicit sum
///
/// ```text
/// sum_{k != i} [Q_dot_i Q_dot_k (Q_i + Q_k)
///     + (Q_i - Q_k)(Q_k v_hat_i w_hat_k Z_hat_ki - Q_i v_hat_k w_hat_i Z_hat_ik)]
///     / (Q_i Q_k (Q_i - Q_k))
/// ```
pub fn acceleration_forms(s: &FlowState) -> Result<(ComplexVector, ComplexVector)> {
    let m = m_offdiag(s)?;
    let diff = &s.zhat - &s.yhat;
    let comm = m.commutator(&diff).diagonal();
    let q = &s.big_q;
    let qd = s.big_q_dot();
    let explicit = (0..s.n())
        .map(|i| {
            (0..s.n())
                .filter(|&k| k != i)
                .map(|k| {
                    let num = qd[i] * qd[k] * (q[i] + q[k])
                        + (q[i] - q[k])
                            * (q[k] * s.vhat[i] * s.what[k] * s.zhat[(k, i)]
                                - q[i] * s.vhat[k] * s.what[i] * s.zhat[(i, k)]);
                    num / (q[i] * q[k] * (q[i] - q[k]))
                })
                .sum()
        })
        .collect();
    Ok((comm, explicit))
}

/// Agreement required between the two acceleration forms.
pub const ACCELERATION_AGREEMENT: f64 = 1e-8;

/// `q_ddot` from the explicit sum, after checking it against the commutator
/// form.
pub fn general_acceleration(s: &FlowState) -> Result<ComplexVector> {
    let (comm, explicit) = acceleration_forms(s)?;
    let scale = comm.norm_max().max(explicit.norm_max()).max(1.0);
    let gap = comm
        .iter()
        .zip(explicit.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if gap > ACCELERATION_AGREEMENT * scale {
        return Err(Error::precondition(format!("acceleration forms disagree by {gap:.3e}")));
    }
    Ok(explicit)
}

/// `q_ddot_i = (lambda - 1)^2 Q_dot_i sum_{k != i} Q_dot_k (Q_i + Q_k)
///   / ((Q_i - Q_k)(lambda Q_i - Q_k)(lambda Q_k - Q_i))`.
pub fn rs_rhs(q: &[C64], qdot: &[C64], lambda: C64) -> Result<ComplexVector> {
    if q.len() != qdot.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: qdot.len(),
        });
    }
    let n = q.len();
    let peak = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pre = (lambda - 1.0) * (lambda - 1.0);
    let mut out = ComplexVector::zeros(n);
    for i in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..n).filter(|&k| k != i) {
            let den = (q[i] - q[k]) * (lambda * q[i] - q[k]) * (lambda * q[k] - q[i]);
            if den.norm() <= (COLLISION_REL * peak).powi(3) {
                return Err(Error::Collision {
                    separation: den.norm().cbrt(),
                });
            }
            acc += qdot[k] * (q[i] + q[k]) / den;
        }
        out[i] = pre * qdot[i] * acc;
    }
    Ok(out)
}

/// Central differences of `q = ln Q` at `t` with step `h`, eigenvalues at
/// `t +- h` matched to those at `t`: returns `(q_dot, q_ddot)`.
pub fn fd_log_derivatives(m0: &Triple, t: f64, h: f64) -> Result<(ComplexVector, ComplexVector)> {
    let (v, w) = rank_one_factors(m0)?;
    let at = |s: f64| -> Result<Vec<C64>> {
        let (x, _, _) = transported(m0, &v, &w, s)?;
        Ok(eig(&x)?.values.into_inner())
    };
    let base = at(t)?;
    let plus = track::match_to(&base, &at(t + h)?);
    let minus = track::match_to(&base, &at(t - h)?);
    let first = (0..base.len())
        .map(|i| ((plus[i] / base[i]).ln() - (minus[i] / base[i]).ln()) / (2.0 * h))
        .collect();
    let second = (0..base.len())
        .map(|i| ((plus[i] / base[i]).ln() + (minus[i] / base[i]).ln()) / (h * h))
        .collect();
    Ok((first, second))
}

/// Triple with `Y = diag(mu)`, `Z = lambda Y + gamma I` and
/// `X_ij = v_i w_j / (lambda mu_j + gamma - mu_i)`, so `XZ - YX = v w^T`.
pub fn rs_triple(mu: &[C64], v: &[C64], w: &[C64], lambda: C64, gamma: C64) -> Result<Triple> {
    let n = mu.len();
    if v.len() != n || w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if v.len() != n { v.len() } else { w.len() },
        });
    }
    let zdiag: Vec<C64> = mu.iter().map(|&m| lambda * m + gamma).collect();
    for i in 0..n {
        for j in 0..n {
            if (zdiag[j] - mu[i]).norm() < 1e-9 {
                return Err(Error::precondition(format!(
                    "lambda mu_{j} + gamma coincides with mu_{i}"
                )));
            }
        }
    }
    let x = ComplexMatrix::from_fn(n, |i, j| v[i] * w[j] / (zdiag[j] - mu[i]));
    Triple::new(x, ComplexMatrix::diag(mu), ComplexMatrix::diag(&zdiag))
}

#[cfg(test)]
mod tests;
