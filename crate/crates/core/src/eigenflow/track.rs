use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix_kernel::{eig, ComplexVector, C64};
use crate::triples::Triple;

use super::{min_separation, rank_one_factors, rs_rhs, transported, COLLISION_REL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectorySource {
    Direct,
    Ode,
}

/// Where a trajectory was cut short.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionFlag {
    pub time: f64,
    pub separation: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    #[serde(rename = "Q_series")]
    pub big_q: Vec<ComplexVector>,
    /// `ln Q` on a branch continuous in time.
    pub q: Vec<ComplexVector>,
    pub source: TrajectorySource,
    pub collision: Option<CollisionFlag>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |Q_i(t) - Q'_i(t)|` over common grid points.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.big_q
            .iter()
            .zip(&other.big_q)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// Largest and median step-to-step displacement `max_i |Q_i(t_k+1) - Q_i(t_k)|`.
    pub fn displacement_stats(&self) -> (f64, f64) {
        let mut steps: Vec<f64> = self
            .big_q
            .windows(2)
            .map(|w| {
                w[0].iter()
                    .zip(w[1].iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        if steps.is_empty() {
            return (0.0, 0.0);
        }
        steps.sort_by(f64::total_cmp);
        (steps[steps.len() - 1], steps[steps.len() / 2])
    }
}

/// Minimal-cost perfect matching (Hungarian algorithm, O(n^3)).
/// Returns `assign[row] = col`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Reorders `next` to follow `prev` with minimal total displacement.
pub(crate) fn match_to(prev: &[C64], next: &[C64]) -> Vec<C64> {
    let cost: Vec<Vec<f64>> = prev
        .iter()
        .map(|p| next.iter().map(|q| (p - q).norm()).collect())
        .collect();
    hungarian(&cost).into_iter().map(|j| next[j]).collect()
}

fn continue_log(prev_q: &[C64], prev_big: &[C64], next_big: &[C64]) -> ComplexVector {
    prev_q
        .iter()
        .zip(prev_big.iter().zip(next_big))
        .map(|(q, (a, b))| q + (b / a).ln())
        .collect()
}

fn collision_in(q: &[C64]) -> Option<f64> {
    let sep = min_separation(q);
    let peak = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (sep < COLLISION_REL * peak).then_some(sep)
}

/// Eigenvalues of `X_t` on `times`, continued by minimal-displacement
/// matching. A collision or failed eigendecomposition ends the trajectory
/// with a flag.
pub fn track_eigenvalues(m0: &Triple, times: &[f64]) -> Result<Trajectory> {
    let (v, w) = rank_one_factors(m0)?;
    if times.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::precondition("time grid must be strictly increasing"));
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        big_q: Vec::new(),
        q: Vec::new(),
        source: TrajectorySource::Direct,
        collision: None,
    };
    for &t in times {
        let (x, _, _) = transported(m0, &v, &w, t)?;
        let values = match eig(&x) {
            Ok(e) => e.values.into_inner(),
            Err(Error::DegenerateSpectrum { cond }) => {
                traj.collision = Some(CollisionFlag {
                    time: t,
                    separation: 0.0,
                    reason: format!("degenerate spectrum (cond {cond:.3e})"),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        if let Some(sep) = collision_in(&values) {
            traj.collision = Some(CollisionFlag {
                time: t,
                separation: sep,
                reason: "eigenvalue collision".into(),
            });
            break;
        }
        let (big, q) = match (traj.big_q.last(), traj.q.last()) {
            (Some(pb), Some(pq)) => {
                let big = match_to(pb, &values);
                let q = continue_log(pq, pb, &big);
                (ComplexVector(big), q)
            }
            _ => {
                let q = values.iter().map(|z| z.ln()).collect();
                (ComplexVector(values), q)
            }
        };
        traj.times.push(t);
        traj.big_q.push(big);
        traj.q.push(q);
    }
    Ok(traj)
}

type Phase = (Vec<C64>, Vec<C64>);

fn rs_field(state: &Phase, lambda: C64) -> Result<Phase> {
    let (q, qd) = state;
    let big: Vec<C64> = q.iter().map(|z| z.exp()).collect();
    let big_dot: Vec<C64> = qd.iter().zip(&big).map(|(a, b)| a * b).collect();
    let acc = rs_rhs(&big, &big_dot, lambda)?;
    Ok((qd.clone(), acc.into_inner()))
}

fn axpy(base: &Phase, k: &Phase, h: f64) -> Phase {
    (
        base.0.iter().zip(&k.0).map(|(a, b)| a + b * h).collect(),
        base.1.iter().zip(&k.1).map(|(a, b)| a + b * h).collect(),
    )
}

/// Classical RK4 for `q_ddot = rs_rhs(e^q, q_dot e^q, lambda)` from
/// `(q0, qdot0)` on the grid `0, step, ..., t_end`.
pub fn integrate_rs(q0: &[C64], qdot0: &[C64], lambda: C64, t_end: f64, step: f64) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::precondition("step must be positive and t_end non-negative"));
    }
    if q0.len() != qdot0.len() {
        return Err(Error::DimensionMismatch {
            expected: q0.len(),
            found: qdot0.len(),
        });
    }
    let steps = (t_end / step).round() as usize;
    let mut state: Phase = (q0.to_vec(), qdot0.to_vec());
    let mut traj = Trajectory {
        times: vec![0.0],
        big_q: vec![q0.iter().map(|z| z.exp()).collect()],
        q: vec![ComplexVector(q0.to_vec())],
        source: TrajectorySource::Ode,
        collision: None,
    };
    if let Some(sep) = collision_in(&traj.big_q[0]) {
        return Err(Error::Collision { separation: sep });
    }
    for k in 1..=steps {
        let t = k as f64 * step;
        let stage = |s: &Phase| rs_field(s, lambda);
        let next = (|| -> Result<Phase> {
            let k1 = stage(&state)?;
            let k2 = stage(&axpy(&state, &k1, step / 2.0))?;
            let k3 = stage(&axpy(&state, &k2, step / 2.0))?;
            let k4 = stage(&axpy(&state, &k3, step))?;
            let mut out = state.clone();
            for (part, ks) in [
                (&mut out.0, [&k1.0, &k2.0, &k3.0, &k4.0]),
                (&mut out.1, [&k1.1, &k2.1, &k3.1, &k4.1]),
            ] {
                for i in 0..part.len() {
                    part[i] += (ks[0][i] + ks[1][i] * 2.0 + ks[2][i] * 2.0 + ks[3][i]) * (step / 6.0);
                }
            }
            Ok(out)
        })();
        state = match next {
            Ok(s) => s,
            Err(Error::Collision { separation }) => {
                traj.collision = Some(CollisionFlag {
                    time: t,
                    separation,
                    reason: "right-hand side denominator vanished".into(),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let big: ComplexVector = state.0.iter().map(|z| z.exp()).collect();
        if let Some(sep) = collision_in(&big) {
            traj.collision = Some(CollisionFlag {
                time: t,
                separation: sep,
                reason: "eigenvalue collision".into(),
            });
            break;
        }
        traj.times.push(t);
        traj.big_q.push(big);
        traj.q.push(ComplexVector(state.0.clone()));
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_finds_optimal_permutation() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = hungarian(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5.0);
        let mut seen = a.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn matching_restores_order() {
        let prev = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0)];
        let next = [C64::new(-1.01, 0.0), C64::new(1.02, 0.0), C64::new(0.0, 0.99)];
        let m = match_to(&prev, &next);
        assert_eq!(m, vec![next[1], next[2], next[0]]);
    }
}
