use crate::eigenflow::rs_triple;
use crate::error::{Error, Result};
use crate::matrix_kernel::{solve, ComplexMatrix, C64, INVERTIBLE_COND_MAX};
use crate::rng::SeededRng;
use crate::triples::{rational_example, soliton_triple, SpectralSolitonData, Triple};

use super::TripleGenerator;

const MIN_SEPARATION: f64 = 0.2;
const MAX_REDRAWS: usize = 10_000;

fn separated(points: &[C64], min: f64) -> bool {
    (0..points.len()).all(|i| (i + 1..points.len()).all(|j| (points[i] - points[j]).norm() >= min))
}

/// Random soliton data: `lambda`, `mu` in the box of radius 1 with all
/// `2n` points at least 0.2 apart, `alpha` in the unit box, `|beta|` in
/// `[0.5, 1.5]`.
pub fn random_soliton_data(n: usize, rng: &mut SeededRng) -> Result<SpectralSolitonData> {
    for _ in 0..MAX_REDRAWS {
        let alpha = rng.vector(n, 1.0);
        let beta: Vec<C64> = (0..n).map(|_| rng.annulus(0.5, 1.5)).collect();
        let lambda = rng.vector(n, 1.0);
        let mu = rng.vector(n, 1.0);
        let all: Vec<C64> = lambda.iter().chain(&mu).copied().collect();
        if separated(&all, MIN_SEPARATION) && alpha.iter().all(|a| a.norm() > 0.1) {
            return SpectralSolitonData::new(alpha, beta, lambda, mu);
        }
    }
    Err(Error::precondition(format!(
        "could not draw separated soliton data for n = {n}"
    )))
}

/// Soliton data with `mu = -lambda`, so `Y = -Z` and `Y^2 = Z^2`.
pub fn kdv_soliton_data(n: usize, rng: &mut SeededRng) -> Result<SpectralSolitonData> {
    for _ in 0..MAX_REDRAWS {
        let alpha = rng.vector(n, 1.0);
        let lambda = rng.vector(n, 1.0);
        let mu: Vec<C64> = lambda.iter().map(|l| -l).collect();
        let all: Vec<C64> = lambda.iter().chain(&mu).copied().collect();
        if separated(&all, MIN_SEPARATION) && alpha.iter().all(|a| a.norm() > 0.1) {
            return SpectralSolitonData::new(alpha, vec![C64::new(1.0, 0.0); n], lambda, mu);
        }
    }
    Err(Error::precondition(format!(
        "could not draw separated KdV data for n = {n}"
    )))
}

/// Solves `X Z - Y X = C` through the `n^2 x n^2` Kronecker system
/// `(Z^T (x) I - I (x) Y) vec(X) = vec(C)`.
pub fn sylvester_solve(y: &ComplexMatrix, z: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    y.check_same_dim(z)?;
    y.check_same_dim(rhs)?;
    let n = y.n();
    let idx = |i: usize, j: usize| i + j * n;
    let mut k = ComplexMatrix::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                k[(idx(i, j), idx(i, l))] += z[(l, j)];
                k[(idx(i, j), idx(l, j))] -= y[(i, l)];
            }
        }
    }
    let b: Vec<C64> = (0..n * n).map(|p| rhs[(p % n, p / n)]).collect();
    let cond = k.cond_1();
    if cond >= INVERTIBLE_COND_MAX {
        return Err(Error::IllConditioned { cond });
    }
    let sol = solve(&k, &b)?;
    Ok(ComplexMatrix::from_fn(n, |i, j| sol[idx(i, j)]))
}

fn scale_for(n: usize) -> f64 {
    1.0 / (n.max(1) as f64).sqrt()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::precondition("n must be at least 1"));
    }
    Ok(())
}

pub struct SolitonGenerator;

impl TripleGenerator for SolitonGenerator {
    fn name(&self) -> &'static str {
        "soliton"
    }

    fn description(&self) -> &'static str {
        "kappa = 1 soliton triple from random separated spectral data"
    }

    fn generate(&self, n: usize, rng: &mut SeededRng) -> Result<Triple> {
        check_n(n)?;
        soliton_triple(&random_soliton_data(n, rng)?)
    }
}

pub struct RankOneGenerator;

impl TripleGenerator for RankOneGenerator {
    fn name(&self) -> &'static str {
        "rank-one"
    }

    fn description(&self) -> &'static str {
        "kappa = 1 triple with random Y, Z and X solving XZ - YX = v w^T"
    }

    fn generate(&self, n: usize, rng: &mut SeededRng) -> Result<Triple> {
        check_n(n)?;
        let s = scale_for(n);
        for _ in 0..100 {
            let y = rng.matrix(n, s);
            let z = rng.matrix(n, s);
            let v = rng.vector(n, 1.0);
            let w = rng.vector(n, 1.0);
            let Ok(x) = sylvester_solve(&y, &z, &ComplexMatrix::outer(&v, &w)) else {
                continue;
            };
            let x = x.scale(C64::new(1.0 / x.norm_fro().max(1e-300) * (n as f64).sqrt(), 0.0));
            let m = Triple::new(x, y, z)?;
            if m.kappa() == 1 {
                return Ok(m);
            }
        }
        Err(Error::precondition("could not draw a rank-one triple"))
    }
}

pub struct FullRankGenerator;

impl TripleGenerator for FullRankGenerator {
    fn name(&self) -> &'static str {
        "full-rank"
    }

    fn description(&self) -> &'static str {
        "kappa = n triple of independent random matrices (negative control)"
    }

    fn generate(&self, n: usize, rng: &mut SeededRng) -> Result<Triple> {
        check_n(n)?;
        let s = scale_for(n);
        loop {
            let m = Triple::new(rng.matrix(n, s), rng.matrix(n, s), rng.matrix(n, s))?;
            if m.kappa() == n {
                return Ok(m);
            }
        }
    }
}

pub struct KdvGenerator;

impl TripleGenerator for KdvGenerator {
    fn name(&self) -> &'static str {
        "kdv"
    }

    fn description(&self) -> &'static str {
        "soliton triple with Y = -Z (2-KdV reduction)"
    }

    fn generate(&self, n: usize, rng: &mut SeededRng) -> Result<Triple> {
        check_n(n)?;
        soliton_triple(&kdv_soliton_data(n, rng)?)
    }
}

pub struct RsGenerator;

impl TripleGenerator for RsGenerator {
    fn name(&self) -> &'static str {
        "rs"
    }

    fn description(&self) -> &'static str {
        "Y diagonal, Z = -Y, kappa = 1 (Ruijsenaars-Schneider case lambda = -1, gamma = 0)"
    }

    fn generate(&self, n: usize, rng: &mut SeededRng) -> Result<Triple> {
        check_n(n)?;
        for _ in 0..MAX_REDRAWS {
            let mu: Vec<C64> = (0..n).map(|_| rng.annulus(0.3, 1.2)).collect();
            let mut all = mu.clone();
            all.extend(mu.iter().map(|m| -m));
            if !separated(&all, MIN_SEPARATION) {
                continue;
            }
            let v: Vec<C64> = (0..n).map(|_| rng.annulus(0.5, 1.0)).collect();
            let w: Vec<C64> = (0..n).map(|_| rng.annulus(0.5, 1.0)).collect();
            let m = rs_triple(&mu, &v, &w, C64::new(-1.0, 0.0), C64::new(0.0, 0.0))?;
            if m.kappa() == 1 {
                return Ok(m);
            }
        }
        Err(Error::precondition("could not draw an RS triple"))
    }
}

pub struct RationalGenerator;

impl TripleGenerator for RationalGenerator {
    fn name(&self) -> &'static str {
        "rational"
    }

    fn description(&self) -> &'static str {
        "the fixed 3x3 rational example at lambda = 2 (n must be 3)"
    }

    fn generate(&self, n: usize, _rng: &mut SeededRng) -> Result<Triple> {
        if n != 3 {
            return Err(Error::precondition("the rational example is 3x3"));
        }
        Ok(rational_example(C64::new(2.0, 0.0)))
    }
}
