use crate::error::{Error, Result};
use crate::matrix_kernel::C64;
use crate::time::TimeVector;
use crate::triples::SpectralSolitonData;

use super::g_scalar;

const MAX_SUBSET_N: usize = 20;

/// Gauge-normalized soliton tau as a sum over subsets `J` of `{1..n}`:
///
/// `sum_J prod_{i in J} c_i e^{g(lambda_i) - g(mu_i)}
///   prod_{i < i' in J} (lambda_i - lambda_i')(mu_i - mu_i')
///                      / ((lambda_i - mu_i')(mu_i - lambda_i'))`
///
/// with `c_i = alpha_i / (beta_i (lambda_i - mu_i))`. It equals `tau_hat` of
/// the soliton triple and is computed without any determinant.
pub fn soliton_sum_tau(data: &SpectralSolitonData, t: &TimeVector) -> Result<C64> {
    data.validate()?;
    let n = data.n();
    if n > MAX_SUBSET_N {
        return Err(Error::precondition(format!(
            "subset expansion limited to n <= {MAX_SUBSET_N}, got {n}"
        )));
    }
    let (lam, mu) = (&data.lambda, &data.mu);
    let weight: Vec<C64> = data
        .soliton_weights()
        .into_iter()
        .enumerate()
        .map(|(i, c)| c * (g_scalar(lam[i], t) - g_scalar(mu[i], t)).exp())
        .collect();
    let mut pair = vec![vec![C64::new(1.0, 0.0); n]; n];
    for i in 0..n {
        for k in i + 1..n {
            pair[i][k] = (lam[i] - lam[k]) * (mu[i] - mu[k]) / ((lam[i] - mu[k]) * (mu[i] - lam[k]));
        }
    }
    let mut total = C64::new(0.0, 0.0);
    for mask in 0u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut term: C64 = members.iter().map(|&i| weight[i]).product();
        for (p, &i) in members.iter().enumerate() {
            for &k in &members[p + 1..] {
                term *= pair[i][k];
            }
        }
        total += term;
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::NonFinite("soliton subset sum"));
    }
    Ok(total)
}
