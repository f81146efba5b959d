use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_kernel::C64;

pub const DEFAULT_MAX_INDEX: usize = 16;

/// Finitely supported KP times `t_1, t_2, ...`.
///
/// Indices start at 1. Zero entries are not stored, so two vectors with the
/// same nonzero times compare equal regardless of how they were built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeVector {
    times: BTreeMap<usize, C64>,
    max_index: usize,
}

impl Default for TimeVector {
    fn default() -> Self {
        Self::zero()
    }
}

impl TimeVector {
    pub fn zero() -> Self {
        Self::with_max_index(DEFAULT_MAX_INDEX)
    }

    pub fn with_max_index(max_index: usize) -> Self {
        assert!(max_index >= 1, "max time index must be at least 1");
        Self {
            times: BTreeMap::new(),
            max_index,
        }
    }

    /// `t = (t_1, t_2, ...)` from a dense prefix.
    pub fn from_slice(values: &[C64]) -> Result<Self> {
        let mut t = Self::with_max_index(DEFAULT_MAX_INDEX.max(values.len()));
        for (i, &v) in values.iter().enumerate() {
            t.set(i + 1, v)?;
        }
        Ok(t)
    }

    /// Only the first flow: `t = (x, 0, 0, ...)`.
    pub fn first(x: C64) -> Self {
        let mut t = Self::zero();
        t.set(1, x).expect("index 1 is always valid");
        t
    }

    /// `(x, y, t, 0, ...)`, the three KP equation variables.
    pub fn xyt(x: f64, y: f64, t: f64) -> Self {
        let mut tv = Self::zero();
        for (i, v) in [(1, x), (2, y), (3, t)] {
            tv.set(i, C64::new(v, 0.0)).expect("indices 1..=3 are valid");
        }
        tv
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn set(&mut self, index: usize, value: C64) -> Result<()> {
        if index == 0 || index > self.max_index {
            return Err(Error::InvalidTime(format!(
                "index {index} outside 1..={}",
                self.max_index
            )));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::InvalidTime(format!("t_{index} is not finite")));
        }
        if value == C64::new(0.0, 0.0) {
            self.times.remove(&index);
        } else {
            self.times.insert(index, value);
        }
        Ok(())
    }

    pub fn with(mut self, index: usize, value: C64) -> Result<Self> {
        self.set(index, value)?;
        Ok(self)
    }

    pub fn get(&self, index: usize) -> C64 {
        self.times.get(&index).copied().unwrap_or_default()
    }

    /// Nonzero entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.times.iter().map(|(&i, &v)| (i, v))
    }

    pub fn is_zero(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest index with a nonzero time, 0 for the zero vector.
    pub fn support_max(&self) -> usize {
        self.times.keys().next_back().copied().unwrap_or(0)
    }

    /// `t - [1/a]` truncated after `order` terms, where
    /// `[1/a] = (1/a, 1/(2a^2), 1/(3a^3), ...)`.
    ///
    /// Only used to cross-check the exact shift formulas.
    pub fn minus_miwa_truncated(&self, a: C64, order: usize) -> Result<Self> {
        if a == C64::new(0.0, 0.0) {
            return Err(Error::precondition("Miwa shift point must be nonzero"));
        }
        let mut out = self.clone();
        out.max_index = out.max_index.max(order);
        let inv = a.inv();
        let mut pow = C64::new(1.0, 0.0);
        for k in 1..=order {
            pow *= inv;
            let v = out.get(k) - pow / k as f64;
            out.set(k, v)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_entries_are_not_stored() {
        let t = TimeVector::zero().with(3, C64::new(0.0, 0.0)).unwrap();
        assert!(t.is_zero());
        assert_eq!(t.support_max(), 0);
    }

    #[test]
    fn index_bounds() {
        let mut t = TimeVector::zero();
        assert!(t.set(0, C64::new(1.0, 0.0)).is_err());
        assert!(t.set(17, C64::new(1.0, 0.0)).is_err());
        assert!(t.set(16, C64::new(1.0, 0.0)).is_ok());
        assert!(t.set(2, C64::new(f64::INFINITY, 0.0)).is_err());
    }

    #[test]
    fn truncated_miwa_vector() {
        let t = TimeVector::zero().minus_miwa_truncated(C64::new(2.0, 0.0), 3).unwrap();
        assert_eq!(t.get(1), C64::new(-0.5, 0.0));
        assert_eq!(t.get(2), C64::new(-0.125, 0.0));
        assert!((t.get(3) - C64::new(-1.0 / 24.0, 0.0)).norm() < 1e-17);
    }
}
