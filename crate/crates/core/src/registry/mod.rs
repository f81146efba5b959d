//! Named verification checks and triple generators, looked up by string so
//! the CLI and the suite can select them at run time.

mod checks;
mod generators;

use std::collections::BTreeMap;

use crate::error::Result;
use crate::io::VerificationReport;
use crate::rng::SeededRng;
use crate::triples::Triple;

pub use checks::{
    HPoly2x2Check, HPolyCheck, HirotaCheck, JapaneseFormulaCheck, KdvCheck, KpCheck, PolynomialityCheck, SymmetryCheck,
};
pub use generators::{
    kdv_soliton_data, random_soliton_data, sylvester_solve, FullRankGenerator, KdvGenerator, RankOneGenerator,
    RationalGenerator, RsGenerator, SolitonGenerator,
};

/// Parameters shared by all checks. Each check reads the ones it needs.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    pub samples: usize,
    /// Overrides the check's default tolerance.
    pub tolerance: Option<f64>,
    /// `N` for the N-KdV factorization.
    pub n_power: u32,
    /// Normalization of `u = factor * (log tau)_xx`.
    pub factor: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 10,
            tolerance: None,
            n_power: 2,
            factor: 2.0,
        }
    }
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn default_tolerance(&self) -> f64;
    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport>;

    fn tolerance(&self, cfg: &CheckConfig) -> f64 {
        cfg.tolerance.unwrap_or_else(|| self.default_tolerance())
    }
}

pub trait TripleGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn generate(&self, n: usize, rng: &mut SeededRng) -> Result<Triple>;
}

pub struct Registry {
    checks: BTreeMap<&'static str, Box<dyn Check>>,
    generators: BTreeMap<&'static str, Box<dyn TripleGenerator>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            checks: BTreeMap::new(),
            generators: BTreeMap::new(),
        }
    }

    /// All built-in checks and generators.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register_check(Box::new(HirotaCheck));
        r.register_check(Box::new(HPolyCheck));
        r.register_check(Box::new(HPoly2x2Check));
        r.register_check(Box::new(PolynomialityCheck));
        r.register_check(Box::new(JapaneseFormulaCheck));
        r.register_check(Box::new(KdvCheck));
        r.register_check(Box::new(KpCheck));
        r.register_check(Box::new(SymmetryCheck));
        r.register_generator(Box::new(SolitonGenerator));
        r.register_generator(Box::new(RankOneGenerator));
        r.register_generator(Box::new(FullRankGenerator));
        r.register_generator(Box::new(KdvGenerator));
        r.register_generator(Box::new(RsGenerator));
        r.register_generator(Box::new(RationalGenerator));
        r
    }

    /// Replaces any check of the same name.
    pub fn register_check(&mut self, check: Box<dyn Check>) {
        self.checks.insert(check.name(), check);
    }

    pub fn register_generator(&mut self, generator: Box<dyn TripleGenerator>) {
        self.generators.insert(generator.name(), generator);
    }

    pub fn check(&self, name: &str) -> Option<&dyn Check> {
        self.checks.get(name).map(|c| c.as_ref())
    }

    pub fn generator(&self, name: &str) -> Option<&dyn TripleGenerator> {
        self.generators.get(name).map(|g| g.as_ref())
    }

    pub fn check_names(&self) -> Vec<&'static str> {
        self.checks.keys().copied().collect()
    }

    pub fn generator_names(&self) -> Vec<&'static str> {
        self.generators.keys().copied().collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests;
