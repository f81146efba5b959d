//! End-to-end use of the public API: generate, serialize, verify, extend.

use aim_core::io::{parse_triple, triple_to_json, VerificationReport};
use aim_core::matrix_kernel::{ComplexMatrix, C64};
use aim_core::registry::{Check, CheckConfig, Registry};
use aim_core::rng::SeededRng;
use aim_core::tau_engine::{tau, tau_hat, TimeVector};
use aim_core::triples::Triple;
use aim_core::Result;

#[test]
fn every_generator_feeds_every_identity_check() {
    let reg = Registry::standard();
    let cfg = CheckConfig {
        seed: 4,
        samples: 3,
        ..CheckConfig::default()
    };
    for gen in ["soliton", "rank-one", "kdv", "rs"] {
        let mut rng = SeededRng::new(17);
        let m = reg.generator(gen).unwrap().generate(3, &mut rng).unwrap();
        let back = parse_triple(&triple_to_json(&m)).unwrap();
        assert_eq!(back, m, "{gen}");
        for check in ["hirota", "hpoly", "japanese-formula", "polynomiality", "symmetry"] {
            let report = reg.check(check).unwrap().run(&back, &cfg).unwrap();
            assert!(report.pass, "{gen}/{check}: {}", report.summary());
        }
    }
}

#[test]
fn full_rank_triples_fail_the_identities() {
    let reg = Registry::standard();
    let m = reg
        .generator("full-rank")
        .unwrap()
        .generate(3, &mut SeededRng::new(2))
        .unwrap();
    assert_eq!(m.kappa(), 3);
    let cfg = CheckConfig::default();
    for check in ["hirota", "hpoly"] {
        assert!(!reg.check(check).unwrap().run(&m, &cfg).unwrap().pass, "{check}");
    }
}

/// A user-defined check: tau at the origin equals det(X + I).
struct OriginCheck;

impl Check for OriginCheck {
    fn name(&self) -> &'static str {
        "origin"
    }

    fn description(&self) -> &'static str {
        "tau(0) = det(X + I)"
    }

    fn default_tolerance(&self) -> f64 {
        1e-12
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let expected = aim_core::matrix_kernel::det(&(m.x() + &ComplexMatrix::identity(m.n())));
        let got = tau(m, &TimeVector::zero())?;
        report.record("t = 0", (got - expected).norm() / expected.norm().max(1.0));
        Ok(report)
    }
}

#[test]
fn registry_accepts_new_checks() {
    let mut reg = Registry::standard();
    reg.register_check(Box::new(OriginCheck));
    assert!(reg.check_names().contains(&"origin"));
    let m = reg
        .generator("soliton")
        .unwrap()
        .generate(4, &mut SeededRng::new(1))
        .unwrap();
    let report = reg.check("origin").unwrap().run(&m, &CheckConfig::default()).unwrap();
    assert!(report.pass, "{}", report.summary());
}

#[test]
fn gauge_relation_on_generated_triple() {
    let reg = Registry::standard();
    let m = reg
        .generator("rank-one")
        .unwrap()
        .generate(4, &mut SeededRng::new(8))
        .unwrap();
    let t = TimeVector::xyt(0.3, -0.2, 0.1).with(5, C64::new(0.0, 0.05)).unwrap();
    let tr: C64 = (1..=5).map(|k| t.get(k) * m.y().powi(k as u32).trace()).sum();
    let lhs = tau(&m, &t).unwrap();
    let rhs = tau_hat(&m, &t).unwrap() * tr.exp();
    assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
}
