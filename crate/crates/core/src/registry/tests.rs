use super::*;
use crate::matrix_kernel::c;
use crate::triples::rational_example;

fn cfg(seed: u64) -> CheckConfig {
    CheckConfig {
        seed,
        samples: 5,
        ..CheckConfig::default()
    }
}

#[test]
fn standard_registry_names() {
    let r = Registry::standard();
    assert_eq!(
        r.check_names(),
        vec![
            "hirota",
            "hpoly",
            "hpoly-2x2",
            "japanese-formula",
            "kdv",
            "kp",
            "polynomiality",
            "symmetry"
        ]
    );
    assert_eq!(
        r.generator_names(),
        vec!["full-rank", "kdv", "rank-one", "rational", "rs", "soliton"]
    );
    assert!(r.check("nope").is_none());
}

#[test]
fn generators_produce_requested_rank() {
    let r = Registry::standard();
    let mut rng = SeededRng::new(40);
    for n in 1..=5 {
        for name in ["soliton", "rank-one", "kdv", "rs"] {
            let m = r.generator(name).unwrap().generate(n, &mut rng).unwrap();
            assert_eq!(m.n(), n);
            assert!(m.kappa() <= 1, "{name} n={n}");
        }
        let m = r.generator("full-rank").unwrap().generate(n, &mut rng).unwrap();
        assert_eq!(m.kappa(), n);
    }
    assert!(r.generator("rational").unwrap().generate(2, &mut rng).is_err());
}

#[test]
fn sylvester_solution() {
    let mut rng = SeededRng::new(41);
    let (y, z, rhs) = (rng.matrix(4, 0.5), rng.matrix(4, 0.5), rng.matrix(4, 1.0));
    let x = sylvester_solve(&y, &z, &rhs).unwrap();
    assert!((&(&(&x * &z) - &(&y * &x)) - &rhs).norm_fro() < 1e-10);
}

#[test]
fn checks_pass_on_rank_one_and_fail_on_full_rank() {
    let r = Registry::standard();
    let mut rng = SeededRng::new(42);
    let good = r.generator("rank-one").unwrap().generate(3, &mut rng).unwrap();
    let bad = r.generator("full-rank").unwrap().generate(3, &mut rng).unwrap();
    for name in ["hirota", "hpoly"] {
        let check = r.check(name).unwrap();
        assert!(check.run(&good, &cfg(1)).unwrap().pass, "{name}");
        assert!(!check.run(&bad, &cfg(1)).unwrap().pass, "{name}");
    }
    for name in ["japanese-formula", "symmetry", "polynomiality"] {
        assert!(r.check(name).unwrap().run(&good, &cfg(1)).unwrap().pass, "{name}");
    }
}

#[test]
fn kdv_check_selects_reduction() {
    let r = Registry::standard();
    let mut rng = SeededRng::new(43);
    let kdv = r.generator("kdv").unwrap().generate(3, &mut rng).unwrap();
    let sol = r.generator("soliton").unwrap().generate(3, &mut rng).unwrap();
    let check = r.check("kdv").unwrap();
    assert!(check.run(&kdv, &cfg(2)).unwrap().pass);
    assert!(!check.run(&sol, &cfg(2)).unwrap().pass);
}

#[test]
fn rational_example_passes_hirota() {
    let r = Registry::standard();
    let report = r
        .check("hirota")
        .unwrap()
        .run(&rational_example(c(2.0, 0.0)), &cfg(3))
        .unwrap();
    assert!(report.pass, "{}", report.summary());
}

#[test]
fn reports_are_deterministic() {
    let r = Registry::standard();
    let m = rational_example(c(2.0, 0.0));
    let a = r.check("symmetry").unwrap().run(&m, &cfg(9)).unwrap().to_json();
    let b = r.check("symmetry").unwrap().run(&m, &cfg(9)).unwrap().to_json();
    assert_eq!(a, b);
}
