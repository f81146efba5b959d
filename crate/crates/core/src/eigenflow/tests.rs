use super::*;
use crate::matrix_kernel::c;
use crate::triples::{soliton_triple, SpectralSolitonData};

fn re(x: f64) -> C64 {
    c(x, 0.0)
}

fn rs_fixture(lambda: C64, gamma: C64) -> Triple {
    rs_triple(
        &[re(0.45), c(1.1, 0.2), c(-0.8, 0.1)],
        &[re(1.0), c(0.7, 0.3), c(0.4, -0.2)],
        &[c(0.6, 0.1), re(1.0), c(0.8, -0.4)],
        lambda,
        gamma,
    )
    .unwrap()
}

fn fd_q_derivatives(m: &Triple, t: f64, h: f64) -> (ComplexVector, ComplexVector) {
    fd_log_derivatives(m, t, h).unwrap()
}

#[test]
fn scalar_factors_and_flow() {
    let (cc, mu, l) = (c(0.7, 0.2), re(-0.3), re(0.6));
    let m = Triple::new(
        ComplexMatrix::scalar(1, cc),
        ComplexMatrix::scalar(1, mu),
        ComplexMatrix::scalar(1, l),
    )
    .unwrap();
    let (v, w) = rank_one_factors(&m).unwrap();
    assert!((v[0] - (cc * l - mu * cc)).norm() < 1e-15);
    assert_eq!(w[0], re(1.0));
    let s = flow_state(&m, 0.0).unwrap();
    assert!((s.big_q[0] - cc).norm() < 1e-15);
    assert!((s.q[0] - cc.ln()).norm() < 1e-15);
    let s = flow_state(&m, 0.8).unwrap();
    assert!((s.big_q[0] - cc * ((l - mu) * 0.8).exp()).norm() < 1e-14);
    assert!((qdot(&s)[0] - (l - mu)).norm() < 1e-14);
    assert_eq!(m_offdiag(&s).unwrap(), ComplexMatrix::zeros(1));
    assert_eq!(general_acceleration(&s).unwrap()[0], re(0.0));
}

#[test]
fn factors_of_soliton_triple() {
    let data = SpectralSolitonData::new(
        vec![re(1.0), c(0.4, 0.2)],
        vec![re(1.0), re(0.7)],
        vec![re(0.8), re(-0.2)],
        vec![re(-0.5), c(0.3, 0.6)],
    )
    .unwrap();
    let m = soliton_triple(&data).unwrap();
    let (v, w) = rank_one_factors(&m).unwrap();
    let d = m.defect();
    assert!((&ComplexMatrix::outer(&v, &w) - &d).norm_fro() < 1e-10 * d.norm_fro());
    assert!((w.norm() - 1.0).abs() < 1e-14);
}

#[test]
fn factors_need_kappa_one() {
    let d = ComplexMatrix::diag(&[re(0.3), re(0.5)]);
    let m = Triple::new(ComplexMatrix::identity(2), d.clone(), d).unwrap();
    assert!(rank_one_factors(&m).is_err());
}

#[test]
fn state_invariants() {
    let m = rs_fixture(re(-1.0), re(0.0));
    for t in [0.0, 0.3, 1.0] {
        let s = flow_state(&m, t).unwrap();
        assert!(s.linear1_residual() < 1e-8, "{}", s.linear1_residual());
        assert!(s.diagonalization_residual() < 1e-8);
        let qd = qdot(&s);
        let big_dot = s.big_q_dot();
        for i in 0..3 {
            assert!((big_dot[i] - qd[i] * s.big_q[i]).norm() < 1e-7);
        }
    }
}

#[test]
fn qdot_matches_finite_differences() {
    let m = rs_fixture(re(-1.0), re(0.0));
    let s = flow_state(&m, 0.4).unwrap();
    let (fd, _) = fd_q_derivatives(&m, 0.4, 1e-5);
    for (a, b) in qdot(&s).iter().zip(&fd) {
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn motion2_with_fd_qdot() {
    let m = rs_fixture(re(2.0), re(1.0));
    let t = 0.2;
    let s = flow_state(&m, t).unwrap();
    let (fd, _) = fd_q_derivatives(&m, t, 1e-5);
    let big_dot = ComplexMatrix::diag(&(0..3).map(|i| fd[i] * s.big_q[i]).collect::<Vec<_>>());
    let mm = m_offdiag(&s).unwrap();
    let comm = mm.commutator(&ComplexMatrix::diag(&s.big_q));
    let outer = ComplexMatrix::outer(&s.vhat, &s.what);
    let res = &(&big_dot - &comm) - &outer;
    assert!(res.norm_fro() < 1e-6 * outer.norm_fro().max(1.0), "{}", res.norm_fro());
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let lhs = (s.big_q[i] - s.big_q[j]) * mm[(i, j)];
                assert!((lhs - s.vhat[i] * s.what[j]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn acceleration_forms_agree_and_match_fd() {
    for (lambda, gamma) in [(re(-1.0), re(0.0)), (re(2.0), re(1.0))] {
        let m = rs_fixture(lambda, gamma);
        let t = 0.35;
        let s = flow_state(&m, t).unwrap();
        let (comm, explicit) = acceleration_forms(&s).unwrap();
        for (a, b) in comm.iter().zip(explicit.iter()) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
        let (_, fd) = fd_q_derivatives(&m, t, 1e-4);
        let acc = general_acceleration(&s).unwrap();
        for (a, b) in acc.iter().zip(&fd) {
            assert!((a - b).norm() < 1e-5, "{a} vs {b}");
        }
    }
}

#[test]
fn acceleration_forms_agree_for_general_triple() {
    let data = SpectralSolitonData::new(
        vec![re(1.0), c(0.4, 0.2), re(0.3)],
        vec![re(1.0), re(0.7), c(0.2, 1.0)],
        vec![re(0.8), re(-0.2), c(0.1, 0.5)],
        vec![re(-0.5), c(0.3, 0.6), re(1.3)],
    )
    .unwrap();
    let m = soliton_triple(&data).unwrap();
    let s = flow_state(&m, 0.2).unwrap();
    let (comm, explicit) = acceleration_forms(&s).unwrap();
    for (a, b) in comm.iter().zip(explicit.iter()) {
        assert!((a - b).norm() < 1e-8 * a.norm().max(1.0));
    }
}

#[test]
fn rs_rhs_matches_general_acceleration() {
    for lambda in [re(-1.0), re(2.0), c(0.5, 0.5)] {
        for gamma in [re(0.0), re(1.0), c(0.0, -2.0)] {
            let m = rs_fixture(lambda, gamma);
            let s = flow_state(&m, 0.1).unwrap();
            let acc = general_acceleration(&s).unwrap();
            let rs = rs_rhs(&s.big_q, &s.big_q_dot(), lambda).unwrap();
            for (a, b) in acc.iter().zip(rs.iter()) {
                assert!((a - b).norm() < 1e-6, "lambda={lambda} gamma={gamma}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn rs_rhs_trivial_cases() {
    let q = [re(1.0), c(0.3, 0.8), re(-2.0)];
    let qd = [re(0.2), re(-0.4), c(0.1, 0.1)];
    assert!(rs_rhs(&q, &qd, re(1.0)).unwrap().norm_max() == 0.0);
    assert_eq!(rs_rhs(&q[..1], &qd[..1], re(-1.0)).unwrap()[0], re(0.0));
    assert!(matches!(
        rs_rhs(&[re(1.0), re(1.0)], &[re(0.1), re(0.2)], re(-1.0)),
        Err(Error::Collision { .. })
    ));
}

#[test]
fn free_motion_at_lambda_one() {
    let q0 = [re(0.1), c(0.2, 1.0), re(-0.5)];
    let qd0 = [re(0.3), re(-0.2), c(0.0, 0.4)];
    let traj = integrate_rs(&q0, &qd0, re(1.0), 1.0, 0.01).unwrap();
    assert_eq!(traj.len(), 101);
    let last = &traj.q[100];
    for i in 0..3 {
        assert!((last[i] - (q0[i] + qd0[i])).norm() < 1e-12);
    }
}

#[test]
fn ode_matches_direct_tracking() {
    for (lambda, gamma) in [(re(-1.0), re(0.0)), (re(2.0), re(1.0))] {
        let m = rs_fixture(lambda, gamma);
        let s = flow_state(&m, 0.0).unwrap();
        let step = 1e-3;
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * step).collect();
        let direct = track_eigenvalues(&m, &times).unwrap();
        assert!(direct.collision.is_none());
        assert_eq!(direct.big_q[0], s.big_q);
        let ode = integrate_rs(&s.q, &qdot(&s), lambda, 1.0, step).unwrap();
        assert_eq!(ode.len(), direct.len());
        let dev = ode.max_deviation(&direct);
        assert!(dev < 1e-6, "lambda={lambda}: {dev}");
        let (max, median) = direct.displacement_stats();
        assert!(max < 10.0 * median);
    }
}

#[test]
fn w_gauge() {
    let m = rs_fixture(re(-1.0), re(0.0));
    let s = flow_state(&m, 0.5).unwrap().normalize_w_gauge().unwrap();
    assert!(s.what.iter().all(|w| (w - re(1.0)).norm() < 1e-14));
    let qd = s.big_q_dot();
    for i in 0..3 {
        assert!((s.vhat[i] - qd[i]).norm() < 1e-14);
    }
    assert!(s.linear1_residual() < 1e-8);
    assert!(s.diagonalization_residual() < 1e-8);
}

#[test]
fn rs_triple_rejects_resonance() {
    assert!(rs_triple(&[re(1.0), re(-1.0)], &[re(1.0); 2], &[re(1.0); 2], re(-1.0), re(0.0)).is_err());
}
