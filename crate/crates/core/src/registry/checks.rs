use crate::baker::{check_polynomiality, default_nodes, psi, psi_from_tau};
use crate::error::{Error, Result};
use crate::io::VerificationReport;
use crate::matrix_kernel::{det, rel_diff, ComplexMatrix, C64};
use crate::rng::SeededRng;
use crate::tau_engine::{
    g_eval, h_poly, h_poly_2x2_closed_form, hirota_samples, kdv_factorization_check, kp_residual, tau, tau_hat,
    TimeVector,
};
use crate::triples::Triple;

use super::{Check, CheckConfig};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn fmt_c(z: C64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

/// Each check draws from its own stream so adding samples to one check does
/// not shift the others.
fn rng_for(cfg: &CheckConfig, stream: u64) -> SeededRng {
    SeededRng::with_stream(cfg.seed, stream)
}

pub struct HirotaCheck;

impl Check for HirotaCheck {
    fn name(&self) -> &'static str {
        "hirota"
    }

    fn description(&self) -> &'static str {
        "three-term Hirota identity in exact Miwa form at seeded (a, b, c, t)"
    }

    fn default_tolerance(&self) -> f64 {
        1e-9
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let mut rng = rng_for(cfg, 1);
        for (k, s) in hirota_samples(m, &mut rng, cfg.samples)?.iter().enumerate() {
            report.record(
                format!("sample {k}: a={} b={} c={}", fmt_c(s.a), fmt_c(s.b), fmt_c(s.c)),
                s.relative(),
            );
        }
        Ok(report)
    }
}

/// Four seeded nodes with `|.|` in `[0.5, 4]`.
fn grid_nodes(rng: &mut SeededRng) -> Vec<C64> {
    (0..4).map(|_| rng.annulus(0.5, 4.0)).collect()
}

pub struct HPolyCheck;

impl Check for HPolyCheck {
    fn name(&self) -> &'static str {
        "hpoly"
    }

    fn description(&self) -> &'static str {
        "H(a, b, c) with X_hat = X on a seeded 4x4x4 grid, relative to its largest term"
    }

    fn default_tolerance(&self) -> f64 {
        1e-9
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let nodes = grid_nodes(&mut rng_for(cfg, 2));
        for (i, &a) in nodes.iter().enumerate() {
            for (j, &b) in nodes.iter().enumerate() {
                for (k, &cc) in nodes.iter().enumerate() {
                    let h = h_poly(m.x(), m.y(), m.z(), a, b, cc)?;
                    report.record(format!("grid ({i},{j},{k})"), h.relative());
                }
            }
        }
        Ok(report)
    }
}

pub struct HPoly2x2Check;

impl Check for HPoly2x2Check {
    fn name(&self) -> &'static str {
        "hpoly-2x2"
    }

    fn description(&self) -> &'static str {
        "H(a, b, c) against the 2x2 closed form (a-b)(b-c)(a-c) det[(XZ - YX)(Y - Z)]"
    }

    fn default_tolerance(&self) -> f64 {
        1e-10
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let mut rng = rng_for(cfg, 3);
        for k in 0..cfg.samples {
            let (a, b, cc) = (rng.annulus(0.5, 4.0), rng.annulus(0.5, 4.0), rng.annulus(0.5, 4.0));
            let h = h_poly(m.x(), m.y(), m.z(), a, b, cc)?;
            let closed = h_poly_2x2_closed_form(m.x(), m.y(), m.z(), a, b, cc)?;
            let scale = h.scale.max(closed.norm());
            let res = if scale == 0.0 {
                0.0
            } else {
                (h.value - closed).norm() / scale
            };
            report.record(format!("sample {k}"), res);
        }
        Ok(report)
    }
}

pub struct PolynomialityCheck;

impl Check for PolynomialityCheck {
    fn name(&self) -> &'static str {
        "polynomiality"
    }

    fn description(&self) -> &'static str {
        "z^n e^{-xz} psi(x, z) interpolated in z, holdout deviation at seeded x"
    }

    fn default_tolerance(&self) -> f64 {
        1e-8
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let mut rng = rng_for(cfg, 4);
        let nodes = default_nodes(m);
        for _ in 0..cfg.samples {
            let x = rng.range(-2.0, 2.0);
            match check_polynomiality(m, x, &nodes) {
                Ok(dev) => report.record(format!("x={x:.6}"), dev),
                Err(e @ Error::SingularTau { .. }) => report.record_error(format!("x={x:.6}"), &e),
                Err(e) => return Err(e),
            }
        }
        Ok(report)
    }
}

pub struct JapaneseFormulaCheck;

impl Check for JapaneseFormulaCheck {
    fn name(&self) -> &'static str {
        "japanese-formula"
    }

    fn description(&self) -> &'static str {
        "psi(x, z) against tau(t - [1/z]) e^{xz} / tau(t) at seeded (x, z)"
    }

    fn default_tolerance(&self) -> f64 {
        1e-9
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let mut rng = rng_for(cfg, 5);
        for _ in 0..cfg.samples {
            let x = rng.range(-2.0, 2.0);
            let z = rng.annulus(0.5, 3.0);
            let label = format!("x={x:.6} z={}", fmt_c(z));
            match psi(m, x, z).and_then(|p| Ok((p.psi, psi_from_tau(m, x, z)?))) {
                Ok((a, b)) => report.record(label, rel_diff(a, b)),
                Err(e @ Error::SingularTau { .. }) => report.record_error(label, &e),
                Err(e) => return Err(e),
            }
        }
        Ok(report)
    }
}

pub struct KdvCheck;

impl Check for KdvCheck {
    fn name(&self) -> &'static str {
        "kdv"
    }

    fn description(&self) -> &'static str {
        "tau(t_1, t_N) = tau(t_1, 0) det(exp(t_N Z^N)) at seeded times"
    }

    fn default_tolerance(&self) -> f64 {
        1e-9
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let mut rng = rng_for(cfg, 6);
        let j = cfg.n_power as usize;
        for _ in 0..cfg.samples {
            let x = rng.disk(1.0);
            let tj = rng.disk(1.0);
            let t = TimeVector::with_max_index(j.max(1)).with(1, x)?.with(j, tj)?;
            let dev = kdv_factorization_check(m, cfg.n_power, &t)?;
            report.record(format!("t_1={} t_{j}={}", fmt_c(x), fmt_c(tj)), dev);
        }
        Ok(report)
    }
}

pub struct KpCheck;

impl Check for KpCheck {
    fn name(&self) -> &'static str {
        "kp"
    }

    fn description(&self) -> &'static str {
        "finite-difference KP residual of u = factor (log tau)_xx at seeded (x, y, t)"
    }

    fn default_tolerance(&self) -> f64 {
        1e-4
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let mut rng = rng_for(cfg, 7);
        for _ in 0..cfg.samples {
            let (x, y, t) = (rng.range(-2.0, 2.0), rng.range(-1.0, 1.0), rng.range(-0.5, 0.5));
            let label = format!("(x,y,t)=({x:.6},{y:.6},{t:.6})");
            match kp_residual(m, x, y, t, cfg.factor) {
                Ok(r) => report.record(label, r.relative()),
                Err(e @ Error::SingularTau { .. }) => report.record_error(label, &e),
                Err(e) => return Err(e),
            }
        }
        Ok(report)
    }
}

pub struct SymmetryCheck;

impl SymmetryCheck {
    fn kappa_kept(report: &mut VerificationReport, label: &str, before: usize, after: Result<Triple>) {
        match after {
            Ok(t) => report.record(label, if t.kappa() == before { 0.0 } else { 1.0 }),
            Err(e) => report.record_error(label, &e),
        }
    }
}

impl Check for SymmetryCheck {
    fn name(&self) -> &'static str {
        "symmetry"
    }

    fn description(&self) -> &'static str {
        "tau under conjugation, gauge and (X^{-1}, Z, Y); kappa under group actions and flow"
    }

    fn default_tolerance(&self) -> f64 {
        1e-9
    }

    fn run(&self, m: &Triple, cfg: &CheckConfig) -> Result<VerificationReport> {
        let mut report = VerificationReport::new(self.name(), self.tolerance(cfg));
        let mut rng = rng_for(cfg, 8);
        let n = m.n();
        let kappa = m.kappa();
        let ident = ComplexMatrix::identity(n);
        let near_identity = |rng: &mut SeededRng| &ident + &rng.matrix(n, 0.3 / (n as f64).sqrt());
        for k in 0..cfg.samples {
            let mut t = TimeVector::zero();
            for i in [1, 2, 3] {
                t.set(i, rng.disk(0.7))?;
            }
            let base = tau(m, &t)?;

            let g = near_identity(&mut rng);
            match m.conjugate(&g).and_then(|mc| tau(&mc, &t)) {
                Ok(v) => report.record(format!("{k}: conjugation tau"), rel_diff(v, base)),
                Err(e) => report.record_error(format!("{k}: conjugation tau"), &e),
            }

            let gauge = tau_hat(m, &t)? * g_eval(m.y(), &t).trace().exp();
            report.record(format!("{k}: gauge"), rel_diff(gauge, base));

            // The (X^{-1}, Z, Y) symmetry only exists for invertible X.
            if let Ok(x_inv) = m.x().checked_inverse() {
                match m.inverse_symmetry().and_then(|mi| tau(&mi, &t)) {
                    Ok(v) => report.record(format!("{k}: inverse tau"), rel_diff(v, det(&x_inv) * base)),
                    Err(e) => report.record_error(format!("{k}: inverse tau"), &e),
                }
            }

            let h = near_identity(&mut rng);
            Self::kappa_kept(&mut report, &format!("{k}: kappa gl"), kappa, m.gl_action(&g, &h));
            Self::kappa_kept(&mut report, &format!("{k}: kappa conjugation"), kappa, m.conjugate(&g));
            let lam = &m.y().powi(2) + &ident.scale(c(1.0, 0.0));
            let om = &m.z().powi(3) + &ident.scale(c(2.0, 0.0));
            Self::kappa_kept(
                &mut report,
                &format!("{k}: kappa lambda-omega"),
                kappa,
                m.lambda_omega_action(&lam, &om),
            );
            Self::kappa_kept(&mut report, &format!("{k}: kappa flow"), kappa, m.flow(&t));
        }
        if m.x().checked_inverse().is_err() {
            report.note("inverse_symmetry_skipped_singular_x", 1.0);
        }
        Ok(report)
    }
}
