//! Invariant suites run at reduced scale, for a quick end-to-end self test.

use std::time::Instant;

use serde::Serialize;

use crate::activation::{ActivationKind, ActivationSpec};
use crate::bounds::{relu_alpha_lower, smooth_mu_upper};
use crate::error::{domain, Result};
use crate::experiment::{harmonic_average_error, random_feature_fit, SeparationConfig};
use crate::mathcore::special::log_beta;
use crate::mathcore::{gauss_jacobi, harmonic_dim, surface_area, weight_exponent, LegendreEvaluator};
use crate::oracle::rodrigues_legendre;
use crate::spectrum::{
    build_spectrum, eta_all, eta_arctan_hypergeometric, fourier_oracle_d2, mu_relu_alpha_analytic, trace_decay,
    FOURIER_GRID,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CheckProfile {
    /// Run dimension-dependent suites in this dimension instead of the defaults.
    pub stress_d: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Suite = fn(&CheckProfile) -> Result<(bool, String)>;

pub const SUITES: [(&str, Suite); 16] = [
    ("orthogonality", orthogonality),
    ("rodrigues", rodrigues),
    ("gauss_exactness", gauss_exactness),
    ("legendre_bound", legendre_bound),
    ("parity", parity),
    ("trace_consistency", trace_consistency),
    ("oracle_d2", oracle_d2),
    ("arctan_route", arctan_route),
    ("relu_analytic", relu_analytic),
    ("relu_scaling", relu_scaling),
    ("decay_invariants", decay_invariants),
    ("step_lower_bound", step_lower_bound),
    ("smooth_rate", smooth_rate),
    ("smooth_mu_upper", smooth_mu),
    ("harmonic_average", harmonic_average),
    ("separation", separation),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs the named suites (all when `only` is empty), in table order.
pub fn run_checks(only: &[String], profile: &CheckProfile) -> Result<Vec<CheckOutcome>> {
    for name in only {
        if !SUITES.iter().any(|s| s.0 == name) {
            return Err(domain!("unknown check suite '{name}'; available: {}", suite_names().join(", ")));
        }
    }
    Ok(SUITES
        .iter()
        .filter(|s| only.is_empty() || only.iter().any(|o| o == s.0))
        .map(|&(name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f(profile) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect())
}

fn dims(profile: &CheckProfile, default: &[usize]) -> Vec<usize> {
    profile.stress_d.map(|d| vec![d]).unwrap_or_else(|| default.to_vec())
}

fn spec(kind: ActivationKind, alpha: u32, gamma: f64, bias: f64) -> Result<ActivationSpec> {
    ActivationSpec::new(kind, alpha, gamma, bias)
}

fn orthogonality(p: &CheckProfile) -> Result<(bool, String)> {
    let kmax = 30;
    let mut worst: f64 = 0.0;
    for d in dims(p, &[3, 5, 10, 20]) {
        let ev = LegendreEvaluator::new(d, kmax)?;
        let rule = gauss_jacobi(kmax + 2, d, false)?;
        let ratio = surface_area(d)? / surface_area(d - 1)?;
        let table: Vec<Vec<f64>> = rule.nodes.iter().map(|&t| ev.eval_all(t)).collect::<Result<_>>()?;
        for j in 0..=kmax {
            for k in 0..=kmax {
                let ip: f64 = table.iter().zip(&rule.weights).map(|(p, w)| w * p[j] * p[k]).sum();
                let want = if j == k { ratio / harmonic_dim(d, k)? as f64 } else { 0.0 };
                worst = worst.max((ip - want).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.2e} (tol 1e-10)")))
}

fn rodrigues(_: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in [3, 5] {
        let ev = LegendreEvaluator::new(d, 6)?;
        for i in 0..20 {
            let t = -0.95 + 1.9 * i as f64 / 19.0;
            for k in 0..=6 {
                worst = worst.max((rodrigues_legendre(d, k, t)? - ev.eval(k, t)?).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max deviation {worst:.2e} (tol 1e-9)")))
}

fn gauss_exactness(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in dims(p, &[2, 3, 4, 10, 20]) {
        let e = weight_exponent(d);
        let total = log_beta(0.5, e + 1.0)?.exp();
        for n in [1, 4, 16, 32] {
            let rule = gauss_jacobi(n, d, false)?;
            for j in 0..2 * n {
                let got = rule.integrate(|t| t.powi(j as i32));
                let want = if j % 2 == 1 { 0.0 } else { log_beta((j as f64 + 1.0) / 2.0, e + 1.0)?.exp() };
                worst = worst.max((got - want).abs() / total);
            }
        }
    }
    Ok((worst <= 1e-12, format!("max relative deviation {worst:.2e} (tol 1e-12)")))
}

fn legendre_bound(p: &CheckProfile) -> Result<(bool, String)> {
    let mut ok = true;
    for d in dims(p, &[2, 3, 7, 20, 50]) {
        let ev = LegendreEvaluator::new(d, 60)?;
        for i in 0..=400 {
            let t = -1.0 + i as f64 / 200.0;
            let a = ev.eval_all(t.min(1.0))?;
            let b = ev.eval_all((-t).max(-1.0))?;
            for k in 0..=60 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                ok &= a[k].abs() <= 1.0 + 1e-12 && (b[k] - sign * a[k]).abs() <= 1e-12;
            }
            ok &= ev.eval_all(1.0)?.iter().all(|&v| v == 1.0);
        }
    }
    Ok((ok, "|P_k| <= 1, parity, P_k(1) = 1 for k <= 60".into()))
}

fn parity(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in dims(p, &[3, 10]) {
        for s in [spec(ActivationKind::Arctan, 0, 2.0, 0.0)?, spec(ActivationKind::Sin, 0, 1.5, 0.0)?] {
            let e = eta_all(&s, d, 20)?;
            for k in (0..=20).step_by(2) {
                worst = worst.max(e[k] * e[k]);
            }
        }
        let e = eta_all(&ActivationSpec::step(), d, 20)?;
        for k in (2..=20).step_by(2) {
            worst = worst.max(e[k] * e[k]);
        }
    }
    Ok((worst <= 1e-18, format!("largest even-degree mu {worst:.2e} (tol 1e-18)")))
}

fn trace_consistency(p: &CheckProfile) -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for d in dims(p, &[3, 10]) {
        for s in [ActivationSpec::step(), ActivationSpec::relu_alpha(1), spec(ActivationKind::Sigmoid, 0, 2.0, 0.3)?] {
            let mut prev = f64::INFINITY;
            for m_max in [10, 100, 1000] {
                let ks = build_spectrum(&s, d, m_max)?;
                worst = worst.min(ks.residual);
                ok &= ks.residual >= -1e-8 && ks.residual <= prev + 1e-15;
                prev = ks.residual;
            }
        }
    }
    Ok((ok, format!("smallest residual {worst:.2e} (>= -1e-8, non-increasing in K)")))
}

fn oracle_d2(_: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for s in [
        ActivationSpec::step(),
        ActivationSpec::relu_alpha(1),
        spec(ActivationKind::Arctan, 0, 1.0, 0.0)?,
        spec(ActivationKind::Sigmoid, 0, 1.0, 0.0)?,
    ] {
        let q = eta_all(&s, 2, 40)?;
        let f = fourier_oracle_d2(&s, 40, FOURIER_GRID)?;
        for k in 0..=40 {
            let mu = q[k] * q[k];
            if mu > 1e-12 {
                worst = worst.max((mu - f[k]).abs() / mu);
            }
        }
    }
    Ok((worst <= 1e-8, format!("max relative deviation {worst:.2e} (tol 1e-8)")))
}

fn arctan_route(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in dims(p, &[3, 10]) {
        for gamma in [1.0, 4.0] {
            let q = eta_all(&spec(ActivationKind::Arctan, 0, gamma, 0.0)?, d, 15)?;
            for k in (1..=15).step_by(2) {
                let h = eta_arctan_hypergeometric(d, k, gamma, 0.0)?;
                worst = worst.max((h - q[k]).abs() / q[k].abs());
            }
        }
    }
    Ok((worst <= 1e-8, format!("max relative deviation {worst:.2e} (tol 1e-8)")))
}

/// Coefficient of variation of quadrature / analytic over contributing degrees.
pub fn relu_analytic_cv(d: usize, alpha: u32, kmax: usize) -> Result<(f64, f64)> {
    let q = eta_all(&ActivationSpec::relu_alpha(alpha), d, kmax)?;
    let ratios: Vec<f64> = (alpha as usize + 1..=kmax)
        .filter_map(|k| {
            let a = mu_relu_alpha_analytic(d, k, alpha).ok()?;
            (a > 0.0).then(|| q[k] * q[k] / a)
        })
        .collect();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let sd = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok((sd / mean, mean))
}

fn relu_analytic(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut consts = Vec::new();
    for d in dims(p, &[3, 10]) {
        for alpha in [0, 1, 2] {
            let (cv, mean) = relu_analytic_cv(d, alpha, 30)?;
            worst = worst.max(cv);
            consts.push(format!("{mean:.6}"));
        }
    }
    Ok((worst <= 1e-6, format!("max CV {worst:.2e} (tol 1e-6); ratios {}", consts.join(" "))))
}

fn relu_scaling(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let ms: Vec<usize> = vec![0, 1, 5, 20, 100];
    for d in dims(p, &[3, 10]) {
        for alpha in [1, 2] {
            let base = trace_decay(&build_spectrum(&ActivationSpec::relu_alpha(alpha), d, 100)?, &ms)?;
            for c in [0.5, 3.0] {
                let s = spec(ActivationKind::ReluAlpha, alpha, c, 0.0)?;
                let td = trace_decay(&build_spectrum(&s, d, 100)?, &ms)?;
                let f = c.powi(2 * alpha as i32);
                for (a, b) in td.lambda_values.iter().zip(&base.lambda_values) {
                    worst = worst.max((a - f * b).abs() / (f * b));
                }
            }
        }
    }
    Ok((worst <= 1e-10, format!("max relative deviation {worst:.2e} (tol 1e-10)")))
}

fn decay_invariants(p: &CheckProfile) -> Result<(bool, String)> {
    let mut ok = true;
    for d in dims(p, &[3, 10]) {
        for s in [ActivationSpec::step(), spec(ActivationKind::Softplus, 0, 2.0, -0.5)?] {
            let ks = build_spectrum(&s, d, 200)?;
            let ms: Vec<usize> = (0..=200).collect();
            let td = trace_decay(&ks, &ms)?;
            let top = ks.top_eigenvalues(200)?;
            ok &= td.lambda_values[0] == ks.trace;
            for m in 1..=200 {
                let inc = td.lambda_values[m - 1] - td.lambda_values[m];
                ok &= td.lambda_values[m] >= 0.0 && inc >= -1e-15;
                ok &= (inc - top[m - 1]).abs() <= 1e-14 * ks.trace;
            }
        }
    }
    Ok((ok, "Lambda(0) = trace, non-increasing, increments = sorted eigenvalues".into()))
}

fn step_lower_bound(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for d in dims(p, &[5, 10]) {
        let top = 1usize << d.min(14);
        let ms: Vec<usize> = (0..=d.min(14)).map(|i| 1usize << i).collect();
        let td = trace_decay(&build_spectrum(&ActivationSpec::step(), d, top)?, &ms)?;
        let bound = relu_alpha_lower(d.max(3), 0, &ms)?;
        for (l, b) in td.lambda_values.iter().zip(&bound.values) {
            worst = worst.min(l / b);
        }
    }
    Ok((worst >= 1.0, format!("min Lambda / bound over m <= 2^d: {worst:.4}")))
}

fn smooth_rate(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in dims(p, &[3, 10]) {
        for kind in [ActivationKind::Sin, ActivationKind::Cos, ActivationKind::Sigmoid] {
            let ms: Vec<usize> = vec![10, 30, 100, 300, 1000];
            let td = trace_decay(&build_spectrum(&ActivationSpec::smooth(kind), d, 1000)?, &ms)?;
            for (m, l) in ms.iter().zip(&td.lambda_values) {
                worst = worst.max(*m as f64 * l);
            }
        }
    }
    Ok((worst <= 10.0, format!("max m Lambda(m) {worst:.3e} (limit 10)")))
}

fn smooth_mu(p: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in dims(p, &[3, 10]) {
        for kind in [ActivationKind::Sin, ActivationKind::Cos] {
            let e = eta_all(&ActivationSpec::smooth(kind), d, 30)?;
            for (k, ek) in e.iter().enumerate() {
                worst = worst.max(ek * ek / smooth_mu_upper(d, k, 1.0)?);
            }
        }
    }
    Ok((worst <= 1.0, format!("max mu / bound {worst:.4}")))
}

fn harmonic_average(_: &CheckProfile) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for s in [ActivationSpec::step(), spec(ActivationKind::Arctan, 0, 2.0, 0.0)?] {
        let ks = build_spectrum(&s, 2, 9)?;
        for m in [0, 1, 3, 9] {
            let lam = trace_decay(&ks, &[m])?.lambda_values[0];
            let avg = harmonic_average_error(2, &s, m, 1 << 12)?;
            worst = worst.max((avg - lam).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max deviation {worst:.2e} (tol 1e-8)")))
}

fn separation(p: &CheckProfile) -> Result<(bool, String)> {
    let d = p.stress_d.unwrap_or(10);
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [16, 32] {
        let mut cfg = SeparationConfig::new(d, ActivationSpec::step(), m, 2024);
        cfg.trials = 10;
        let rep = random_feature_fit(&cfg)?;
        ok &= rep.respects_lower_bound(3.0);
        parts.push(format!("m={m}: {:.4} >= {:.4} - 3*{:.4}", rep.mean, rep.lambda_m, rep.stderr));
    }
    Ok((ok, parts.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_rejected() {
        assert!(run_checks(&["nope".into()], &CheckProfile::default()).is_err());
    }

    #[test]
    fn fast_suites_pass() {
        let only: Vec<String> =
            ["rodrigues", "gauss_exactness", "parity", "relu_scaling"].iter().map(|s| s.to_string()).collect();
        let out = run_checks(&only, &CheckProfile::default()).unwrap();
        assert_eq!(out.len(), 4);
        for o in out {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }
}
