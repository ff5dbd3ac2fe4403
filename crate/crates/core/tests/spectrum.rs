use kwidth_core::activation::closed_form_kappa;
use kwidth_core::experiment::random_feature_fit;
use kwidth_core::spectrum::{build_spectrum, kernel_trace, trace_decay};
use kwidth_core::{ActivationKind, ActivationSpec, LegendreEvaluator, SeparationConfig, TraceRequest};
use proptest::prelude::*;

/// Classical Legendre polynomial by Bonnet's recurrence.
fn legendre(k: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if k == 0 {
        return p0;
    }
    for n in 1..k {
        let n = n as f64;
        let p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Composite Simpson on [a, b].
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn step_eigenvalues_in_three_dimensions_match_simpson() {
    // In d = 3 the first coordinate is uniform on [-1, 1].
    let ks = build_spectrum(&ActivationSpec::step(), 3, 300).unwrap();
    for k in 0..=15 {
        let eta = 0.5 * simpson(|t| legendre(k, t), 0.0, 1.0, 20_000);
        assert!((ks.mu[k] - eta * eta).abs() < 1e-13, "k={k}: {} vs {}", ks.mu[k], eta * eta);
    }
}

#[test]
fn relu_spectrum_reconstructs_the_kernel() {
    let d = 3;
    let ks = build_spectrum(&ActivationSpec::relu_alpha(1), d, 20_000).unwrap();
    let ev = LegendreEvaluator::new(d, ks.max_degree()).unwrap();
    for t in [-0.9, -0.5, 0.0, 0.3, 0.8] {
        let p = ev.eval_all(t).unwrap();
        let series: f64 = (0..=ks.max_degree()).map(|k| ks.mult[k] as f64 * ks.mu[k] * p[k]).sum();
        let exact = closed_form_kappa(1, d, t).unwrap();
        assert!((series - exact).abs() < 1e-6, "t={t}: {series} vs {exact}");
    }
}

#[test]
fn decay_examples_in_three_dimensions() {
    let ks = build_spectrum(&ActivationSpec::step(), 3, 16).unwrap();
    let td = trace_decay(&ks, &[0, 1, 4, 9]).unwrap();
    assert_eq!(td.lambda_values[0], 0.5);
    assert!((td.lambda_values[1] - 0.25).abs() < 1e-15);
    assert!((td.lambda_values[2] - 0.0625).abs() < 1e-15);
    // Degree 2 vanishes, so ranks 5..9 come from degree 3 (1/256 each).
    assert!((td.lambda_values[3] - 11.0 / 256.0).abs() < 1e-15);
    assert!(trace_decay(&ks, &[1_000_000]).is_err());
}

#[test]
fn monte_carlo_trace_brackets_the_closed_form() {
    let s = ActivationSpec::relu_alpha(1);
    let mc = kernel_trace(&s, 7, TraceRequest::MonteCarlo { samples: 200_000, seed: 5 }).unwrap();
    let exact = 1.0 / 14.0;
    assert!((mc.value - exact).abs() < 4.0 * mc.stderr.unwrap());
}

#[test]
fn separation_is_reproducible_from_the_seed() {
    let mut cfg = SeparationConfig::new(6, ActivationSpec::step(), 8, 42);
    cfg.trials = 4;
    let a = random_feature_fit(&cfg).unwrap();
    let b = random_feature_fit(&cfg).unwrap();
    assert_eq!(a.errors, b.errors);
    assert!(a.respects_lower_bound(3.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decay_is_monotone_and_bounded(
        kind in prop::sample::select(vec![ActivationKind::Sigmoid, ActivationKind::Softplus, ActivationKind::Arctan, ActivationKind::Silu]),
        gamma in 0.2f64..3.0,
        bias in -1.0f64..1.0,
        d in 2usize..8,
    ) {
        let s = ActivationSpec::new(kind, 0, gamma, bias).unwrap();
        let ks = build_spectrum(&s, d, 200).unwrap();
        let ms: Vec<usize> = (0..=200).collect();
        let lam = trace_decay(&ks, &ms).unwrap().lambda_values;
        prop_assert!((lam[0] - ks.trace).abs() <= 1e-15 * ks.trace.max(1.0));
        for w in lam.windows(2) {
            prop_assert!(w[1] >= 0.0 && w[1] <= w[0]);
        }
    }
}
