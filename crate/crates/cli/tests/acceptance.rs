//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each.
//!
//! Runs without the libtest harness so every verdict is printed. Pass a
//! substring to run a subset: `cargo test -p kwidth-cli --test acceptance -- fig`.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use kwidth_core::bounds::{relu_alpha_lower, smooth_mu_upper};
use kwidth_core::check::relu_analytic_cv;
use kwidth_core::experiment::{log_log_slope, log_spaced, r_trend_study, random_feature_fit, standardized_difference};
use kwidth_core::mathcore::{gauss_jacobi, harmonic_dim, surface_area, LegendreEvaluator};
use kwidth_core::spectrum::{
    build_spectrum, eta_all, eta_arctan_hypergeometric, fourier_oracle_d2, kernel_trace, trace_decay, FOURIER_GRID,
};
use kwidth_core::{ActivationKind, ActivationSpec, SeparationConfig, SpectrumOptions, TargetDirection, TraceRequest};

type Verdict = Result<(bool, String), String>;

/// Name, arguments, and sibling tables written next to `--out`.
type CliCase<'a> = (&'a str, Vec<&'a str>, &'a [&'a str]);

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn spec(kind: ActivationKind, gamma: f64, bias: f64) -> Result<ActivationSpec, String> {
    ActivationSpec::new(kind, 0, gamma, bias).map_err(err)
}

fn trace_identities() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for d in [3, 5, 10, 20, 50] {
        for (s, want) in [(ActivationSpec::step(), 0.5), (ActivationSpec::relu_alpha(1), 0.5 / d as f64)] {
            for req in [TraceRequest::Auto, TraceRequest::Quadrature] {
                let t0 = Instant::now();
                let got = kernel_trace(&s, d, req).map_err(err)?.value;
                slowest = slowest.max(t0.elapsed().as_secs_f64());
                worst = worst.max((got - want).abs());
            }
        }
    }
    Ok((
        worst <= 1e-8 && slowest < 1.0,
        format!("max |kappa(1) - exact| {worst:.2e} (tol 1e-8), slowest {slowest:.3}s"),
    ))
}

fn exact_low_degree() -> Verdict {
    let step = build_spectrum(&ActivationSpec::step(), 3, 16).map_err(err)?;
    let relu = build_spectrum(&ActivationSpec::relu_alpha(1), 3, 16).map_err(err)?;
    let mut worst: f64 = 0.0;
    for (k, want) in [(0, 0.25), (1, 1.0 / 16.0), (3, 1.0 / 256.0)] {
        worst = worst.max((step.mu[k] - want).abs());
    }
    for (k, want) in [(0, 1.0 / 16.0), (1, 1.0 / 36.0), (2, 1.0 / 256.0)] {
        worst = worst.max((relu.mu[k] - want).abs());
    }
    let zeros = step.mu[2].max(relu.mu[3]);
    Ok((
        worst <= 1e-10 && zeros <= 1e-12,
        format!("max deviation {worst:.2e} (tol 1e-10), vanishing degrees {zeros:.2e} (tol 1e-12)"),
    ))
}

fn orthogonality() -> Verdict {
    let t0 = Instant::now();
    let kmax = 30;
    let mut worst: f64 = 0.0;
    for d in [3, 5, 10, 20] {
        let ev = LegendreEvaluator::new(d, kmax).map_err(err)?;
        // Exact for degree <= 2n - 1 = 2 kmax + 1 with n = kmax + 1.
        let rule = gauss_jacobi(kmax + 1, d, false).map_err(err)?;
        let ratio = surface_area(d).map_err(err)? / surface_area(d - 1).map_err(err)?;
        let table: Vec<Vec<f64>> = rule.nodes.iter().map(|&t| ev.eval_all(t)).collect::<Result<_, _>>().map_err(err)?;
        for j in 0..=kmax {
            for k in 0..=kmax {
                let ip: f64 = table.iter().zip(&rule.weights).map(|(p, w)| w * p[j] * p[k]).sum();
                let want = if j == k { ratio / harmonic_dim(d, k).map_err(err)? as f64 } else { 0.0 };
                worst = worst.max((ip - want).abs());
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok((worst <= 1e-10 && secs < 30.0, format!("max deviation {worst:.2e} (tol 1e-10) in {secs:.2}s")))
}

fn oracle_d2() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for s in [
        ActivationSpec::step(),
        ActivationSpec::relu_alpha(1),
        ActivationSpec::smooth(ActivationKind::Arctan),
        ActivationSpec::smooth(ActivationKind::Sigmoid),
    ] {
        let q = eta_all(&s, 2, 40).map_err(err)?;
        let f = fourier_oracle_d2(&s, 40, FOURIER_GRID).map_err(err)?;
        for k in 0..=40 {
            let mu = q[k] * q[k];
            if mu > 1e-12 {
                worst = worst.max((mu - f[k]).abs() / mu);
                compared += 1;
            }
        }
    }
    Ok((worst <= 1e-8, format!("max relative deviation {worst:.2e} over {compared} eigenvalues (tol 1e-8)")))
}

fn arctan_route() -> Verdict {
    let mut worst: f64 = 0.0;
    for d in [3, 10, 20] {
        for gamma in [1.0, 2.0, 4.0] {
            let q = eta_all(&spec(ActivationKind::Arctan, gamma, 0.0)?, d, 31).map_err(err)?;
            for k in (1..=31).step_by(2) {
                let h = eta_arctan_hypergeometric(d, k, gamma, 0.0).map_err(err)?;
                let rel = if h == q[k] { 0.0 } else { (h - q[k]).abs() / h.abs().max(q[k].abs()) };
                worst = worst.max(rel);
            }
        }
    }
    Ok((worst <= 1e-8, format!("max relative deviation {worst:.2e} (tol 1e-8)")))
}

fn relu_analytic() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for d in [3, 10] {
        for alpha in [0, 1, 2] {
            let (cv, mean) = relu_analytic_cv(d, alpha, 30).map_err(err)?;
            worst = worst.max(cv);
            ratios.push(format!("{mean:.6}"));
        }
    }
    Ok((worst <= 1e-6, format!("max CV {worst:.2e} (tol 1e-6); mean ratios {}", ratios.join(" "))))
}

fn figure1() -> Verdict {
    let t0 = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [10usize, 20] {
        let m_max = 100_000;
        let ks = build_spectrum(&ActivationSpec::step(), d, m_max).map_err(err)?;
        let ms = log_spaced(1, m_max, 51);
        let lam = trace_decay(&ks, &ms).map_err(err)?.lambda_values;
        let bound = relu_alpha_lower(d, 0, &ms).map_err(err)?.values;
        let top: Vec<usize> = log_spaced(m_max / 10, m_max, 21);
        let top_lam = trace_decay(&ks, &top).map_err(err)?.lambda_values;
        let slope = log_log_slope(&top, &top_lam).ok_or("slope undefined")?;
        let target = -1.0 / (d as f64 - 1.0);
        let slope_ok = (slope - target).abs() <= 0.15 * target.abs();
        let violations: Vec<usize> =
            ms.iter().zip(lam.iter().zip(&bound)).filter(|(_, (l, b))| l < b).map(|(&m, _)| m).collect();
        ok &= slope_ok && violations.is_empty();
        parts.push(format!(
            "d={d}: slope {slope:.4} vs {target:.4} ({}), bound {}",
            if slope_ok { "ok" } else { "outside 15%" },
            match violations.first() {
                None => "holds".to_string(),
                Some(m) => format!("violated from m={m} ({} of {} points)", violations.len(), ms.len()),
            }
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    Ok((ok, format!("{}; {secs:.1}s", parts.join("; "))))
}

fn smooth_rate() -> Verdict {
    let mut worst: f64 = 0.0;
    let ms: Vec<usize> = (10..=10_000).collect();
    for d in [3, 10] {
        for kind in [ActivationKind::Sin, ActivationKind::Cos, ActivationKind::Sigmoid] {
            let ks = build_spectrum(&ActivationSpec::smooth(kind), d, 10_000).map_err(err)?;
            let lam = trace_decay(&ks, &ms).map_err(err)?.lambda_values;
            for (m, l) in ms.iter().zip(&lam) {
                worst = worst.max(*m as f64 * l);
            }
        }
    }
    Ok((worst <= 10.0, format!("max m Lambda(m) over m in [10, 1e4]: {worst:.3e} (limit 10)")))
}

fn figure2() -> Verdict {
    let opts = SpectrumOptions::default();
    let (m_probe, grid) = (10_000, 8);
    let by_r = r_trend_study(ActivationKind::Arctan, 20, &[1.0, 2.0, 4.0], m_probe, grid, &opts).map_err(err)?;
    let mags: Vec<f64> = by_r.slopes.iter().map(|s| s.1.abs()).collect();
    let monotone = mags.windows(2).all(|w| w[1] <= w[0]);
    let mut d_slopes = Vec::new();
    let mut off = by_r.off_boundary_argmax.iter().map(|r| format!("d=20 r={r}")).collect::<Vec<_>>();
    for d in [10, 20, 40] {
        let st = r_trend_study(ActivationKind::Arctan, d, &[1.0], m_probe, grid, &opts).map_err(err)?;
        d_slopes.push(st.slopes[0].1.abs());
        if !st.off_boundary_argmax.is_empty() {
            off.push(format!("d={d} r=1"));
        }
    }
    let (lo, hi) = d_slopes.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    let spread = hi / lo - 1.0;
    let fmt = |v: &[f64]| v.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(", ");
    if !off.is_empty() {
        println!("  warning: argmax not at (r, 0) for {}", off.join(", "));
    }
    Ok((
        monotone && spread <= 0.25,
        format!(
            "|slope| at d=20, r=1,2,4: {} ({}); r=1, d=10,20,40: {} (spread {:.0}%, limit 25%)",
            fmt(&mags),
            if monotone { "non-increasing" } else { "not monotone" },
            fmt(&d_slopes),
            100.0 * spread
        ),
    ))
}

fn separation() -> Verdict {
    let t0 = Instant::now();
    let seed = 20_240_601;
    let mut reps = Vec::new();
    for m in [64, 128, 256] {
        let cfg = SeparationConfig::new(20, ActivationSpec::step(), m, seed);
        reps.push(random_feature_fit(&cfg).map_err(err)?);
    }
    let above = reps.iter().all(|r| r.errors.len() >= 20 && r.respects_lower_bound(3.0));
    // Signed: an increase of more than 2 combined SE breaks monotonicity.
    let monotone = reps.windows(2).all(|w| {
        let se = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        w[1].mean - w[0].mean <= 2.0 * se
    });
    let mut cfg = SeparationConfig::new(20, ActivationSpec::step(), 128, seed + 1);
    cfg.direction = TargetDirection::Random;
    let rotated = random_feature_fit(&cfg).map_err(err)?;
    let z_rot = standardized_difference(&rotated, &reps[1]).abs();
    let secs = t0.elapsed().as_secs_f64();
    let rows = reps
        .iter()
        .map(|r| format!("m={}: {:.4}+-{:.4} vs {:.4}", r.config.m, r.mean, r.stderr, r.lambda_m))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((
        above && monotone && z_rot <= 3.0 && secs < 600.0,
        format!("{rows}; monotone within 2 SE: {monotone}; rotation z {z_rot:.2}; {secs:.1}s"),
    ))
}

fn lemma_domination() -> Verdict {
    let mut worst: f64 = 0.0;
    for d in [3, 10] {
        for kind in [ActivationKind::Sin, ActivationKind::Cos] {
            let e = eta_all(&ActivationSpec::smooth(kind), d, 30).map_err(err)?;
            for (k, ek) in e.iter().enumerate() {
                worst = worst.max(ek * ek / smooth_mu_upper(d, k, 1.0).map_err(err)?);
            }
        }
    }
    Ok((worst <= 1.0, format!("max mu_k / bound {worst:.4} (limit 1)")))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(err)?;
    let commands: Vec<CliCase> = vec![
        ("spectrum", vec!["spectrum", "--activation", "relu:1:1.5:0.2", "--d", "5", "--mmax", "50"], &[]),
        (
            "spectrum_mc",
            vec![
                "spectrum",
                "--activation",
                "sigmoid",
                "--d",
                "4",
                "--trace",
                "monte-carlo",
                "--samples",
                "2000",
                "--seed",
                "9",
            ],
            &[],
        ),
        ("decay", vec!["decay", "--activation", "step", "--d", "10", "--mmax", "1000"], &["bounds"]),
        (
            "supdecay",
            vec!["supdecay", "--activation", "arctan", "--d", "5", "--r", "1,2", "--grid", "2", "--mmax", "200"],
            &["trend"],
        ),
        ("bounds", vec!["bounds", "--d", "11", "--m", "1,10,1024", "--alpha", "0,1", "--r", "2"], &[]),
        ("separation", vec!["separation", "--d", "8", "--m", "8,16", "--trials", "4", "--seed", "3"], &[]),
        ("check", vec!["check", "--only", "rodrigues,parity"], &[]),
    ];
    let mut bad = Vec::new();
    let mut files = 0;
    for (name, args, siblings) in &commands {
        for fmt in ["csv", "json"] {
            let mut outputs = Vec::new();
            let out = dir.path().join(format!("{name}.{fmt}"));
            for _ in 0..2 {
                let mut argv: Vec<String> =
                    std::iter::once("kwidth").chain(args.iter().copied()).map(String::from).collect();
                argv.extend(["--format".into(), fmt.into(), "--out".into(), out.display().to_string()]);
                let code = kwidth_cli::main_with_args(argv);
                if code != 0 {
                    return Err(format!("{name} ({fmt}) exited with {code}"));
                }
                let mut bytes = vec![fs::read(&out).map_err(err)?];
                if fmt == "csv" {
                    for tag in *siblings {
                        bytes.push(fs::read(kwidth_cli::sibling_path(&out, tag)).map_err(err)?);
                    }
                }
                outputs.push(bytes);
            }
            files += outputs[0].len();
            if outputs[0] != outputs[1] {
                bad.push(format!("{name}/{fmt}"));
            }
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{files} output files compared; differing: {}",
            if bad.is_empty() { "none".into() } else { bad.join(", ") }
        ),
    ))
}

type Criterion = (&'static str, fn() -> Verdict);

const CRITERIA: &[Criterion] = &[
    ("trace_identities", trace_identities),
    ("exact_low_degree_eigenvalues", exact_low_degree),
    ("legendre_orthogonality", orthogonality),
    ("oracle_equivalence_d2", oracle_d2),
    ("arctan_hypergeometric_route", arctan_route),
    ("relu_alpha_analytic_cv", relu_analytic),
    ("figure1_step_decay", figure1),
    ("smooth_activation_rate", smooth_rate),
    ("figure2_arctan_r_trend", figure2),
    ("separation_experiment", separation),
    ("smooth_mu_domination", lemma_domination),
    ("cli_determinism", determinism),
];

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (name, f) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {detail} [{:.1}s]", t0.elapsed().as_secs_f64());
        if !pass {
            failed.push(*name);
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
