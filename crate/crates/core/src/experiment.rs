//! Monte Carlo experiments: least-squares fits of a single neuron by random
//! features, the average optimal-feature error on the circle, and the
//! dependence of `Lambda_r(m)` on `r`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::activation::{ActivationKind, ActivationSpec};
use crate::error::{domain, Error, Result};
use crate::mathcore::LegendreEvaluator;
use crate::spectrum::{
    build_spectrum, fourier_oracle_d2, sup_trace_decay, trace_decay, SpectrumOptions, SupTraceDecay,
};

/// Independent generator for `(seed, stream)`; streams never overlap.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_with(rng: &mut ChaCha20Rng, d: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

/// `n` i.i.d. uniform points on `S^{d-1}` (normalized Gaussian vectors).
pub fn sample_sphere(d: usize, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if d < 2 || n == 0 {
        return Err(domain!("sample_sphere needs d >= 2 and n >= 1 (d={d}, n={n})"));
    }
    Ok(sample_with(&mut stream_rng(seed, 0), d, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetDirection {
    /// `v = e_1`.
    FixedE1,
    /// `v` drawn uniformly per trial.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// `sigma(gamma w_j . x + b)` with the target's activation, `w_j` uniform.
    RandomNeuron,
    /// Zonal harmonics `P_k(w_j . x)`, with degrees chosen to match the `m`
    /// largest eigenvalues of the target's kernel.
    SphericalHarmonicProxy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationConfig {
    pub d: usize,
    pub target: ActivationSpec,
    pub direction: TargetDirection,
    pub m: usize,
    pub features: FeatureKind,
    pub n_train: usize,
    pub n_test: usize,
    /// Penalty in `sum (y - F c)^2 + ridge |c|^2`.
    pub ridge: f64,
    pub seed: u64,
    pub trials: usize,
    /// Replace the first feature direction by the target direction.
    pub force_target_feature: bool,
}

impl SeparationConfig {
    /// Defaults: `n_train = 20 m`, `n_test = 4 n_train`, ridge `1e-10`, 20 trials.
    pub fn new(d: usize, target: ActivationSpec, m: usize, seed: u64) -> Self {
        let n_train = (20 * m).max(200);
        Self {
            d,
            target,
            direction: TargetDirection::FixedE1,
            m,
            features: FeatureKind::RandomNeuron,
            n_train,
            n_test: 4 * n_train,
            ridge: 1e-10,
            seed,
            trials: 20,
            force_target_feature: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub config: SeparationConfig,
    pub errors: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    /// `Lambda(m)` of the target's kernel.
    pub lambda_m: f64,
    /// `n_train < m`: the fit interpolates.
    pub underdetermined: bool,
    /// Trials where Cholesky failed and the minimum-norm solution was used.
    pub min_norm_trials: usize,
}

impl SeparationReport {
    /// `mean >= lambda_m - z * stderr`.
    pub fn respects_lower_bound(&self, z: f64) -> bool {
        self.mean >= self.lambda_m - z * self.stderr
    }

    /// Empirical quantile of the per-trial errors (nearest rank).
    pub fn quantile(&self, q: f64) -> f64 {
        let mut e = self.errors.clone();
        e.sort_by(f64::total_cmp);
        let i = ((q.clamp(0.0, 1.0) * e.len() as f64).ceil() as usize).clamp(1, e.len()) - 1;
        e[i]
    }
}

const STREAM_FEATURES: u64 = 0;
const STREAM_TRAIN: u64 = 1;
const STREAM_TEST: u64 = 2;
const STREAM_DIRECTION: u64 = 3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct FeatureSet {
    dirs: Vec<Vec<f64>>,
    degrees: Option<Vec<usize>>,
    legendre: Option<LegendreEvaluator>,
}

impl FeatureSet {
    fn row(&self, spec: &ActivationSpec, x: &[f64], out: &mut [f64]) {
        match (&self.degrees, &self.legendre) {
            (Some(deg), Some(ev)) => {
                for ((o, w), &k) in out.iter_mut().zip(&self.dirs).zip(deg) {
                    *o = ev.eval(k, dot(w, x).clamp(-1.0, 1.0)).expect("degree within evaluator range");
                }
            }
            _ => {
                for (o, w) in out.iter_mut().zip(&self.dirs) {
                    *o = spec.eval(dot(w, x));
                }
            }
        }
    }
}

/// Degrees of the `m` largest eigenvalues of the target's kernel, in order.
fn proxy_degrees(cfg: &SeparationConfig) -> Result<Vec<usize>> {
    let ks = build_spectrum(&cfg.target, cfg.d, cfg.m.max(1))?;
    let mut out = Vec::with_capacity(cfg.m);
    for (k, _, n) in ks.sorted_blocks() {
        for _ in 0..n {
            if out.len() == cfg.m {
                return Ok(out);
            }
            out.push(k);
        }
    }
    Ok(out)
}

struct TrialResult {
    error: f64,
    min_norm: bool,
}

fn run_trial(cfg: &SeparationConfig, trial: u64, degrees: &Option<Vec<usize>>) -> Result<TrialResult> {
    let stream = |purpose: u64| stream_rng(cfg.seed, trial * 8 + purpose);
    let d = cfg.d;
    let v: Vec<f64> = match cfg.direction {
        TargetDirection::FixedE1 => {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        }
        TargetDirection::Random => sample_with(&mut stream(STREAM_DIRECTION), d, 1).remove(0),
    };
    let mut dirs = sample_with(&mut stream(STREAM_FEATURES), d, cfg.m);
    if cfg.force_target_feature && cfg.m > 0 {
        dirs[0] = v.clone();
    }
    let legendre = match degrees {
        Some(deg) => Some(LegendreEvaluator::new(d, deg.iter().copied().max().unwrap_or(0))?),
        None => None,
    };
    let feats = FeatureSet { dirs, degrees: degrees.clone(), legendre };
    let target = |x: &[f64]| cfg.target.eval(dot(&v, x));
    let train = sample_with(&mut stream(STREAM_TRAIN), d, cfg.n_train);
    let test = sample_with(&mut stream(STREAM_TEST), d, cfg.n_test);
    let m = cfg.m;

    if m == 0 {
        let err = test.iter().map(|x| target(x).powi(2)).sum::<f64>() / cfg.n_test as f64;
        return Ok(TrialResult { error: err, min_norm: false });
    }
    let mut f = DMatrix::<f64>::zeros(cfg.n_train, m);
    let mut y = DVector::<f64>::zeros(cfg.n_train);
    let mut row = vec![0.0; m];
    for (i, x) in train.iter().enumerate() {
        feats.row(&cfg.target, x, &mut row);
        for j in 0..m {
            f[(i, j)] = row[j];
        }
        y[i] = target(x);
    }
    let ft = f.transpose();
    let mut gram = &ft * &f;
    for j in 0..m {
        gram[(j, j)] += cfg.ridge;
    }
    let rhs = &ft * &y;
    let (coef, min_norm) = match gram.clone().cholesky() {
        Some(ch) => (ch.solve(&rhs), false),
        None => {
            let svd = f.svd(true, true);
            let c = svd
                .solve(&y, 1e-12 * svd.singular_values.max())
                .map_err(|e| Error::Numeric(format!("minimum-norm least squares failed: {e}")))?;
            (c, true)
        }
    };
    let mut sse = 0.0;
    for x in &test {
        feats.row(&cfg.target, x, &mut row);
        let pred: f64 = row.iter().zip(coef.iter()).map(|(a, b)| a * b).sum();
        sse += (target(x) - pred).powi(2);
    }
    Ok(TrialResult { error: sse / cfg.n_test as f64, min_norm })
}

/// Fits the target neuron by `m` features on `n_train` points per trial and
/// reports the test mean squared error over `trials` independent draws.
pub fn random_feature_fit(cfg: &SeparationConfig) -> Result<SeparationReport> {
    if cfg.d < 2 {
        return Err(domain!("separation experiment needs d >= 2"));
    }
    if cfg.trials == 0 || cfg.n_test == 0 || cfg.n_train == 0 {
        return Err(domain!("trials, n_train and n_test must be positive"));
    }
    if !(cfg.ridge >= 0.0) {
        return Err(domain!("ridge must be non-negative, got {}", cfg.ridge));
    }
    let degrees = match cfg.features {
        FeatureKind::RandomNeuron => None,
        FeatureKind::SphericalHarmonicProxy => Some(proxy_degrees(cfg)?),
    };
    let results: Vec<TrialResult> =
        (0..cfg.trials as u64).into_par_iter().map(|t| run_trial(cfg, t, &degrees)).collect::<Result<_>>()?;
    let errors: Vec<f64> = results.iter().map(|r| r.error).collect();
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let stderr = if errors.len() > 1 {
        (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let ks = build_spectrum(&cfg.target, cfg.d, cfg.m.max(1))?;
    let lambda_m = trace_decay(&ks, &[cfg.m])?.lambda_values[0];
    Ok(SeparationReport {
        config: cfg.clone(),
        errors,
        mean,
        stderr,
        lambda_m,
        underdetermined: cfg.n_train < cfg.m,
        min_norm_trials: results.iter().filter(|r| r.min_norm).count(),
    })
}

/// Difference of two independent means, in units of their combined standard error.
pub fn standardized_difference(a: &SeparationReport, b: &SeparationReport) -> f64 {
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    if se == 0.0 {
        if a.mean == b.mean {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a.mean - b.mean).abs() / se
    }
}

/// Default grid for [`harmonic_average_error`].
pub const HARMONIC_GRID: usize = 1 << 14;

/// Average over target directions of the squared error left after projecting
/// `x -> sigma(gamma v.x + b)` onto the `m` leading Fourier modes on the
/// circle. Modes are ranked by the kernel eigenvalue of their degree, lower
/// degree first on ties and `cos` before `sin`. Directions are `L` equally
/// spaced angles with `L` a power of two exceeding twice the top degree, which
/// averages `cos^2` and `sin^2` of every retained degree to exactly 1/2.
pub fn harmonic_average_error(d: usize, spec: &ActivationSpec, m: usize, n_grid: usize) -> Result<f64> {
    if d != 2 {
        return Err(domain!("harmonic_average_error is only defined on the circle (d = 2), got d = {d}"));
    }
    let kmax = 16.max(m + 10);
    let mut l = 1usize;
    while l < 2 * kmax + 2 {
        l *= 2;
    }
    if !n_grid.is_multiple_of(2 * l) || n_grid < 4 * kmax {
        return Err(domain!("grid of {n_grid} points must be a multiple of {} and at least {}", 2 * l, 4 * kmax));
    }
    // Rank modes by the per-harmonic eigenvalues.
    let mu = fourier_oracle_d2(spec, kmax, n_grid)?;
    let mut modes: Vec<(usize, bool)> = vec![(0, true)];
    for k in 1..=kmax {
        modes.push((k, true));
        modes.push((k, false));
    }
    modes.sort_by(|a, b| mu[b.0].total_cmp(&mu[a.0]).then(a.0.cmp(&b.0)).then(b.1.cmp(&a.1)));
    let selected = &modes[..m.min(modes.len())];

    let energy = |n: usize| -> f64 {
        let theta = |j: usize| 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
        let base: Vec<f64> = (0..n).map(|j| spec.eval(theta(j).cos())).collect();
        let cos_table: Vec<Vec<f64>> =
            selected.iter().map(|&(k, _)| (0..n).map(|j| (k as f64 * theta(j)).cos()).collect()).collect();
        let sin_table: Vec<Vec<f64>> =
            selected.iter().map(|&(k, _)| (0..n).map(|j| (k as f64 * theta(j)).sin()).collect()).collect();
        let shift = n / l;
        let mut total = 0.0;
        for dir in 0..l {
            // sigma(gamma cos(theta_j - psi) + b) with psi = 2 pi dir / L is a shift of the samples.
            let s = dir * shift;
            let sample = |j: usize| base[(j + n - s) % n];
            let norm2 = (0..n).map(|j| sample(j).powi(2)).sum::<f64>() / n as f64;
            let mut kept = 0.0;
            for (i, &(k, is_cos)) in selected.iter().enumerate() {
                let table = if is_cos { &cos_table[i] } else { &sin_table[i] };
                let c = (0..n).map(|j| sample(j) * table[j]).sum::<f64>() / n as f64;
                // Orthonormal modes are 1, sqrt2 cos, sqrt2 sin.
                kept += if k == 0 { c * c } else { 2.0 * c * c };
            }
            total += norm2 - kept;
        }
        total / l as f64
    };
    let fine = energy(n_grid);
    let coarse = energy(n_grid / 2);
    Ok(((4.0 * fine - coarse) / 3.0).max(0.0))
}

/// `count` distinct integers spaced logarithmically in `[lo, hi]`.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let lo = lo.max(1);
    if hi <= lo || count < 2 {
        return vec![hi.max(lo)];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> =
        (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize).collect();
    out.dedup();
    out
}

/// Least-squares slope of `ln y` against `ln x` over the positive entries.
pub fn log_log_slope(xs: &[usize], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(&x, &y)| x > 0 && y > 0.0).map(|(&x, &y)| ((x as f64).ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendRow {
    pub kind: ActivationKind,
    pub d: usize,
    pub r: f64,
    pub m: usize,
    pub lambda_r: f64,
    /// Fitted slope of `ln Lambda_r` against `ln m` over the probe decade.
    pub slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendStudy {
    pub rows: Vec<TrendRow>,
    /// `(r, slope)` per radius.
    pub slopes: Vec<(f64, f64)>,
    pub sup: Vec<SupTraceDecay>,
    /// Radii where some probe's maximiser was not `(r, 0)`.
    pub off_boundary_argmax: Vec<f64>,
}

/// Slope of `Lambda_r(m)` over `m` in `[m_probe/10, m_probe]` for each `r`.
pub fn r_trend_study(
    kind: ActivationKind,
    d: usize,
    r_values: &[f64],
    m_probe: usize,
    grid_size: usize,
    opts: &SpectrumOptions,
) -> Result<TrendStudy> {
    if !matches!(
        kind,
        ActivationKind::Arctan | ActivationKind::Sigmoid | ActivationKind::Silu | ActivationKind::Softplus
    ) {
        return Err(domain!("r-trend study is defined for arctan, sigmoid, silu and softplus, got {kind}"));
    }
    if m_probe < 10 {
        return Err(domain!("m_probe must be at least 10, got {m_probe}"));
    }
    let ms = log_spaced(m_probe / 10, m_probe, 21);
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut sups = Vec::new();
    let mut off = Vec::new();
    for &r in r_values {
        let sup = sup_trace_decay(kind, 0, r, d, grid_size, &ms, opts)?;
        let slope = log_log_slope(&ms, &sup.sup_curve).unwrap_or(f64::NAN);
        if !sup.argmax_at_boundary() {
            off.push(r);
        }
        for (i, &m) in ms.iter().enumerate() {
            rows.push(TrendRow { kind, d, r, m, lambda_r: sup.sup_curve[i], slope });
        }
        slopes.push((r, slope));
        sups.push(sup);
    }
    Ok(TrendStudy { rows, slopes, sup: sups, off_boundary_argmax: off })
}
