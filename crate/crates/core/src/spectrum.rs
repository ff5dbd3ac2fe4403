//! Mercer spectrum of the dot-product kernel induced by an activation on the
//! sphere `S^{d-1}`, its trace decay `Lambda(m)` and the sup curve over
//! `(gamma, b)` pairs.
//!
//! The degree-`k` eigenvalue is `mu_k = eta_k^2` with
//! `eta_k = E_{t ~ p_d}[sigma(gamma t + b) P_k(t)]`, computed by a kink-aware
//! Gauss rule in double-double arithmetic.

use rayon::prelude::*;
use serde::Serialize;

use crate::activation::{ActivationKind, ActivationSpec};
use crate::dd::{self, Dd};
use crate::error::{domain, Error, Result};
use crate::experiment::sample_sphere;
use crate::mathcore::quadrature::WeightedRule;
use crate::mathcore::special::{gauss_2f1, lgamma};
use crate::mathcore::{harmonic_dim, LegendreEvaluator};

/// Quadrature settings for `eta_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaOptions {
    /// Doubling stops once successive values agree to this relative tolerance
    /// (or to the rounding floor of the sum).
    pub rel_tol: f64,
    /// Largest node count per piece before giving up.
    pub max_nodes: usize,
}

impl Default for EtaOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_nodes: 1 << 15 }
    }
}

const CHUNK: usize = 64;

/// Signed `eta_0..=eta_K` in double-double. Values below the rounding floor
/// of their sum are set to exactly zero.
#[derive(Clone, Debug)]
pub(crate) struct EtaBatch {
    pub eta: Vec<Dd>,
    pub nodes_per_piece: usize,
}

fn eta_pass(spec: &ActivationSpec, d: usize, ev: &LegendreEvaluator, n: usize) -> Result<(Vec<Dd>, Vec<f64>)> {
    let kmax = ev.max_degree();
    let rule = WeightedRule::build(d, &spec.kink_points(), n, true)?;
    let partials: Vec<(Vec<Dd>, Vec<f64>)> = rule
        .nodes
        .par_chunks(CHUNK)
        .zip(rule.weights.par_chunks(CHUNK))
        .map(|(ts, ws)| {
            let mut acc = vec![Dd::ZERO; kmax + 1];
            let mut mag = vec![0.0; kmax + 1];
            let mut p = vec![Dd::ZERO; kmax + 1];
            for (t, w) in ts.iter().zip(ws) {
                let ws = *w * spec.eval_dd(*t);
                ev.fill_dd(*t, &mut p);
                for k in 0..=kmax {
                    let term = ws * p[k];
                    acc[k] += term;
                    mag[k] += term.hi.abs();
                }
            }
            (acc, mag)
        })
        .collect();
    let mut acc = vec![Dd::ZERO; kmax + 1];
    let mut mag = vec![0.0; kmax + 1];
    for (a, m) in partials {
        for k in 0..=kmax {
            acc[k] += a[k];
            mag[k] += m[k];
        }
    }
    Ok((acc, mag))
}

pub(crate) fn eta_batch(spec: &ActivationSpec, d: usize, kmax: usize, opts: &EtaOptions) -> Result<EtaBatch> {
    if d < 2 {
        return Err(domain!("eigenvalues need d >= 2, got {d}"));
    }
    let ev = LegendreEvaluator::new(d, kmax)?;
    let mut n = 64.max(2 * kmax + d);
    let (mut prev, _) = eta_pass(spec, d, &ev, n)?;
    loop {
        let next_n = 2 * n;
        if next_n > opts.max_nodes {
            return Err(Error::Numeric(format!(
                "eta quadrature for {spec} in d={d} up to degree {kmax} did not converge within {} nodes per piece",
                opts.max_nodes
            )));
        }
        let (cur, mag) = eta_pass(spec, d, &ev, next_n)?;
        // Node rounding moves P_k by up to ~k^2 ulps, so the floor grows with k.
        let floors: Vec<f64> =
            mag.iter().enumerate().map(|(k, m)| 64.0 * dd::EPS * ((k + 1) * (k + 1)) as f64 * m).collect();
        let converged = (0..=kmax).all(|k| {
            let diff = (cur[k] - prev[k]).abs().to_f64();
            diff <= opts.rel_tol * cur[k].abs().to_f64() + floors[k]
        });
        n = next_n;
        if converged {
            let eta =
                cur.into_iter().zip(&floors).map(|(e, &f)| if e.abs().to_f64() <= f { Dd::ZERO } else { e }).collect();
            return Ok(EtaBatch { eta, nodes_per_piece: n });
        }
        prev = cur;
    }
}

/// Signed `eta_k` for one degree.
pub fn eta_k(spec: &ActivationSpec, d: usize, k: usize) -> Result<f64> {
    Ok(eta_batch(spec, d, k, &EtaOptions::default())?.eta[k].to_f64())
}

/// Signed `eta_0..=eta_K`.
pub fn eta_all(spec: &ActivationSpec, d: usize, kmax: usize) -> Result<Vec<f64>> {
    Ok(eta_batch(spec, d, kmax, &EtaOptions::default())?.eta.iter().map(|e| e.to_f64()).collect())
}

/// `eta_k` from the `k`-th derivative form
/// `eta_k = Gamma(d/2) / (2^k Gamma(k + d/2)) E_{p_{d+2k}}[sigma^{(k)}]`,
/// available for `sin` and `cos`, whose derivatives are closed-form.
pub fn eta_smooth_derivative(spec: &ActivationSpec, d: usize, k: usize) -> Result<f64> {
    let phase = match spec.kind {
        ActivationKind::Sin => 0.0,
        ActivationKind::Cos => std::f64::consts::FRAC_PI_2,
        _ => return Err(domain!("derivative route implemented for sin and cos only, got {}", spec.kind)),
    };
    if d < 2 {
        return Err(domain!("eigenvalues need d >= 2, got {d}"));
    }
    // d^k/dx^k sin(x + phase) = sin(x + phase + k pi/2).
    let shift = Dd::new(spec.bias) + dd::FRAC_PI_2 * ((k % 4) as f64) + phase;
    let gamma = spec.gamma;
    let g = |t: Dd| (t * gamma + shift).sin() * Dd::new(gamma).powi(k as u32);
    let dk = d + 2 * k;
    let scale = Dd::new(gamma).powi(k as u32).to_f64();
    let mut n = 32;
    let mut prev = integrate_normalized(dk, &[], n, g)?;
    loop {
        n *= 2;
        let cur = integrate_normalized(dk, &[], n, g)?;
        let floor = 64.0 * dd::EPS * scale;
        if (cur - prev).abs().to_f64() <= 1e-14 * cur.abs().to_f64() + floor || n >= 4096 {
            let (d, kf) = (d as f64, k as f64);
            let log_pref = lgamma(d / 2.0) - kf * std::f64::consts::LN_2 - lgamma(kf + d / 2.0);
            return Ok(cur.to_f64() * log_pref.exp());
        }
        prev = cur;
    }
}

fn integrate_normalized<F: Fn(Dd) -> Dd>(d: usize, kinks: &[f64], n: usize, f: F) -> Result<Dd> {
    let rule = WeightedRule::build(d, kinks, n, true)?;
    Ok(rule.nodes.iter().zip(&rule.weights).map(|(t, w)| *w * f(*t)).sum())
}

/// Eigenvalues of the ReLU^alpha kernel from the analytic expression
///
/// ```text
/// eta_k = Gamma(alpha+1) / (sqrt(2 pi) 2^k) * Gamma(d/2) Gamma(k-alpha)
///         / (Gamma((k-alpha+1)/2) Gamma((k+d+alpha)/2))
/// ```
///
/// for `k >= alpha + 1` with `k - alpha` odd, and zero when `k - alpha` is even.
/// The overall constant is not reliable: only ratios across `k` are meaningful.
pub fn mu_relu_alpha_analytic(d: usize, k: usize, alpha: u32) -> Result<f64> {
    let a = alpha as usize;
    if k <= a {
        return Err(domain!("analytic ReLU^{alpha} eigenvalue needs k > alpha, got k = {k}"));
    }
    if d < 2 {
        return Err(domain!("eigenvalues need d >= 2, got {d}"));
    }
    if (k - a).is_multiple_of(2) {
        return Ok(0.0);
    }
    let (d, k, al) = (d as f64, k as f64, alpha as f64);
    let ln_eta = lgamma(al + 1.0) - 0.5 * (2.0 * std::f64::consts::PI).ln() - k * std::f64::consts::LN_2
        + lgamma(d / 2.0)
        + lgamma(k - al)
        - lgamma((k - al + 1.0) / 2.0)
        - lgamma((k + d + al) / 2.0);
    Ok((2.0 * ln_eta).exp())
}

/// Signed `eta_k` of `arctan(gamma t)` through the hypergeometric form
///
/// ```text
/// eta_k = (-1)^((k-1)/2) Gamma(k) Gamma(d/2) (gamma/2)^k / Gamma(k + d/2)
///         * 2F1(k/2, (k+1)/2; k + d/2; -gamma^2)
/// ```
///
/// Even degrees vanish. Only `b = 0` is supported.
pub fn eta_arctan_hypergeometric(d: usize, k: usize, gamma: f64, bias: f64) -> Result<f64> {
    if bias != 0.0 {
        return Err(domain!("hypergeometric arctan route holds only for b = 0, got b = {bias}"));
    }
    if d < 2 || !(gamma > 0.0) {
        return Err(domain!("need d >= 2 and gamma > 0 (d={d}, gamma={gamma})"));
    }
    if k.is_multiple_of(2) {
        return Ok(0.0);
    }
    let (df, kf) = (d as f64, k as f64);
    let ln_pref = lgamma(kf) + lgamma(df / 2.0) + kf * (gamma / 2.0).ln() - lgamma(kf + df / 2.0);
    let f = gauss_2f1(kf / 2.0, (kf + 1.0) / 2.0, kf + df / 2.0, -gamma * gamma)?;
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * ln_pref.exp() * f)
}

/// How the kernel trace `kappa(1) = E sigma(gamma v_1 + b)^2` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum TraceMethod {
    ClosedForm,
    Quadrature {
        nodes: usize,
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
    /// Sum of multiplicity-weighted eigenvalues over the computed degrees.
    DegreeSum,
}

/// Requested trace source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceRequest {
    /// Closed form when known, quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
    DegreeSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceEstimate {
    pub value: f64,
    /// Standard error for Monte Carlo, `None` for deterministic methods.
    pub stderr: Option<f64>,
    pub method: TraceMethod,
    #[serde(skip)]
    pub(crate) value_dd: Dd,
}

fn closed_form_trace(spec: &ActivationSpec, d: usize) -> Option<Dd> {
    if spec.bias != 0.0 {
        return None;
    }
    match spec.kind {
        ActivationKind::Step => Some(Dd::new(0.5)),
        ActivationKind::ReluAlpha => {
            // gamma^(2 alpha) / 2 * E[v_1^(2 alpha)], E[v_1^(2a)] = prod_{j<a} (2j+1)/(d+2j).
            let mut m = Dd::ONE;
            for j in 0..spec.alpha {
                let j = j as f64;
                m = m * (2.0 * j + 1.0) / (d as f64 + 2.0 * j);
            }
            Some(m * Dd::new(spec.gamma).powi(2 * spec.alpha) * 0.5)
        }
        _ => None,
    }
}

fn quadrature_trace(spec: &ActivationSpec, d: usize) -> Result<(Dd, usize)> {
    let kinks = spec.kink_points();
    let f = |t: Dd| spec.eval_dd(t).sqr();
    let mut n = 64;
    let mut prev = integrate_normalized(d, &kinks, n, f)?;
    loop {
        n *= 2;
        let cur = integrate_normalized(d, &kinks, n, f)?;
        if (cur - prev).abs().to_f64() <= 1e-15 * cur.abs().to_f64() + 1e-300 {
            return Ok((cur, n));
        }
        if n >= 1 << 15 {
            return Err(Error::Numeric(format!("trace quadrature for {spec} in d={d} did not converge")));
        }
        prev = cur;
    }
}

/// `kappa(1) = E_{v ~ uniform(S^{d-1})} sigma(gamma v_1 + b)^2`.
///
/// `DegreeSum` needs a spectrum and is rejected here.
pub fn kernel_trace(spec: &ActivationSpec, d: usize, request: TraceRequest) -> Result<TraceEstimate> {
    if d < 2 {
        return Err(domain!("kernel trace needs d >= 2, got {d}"));
    }
    let closed = closed_form_trace(spec, d);
    match (request, closed) {
        (TraceRequest::Auto, Some(v)) => {
            Ok(TraceEstimate { value: v.to_f64(), stderr: None, method: TraceMethod::ClosedForm, value_dd: v })
        }
        (TraceRequest::Auto, None) | (TraceRequest::Quadrature, _) => {
            let (v, nodes) = quadrature_trace(spec, d)?;
            Ok(TraceEstimate {
                value: v.to_f64(),
                stderr: None,
                method: TraceMethod::Quadrature { nodes },
                value_dd: v,
            })
        }
        (TraceRequest::MonteCarlo { samples, seed }, _) => {
            if samples < 2 {
                return Err(domain!("Monte Carlo trace needs at least 2 samples"));
            }
            let xs = sample_sphere(d, samples, seed)?;
            let vals: Vec<f64> = xs.iter().map(|x| spec.eval(x[0]).powi(2)).collect();
            let n = samples as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(TraceEstimate {
                value: mean,
                stderr: Some((var / n).sqrt()),
                method: TraceMethod::MonteCarlo { samples, seed },
                value_dd: Dd::new(mean),
            })
        }
        (TraceRequest::DegreeSum, _) => Err(domain!("degree-sum trace is only available from build_spectrum")),
    }
}

/// Settings for [`build_spectrum_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumOptions {
    /// Largest degree that may be computed.
    pub degree_cap: usize,
    /// Degrees are added until the largest eigenvalue among the last three
    /// degrees is at most `tail_ratio` times the `m_max`-th largest eigenvalue.
    pub tail_ratio: f64,
    pub trace: TraceRequest,
    pub eta: EtaOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { degree_cap: 2000, tail_ratio: 1e-3, trace: TraceRequest::Auto, eta: EtaOptions::default() }
    }
}

/// Degree-wise eigenvalues, multiplicities and trace of one kernel.
#[derive(Clone, Debug, Serialize)]
pub struct KernelSpectrum {
    pub dimension: usize,
    pub spec: ActivationSpec,
    /// Signed `eta_k`, `k = 0..=K`.
    pub eta: Vec<f64>,
    /// `mu_k = eta_k^2`.
    pub mu: Vec<f64>,
    pub mult: Vec<u64>,
    pub trace: f64,
    pub trace_stderr: Option<f64>,
    pub trace_method: TraceMethod,
    /// `trace - sum_k N(d,k) mu_k` over the computed degrees.
    pub residual: f64,
    pub m_max: usize,
    pub options: SpectrumOptions,
    pub nodes_per_piece: usize,
    #[serde(skip)]
    mu_dd: Vec<Dd>,
    #[serde(skip)]
    trace_dd: Dd,
}

impl KernelSpectrum {
    pub fn max_degree(&self) -> usize {
        self.mu.len() - 1
    }

    /// Number of eigenvalues (with multiplicity) covered by the computed degrees.
    pub fn total_count(&self) -> u128 {
        self.mult.iter().map(|&n| n as u128).sum()
    }

    /// `(degree, mu, multiplicity)` sorted by `mu` descending, lower degree first on ties.
    pub fn sorted_blocks(&self) -> Vec<(usize, f64, u64)> {
        self.sorted_degrees().into_iter().map(|k| (k, self.mu[k], self.mult[k])).collect()
    }

    fn sorted_degrees(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.mu.len()).collect();
        order.sort_by(|&a, &b| self.mu_dd[b].partial_cmp(&self.mu_dd[a]).expect("finite eigenvalues").then(a.cmp(&b)));
        order
    }

    /// Cumulative count and energy `sum_{j<=k} N(d,j) mu_j` per degree.
    pub fn cumulative(&self) -> Vec<(u128, f64)> {
        let mut count = 0u128;
        let mut energy = Dd::ZERO;
        self.mult
            .iter()
            .zip(&self.mu_dd)
            .map(|(&n, &mu)| {
                count += n as u128;
                energy += mu * n as f64;
                (count, energy.to_f64())
            })
            .collect()
    }

    /// The `m` largest eigenvalues with multiplicity, descending.
    pub fn top_eigenvalues(&self, m: usize) -> Result<Vec<f64>> {
        self.check_count(m)?;
        let mut out = Vec::with_capacity(m);
        for (_, mu, n) in self.sorted_blocks() {
            for _ in 0..n {
                if out.len() == m {
                    return Ok(out);
                }
                out.push(mu);
            }
        }
        Ok(out)
    }

    fn check_count(&self, m: usize) -> Result<()> {
        if m as u128 > self.total_count() {
            return Err(Error::Stale(format!(
                "m = {m} exceeds the {} eigenvalues computed (degrees 0..={}); rebuild with m_max >= {m}",
                self.total_count(),
                self.max_degree()
            )));
        }
        Ok(())
    }
}

fn choose_start_degree(d: usize, m_max: usize, cap: usize) -> Result<usize> {
    let mut cum: u128 = 0;
    for k in 0..=cap {
        cum += harmonic_dim(d, k)? as u128;
        if cum >= m_max as u128 {
            return Ok(k);
        }
    }
    Err(Error::Resource(format!("m_max = {m_max} needs more than the degree cap {cap} in d = {d}")))
}

/// `m`-th largest eigenvalue among degree blocks.
fn mth_largest(mu: &[Dd], mult: &[u64], m: usize) -> Dd {
    let mut blocks: Vec<(Dd, u64)> = mu.iter().copied().zip(mult.iter().copied()).collect();
    blocks.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    let mut seen = 0u128;
    for (v, n) in blocks {
        seen += n as u128;
        if seen >= m as u128 {
            return v;
        }
    }
    Dd::ZERO
}

/// Spectrum with default options.
pub fn build_spectrum(spec: &ActivationSpec, d: usize, m_max: usize) -> Result<KernelSpectrum> {
    build_spectrum_with(spec, d, m_max, &SpectrumOptions::default())
}

/// Computes `mu_k` for `k = 0..=K`, where `K` covers at least `m_max`
/// eigenvalues and is extended until the tail criterion in `opts` holds.
pub fn build_spectrum_with(
    spec: &ActivationSpec,
    d: usize,
    m_max: usize,
    opts: &SpectrumOptions,
) -> Result<KernelSpectrum> {
    if m_max == 0 {
        return Err(domain!("m_max must be at least 1"));
    }
    if d < 2 {
        return Err(domain!("spectrum needs d >= 2, got {d}"));
    }
    let mut kmax = choose_start_degree(d, m_max, opts.degree_cap)?;
    let (batch, mult) = loop {
        let batch = eta_batch(spec, d, kmax, &opts.eta)?;
        let mult: Vec<u64> = (0..=kmax).map(|k| harmonic_dim(d, k)).collect::<Result<_>>()?;
        let mu: Vec<Dd> = batch.eta.iter().map(|e| e.sqr()).collect();
        let lam = mth_largest(&mu, &mult, m_max);
        let trailing = mu[kmax.saturating_sub(2)..].iter().copied().fold(Dd::ZERO, |a, b| if b > a { b } else { a });
        if trailing.to_f64() <= opts.tail_ratio * lam.to_f64() {
            break (batch, mult);
        }
        let next = kmax + 3.max(kmax / 4);
        if next > opts.degree_cap {
            return Err(Error::Resource(format!(
                "spectrum of {spec} in d = {d} needs degrees beyond the cap {} for m_max = {m_max}",
                opts.degree_cap
            )));
        }
        kmax = next;
    };
    let mu_dd: Vec<Dd> = batch.eta.iter().map(|e| e.sqr()).collect();
    let partial: Dd = mu_dd.iter().zip(&mult).map(|(mu, &n)| *mu * n as f64).sum();
    let (trace_dd, trace_stderr, trace_method) = match opts.trace {
        TraceRequest::DegreeSum => (partial, None, TraceMethod::DegreeSum),
        req => {
            let t = kernel_trace(spec, d, req)?;
            (t.value_dd, t.stderr, t.method)
        }
    };
    Ok(KernelSpectrum {
        dimension: d,
        spec: *spec,
        eta: batch.eta.iter().map(|e| e.to_f64()).collect(),
        mu: mu_dd.iter().map(|m| m.to_f64()).collect(),
        mult,
        trace: trace_dd.to_f64(),
        trace_stderr,
        trace_method,
        residual: (trace_dd - partial).to_f64(),
        m_max,
        options: *opts,
        nodes_per_piece: batch.nodes_per_piece,
        mu_dd,
        trace_dd,
    })
}

/// `Lambda(m) = kappa(1) - (sum of the m largest eigenvalues)` on a set of `m`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceDecay {
    pub dimension: usize,
    pub spec: ActivationSpec,
    pub m_values: Vec<usize>,
    pub lambda_values: Vec<f64>,
    pub top_eigen_count_used: usize,
    pub trace: f64,
}

/// Evaluates `Lambda(m)` for each requested `m`. Values are clamped at zero.
pub fn trace_decay(ks: &KernelSpectrum, m_values: &[usize]) -> Result<TraceDecay> {
    let top = m_values.iter().copied().max().unwrap_or(0);
    ks.check_count(top)?;
    let order = ks.sorted_degrees();
    // Block boundaries in the expanded list, with the eigenvalue mass before each.
    let mut starts = Vec::with_capacity(order.len());
    let mut mass = Vec::with_capacity(order.len());
    let mut count = 0u128;
    let mut acc = Dd::ZERO;
    for &k in &order {
        starts.push(count);
        mass.push(acc);
        count += ks.mult[k] as u128;
        acc += ks.mu_dd[k] * ks.mult[k] as f64;
    }
    let lambda_values = m_values
        .iter()
        .map(|&m| {
            let m = m as u128;
            // Last block starting strictly before m; the remaining eigenvalues of
            // the prefix come from it.
            let b = starts.partition_point(|&s| s < m);
            let taken = if b == 0 {
                Dd::ZERO
            } else {
                let i = b - 1;
                mass[i] + ks.mu_dd[order[i]] * (m - starts[i]) as f64
            };
            let lam = ks.trace_dd - taken;
            lam.to_f64().max(0.0)
        })
        .collect();
    Ok(TraceDecay {
        dimension: ks.dimension,
        spec: ks.spec,
        m_values: m_values.to_vec(),
        lambda_values,
        top_eigen_count_used: top,
        trace: ks.trace,
    })
}

/// The `(gamma, b)` grid `gamma = r i/G`, `b = +-(r - gamma) j/G`, with `(r, 0)`
/// first, then by `gamma` descending, `|b|` ascending, `+b` before `-b`.
pub fn sup_grid(r: f64, grid_size: usize) -> Result<Vec<(f64, f64)>> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain!("radius r must be positive, got {r}"));
    }
    if grid_size == 0 {
        return Err(domain!("grid size must be at least 1"));
    }
    let g = grid_size;
    let mut pts = Vec::new();
    for i in (1..=g).rev() {
        let gamma = if i == g { r } else { r * i as f64 / g as f64 };
        for j in 0..=g {
            let b = (r - gamma) * j as f64 / g as f64;
            if j > 0 && b == 0.0 {
                continue;
            }
            pts.push((gamma, b));
            if b != 0.0 {
                pts.push((gamma, -b));
            }
        }
    }
    Ok(pts)
}

/// `Lambda_r(m)` over the grid of [`sup_grid`]. The grid maximum is a lower
/// bound on the true supremum.
#[derive(Clone, Debug, Serialize)]
pub struct SupTraceDecay {
    pub kind: ActivationKind,
    pub alpha: u32,
    pub dimension: usize,
    pub r: f64,
    pub grid: Vec<(f64, f64)>,
    pub m_values: Vec<usize>,
    pub per_point: Vec<TraceDecay>,
    pub sup_curve: Vec<f64>,
    pub argmax: Vec<(f64, f64)>,
}

impl SupTraceDecay {
    /// True when `(r, 0)` attains the grid maximum at every `m`.
    pub fn argmax_at_boundary(&self) -> bool {
        self.argmax.iter().all(|&(g, b)| g == self.r && b == 0.0)
    }
}

pub fn sup_trace_decay(
    kind: ActivationKind,
    alpha: u32,
    r: f64,
    d: usize,
    grid_size: usize,
    m_values: &[usize],
    opts: &SpectrumOptions,
) -> Result<SupTraceDecay> {
    let grid = sup_grid(r, grid_size)?;
    let m_max = m_values.iter().copied().max().unwrap_or(1).max(1);
    let per_point: Vec<TraceDecay> = grid
        .par_iter()
        .map(|&(gamma, b)| {
            let spec = ActivationSpec::new(kind, alpha, gamma, b)?;
            let ks = build_spectrum_with(&spec, d, m_max, opts)?;
            trace_decay(&ks, m_values)
        })
        .collect::<Result<_>>()?;
    let mut sup_curve = Vec::with_capacity(m_values.len());
    let mut argmax = Vec::with_capacity(m_values.len());
    for i in 0..m_values.len() {
        let mut best = 0;
        for (p, td) in per_point.iter().enumerate() {
            if td.lambda_values[i] > per_point[best].lambda_values[i] {
                best = p;
            }
        }
        sup_curve.push(per_point[best].lambda_values[i]);
        argmax.push(grid[best]);
    }
    let spec = ActivationSpec::new(kind, alpha, r, 0.0)?;
    Ok(SupTraceDecay {
        kind: spec.kind,
        alpha: spec.alpha,
        dimension: d,
        r,
        grid,
        m_values: m_values.to_vec(),
        per_point,
        sup_curve,
        argmax,
    })
}

/// Default grid for [`fourier_oracle_d2`].
pub const FOURIER_GRID: usize = 1 << 16;

/// Signed `eta_k`, `k = 0..=K`, on the circle from the cosine series of
/// `theta -> sigma(gamma cos(theta) + b)`.
///
/// Uses the midpoint grid `theta_j = 2 pi (j + 1/2)/N` with one Richardson
/// step between `N/2` and `N`. Jumps of the step activation at `b = 0` fall
/// on cell boundaries, where the error expansion is in even powers of `1/N`;
/// for kinks elsewhere convergence is first order.
pub fn fourier_eta_d2(spec: &ActivationSpec, kmax: usize, n_grid: usize) -> Result<Vec<f64>> {
    if n_grid < 4 * kmax.max(1) {
        return Err(domain!("grid of {n_grid} points aliases degree {kmax}; need at least {}", 4 * kmax.max(1)));
    }
    if !n_grid.is_multiple_of(8) {
        return Err(domain!("grid size must be a multiple of 8, got {n_grid}"));
    }
    let fine = cosine_coefficients(spec, kmax, n_grid);
    let coarse = cosine_coefficients(spec, kmax, n_grid / 2);
    Ok(fine
        .iter()
        .zip(&coarse)
        .enumerate()
        .map(|(k, (f, c))| {
            let a = (4.0 * f - c) / 3.0;
            if k == 0 {
                a
            } else {
                a / 2.0
            }
        })
        .collect())
}

/// Per-harmonic eigenvalues `mu_k` on the circle: `eta_0^2` for `k = 0` and
/// half the band energy `(a_k/2)^2` for `k >= 1`.
pub fn fourier_oracle_d2(spec: &ActivationSpec, kmax: usize, n_grid: usize) -> Result<Vec<f64>> {
    Ok(fourier_eta_d2(spec, kmax, n_grid)?.into_iter().map(|e| e * e).collect())
}

/// `a_0 = mean(f)`, `a_k = (2/N) sum_j f(theta_j) cos(k theta_j)`.
fn cosine_coefficients(spec: &ActivationSpec, kmax: usize, n: usize) -> Vec<f64> {
    // cos(k theta_j) = cos(2 pi k (2j+1) / (2N)), tabulated over 2N angles.
    let two_n = 2 * n;
    let table: Vec<f64> = (0..two_n).map(|i| (2.0 * std::f64::consts::PI * i as f64 / two_n as f64).cos()).collect();
    let samples: Vec<f64> = (0..n).map(|j| spec.eval(table[2 * j + 1])).collect();
    (0..=kmax)
        .into_par_iter()
        .map(|k| {
            let mut acc = Dd::ZERO;
            for (j, &f) in samples.iter().enumerate() {
                let idx = (k * (2 * j + 1)) % two_n;
                acc += Dd::new(f) * table[idx];
            }
            let scale = if k == 0 { 1.0 } else { 2.0 };
            (acc * scale / n as f64).to_f64()
        })
        .collect()
}
