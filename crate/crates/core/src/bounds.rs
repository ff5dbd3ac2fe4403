//! Reference rate curves for `Lambda(m)` and the Kolmogorov width.
//!
//! Hidden absolute constants are set to 1 unless stated otherwise; such curves
//! are reference slopes, not certified bounds.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::mathcore::special::lgamma;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurve {
    pub label: String,
    pub d: usize,
    /// `alpha` for ReLU^alpha curves, `r` for the arctan curve, 0 otherwise.
    pub alpha_or_r: f64,
    pub m_values: Vec<usize>,
    pub values: Vec<f64>,
    pub direction: Direction,
    pub validity: String,
}

fn check_m(m_values: &[usize]) -> Result<()> {
    if m_values.contains(&0) {
        return Err(domain!("rate curves are defined for m >= 1"));
    }
    Ok(())
}

/// `C m^{-(2 alpha + 1)/(d - 1)}` with `C = 1/d` for the step activation
/// and `C = 1` otherwise.
pub fn relu_alpha_lower(d: usize, alpha: u32, m_values: &[usize]) -> Result<BoundCurve> {
    if d < 3 {
        return Err(domain!("relu_alpha_lower requires d >= 3, got {d}"));
    }
    check_m(m_values)?;
    let expo = (2.0 * alpha as f64 + 1.0) / (d as f64 - 1.0);
    let c = if alpha == 0 { 1.0 / d as f64 } else { 1.0 };
    let validity = if alpha == 0 {
        "constant 1/d as stated; asymptotic argument, not pointwise".to_string()
    } else {
        "reference slope; constant uncertified".to_string()
    };
    Ok(BoundCurve {
        label: format!("relu{alpha}_lower"),
        d,
        alpha_or_r: alpha as f64,
        m_values: m_values.to_vec(),
        values: m_values.iter().map(|&m| c * (m as f64).powf(-expo)).collect(),
        direction: Direction::Lower,
        validity,
    })
}

/// `d / m` for smooth activations.
pub fn smooth_upper(d: usize, m_values: &[usize]) -> Result<BoundCurve> {
    if d < 2 {
        return Err(domain!("smooth_upper requires d >= 2, got {d}"));
    }
    check_m(m_values)?;
    Ok(BoundCurve {
        label: "smooth_upper".into(),
        d,
        alpha_or_r: 0.0,
        m_values: m_values.to_vec(),
        values: m_values.iter().map(|&m| d as f64 / m as f64).collect(),
        direction: Direction::Upper,
        validity: "reference slope; absolute constant hidden".into(),
    })
}

/// `d^4 r^2 / m^{min(1/2, r^{-2})}` for `arctan` with `gamma + |b| <= r`.
pub fn arctan_upper(d: usize, r: f64, m_values: &[usize]) -> Result<BoundCurve> {
    if !(r > 0.0) {
        return Err(domain!("arctan_upper requires r > 0, got {r}"));
    }
    check_m(m_values)?;
    let expo = arctan_exponent(r);
    let pre = (d as f64).powi(4) * r * r;
    Ok(BoundCurve {
        label: "arctan_upper".into(),
        d,
        alpha_or_r: r,
        m_values: m_values.to_vec(),
        values: m_values.iter().map(|&m| pre * (m as f64).powf(-expo)).collect(),
        direction: Direction::Upper,
        validity: "reference slope; absolute constant hidden".into(),
    })
}

/// `min(1/2, r^{-2})`.
pub fn arctan_exponent(r: f64) -> f64 {
    (1.0 / (r * r)).min(0.5)
}

/// `sup_k L(k) / L((d+1) k)` for the power law `L(m) = m^{-s}`, i.e. `(d+1)^s`.
pub fn q_factor(power_s: f64, d: usize) -> Result<f64> {
    if !(power_s >= 0.0) {
        return Err(domain!("q_factor requires s >= 0, got {power_s}"));
    }
    Ok((d as f64 + 1.0).powf(power_s))
}

/// `B_k^2 / 2^{2k} * Gamma(d/2)^2 / Gamma(k + d/2)^2`, the bound on `mu_k`
/// for a smooth activation with `sup |sigma^{(k)}| <= B_k`.
pub fn smooth_mu_upper(d: usize, k: usize, b_k: f64) -> Result<f64> {
    if !(b_k > 0.0) {
        return Err(domain!("B_k must be positive, got {b_k}"));
    }
    if d < 2 {
        return Err(domain!("smooth_mu_upper requires d >= 2, got {d}"));
    }
    let (d, k) = (d as f64, k as f64);
    let ln = 2.0 * (b_k.ln() - k * std::f64::consts::LN_2 + lgamma(d / 2.0) - lgamma(k + d / 2.0));
    Ok(ln.exp())
}

/// The default derivative bound `B_k = Gamma(k + 1)`.
pub fn default_derivative_bound(k: usize) -> f64 {
    lgamma(k as f64 + 1.0).exp()
}

/// Regime notes for lower bounds on smooth activations at large `r`, whose
/// constants are only known to exist. No curve is produced for them.
pub fn large_r_regime_notes() -> [&'static str; 2] {
    [
        "smooth sigma, r >= d^C1(beta): Lambda_r(m) bounded below by a power of 1/d for m up to exp(d); constant existential",
        "ReLU^alpha emulation with gamma ~ d^alpha: width lower bound inherits the ReLU^alpha rate; constants existential",
    ]
}
