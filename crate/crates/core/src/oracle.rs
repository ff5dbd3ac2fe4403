//! Independent reference values used to cross-check the fast routes.

use crate::error::{domain, Error, Result};
use crate::mathcore::special::lgamma;

/// Coefficients (ascending powers) of `(1 - t^2)^n`.
fn one_minus_t2_pow(n: usize) -> Vec<i128> {
    let mut c = vec![0i128; 2 * n + 1];
    let mut binom: i128 = 1;
    for j in 0..=n {
        c[2 * j] = if j % 2 == 0 { binom } else { -binom };
        binom = binom * (n - j) as i128 / (j + 1) as i128;
    }
    c
}

fn differentiate(c: &[i128]) -> Result<Vec<i128>> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| a.checked_mul(i as i128).ok_or_else(|| Error::Overflow("Rodrigues coefficient".into())))
        .collect()
}

fn horner(c: &[i128], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a as f64)
}

/// `P_k(t)` from the Rodrigues formula
///
/// ```text
/// P_k(t) = (-1/2)^k Gamma((d-1)/2) / Gamma(k + (d-1)/2) (1-t^2)^((3-d)/2)
///          (d/dt)^k (1-t^2)^(k + (d-3)/2)
/// ```
///
/// with exact integer differentiation. Restricted to odd `d >= 3`, where the
/// differentiated power is a polynomial, and to `|t| < 1`.
pub fn rodrigues_legendre(d: usize, k: usize, t: f64) -> Result<f64> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(domain!("Rodrigues oracle needs odd d >= 3, got {d}"));
    }
    if !(t > -1.0 && t < 1.0) {
        return Err(domain!("Rodrigues oracle needs |t| < 1, got {t}"));
    }
    if k > 20 {
        return Err(domain!("Rodrigues oracle limited to k <= 20"));
    }
    let e = (d - 3) / 2;
    let mut poly = one_minus_t2_pow(k + e);
    for _ in 0..k {
        poly = differentiate(&poly)?;
    }
    let (df, kf) = (d as f64, k as f64);
    let ln_c = lgamma((df - 1.0) / 2.0) - lgamma(kf + (df - 1.0) / 2.0) - kf * std::f64::consts::LN_2;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * ln_c.exp() * horner(&poly, t) / (1.0 - t * t).powi(e as i32))
}
