//! Gamma-family special functions, sphere areas and the Gauss hypergeometric
//! function on the domain of its Euler integral.

use crate::dd::{self, Dd};
use crate::error::{domain, Error, Result};
use crate::mathcore::quadrature::jacobi_rule;

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain!("log_gamma requires a finite positive argument, got {x}"));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

pub(crate) fn lgamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln B(a, b)` for `a, b > 0`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Surface area `omega_{d-1} = 2 pi^{d/2} / Gamma(d/2)` of the unit sphere in `R^d`.
pub fn surface_area(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(domain!("surface_area requires d >= 1"));
    }
    let h = d as f64 / 2.0;
    Ok((std::f64::consts::LN_2 + h * std::f64::consts::PI.ln() - lgamma(h)).exp())
}

/// `omega_{d-2} / omega_{d-1} = 1 / B(1/2, (d-1)/2)`, the Funk-Hecke prefactor.
pub fn funk_hecke_factor(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(domain!("funk_hecke_factor requires d >= 2"));
    }
    Ok(beta_half_integer(0.5, (d as f64 - 1.0) / 2.0).recip().to_f64())
}

/// `B(a, b)` for positive half-integer arguments, exact to double-double
/// precision. Uses `B(a, b) = B(a, b - 1) (b - 1) / (a + b - 1)` down to the
/// base cases `B(1/2, 1/2) = pi`, `B(1/2, 1) = 2`, `B(1, 1) = 1`.
pub(crate) fn beta_half_integer(a: f64, b: f64) -> Dd {
    debug_assert!(a > 0.0 && b > 0.0);
    debug_assert!((2.0 * a).fract() == 0.0 && (2.0 * b).fract() == 0.0);
    let mut a = a;
    let mut b = b;
    let mut acc = Dd::ONE;
    while b > 1.0 {
        acc = acc * (b - 1.0) / (a + b - 1.0);
        b -= 1.0;
    }
    while a > 1.0 {
        acc = acc * (a - 1.0) / (a + b - 1.0);
        a -= 1.0;
    }
    let base = match (a == 0.5, b == 0.5) {
        (true, true) => dd::PI,
        (true, false) | (false, true) => Dd::new(2.0),
        (false, false) => Dd::ONE,
    };
    acc * base
}

const F21_REL_TOL: f64 = 1e-13;
const F21_MAX_NODES: usize = 1 << 12;

/// Gauss hypergeometric function `2F1(p, q; u; z)` evaluated through Euler's
/// integral
///
/// ```text
/// 2F1(p,q;u;z) = Gamma(u) / (Gamma(q) Gamma(u-q)) * int_0^1 t^(q-1) (1-t)^(u-q-1) (1-zt)^(-p) dt
/// ```
///
/// The endpoint factors are absorbed into a Gauss-Jacobi weight and the rule
/// is doubled until two successive values agree. Only the domain of the
/// integral (`u > q > 0`, `z < 1`) is accepted; no analytic continuation.
pub fn gauss_2f1(p: f64, q: f64, u: f64, z: f64) -> Result<f64> {
    if !(q > 0.0 && u > q) || !(z < 1.0) || !p.is_finite() || !z.is_finite() {
        return Err(domain!("2F1 integral representation needs u > q > 0 and z < 1 (p={p}, q={q}, u={u}, z={z})"));
    }
    if z == 0.0 || p == 0.0 {
        return Ok(1.0);
    }
    // t = (1 + x)/2 maps the Beta weight onto the Jacobi weight
    // (1-x)^(u-q-1) (1+x)^(q-1) with Jacobian 2^(1-u).
    let alpha = u - q - 1.0;
    let beta = q - 1.0;
    let log_norm = lgamma(u) - lgamma(q) - lgamma(u - q) + (1.0 - u) * std::f64::consts::LN_2;
    let eval = |n: usize| -> Result<f64> {
        let rule = jacobi_rule(n, alpha, beta)?;
        let s: Dd = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| {
                let t = (*x + 1.0).scale(0.5);
                let base = Dd::ONE - t * z;
                *w * (base.ln() * (-p)).exp()
            })
            .sum();
        Ok(s.to_f64() * log_norm.exp())
    };
    let mut n = 32;
    let mut prev = eval(n)?;
    loop {
        n *= 2;
        let cur = eval(n)?;
        if (cur - prev).abs() <= F21_REL_TOL * cur.abs() {
            return Ok(cur);
        }
        if n >= F21_MAX_NODES {
            return Err(Error::Numeric(format!(
                "2F1({p},{q};{u};{z}) did not converge with {n} nodes (last change {:e})",
                (cur - prev).abs()
            )));
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(log_gamma(0.5).unwrap(), std::f64::consts::PI.sqrt().ln(), max_relative = 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn log_gamma_extremes_against_series() {
        // Stirling with four correction terms is exact to ~1e-25 at 1e6.
        let x: f64 = 1e6;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert_relative_eq!(log_gamma(x).unwrap(), stirling, max_relative = 1e-12);
        // ln Gamma(x) = -ln x - euler_gamma x + zeta(2)/2 x^2 + O(x^3).
        let x: f64 = 1e-3;
        let approx = -x.ln() - 0.577_215_664_901_532_9 * x + std::f64::consts::PI.powi(2) / 12.0 * x * x;
        assert_relative_eq!(log_gamma(x).unwrap(), approx, max_relative = 1e-8);
    }

    #[test]
    fn surface_areas() {
        assert_relative_eq!(surface_area(2).unwrap(), 2.0 * std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(surface_area(3).unwrap(), 4.0 * std::f64::consts::PI, max_relative = 1e-14);
        let ratio = surface_area(2).unwrap() / surface_area(3).unwrap();
        assert_relative_eq!(ratio, 0.5, max_relative = 1e-14);
        assert_relative_eq!(funk_hecke_factor(3).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn half_integer_beta_matches_gamma_route() {
        for &(a, b) in &[(0.5, 0.5), (0.5, 4.0), (3.5, 2.0), (12.5, 12.5), (1.0, 7.5)] {
            let exact = beta_half_integer(a, b).to_f64();
            let via_lgamma = log_beta(a, b).unwrap().exp();
            assert_relative_eq!(exact, via_lgamma, max_relative = 1e-13);
        }
    }

    /// Power-series oracle for |z| < 1.
    fn f21_series(p: f64, q: f64, u: f64, z: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..100_000 {
            let n = n as f64;
            term *= (p + n) * (q + n) / ((u + n) * (n + 1.0)) * z;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    }

    #[test]
    fn f21_zero_argument_is_one() {
        assert_eq!(gauss_2f1(0.3, 1.2, 3.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn f21_log_identity() {
        let v = gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert_relative_eq!(v, 2.0 * 2f64.ln(), max_relative = 1e-10);
        assert_relative_eq!(v, f21_series(1.0, 1.0, 2.0, 0.5), max_relative = 1e-10);
    }

    #[test]
    fn f21_alternating_series() {
        // z = -1 sits on the boundary of the series; average consecutive
        // partial sums of the alternating tail to accelerate it.
        let (p, q, u) = (0.5, 1.0, 2.0);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut prev = 0.0;
        for n in 0..2_000_000 {
            let nf = n as f64;
            term *= -((p + nf) * (q + nf) / ((u + nf) * (nf + 1.0)));
            prev = sum;
            sum += term;
        }
        let oracle = 0.5 * (sum + prev);
        // Closed form: 2F1(1/2,1;2;z) = 2(1 - sqrt(1-z))/z at z=-1 gives 2(sqrt2 - 1).
        let closed = 2.0 * (2f64.sqrt() - 1.0);
        assert_relative_eq!(oracle, closed, max_relative = 1e-10);
        assert_relative_eq!(gauss_2f1(p, q, u, -1.0).unwrap(), oracle, max_relative = 1e-10);
    }

    #[test]
    fn f21_half_integer_parameters() {
        for &(p, q, u, z) in &[(2.5, 3.0, 13.5, -0.8), (0.5, 1.5, 4.0, 0.9), (7.0, 8.0, 20.0, -0.5)] {
            assert_relative_eq!(gauss_2f1(p, q, u, z).unwrap(), f21_series(p, q, u, z), max_relative = 1e-10);
        }
    }

    #[test]
    fn f21_rejects_outside_integral_domain() {
        assert!(gauss_2f1(1.0, 2.0, 1.5, 0.1).is_err());
        assert!(gauss_2f1(1.0, 0.0, 1.5, 0.1).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, 3.0).is_err());
    }
}
