//! Legendre polynomials of dimension `d` (Gegenbauer polynomials normalized
//! so that `P_k(1) = 1`) and the dimension of degree-`k` spherical harmonics.

use crate::dd::Dd;
use crate::error::{domain, Error, Result};
use crate::mathcore::special::lgamma;

/// Evaluates `P_0..=P_K` in dimension `d` by the three-term recurrence
///
/// ```text
/// P_k(t) = (2k+d-4)/(k+d-3) t P_{k-1}(t) - (k-1)/(k+d-3) P_{k-2}(t),  P_0 = 1, P_1 = t.
/// ```
#[derive(Clone, Debug)]
pub struct LegendreEvaluator {
    dimension: usize,
    max_degree: usize,
    // (a_k, b_k) for k >= 2, index k - 2.
    coeffs: Vec<(f64, f64)>,
    coeffs_dd: Vec<(Dd, Dd)>,
}

impl LegendreEvaluator {
    pub fn new(dimension: usize, max_degree: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(domain!("Legendre polynomials need d >= 2, got {dimension}"));
        }
        let d = dimension as f64;
        let mut coeffs = Vec::with_capacity(max_degree.saturating_sub(1));
        let mut coeffs_dd = Vec::with_capacity(max_degree.saturating_sub(1));
        for k in 2..=max_degree {
            let k = k as f64;
            let den = Dd::new(k + d - 3.0).recip();
            let a = den * (2.0 * k + d - 4.0);
            let b = den * (k - 1.0);
            coeffs.push((a.to_f64(), b.to_f64()));
            coeffs_dd.push((a, b));
        }
        Ok(Self { dimension, max_degree, coeffs, coeffs_dd })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `P_k(t)`.
    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        if k > self.max_degree {
            return Err(domain!("degree {k} exceeds evaluator maximum {}", self.max_degree));
        }
        if !(-1.0..=1.0).contains(&t) {
            return Err(domain!("Legendre argument {t} outside [-1, 1]"));
        }
        let mut out = vec![0.0; k + 1];
        self.fill(t, &mut out);
        Ok(out[k])
    }

    /// All values `P_0(t)..=P_K(t)`.
    pub fn eval_all(&self, t: f64) -> Result<Vec<f64>> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(domain!("Legendre argument {t} outside [-1, 1]"));
        }
        let mut out = vec![0.0; self.max_degree + 1];
        self.fill(t, &mut out);
        Ok(out)
    }

    /// Writes `P_0(t)..` into `out`, for as many degrees as `out` holds
    /// (at most `K + 1`). Exact at `t = +-1`.
    pub fn fill(&self, t: f64, out: &mut [f64]) {
        let n = out.len().min(self.max_degree + 1);
        if t == 1.0 || t == -1.0 {
            for (k, v) in out.iter_mut().take(n).enumerate() {
                *v = if t < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
            }
            return;
        }
        if n > 0 {
            out[0] = 1.0;
        }
        if n > 1 {
            out[1] = t;
        }
        for k in 2..n {
            let (a, b) = self.coeffs[k - 2];
            out[k] = a * t * out[k - 1] - b * out[k - 2];
        }
    }

    /// Double-double version of [`fill`](Self::fill).
    pub(crate) fn fill_dd(&self, t: Dd, out: &mut [Dd]) {
        let n = out.len().min(self.max_degree + 1);
        if t.hi.abs() == 1.0 && t.lo == 0.0 {
            for (k, v) in out.iter_mut().take(n).enumerate() {
                *v = if t.hi < 0.0 && k % 2 == 1 { -Dd::ONE } else { Dd::ONE };
            }
            return;
        }
        if n > 0 {
            out[0] = Dd::ONE;
        }
        if n > 1 {
            out[1] = t;
        }
        for k in 2..n {
            let (a, b) = self.coeffs_dd[k - 2];
            out[k] = a * t * out[k - 1] - b * out[k - 2];
        }
    }
}

fn binomial(n: u64, r: u64) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r as u128 {
        // acc * (n - r + i) is divisible by i after the multiply.
        acc = acc.checked_mul(n as u128 - r as u128 + i)? / i;
    }
    Some(acc)
}

/// Dimension `N(d, k)` of the space of degree-`k` spherical harmonics in `d`
/// variables, computed exactly as `C(k+d-1, d-1) - C(k+d-3, d-1)`.
pub fn harmonic_dim(d: usize, k: usize) -> Result<u64> {
    if d < 2 {
        return Err(domain!("harmonic_dim requires d >= 2, got {d}"));
    }
    if k == 0 {
        return Ok(1);
    }
    let overflow = || Error::Overflow(format!("N({d}, {k}) does not fit in 64 bits"));
    let (d64, k64) = (d as u64, k as u64);
    let top = binomial(k64 + d64 - 1, d64 - 1).ok_or_else(overflow)?;
    let low = if k >= 2 { binomial(k64 + d64 - 3, d64 - 1).ok_or_else(overflow)? } else { 0 };
    u64::try_from(top - low).map_err(|_| overflow())
}

/// `ln N(d, k)`, usable where `N(d, k)` itself overflows.
pub fn ln_harmonic_dim(d: usize, k: usize) -> Result<f64> {
    if d < 2 {
        return Err(domain!("ln_harmonic_dim requires d >= 2, got {d}"));
    }
    if k == 0 {
        return Ok(0.0);
    }
    if d == 2 {
        return Ok(std::f64::consts::LN_2);
    }
    let (d, k) = (d as f64, k as f64);
    Ok(((2.0 * k + d - 2.0) / k).ln() + lgamma(k + d - 2.0) - lgamma(d - 1.0) - lgamma(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::quadrature::gauss_jacobi;
    use crate::mathcore::special::surface_area;
    use proptest::prelude::*;

    #[test]
    fn low_degree_values() {
        let ev = LegendreEvaluator::new(3, 6).unwrap();
        assert_eq!(ev.eval(0, 0.3).unwrap(), 1.0);
        assert_eq!(ev.eval(1, 0.3).unwrap(), 0.3);
        assert!((ev.eval(2, 0.5).unwrap() + 0.125).abs() < 1e-16);
        let p4_pos = LegendreEvaluator::new(7, 4).unwrap().eval(4, 0.3).unwrap();
        let p4_neg = LegendreEvaluator::new(7, 4).unwrap().eval(4, -0.3).unwrap();
        assert_eq!(p4_pos, p4_neg);
    }

    #[test]
    fn circle_gives_chebyshev() {
        let ev = LegendreEvaluator::new(2, 12).unwrap();
        for &t in &[-0.9, -0.2, 0.0, 0.41, 0.77] {
            let theta = f64::acos(t);
            for k in 0..=12 {
                let want = (k as f64 * theta).cos();
                assert!((ev.eval(k, t).unwrap() - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let ev = LegendreEvaluator::new(4, 3).unwrap();
        assert!(ev.eval(4, 0.0).is_err());
        assert!(ev.eval(1, 1.5).is_err());
        assert!(LegendreEvaluator::new(1, 3).is_err());
    }

    #[test]
    fn harmonic_dims() {
        for d in 2..30 {
            assert_eq!(harmonic_dim(d, 0).unwrap(), 1);
            assert_eq!(harmonic_dim(d, 1).unwrap(), d as u64);
        }
        for k in 0..50 {
            assert_eq!(harmonic_dim(3, k).unwrap(), 2 * k as u64 + 1);
            if k > 0 {
                assert_eq!(harmonic_dim(2, k).unwrap(), 2);
            }
        }
        // N(4, k) = (k+1)^2.
        assert_eq!(harmonic_dim(4, 9).unwrap(), 100);
        assert!(matches!(harmonic_dim(400, 400), Err(Error::Overflow(_))));
    }

    #[test]
    fn log_dimension_matches_exact() {
        for d in [2, 3, 5, 10, 20, 50] {
            for k in 0..25 {
                let exact = harmonic_dim(d, k).unwrap() as f64;
                let ln = ln_harmonic_dim(d, k).unwrap();
                assert!((ln.exp() / exact - 1.0).abs() < 1e-10, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn orthogonality_small() {
        for d in [3, 6] {
            let ev = LegendreEvaluator::new(d, 12).unwrap();
            let rule = gauss_jacobi(20, d, false).unwrap();
            let ratio = surface_area(d).unwrap() / surface_area(d - 1).unwrap();
            for j in 0..=12 {
                for k in 0..=12 {
                    let ip = rule.integrate(|t| ev.eval(j, t).unwrap() * ev.eval(k, t).unwrap());
                    let want = if j == k { ratio / harmonic_dim(d, k).unwrap() as f64 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-13, "d={d} j={j} k={k}: {ip} vs {want}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_unit_at_one_and_parity(d in 2usize..60, t in -1.0f64..=1.0) {
            let ev = LegendreEvaluator::new(d, 40).unwrap();
            let pos = ev.eval_all(t).unwrap();
            let neg = ev.eval_all(-t).unwrap();
            let one = ev.eval_all(1.0).unwrap();
            for k in 0..=40 {
                prop_assert!(pos[k].abs() <= 1.0 + 1e-12);
                prop_assert_eq!(one[k], 1.0);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert!((neg[k] - sign * pos[k]).abs() <= 1e-14);
            }
        }

        #[test]
        fn dd_recurrence_agrees_with_f64(d in 2usize..30, t in -1.0f64..=1.0) {
            let ev = LegendreEvaluator::new(d, 25).unwrap();
            let f = ev.eval_all(t).unwrap();
            let mut g = vec![Dd::ZERO; 26];
            ev.fill_dd(Dd::new(t), &mut g);
            for k in 0..=25 {
                prop_assert!((f[k] - g[k].to_f64()).abs() < 1e-13);
            }
        }
    }
}
