//! Gauss-Jacobi rules and kink-aware integration against the sphere-coordinate
//! weight `(1 - t^2)^((d-3)/2)` on `[-1, 1]`.
//!
//! Nodes start from the eigenvalues of the Jacobi matrix (Golub-Welsch) and
//! are then polished by Newton's method on the three-term recurrence in
//! double-double arithmetic. Weights come from the derivative formula, scaled
//! so that they reproduce the zeroth moment exactly.

use serde::Serialize;

use crate::dd::Dd;
use crate::error::{domain, Error, Result};
use crate::mathcore::special::{beta_half_integer, lgamma};

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method.
///
/// `off[i]` couples rows `i` and `i + 1`; its last entry is ignored.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numeric(format!(
                    "QL iteration did not converge for eigenvalue {l} of {n} (|e| = {:e})",
                    e[l].abs()
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// Gauss-Jacobi rule on `[-1, 1]` for the weight `(1-x)^alpha (1+x)^beta`,
/// in double-double precision.
#[derive(Clone, Debug)]
pub(crate) struct JacobiRule {
    pub nodes: Vec<Dd>,
    pub weights: Vec<Dd>,
}

fn is_half_integer(x: f64) -> bool {
    (2.0 * x).fract() == 0.0
}

/// `int_{-1}^{1} (1-x)^alpha (1+x)^beta dx`.
fn jacobi_zeroth_moment(alpha: f64, beta: f64) -> Dd {
    if is_half_integer(alpha) && is_half_integer(beta) {
        let scale = 2f64.powf(alpha + beta + 1.0);
        beta_half_integer(alpha + 1.0, beta + 1.0) * scale
    } else {
        let ln = (alpha + beta + 1.0) * std::f64::consts::LN_2 + lgamma(alpha + 1.0) + lgamma(beta + 1.0)
            - lgamma(alpha + beta + 2.0);
        Dd::new(ln.exp())
    }
}

pub(crate) fn jacobi_rule(n: usize, alpha: f64, beta: f64) -> Result<JacobiRule> {
    if n == 0 {
        return Err(domain!("a quadrature rule needs at least one node"));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(domain!("Jacobi exponents must exceed -1 (alpha={alpha}, beta={beta})"));
    }
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    diag[0] = (beta - alpha) / (ab + 2.0);
    for j in 1..n {
        let jf = j as f64;
        let c = 2.0 * jf + ab;
        diag[j] = (beta * beta - alpha * alpha) / (c * (c + 2.0));
        let b2 = if j == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * jf * (jf + alpha) * (jf + beta) * (jf + ab) / (c * c * (c + 1.0) * (c - 1.0))
        };
        off[j - 1] = b2.sqrt();
    }
    let guesses = tridiagonal_eigenvalues(&diag, &off)?;

    // Recurrence coefficients: P_k = (c1 + c2 x) P_{k-1} - c3 P_{k-2}.
    let mut coeffs = Vec::with_capacity(n.saturating_sub(1));
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + ab;
        let a1 = 2.0 * kf * (kf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * c;
        let inv = Dd::new(a1).recip();
        coeffs.push((inv * a2, inv * a3, inv * a4));
    }
    let nf = n as f64;
    let eval = |x: Dd| -> (Dd, Dd) {
        let mut p0 = Dd::ONE;
        let mut p1 = x * ((ab + 2.0) / 2.0) + (alpha - beta) / 2.0;
        if n == 1 {
            return (p1, p0);
        }
        for &(c1, c2, c3) in &coeffs {
            let p2 = (c1 + c2 * x) * p1 - c3 * p0;
            p0 = p1;
            p1 = p2;
        }
        (p1, p0)
    };
    let deriv = |x: Dd, pn: Dd, pm: Dd| -> Dd {
        let c = 2.0 * nf + ab;
        let lhs = (Dd::new(alpha - beta) - x * c) * pn * nf + pm * (2.0 * (nf + alpha) * (nf + beta));
        lhs / ((Dd::ONE - x.sqr()) * c)
    };

    let mut nodes = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for (i, &g) in guesses.iter().enumerate() {
        let mut x = Dd::new(g);
        let mut converged = false;
        for _ in 0..8 {
            let (pn, pm) = eval(x);
            let dp = deriv(x, pn, pm);
            let step = pn / dp;
            x -= step;
            if step.abs().hi <= 1e-32 {
                converged = true;
                break;
            }
        }
        if !converged || !(x.hi > -1.0 && x.hi < 1.0) {
            return Err(Error::Numeric(format!(
                "Newton polish of Jacobi node {i}/{n} (alpha={alpha}, beta={beta}) failed near {g}"
            )));
        }
        let (pn, pm) = eval(x);
        let dp = deriv(x, pn, pm);
        raw.push(((Dd::ONE - x.sqr()) * dp.sqr()).recip());
        nodes.push(x);
    }
    if alpha == beta {
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = (nodes[j] - nodes[i]).scale(0.5);
            let w = (raw[i] + raw[j]).scale(0.5);
            nodes[i] = -x;
            nodes[j] = x;
            raw[i] = w;
            raw[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = Dd::ZERO;
        }
    }
    let total: Dd = raw.iter().sum();
    let scale = jacobi_zeroth_moment(alpha, beta) / total;
    let weights = raw.into_iter().map(|w| w * scale).collect();
    Ok(JacobiRule { nodes, weights })
}

/// Exponent `(d-3)/2` of the sphere-coordinate weight.
pub fn weight_exponent(d: usize) -> f64 {
    (d as f64 - 3.0) / 2.0
}

/// An `n`-point Gauss rule for `(1-t^2)^((d-3)/2)` on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exponent: f64,
    /// Weights divided by `B(1/2, (d-1)/2)`, so they integrate the density `p_d`.
    pub normalized: bool,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let s: Dd = self.nodes.iter().zip(&self.weights).map(|(&t, &w)| Dd::new(w) * f(t)).sum();
        s.to_f64()
    }
}

/// Gauss-Jacobi rule with `n` nodes for dimension `d`, exact for polynomials
/// of degree `2n - 1` against `(1-t^2)^((d-3)/2)`.
pub fn gauss_jacobi(n: usize, d: usize, normalized: bool) -> Result<QuadratureRule> {
    if d < 2 {
        return Err(domain!("gauss_jacobi requires d >= 2, got {d}"));
    }
    let rule = WeightedRule::build(d, &[], n, normalized)?;
    Ok(QuadratureRule {
        nodes: rule.nodes.iter().map(|x| x.to_f64()).collect(),
        weights: rule.weights.iter().map(|w| w.to_f64()).collect(),
        exponent: weight_exponent(d),
        normalized,
    })
}

/// Piecewise Gauss rule for `int_{-1}^{1} f(t) (1-t^2)^e dt` with the interval
/// split at the given breakpoints. End pieces carry the singular factor of
/// the weight in their Jacobi weight; the other factor, analytic on the piece,
/// is folded into the node weights.
#[derive(Clone, Debug)]
pub(crate) struct WeightedRule {
    pub nodes: Vec<Dd>,
    pub weights: Vec<Dd>,
}

impl WeightedRule {
    pub fn build(d: usize, breakpoints: &[f64], n: usize, normalized: bool) -> Result<Self> {
        if d < 2 {
            return Err(domain!("weighted rule requires d >= 2, got {d}"));
        }
        validate_breakpoints(breakpoints)?;
        let e = weight_exponent(d);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        if breakpoints.is_empty() {
            let rule = jacobi_rule(n, e, e)?;
            nodes = rule.nodes;
            weights = rule.weights;
        } else {
            let mut edges = Vec::with_capacity(breakpoints.len() + 2);
            edges.push(-1.0);
            edges.extend_from_slice(breakpoints);
            edges.push(1.0);
            for win in edges.windows(2) {
                let (a, b) = (win[0], win[1]);
                let half = Dd::new(b) - a;
                let half = half.scale(0.5);
                let (alpha, beta) = match (a == -1.0, b == 1.0) {
                    (true, false) => (0.0, e),
                    (false, true) => (e, 0.0),
                    _ => (0.0, 0.0),
                };
                let rule = jacobi_rule(n, alpha, beta)?;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = Dd::new(a) + (*x + 1.0) * half;
                    let one_minus = Dd::ONE - t;
                    let one_plus = t + 1.0;
                    let extra = match (a == -1.0, b == 1.0) {
                        // (1+t)^e = half^e (1+x)^e is in the Jacobi weight.
                        (true, false) => half.pow_half_integer(e) * one_minus.pow_half_integer(e),
                        (false, true) => half.pow_half_integer(e) * one_plus.pow_half_integer(e),
                        _ => (one_minus * one_plus).pow_half_integer(e),
                    };
                    nodes.push(t);
                    weights.push(*w * half * extra);
                }
            }
        }
        if normalized {
            let inv = beta_half_integer(0.5, (d as f64 - 1.0) / 2.0).recip();
            for w in &mut weights {
                *w *= inv;
            }
        }
        Ok(WeightedRule { nodes, weights })
    }
}

fn validate_breakpoints(bp: &[f64]) -> Result<()> {
    for (i, &b) in bp.iter().enumerate() {
        if !(b > -1.0 && b < 1.0) {
            return Err(domain!("breakpoint {b} is not inside (-1, 1)"));
        }
        if i > 0 && bp[i - 1] >= b {
            return Err(domain!("breakpoints must be strictly increasing"));
        }
    }
    Ok(())
}

/// Result of [`integrate_weighted`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedIntegral {
    pub value: f64,
    /// `|I(2n) - I(n)|`; `value` is `I(2n)`.
    pub error_estimate: f64,
    pub nodes_per_piece: usize,
}

/// `int_{-1}^{1} f(t) (1-t^2)^((d-3)/2) dt` with the interval split at
/// `breakpoints` (typically the kinks of `f`).
pub fn integrate_weighted<F: Fn(f64) -> f64>(
    f: F,
    d: usize,
    breakpoints: &[f64],
    n: usize,
) -> Result<WeightedIntegral> {
    let run = |n: usize| -> Result<f64> {
        let rule = WeightedRule::build(d, breakpoints, n, false)?;
        let s: Dd = rule.nodes.iter().zip(&rule.weights).map(|(t, w)| *w * f(t.to_f64())).sum();
        Ok(s.to_f64())
    };
    let coarse = run(n)?;
    let fine = run(2 * n)?;
    Ok(WeightedIntegral { value: fine, error_estimate: (fine - coarse).abs(), nodes_per_piece: 2 * n })
}
