//! Activation functions with the scale/bias transform `t -> sigma(gamma t + b)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    /// Heaviside step with `step(0) = 1`.
    Step,
    /// `max(0, t)^alpha`.
    ReluAlpha,
    Sigmoid,
    Arctan,
    Softplus,
    Silu,
    Sin,
    Cos,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 8] = [
        ActivationKind::Step,
        ActivationKind::ReluAlpha,
        ActivationKind::Sigmoid,
        ActivationKind::Arctan,
        ActivationKind::Softplus,
        ActivationKind::Silu,
        ActivationKind::Sin,
        ActivationKind::Cos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Step => "step",
            ActivationKind::ReluAlpha => "relu",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Arctan => "arctan",
            ActivationKind::Softplus => "softplus",
            ActivationKind::Silu => "silu",
            ActivationKind::Sin => "sin",
            ActivationKind::Cos => "cos",
        }
    }

    pub fn is_smooth(self) -> bool {
        !matches!(self, ActivationKind::Step | ActivationKind::ReluAlpha)
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "step" | "heaviside" => ActivationKind::Step,
            "relu" | "relu_alpha" => ActivationKind::ReluAlpha,
            "sigmoid" => ActivationKind::Sigmoid,
            "arctan" | "atan" => ActivationKind::Arctan,
            "softplus" => ActivationKind::Softplus,
            "silu" | "swish" => ActivationKind::Silu,
            "sin" => ActivationKind::Sin,
            "cos" => ActivationKind::Cos,
            other => return Err(Error::Parse(format!("unknown activation kind '{other}'"))),
        })
    }
}

/// An activation `sigma` together with the transform `(gamma, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    /// Power for `ReluAlpha`; zero for every other kind.
    pub alpha: u32,
    pub gamma: f64,
    pub bias: f64,
}

impl ActivationSpec {
    /// Validated constructor. `ReluAlpha` with `alpha = 0` becomes `Step`.
    pub fn new(kind: ActivationKind, alpha: u32, gamma: f64, bias: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(domain!("activation scale gamma must be positive and finite, got {gamma}"));
        }
        if !bias.is_finite() {
            return Err(domain!("activation bias must be finite, got {bias}"));
        }
        let (kind, alpha) = match kind {
            ActivationKind::ReluAlpha if alpha == 0 => (ActivationKind::Step, 0),
            ActivationKind::ReluAlpha => (kind, alpha),
            _ => (kind, 0),
        };
        Ok(Self { kind, alpha, gamma, bias })
    }

    pub fn step() -> Self {
        Self { kind: ActivationKind::Step, alpha: 0, gamma: 1.0, bias: 0.0 }
    }

    pub fn relu_alpha(alpha: u32) -> Self {
        Self::new(ActivationKind::ReluAlpha, alpha, 1.0, 0.0).expect("unit scale is valid")
    }

    pub fn smooth(kind: ActivationKind) -> Self {
        Self::new(kind, 0, 1.0, 0.0).expect("unit scale is valid")
    }

    /// Same activation with a different `(gamma, b)`.
    pub fn with_transform(self, gamma: f64, bias: f64) -> Result<Self> {
        Self::new(self.kind, self.alpha, gamma, bias)
    }

    /// `sigma(gamma t + b)`.
    pub fn eval(&self, t: f64) -> f64 {
        raw_eval(self.kind, self.alpha, self.gamma * t + self.bias)
    }

    /// `sigma(gamma t + b)` in double-double arithmetic.
    pub(crate) fn eval_dd(&self, t: Dd) -> Dd {
        raw_eval_dd(self.kind, self.alpha, t * self.gamma + self.bias)
    }

    /// Points in `(-1, 1)` where the transformed activation is not smooth.
    pub fn kink_points(&self) -> Vec<f64> {
        if self.kind.is_smooth() {
            return Vec::new();
        }
        let t = -self.bias / self.gamma;
        if t > -1.0 && t < 1.0 {
            vec![t]
        } else {
            Vec::new()
        }
    }

    /// True when `sigma` itself (before the transform) is odd.
    pub fn is_odd_kind(&self) -> bool {
        matches!(self.kind, ActivationKind::Arctan | ActivationKind::Sin)
    }
}

impl fmt::Display for ActivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.kind, self.alpha, self.gamma, self.bias)
    }
}

/// Parses `kind[:alpha[:gamma[:bias]]]`, e.g. `relu:1:1.0:0.0`.
impl FromStr for ActivationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.is_empty() || parts.len() > 4 || parts[0].trim().is_empty() {
            return Err(Error::Parse(format!("activation '{s}' is not of the form kind:alpha:gamma:bias")));
        }
        let kind: ActivationKind = parts[0].parse()?;
        let field = |i: usize, name: &str| -> Result<Option<f64>> {
            match parts.get(i) {
                None => Ok(None),
                Some(v) => v
                    .trim()
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Parse(format!("activation '{s}': bad {name} '{v}'"))),
            }
        };
        let alpha = match parts.get(1) {
            None => {
                if kind == ActivationKind::ReluAlpha {
                    1
                } else {
                    0
                }
            }
            Some(v) => v.trim().parse::<u32>().map_err(|_| {
                Error::Parse(format!("activation '{s}': alpha must be a non-negative integer, got '{v}'"))
            })?,
        };
        if kind != ActivationKind::ReluAlpha && kind != ActivationKind::Step && alpha != 0 {
            return Err(Error::Parse(format!("activation '{s}': alpha only applies to relu")));
        }
        let gamma = field(2, "gamma")?.unwrap_or(1.0);
        let bias = field(3, "bias")?.unwrap_or(0.0);
        if kind == ActivationKind::Step && alpha != 0 {
            return Err(Error::Parse(format!("activation '{s}': step has alpha 0")));
        }
        ActivationSpec::new(kind, alpha, gamma, bias).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn raw_eval(kind: ActivationKind, alpha: u32, x: f64) -> f64 {
    match kind {
        ActivationKind::Step => {
            if x >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        ActivationKind::ReluAlpha => {
            if x > 0.0 {
                x.powi(alpha as i32)
            } else {
                0.0
            }
        }
        ActivationKind::Sigmoid => sigmoid(x),
        ActivationKind::Arctan => x.atan(),
        ActivationKind::Softplus => {
            if x > 0.0 {
                x + (-x).exp().ln_1p()
            } else {
                x.exp().ln_1p()
            }
        }
        ActivationKind::Silu => x * sigmoid(x),
        ActivationKind::Sin => x.sin(),
        ActivationKind::Cos => x.cos(),
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn sigmoid_dd(x: Dd) -> Dd {
    if x.hi >= 0.0 {
        ((-x).exp() + 1.0).recip()
    } else {
        let e = x.exp();
        e / (e + 1.0)
    }
}

fn raw_eval_dd(kind: ActivationKind, alpha: u32, x: Dd) -> Dd {
    match kind {
        ActivationKind::Step => {
            if x.hi >= 0.0 {
                Dd::ONE
            } else {
                Dd::ZERO
            }
        }
        ActivationKind::ReluAlpha => {
            if x.hi > 0.0 {
                x.powi(alpha)
            } else {
                Dd::ZERO
            }
        }
        ActivationKind::Sigmoid => sigmoid_dd(x),
        ActivationKind::Arctan => x.atan(),
        ActivationKind::Softplus => {
            if x.hi > 0.0 {
                x + (-x).exp().ln_1p()
            } else {
                x.exp().ln_1p()
            }
        }
        ActivationKind::Silu => x * sigmoid_dd(x),
        ActivationKind::Sin => x.sin(),
        ActivationKind::Cos => x.cos(),
    }
}

/// Arc-cosine kernel `kappa(t)` of the step (`alpha = 0`) or ReLU
/// (`alpha = 1`) activation on the sphere in `R^d`:
///
/// ```text
/// alpha = 0:  (pi - arccos t) / (2 pi)
/// alpha = 1:  (sqrt(1 - t^2) + (pi - arccos t) t) / (2 pi d)
/// ```
pub fn closed_form_kappa(alpha: u32, d: usize, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(domain!("kernel argument {t} outside [-1, 1]"));
    }
    if d < 2 {
        return Err(domain!("closed_form_kappa requires d >= 2"));
    }
    let pi = std::f64::consts::PI;
    let theta = pi - t.acos();
    match alpha {
        0 => Ok(theta / (2.0 * pi)),
        1 => Ok(((1.0 - t * t).sqrt() + theta * t) / (2.0 * pi * d as f64)),
        _ => Err(domain!("closed-form arc-cosine kernel only for alpha in {{0, 1}}, got {alpha}")),
    }
}
