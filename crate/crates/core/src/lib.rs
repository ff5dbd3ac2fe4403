//! Mercer spectra of activation-induced dot-product kernels on the sphere,
//! trace-decay curves and random-feature experiments.

// Guards like `!(x > 0.0)` are written that way to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activation;
pub mod bounds;
pub mod check;
pub mod dd;
pub mod error;
pub mod experiment;
pub mod mathcore;
pub mod oracle;
pub mod spectrum;

pub use activation::{ActivationKind, ActivationSpec};
pub use bounds::{BoundCurve, Direction};
pub use error::{Error, Result};
pub use experiment::{FeatureKind, SeparationConfig, SeparationReport, TargetDirection};
pub use mathcore::{LegendreEvaluator, QuadratureRule};
pub use spectrum::{KernelSpectrum, SpectrumOptions, SupTraceDecay, TraceDecay, TraceMethod, TraceRequest};
