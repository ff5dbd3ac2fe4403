//! Numerical substrate: special functions, Legendre polynomials in dimension
//! `d`, harmonic multiplicities and weighted Gauss quadrature.

pub mod legendre;
pub mod quadrature;
pub mod special;

pub use legendre::{harmonic_dim, ln_harmonic_dim, LegendreEvaluator};
pub use quadrature::{
    gauss_jacobi, integrate_weighted, tridiagonal_eigenvalues, weight_exponent, QuadratureRule, WeightedIntegral,
};
pub use special::{funk_hecke_factor, gauss_2f1, log_beta, log_gamma, surface_area};
