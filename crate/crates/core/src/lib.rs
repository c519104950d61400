//! Spectral Galerkin solver for the viscous Burgers equation with an
//! uncertain viscosity coefficient, together with Mori-Zwanzig reduced
//! models for the mean-field chaos coefficients.
//!
//! The solution is expanded twice: in Fourier modes over the periodic
//! domain `[0, 2π]` and in Legendre polynomials over the uniform random
//! variable `ξ ∈ [-1, 1]` that parametrizes the viscosity
//! `ν(ξ) = ν₀ + ν₁ ξ`. Galerkin projection yields a closed ODE system for
//! the chaos coefficients `u_{kr}(t)` (the "full system"). Reduced models
//! keep only the mean coefficients `u_{k0}` and close the eliminated
//! dynamics with memory kernels evaluated in closed form; the memory
//! integrals themselves are replaced by a finite hierarchy of auxiliary
//! ODEs with a trapezoidal closure.
//!
//! Module map:
//! - [`basis`]: Legendre polynomials, Gauss-Legendre quadrature and the
//!   normalized triple-product tensor `c_{lmr}` with its sparsity rule.
//! - [`field`]: Fourier-space fields, truncated convolution and the
//!   deterministic Burgers right-hand side.
//! - [`chaos`]: the full Fourier-Legendre Galerkin system.
//! - [`reduced`]: Markovian term, closed-form memory kernels and the
//!   finite-memory ODE hierarchy.
//! - [`select`]: a-priori memory-length selection from the linear
//!   stability bracket.
//! - [`timestep`]: the second-order explicit integrator (Heun).
//! - [`stats`]: mean energy and mean squared gradient norm diagnostics.
//! - [`validation`]: independent oracles (non-intrusive quadrature,
//!   Monte Carlo, linear-decay demo, matrix-exponential memory
//!   integrals).
//!
//! All numerical kernels are generic over the scalar type through
//! [`scalar::Real`]; the `*64` aliases below fix `f64` for everyday use.

pub mod basis;
pub mod chaos;
pub mod error;
pub mod field;
pub mod reduced;
pub mod scalar;
pub mod select;
pub mod stats;
pub mod timestep;
pub mod validation;

pub use error::Error;
pub use scalar::Real;

/// Complex type used throughout the public API.
pub use num_complex::Complex;

/// `f64` quadrature rule.
pub type QuadratureRule64 = basis::QuadratureRule<f64>;
/// `f64` triple-product tensor.
pub type TripleTensor64 = basis::TripleTensor<f64>;
/// `f64` Fourier field.
pub type FourierField64 = field::FourierField<f64>;
/// `f64` chaos state.
pub type ChaosState64 = chaos::ChaosState<f64>;
/// `f64` viscosity expansion.
pub type ViscosityExpansion64 = chaos::ViscosityExpansion<f64>;
/// `f64` reduced-model configuration.
pub type ReducedConfig64 = reduced::ReducedConfig<f64>;
/// `f64` reduced-model state.
pub type ReducedState64 = reduced::ReducedState<f64>;
