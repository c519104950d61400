//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two operands use incompatible discretizations.
    #[error("dimension mismatch: {context} (left {left}, right {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A quadrature rule cannot integrate the requested polynomial degree.
    #[error(
        "quadrature rule with {nodes} nodes is exact only to degree {}, \
         but degree {required} is required",
        2 * nodes - 1
    )]
    InsufficientQuadrature { nodes: usize, required: usize },

    /// Viscosity expansion admits non-positive viscosities.
    #[error("invalid viscosity expansion: nu0 = {nu0}, nu1 = {nu1}; requires nu1 >= 0 and nu0 - nu1 > 0")]
    InvalidViscosity { nu0: f64, nu1: f64 },

    /// A field violated the real-valued (Hermitian) invariant.
    #[error("field is not real-valued: {context} (defect {defect:.3e})")]
    NotRealValued { context: &'static str, defect: f64 },

    /// An operation that needs uncertainty was called with `nu1 = 0`.
    #[error("{0} is undefined for nu1 = 0 (no destabilizing memory contribution)")]
    ZeroUncertainty(&'static str),

    /// The triple-product tensor is too small for the requested entries.
    #[error("tensor built with M = {have} but the operation needs M >= {need}")]
    TensorTooSmall { have: usize, need: usize },

    /// Invalid reduced-model configuration.
    #[error("invalid reduced-model configuration: {0}")]
    InvalidReducedConfig(String),

    /// Time span is not an integer multiple of the step size.
    #[error("time span {t_end} is not an integer multiple of dt = {dt}")]
    StepMismatch { t_end: f64, dt: f64 },

    /// Snapshot stride does not divide the step count.
    #[error("stride {stride} does not divide the total step count {steps}")]
    StrideMismatch { stride: usize, steps: usize },

    /// The state turned non-finite during integration.
    #[error("state became non-finite at t = {time} (step {step}); integration aborted")]
    BlowUp { step: usize, time: f64 },

    /// A quadrature node maps to a non-positive viscosity.
    #[error("quadrature node xi = {xi} gives non-positive viscosity nu = {nu}")]
    NonPositiveNodeViscosity { xi: f64, nu: f64 },

    /// Generic precondition failure.
    #[error("{0}")]
    Precondition(String),
}

/// Crate-wide result alias.
pub type Result<V> = std::result::Result<V, Error>;
