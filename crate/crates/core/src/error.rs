//! Error type shared by all modules.

/// Errors produced by the channel model, the special-function kernel, and
/// the capacity evaluators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input violated a documented invariant; the message names it.
    #[error("parameter domain violation: {0}")]
    Domain(String),

    /// A series did not meet its tolerance within the term budget.
    #[error("{what}: series did not converge within {max_terms} terms")]
    NonConvergence {
        what: &'static str,
        max_terms: usize,
    },

    /// A quadrature did not stabilize within its refinement budget.
    #[error("{what}: quadrature did not converge")]
    Quadrature { what: &'static str },

    /// The certified truncation bound only applies for series argument z < 1.
    #[error("truncation bound inapplicable: series argument z = {z} >= 1")]
    BoundInapplicable { z: f64 },

    /// The high-SNR closed form requires m_x > A.
    #[error("high-SNR asymptote requires m_x > A (m_x = {m_x}, A = {a})")]
    AsymptoteInvalid { m_x: f64, a: f64 },

    /// The low-SNR curvature is non-negative, so the wideband slope is undefined.
    #[error("degenerate low-SNR characterization: {0}")]
    DegenerateLowSnr(String),
}

pub type Result<T> = std::result::Result<T, Error>;
