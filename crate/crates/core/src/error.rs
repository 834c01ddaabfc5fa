//! Error types shared across the crate.

use thiserror::Error;

/// Coarse classification used by callers that need to map failures onto
/// process exit codes (input -> 2, resource cap -> 3, structural -> 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid arguments or unsupported variant for the requested operation.
    Input,
    /// A hard resource cap (state count, event budget) would be exceeded.
    ResourceCap,
    /// The instance violates a structural assumption the theory needs
    /// (non-disjoint top edges, frustrated cluster, overlapping windows, ...).
    Structural,
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("operation requires the {required} coupling-law variant")]
    UnsupportedVariant { required: &'static str },

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}; {hint}")]
    ResourceCap {
        what: &'static str,
        needed: u64,
        cap: u64,
        hint: &'static str,
    },

    #[error("top edges e_{l1} and e_{l2} share a vertex; well decomposition undefined")]
    NonDisjointEdges { l1: usize, l2: usize },

    #[error("resonance windows of order statistics {lower} and {upper} overlap (spacing diagnostics fail)")]
    OverlappingWindows { lower: usize, upper: usize },

    #[error("bond configuration has a frustrated open cycle through edge ({i},{j})")]
    FrustratedCycle { i: usize, j: usize },

    #[error("boundary condition conflicts with cluster structure at vertex {vertex}")]
    TauConflict { vertex: usize },

    #[error("query time {t} outside trajectory horizon {horizon}")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Input(_) | Error::UnsupportedVariant { .. } | Error::OutOfHorizon { .. } => {
                ErrorKind::Input
            }
            Error::ResourceCap { .. } => ErrorKind::ResourceCap,
            Error::NonDisjointEdges { .. }
            | Error::OverlappingWindows { .. }
            | Error::FrustratedCycle { .. }
            | Error::TauConflict { .. }
            | Error::Quadrature(_) => ErrorKind::Structural,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
