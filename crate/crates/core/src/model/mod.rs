//! Domain model: attribute distributions, deletion kernels, arrival
//! processes, observation windows, and the mean measures they induce.
//!
//! Every value here is immutable after construction and safe to share
//! across worker threads. Random streams are never stored in the model;
//! each simulation worker owns its own stream.

mod arrivals;
mod dist;
mod kernel;
mod measure;
mod window;

pub use arrivals::{ArrivalSpec, Interarrival};
pub use dist::AttributeDistribution;
pub use kernel::{DeletionKernel, DeletionProb};
pub use measure::{lifetime_survival, mean_measure, mean_measure_with, sample_attribute};
pub use window::ObservationWindow;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("window interval [{lo}, {hi}) is malformed or overlaps a neighbour")]
    MalformedWindow { lo: f64, hi: f64 },
    #[error("window reaches the essential supremum of the attribute space at {sup}")]
    WindowTouchesSupremum { sup: f64 },
    #[error("window leaves the attribute space (interval [{lo}, {hi}) not inside the support)")]
    WindowOutsideSupport { lo: f64, hi: f64 },
    #[error("attribute {0} lies outside the attribute space")]
    AttributeOutsideSpace(f64),
    #[error("deletion probability {value} at {at} is outside (0, 1]")]
    DeletionProbOutOfRange { at: f64, value: f64 },
    #[error("kernel denominator vanishes at {0}")]
    KernelDenominatorZero(f64),
    #[error("mean-measure integrand diverges near {near}; the window reaches too far into the upper tail")]
    DivergentIntensity { near: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] crate::quad::QuadError),
}

impl ModelError {
    pub(crate) fn from_quad(err: crate::quad::QuadError) -> ModelError {
        match err {
            crate::quad::QuadError::Divergent { near, .. } => {
                ModelError::DivergentIntensity { near }
            }
            other => ModelError::Quadrature(other),
        }
    }
}
