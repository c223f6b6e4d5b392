//! Bergman projections on the disc, polydisc and Hartogs triangle, with the
//! norm, weight and sweep machinery used to probe their endpoint behaviour.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod norms;
pub mod numeric;
pub mod projector;
pub mod weights;

pub use error::{Error, Result};

/// Library version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
