//! Disorder-averaged two-photon coincidence rates behind a diffusive
//! random medium: closed forms, direct quadrature and a Monte Carlo
//! random-transmission oracle.

pub mod correlation;
pub mod datasets;
pub mod error;
pub mod exec;
pub mod grid;
pub mod oracle;
pub mod quad;
pub mod rates;
pub mod special;
pub mod spectral;

pub use correlation::{CorrelationModel, CovarianceFactor};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::FrequencyGrid;
pub use spectral::{CrystalParams, PumpParams, StateSpec};
