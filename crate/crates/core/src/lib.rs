//! Numerical laboratory for Kirchhoff plates on an annulus with delayed
//! boundary feedback or delayed dynamical boundary controls.

pub mod assembly;
pub mod csv;
pub mod error;
pub mod evolution;
pub mod femrad;
pub mod geometry;
pub mod instability;
pub mod linalg;
pub mod plate_forms;
pub mod quadrature;
pub mod ratefit;
pub mod spectral;

pub use assembly::{
    build_generator, validate_params, DelayLine, DiscreteGenerator, FeedbackParams,
    HypothesisReport, SystemKind,
};
pub use error::{Error, Result};
pub use evolution::{simulate, EnergyBreakdown, SystemState, Trajectory};
pub use femrad::{build_mode_space, ModeSpace};
pub use geometry::{mgc_check, Annulus, MgcReport};
pub use plate_forms::{AnalyticField, Jet, PlateConfig, PolyField};
