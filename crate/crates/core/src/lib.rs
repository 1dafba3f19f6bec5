//! Structural observability, identifiability and input reconstructibility
//! of nonlinear ODE models.

pub mod error;
pub mod model;
pub mod point;
pub mod sym;

pub use error::{Error, Result};
pub mod algorithms;
pub mod budget;
pub mod lie;
pub mod rank;
pub mod report;

pub use algorithms::{analyze, run_fispo, run_orcdf, Algorithm, AnalysisOptions};
pub use model::{parse_model, Model};
pub use report::{Report, Termination, Verdict};
