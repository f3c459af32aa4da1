pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod laws;
pub mod lp;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
