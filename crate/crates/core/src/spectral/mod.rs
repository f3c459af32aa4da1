//! Periodic fields, transforms and differential operators on `[0, 2πL)²`.

mod fft;
pub mod field;
pub mod grid;
pub mod ops;
pub mod physical;
pub mod snapshot;

pub use field::{ScalarField, VectorField};
pub use grid::{CutoffIndex, Grid};
pub use ops::*;
pub use physical::PhysicalField;
pub use snapshot::Snapshot;
