//! Space-time stabilized finite element solver for unique continuation of the
//! wave equation with piecewise-constant wave speed.

pub mod assembly;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod postproc;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;

pub use error::{Error, Result};
