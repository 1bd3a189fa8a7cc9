//! Dyson-Schwinger towers of zero-dimensional field theories.

pub mod asymptotics;
pub mod d1;
pub mod error;
pub mod mp;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod symbolic;
pub mod tower;

pub use error::{Error, Result};
