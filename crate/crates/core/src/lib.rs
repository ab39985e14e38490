pub mod defects;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod qtensor;
pub mod quadrature;
pub mod seeds;
pub mod solver;

pub use error::{Error, Result};
