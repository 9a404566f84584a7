pub mod error;
pub mod geometry;
pub mod harness;
pub mod heis;
pub mod nctorus;
pub mod quadrature;
pub mod sections;
pub mod weyl;

pub use error::{Error, Result};
