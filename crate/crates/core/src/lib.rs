pub mod algebraic;
pub mod approx;
pub mod cli;
pub mod density;
pub mod error;
pub mod expansion;
pub mod experiment;
pub mod real;

pub use error::{Error, Result};
