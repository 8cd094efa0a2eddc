pub mod cli;
pub mod error;
pub mod filtering;
pub mod frontier;
pub mod measures;
pub mod numerics;
pub mod sampling;
pub mod states;

pub use error::{Error, Result};
