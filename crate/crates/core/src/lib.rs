pub mod error;
pub mod extremal;
pub mod fekete;
pub mod geometry;
pub mod measures;
mod linalg;
pub mod point;
pub mod polyspace;
pub mod rates;
pub mod cli;

pub use error::{Error, Result};
pub use point::Point;
