pub mod checker;
pub mod cli;
pub mod convex;
pub mod entropy;
pub mod error;
pub mod expr;
pub mod measure1d;
pub mod quad;
pub mod tester;

pub use error::{Error, Result};
