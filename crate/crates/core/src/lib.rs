pub mod criteria;
pub mod dsl;
pub mod error;
pub mod gaussian;
pub mod graph;
pub mod interface;
pub mod protocols;

pub use error::{Error, Result};
