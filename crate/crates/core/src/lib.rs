pub mod diffusion;
pub mod error;
pub mod estimator;
pub mod family;
pub mod graph;
pub mod hitting;
pub mod reduction;
pub mod shapley;

pub use error::{Error, Result};
