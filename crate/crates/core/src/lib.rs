pub mod demand;
pub mod error;
pub mod fixtures;
pub mod formulation;
pub mod netgraph;
pub mod plan;
pub mod radio;
pub mod scenario;
pub mod solver;
pub mod validator;

pub use error::{Error, Result};
