pub mod error;
pub mod integrator;
pub mod io;
pub mod model;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
