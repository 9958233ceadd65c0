pub mod error;
pub mod experiments;
pub mod filtration;
pub mod io;
pub mod persistence;
pub mod point_process;
pub mod rng;
pub mod stabilization;

pub use error::{Error, Result};
pub use rng::RngSeed;
