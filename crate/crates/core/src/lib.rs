pub mod channel;
pub mod codebook;
pub mod error;
pub mod lattice;
pub mod ml;
pub mod precoder;
pub mod receiver;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
