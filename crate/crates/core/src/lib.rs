pub mod channel;
pub mod error;
pub mod harness;
pub mod netgen;
pub mod precoder;
pub mod rates;
pub mod rng;
pub mod scenario;
pub mod scheduler;
pub mod training;
pub mod units;

pub use error::{Error, Result};
