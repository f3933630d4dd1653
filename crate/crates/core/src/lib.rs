pub mod cli;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod strategies;
pub mod sweep;

pub use error::{Error, Result};
