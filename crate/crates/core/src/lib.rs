//! Approximate counting for spin systems through perfect marginal samplers,
//! batched samplers and self-avoiding-walk trees with flowers.

pub mod aggregate;
pub mod corpus;
pub mod counting;
pub mod error;
pub mod graph;
pub mod models;
pub mod oracle;
pub mod rng;
pub mod samplers;
pub mod sampling;
pub mod saw;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
