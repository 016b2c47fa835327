//! Simulation and fluid-limit analysis of overloaded cyclic polling systems
//! with multigated service.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command-line
//! driver and the thread-pool executor live in the `polling-cli` crate.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod branching;
pub mod dist;
pub mod error;
pub mod exec;
pub mod fluid;
pub mod lab;
pub mod model;
pub mod perron;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use model::{Model, ModelConfig, QueueSpec};
pub use rng::{RngStream, StreamFamily};
