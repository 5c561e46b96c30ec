//! Simulation kernels for a Brownian motion in the drifted Brownian potential
//! `W(x) = B(x) - kappa x / 2`.
//!
//! The crate is `no_std` and only needs `alloc`. It covers exact squared Bessel
//! transitions and local-time fields, Jacobi diffusions, stable laws, the
//! random environment with its scale objects, and the statistics and special
//! functions used to check identities in law. File formats, the command line
//! and thread pools live in the companion `rde-lab` crate.
//!
//! Every sampler takes an explicit [`RngStream`]; a stream is addressed by
//! `(seed, stream_id)` so replicas can be evaluated in any order.

#![no_std]

extern crate alloc;

pub mod besq;
pub mod environment;
pub mod error;
pub mod field;
pub mod grid;
pub mod jacobi;
pub mod localtime;
pub mod ode;
pub mod path;
pub mod quad;
pub mod replicate;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod sturm;

pub use error::{Error, Result};
pub use replicate::{Replicator, Sequential};
pub use rng::RngStream;
