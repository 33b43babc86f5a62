//! Quantum broadcast protocols on a mixed-radix state engine.
//!
//! The crate is `no_std` with `alloc`. File formats, configuration and the
//! command line live in the companion `qbcast-cli` crate.
#![no_std]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod library;
pub mod mbqc;
pub mod protocol;
pub mod tensor;

pub use error::{Error, Result};
