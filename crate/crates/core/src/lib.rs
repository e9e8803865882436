//! Transient voltage simulation of a multi-machine grid and cross-entropy
//! placement of battery storage units to improve post-fault voltage recovery.

pub mod bess;
pub mod dynsim;
pub mod error;
pub mod netcase;
pub mod optim;
pub mod powerflow;
pub mod study;
pub mod vsi;

pub use error::{Error, Result};
