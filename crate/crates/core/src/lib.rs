//! Simulation and verification toolkit for multiparticle W-class states.

pub mod corelin;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod optics;
pub mod protocols;
pub mod report;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
