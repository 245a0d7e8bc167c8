//! Numerical core for self-testing tilted GHZ-state measurements in star
//! networks: exact network simulation and correlation verification, swap
//! channels and Choi maps, a moment-matrix SDP lower bound on extraction
//! fidelity, and the closed-form measurement-quality bound.

pub mod error;
pub mod kernel;
pub mod bellops;
pub mod npa;
pub mod qstates;
pub mod robustness;
pub mod starnet;
pub mod swapiso;

pub use error::{Error, Result};
pub use kernel::{ComplexMatrix, RegisterShape};
