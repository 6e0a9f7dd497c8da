//! Thermal-state Deutsch-Jozsa on liquid-state NMR spin systems: density
//! operator simulation, oracle construction, effective-Hamiltonian pulse
//! compilation and multiplet prediction.

pub mod cli;
pub mod config;
pub mod dj;
pub mod error;
pub mod heff;
pub mod oracle;
pub mod pulse;
pub mod spectrum;
pub mod spin_algebra;
pub mod thermal;

pub use error::{Error, Result};
