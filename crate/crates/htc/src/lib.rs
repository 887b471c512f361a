//! Exact diagonalization of the Holstein-Tavis-Cummings model of N
//! vibronically coupled emitters in a lossy optical microcavity, with the
//! stationary spectroscopic observables built on top of it: absorption,
//! photoluminescence, hot-band absorption, cavity dispersion diagrams and
//! radiative decay rates.

pub mod analysis;
pub mod basis;
pub mod eigensolver;
pub mod error;
pub mod franck_condon;
pub mod hamiltonian;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod pipeline;
pub mod spectra;
pub mod symmetry;

pub use error::{HtcError, Result};
