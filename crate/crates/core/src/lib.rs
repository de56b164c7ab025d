//! Steady-state photon statistics of driven, lossy cavity–emitter systems.
//!
//! Energies and rates are in eV with ħ = 1. The basis is the product
//! `cavity ⊗ e₁ ⊗ … ⊗ e_N` with the cavity index slowest.

pub mod eom;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod observables;
pub mod scenarios;
pub mod spectra;

pub use error::{Error, Result};
pub use faer::c64;
pub use hilbert::{EmitterSpec, OperatorMatrix, SystemSpec};
pub use lindblad::{DensityMatrix, Liouvillian};
pub use observables::{CorrelationResult, PhotonStatistics, Regime};
pub use scenarios::{Engine, SweepResult, SweepSpec};
pub use spectra::{LevelDiagram, SpectrumResult};
