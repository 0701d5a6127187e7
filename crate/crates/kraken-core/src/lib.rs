//! Simulation and reconstruction of photoelectron quantum states measured
//! with a delayed bichromatic probe.
//!
//! The crate covers the full desk-scale pipeline: ground-truth density
//! matrices for helium- and argon-like targets, synthesis of delay-resolved
//! spectrograms including spectrometer response and shot noise, per-energy
//! oscillation fits, raw subdiagonal assembly of the density matrix, and a
//! physically constrained Bayesian reconstruction (MAP + Hamiltonian Monte
//! Carlo) with credible intervals for purity and concurrence.

pub mod density;
pub mod eigen;
pub mod error;
pub mod extraction;
pub mod grid;
pub mod metrics;
pub mod model;
pub mod par;
pub mod response;
pub mod spectrogram;
pub mod tol;

pub use density::{hermitize, min_eigenvalue, project_psd, DensityMatrix, Wavepacket, HBAR_EV_FS};
pub use error::{Error, Result};
pub use grid::EnergyGrid;
pub use metrics::{concurrence, fidelity_amplitude, purity};
pub use model::{model_density_matrix, ProbePair, TargetModel, XuvPulse};
pub use response::{apply_response, ResponseFunction};
pub use spectrogram::{delay_axis, simulate_spectrogram, simulate_spectrogram_seq, Spectrogram};
