//! Simulation and analysis toolkit for a dissipation-coupled two-channel
//! photon-pair source: complex eigenvalues and exceptional-point location,
//! Doppler-averaged susceptibilities, correlation waveforms G²(τ) across the
//! strong/coalesced/weak coupling regimes, coincidence-count simulation,
//! eigenvalue fitting, and Cauchy–Schwarz analysis.
//!
//! Unit conventions: all rates are multiples of Γ41 and times are multiples
//! of 1/Γ41 internally; MHz and ns appear only at I/O boundaries (see
//! [`params::SystemParams`] converters).

pub mod config;
pub mod counting;
pub mod eigensystem;
pub mod error;
pub mod fitting;
pub mod io;
pub mod params;
pub mod propagation;
pub mod susceptibility;
pub mod waveform;

pub use error::{Error, Result};
