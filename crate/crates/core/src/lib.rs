//! Exact single-mode field dynamics for `N` two-level molecules (the
//! Tavis–Cummings model), together with the average-field approximation
//! and a catalogue of closed-form special cases used as oracles.
//!
//! Everything is dimensionless: time is `τ = γt` with `γ = Ω|κ|`, the
//! detuning is `β = (ω − Ω)/(Ω|κ|)` and observable prefactors are set to 1.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] — half-integer quantum numbers, Dicke blocks, degeneracies;
//! * [`spectral`] — per-block tridiagonal eigensystems and a shared cache;
//! * [`distributions`] — truncated photon densities;
//! * [`dynamics`] — the exact S₁, S₂, S₄ and ⟨E⁻E⁺⟩ engine;
//! * [`afa`] — the average-field approximation and its diagnostics;
//! * [`closedforms`] — literal closed-form results;
//! * [`cli`] — configuration, presets, sweeps and validation used by the binary.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod afa;
pub mod cli;
pub mod closedforms;
pub mod distributions;
pub mod dynamics;
pub mod error;
pub mod model;
mod numeric;
pub mod spectral;

pub use distributions::PhotonDensity;
pub use dynamics::{ObservableKind, ObservableSeries, S2Pairing, Scenario, TlmInitialState};
pub use error::{Error, Result};
pub use model::{DickeBlock, HalfInt, ModelParams};
pub use spectral::{BlockEigensystem, SpectralCache};
