//! Two-color interference stabilization of a two- or three-level atom with
//! open one-photon ionization channels.
//!
//! Everything is expressed in the scaled variables that make the dynamics
//! invariant under the rescaling Δ → λΔ, ε² → λε², τ → τ/λ:
//!
//! - `x = I₂/I₁` — ratio of peak intensities,
//! - `δ = Δ/I₁` — field-free Raman detuning,
//! - `θ = τ·I₁` — interaction time,
//!
//! where "intensity" means the squared field-strength amplitude ε₀² in atomic
//! units (so I₁ = 1 a.u. corresponds to ε₁₀ = 1 a.u.; multiply by
//! 3.51 × 10¹⁶ W/cm² to convert). Under this convention the dimensionless
//! ionization width of an isolated level is ½α″ and every polarizability
//! constant in [`atoms`] enters the scaled equations verbatim.
//!
//! Module map:
//! - [`atoms`] — complex polarizability datasets, file I/O, consistency checks;
//! - [`dressed`] — quasienergies and widths of the dressed two-level system;
//! - [`optimal`] — closed-form and numerical optimization of the narrow width;
//! - [`pulses`] — the rectangular / smoothed-sin² / pure-sin² envelope family;
//! - [`dynamics`] — analytic and adaptive-ODE propagation of bound amplitudes;
//! - [`sweep`] — grid scans with deterministic CSV output.

pub mod atoms;
pub mod dressed;
pub mod dynamics;
pub mod optimal;
pub mod pulses;
pub mod sweep;

pub use atoms::AtomDataset;
pub use dressed::{BranchRule, DrivePoint, QuasienergyPair};
pub use dynamics::Outcome;
pub use optimal::LinearLaw;
pub use pulses::EnvelopeSpec;
pub use sweep::SweepResult;

/// Complex scalar used throughout (polarizabilities, quasienergies, amplitudes).
pub type C64 = num_complex::Complex64;
