//! Quantum description of photon-to-LRSPP excitation on thin metal strips.
//!
//! The pipeline runs bottom-up:
//!
//! * [`materials`]: Drude-type permittivity of the metal.
//! * [`dispersion`]: bound-mode roots for the antisymmetric (ω+) and
//!   symmetric (ω−) branches, loss constant and group velocity.
//! * [`modes`]: piecewise-exponential modefunctions of the strip and of the
//!   four-layer attenuated-total-reflection geometry.
//! * [`coupling`]: photon→LRSPP overlap β, feasibility constraints and the
//!   constrained (d2, d1, ω) optimization.
//! * [`propagation`]: damped flux, mean detected counts and g²(0).
//! * [`statexfer`]: transfer and decoherence of coherent-superposition states.
//!
//! All quantities are SI: frequencies in rad/s, lengths in metres.

pub mod coupling;
pub mod dispersion;
pub mod grid;
pub mod materials;
pub mod modes;
pub mod propagation;
pub mod statexfer;

mod parallel;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

pub use coupling::{ConstraintSet, Coupler, CouplingConfig, CouplingPoint, OptimizationPath};
pub use dispersion::{Branch, ComplexWavenumber, DispersionSolution, DispersionSolver};
pub use materials::DielectricModel;
pub use modes::{FourLayerField, ModeNorms, PiecewiseExpProfile};
pub use statexfer::{CatDensity, CatState};
