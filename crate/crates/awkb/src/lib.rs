//! Semiclassical machinery for the one-dimensional stationary Schrödinger
//! equation, built around the *alternating WKB* (a-WKB) rewriting of the
//! Bremmer multiple-reflection series.
//!
//! The crate is organised as a pipeline:
//!
//! * [`potential`] — potential models (harmonic, centrifugal with optional
//!   Langer modification, custom polynomial), classical momenta and turning
//!   points.
//! * [`quadrature`] — adaptive Gauss–Kronrod integration for real and complex
//!   integrands, phase/action integrals with square-root endpoint handling,
//!   cumulative reflection integrals, oscillatory tails, and complex contour
//!   paths.
//! * [`wkb`] — first- and second-order WKB wavefunctions plus an
//!   asymptoticity report that flags where the expansion is trustworthy.
//! * [`bremmer`] — the coupled amplitude ODE system, its exact numerical
//!   solution, closed-form first-order amplitudes, the nested-integral
//!   iteration of the multiple-reflection hierarchy, and a-WKB wavefunction
//!   assembly for bound and scattering geometries.
//! * [`quantization`] — action integrals, Bohr–Sommerfeld eigenenergies, and
//!   complex-contour diagnostics (winding of the momentum logarithm,
//!   reflection-correction contour integrals) behind the exactness argument
//!   for the harmonic spectrum.
//! * [`reference`] — independent oracles: exact harmonic-oscillator
//!   eigenstates, Riccati–Bessel functions, a Numerov integrator,
//!   normalization policies and error metrics.
//!
//! Conventions used throughout:
//!
//! * Classical momentum `p(x) = sqrt(2 m (E - V(x)))`, continued as
//!   `p = i |p|` in classically forbidden regions.
//! * Phases are accumulated as `X(x) = (1/ħ) ∫ p`, oriented so that `X ≥ 0`
//!   between a point and the turning point used as phase reference.
//! * Amplitudes `a`, `b` multiply `e^{+iX}` and `e^{-iX}` respectively; for
//!   real potentials and real energies the physical branch keeps
//!   `b = conj(a)`.

pub mod bremmer;
pub mod potential;
pub mod quadrature;
pub mod quantization;
pub mod reference;
pub mod wkb;

mod table;

pub use table::{GridEnd, Method, NormalizationRecord, WaveTable};

/// Complex scalar used for amplitudes, wavefunctions and contour integrals.
pub type Complex = num_complex::Complex64;
